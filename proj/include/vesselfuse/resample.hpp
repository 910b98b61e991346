#pragma once

#include "vesselfuse/volume.hpp"

namespace vfuse {

/// Cubic B-spline coefficients of a volume (mirror boundary). Evaluating the
/// spline at integer voxel coordinates reproduces the source intensities.
struct BSplineCoeffField {
    Volume3D coeffs;

    /// Spline value at continuous voxel-index coordinates.
    double evaluate(double x, double y, double z) const;
};

enum class Interpolation { nearest, bspline };

/// min(sx, sy, sz) on all three axes.
Vec3 finest_isotropic_spacing(const Volume3D& vol);
Vec3 finest_isotropic_spacing(const Geometry& geom);

/// Recursive cubic B-spline prefilter along each axis. Requires >= 4 voxels per axis.
BSplineCoeffField prefilter(const Volume3D& vol);

/// Output dims per axis are round(n * s / t) (at least 1); the world origin is kept
/// and output voxel k samples source index k * t / s.
Dims resampled_dims(const Geometry& geom, const Vec3& target);

/// Cubic B-spline resampling onto a grid with the given spacing. The spline is
/// evaluated separably, which is exact for the tensor-product basis.
Volume3D resample(const Volume3D& vol, const Vec3& target,
                  Interpolation mode = Interpolation::bspline);

/// Masks stay binary: nearest-neighbour lookup, or spline evaluation thresholded at 0.5.
BinaryMask resample(const BinaryMask& mask, const Vec3& target,
                    Interpolation mode = Interpolation::nearest);

inline Volume3D resample_isotropic(const Volume3D& vol, double target_mm) {
    return resample(vol, Vec3{target_mm, target_mm, target_mm});
}

/// True when every voxel is exactly 0 or 1.
bool looks_binary(const Volume3D& vol);

}  // namespace vfuse
