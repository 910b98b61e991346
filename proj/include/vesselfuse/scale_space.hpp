#pragma once

#include <array>
#include <vector>

#include "vesselfuse/volume.hpp"

namespace vfuse {

/// Symmetric 3x3 matrix stored as its six unique components.
struct SymMat3 {
    double xx = 0, yy = 0, zz = 0, xy = 0, xz = 0, yz = 0;

    double trace() const { return xx + yy + zz; }
    double det() const {
        return xx * (yy * zz - yz * yz) - xy * (xy * zz - yz * xz) + xz * (xy * yz - yy * xz);
    }
    double frobenius() const;
};

/// Eigenvalues ordered by |l1| <= |l2| <= |l3|; equal magnitudes are ordered
/// by signed value ascending.
struct EigenTriple {
    double l1 = 0, l2 = 0, l3 = 0;
};

/// Per-voxel Hessians at scale `sigma` (mm), gamma-normalised by sigma^2.
struct SymMat3Field {
    Geometry geometry;
    double sigma = 0.0;
    std::vector<SymMat3> data;
};

/// Per-axis standard deviation in voxels for a physical sigma.
Vec3 voxel_sigmas(const Geometry& geom, double sigma_mm);

/// Separable Gaussian convolution (kernel truncated at 5 sigma, renormalised,
/// half-sample mirror boundary). Throws UsageError for sigma <= 0.
Volume3D gaussian_smooth(const Volume3D& vol, double sigma_mm);

/// Smooth at sigma, then central differences in mm, scaled by sigma^2.
/// Sigma below the finest spacing is clamped up to it with a warning.
SymMat3Field hessian_at_scale(const Volume3D& vol, double sigma_mm);

/// Closed-form trigonometric solution; near-repeated roots fall back to Jacobi sweeps.
EigenTriple eig_sym3(const SymMat3& m);

/// eig_sym3 over a whole field.
std::vector<EigenTriple> eigenvalues(const SymMat3Field& field);

}  // namespace vfuse
