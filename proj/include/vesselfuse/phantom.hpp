#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vesselfuse/volume.hpp"

namespace vfuse {

/// Cylinder around the segment a-b (world mm). Capped segments are capsules.
struct Segment {
    Vec3 a{};
    Vec3 b{};
    double radius = 1.0;
    bool capped = false;
};

struct Sphere {
    Vec3 center{};
    double radius = 1.0;
};

/// Infinite slab |(p - point) . normal| <= half_thickness; normal is normalised on use.
struct Slab {
    Vec3 point{};
    Vec3 normal{0.0, 0.0, 1.0};
    double half_thickness = 0.5;
};

struct PhantomSpec {
    std::string kind;
    Geometry geometry;
    std::vector<Segment> segments;
    std::vector<Sphere> spheres;
    std::vector<Slab> slabs;
    std::vector<Vec3> junctions;   ///< ground-truth bifurcation points, mm
    double background = 0.0;
    double contrast = 1.0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

struct Phantom {
    Volume3D intensity;   ///< background + contrast inside + N(0, noise_sigma), float-representable
    BinaryMask mask;      ///< voxel centres inside any shape
    PhantomSpec spec;
};

Phantom render_phantom(const PhantomSpec& spec);

/// Cubic grid of n voxels per side at isotropic spacing, origin 0.
Geometry cube_geometry(std::size_t n, double spacing);

/// Flat-ended straight tube along z through the volume centre.
PhantomSpec tube_spec(const Geometry& g, double radius_mm, double length_mm);

/// Capsule trunk (along +z) ending at the centre, splitting into two capsule twigs.
PhantomSpec y_spec(const Geometry& g, double trunk_radius_mm = 4.0, double twig_radius_mm = 1.0);

/// Two disjoint parallel flat-ended tubes along z.
PhantomSpec two_tubes_spec(const Geometry& g, double small_radius_mm = 1.0, double large_radius_mm = 4.0);

PhantomSpec blob_spec(const Geometry& g, double radius_mm);
PhantomSpec plate_spec(const Geometry& g, double thickness_mm);

/// Builds a spec by kind name: tube, y, two-tubes, noisy-tube, blob, plate.
/// `size_mm` is the tube radius (tube kinds), blob radius or plate thickness;
/// a value <= 0 selects the kind's default.
PhantomSpec phantom_by_kind(const std::string& kind, const Geometry& g, double size_mm, double length_mm,
                            double noise_sigma, std::uint64_t seed);

}  // namespace vfuse
