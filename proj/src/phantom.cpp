#include "vesselfuse/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vesselfuse/parallel.hpp"

namespace vfuse {

namespace {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

bool inside_segment(const Segment& s, const Vec3& p) {
    const Vec3 ab = sub(s.b, s.a);
    const Vec3 ap = sub(p, s.a);
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(ap, ab) / len2 : 0.0;
    if (!s.capped && (t < 0.0 || t > 1.0)) return false;
    t = std::clamp(t, 0.0, 1.0);
    const Vec3 d = {ap[0] - t * ab[0], ap[1] - t * ab[1], ap[2] - t * ab[2]};
    return dot(d, d) <= s.radius * s.radius;
}

Vec3 centre(const Geometry& g) {
    Vec3 c;
    for (int k = 0; k < 3; ++k) c[k] = g.origin[k] + 0.5 * (g.dims[k] - 1) * g.spacing[k];
    return c;
}

Vec3 extent(const Geometry& g) {
    return {g.dims.nx * g.spacing[0], g.dims.ny * g.spacing[1], g.dims.nz * g.spacing[2]};
}

}  // namespace

Phantom render_phantom(const PhantomSpec& spec) {
    spec.geometry.validate();
    if (spec.noise_sigma < 0.0) throw UsageError("noise sigma must be >= 0");
    const Geometry& g = spec.geometry;
    Phantom ph{Volume3D(g, 0.0), BinaryMask(g, 0), spec};
    parallel_for(0, g.dims.nz, [&](std::size_t z) {
        for (std::size_t y = 0; y < g.dims.ny; ++y) {
            for (std::size_t x = 0; x < g.dims.nx; ++x) {
                const Vec3 p = g.world(x, y, z);
                bool in = false;
                for (const auto& s : spec.segments) in = in || inside_segment(s, p);
                for (const auto& s : spec.spheres) {
                    const Vec3 d = sub(p, s.center);
                    in = in || dot(d, d) <= s.radius * s.radius;
                }
                for (const auto& s : spec.slabs) {
                    const double nn = std::sqrt(dot(s.normal, s.normal));
                    in = in || std::abs(dot(sub(p, s.point), s.normal)) / nn <= s.half_thickness;
                }
                ph.mask.at(x, y, z) = in ? 1 : 0;
            }
        }
    });
    // Noise is drawn serially in voxel order so it does not depend on the thread count.
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < ph.intensity.size(); ++i) {
        double v = spec.background + (ph.mask[i] ? spec.contrast : 0.0);
        if (spec.noise_sigma > 0.0) v += spec.noise_sigma * normal(rng);
        ph.intensity[i] = static_cast<float>(v);
    }
    return ph;
}

Geometry cube_geometry(std::size_t n, double spacing) {
    Geometry g;
    g.dims = {n, n, n};
    g.spacing = {spacing, spacing, spacing};
    g.validate();
    return g;
}

PhantomSpec tube_spec(const Geometry& g, double radius_mm, double length_mm) {
    if (!(radius_mm > 0.0) || !(length_mm > 0.0)) throw UsageError("tube radius and length must be > 0");
    PhantomSpec s;
    s.kind = "tube";
    s.geometry = g;
    const Vec3 c = centre(g);
    s.segments.push_back({{c[0], c[1], c[2] - 0.5 * length_mm}, {c[0], c[1], c[2] + 0.5 * length_mm}, radius_mm, false});
    return s;
}

PhantomSpec y_spec(const Geometry& g, double trunk_radius_mm, double twig_radius_mm) {
    if (!(trunk_radius_mm > 0.0) || !(twig_radius_mm > 0.0)) throw UsageError("Y radii must be > 0");
    PhantomSpec s;
    s.kind = "y";
    s.geometry = g;
    const Vec3 c = centre(g);
    const Vec3 e = extent(g);
    const Vec3 j = c;
    s.segments.push_back({{c[0], c[1], g.origin[2] + 0.1 * e[2]}, j, trunk_radius_mm, true});
    s.segments.push_back({j, {c[0] - 0.25 * e[0], c[1], g.origin[2] + 0.9 * e[2]}, twig_radius_mm, true});
    s.segments.push_back({j, {c[0] + 0.25 * e[0], c[1], g.origin[2] + 0.9 * e[2]}, twig_radius_mm, true});
    s.junctions.push_back(j);
    return s;
}

PhantomSpec two_tubes_spec(const Geometry& g, double small_radius_mm, double large_radius_mm) {
    PhantomSpec s;
    s.kind = "two-tubes";
    s.geometry = g;
    const Vec3 c = centre(g);
    const Vec3 e = extent(g);
    const double half = 0.3 * e[2];
    const double xs = g.origin[0] + 0.25 * e[0], xl = g.origin[0] + 0.65 * e[0];
    s.segments.push_back({{xs, c[1], c[2] - half}, {xs, c[1], c[2] + half}, small_radius_mm, false});
    s.segments.push_back({{xl, c[1], c[2] - half}, {xl, c[1], c[2] + half}, large_radius_mm, false});
    return s;
}

PhantomSpec blob_spec(const Geometry& g, double radius_mm) {
    PhantomSpec s;
    s.kind = "blob";
    s.geometry = g;
    s.spheres.push_back({centre(g), radius_mm});
    return s;
}

PhantomSpec plate_spec(const Geometry& g, double thickness_mm) {
    PhantomSpec s;
    s.kind = "plate";
    s.geometry = g;
    s.slabs.push_back({centre(g), {0.0, 0.0, 1.0}, 0.5 * thickness_mm});
    return s;
}

PhantomSpec phantom_by_kind(const std::string& kind, const Geometry& g, double size_mm, double length_mm,
                            double noise_sigma, std::uint64_t seed) {
    const Vec3 e = extent(g);
    const double span = std::min({e[0], e[1], e[2]});
    PhantomSpec s;
    if (kind == "tube" || kind == "noisy-tube") {
        s = tube_spec(g, size_mm > 0.0 ? size_mm : 2.0, length_mm > 0.0 ? length_mm : 0.75 * e[2]);
        if (kind == "noisy-tube" && noise_sigma <= 0.0) noise_sigma = 0.1;
        s.kind = kind;
    } else if (kind == "y") {
        s = y_spec(g);
    } else if (kind == "two-tubes") {
        s = two_tubes_spec(g);
    } else if (kind == "blob") {
        s = blob_spec(g, size_mm > 0.0 ? size_mm : 0.2 * span);
    } else if (kind == "plate") {
        s = plate_spec(g, size_mm > 0.0 ? size_mm : 4.0);
    } else {
        throw UsageError("unknown phantom kind '" + kind + "' (tube, y, two-tubes, noisy-tube, blob, plate)");
    }
    s.noise_sigma = noise_sigma;
    s.seed = seed;
    return s;
}

}  // namespace vfuse
