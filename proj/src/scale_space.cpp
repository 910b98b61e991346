#include "vesselfuse/scale_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vesselfuse/parallel.hpp"

namespace vfuse {

namespace {

// Half-sample symmetric extension: ... b a | a b c ... | c b ...
inline std::size_t reflect(std::int64_t k, std::int64_t n) {
    const std::int64_t period = 2 * n;
    k %= period;
    if (k < 0) k += period;
    return static_cast<std::size_t>(k < n ? k : period - 1 - k);
}

std::vector<double> gaussian_kernel(double sigma_vox) {
    const auto radius = static_cast<std::int64_t>(std::ceil(5.0 * sigma_vox));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (std::int64_t i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma_vox * sigma_vox));
        k[i + radius] = v;
        sum += v;
    }
    for (auto& v : k) v /= sum;
    return k;
}

void convolve_axis(std::vector<double>& data, const Dims& d, int axis, const std::vector<double>& kernel) {
    const auto n = static_cast<std::int64_t>(d[axis]);
    const auto radius = static_cast<std::int64_t>(kernel.size() / 2);
    const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? d.nx : d.nx * d.ny);
    const std::size_t lines = d.size() / d[axis];
    parallel_ranges(0, lines, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> ext(n + 2 * radius);
        for (std::size_t l = lo; l < hi; ++l) {
            std::size_t base;
            if (axis == 0) {
                base = l * d.nx;
            } else if (axis == 1) {
                base = (l % d.nx) + d.nx * d.ny * (l / d.nx);
            } else {
                base = l;
            }
            for (std::int64_t i = -radius; i < n + radius; ++i) ext[i + radius] = data[base + reflect(i, n) * stride];
            for (std::int64_t i = 0; i < n; ++i) {
                double acc = 0.0;
                const double* src = &ext[i];
                for (std::size_t j = 0; j < kernel.size(); ++j) acc += kernel[j] * src[j];
                data[base + i * stride] = acc;
            }
        }
    });
}

inline void sort_by_magnitude(double& a, double& b, double& c) {
    auto less = [](double u, double v) {
        const double au = std::abs(u), av = std::abs(v);
        return au < av || (au == av && u < v);
    };
    if (less(b, a)) std::swap(a, b);
    if (less(c, b)) std::swap(b, c);
    if (less(b, a)) std::swap(a, b);
}

EigenTriple jacobi_eig(const SymMat3& m) {
    double a[3][3] = {{m.xx, m.xy, m.xz}, {m.xy, m.yy, m.yz}, {m.xz, m.yz, m.zz}};
    for (int sweep = 0; sweep < 64; ++sweep) {
        const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        const double diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
        if (off <= 1e-34 * diag || off == 0.0) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    EigenTriple e{a[0][0], a[1][1], a[2][2]};
    sort_by_magnitude(e.l1, e.l2, e.l3);
    return e;
}

}  // namespace

double SymMat3::frobenius() const {
    return std::sqrt(xx * xx + yy * yy + zz * zz + 2.0 * (xy * xy + xz * xz + yz * yz));
}

Vec3 voxel_sigmas(const Geometry& geom, double sigma_mm) {
    return {sigma_mm / geom.spacing[0], sigma_mm / geom.spacing[1], sigma_mm / geom.spacing[2]};
}

Volume3D gaussian_smooth(const Volume3D& vol, double sigma_mm) {
    if (!(sigma_mm > 0.0) || !std::isfinite(sigma_mm)) throw UsageError("gaussian sigma must be > 0");
    Volume3D out = vol;
    const Vec3 sv = voxel_sigmas(vol.geometry(), sigma_mm);
    for (int axis = 0; axis < 3; ++axis) {
        if (vol.dims()[axis] == 1) continue;
        convolve_axis(out.data(), vol.dims(), axis, gaussian_kernel(sv[axis]));
    }
    return out;
}

SymMat3Field hessian_at_scale(const Volume3D& vol, double sigma_mm) {
    const double finest = vol.geometry().min_spacing();
    if (!(sigma_mm > 0.0)) throw UsageError("hessian sigma must be > 0");
    if (sigma_mm < finest) {
        log_warn("hessian sigma " + std::to_string(sigma_mm) + " mm is below the finest spacing; clamped to " +
                 std::to_string(finest) + " mm");
        sigma_mm = finest;
    }
    const Volume3D s = gaussian_smooth(vol, sigma_mm);
    const Geometry& g = vol.geometry();
    const auto nx = static_cast<std::int64_t>(g.dims.nx);
    const auto ny = static_cast<std::int64_t>(g.dims.ny);
    const auto nz = static_cast<std::int64_t>(g.dims.nz);
    const double norm = sigma_mm * sigma_mm;
    const double ix2 = norm / (g.spacing[0] * g.spacing[0]);
    const double iy2 = norm / (g.spacing[1] * g.spacing[1]);
    const double iz2 = norm / (g.spacing[2] * g.spacing[2]);
    const double ixy = norm / (4.0 * g.spacing[0] * g.spacing[1]);
    const double ixz = norm / (4.0 * g.spacing[0] * g.spacing[2]);
    const double iyz = norm / (4.0 * g.spacing[1] * g.spacing[2]);

    SymMat3Field field{g, sigma_mm, std::vector<SymMat3>(g.dims.size())};
    auto f = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
        return s.at(reflect(x, nx), reflect(y, ny), reflect(z, nz));
    };
    parallel_for(0, static_cast<std::size_t>(nz), [&](std::size_t zu) {
        const auto z = static_cast<std::int64_t>(zu);
        for (std::int64_t y = 0; y < ny; ++y) {
            for (std::int64_t x = 0; x < nx; ++x) {
                const double c2 = 2.0 * f(x, y, z);
                SymMat3 h;
                h.xx = (f(x + 1, y, z) - c2 + f(x - 1, y, z)) * ix2;
                h.yy = (f(x, y + 1, z) - c2 + f(x, y - 1, z)) * iy2;
                h.zz = (f(x, y, z + 1) - c2 + f(x, y, z - 1)) * iz2;
                h.xy = (f(x + 1, y + 1, z) - f(x + 1, y - 1, z) - f(x - 1, y + 1, z) + f(x - 1, y - 1, z)) * ixy;
                h.xz = (f(x + 1, y, z + 1) - f(x + 1, y, z - 1) - f(x - 1, y, z + 1) + f(x - 1, y, z - 1)) * ixz;
                h.yz = (f(x, y + 1, z + 1) - f(x, y + 1, z - 1) - f(x, y - 1, z + 1) + f(x, y - 1, z - 1)) * iyz;
                field.data[g.index(x, y, z)] = h;
            }
        }
    });
    return field;
}

EigenTriple eig_sym3(const SymMat3& m) {
    const double p1 = m.xy * m.xy + m.xz * m.xz + m.yz * m.yz;
    if (p1 == 0.0) {
        EigenTriple e{m.xx, m.yy, m.zz};
        sort_by_magnitude(e.l1, e.l2, e.l3);
        return e;
    }
    const double q = m.trace() / 3.0;
    const double dx = m.xx - q, dy = m.yy - q, dz = m.zz - q;
    const double p2 = dx * dx + dy * dy + dz * dz + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    const double ip = 1.0 / p;
    const SymMat3 b{dx * ip, dy * ip, dz * ip, m.xy * ip, m.xz * ip, m.yz * ip};
    const double r = b.det() / 2.0;
    // Near r = +-1 two roots coincide and acos loses precision.
    if (1.0 - std::abs(r) < 1e-10) return jacobi_eig(m);
    const double phi = std::acos(std::clamp(r, -1.0, 1.0)) / 3.0;
    EigenTriple e;
    e.l1 = q + 2.0 * p * std::cos(phi);
    e.l3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
    e.l2 = 3.0 * q - e.l1 - e.l3;
    sort_by_magnitude(e.l1, e.l2, e.l3);
    return e;
}

std::vector<EigenTriple> eigenvalues(const SymMat3Field& field) {
    std::vector<EigenTriple> out(field.data.size());
    parallel_ranges(0, out.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) out[i] = eig_sym3(field.data[i]);
    });
    return out;
}

}  // namespace vfuse
