#include "vesselfuse/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vesselfuse/parallel.hpp"

namespace vfuse {

namespace {

const double kPole = std::sqrt(3.0) - 2.0;

// Whole-sample symmetric extension: ... 2 1 | 0 1 2 ... n-1 | n-2 ...
inline std::int64_t mirror(std::int64_t k, std::int64_t n) {
    if (n == 1) return 0;
    const std::int64_t period = 2 * n - 2;
    k = std::abs(k) % period;
    return k >= n ? period - k : k;
}

void prefilter_line(std::vector<double>& c) {
    const auto n = static_cast<std::int64_t>(c.size());
    if (n < 2) return;
    const double z = kPole;
    const double gain = (1.0 - z) * (1.0 - 1.0 / z);
    for (auto& v : c) v *= gain;

    // Causal initialisation, exact for the mirror extension.
    {
        double zn = z;
        const double iz = 1.0 / z;
        double z2n = std::pow(z, static_cast<double>(n - 1));
        double sum = c[0] + z2n * c[n - 1];
        z2n *= z2n * iz;
        for (std::int64_t k = 1; k < n - 1; ++k) {
            sum += (zn + z2n) * c[k];
            zn *= z;
            z2n *= iz;
        }
        c[0] = sum / (1.0 - zn * zn);
    }
    for (std::int64_t k = 1; k < n; ++k) c[k] += z * c[k - 1];
    c[n - 1] = (z / (z * z - 1.0)) * (z * c[n - 2] + c[n - 1]);
    for (std::int64_t k = n - 2; k >= 0; --k) c[k] = z * (c[k + 1] - c[k]);
}

inline void cubic_weights(double u, double w[4]) {
    const double u2 = u * u;
    const double u3 = u2 * u;
    const double omu = 1.0 - u;
    w[0] = omu * omu * omu / 6.0;
    w[1] = (3.0 * u3 - 6.0 * u2 + 4.0) / 6.0;
    w[2] = (-3.0 * u3 + 3.0 * u2 + 3.0 * u + 1.0) / 6.0;
    w[3] = u3 / 6.0;
}

std::size_t line_count(const Dims& d, int axis) { return d.size() / d[axis]; }

// Base offset and stride of the l-th line along `axis`.
void line_layout(const Dims& d, int axis, std::size_t line, std::size_t& base, std::size_t& stride) {
    if (axis == 0) {
        base = line * d.nx;
        stride = 1;
    } else if (axis == 1) {
        const std::size_t x = line % d.nx;
        const std::size_t z = line / d.nx;
        base = x + d.nx * d.ny * z;
        stride = d.nx;
    } else {
        base = line;
        stride = d.nx * d.ny;
    }
}

// Per-output-sample taps for resampling one axis.
struct AxisPlan {
    std::vector<std::int64_t> first;  // first tap index (before mirroring)
    std::vector<double> weights;      // 4 per sample
    std::vector<std::int64_t> nearest;
};

AxisPlan plan_axis(std::size_t n_in, std::size_t n_out, double step) {
    AxisPlan plan;
    plan.first.resize(n_out);
    plan.weights.resize(4 * n_out);
    plan.nearest.resize(n_out);
    for (std::size_t k = 0; k < n_out; ++k) {
        const double t = static_cast<double>(k) * step;
        const double fl = std::floor(t);
        plan.first[k] = static_cast<std::int64_t>(fl) - 1;
        cubic_weights(t - fl, &plan.weights[4 * k]);
        plan.nearest[k] = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(t + 0.5)),
                                                  static_cast<std::int64_t>(n_in) - 1);
    }
    return plan;
}

// Resamples every line of `in` along `axis` to n_out samples.
std::vector<double> resample_axis(const std::vector<double>& in, const Dims& din, int axis,
                                  std::size_t n_out, double step, Interpolation mode) {
    Dims dout = din;
    if (axis == 0) dout.nx = n_out;
    if (axis == 1) dout.ny = n_out;
    if (axis == 2) dout.nz = n_out;
    std::vector<double> out(dout.size());
    const auto n_in = static_cast<std::int64_t>(din[axis]);
    const AxisPlan plan = plan_axis(din[axis], n_out, step);
    parallel_ranges(0, line_count(din, axis), [&](std::size_t lo, std::size_t hi) {
        std::vector<double> line(din[axis]);
        for (std::size_t l = lo; l < hi; ++l) {
            std::size_t bi, si, bo, so;
            line_layout(din, axis, l, bi, si);
            line_layout(dout, axis, l, bo, so);
            for (std::int64_t i = 0; i < n_in; ++i) line[i] = in[bi + i * si];
            for (std::size_t k = 0; k < n_out; ++k) {
                double v;
                if (mode == Interpolation::nearest) {
                    v = line[plan.nearest[k]];
                } else {
                    const double* w = &plan.weights[4 * k];
                    const std::int64_t f = plan.first[k];
                    v = 0.0;
                    for (int j = 0; j < 4; ++j) v += w[j] * line[mirror(f + j, n_in)];
                }
                out[bo + k * so] = v;
            }
        }
    });
    return out;
}

}  // namespace

Vec3 finest_isotropic_spacing(const Geometry& geom) {
    const double s = geom.min_spacing();
    return {s, s, s};
}

Vec3 finest_isotropic_spacing(const Volume3D& vol) { return finest_isotropic_spacing(vol.geometry()); }

BSplineCoeffField prefilter(const Volume3D& vol) {
    const Dims& d = vol.dims();
    if (d.nx < 4 || d.ny < 4 || d.nz < 4)
        throw DataError("cubic B-spline prefilter needs at least 4 voxels per axis");
    BSplineCoeffField field{vol};
    auto& c = field.coeffs.data();
    for (int axis = 0; axis < 3; ++axis) {
        parallel_ranges(0, line_count(d, axis), [&](std::size_t lo, std::size_t hi) {
            std::vector<double> line(d[axis]);
            for (std::size_t l = lo; l < hi; ++l) {
                std::size_t base, stride;
                line_layout(d, axis, l, base, stride);
                for (std::size_t i = 0; i < line.size(); ++i) line[i] = c[base + i * stride];
                prefilter_line(line);
                for (std::size_t i = 0; i < line.size(); ++i) c[base + i * stride] = line[i];
            }
        });
    }
    return field;
}

double BSplineCoeffField::evaluate(double x, double y, double z) const {
    const Dims& d = coeffs.dims();
    const double pos[3] = {x, y, z};
    double w[3][4];
    std::int64_t idx[3][4];
    for (int a = 0; a < 3; ++a) {
        const double fl = std::floor(pos[a]);
        cubic_weights(pos[a] - fl, w[a]);
        for (int j = 0; j < 4; ++j)
            idx[a][j] = mirror(static_cast<std::int64_t>(fl) - 1 + j, static_cast<std::int64_t>(d[a]));
    }
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
        double sy = 0.0;
        for (int j = 0; j < 4; ++j) {
            double sx = 0.0;
            for (int i = 0; i < 4; ++i)
                sx += w[0][i] * coeffs.at(static_cast<std::size_t>(idx[0][i]), static_cast<std::size_t>(idx[1][j]),
                                          static_cast<std::size_t>(idx[2][k]));
            sy += w[1][j] * sx;
        }
        sum += w[2][k] * sy;
    }
    return sum;
}

Dims resampled_dims(const Geometry& geom, const Vec3& target) {
    for (double t : target)
        if (!std::isfinite(t) || t <= 0.0) throw UsageError("target spacing must be positive and finite");
    std::size_t n[3];
    for (int a = 0; a < 3; ++a) {
        const double extent = static_cast<double>(geom.dims[a]) * geom.spacing[a];
        n[a] = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(extent / target[a])));
    }
    return {n[0], n[1], n[2]};
}

Volume3D resample(const Volume3D& vol, const Vec3& target, Interpolation mode) {
    const Geometry& g = vol.geometry();
    const Dims out_dims = resampled_dims(g, target);
    std::vector<double> data;
    Dims cur = g.dims;
    if (mode == Interpolation::bspline) {
        data = prefilter(vol).coeffs.data();
    } else {
        data = vol.data();
    }
    for (int axis = 0; axis < 3; ++axis) {
        const double step = target[axis] / g.spacing[axis];
        data = resample_axis(data, cur, axis, out_dims[axis], step, mode);
        if (axis == 0) cur.nx = out_dims.nx;
        if (axis == 1) cur.ny = out_dims.ny;
        if (axis == 2) cur.nz = out_dims.nz;
    }
    Geometry og{out_dims, target, g.origin};
    return Volume3D(og, std::move(data));
}

BinaryMask resample(const BinaryMask& mask, const Vec3& target, Interpolation mode) {
    const Volume3D r = resample(to_volume(mask), target, mode);
    return threshold(r, 0.5);
}

bool looks_binary(const Volume3D& vol) {
    return std::all_of(vol.data().begin(), vol.data().end(), [](double v) { return v == 0.0 || v == 1.0; });
}

}  // namespace vfuse
