#include <doctest.h>

#include <cmath>
#include <vector>

#include "support.hpp"
#include "vesselfuse/resample.hpp"

using namespace vfuse;
using testing::grid;

namespace {

double bspline3(double t) {
    t = std::abs(t);
    if (t < 1.0) return 2.0 / 3.0 - t * t + 0.5 * t * t * t;
    if (t < 2.0) return (2.0 - t) * (2.0 - t) * (2.0 - t) / 6.0;
    return 0.0;
}

long mirror_index(long k, long n) {
    const long period = 2 * n - 2;
    k = std::labs(k) % period;
    return k >= n ? period - k : k;
}

// Interpolating coefficients by dense elimination on the mirrored tridiagonal system.
std::vector<long double> oracle_coefficients(const std::vector<double>& f) {
    const std::size_t n = f.size();
    std::vector<std::vector<long double>> a(n, std::vector<long double>(n + 1, 0.0L));
    for (std::size_t k = 0; k < n; ++k) {
        a[k][k] += 4.0L / 6.0L;
        a[k][mirror_index(static_cast<long>(k) - 1, static_cast<long>(n))] += 1.0L / 6.0L;
        a[k][mirror_index(static_cast<long>(k) + 1, static_cast<long>(n))] += 1.0L / 6.0L;
        a[k][n] = f[k];
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
        std::swap(a[c], a[p]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const long double m = a[r][c] / a[c][c];
            for (std::size_t k = c; k <= n; ++k) a[r][k] -= m * a[c][k];
        }
    }
    std::vector<long double> c(n);
    for (std::size_t k = 0; k < n; ++k) c[k] = a[k][n] / a[k][k];
    return c;
}

double oracle_eval(const std::vector<long double>& c, double x) {
    const long n = static_cast<long>(c.size());
    long double v = 0.0L;
    for (long k = static_cast<long>(std::floor(x)) - 2; k <= static_cast<long>(std::floor(x)) + 2; ++k)
        v += c[mirror_index(k, n)] * bspline3(x - k);
    return static_cast<double>(v);
}

}  // namespace

TEST_SUITE("resample") {

TEST_CASE("output dims follow round(n * s / t)") {
    Geometry g = grid(128, 128, 128);
    g.spacing = {1.0, 1.0, 1.5};
    CHECK(resampled_dims(g, {0.65, 0.65, 0.65}) == Dims{197, 197, 295});
    CHECK(resampled_dims(grid(3, 3, 3, 1.0), {10.0, 10.0, 10.0}) == Dims{1, 1, 1});
    CHECK_THROWS_AS(resampled_dims(g, {0.0, 1.0, 1.0}), UsageError);
}

TEST_CASE("finest isotropic spacing") {
    Geometry g = grid(4, 4, 4);
    g.spacing = {0.8, 0.6, 2.5};
    const Vec3 s = finest_isotropic_spacing(g);
    CHECK(s[0] == 0.6);
    CHECK(s[1] == 0.6);
    CHECK(s[2] == 0.6);
}

TEST_CASE("prefilter matches the dense mirrored-system oracle") {
    const std::vector<double> f = {3.0, -1.0, 0.5, 7.0, 2.0, 2.5, -4.0, 0.0, 1.0, 6.0, -2.0};
    const auto oracle = oracle_coefficients(f);
    Volume3D v(grid(f.size(), 4, 4));
    for (std::size_t z = 0; z < 4; ++z)
        for (std::size_t y = 0; y < 4; ++y)
            for (std::size_t x = 0; x < f.size(); ++x) v.at(x, y, z) = f[x];
    const BSplineCoeffField field = prefilter(v);
    for (std::size_t x = 0; x < f.size(); ++x)
        CHECK(field.coeffs.at(x, 1, 2) == doctest::Approx(static_cast<double>(oracle[x])).epsilon(1e-12));
    for (double x : {0.0, 0.3, 1.5, 4.25, 7.9, 9.999, 10.0})
        CHECK(field.evaluate(x, 1.0, 2.0) == doctest::Approx(oracle_eval(oracle, x)).epsilon(1e-12));
}

TEST_CASE("spline interpolates the samples") {
    Volume3D v(grid(6, 5, 7));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.7 * i) * 10.0;
    const BSplineCoeffField field = prefilter(v);
    for (std::size_t z = 0; z < 7; ++z)
        for (std::size_t y = 0; y < 5; ++y)
            for (std::size_t x = 0; x < 6; ++x) CHECK(field.evaluate(x, y, z) == doctest::Approx(v.at(x, y, z)));
}

TEST_CASE("resampling at the same spacing is the identity") {
    Geometry g = grid(9, 8, 7);
    g.spacing = {0.5, 0.5, 0.5};
    g.origin = {1.0, 2.0, 3.0};
    Volume3D v(g);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::cos(0.37 * i);
    const Volume3D r = resample(v, g.spacing);
    REQUIRE(r.dims() == g.dims);
    CHECK(r.origin() == g.origin);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(r[i] == doctest::Approx(v[i]).epsilon(1e-10));
}

TEST_CASE("resampled values agree with direct spline evaluation") {
    Geometry g = grid(10, 9, 8);
    g.spacing = {1.0, 1.0, 1.5};
    Volume3D v(g);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.11 * i) + 0.01 * i;
    const Vec3 t{0.65, 0.65, 0.65};
    const Volume3D r = resample(v, t);
    const BSplineCoeffField field = prefilter(v);
    for (std::size_t z = 0; z < r.dims().nz; z += 3)
        for (std::size_t y = 0; y < r.dims().ny; y += 2)
            for (std::size_t x = 0; x < r.dims().nx; x += 2)
                CHECK(r.at(x, y, z) == doctest::Approx(field.evaluate(x * t[0] / g.spacing[0], y * t[1] / g.spacing[1],
                                                                      z * t[2] / g.spacing[2]))
                                           .epsilon(1e-10));
}

TEST_CASE("masks stay binary under both interpolation modes") {
    BinaryMask m(grid(12, 12, 8));
    testing::fill_ball(m, 6, 6, 4, 3.2);
    Geometry g = m.geometry();
    for (auto mode : {Interpolation::nearest, Interpolation::bspline}) {
        const BinaryMask r = resample(m, {0.7, 0.7, 0.7}, mode);
        CHECK_NOTHROW(require_binary(r));
        CHECK(count_nonzero(r) > 0);
        const double vol_in = count_nonzero(m) * g.voxel_volume();
        const double vol_out = count_nonzero(r) * r.geometry().voxel_volume();
        CHECK(vol_out == doctest::Approx(vol_in).epsilon(0.25));
    }
}

TEST_CASE("short axes are rejected by the prefilter") {
    CHECK_THROWS(prefilter(Volume3D(grid(3, 8, 8))));
}

TEST_CASE("binary detection") {
    Volume3D v(grid(2, 2, 2));
    CHECK(looks_binary(v));
    v[3] = 1.0;
    CHECK(looks_binary(v));
    v[2] = 0.5;
    CHECK_FALSE(looks_binary(v));
}

}
