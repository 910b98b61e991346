#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "support.hpp"
#include "vesselfuse/phantom.hpp"
#include "vesselfuse/vesselness.hpp"

using namespace vfuse;
using testing::grid;

namespace {

// Every path of `length` voxels whose steps come from `cone`; each voxel on a
// path takes the max over its paths of the path minimum.
Volume3D brute_path_opening(const Volume3D& v, const std::vector<std::array<int, 3>>& cone, int length) {
    const Geometry& g = v.geometry();
    std::vector<double> best(v.size(), -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> path;
    std::function<void(long, long, long, double)> walk = [&](long x, long y, long z, double lo) {
        path.push_back(g.index(x, y, z));
        lo = std::min(lo, v.at(x, y, z));
        if (static_cast<int>(path.size()) == length) {
            for (auto i : path) best[i] = std::max(best[i], lo);
        } else {
            for (const auto& s : cone)
                if (g.inside(x + s[0], y + s[1], z + s[2])) walk(x + s[0], y + s[1], z + s[2], lo);
        }
        path.pop_back();
    };
    for (std::size_t z = 0; z < g.dims.nz; ++z)
        for (std::size_t y = 0; y < g.dims.ny; ++y)
            for (std::size_t x = 0; x < g.dims.nx; ++x)
                walk(static_cast<long>(x), static_cast<long>(y), static_cast<long>(z),
                     std::numeric_limits<double>::infinity());
    double lowest = *std::min_element(v.data().begin(), v.data().end());
    Volume3D out(g);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::isfinite(best[i]) ? best[i] : lowest;
    return out;
}

Volume3D random_float_volume(const Geometry& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> u(0, 255);
    Volume3D v(g);
    for (auto& x : v.data()) x = u(rng) / 8.0;
    return v;
}

}  // namespace

TEST_SUITE("vesselness") {

TEST_CASE("frangi pointwise") {
    const EigenTriple tube{0.0, -1.0, -1.0};
    const double expected = (1 - std::exp(-1.0 / (2 * 0.25))) * (1 - std::exp(-2.0 / 2.0));
    CHECK(frangi_response(tube, 0.5, 0.5, 1.0) == doctest::Approx(expected));
    CHECK(frangi_response({0.0, 1.0, -1.0}, 0.5, 0.5, 1.0) == 0.0);
    CHECK(frangi_response({0.0, -1.0, 1.0}, 0.5, 0.5, 1.0) == 0.0);
    // A blob (Rb = 1) is suppressed relative to a tube of equal structureness.
    CHECK(frangi_response({-1.0, -1.0, -1.0}, 0.5, 0.5, 1.0) < frangi_response({0.0, -1.0, -1.0}, 0.5, 0.5, 1.0));
}

TEST_CASE("sato pointwise") {
    CHECK(sato_response({0.0, -2.0, -3.0}, 0.5, 2.0) == doctest::Approx(2.0));
    CHECK(sato_response({-1.0, -2.0, -3.0}, 0.5, 2.0) == doctest::Approx(2.0 * std::exp(-0.5)));
    CHECK(sato_response({0.5, -2.0, -3.0}, 0.5, 2.0) == doctest::Approx(2.0 * std::exp(-0.25 / 32.0)));
    CHECK(sato_response({1.5, -2.0, -3.0}, 0.5, 2.0) == 0.0);
    CHECK(sato_response({0.0, 1.0, -3.0}, 0.5, 2.0) == 0.0);
}

TEST_CASE("jerman pointwise") {
    CHECK(jerman_lambda_rho(-1.0, 0.5, 1.0) == -1.0);
    CHECK(jerman_lambda_rho(-0.2, 0.5, 1.0) == -0.5);
    CHECK(jerman_lambda_rho(0.3, 0.5, 1.0) == 0.0);
    CHECK(jerman_response(-0.2, -1.0) == doctest::Approx(0.5));
    CHECK(jerman_response(-0.5, -1.0) == 1.0);
    CHECK(jerman_response(0.1, -1.0) == 0.0);
    CHECK(jerman_response(-0.1, 0.0) == 0.0);
}

TEST_CASE("zhang pointwise") {
    CHECK(zhang_response({0.0, -0.2, -1.0}, -1.0, 0.5) == doctest::Approx(0.5));
    const double rb2 = 0.04 / (0.5 * 1.0);
    CHECK(zhang_response({0.2, -0.5, -1.0}, -1.0, 0.5) == doctest::Approx(std::exp(-rb2 / (2 * 0.25))));
}

TEST_CASE("meijering pointwise") {
    const EigenTriple e{0.0, -1.0, -2.0};
    CHECK(meijering_dominant_modified(e, -1.0 / 3.0) == doctest::Approx(-5.0 / 3.0));
    CHECK(meijering_response(e, -1.0 / 3.0, -5.0 / 3.0) == doctest::Approx(1.0));
    CHECK(meijering_response(e, -1.0 / 3.0, -10.0 / 3.0) == doctest::Approx(0.5));
    // Dominant modified eigenvalue positive: (-1, 0, 5/3).
    CHECK(meijering_dominant_modified({0.0, 1.0, 2.0}, -1.0 / 3.0) == doctest::Approx(5.0 / 3.0));
    CHECK(meijering_response({0.0, 1.0, 2.0}, -1.0 / 3.0, -1.0) == 0.0);
}

TEST_CASE("default scales and parameter validation") {
    Geometry g = grid(32, 32, 32);
    g.spacing = {0.5, 0.6, 0.8};
    const FilterParams p = FilterParams::defaults_for(g, 3.0);
    REQUIRE(p.scales.size() == 5);
    CHECK(p.scales.front() == doctest::Approx(0.5));
    CHECK(p.scales.back() == doctest::Approx(3.0));
    for (std::size_t i = 1; i < p.scales.size(); ++i)
        CHECK(p.scales[i] / p.scales[i - 1] == doctest::Approx(p.scales[1] / p.scales[0]));

    FilterParams bad = p;
    bad.scales = {2.0, 1.0};
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = p;
    bad.rorpo_lengths = {0};
    CHECK_THROWS_AS(bad.validate(), UsageError);
    CHECK_THROWS_AS(parse_filter("vesselmagic"), UsageError);
    CHECK(parse_filter("Frangi") == FilterId::frangi);
}

TEST_CASE("normalisation maps to [0, 1] and constants to zero") {
    Volume3D v(grid(3, 3, 3));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 2.0 + i;
    const Volume3D n = normalize_response(v);
    CHECK(*std::min_element(n.data().begin(), n.data().end()) == 0.0);
    CHECK(*std::max_element(n.data().begin(), n.data().end()) == 1.0);
    const Volume3D c = normalize_response(Volume3D(grid(3, 3, 3), 4.0));
    for (double x : c.data()) CHECK(x == 0.0);
}

TEST_CASE("constant input yields all-zero channels") {
    const Volume3D v(grid(16, 16, 16), 5.0);
    FilterParams p = FilterParams::defaults_for(v.geometry(), 2.0);
    p.rorpo_lengths = {5};
    const auto ch = all_filters(v, p);
    for (const auto& c : ch)
        for (double x : c.data()) CHECK(x == 0.0);
}

TEST_CASE("path opening matches brute-force enumeration") {
    const Volume3D v = random_float_volume(grid(6, 5, 6), 3);
    const std::vector<std::array<int, 3>> cone_x = {{1, 0, 0}, {1, -1, 0}, {1, 1, 0}, {1, 0, -1}, {1, 0, 1}};
    const std::vector<std::array<int, 3>> cone_d = {{1, 1, 1}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
    for (int L : {1, 2, 4}) {
        CHECK(path_opening(v, 0, L).data() == brute_path_opening(v, cone_x, L).data());
        CHECK(path_opening(v, 3, L).data() == brute_path_opening(v, cone_d, L).data());
    }
}

TEST_CASE("path opening is anti-extensive and idempotent") {
    const Volume3D v = random_float_volume(grid(10, 9, 8), 5);
    for (int o = 0; o < 7; ++o) {
        const Volume3D once = path_opening(v, o, 4);
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(once[i] <= v[i]);
        CHECK(path_opening(once, o, 4).data() == once.data());
    }
    CHECK_THROWS_AS(path_opening(v, 7, 3), UsageError);
    CHECK_THROWS_AS(path_opening(v, 0, 0), UsageError);
}

TEST_CASE("path opening keeps a line only along its own orientation") {
    Volume3D v(grid(16, 16, 16));
    for (std::size_t x = 2; x < 12; ++x) v.at(x, 8, 8) = 1.0;
    CHECK(path_opening(v, 0, 10).at(5, 8, 8) == 1.0);
    CHECK(path_opening(v, 0, 11).at(5, 8, 8) == 0.0);
    CHECK(path_opening(v, 1, 3).at(5, 8, 8) == 0.0);
    CHECK(path_opening(v, 2, 3).at(5, 8, 8) == 0.0);
}

TEST_CASE("rorpo favours lines over blobs") {
    Volume3D v(grid(24, 24, 24));
    for (std::size_t x = 2; x < 22; ++x) v.at(x, 6, 6) = 1.0;
    for (std::size_t z = 14; z < 20; ++z)
        for (std::size_t y = 14; y < 20; ++y)
            for (std::size_t x = 14; x < 20; ++x) v.at(x, y, z) = 1.0;
    const Volume3D r = rorpo_single(v, 5);
    CHECK(r.at(10, 6, 6) == doctest::Approx(1.0));
    CHECK(r.at(17, 17, 17) == 0.0);
}

TEST_CASE("dilate_cube") {
    Volume3D v(grid(7, 7, 7));
    v.at(3, 3, 3) = 2.0;
    const Volume3D d = dilate_cube(v, 1);
    CHECK(d.at(2, 4, 2) == 2.0);
    CHECK(d.at(1, 3, 3) == 0.0);
    CHECK(dilate_cube(v, 0).data() == v.data());
}

TEST_CASE("polarity flips dark vessels") {
    Volume3D v(grid(3, 3, 3), 1.0);
    v.at(1, 1, 1) = -2.0;
    const Volume3D f = apply_polarity(v, Polarity::dark_on_bright);
    CHECK(f.at(1, 1, 1) == 2.0);
    CHECK(apply_polarity(v, Polarity::bright_on_dark).data() == v.data());
}

TEST_CASE("hessian filters peak on a tube centreline, not far outside") {
    const Geometry g = cube_geometry(33, 0.5);
    Phantom ph = render_phantom(tube_spec(g, 2.0, 100.0));
    FilterParams p = FilterParams::defaults_for(g, 3.0);
    const EigenStack stack = compute_eigen_stack(ph.intensity, p);
    for (FilterId id : {FilterId::frangi, FilterId::jerman, FilterId::sato, FilterId::zhang, FilterId::meijering}) {
        const auto per_scale = per_scale_responses(stack, id, p);
        Volume3D best(g);
        for (const auto& s : per_scale)
            for (std::size_t i = 0; i < s.size(); ++i) best[i] = std::max(best[i], s[i]);
        const Volume3D n = normalize_response(best);
        INFO(filter_name(id));
        CHECK(n.at(16, 16, 16) > 0.7);
        CHECK(n.at(1, 1, 16) < 0.1);
    }
}

}
