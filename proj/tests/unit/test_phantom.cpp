#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "vesselfuse/phantom.hpp"
#include "vesselfuse/skeleton.hpp"

using namespace vfuse;

TEST_SUITE("phantom") {

TEST_CASE("tube voxel volume is close to pi r^2 L") {
    // Odd grids put the tube axis on voxel centres.
    struct Case {
        std::size_t n;
        double spacing, r, length;
    };
    for (const Case c : {Case{89, 0.5, 2.0, 40.0}, Case{111, 0.4, 3.0, 30.0}, Case{111, 0.4, 2.0, 40.0}}) {
        const Geometry g = cube_geometry(c.n, c.spacing);
        const Phantom ph = render_phantom(tube_spec(g, c.r, c.length));
        const double measured = count_nonzero(ph.mask) * g.voxel_volume();
        const double analytic = std::numbers::pi * c.r * c.r * c.length;
        CHECK(measured == doctest::Approx(analytic).epsilon(0.03));
    }
}

TEST_CASE("intensity is background + contrast inside the mask without noise") {
    PhantomSpec s = tube_spec(cube_geometry(20, 1.0), 3.0, 10.0);
    s.background = 0.25;
    s.contrast = 2.0;
    const Phantom ph = render_phantom(s);
    for (std::size_t i = 0; i < ph.mask.size(); ++i) CHECK(ph.intensity[i] == (ph.mask[i] ? 2.25 : 0.25));
}

TEST_CASE("noise is reproducible from the seed") {
    const Geometry g = cube_geometry(16, 1.0);
    const Phantom a = render_phantom(phantom_by_kind("noisy-tube", g, 0.0, 0.0, 0.1, 9));
    const Phantom b = render_phantom(phantom_by_kind("noisy-tube", g, 0.0, 0.0, 0.1, 9));
    const Phantom c = render_phantom(phantom_by_kind("noisy-tube", g, 0.0, 0.0, 0.1, 10));
    CHECK(a.intensity == b.intensity);
    CHECK_FALSE(a.intensity == c.intensity);
    for (double v : a.intensity.data()) CHECK(static_cast<double>(static_cast<float>(v)) == v);
}

TEST_CASE("kinds") {
    const Geometry g = cube_geometry(32, 1.0);
    for (const char* kind : {"tube", "y", "two-tubes", "noisy-tube", "blob", "plate"}) {
        INFO(kind);
        const Phantom ph = render_phantom(phantom_by_kind(kind, g, 0.0, 0.0, 0.0, 1));
        CHECK(count_nonzero(ph.mask) > 0);
        CHECK(count_nonzero(ph.mask) < ph.mask.size());
    }
    CHECK(phantom_by_kind("y", g, 0.0, 0.0, 0.0, 1).junctions.size() == 1);
    CHECK(count_components26(render_phantom(two_tubes_spec(g, 1.0, 3.0)).mask) == 2);
    CHECK_THROWS_AS(phantom_by_kind("torus", g, 0.0, 0.0, 0.0, 1), UsageError);
}

}
