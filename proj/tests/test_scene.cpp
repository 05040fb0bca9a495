#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sasnav/scene.hpp"

using namespace sasnav;

TEST_CASE("make_grid spacing follows the bandwidth") {
    SystemConfig cfg;
    cfg.bandwidth_hz = 30e3;
    cfg.sound_speed_mps = 1500.0;
    const auto g = make_grid(cfg, {1.0, 1.0}, {0.0, 10.0});
    CHECK(g.frame.dx == Catch::Approx(0.025));
    CHECK(g.frame.dy == Catch::Approx(0.025));
    CHECK(g.frame.nx == 40);
    CHECK(g.frame.ny == 40);
    CHECK(g.values.size() == 1600);

    // explicit spacing honored (e.g. the 2.45 cm cell of a decimated recording)
    const auto e = make_grid_with_spacing({1.0, 1.0}, {0.0, 0.0}, 0.0245, 0.0245);
    CHECK(e.frame.dx == Catch::Approx(0.0245));

    CHECK_THROWS_AS(make_grid(cfg, {0.0, 1.0}, {0.0, 0.0}), EmptyExtent);
}

TEST_CASE("grid cell centers cover the extent symmetrically") {
    const auto g = make_grid_with_spacing({1.0, 0.5}, {2.0, 10.0}, 0.025, 0.025);
    const Vec2 first = g.frame.cell_center(0, 0);
    const Vec2 last = g.frame.cell_center(g.frame.nx - 1, g.frame.ny - 1);
    CHECK(0.5 * (first.x + last.x) == Catch::Approx(2.0));
    CHECK(0.5 * (first.y + last.y) == Catch::Approx(10.0));
}

TEST_CASE("synth_scene determinism and phantom support") {
    SystemConfig cfg;
    auto g = make_grid(cfg, {2.0, 2.0}, {0.0, 10.0});
    RippleSpec ripple;
    PhantomSpec phantom;
    phantom.center = {0.0, 10.0};
    phantom.diameter_m = 0.40;

    const auto a = synth_scene(g, ripple, phantom, 123);
    const auto b = synth_scene(g, ripple, phantom, 123);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);

    const auto c = synth_scene(g, ripple, phantom, 124);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        if (a.values[i] != c.values[i]) any_diff = true;
    CHECK(any_diff);

    // phantom cells are brighter than the modulated-noise background; cells
    // outside the disc are untouched relative to a run without the phantom
    PhantomSpec none = phantom;
    none.contrast_db = 20.0;
    auto no_phantom = synth_scene(g, ripple, PhantomSpec{{0.55, 10.55}, 0.4, 20.0}, 123);
    for (int iy = 0; iy < g.frame.ny; ++iy)
        for (int ix = 0; ix < g.frame.nx; ++ix) {
            const Vec2 z = g.frame.cell_center(ix, iy);
            const bool in_a = distance(z, phantom.center) <= 0.2;
            const bool in_b = distance(z, Vec2{0.55, 10.55}) <= 0.2;
            if (!in_a && !in_b) CHECK(a.at(ix, iy) == no_phantom.at(ix, iy));
        }

    CHECK_THROWS_AS(synth_scene(g, ripple, PhantomSpec{{0.95, 10.0}, 0.4, 20.0}, 1),
                    PhantomOutOfBounds);
}

TEST_CASE("zero ripple depth leaves pure modulated noise with unit envelope") {
    SystemConfig cfg;
    auto g = make_grid(cfg, {1.0, 1.0}, {0.0, 10.0});
    RippleSpec ripple;
    ripple.depth = 0.0;
    PhantomSpec phantom{{0.0, 10.0}, 0.1, 20.0};
    const auto s = synth_scene(g, ripple, phantom, 9);
    // background magnitudes should look like |CN(0,1)|: mean about sqrt(pi)/2
    double sum = 0.0;
    std::size_t n = 0;
    for (int iy = 0; iy < g.frame.ny; ++iy)
        for (int ix = 0; ix < g.frame.nx; ++ix) {
            if (distance(g.frame.cell_center(ix, iy), phantom.center) <= 0.05) continue;
            sum += std::abs(s.at(ix, iy));
            ++n;
        }
    const double mean = sum / static_cast<double>(n);
    CHECK(mean == Catch::Approx(std::sqrt(std::numbers::pi) / 2.0).epsilon(0.1));
}
