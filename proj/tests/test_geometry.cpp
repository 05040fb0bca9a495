#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "sasnav/geometry.hpp"
#include "sasnav/rng.hpp"

using namespace sasnav;

namespace {
constexpr double kPi = std::numbers::pi;

Pose random_pose(Rng& rng, double span = 1.0) {
    return {rng.uniform(-span, span), rng.uniform(-span, span), rng.uniform(-1.5, 1.5)};
}
} // namespace

TEST_CASE("compose identity and basic cases") {
    const Pose id{};
    const Pose b{1.0, 2.0, 0.1};
    const Pose r = compose(id, b);
    CHECK(r.x == Catch::Approx(1.0));
    CHECK(r.y == Catch::Approx(2.0));
    CHECK(r.theta == Catch::Approx(0.1));

    // rotating frame carries the offset: hand-rotated expected values
    const Pose rot = compose(Pose{1.0, 0.0, kPi / 2}, Pose{1.0, 0.0, 0.0});
    CHECK(rot.x == Catch::Approx(1.0).margin(1e-14));
    CHECK(rot.y == Catch::Approx(1.0));
    CHECK(rot.theta == Catch::Approx(kPi / 2));
}

TEST_CASE("compose group laws") {
    Rng rng(42);
    for (int i = 0; i < 50; ++i) {
        const Pose a = random_pose(rng);
        const Pose b = random_pose(rng);
        const Pose c = random_pose(rng);

        const Pose i1 = compose(a, inverse(a));
        CHECK(std::abs(i1.x) < 1e-12);
        CHECK(std::abs(i1.y) < 1e-12);
        CHECK(std::abs(i1.theta) < 1e-12);

        const Pose ab_c = compose(compose(a, b), c);
        const Pose a_bc = compose(a, compose(b, c));
        CHECK(ab_c.x == Catch::Approx(a_bc.x).margin(1e-12));
        CHECK(ab_c.y == Catch::Approx(a_bc.y).margin(1e-12));
        CHECK(ab_c.theta == Catch::Approx(a_bc.theta).margin(1e-12));

        const Pose l = compose(Pose{}, a);
        const Pose r = compose(a, Pose{});
        CHECK(l == a);
        CHECK(r.x == Catch::Approx(a.x).margin(1e-15));
        CHECK(r.theta == a.theta);
    }
}

TEST_CASE("theta stays wrapped") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const Pose a = Pose{0, 0, rng.uniform(-10, 10)};
        const Pose b = Pose{0, 0, rng.uniform(-10, 10)};
        const Pose c = compose(a, b);
        CHECK(c.theta <= kPi);
        CHECK(c.theta > -kPi);
    }
    CHECK(wrap_angle(3 * kPi) == Catch::Approx(kPi));
    CHECK(wrap_angle(-kPi) == Catch::Approx(kPi));
}

TEST_CASE("phase_center") {
    const Pose a = phase_center(Pose{}, Pose{});
    CHECK(a.x == 0.0);
    CHECK(a.theta == 0.0);

    const Pose b = phase_center(Pose{-0.05, 0, 0}, Pose{0.05, 0, 0});
    CHECK(b.x == Catch::Approx(0.0).margin(1e-15));
    CHECK(b.y == 0.0);

    const Pose c = phase_center(Pose{0.1, 0, 0.02}, Pose{0, 0, 0.01});
    CHECK(c.x == Catch::Approx(0.05));
    CHECK(c.y == 0.0);
    CHECK(c.theta == Catch::Approx(0.01)); // orientation from the array
}

TEST_CASE("differential_displacement") {
    CHECK(differential_displacement(Pose{1, 2, 0.3}, Pose{1, 2, 0.3}) == Pose{});

    const Pose adv = differential_displacement(Pose{}, Pose{0.2, 0, 0});
    CHECK(adv.x == Catch::Approx(0.2));

    // values quoted as the motion error between two perturbed pings
    const Pose d = differential_displacement(Pose{1.0, 0.01, 0.001}, Pose{0.9655, 0.0317, 0.042});
    CHECK(d.x == Catch::Approx(-0.0345));
    CHECK(d.y == Catch::Approx(0.0217));
    CHECK(d.theta == Catch::Approx(0.041));

    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const Pose p = random_pose(rng);
        const Pose q = random_pose(rng);
        const Pose pq = differential_displacement(p, q);
        const Pose qp = differential_displacement(q, p);
        CHECK(pq.x == -qp.x);
        CHECK(pq.y == -qp.y);
        CHECK(pq.theta == Catch::Approx(-qp.theta).margin(1e-15));
    }
}

TEST_CASE("bistatic_replacement") {
    SECTION("monostatic collapse") {
        const auto pair = bistatic_replacement(Pose{1, 2, 0.1}, Pose{}, Pose{}, 0.0);
        CHECK(pair.rx.x == Catch::Approx(1.0));
        CHECK(pair.tx.x == Catch::Approx(1.0));
        CHECK(pair.tx.theta == Catch::Approx(0.1));
    }
    SECTION("10 cm along-track separation") {
        const auto pair =
            bistatic_replacement(Pose{}, Pose{0.05, 0, 0}, Pose{-0.05, 0, 0}, 0.0);
        CHECK(pair.rx.x == Catch::Approx(0.05));
        CHECK(pair.tx.x == Catch::Approx(-0.05));
        CHECK(pair.rx.y == 0.0);
    }
    SECTION("phase center preserved for random valid offsets") {
        Rng rng(11);
        for (int i = 0; i < 50; ++i) {
            const Pose pca = random_pose(rng);
            const Pose vr{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 0.0};
            const Pose vt{-vr.x, -vr.y, 0.0};
            const auto pair = bistatic_replacement(pca, vr, vt, rng.uniform(-0.1, 0.1));
            const Pose pc = phase_center(pair.tx, pair.rx);
            CHECK(pc.x == Catch::Approx(pca.x).margin(1e-12));
            CHECK(pc.y == Catch::Approx(pca.y).margin(1e-12));
            CHECK(pc.theta == Catch::Approx(pca.theta).margin(1e-12));
        }
    }
    SECTION("midpoint constraint enforced") {
        CHECK_THROWS_AS(
            bistatic_replacement(Pose{}, Pose{0.05, 0, 0}, Pose{-0.04, 0, 0}, 0.0),
            MidpointNotZero);
    }
}

TEST_CASE("max_speed") {
    SystemConfig cfg;
    cfg.n_rx = 1;
    cfg.d_tx_m = cfg.d_rx_m = 0.05;
    cfg.sound_speed_mps = 1500.0;
    CHECK(max_speed(cfg, 150.0) == Catch::Approx(0.0625));

    cfg.n_rx = 16;
    CHECK(max_speed(cfg, 75.0) == Catch::Approx(2.0));

    CHECK(max_speed(cfg, 150.0) == Catch::Approx(0.5 * max_speed(cfg, 75.0)));
    CHECK_THROWS_AS(max_speed(cfg, 0.0), NonPositiveRange);
    CHECK_THROWS_AS(max_speed(cfg, -5.0), NonPositiveRange);
}

TEST_CASE("transform_point matches compose") {
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        const Pose a = random_pose(rng);
        const Pose b = random_pose(rng);
        const Pose c = compose(a, b);
        const Vec2 p = transform_point(a, b.translation());
        CHECK(c.x == Catch::Approx(p.x));
        CHECK(c.y == Catch::Approx(p.y));
    }
}
