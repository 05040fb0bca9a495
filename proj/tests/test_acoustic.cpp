#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "sasnav/acoustic.hpp"
#include "sasnav/ping.hpp"
#include "sasnav/rng.hpp"
#include "sasnav/sim.hpp"

using namespace sasnav;
using Catch::Approx;

namespace {

SystemConfig small_config() {
    SystemConfig cfg;
    cfg.f0_hz = 300e3;
    cfg.bandwidth_hz = 30e3;
    cfg.n_rx = 3;
    cfg.rx_spacing_m = 0.05;
    cfg.midrange_m = 5.0;
    cfg.range_window_m = 0.5;
    return cfg;
}

TimeGrid covering_time_grid(const SystemConfig& cfg, const GridFrame& frame,
                            const PingGeometry& g) {
    return make_time_grid(cfg, frame, {g}, 0.0);
}

} // namespace

TEST_CASE("propagation_delay") {
    CHECK(propagation_delay(Vec2{0, 0}, Vec2{0, 0}, Vec2{0, 10}, 1500.0) ==
          Approx(20.0 / 1500.0));
    CHECK(propagation_delay(Vec2{-0.05, 0}, Vec2{0.05, 0}, Vec2{0, 10}, 1500.0) ==
          Approx(2.0 * std::sqrt(100.0 + 0.0025) / 1500.0));

    // all points on the ellipse with the Tx and Rx as foci share the delay
    const double c_f = 0.05, a = 6.0;
    const double b = std::sqrt(a * a - c_f * c_f);
    Rng rng(1);
    const double tau0 = 2.0 * a / 1500.0;
    for (int i = 0; i < 30; ++i) {
        const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const Vec2 z{a * std::cos(t), b * std::sin(t)};
        CHECK(propagation_delay(Vec2{-c_f, 0}, Vec2{c_f, 0}, z, 1500.0) ==
              Approx(tau0).epsilon(1e-12));
    }
}

TEST_CASE("attenuation and element pattern") {
    SystemConfig cfg = small_config();
    const Pose tx{0, 0, 0};
    const Pose rx{0, 0, 0};

    // boresight: both patterns are 1, exploding-sources spreading only
    CHECK(attenuation(tx, rx, Vec2{0, 10}, cfg) == Approx(1.0 / std::sqrt(20.0)));
    // doubling both distances scales by 1/sqrt(2)
    CHECK(attenuation(tx, rx, Vec2{0, 20}, cfg) ==
          Approx(attenuation(tx, rx, Vec2{0, 10}, cfg) / std::numbers::sqrt2));

    // first pattern null at sin(phi) = lambda / D
    const double lam = cfg.wavelength_m();
    CHECK(element_pattern(cfg.d_tx_m, lam, lam / cfg.d_tx_m) == Approx(0.0).margin(1e-12));
    CHECK(element_pattern(cfg.d_tx_m, lam, 0.0) == 1.0);

    CHECK_THROWS_AS(attenuation(tx, rx, Vec2{0, 0}, cfg), CoincidentPoint);
}

TEST_CASE("greens_function") {
    SystemConfig cfg = small_config();
    auto grid = make_grid(cfg, {0.3, 0.3}, {0.0, 5.0});
    const Pose tx{0, 0, 0}, rx{0, 0, 0};

    SECTION("zero carrier leaves pure attenuation") {
        SystemConfig c0 = cfg;
        c0.f0_hz = 0.0;
        const auto g = greens_function(grid.frame, tx, rx, c0);
        for (int iy = 0; iy < grid.frame.ny; ++iy)
            for (int ix = 0; ix < grid.frame.nx; ++ix) {
                const auto v = g[grid.frame.index(ix, iy)];
                CHECK(v.imag() == Approx(0.0).margin(1e-15));
                CHECK(v.real() > 0.0);
            }
    }
    SECTION("monostatic cell phase is -4 pi f0 r / c") {
        const auto g = greens_function(grid.frame, tx, rx, cfg);
        for (int iy = 0; iy < grid.frame.ny; iy += 3)
            for (int ix = 0; ix < grid.frame.nx; ix += 3) {
                const Vec2 z = grid.frame.cell_center(ix, iy);
                const double r = std::hypot(z.x, z.y);
                const double want =
                    -4.0 * std::numbers::pi * cfg.f0_hz * r / cfg.sound_speed_mps;
                const auto v = g[grid.frame.index(ix, iy)];
                CHECK(std::arg(v * std::polar(1.0, -want)) == Approx(0.0).margin(1e-9));
            }
    }
    SECTION("modulus equals attenuation") {
        const auto g = greens_function(grid.frame, tx, rx, cfg);
        for (int iy = 0; iy < grid.frame.ny; iy += 2)
            for (int ix = 0; ix < grid.frame.nx; ix += 2) {
                const Vec2 z = grid.frame.cell_center(ix, iy);
                CHECK(std::abs(g[grid.frame.index(ix, iy)]) ==
                      Approx(attenuation(tx, rx, z, cfg)));
            }
    }
}

TEST_CASE("forward_observe basics") {
    SystemConfig cfg = small_config();
    cfg.f0_hz = 30e3; // wavelength 5 cm; keep bandwidth <= f0
    cfg.bandwidth_hz = 30e3;
    auto rho = make_grid(cfg, {0.3, 0.3}, {0.0, 5.0});
    const Pose tx{-0.02, 0, 0}, rx{0.07, 0, 0};
    const TimeGrid tg =
        covering_time_grid(cfg, rho.frame, PingGeometry{rx, tx, {rx}});

    SECTION("zero reflectivity gives a zero track") {
        const Track t = forward_observe(rho, tx, rx, tg, cfg);
        for (const auto& v : t.samples) CHECK(v == std::complex<double>{});
    }

    SECTION("single cell spreads the kernel at its delay") {
        SystemConfig c0 = cfg;
        c0.f0_hz = 1e-9; // no carrier phase, patterns effectively flat
        rho.at(5, 7) = 1.0;
        const Track t = forward_observe(rho, tx, rx, tg, c0);
        const Vec2 z = rho.frame.cell_center(5, 7);
        const double tau = propagation_delay(tx, rx, z, c0.sound_speed_mps);
        const double alpha = attenuation(tx, rx, z, c0);
        const double u = (tau - tg.t0) / tg.dt;
        double w[InterpKernel::taps];
        int m0 = 0;
        InterpKernel::weights(u, m0, w);
        for (int i = 0; i < tg.m; ++i) {
            double want = 0.0;
            if (i >= m0 && i < m0 + InterpKernel::taps) want = alpha * w[i - m0];
            CHECK(t.samples[static_cast<std::size_t>(i)].real() == Approx(want).margin(1e-12));
            CHECK(t.samples[static_cast<std::size_t>(i)].imag() == Approx(0.0).margin(1e-9));
        }
    }

    SECTION("out-of-window cells are counted, not fatal") {
        TimeGrid tiny{tg.t0, tg.dt, 4};
        rho.at(5, 7) = 1.0;
        std::size_t dropped = 0;
        const Track t = forward_observe(rho, tx, rx, tiny, cfg, &dropped);
        CHECK(dropped > 0);
        CHECK(t.samples.size() == 4);
    }
}

TEST_CASE("adjoint identity for the single-pair operators") {
    Rng rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        SystemConfig cfg = small_config();
        auto rho = make_grid(cfg, {0.25, 0.25}, {rng.uniform(-0.2, 0.2), 5.0});
        const Pose tx{rng.uniform(-0.1, 0.1), rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02)};
        const Pose rx{rng.uniform(-0.1, 0.1), rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02)};
        const TimeGrid tg = covering_time_grid(cfg, rho.frame, PingGeometry{rx, tx, {rx}});

        for (auto& v : rho.values) v = rng.complex_normal();
        Track phi(tg);
        for (auto& v : phi.samples) v = rng.complex_normal();

        const Track a_rho = forward_observe(rho, tx, rx, tg, cfg);
        const ReflectivityGrid at_phi = adjoint_observe(phi, tx, rx, rho.frame, cfg);

        std::complex<double> lhs{}, rhs{};
        for (std::size_t i = 0; i < phi.samples.size(); ++i)
            lhs += std::conj(phi.samples[i]) * a_rho.samples[i];
        for (std::size_t i = 0; i < rho.values.size(); ++i)
            rhs += std::conj(at_phi.values[i]) * rho.values[i];
        double norm_rho = 0.0, norm_phi = 0.0;
        for (const auto& v : rho.values) norm_rho += std::norm(v);
        for (const auto& v : phi.samples) norm_phi += std::norm(v);
        const double scale = std::sqrt(norm_rho * norm_phi);
        CHECK(std::abs(lhs - std::conj(rhs)) / scale < 1e-12);
    }
}

TEST_CASE("forward is linear") {
    SystemConfig cfg = small_config();
    auto r1 = make_grid(cfg, {0.3, 0.3}, {0.0, 5.0});
    auto r2 = r1;
    Rng rng(31);
    for (auto& v : r1.values) v = rng.complex_normal();
    for (auto& v : r2.values) v = rng.complex_normal();
    const Pose tx{-0.05, 0, 0}, rx{0.05, 0, 0};
    const TimeGrid tg = covering_time_grid(cfg, r1.frame, PingGeometry{rx, tx, {rx}});
    const std::complex<double> a{1.3, -0.4}, b{-0.2, 2.1};

    auto combo = r1;
    for (std::size_t i = 0; i < combo.values.size(); ++i)
        combo.values[i] = a * r1.values[i] + b * r2.values[i];

    const Track t1 = forward_observe(r1, tx, rx, tg, cfg);
    const Track t2 = forward_observe(r2, tx, rx, tg, cfg);
    const Track tc = forward_observe(combo, tx, rx, tg, cfg);
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < tc.samples.size(); ++i) {
        err += std::norm(tc.samples[i] - (a * t1.samples[i] + b * t2.samples[i]));
        ref += std::norm(tc.samples[i]);
    }
    CHECK(std::sqrt(err) / std::sqrt(ref) < 1e-12);
}

TEST_CASE("dense entry oracle matches forward and adjoint") {
    // materialize the observation matrix from the defining formulas and check
    // both application paths against it
    SystemConfig cfg = small_config();
    cfg.n_rx = 2;
    auto rho = make_grid(cfg, {0.2, 0.2}, {0.0, 5.0}); // 8x8
    REQUIRE(rho.frame.cell_count() <= 144);
    const PingGeometry geom = make_ping_geometry(cfg, Pose{0.0, 0.0, 0.01});
    const TimeGrid tg = covering_time_grid(cfg, rho.frame, geom);

    PingOperator op;
    op.geometry = geom;
    op.grid = rho.frame;
    op.time = tg;
    op.cfg = cfg;
    PreparedPingOperator prep(op);

    const std::size_t rows = op.data_size();
    const std::size_t cols = op.image_size();
    std::vector<std::complex<double>> dense(rows * cols);
    const double w0 = 2.0 * std::numbers::pi * cfg.f0_hz;
    for (std::size_t l = 0; l < geom.rx_centers.size(); ++l) {
        const Pose& rx = geom.rx_centers[l];
        for (std::size_t n = 0; n < cols; ++n) {
            const int iy = static_cast<int>(n) / rho.frame.nx;
            const int ix = static_cast<int>(n) % rho.frame.nx;
            const Vec2 z = rho.frame.cell_center(ix, iy);
            const double d_t = distance(z, geom.tx.translation());
            const double d_r = distance(z, rx.translation());
            const double tau = (d_t + d_r) / cfg.sound_speed_mps;
            const double u = (tg.t0 - tg.t0) * 0.0 + (tau - tg.t0) / tg.dt;
            if (std::lround(u) < 0 || std::lround(u) >= tg.m) continue;
            const double lam = cfg.wavelength_m();
            const double alpha = element_pattern(cfg.d_tx_m, lam, sin_off_boresight(geom.tx, z)) *
                                 element_pattern(cfg.d_rx_m, lam, sin_off_boresight(rx, z)) /
                                 std::sqrt(d_t + d_r);
            const std::complex<double> G = std::polar(alpha, -w0 * tau);
            for (int m = 0; m < tg.m; ++m) {
                const double k = InterpKernel::value(u - m);
                dense[(l * static_cast<std::size_t>(tg.m) + static_cast<std::size_t>(m)) * cols +
                      n] = k * G;
            }
        }
    }

    Rng rng(5);
    CVector x(cols), y(rows);
    for (auto& v : x) v = rng.complex_normal();
    for (auto& v : y) v = rng.complex_normal();

    CVector ax(rows), aty(cols);
    prep.apply(x, ax);
    prep.apply_adjoint(y, aty);

    double err_f = 0.0, ref_f = 0.0, err_a = 0.0, ref_a = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        std::complex<double> want{};
        for (std::size_t c = 0; c < cols; ++c) want += dense[r * cols + c] * x[c];
        err_f += std::norm(ax[r] - want);
        ref_f += std::norm(want);
    }
    for (std::size_t c = 0; c < cols; ++c) {
        std::complex<double> want{};
        for (std::size_t r = 0; r < rows; ++r)
            want += std::conj(dense[r * cols + c]) * y[r];
        err_a += std::norm(aty[c] - want);
        ref_a += std::norm(want);
    }
    CHECK(std::sqrt(err_f / ref_f) < 1e-12);
    CHECK(std::sqrt(err_a / ref_a) < 1e-12);
}

TEST_CASE("iso-delay scatterers are ambiguous for one pair") {
    SystemConfig cfg = small_config();
    auto rho = make_grid(cfg, {0.4, 0.2}, {0.0, 5.0}); // symmetric about x = 0
    const Pose tx{-0.05, 0, 0}, rx{0.05, 0, 0};
    const TimeGrid tg = covering_time_grid(cfg, rho.frame, PingGeometry{rx, tx, {rx}});

    const int iy = rho.frame.ny / 2;
    const int ix = 2;
    const int ix_m = rho.frame.nx - 1 - ix; // mirror cell across the foci axis
    const Vec2 z1 = rho.frame.cell_center(ix, iy);
    const Vec2 z2 = rho.frame.cell_center(ix_m, iy);
    REQUIRE(propagation_delay(tx, rx, z1, cfg.sound_speed_mps) ==
            Approx(propagation_delay(tx, rx, z2, cfg.sound_speed_mps)).epsilon(1e-14));

    auto r1 = rho, r2 = rho;
    r1.at(ix, iy) = 1.0;
    r2.at(ix_m, iy) = 1.0;
    const Track t1 = forward_observe(r1, tx, rx, tg, cfg);
    const Track t2 = forward_observe(r2, tx, rx, tg, cfg);
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < t1.samples.size(); ++i) {
        err += std::norm(t1.samples[i] - t2.samples[i]);
        ref += std::norm(t1.samples[i]);
    }
    CHECK(std::sqrt(err / ref) < 1e-10);
}

TEST_CASE("backprojected point scatterer peaks at the scatterer cell") {
    SystemConfig cfg = small_config();
    cfg.n_rx = 4;
    auto rho = make_grid(cfg, {0.3, 0.3}, {0.0, 5.0}); // 12x12
    const PingGeometry geom = make_ping_geometry(cfg, Pose{});
    const TimeGrid tg = covering_time_grid(cfg, rho.frame, geom);
    const int cx = 6, cy = 5;
    rho.at(cx, cy) = 1.0;

    PingOperator op;
    op.geometry = geom;
    op.grid = rho.frame;
    op.time = tg;
    op.cfg = cfg;
    PreparedPingOperator prep(op);
    CVector data(op.data_size()), img(op.image_size());
    prep.apply(rho.values, data);
    prep.apply_adjoint(data, img);

    std::size_t best = 0;
    for (std::size_t i = 1; i < img.size(); ++i)
        if (std::abs(img[i]) > std::abs(img[best])) best = i;
    CHECK(best == rho.frame.index(cx, cy));
}
