#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "sasnav/errors.hpp"
#include "sasnav/geometry.hpp"
#include "sasnav/kernel.hpp"
#include "sasnav/scene.hpp"
#include "sasnav/track.hpp"

namespace sasnav {

/// Round-trip propagation delay Tx -> z -> Rx.
inline double propagation_delay(Vec2 tx, Vec2 rx, Vec2 z, double sound_speed_mps) {
    return (distance(z, tx) + distance(z, rx)) / sound_speed_mps;
}

inline double propagation_delay(const Pose& tx, const Pose& rx, Vec2 z,
                                double sound_speed_mps) {
    return propagation_delay(tx.translation(), rx.translation(), z, sound_speed_mps);
}

/// Far-field pattern of a uniform aperture: |sinc(D sin(phi) / lambda)|,
/// phi measured off broadside.
inline double element_pattern(double aperture_m, double wavelength_m, double sin_phi) {
    const double u = std::numbers::pi * aperture_m * sin_phi / wavelength_m;
    if (u == 0.0) return 1.0;
    return std::abs(std::sin(u) / u);
}

/// sin of the off-boresight angle of z seen from an element with pose `e`;
/// broadside points along the element's +y axis.
inline double sin_off_boresight(const Pose& e, Vec2 z) {
    const double dx = z.x - e.x;
    const double dy = z.y - e.y;
    const double r = std::hypot(dx, dy);
    // component of the unit ray along the element axis (rotated x axis)
    return (std::cos(e.theta) * dx + std::sin(e.theta) * dy) / r;
}

/// Two-way amplitude factor: exploding-sources spreading 1/sqrt(d_tx + d_rx)
/// times both element patterns.
inline double attenuation(const Pose& tx, const Pose& rx, Vec2 z, double theta_t,
                          double theta_r, const SystemConfig& cfg) {
    const double d_t = distance(z, tx.translation());
    const double d_r = distance(z, rx.translation());
    if (d_t == 0.0 || d_r == 0.0)
        throw CoincidentPoint("attenuation: scene point coincides with an element");
    const double lam = cfg.wavelength_m();
    const Pose te{tx.x, tx.y, theta_t};
    const Pose re{rx.x, rx.y, theta_r};
    const double pt = element_pattern(cfg.d_tx_m, lam, sin_off_boresight(te, z));
    const double pr = element_pattern(cfg.d_rx_m, lam, sin_off_boresight(re, z));
    return pt * pr / std::sqrt(d_t + d_r);
}

inline double attenuation(const Pose& tx, const Pose& rx, Vec2 z, const SystemConfig& cfg) {
    return attenuation(tx, rx, z, tx.theta, rx.theta, cfg);
}

/// Green's function of one bistatic pair over all grid cells:
/// alpha * exp(-j 2 pi f0 tau).
inline std::vector<std::complex<double>> greens_function(const GridFrame& grid, const Pose& tx,
                                                         const Pose& rx,
                                                         const SystemConfig& cfg) {
    std::vector<std::complex<double>> g(grid.cell_count());
    const double w0 = 2.0 * std::numbers::pi * cfg.f0_hz;
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const Vec2 z = grid.cell_center(ix, iy);
            const double tau = propagation_delay(tx, rx, z, cfg.sound_speed_mps);
            const double a = attenuation(tx, rx, z, cfg);
            g[grid.index(ix, iy)] = std::polar(a, -w0 * tau);
        }
    }
    return g;
}

/// Forward observation of one bistatic pair: each cell's weighted sample
/// G(z) rho(z) is spread onto the time grid with the interpolation kernel
/// centered at its delay. Cells whose nearest sample falls outside the window
/// are counted in `dropped` (if given) and skipped; partially covered kernel
/// supports are clipped, identically in the adjoint.
inline Track forward_observe(const ReflectivityGrid& rho, const Pose& tx, const Pose& rx,
                             const TimeGrid& time, const SystemConfig& cfg,
                             std::size_t* dropped = nullptr) {
    rho.validate();
    time.validate();
    Track out(time);
    const auto g = greens_function(rho.frame, tx, rx, cfg);
    double w[InterpKernel::taps];
    for (std::size_t n = 0; n < g.size(); ++n) {
        const int iy = static_cast<int>(n) / rho.frame.nx;
        const int ix = static_cast<int>(n) % rho.frame.nx;
        const Vec2 z = rho.frame.cell_center(ix, iy);
        const double tau = propagation_delay(tx, rx, z, cfg.sound_speed_mps);
        const double u = (tau - time.t0) / time.dt;
        const int nearest = static_cast<int>(std::lround(u));
        if (nearest < 0 || nearest >= time.m) {
            if (dropped) ++*dropped;
            continue;
        }
        int m0 = 0;
        InterpKernel::weights(u, m0, w);
        const std::complex<double> v = g[n] * rho.values[n];
        const int k0 = std::max(0, -m0);
        const int k1 = std::min(InterpKernel::taps, time.m - m0);
        for (int k = k0; k < k1; ++k) out.samples[static_cast<std::size_t>(m0 + k)] += w[k] * v;
    }
    return out;
}

/// Exact conjugate transpose of forward_observe: gather with the same kernel
/// at each cell's delay and multiply by conj(G).
inline ReflectivityGrid adjoint_observe(const Track& trk, const Pose& tx, const Pose& rx,
                                        const GridFrame& grid, const SystemConfig& cfg) {
    trk.validate();
    grid.validate();
    ReflectivityGrid out(grid);
    const auto g = greens_function(grid, tx, rx, cfg);
    const TimeGrid& time = trk.time;
    double w[InterpKernel::taps];
    for (std::size_t n = 0; n < g.size(); ++n) {
        const int iy = static_cast<int>(n) / grid.nx;
        const int ix = static_cast<int>(n) % grid.nx;
        const Vec2 z = grid.cell_center(ix, iy);
        const double tau = propagation_delay(tx, rx, z, cfg.sound_speed_mps);
        const double u = (tau - time.t0) / time.dt;
        const int nearest = static_cast<int>(std::lround(u));
        if (nearest < 0 || nearest >= time.m) continue;
        int m0 = 0;
        InterpKernel::weights(u, m0, w);
        std::complex<double> acc = 0.0;
        const int k0 = std::max(0, -m0);
        const int k1 = std::min(InterpKernel::taps, time.m - m0);
        for (int k = k0; k < k1; ++k) acc += w[k] * trk.samples[static_cast<std::size_t>(m0 + k)];
        out.values[n] = std::conj(g[n]) * acc;
    }
    return out;
}

} // namespace sasnav
