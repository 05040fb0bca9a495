#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "sasnav/acoustic.hpp"
#include "sasnav/errors.hpp"
#include "sasnav/geometry.hpp"
#include "sasnav/kernel.hpp"
#include "sasnav/scene.hpp"
#include "sasnav/track.hpp"

namespace sasnav {

/// Geometry of one ping: array midpoint, Tx, and the N receiver centers.
struct PingGeometry {
    Pose array_mid;
    Pose tx;
    std::vector<Pose> rx_centers;

    Pose phase_center_pose() const { return phase_center(tx, array_mid); }

    void validate() const {
        if (rx_centers.empty()) throw ConfigError("PingGeometry: no receivers");
    }
};

/// Nominal ping geometry from the system config at a given phase-center pose,
/// using the replacement bistatic model: Tx and array midpoint sit at
/// +-tx_offset/2 from the phase center (componentwise), receivers equispaced
/// by L along the array direction.
inline PingGeometry make_ping_geometry(const SystemConfig& cfg, const Pose& pca) {
    const Pose vs_t{0.5 * cfg.tx_offset.x, 0.5 * cfg.tx_offset.y, 0.0};
    const Pose vs_r{-0.5 * cfg.tx_offset.x, -0.5 * cfg.tx_offset.y, 0.0};
    const BistaticPair pair = bistatic_replacement(pca, vs_r, vs_t, cfg.tx_offset.theta);
    PingGeometry g;
    g.array_mid = pair.rx;
    g.tx = pair.tx;
    g.rx_centers.reserve(static_cast<std::size_t>(cfg.n_rx));
    for (int i = 0; i < cfg.n_rx; ++i) {
        const double along = (i - 0.5 * (cfg.n_rx - 1)) * cfg.rx_spacing_m;
        g.rx_centers.push_back(compose(g.array_mid, Pose{along, 0.0, 0.0}));
    }
    return g;
}

/// True perturbed ping geometry: the local Tx/array offsets ride on the
/// vehicle pose (rotations apply), unlike the componentwise replacement model
/// used for reconstruction.
inline PingGeometry make_true_ping_geometry(const SystemConfig& cfg, const Pose& pca_true,
                                            double tx_extra_yaw = 0.0) {
    PingGeometry g;
    g.array_mid = compose(pca_true, Pose{-0.5 * cfg.tx_offset.x, -0.5 * cfg.tx_offset.y, 0.0});
    g.tx = compose(pca_true, Pose{0.5 * cfg.tx_offset.x, 0.5 * cfg.tx_offset.y,
                                  cfg.tx_offset.theta + tx_extra_yaw});
    for (int i = 0; i < cfg.n_rx; ++i) {
        const double along = (i - 0.5 * (cfg.n_rx - 1)) * cfg.rx_spacing_m;
        g.rx_centers.push_back(compose(g.array_mid, Pose{along, 0.0, 0.0}));
    }
    return g;
}

/// Shift every pose of the geometry by a plain translation (no rotation).
inline PingGeometry translated(const PingGeometry& g, Vec2 delta) {
    PingGeometry out = g;
    out.array_mid.x += delta.x;
    out.array_mid.y += delta.y;
    out.tx.x += delta.x;
    out.tx.y += delta.y;
    for (Pose& p : out.rx_centers) {
        p.x += delta.x;
        p.y += delta.y;
    }
    return out;
}

/// Apply a displacement hypothesis to the geometry: every pose is composed
/// with sigma (rotation about the frame origin, then translation). This is the
/// geometric realization of the shift/rotation operator S_sigma.
inline PingGeometry displaced(const PingGeometry& g, const Pose& sigma) {
    PingGeometry out;
    out.array_mid = compose(sigma, g.array_mid);
    out.tx = compose(sigma, g.tx);
    out.rx_centers.reserve(g.rx_centers.size());
    for (const Pose& p : g.rx_centers) out.rx_centers.push_back(compose(sigma, p));
    return out;
}

/// One ping's stacked observation operator: N bistatic pairs (Tx with each
/// receiver) sharing a grid frame and a time grid. Immutable descriptor;
/// prepare() builds the tables used by apply/adjoint.
struct PingOperator {
    PingGeometry geometry;
    GridFrame grid;
    TimeGrid time;
    SystemConfig cfg;

    int n_tracks() const { return static_cast<int>(geometry.rx_centers.size()); }
    std::size_t image_size() const { return grid.cell_count(); }
    std::size_t data_size() const {
        return static_cast<std::size_t>(n_tracks()) * static_cast<std::size_t>(time.m);
    }

    void validate() const {
        geometry.validate();
        grid.validate();
        time.validate();
        cfg.validate();
    }
};

/// Precomputed spreading tables for fast repeated application of a
/// PingOperator. All transcendental work (delays, patterns, carrier phase,
/// kernel weights) happens once at construction; apply/adjoint are then pure
/// multiply-accumulate passes and exact transposes of each other.
class PreparedPingOperator {
public:
    explicit PreparedPingOperator(const PingOperator& op) : op_(op) {
        op.validate();
        const std::size_t cells = op.grid.cell_count();
        const std::size_t pairs = op.geometry.rx_centers.size();
        first_.resize(cells * pairs);
        weights_.resize(cells * pairs * InterpKernel::taps);
        green_.resize(cells * pairs);
        const double w0 = 2.0 * std::numbers::pi * op.cfg.f0_hz;
        const double lam = op.cfg.wavelength_m();
        std::size_t e = 0;
        for (std::size_t l = 0; l < pairs; ++l) {
            const Pose& rx = op.geometry.rx_centers[l];
            const Pose& tx = op.geometry.tx;
            for (int iy = 0; iy < op.grid.ny; ++iy) {
                for (int ix = 0; ix < op.grid.nx; ++ix, ++e) {
                    const Vec2 z = op.grid.cell_center(ix, iy);
                    const double d_t = distance(z, tx.translation());
                    const double d_r = distance(z, rx.translation());
                    const double tau = (d_t + d_r) / op.cfg.sound_speed_mps;
                    const double u = (tau - op.time.t0) / op.time.dt;
                    const int nearest = static_cast<int>(std::lround(u));
                    if (nearest < 0 || nearest >= op.time.m || d_t == 0.0 || d_r == 0.0) {
                        first_[e] = kDropped;
                        ++dropped_;
                        continue;
                    }
                    int m0 = 0;
                    InterpKernel::weights(u, m0, &weights_[e * InterpKernel::taps]);
                    first_[e] = m0;
                    const double pt =
                        element_pattern(op.cfg.d_tx_m, lam, sin_off_boresight(tx, z));
                    const double pr =
                        element_pattern(op.cfg.d_rx_m, lam, sin_off_boresight(rx, z));
                    green_[e] = std::polar(pt * pr / std::sqrt(d_t + d_r), -w0 * tau);
                }
            }
        }
    }

    const PingOperator& descriptor() const { return op_; }
    std::size_t rows() const { return op_.data_size(); }
    std::size_t cols() const { return op_.image_size(); }
    std::size_t dropped_cells() const { return dropped_; }

    /// data[l*m + t] += sum over cells of kernel * G * image[cell]
    void apply(std::span<const std::complex<double>> image,
               std::span<std::complex<double>> data) const {
        check_spans(image.size(), data.size());
        std::fill(data.begin(), data.end(), std::complex<double>{});
        const std::size_t cells = op_.grid.cell_count();
        const int m = op_.time.m;
        std::size_t e = 0;
        for (std::size_t l = 0; l < op_.geometry.rx_centers.size(); ++l) {
            std::complex<double>* track = data.data() + l * static_cast<std::size_t>(m);
            for (std::size_t n = 0; n < cells; ++n, ++e) {
                const int m0 = first_[e];
                if (m0 == kDropped) continue;
                const std::complex<double> v = green_[e] * image[n];
                const double* w = &weights_[e * InterpKernel::taps];
                const int k0 = std::max(0, -m0);
                const int k1 = std::min<int>(InterpKernel::taps, m - m0);
                for (int k = k0; k < k1; ++k) track[m0 + k] += w[k] * v;
            }
        }
    }

    /// image[cell] += conj(G) * sum over taps of kernel * data — the exact
    /// transpose of apply().
    void apply_adjoint(std::span<const std::complex<double>> data,
                       std::span<std::complex<double>> image) const {
        check_spans(image.size(), data.size());
        std::fill(image.begin(), image.end(), std::complex<double>{});
        const std::size_t cells = op_.grid.cell_count();
        const int m = op_.time.m;
        std::size_t e = 0;
        for (std::size_t l = 0; l < op_.geometry.rx_centers.size(); ++l) {
            const std::complex<double>* track = data.data() + l * static_cast<std::size_t>(m);
            for (std::size_t n = 0; n < cells; ++n, ++e) {
                const int m0 = first_[e];
                if (m0 == kDropped) continue;
                const double* w = &weights_[e * InterpKernel::taps];
                std::complex<double> acc{};
                const int k0 = std::max(0, -m0);
                const int k1 = std::min<int>(InterpKernel::taps, m - m0);
                for (int k = k0; k < k1; ++k) acc += w[k] * track[m0 + k];
                image[n] += std::conj(green_[e]) * acc;
            }
        }
    }

private:
    static constexpr int kDropped = INT32_MIN;

    void check_spans(std::size_t image_size, std::size_t data_size) const {
        if (image_size != cols() || data_size != rows())
            throw ShapeMismatch("PreparedPingOperator: span sizes do not match operator");
    }

    PingOperator op_;
    std::vector<int> first_;
    std::vector<double> weights_;
    std::vector<std::complex<double>> green_;
    std::size_t dropped_ = 0;
};

} // namespace sasnav
