#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include "sasnav/errors.hpp"

namespace sasnav {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::remainder(a, two_pi); // (-pi, pi], except remainder may return -pi
    if (a <= -std::numbers::pi) a += two_pi;
    return a;
}

/// A rigid pose on the slant plane: position (x along-track, y range) and
/// orientation theta (radians, counterclockwise positive, wrapped to (-pi, pi]).
/// Also used for displacement triplets (surge, sway, yaw).
struct Pose {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Pose() = default;
    Pose(double x_, double y_, double theta_) : x(x_), y(y_), theta(wrap_angle(theta_)) {}

    Vec2 translation() const { return {x, y}; }

    friend bool operator==(const Pose& a, const Pose& b) {
        return a.x == b.x && a.y == b.y && a.theta == b.theta;
    }
};

/// Apply the rigid transform of `p` to a point: rotate about the origin by
/// p.theta, then translate by (p.x, p.y).
inline Vec2 transform_point(const Pose& p, Vec2 v) {
    const double c = std::cos(p.theta);
    const double s = std::sin(p.theta);
    return {c * v.x - s * v.y + p.x, s * v.x + c * v.y + p.y};
}

/// Rigid composition: the transform applying `b` first, then `a` (rotation
/// about the origin of the moving frame, then translation).
inline Pose compose(const Pose& a, const Pose& b) {
    const Vec2 t = transform_point(a, b.translation());
    return {t.x, t.y, a.theta + b.theta};
}

/// Group inverse: compose(p, inverse(p)) == identity.
inline Pose inverse(const Pose& p) {
    const double c = std::cos(p.theta);
    const double s = std::sin(p.theta);
    return {-(c * p.x + s * p.y), -(-s * p.x + c * p.y), -p.theta};
}

/// Phase center of a bistatic pair: the midpoint of the Tx and array-midpoint
/// positions; orientation is taken from the receiver array.
inline Pose phase_center(const Pose& tx, const Pose& array_mid) {
    return {0.5 * (tx.x + array_mid.x), 0.5 * (tx.y + array_mid.y), array_mid.theta};
}

/// Componentwise differential displacement from ping p to ping q,
/// antisymmetric by construction: diff(p,q) == -diff(q,p).
inline Pose differential_displacement(const Pose& pca_p, const Pose& pca_q) {
    return {pca_q.x - pca_p.x, pca_q.y - pca_p.y, wrap_angle(pca_q.theta - pca_p.theta)};
}

/// Physical constants and array geometry of the sonar.
struct SystemConfig {
    double f0_hz = 300e3;         // carrier frequency
    double bandwidth_hz = 30e3;   // two-sided baseband bandwidth
    double sound_speed_mps = 1500.0;
    double d_tx_m = 0.05;         // Tx element aperture
    double d_rx_m = 0.05;         // Rx element aperture
    int n_rx = 16;                // receiver count
    double rx_spacing_m = 0.05;   // receiver pitch L along the array
    Pose tx_offset{-0.10, 0.0, 0.0}; // Tx pose relative to the array midpoint
    int expected_overlap_k = 4;   // expected overlapping phase centers K
    double midrange_m = 10.0;
    double range_window_m = 2.0;

    double wavelength_m() const { return sound_speed_mps / f0_hz; }
    double max_aperture_m() const { return std::max(d_tx_m, d_rx_m); }
    /// Grid spacing matching the available bandwidth, c/(2B).
    double range_resolution_m() const { return sound_speed_mps / (2.0 * bandwidth_hz); }

    void validate() const {
        if (f0_hz <= 0 || bandwidth_hz <= 0 || bandwidth_hz > f0_hz)
            throw ConfigError("SystemConfig: need 0 < bandwidth <= f0");
        if (sound_speed_mps <= 0) throw ConfigError("SystemConfig: sound speed must be positive");
        if (d_tx_m <= 0 || d_rx_m <= 0) throw ConfigError("SystemConfig: apertures must be positive");
        if (n_rx < 1) throw ConfigError("SystemConfig: need at least one receiver");
        if (rx_spacing_m <= 0 && n_rx > 1)
            throw ConfigError("SystemConfig: receiver spacing must be positive");
        if (midrange_m <= 0 || range_window_m <= 0)
            throw ConfigError("SystemConfig: midrange and range window must be positive");
        if (expected_overlap_k < 0 || expected_overlap_k >= n_rx)
            throw ConfigError("SystemConfig: need 0 <= K < N");
    }
};

/// Maximum platform speed for a maximum range R: N*D*c/(8R), the single
/// Tx/Rx bound Dc/8R times the N-receiver factor.
inline double max_speed(const SystemConfig& cfg, double range_m) {
    if (range_m <= 0) throw NonPositiveRange("max_speed: range must be positive");
    return static_cast<double>(cfg.n_rx) * cfg.max_aperture_m() * cfg.sound_speed_mps /
           (8.0 * range_m);
}

struct BistaticPair {
    Pose rx; // array midpoint of the replacement system
    Pose tx;
};

/// Replacement bistatic model: place an equivalent Rx/Tx pair around a given
/// phase center. The varsigma offsets are added componentwise (they are
/// expressed in the track frame) and must have zero midpoint so the phase
/// center is preserved; the Tx may carry an extra orientation offset.
inline BistaticPair bistatic_replacement(const Pose& pca, const Pose& varsigma_r,
                                         const Pose& varsigma_t, double dtheta_t) {
    const double mx = 0.5 * (varsigma_r.x + varsigma_t.x);
    const double my = 0.5 * (varsigma_r.y + varsigma_t.y);
    if (std::abs(mx) > 1e-9 || std::abs(my) > 1e-9)
        throw MidpointNotZero("bistatic_replacement: varsigma midpoint must be (0,0)");
    BistaticPair out;
    out.rx = Pose{pca.x + varsigma_r.x, pca.y + varsigma_r.y, pca.theta + varsigma_r.theta};
    out.tx = Pose{pca.x + varsigma_t.x, pca.y + varsigma_t.y,
                  pca.theta + varsigma_t.theta + dtheta_t};
    return out;
}

} // namespace sasnav
