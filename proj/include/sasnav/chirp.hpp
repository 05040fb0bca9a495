#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "sasnav/errors.hpp"
#include "sasnav/track.hpp"

namespace sasnav {

/// Linear FM pulse parameters plus the acquisition/decimation settings used
/// to turn real passband recordings into complex baseband tracks.
struct ChirpSpec {
    double f_center_hz = 105e3;
    double bandwidth_hz = 30e3;
    double duration_s = 3e-3;
    double fs_hz = 1e6;   // input sampling rate of the real passband signal
    int decimation = 33;

    int chirp_samples() const { return static_cast<int>(std::lround(duration_s * fs_hz)); }

    void validate() const {
        if (f_center_hz <= 0 || bandwidth_hz <= 0 || duration_s <= 0)
            throw ConfigError("ChirpSpec: physical fields must be positive");
        if (fs_hz <= 2.0 * (f_center_hz + 0.5 * bandwidth_hz))
            throw ConfigError("ChirpSpec: fs must exceed twice the passband upper edge");
        if (decimation < 1) throw ConfigError("ChirpSpec: decimation must be >= 1");
    }
};

/// Real passband LFM chirp sweeping bandwidth around f_center over duration.
inline std::vector<double> make_chirp(const ChirpSpec& spec) {
    spec.validate();
    const int n = spec.chirp_samples();
    const double k = spec.bandwidth_hz / spec.duration_s;
    const double f_start = spec.f_center_hz - 0.5 * spec.bandwidth_hz;
    std::vector<double> s(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = i / spec.fs_hz;
        s[static_cast<std::size_t>(i)] =
            std::cos(2.0 * std::numbers::pi * (f_start * t + 0.5 * k * t * t));
    }
    return s;
}

namespace detail {

/// Kaiser low-pass FIR (odd length), cutoff as a fraction of fs.
inline std::vector<double> lowpass_taps(double cutoff_hz, double fs_hz, int half_len,
                                        double beta = 8.0) {
    const int n = 2 * half_len + 1;
    std::vector<double> h(static_cast<std::size_t>(n));
    const double i0b = std::cyl_bessel_i(0.0, beta);
    const double fc = cutoff_hz / fs_hz; // cycles per sample
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = i - half_len;
        const double sinc = (x == 0.0) ? 2.0 * fc
                                       : std::sin(2.0 * std::numbers::pi * fc * x) /
                                             (std::numbers::pi * x);
        const double u = x / half_len;
        const double w = std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - u * u)) / i0b;
        h[static_cast<std::size_t>(i)] = sinc * w;
        sum += h[static_cast<std::size_t>(i)];
    }
    for (double& v : h) v /= sum; // unit DC gain
    return h;
}

} // namespace detail

/// Pulse compression of a real passband recording: matched filter against the
/// analytic chirp replica, complex basebanding at f_center, low-pass at half
/// the bandwidth, then decimation. Sample i of the output corresponds to
/// round-trip delay time.t0 + i*time.dt, with t = 0 at the chirp leading edge.
inline Track pulse_compress(std::span<const double> raw, const ChirpSpec& spec) {
    spec.validate();
    const int nc = spec.chirp_samples();
    if (static_cast<int>(raw.size()) < nc)
        throw TooShort("pulse_compress: input shorter than the chirp");

    // analytic replica
    std::vector<std::complex<double>> replica(static_cast<std::size_t>(nc));
    {
        const double k = spec.bandwidth_hz / spec.duration_s;
        const double f_start = spec.f_center_hz - 0.5 * spec.bandwidth_hz;
        for (int i = 0; i < nc; ++i) {
            const double t = i / spec.fs_hz;
            replica[static_cast<std::size_t>(i)] = std::polar(
                1.0, 2.0 * std::numbers::pi * (f_start * t + 0.5 * k * t * t));
        }
    }

    // correlation (matched filter), valid part: y[n] = sum_k raw[n+k] conj(replica[k])
    const int nv = static_cast<int>(raw.size()) - nc + 1;
    std::vector<std::complex<double>> y(static_cast<std::size_t>(nv));
    for (int n = 0; n < nv; ++n) {
        std::complex<double> acc{};
        for (int k = 0; k < nc; ++k)
            acc += raw[static_cast<std::size_t>(n + k)] *
                   std::conj(replica[static_cast<std::size_t>(k)]);
        y[static_cast<std::size_t>(n)] = acc;
    }

    // demodulate to baseband
    const double wc = 2.0 * std::numbers::pi * spec.f_center_hz / spec.fs_hz;
    for (int n = 0; n < nv; ++n)
        y[static_cast<std::size_t>(n)] *= std::polar(1.0, -wc * n);

    // low-pass at bandwidth/2 (transition scaled to the bandwidth)
    const int half_len = std::max(8, static_cast<int>(std::lround(2.0 * spec.fs_hz / spec.bandwidth_hz)));
    const auto h = detail::lowpass_taps(0.5 * spec.bandwidth_hz, spec.fs_hz, half_len);
    const int nh = static_cast<int>(h.size());
    std::vector<std::complex<double>> z(static_cast<std::size_t>(nv));
    for (int n = 0; n < nv; ++n) {
        std::complex<double> acc{};
        const int k0 = std::max(0, n + half_len - nv + 1);
        const int k1 = std::min(nh, n + half_len + 1);
        for (int k = k0; k < k1; ++k)
            acc += h[static_cast<std::size_t>(k)] * y[static_cast<std::size_t>(n + half_len - k)];
        z[static_cast<std::size_t>(n)] = acc;
    }

    // decimate
    Track out;
    out.time.dt = spec.decimation / spec.fs_hz;
    out.time.t0 = 0.0;
    out.time.m = (nv + spec.decimation - 1) / spec.decimation;
    out.samples.resize(static_cast<std::size_t>(out.time.m));
    for (int i = 0; i < out.time.m; ++i)
        out.samples[static_cast<std::size_t>(i)] =
            z[static_cast<std::size_t>(i * spec.decimation)];
    return out;
}

} // namespace sasnav
