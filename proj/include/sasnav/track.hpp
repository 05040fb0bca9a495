#pragma once

#include <complex>
#include <vector>

#include "sasnav/errors.hpp"

namespace sasnav {

/// Uniform sampling of the round-trip delay axis.
struct TimeGrid {
    double t0 = 0.0;
    double dt = 1.0;
    int m = 0;

    double time_at(int i) const { return t0 + i * dt; }
    double t_end() const { return t0 + (m - 1) * dt; }

    void validate() const {
        if (dt <= 0) throw ConfigError("TimeGrid: dt must be positive");
        if (m < 1) throw ConfigError("TimeGrid: need at least one sample");
    }

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
        return a.t0 == b.t0 && a.dt == b.dt && a.m == b.m;
    }
};

/// One receiver's complex baseband samples.
struct Track {
    TimeGrid time;
    std::vector<std::complex<double>> samples;

    Track() = default;
    explicit Track(const TimeGrid& tg) : time(tg), samples(static_cast<std::size_t>(tg.m)) {}

    void validate() const {
        time.validate();
        if (samples.size() != static_cast<std::size_t>(time.m))
            throw ShapeMismatch("Track: sample count does not match time grid");
    }
};

} // namespace sasnav
