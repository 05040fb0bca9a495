#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "sasnav/errors.hpp"
#include "sasnav/geometry.hpp"
#include "sasnav/rng.hpp"

namespace sasnav {

/// Placement of a regular 2-D grid on the slant plane. `origin` is the center
/// of cell (0,0); x is the fast (innermost) index.
struct GridFrame {
    Vec2 origin{0.0, 0.0};
    double dx = 0.0;
    double dy = 0.0;
    int nx = 0;
    int ny = 0;

    std::size_t cell_count() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    }
    std::size_t index(int ix, int iy) const {
        return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) +
               static_cast<std::size_t>(ix);
    }
    Vec2 cell_center(int ix, int iy) const {
        return {origin.x + ix * dx, origin.y + iy * dy};
    }

    void validate() const {
        if (dx <= 0 || dy <= 0) throw ConfigError("GridFrame: spacing must be positive");
        if (nx < 1 || ny < 1) throw ConfigError("GridFrame: need at least one cell");
    }

    friend bool operator==(const GridFrame& a, const GridFrame& b) {
        return a.origin.x == b.origin.x && a.origin.y == b.origin.y && a.dx == b.dx &&
               a.dy == b.dy && a.nx == b.nx && a.ny == b.ny;
    }
};

/// Complex scene reflectivity sampled on a regular grid, row-major, x fastest.
struct ReflectivityGrid {
    GridFrame frame;
    std::vector<std::complex<double>> values;

    ReflectivityGrid() = default;
    explicit ReflectivityGrid(const GridFrame& f) : frame(f), values(f.cell_count()) {}

    std::complex<double>& at(int ix, int iy) { return values[frame.index(ix, iy)]; }
    const std::complex<double>& at(int ix, int iy) const { return values[frame.index(ix, iy)]; }

    void validate() const {
        frame.validate();
        if (values.size() != frame.cell_count())
            throw ShapeMismatch("ReflectivityGrid: value count does not match frame");
    }
};

inline double norm2(const ReflectivityGrid& g) {
    double s = 0.0;
    for (const auto& v : g.values) s += std::norm(v);
    return std::sqrt(s);
}

/// Zero-filled grid with explicit spacing, covering `extent` centered on `center`.
inline ReflectivityGrid make_grid_with_spacing(Vec2 extent, Vec2 center, double dx, double dy) {
    if (extent.x <= 0 || extent.y <= 0) throw EmptyExtent("make_grid: extent must be positive");
    if (dx <= 0 || dy <= 0) throw ConfigError("make_grid: spacing must be positive");
    GridFrame f;
    f.dx = dx;
    f.dy = dy;
    f.nx = std::max(1, static_cast<int>(std::lround(extent.x / dx)));
    f.ny = std::max(1, static_cast<int>(std::lround(extent.y / dy)));
    f.origin = {center.x - 0.5 * (f.nx - 1) * dx, center.y - 0.5 * (f.ny - 1) * dy};
    return ReflectivityGrid(f);
}

/// Zero-filled grid whose spacing matches the system bandwidth, c/(2B).
inline ReflectivityGrid make_grid(const SystemConfig& cfg, Vec2 extent, Vec2 center) {
    const double d = cfg.range_resolution_m();
    return make_grid_with_spacing(extent, center, d, d);
}

/// Sinusoidal amplitude modulation of a complex-noise background.
struct RippleSpec {
    double wavelength_m = 0.5;   // ripple spatial period
    double direction_rad = 0.3;  // ripple propagation direction in the grid plane
    double depth = 0.6;          // modulation depth m in (1 + m cos)
    double noise_sigma = 1.0;    // background CN std dev
};

struct PhantomSpec {
    Vec2 center{0.0, 0.0};
    double diameter_m = 0.40;
    double contrast_db = 20.0; // mean magnitude over the background mean
};

/// Synthetic scene: seeded complex noise amplitude-modulated by a ripple
/// pattern, plus a circular phantom of elevated magnitude and uniformly random
/// phase. Deterministic for a fixed seed.
inline ReflectivityGrid synth_scene(const ReflectivityGrid& grid, const RippleSpec& ripple,
                                    const PhantomSpec& phantom, std::uint64_t seed) {
    grid.frame.validate();
    const GridFrame& f = grid.frame;
    const double r = 0.5 * phantom.diameter_m;
    {
        const double x0 = f.origin.x, x1 = f.origin.x + (f.nx - 1) * f.dx;
        const double y0 = f.origin.y, y1 = f.origin.y + (f.ny - 1) * f.dy;
        if (phantom.center.x - r < x0 - 0.5 * f.dx || phantom.center.x + r > x1 + 0.5 * f.dx ||
            phantom.center.y - r < y0 - 0.5 * f.dy || phantom.center.y + r > y1 + 0.5 * f.dy)
            throw PhantomOutOfBounds("synth_scene: phantom circle leaves the grid");
    }

    ReflectivityGrid out = grid;
    Rng rng(seed);
    const double ux = std::cos(ripple.direction_rad);
    const double uy = std::sin(ripple.direction_rad);
    // E|CN(0,s^2)| = s*sqrt(pi)/2
    const double bg_mean_mag = ripple.noise_sigma * std::sqrt(std::numbers::pi) / 2.0;
    const double phantom_mag = bg_mean_mag * std::pow(10.0, phantom.contrast_db / 20.0);

    for (int iy = 0; iy < f.ny; ++iy) {
        for (int ix = 0; ix < f.nx; ++ix) {
            const Vec2 z = f.cell_center(ix, iy);
            const double u = ux * z.x + uy * z.y;
            const double mod =
                1.0 + ripple.depth * std::cos(2.0 * std::numbers::pi * u / ripple.wavelength_m);
            out.at(ix, iy) = mod * ripple.noise_sigma * rng.complex_normal();
            if (distance(z, phantom.center) <= r) {
                const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
                out.at(ix, iy) = std::polar(phantom_mag, phase);
            }
        }
    }
    return out;
}

} // namespace sasnav
