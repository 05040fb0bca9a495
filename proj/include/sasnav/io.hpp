#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sasnav/errors.hpp"
#include "sasnav/imaging.hpp"
#include "sasnav/scene.hpp"
#include "sasnav/track.hpp"

namespace sasnav {

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian; byte swapping is not implemented");

namespace detail {

template <class T>
void write_raw(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_raw(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw IoError("unexpected end of file");
    return v;
}

inline void write_pose(std::ostream& os, const Pose& p) {
    write_raw(os, p.x);
    write_raw(os, p.y);
    write_raw(os, p.theta);
}

inline Pose read_pose(std::istream& is) {
    const double x = read_raw<double>(is);
    const double y = read_raw<double>(is);
    const double t = read_raw<double>(is);
    return {x, y, t};
}

} // namespace detail

inline constexpr std::uint32_t kGridFormatVersion = 1;
inline constexpr std::uint32_t kPingFormatVersion = 1;

/// SASG grid file: magic, version, nx, ny, origin, spacing, then interleaved
/// (re, im) doubles row-major with x fastest.
inline void write_grid(const std::filesystem::path& path, const ReflectivityGrid& g) {
    g.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os.write("SASG", 4);
    detail::write_raw(os, kGridFormatVersion);
    detail::write_raw(os, static_cast<std::uint32_t>(g.frame.nx));
    detail::write_raw(os, static_cast<std::uint32_t>(g.frame.ny));
    detail::write_raw(os, g.frame.origin.x);
    detail::write_raw(os, g.frame.origin.y);
    detail::write_raw(os, g.frame.dx);
    detail::write_raw(os, g.frame.dy);
    for (const auto& v : g.values) {
        detail::write_raw(os, v.real());
        detail::write_raw(os, v.imag());
    }
    if (!os) throw IoError("write failed: " + path.string());
}

inline ReflectivityGrid read_grid(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "SASG") throw IoError("not a SASG file: " + path.string());
    const auto version = detail::read_raw<std::uint32_t>(is);
    if (version != kGridFormatVersion) throw IoError("unsupported SASG version");
    GridFrame f;
    f.nx = static_cast<int>(detail::read_raw<std::uint32_t>(is));
    f.ny = static_cast<int>(detail::read_raw<std::uint32_t>(is));
    f.origin.x = detail::read_raw<double>(is);
    f.origin.y = detail::read_raw<double>(is);
    f.dx = detail::read_raw<double>(is);
    f.dy = detail::read_raw<double>(is);
    ReflectivityGrid g(f);
    for (auto& v : g.values) {
        const double re = detail::read_raw<double>(is);
        const double im = detail::read_raw<double>(is);
        v = {re, im};
    }
    g.validate();
    return g;
}

/// SASP ping file: magic, version, track count, geometry block (array
/// midpoint, Tx, then the receiver poses), then per-track time grid and
/// interleaved complex samples.
inline void write_ping(const std::filesystem::path& path, const PingRecord& rec) {
    rec.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os.write("SASP", 4);
    detail::write_raw(os, kPingFormatVersion);
    detail::write_raw(os, static_cast<std::uint32_t>(rec.tracks.size()));
    detail::write_pose(os, rec.op.geometry.array_mid);
    detail::write_pose(os, rec.op.geometry.tx);
    for (const Pose& p : rec.op.geometry.rx_centers) detail::write_pose(os, p);
    for (const Track& t : rec.tracks) {
        detail::write_raw(os, t.time.t0);
        detail::write_raw(os, t.time.dt);
        detail::write_raw(os, static_cast<std::uint32_t>(t.time.m));
        for (const auto& v : t.samples) {
            detail::write_raw(os, v.real());
            detail::write_raw(os, v.imag());
        }
    }
    if (!os) throw IoError("write failed: " + path.string());
}

/// Reads geometry and tracks; grid/time/config of the returned record's
/// operator descriptor are filled by the caller (the dataset knows them).
inline PingRecord read_ping(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "SASP") throw IoError("not a SASP file: " + path.string());
    const auto version = detail::read_raw<std::uint32_t>(is);
    if (version != kPingFormatVersion) throw IoError("unsupported SASP version");
    const auto n = detail::read_raw<std::uint32_t>(is);
    PingRecord rec;
    rec.op.geometry.array_mid = detail::read_pose(is);
    rec.op.geometry.tx = detail::read_pose(is);
    rec.op.geometry.rx_centers.resize(n);
    for (auto& p : rec.op.geometry.rx_centers) p = detail::read_pose(is);
    rec.tracks.resize(n);
    for (auto& t : rec.tracks) {
        t.time.t0 = detail::read_raw<double>(is);
        t.time.dt = detail::read_raw<double>(is);
        t.time.m = static_cast<int>(detail::read_raw<std::uint32_t>(is));
        t.samples.resize(static_cast<std::size_t>(t.time.m));
        for (auto& v : t.samples) {
            const double re = detail::read_raw<double>(is);
            const double im = detail::read_raw<double>(is);
            v = {re, im};
        }
    }
    return rec;
}

/// CSV export of a grid as (x, y, re, im) rows.
inline void write_grid_csv(const std::filesystem::path& path, const ReflectivityGrid& g) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << "x,y,re,im\n";
    os.precision(17);
    for (int iy = 0; iy < g.frame.ny; ++iy)
        for (int ix = 0; ix < g.frame.nx; ++ix) {
            const Vec2 z = g.frame.cell_center(ix, iy);
            const auto& v = g.at(ix, iy);
            os << z.x << ',' << z.y << ',' << v.real() << ',' << v.imag() << '\n';
        }
}

/// CSV export of one track as (t, re, im) rows.
inline void write_track_csv(const std::filesystem::path& path, const Track& t) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << "t,re,im\n";
    os.precision(17);
    for (int i = 0; i < t.time.m; ++i) {
        const auto& v = t.samples[static_cast<std::size_t>(i)];
        os << t.time.time_at(i) << ',' << v.real() << ',' << v.imag() << '\n';
    }
}

/// 16-bit PGM of the grid magnitude; linear, or dB with the given floor.
inline void write_pgm(const std::filesystem::path& path, const ReflectivityGrid& g,
                      bool db_scale = true, double db_floor = -40.0) {
    g.validate();
    double peak = 0.0;
    for (const auto& v : g.values) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) peak = 1.0;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << "P5\n" << g.frame.nx << ' ' << g.frame.ny << "\n65535\n";
    for (int iy = g.frame.ny - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < g.frame.nx; ++ix) {
            const double mag = std::abs(g.at(ix, iy)) / peak;
            double u;
            if (db_scale) {
                const double db = 20.0 * std::log10(std::max(mag, 1e-30));
                u = (db - db_floor) / (0.0 - db_floor);
            } else {
                u = mag;
            }
            const auto q = static_cast<std::uint16_t>(
                std::lround(65535.0 * std::clamp(u, 0.0, 1.0)));
            const unsigned char hi = static_cast<unsigned char>(q >> 8);
            const unsigned char lo = static_cast<unsigned char>(q & 0xff);
            os.put(static_cast<char>(hi));
            os.put(static_cast<char>(lo));
        }
    }
    if (!os) throw IoError("write failed: " + path.string());
}

} // namespace sasnav
