#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "sasnav/config.hpp"
#include "sasnav/errors.hpp"
#include "sasnav/imaging.hpp"
#include "sasnav/io.hpp"
#include "sasnav/micronav.hpp"
#include "sasnav/ping.hpp"
#include "sasnav/rng.hpp"
#include "sasnav/scene.hpp"

namespace sasnav {

/// A simulated run held in memory: the scene, the per-ping records with their
/// nominal operators, and the true perturbations used to generate the raw data.
struct Dataset {
    RunConfig config;
    ReflectivityGrid scene;
    std::vector<PingRecord> pings;
    std::vector<Pose> true_perturbations; // deviation of each ping's PCA from nominal
    std::vector<double> tx_extra_yaw;     // extra true Tx yaw per ping

    Pose nominal_pca(int ping) const {
        return {ping * config.trajectory.advance_m, 0.0, 0.0};
    }
    Pose true_pca(int ping) const {
        const Pose& d = true_perturbations[static_cast<std::size_t>(ping)];
        const Pose n = nominal_pca(ping);
        return {n.x + d.x, n.y + d.y, d.theta};
    }
};

namespace detail {

inline std::vector<Pose> draw_perturbations(const TrajectorySpec& t) {
    if (!t.explicit_perturbations.empty()) return t.explicit_perturbations;
    std::vector<Pose> out(static_cast<std::size_t>(t.n_pings));
    Rng rng(t.perturb_seed);
    const auto clipped = [&](double sigma) {
        if (sigma <= 0.0) return 0.0;
        double v = rng.normal() * sigma;
        const double lim = t.perturb_clip_sigmas * sigma;
        return std::clamp(v, -lim, lim);
    };
    for (auto& p : out) {
        const double sx = clipped(t.sigma_surge_m);
        const double sy = clipped(t.sigma_sway_m);
        const double st = clipped(t.sigma_yaw_rad);
        p = Pose{sx, sy, st};
    }
    return out;
}

} // namespace detail

/// Time window covering the delays of every scene cell from every ping's true
/// geometry, padded by the kernel support and a travel margin for hypothesis
/// scans.
inline TimeGrid make_time_grid(const SystemConfig& cfg, const GridFrame& scene,
                               const std::vector<PingGeometry>& geometries,
                               double travel_margin_m) {
    double tau_min = std::numeric_limits<double>::max();
    double tau_max = 0.0;
    for (const PingGeometry& g : geometries) {
        for (const Pose& rx : g.rx_centers) {
            for (int iy = 0; iy < scene.ny; ++iy) {
                for (int ix = 0; ix < scene.nx; ++ix) {
                    const Vec2 z = scene.cell_center(ix, iy);
                    const double tau = propagation_delay(g.tx, rx, z, cfg.sound_speed_mps);
                    tau_min = std::min(tau_min, tau);
                    tau_max = std::max(tau_max, tau);
                }
            }
        }
    }
    const double dt = 1.0 / (2.0 * cfg.bandwidth_hz);
    const double margin =
        (InterpKernel::half_width + 2) * dt + 2.0 * travel_margin_m / cfg.sound_speed_mps;
    TimeGrid tg;
    tg.dt = dt;
    tg.t0 = tau_min - margin;
    tg.m = static_cast<int>(std::ceil((tau_max + margin - tg.t0) / dt)) + 1;
    return tg;
}

/// Generate a full simulated dataset: synthetic scene, true perturbed
/// trajectory, and raw tracks observed through the true bistatic geometry.
/// The stored ping operators carry the nominal (unperturbed) geometry — what
/// an estimator is allowed to know.
inline Dataset simulate(const RunConfig& config) {
    config.validate();
    Dataset ds;
    ds.config = config;

    const SystemConfig& cfg = config.system;
    ReflectivityGrid empty = make_grid(
        cfg, {config.scene.extent_x_m, config.scene.extent_y_m},
        {config.scene.center_x_m, cfg.midrange_m});
    ds.scene = synth_scene(empty, config.scene.ripple, config.scene.phantom, config.scene.seed);

    ds.true_perturbations = detail::draw_perturbations(config.trajectory);
    ds.tx_extra_yaw.assign(static_cast<std::size_t>(config.trajectory.n_pings), 0.0);
    if (config.trajectory.sigma_tx_yaw_rad > 0.0) {
        Rng rng(config.trajectory.perturb_seed + 0x9e37ULL);
        for (auto& v : ds.tx_extra_yaw) v = rng.normal() * config.trajectory.sigma_tx_yaw_rad;
    }

    std::vector<PingGeometry> true_geoms;
    true_geoms.reserve(static_cast<std::size_t>(config.trajectory.n_pings));
    for (int j = 0; j < config.trajectory.n_pings; ++j)
        true_geoms.push_back(make_true_ping_geometry(cfg, ds.true_pca(j),
                                                     ds.tx_extra_yaw[static_cast<std::size_t>(j)]));

    const TimeGrid time =
        make_time_grid(cfg, ds.scene.frame, true_geoms, config.solver.scan_margin_m);

    ds.pings.reserve(true_geoms.size());
    for (int j = 0; j < config.trajectory.n_pings; ++j) {
        PingOperator true_op;
        true_op.geometry = true_geoms[static_cast<std::size_t>(j)];
        true_op.grid = ds.scene.frame;
        true_op.time = time;
        true_op.cfg = cfg;
        PreparedPingOperator prep(true_op);
        CVector data(true_op.data_size());
        prep.apply(ds.scene.values, data);

        PingRecord rec;
        rec.op.geometry = make_ping_geometry(cfg, ds.nominal_pca(j));
        rec.op.grid = ds.scene.frame;
        rec.op.time = time;
        rec.op.cfg = cfg;
        rec.tracks = unstack_tracks(data, time, cfg.n_rx);
        ds.pings.push_back(std::move(rec));
    }
    return ds;
}

inline void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
    std::filesystem::create_directories(dir / "pings");
    save_config(dir / "config.json", ds.config);
    write_grid(dir / "scene.sasg", ds.scene);
    {
        std::ofstream os(dir / "truth.csv");
        if (!os) throw IoError("cannot write truth.csv");
        os << "ping,nominal_x,dx,dy,dtheta,tx_extra_yaw\n";
        os.precision(17);
        for (std::size_t j = 0; j < ds.pings.size(); ++j) {
            const Pose& p = ds.true_perturbations[j];
            os << j << ',' << ds.nominal_pca(static_cast<int>(j)).x << ',' << p.x << ',' << p.y
               << ',' << p.theta << ',' << ds.tx_extra_yaw[j] << '\n';
        }
    }
    char name[32];
    for (std::size_t j = 0; j < ds.pings.size(); ++j) {
        std::snprintf(name, sizeof(name), "ping_%04zu.sasp", j);
        write_ping(dir / "pings" / name, ds.pings[j]);
    }
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
    Dataset ds;
    ds.config = load_config(dir / "config.json");
    ds.scene = read_grid(dir / "scene.sasg");
    const int n = ds.config.trajectory.n_pings;
    char name[32];
    for (int j = 0; j < n; ++j) {
        std::snprintf(name, sizeof(name), "ping_%04d.sasp", j);
        PingRecord rec = read_ping(dir / "pings" / name);
        rec.op.grid = ds.scene.frame;
        rec.op.cfg = ds.config.system;
        if (rec.tracks.empty()) throw IoError("ping file has no tracks");
        rec.op.time = rec.tracks.front().time;
        rec.validate();
        ds.pings.push_back(std::move(rec));
    }
    ds.true_perturbations.assign(static_cast<std::size_t>(n), Pose{});
    ds.tx_extra_yaw.assign(static_cast<std::size_t>(n), 0.0);
    std::ifstream is(dir / "truth.csv");
    if (is) {
        std::string line;
        std::getline(is, line); // header
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::size_t j = 0;
            double nx = 0, dx = 0, dy = 0, dth = 0, ty = 0;
            if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf,%lf,%lf", &j, &nx, &dx, &dy, &dth,
                            &ty) >= 5 &&
                j < static_cast<std::size_t>(n)) {
                ds.true_perturbations[j] = Pose{dx, dy, dth};
                ds.tx_extra_yaw[j] = ty;
            }
        }
    }
    return ds;
}

/// Backprojection of all pings with per-ping pose deviations applied
/// (composition about each ping's own nominal phase center).
inline ReflectivityGrid form_image(const Dataset& ds, const std::vector<Pose>& deviations,
                                   const GridFrame& frame) {
    if (deviations.size() != ds.pings.size())
        throw ShapeMismatch("form_image: need one deviation per ping");
    ReflectivityGrid image(frame);
    for (std::size_t j = 0; j < ds.pings.size(); ++j) {
        const Pose nom = ds.nominal_pca(static_cast<int>(j));
        const Pose& d = deviations[j];
        PingOperator op = ds.pings[j].op;
        op.grid = frame;
        op.geometry = make_true_ping_geometry(
            ds.config.system, Pose{nom.x + d.x, nom.y + d.y, d.theta}, 0.0);
        PreparedPingOperator prep(op);
        const CVector data = stack_tracks(ds.pings[j].tracks);
        CVector cell_sum(frame.cell_count());
        prep.apply_adjoint(data, cell_sum);
        for (std::size_t i = 0; i < cell_sum.size(); ++i) image.values[i] += cell_sum[i];
    }
    return image;
}

/// Peak-to-background contrast (dB) of the phantom disc against an annulus
/// around it.
inline double phantom_contrast_db(const ReflectivityGrid& image, Vec2 center, double radius_m,
                                  double annulus_inner_m, double annulus_outer_m) {
    double peak = 0.0;
    double bg_sum = 0.0;
    std::size_t bg_count = 0;
    for (int iy = 0; iy < image.frame.ny; ++iy) {
        for (int ix = 0; ix < image.frame.nx; ++ix) {
            const double r = distance(image.frame.cell_center(ix, iy), center);
            const double mag = std::abs(image.at(ix, iy));
            if (r <= radius_m) {
                peak = std::max(peak, mag);
            } else if (r >= annulus_inner_m && r <= annulus_outer_m) {
                bg_sum += mag;
                ++bg_count;
            }
        }
    }
    if (bg_count == 0 || bg_sum == 0.0 || peak == 0.0)
        throw NumericalError("phantom_contrast_db: empty peak or background region");
    return 20.0 * std::log10(peak / (bg_sum / static_cast<double>(bg_count)));
}

} // namespace sasnav
