#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sasnav/errors.hpp"
#include "sasnav/geometry.hpp"
#include "sasnav/micronav.hpp"
#include "sasnav/scene.hpp"

namespace sasnav {

/// Scene generation parameters of a simulation run.
struct SceneSpec {
    double extent_x_m = 5.4;
    double extent_y_m = 2.0;
    double center_x_m = 1.5; // scene center along-track; y center is midrange
    RippleSpec ripple;
    PhantomSpec phantom{{1.5, 10.0}, 0.40, 20.0};
    std::uint64_t seed = 1;
};

/// Nominal trajectory plus the per-ping perturbations applied to it.
struct TrajectorySpec {
    int n_pings = 16;
    double advance_m = 0.20;
    std::uint64_t perturb_seed = 0;
    double sigma_surge_m = 0.0;
    double sigma_sway_m = 0.0;
    double sigma_yaw_rad = 0.0;
    double sigma_tx_yaw_rad = 0.0;      // extra Tx-vs-array yaw in the true geometry
    double perturb_clip_sigmas = 2.5;   // clip random draws to this many sigmas
    /// When non-empty, overrides the random draws (one pose per ping).
    std::vector<Pose> explicit_perturbations;
};

/// Solver knobs shared by the CLI commands.
struct SolverSpec {
    EstimateOpts estimate;
    double scan_margin_m = 0.30; // extra geometry travel covered by the time window
};

struct RunConfig {
    SystemConfig system;
    SceneSpec scene;
    TrajectorySpec trajectory;
    SolverSpec solver;

    void validate() const {
        system.validate();
        if (scene.extent_x_m <= 0 || scene.extent_y_m <= 0)
            throw ConfigError("RunConfig: scene extent must be positive");
        if (trajectory.n_pings < 1) throw ConfigError("RunConfig: need at least one ping");
        if (trajectory.advance_m < 0) throw ConfigError("RunConfig: advance must be >= 0");
        if (!trajectory.explicit_perturbations.empty() &&
            trajectory.explicit_perturbations.size() !=
                static_cast<std::size_t>(trajectory.n_pings))
            throw ConfigError("RunConfig: explicit perturbation count must equal ping count");
        if (solver.estimate.trunc.inner < 1 || solver.estimate.trunc.outer < 1)
            throw ConfigError("RunConfig: truncations must be >= 1");
    }
};

namespace detail {

inline nlohmann::json pose_to_json(const Pose& p) { return {p.x, p.y, p.theta}; }

inline Pose pose_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("pose must be [x, y, theta]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

} // namespace detail

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["system"] = {{"f0_hz", c.system.f0_hz},
                   {"bandwidth_hz", c.system.bandwidth_hz},
                   {"sound_speed_mps", c.system.sound_speed_mps},
                   {"d_tx_m", c.system.d_tx_m},
                   {"d_rx_m", c.system.d_rx_m},
                   {"n_rx", c.system.n_rx},
                   {"rx_spacing_m", c.system.rx_spacing_m},
                   {"tx_offset_pose", detail::pose_to_json(c.system.tx_offset)},
                   {"expected_overlap_k", c.system.expected_overlap_k},
                   {"midrange_m", c.system.midrange_m},
                   {"range_window_m", c.system.range_window_m}};
    j["scene"] = {{"extent_x_m", c.scene.extent_x_m},
                  {"extent_y_m", c.scene.extent_y_m},
                  {"center_x_m", c.scene.center_x_m},
                  {"ripple_wavelength_m", c.scene.ripple.wavelength_m},
                  {"ripple_direction_rad", c.scene.ripple.direction_rad},
                  {"ripple_depth", c.scene.ripple.depth},
                  {"ripple_noise_sigma", c.scene.ripple.noise_sigma},
                  {"phantom_center_m", nlohmann::json{c.scene.phantom.center.x,
                                                      c.scene.phantom.center.y}},
                  {"phantom_diameter_m", c.scene.phantom.diameter_m},
                  {"phantom_contrast_db", c.scene.phantom.contrast_db},
                  {"seed", c.scene.seed}};
    nlohmann::json tj = {{"n_pings", c.trajectory.n_pings},
                         {"advance_m", c.trajectory.advance_m},
                         {"perturb_seed", c.trajectory.perturb_seed},
                         {"sigma_surge_m", c.trajectory.sigma_surge_m},
                         {"sigma_sway_m", c.trajectory.sigma_sway_m},
                         {"sigma_yaw_rad", c.trajectory.sigma_yaw_rad},
                         {"sigma_tx_yaw_rad", c.trajectory.sigma_tx_yaw_rad},
                         {"perturb_clip_sigmas", c.trajectory.perturb_clip_sigmas}};
    if (!c.trajectory.explicit_perturbations.empty()) {
        nlohmann::json arr = nlohmann::json::array();
        for (const Pose& p : c.trajectory.explicit_perturbations)
            arr.push_back(detail::pose_to_json(p));
        tj["explicit_perturbations"] = arr;
    }
    j["trajectory"] = tj;
    j["solver"] = {{"inner_iterations", c.solver.estimate.trunc.inner},
                   {"outer_iterations", c.solver.estimate.trunc.outer},
                   {"window_x_m", c.solver.estimate.window_x_m},
                   {"window_y_m", c.solver.estimate.window_y_m},
                   {"max_evals_per_stage", c.solver.estimate.max_evals_per_stage},
                   {"restart_on_plateau", c.solver.estimate.restart_on_plateau},
                   {"plateau_threshold", c.solver.estimate.plateau_threshold},
                   {"scan_margin_m", c.solver.scan_margin_m}};
    return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        if (j.contains("system")) {
            const auto& s = j.at("system");
            s.at("f0_hz").get_to(c.system.f0_hz);
            s.at("bandwidth_hz").get_to(c.system.bandwidth_hz);
            if (s.contains("sound_speed_mps")) s.at("sound_speed_mps").get_to(c.system.sound_speed_mps);
            if (s.contains("d_tx_m")) s.at("d_tx_m").get_to(c.system.d_tx_m);
            if (s.contains("d_rx_m")) s.at("d_rx_m").get_to(c.system.d_rx_m);
            if (s.contains("n_rx")) s.at("n_rx").get_to(c.system.n_rx);
            if (s.contains("rx_spacing_m")) s.at("rx_spacing_m").get_to(c.system.rx_spacing_m);
            if (s.contains("tx_offset_pose"))
                c.system.tx_offset = detail::pose_from_json(s.at("tx_offset_pose"));
            if (s.contains("expected_overlap_k"))
                s.at("expected_overlap_k").get_to(c.system.expected_overlap_k);
            if (s.contains("midrange_m")) s.at("midrange_m").get_to(c.system.midrange_m);
            if (s.contains("range_window_m")) s.at("range_window_m").get_to(c.system.range_window_m);
        }
        if (j.contains("scene")) {
            const auto& s = j.at("scene");
            if (s.contains("extent_x_m")) s.at("extent_x_m").get_to(c.scene.extent_x_m);
            if (s.contains("extent_y_m")) s.at("extent_y_m").get_to(c.scene.extent_y_m);
            if (s.contains("center_x_m")) s.at("center_x_m").get_to(c.scene.center_x_m);
            if (s.contains("ripple_wavelength_m"))
                s.at("ripple_wavelength_m").get_to(c.scene.ripple.wavelength_m);
            if (s.contains("ripple_direction_rad"))
                s.at("ripple_direction_rad").get_to(c.scene.ripple.direction_rad);
            if (s.contains("ripple_depth")) s.at("ripple_depth").get_to(c.scene.ripple.depth);
            if (s.contains("ripple_noise_sigma"))
                s.at("ripple_noise_sigma").get_to(c.scene.ripple.noise_sigma);
            if (s.contains("phantom_center_m")) {
                const auto& p = s.at("phantom_center_m");
                c.scene.phantom.center = {p.at(0).get<double>(), p.at(1).get<double>()};
            }
            if (s.contains("phantom_diameter_m"))
                s.at("phantom_diameter_m").get_to(c.scene.phantom.diameter_m);
            if (s.contains("phantom_contrast_db"))
                s.at("phantom_contrast_db").get_to(c.scene.phantom.contrast_db);
            if (s.contains("seed")) s.at("seed").get_to(c.scene.seed);
        }
        if (j.contains("trajectory")) {
            const auto& t = j.at("trajectory");
            if (t.contains("n_pings")) t.at("n_pings").get_to(c.trajectory.n_pings);
            if (t.contains("advance_m")) t.at("advance_m").get_to(c.trajectory.advance_m);
            if (t.contains("perturb_seed")) t.at("perturb_seed").get_to(c.trajectory.perturb_seed);
            if (t.contains("sigma_surge_m")) t.at("sigma_surge_m").get_to(c.trajectory.sigma_surge_m);
            if (t.contains("sigma_sway_m")) t.at("sigma_sway_m").get_to(c.trajectory.sigma_sway_m);
            if (t.contains("sigma_yaw_rad")) t.at("sigma_yaw_rad").get_to(c.trajectory.sigma_yaw_rad);
            if (t.contains("sigma_tx_yaw_rad"))
                t.at("sigma_tx_yaw_rad").get_to(c.trajectory.sigma_tx_yaw_rad);
            if (t.contains("perturb_clip_sigmas"))
                t.at("perturb_clip_sigmas").get_to(c.trajectory.perturb_clip_sigmas);
            if (t.contains("explicit_perturbations"))
                for (const auto& p : t.at("explicit_perturbations"))
                    c.trajectory.explicit_perturbations.push_back(detail::pose_from_json(p));
        }
        if (j.contains("solver")) {
            const auto& s = j.at("solver");
            if (s.contains("inner_iterations"))
                s.at("inner_iterations").get_to(c.solver.estimate.trunc.inner);
            if (s.contains("outer_iterations"))
                s.at("outer_iterations").get_to(c.solver.estimate.trunc.outer);
            if (s.contains("window_x_m")) s.at("window_x_m").get_to(c.solver.estimate.window_x_m);
            if (s.contains("window_y_m")) s.at("window_y_m").get_to(c.solver.estimate.window_y_m);
            if (s.contains("max_evals_per_stage"))
                s.at("max_evals_per_stage").get_to(c.solver.estimate.max_evals_per_stage);
            if (s.contains("restart_on_plateau"))
                s.at("restart_on_plateau").get_to(c.solver.estimate.restart_on_plateau);
            if (s.contains("plateau_threshold"))
                s.at("plateau_threshold").get_to(c.solver.estimate.plateau_threshold);
            if (s.contains("scan_margin_m")) s.at("scan_margin_m").get_to(c.solver.scan_margin_m);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    c.validate();
    return c;
}

inline void save_config(const std::filesystem::path& path, const RunConfig& c) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << to_json(c).dump(2) << '\n';
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return run_config_from_json(j);
}

} // namespace sasnav
