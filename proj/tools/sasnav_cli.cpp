// Command-line front end: simulate datasets, estimate displacements and
// trajectories, scan the error functions, and form backprojection images.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sasnav/sasnav.hpp"

namespace fs = std::filesystem;
using namespace sasnav;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

void write_trajectory_csv(const fs::path& path, const TrajectoryEstimate& t) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    os << "ping,x,y,theta,dx,dy,dtheta\n";
    os.precision(17);
    for (std::size_t i = 0; i < t.poses.size(); ++i) {
        const Pose& p = t.poses[i];
        Pose d{};
        if (i > 0) d = t.differentials[i - 1];
        os << i << ',' << p.x << ',' << p.y << ',' << p.theta << ',' << d.x << ',' << d.y << ','
           << d.theta << '\n';
    }
}

void write_trace_csv(const fs::path& path, const DisplacementEstimate& est) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    os << "stage,eval,x,y,theta,value\n";
    os.precision(17);
    for (const auto& e : est.stage_trace)
        os << e.stage << ',' << e.eval << ',' << e.sigma.x << ',' << e.sigma.y << ','
           << e.sigma.theta << ',' << e.value << '\n';
}

std::vector<Pose> load_trajectory_csv(const fs::path& path, std::size_t n_pings) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    std::vector<Pose> out(n_pings);
    std::string line;
    std::getline(is, line); // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::size_t i = 0;
        double x = 0, y = 0, th = 0;
        if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf", &i, &x, &y, &th) == 4 && i < n_pings)
            out[i] = Pose{x, y, th};
    }
    return out;
}

struct CommonArgs {
    std::string data_dir;
    std::string out_dir = ".";
    std::vector<int> truncation; // inner outer
};

EstimateOpts estimate_opts_for(const Dataset& ds, const CommonArgs& args) {
    EstimateOpts opts = ds.config.solver.estimate;
    if (args.truncation.size() == 2) {
        opts.trunc.inner = args.truncation[0];
        opts.trunc.outer = args.truncation[1];
    }
    return opts;
}

int run_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_dir, const std::string& dump_config) {
    RunConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    if (seed) config.trajectory.perturb_seed = *seed;
    if (!dump_config.empty()) {
        save_config(dump_config, config);
        std::cout << "wrote " << dump_config << "\n";
        return 0;
    }
    config.validate();
    const Dataset ds = simulate(config);
    save_dataset(out_dir, ds);
    std::cout << "simulated " << ds.pings.size() << " pings into " << out_dir << "\n";
    return 0;
}

int run_estimate(const CommonArgs& args, std::vector<int> pair, int k, int phase, int rx) {
    Dataset ds = load_dataset(args.data_dir);
    const EstimateOpts opts = estimate_opts_for(ds, args);
    fs::create_directories(args.out_dir);

    std::vector<PingRecord> pings = ds.pings;
    std::vector<int> indices(pings.size());
    for (std::size_t i = 0; i < pings.size(); ++i) indices[i] = static_cast<int>(i);
    if (rx >= 0) pings = extract_siso(pings, rx);
    if (k >= 0) {
        pings = rearrange_pings(pings, k, phase);
        const int stride = ds.config.system.n_rx - k;
        std::vector<int> sub;
        for (std::size_t i = static_cast<std::size_t>(phase); i < indices.size();
             i += static_cast<std::size_t>(stride))
            sub.push_back(indices[i]);
        indices = sub;
    }

    if (pair.size() == 2) {
        // single-pair mode; ping numbers are 1-based as in the run summaries
        const int p = pair[0] - 1, q = pair[1] - 1;
        if (p < 0 || q < 0 || p >= static_cast<int>(pings.size()) ||
            q >= static_cast<int>(pings.size()))
            throw ValidationError("estimate: pair indices out of range");
        const auto est = estimate_displacement(pings[static_cast<std::size_t>(p)],
                                               pings[static_cast<std::size_t>(q)], opts);
        write_trace_csv(fs::path(args.out_dir) / "trace.csv", est);
        std::cout << "sigma_hat = (" << est.sigma.x << ", " << est.sigma.y << ", "
                  << est.sigma.theta << ")  zeta=" << est.zeta_value
                  << " eta=" << est.eta_value << " evals=" << est.evaluations << "\n";
        const Pose truth = differential_displacement(
            ds.true_perturbations[static_cast<std::size_t>(indices[p])],
            ds.true_perturbations[static_cast<std::size_t>(indices[q])]);
        std::cout << "truth     = (" << truth.x << ", " << truth.y << ", " << truth.theta
                  << ")\n";
        return 0;
    }

    const TrajectoryEstimate traj = estimate_trajectory(pings, opts);
    write_trajectory_csv(fs::path(args.out_dir) / "trajectory.csv", traj);
    for (std::size_t i = 0; i < traj.pair_estimates.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "trace_%04zu.csv", i);
        write_trace_csv(fs::path(args.out_dir) / name, traj.pair_estimates[i]);
    }
    // summary against truth when available
    std::ofstream os(fs::path(args.out_dir) / "summary.csv");
    os << "ping,est_x,est_y,est_theta,true_x,true_y,true_theta\n";
    os.precision(17);
    const Pose anchor = ds.true_perturbations[static_cast<std::size_t>(indices[0])];
    double final_sway_err = 0.0;
    for (std::size_t i = 0; i < traj.poses.size(); ++i) {
        const Pose& e = traj.poses[i];
        const Pose& t0 = ds.true_perturbations[static_cast<std::size_t>(indices[i])];
        const Pose t{t0.x - anchor.x, t0.y - anchor.y, t0.theta - anchor.theta};
        os << indices[i] << ',' << e.x << ',' << e.y << ',' << e.theta << ',' << t.x << ','
           << t.y << ',' << t.theta << '\n';
        final_sway_err = e.y - t.y;
    }
    std::cout << "estimated " << traj.poses.size() << " poses; final sway error vs truth = "
              << final_sway_err << " m (lambda/8 = "
              << ds.config.system.wavelength_m() / 8.0 << " m)\n";
    return 0;
}

int run_scan(const CommonArgs& args, std::vector<int> pair, const std::string& axis, double lo,
             double hi, int steps, std::vector<double> base, const std::string& out_file) {
    if (steps < 1) throw RangeEmpty("scan: need at least one step");
    if (hi < lo) throw RangeEmpty("scan: empty range");
    Dataset ds = load_dataset(args.data_dir);
    const EstimateOpts opts = estimate_opts_for(ds, args);
    if (pair.size() != 2) throw ValidationError("scan: --pair P Q required");
    const int p = pair[0] - 1, q = pair[1] - 1;
    if (p < 0 || q < 0 || p >= static_cast<int>(ds.pings.size()) ||
        q >= static_cast<int>(ds.pings.size()))
        throw ValidationError("scan: pair indices out of range");

    Pose sigma0{};
    if (base.size() == 3) sigma0 = Pose{base[0], base[1], base[2]};
    const PairEvaluator ev(ds.pings[static_cast<std::size_t>(p)],
                           ds.pings[static_cast<std::size_t>(q)], opts.trunc,
                           {opts.window_x_m, opts.window_y_m});

    std::ofstream os(out_file);
    if (!os) throw IoError("cannot write " + out_file);
    os << "value,zeta,eta\n";
    os.precision(17);
    for (int i = 0; i < steps; ++i) {
        const double v = (steps == 1) ? lo : lo + (hi - lo) * i / (steps - 1);
        Pose s = sigma0;
        if (axis == "surge")
            s.x += v;
        else if (axis == "sway")
            s.y += v;
        else if (axis == "yaw")
            s.theta += v;
        else
            throw ValidationError("scan: axis must be surge, sway or yaw");
        const auto e = ev.evaluate(s);
        os << v << ',' << e.zeta << ',' << e.eta << '\n';
    }
    std::cout << "wrote " << out_file << "\n";
    return 0;
}

int run_image(const CommonArgs& args, const std::string& trajectory, const std::string& prefix,
              bool linear, double db_floor) {
    Dataset ds = load_dataset(args.data_dir);
    std::vector<Pose> deviations(ds.pings.size());
    if (trajectory == "truth") {
        const Pose anchor = ds.true_perturbations.front();
        for (std::size_t i = 0; i < deviations.size(); ++i) {
            const Pose& t = ds.true_perturbations[i];
            deviations[i] = Pose{t.x - anchor.x, t.y - anchor.y, t.theta - anchor.theta};
        }
    } else if (trajectory != "none") {
        deviations = load_trajectory_csv(trajectory, ds.pings.size());
    }
    const ReflectivityGrid img = form_image(ds, deviations, ds.scene.frame);
    write_grid(prefix + ".sasg", img);
    write_pgm(prefix + ".pgm", img, !linear, -std::abs(db_floor));
    std::cout << "wrote " << prefix << ".sasg and " << prefix << ".pgm\n";
    return 0;
}

int run_rearrange(const CommonArgs& args, int k, int phase, int rx) {
    Dataset ds = load_dataset(args.data_dir);
    Dataset out = ds;
    std::vector<int> indices;
    if (rx >= 0) out.pings = extract_siso(out.pings, rx);
    if (k >= 0) {
        out.pings = rearrange_pings(out.pings, k, phase);
        const int stride = ds.config.system.n_rx - k;
        for (std::size_t i = static_cast<std::size_t>(phase); i < ds.pings.size();
             i += static_cast<std::size_t>(stride))
            indices.push_back(static_cast<int>(i));
    } else {
        for (std::size_t i = 0; i < out.pings.size(); ++i) indices.push_back(static_cast<int>(i));
    }
    out.true_perturbations.clear();
    out.tx_extra_yaw.clear();
    for (int i : indices) {
        out.true_perturbations.push_back(ds.true_perturbations[static_cast<std::size_t>(i)]);
        out.tx_extra_yaw.push_back(ds.tx_extra_yaw[static_cast<std::size_t>(i)]);
    }
    if (rx >= 0) out.config.system.n_rx = 1;
    out.config.trajectory.n_pings = static_cast<int>(out.pings.size());
    if (k >= 0)
        out.config.trajectory.advance_m *= ds.config.system.n_rx - k;
    out.config.trajectory.explicit_perturbations = out.true_perturbations;
    save_dataset(args.out_dir, out);
    std::cout << "wrote " << out.pings.size() << " pings into " << args.out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"2-D multi-receiver SAS simulator and micronavigation estimator"};
    app.require_subcommand(1);

    CommonArgs common;

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
    std::string sim_config, sim_dump;
    std::optional<std::uint64_t> sim_seed;
    sim->add_option("--config", sim_config, "run config JSON (defaults used when omitted)");
    sim->add_option("--seed", sim_seed, "override the trajectory perturbation seed");
    sim->add_option("--out", common.out_dir, "output dataset directory")->required();
    sim->add_option("--write-default-config", sim_dump,
                    "write the effective config JSON and exit");

    // estimate
    auto* est = app.add_subcommand("estimate", "estimate displacements / trajectory");
    std::vector<int> est_pair;
    int est_k = -1, est_phase = 0, est_rx = -1;
    est->add_option("--data", common.data_dir, "dataset directory")->required();
    est->add_option("--out", common.out_dir, "output directory")->required();
    est->add_option("--pair", est_pair, "estimate a single pair (1-based ping numbers)")
        ->expected(2);
    est->add_option("--k", est_k, "rearrange to K overlapping phase centers first");
    est->add_option("--phase", est_phase, "phase of the rearrangement (0..N-K-1)");
    est->add_option("--rx", est_rx, "use a single receiver (SISO arrangement)");
    est->add_option("--truncation", common.truncation, "inner and outer truncation")
        ->expected(2);

    // scan
    auto* scan = app.add_subcommand("scan", "1-D scans of the error functions");
    std::vector<int> scan_pair;
    std::string scan_axis = "sway", scan_out = "scan.csv";
    std::vector<double> scan_range{-0.1, 0.1}, scan_base;
    int scan_steps = 41;
    scan->add_option("--data", common.data_dir, "dataset directory")->required();
    scan->add_option("--pair", scan_pair, "ping pair (1-based)")->expected(2)->required();
    scan->add_option("--axis", scan_axis, "surge, sway or yaw");
    scan->add_option("--range", scan_range, "scan interval")->expected(2);
    scan->add_option("--steps", scan_steps, "number of samples");
    scan->add_option("--base", scan_base, "base displacement (x y theta)")->expected(3);
    scan->add_option("--out", scan_out, "output CSV path");
    scan->add_option("--truncation", common.truncation, "inner and outer truncation")
        ->expected(2);

    // image
    auto* img = app.add_subcommand("image", "backprojection image of the dataset");
    std::string img_traj = "none", img_prefix = "image";
    bool img_linear = false;
    double img_floor = 40.0;
    img->add_option("--data", common.data_dir, "dataset directory")->required();
    img->add_option("--trajectory", img_traj,
                    "trajectory CSV, or 'truth' / 'none' for the recorded truth / nominal");
    img->add_option("--out", img_prefix, "output file prefix");
    img->add_flag("--linear", img_linear, "linear magnitude PGM instead of dB");
    img->add_option("--db-floor", img_floor, "dB floor of the PGM scaling");

    // rearrange
    auto* rea = app.add_subcommand("rearrange", "write a rearranged dataset");
    int rea_k = -1, rea_phase = 0, rea_rx = -1;
    rea->add_option("--data", common.data_dir, "dataset directory")->required();
    rea->add_option("--out", common.out_dir, "output dataset directory")->required();
    rea->add_option("--k", rea_k, "K overlapping phase centers");
    rea->add_option("--phase", rea_phase, "phase index (0..N-K-1)");
    rea->add_option("--rx", rea_rx, "single receiver index (SISO)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(sim_config, sim_seed, common.out_dir, sim_dump);
        if (est->parsed()) return run_estimate(common, est_pair, est_k, est_phase, est_rx);
        if (scan->parsed())
            return run_scan(common, scan_pair, scan_axis, scan_range[0], scan_range[1],
                            scan_steps, scan_base, scan_out);
        if (img->parsed()) return run_image(common, img_traj, img_prefix, img_linear, img_floor);
        if (rea->parsed()) return run_rearrange(common, rea_k, rea_phase, rea_rx);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return 0;
}
