#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sasnav/errors.hpp"
#include "sasnav/geometry.hpp"
#include "sasnav/imaging.hpp"
#include "sasnav/parallel.hpp"
#include "sasnav/ping.hpp"
#include "sasnav/scene.hpp"
#include "sasnav/solver.hpp"

namespace sasnav {

struct TruncationOpts {
    int inner = 5; // pseudoinverse CG iterations
    int outer = 5; // alternating-projection iterations
};

/// Both error functions evaluated at one hypothesis, sharing the projection
/// work: zeta compares moduli (Eq.-12 style), eta complex values (Eq.-11
/// style), both normalized by the larger projection norm.
struct PairEvaluation {
    double zeta = 0.0;
    double eta = 0.0;
    double norm_psi_p = 0.0;
    double norm_psi_q = 0.0;
};

/// Frames a ping pair for displacement estimation and evaluates the error
/// functions at displacement hypotheses. The reference ping p's operator sits
/// in p's nominal-PCA-centered frame; ping q's operator is stored in its own
/// PCA-centered frame and displaced by (nominal advance + sigma) at each
/// evaluation. All evaluations share one window grid and the recorded time
/// grid; evaluate() is const and thread-safe.
class PairEvaluator {
public:
    PairEvaluator(const PingRecord& ping_p, const PingRecord& ping_q, TruncationOpts trunc,
                  Vec2 window_extent)
        : trunc_(trunc) {
        ping_p.validate();
        ping_q.validate();
        if (!(ping_p.op.time == ping_q.op.time))
            throw ShapeMismatch("PairEvaluator: pings must share one time grid");
        if (ping_p.op.cfg.n_rx != ping_q.op.cfg.n_rx)
            throw ShapeMismatch("PairEvaluator: pings must share the array configuration");

        const Pose nom_p = ping_p.nominal_pca();
        const Pose nom_q = ping_q.nominal_pca();
        nominal_diff_ = differential_displacement(nom_p, nom_q);

        const SystemConfig& cfg = ping_p.op.cfg;
        // window centered between the two pings, at midrange, expressed in
        // p's frame; the same physical cells serve the mirrored (q,p) pair
        const Vec2 center{0.5 * nominal_diff_.x, 0.5 * nominal_diff_.y + cfg.midrange_m};
        const double d = cfg.range_resolution_m();
        const ReflectivityGrid window = make_grid_with_spacing(window_extent, center, d, d);

        op_p_ = ping_p.op;
        op_p_.geometry = translated(ping_p.op.geometry, {-nom_p.x, -nom_p.y});
        op_p_.grid = window.frame;

        op_q_base_ = ping_q.op;
        op_q_base_.geometry = translated(ping_q.op.geometry, {-nom_q.x, -nom_q.y});
        op_q_base_.grid = window.frame;

        prep_p_ = std::make_unique<PreparedPingOperator>(op_p_);
        tracks_p_ = stack_tracks(ping_p.tracks);
        tracks_q_ = stack_tracks(ping_q.tracks);
        rho_p_ = cgnr_solve(*prep_p_, tracks_p_, trunc_.inner);
        norm_rho_p_ = norm2(std::span<const std::complex<double>>(rho_p_));
    }

    const PingOperator& op_p() const { return op_p_; }
    const PingOperator& op_q_base() const { return op_q_base_; }
    const Pose& nominal_diff() const { return nominal_diff_; }
    const SystemConfig& cfg() const { return op_p_.cfg; }

    /// Along-track span of the ping's phase centers, used to size yaw lobes.
    double phase_center_span() const {
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (const Pose& rx : op_p_.geometry.rx_centers) {
            const Pose pc = phase_center(op_p_.geometry.tx, rx);
            if (first) {
                lo = hi = pc.x;
                first = false;
            } else {
                lo = std::min(lo, pc.x);
                hi = std::max(hi, pc.x);
            }
        }
        return hi - lo;
    }

    PairEvaluation evaluate(const Pose& sigma) const {
        const Pose total{nominal_diff_.x + sigma.x, nominal_diff_.y + sigma.y,
                         nominal_diff_.theta + sigma.theta};
        PingOperator op_q = op_q_base_;
        op_q.geometry = displaced(op_q_base_.geometry, total);
        PreparedPingOperator prep_q(op_q);

        // q's reconstruction realized directly on the window grid through the
        // displaced operator (equivalent to shifting the q-frame image)
        const CVector rho_q = cgnr_solve(prep_q, tracks_q_, trunc_.inner);

        // psi from p: per outer iteration project onto q's displaced subspace,
        // then onto p's; psi from q: the opposite order
        const CVector psi_p =
            alternate_project(*prep_p_, prep_q, rho_p_, trunc_.outer, trunc_.inner);
        const CVector psi_q =
            alternate_project(prep_q, *prep_p_, rho_q, trunc_.outer, trunc_.inner);

        PairEvaluation out;
        out.norm_psi_p = norm2(std::span<const std::complex<double>>(psi_p));
        out.norm_psi_q = norm2(std::span<const std::complex<double>>(psi_q));
        const double denom = std::max(out.norm_psi_p, out.norm_psi_q);
        if (denom < 1e-12 * norm_rho_p_)
            throw DegenerateIntersection(
                "pair subspaces are numerically orthogonal; no estimate possible");
        double dz = 0.0, de = 0.0;
        for (std::size_t i = 0; i < psi_p.size(); ++i) {
            const double dm = std::abs(psi_p[i]) - std::abs(psi_q[i]);
            dz += dm * dm;
            de += std::norm(psi_p[i] - psi_q[i]);
        }
        out.zeta = std::sqrt(dz) / denom;
        out.eta = std::sqrt(de) / denom;
        return out;
    }

private:
    TruncationOpts trunc_;
    Pose nominal_diff_;
    PingOperator op_p_;
    PingOperator op_q_base_;
    std::unique_ptr<PreparedPingOperator> prep_p_;
    CVector tracks_p_;
    CVector tracks_q_;
    CVector rho_p_;
    double norm_rho_p_ = 0.0;
};

/// Modulus error function (difference of projection magnitudes).
inline double zeta(const PingRecord& ping_p, const PingRecord& ping_q, const Pose& sigma,
                   TruncationOpts trunc = {}) {
    const double w = ping_p.op.cfg.range_window_m;
    return PairEvaluator(ping_p, ping_q, trunc, {w, w}).evaluate(sigma).zeta;
}

/// Phase error function (complex difference of projections).
inline double eta(const PingRecord& ping_p, const PingRecord& ping_q, const Pose& sigma,
                  TruncationOpts trunc = {}) {
    const double w = ping_p.op.cfg.range_window_m;
    return PairEvaluator(ping_p, ping_q, trunc, {w, w}).evaluate(sigma).eta;
}

struct EstimateOpts {
    TruncationOpts trunc;
    double window_x_m = 2.0;
    double window_y_m = 2.0;

    // finite-difference probe steps
    double zeta_probe_xy_m = 1e-3;
    double zeta_probe_theta_rad = 1e-3;
    double eta_probe_xy_wavelengths = 0.02;  // lambda/50
    double eta_probe_theta_rad = 1e-4;

    // stage stopping: accepted-step tolerance, in scene-scaled units
    double zeta_tol_wavelengths = 0.05;   // lambda/20
    double eta_tol_wavelengths = 0.005;   // lambda/200
    int max_evals_per_stage = 500;

    // backtracking line search
    double zeta_initial_step_m = 4e-3;
    double eta_initial_step_wavelengths = 0.1;
    double zeta_max_step_m = 0.05;
    double eta_max_step_wavelengths = 0.25;
    double grow = 1.4;
    double shrink = 0.5;
    int max_backtracks = 12;

    // restart the zeta stage one yaw lobe away if it stalls high
    bool restart_on_plateau = true;
    double plateau_threshold = 0.6;

    bool parallel_probes = true;
};

struct DisplacementEstimate {
    Pose sigma;
    double zeta_value = 0.0;
    double eta_value = 0.0;
    int evaluations = 0;

    struct TraceEntry {
        int stage = 0; // 1 = zeta stage, 2 = eta stage
        int eval = 0;  // evaluation count when accepted
        Pose sigma;
        double value = 0.0;
    };
    std::vector<TraceEntry> stage_trace;

    /// Last accepted iterate of the zeta stage.
    Pose sigma_after_zeta_stage() const {
        Pose out;
        for (const auto& e : stage_trace)
            if (e.stage == 1) out = e.sigma;
        return out;
    }
};

namespace detail {

struct StageResult {
    Pose sigma;
    double value = 0.0;
};

/// One steepest-descent stage with central finite differences and a
/// backtracking line search. Yaw is scaled by the scene midrange so one
/// optimizer unit has comparable image effect on all three coordinates.
template <class F>
StageResult descend_stage(const F& f, int stage_id, Pose sigma0, double probe_xy,
                          double probe_theta, double tol_step, double step0, double step_max,
                          const EstimateOpts& opts, double midrange, int& evals,
                          std::vector<DisplacementEstimate::TraceEntry>& trace) {
    const auto eval = [&](const Pose& s) {
        ++evals;
        if (evals > opts.max_evals_per_stage * 2)
            throw MaxEvaluations("estimate_displacement: evaluation budget exhausted");
        return f(s);
    };
    Pose sigma = sigma0;
    double value = eval(sigma);
    trace.push_back({stage_id, evals, sigma, value});
    double step = step0;
    int stage_evals = 1;

    while (true) {
        if (stage_evals + 7 > opts.max_evals_per_stage)
            throw MaxEvaluations("estimate_displacement: stage evaluation cap reached");
        // central-difference gradient, probes evaluated concurrently
        const Pose probes[6] = {
            {sigma.x + probe_xy, sigma.y, sigma.theta}, {sigma.x - probe_xy, sigma.y, sigma.theta},
            {sigma.x, sigma.y + probe_xy, sigma.theta}, {sigma.x, sigma.y - probe_xy, sigma.theta},
            {sigma.x, sigma.y, sigma.theta + probe_theta},
            {sigma.x, sigma.y, sigma.theta - probe_theta}};
        double fv[6];
        if (opts.parallel_probes) {
            parallel_for(6, [&](std::size_t i) { fv[i] = f(probes[i]); });
            evals += 6;
        } else {
            for (int i = 0; i < 6; ++i) fv[i] = eval(probes[i]);
        }
        stage_evals += 6;

        // gradient in scaled coordinates u = (x, y, midrange*theta)
        const double gx = (fv[0] - fv[1]) / (2.0 * probe_xy);
        const double gy = (fv[2] - fv[3]) / (2.0 * probe_xy);
        const double gt = (fv[4] - fv[5]) / (2.0 * probe_theta) / midrange;
        const double gn = std::sqrt(gx * gx + gy * gy + gt * gt);
        if (gn == 0.0) break;
        const double dx = -gx / gn, dy = -gy / gn, dt = -gt / gn;

        bool accepted = false;
        double trial = step;
        for (int bt = 0; bt < opts.max_backtracks; ++bt) {
            const Pose cand{sigma.x + trial * dx, sigma.y + trial * dy,
                            sigma.theta + trial * dt / midrange};
            const double cv = eval(cand);
            ++stage_evals;
            if (cv < value) {
                sigma = cand;
                value = cv;
                trace.push_back({stage_id, evals, sigma, value});
                accepted = true;
                break;
            }
            trial *= opts.shrink;
            if (trial < 0.25 * tol_step) break;
        }
        if (!accepted) break;
        const double used = trial;
        step = std::min(used * opts.grow, step_max);
        if (used < tol_step) break;
    }
    return {sigma, value};
}

} // namespace detail

/// Two-stage ping-to-ping displacement estimation: steepest descent on the
/// modulus error function from sigma = 0, refined by steepest descent on the
/// phase error function.
inline DisplacementEstimate estimate_displacement(const PingRecord& ping_p,
                                                  const PingRecord& ping_q,
                                                  const EstimateOpts& opts = {}) {
    const PairEvaluator ev(ping_p, ping_q, opts.trunc, {opts.window_x_m, opts.window_y_m});
    const double lambda = ev.cfg().wavelength_m();
    const double midrange = ev.cfg().midrange_m;

    DisplacementEstimate est;
    const auto f_zeta = [&](const Pose& s) { return ev.evaluate(s).zeta; };
    const auto f_eta = [&](const Pose& s) { return ev.evaluate(s).eta; };

    auto stage1 = detail::descend_stage(f_zeta, 1, Pose{}, opts.zeta_probe_xy_m,
                                        opts.zeta_probe_theta_rad, opts.zeta_tol_wavelengths * lambda,
                                        opts.zeta_initial_step_m, opts.zeta_max_step_m, opts,
                                        midrange, est.evaluations, est.stage_trace);

    if (opts.restart_on_plateau && stage1.value > opts.plateau_threshold) {
        const double span = ev.phase_center_span();
        if (span > 0.0) {
            const double lobe = lambda / span;
            for (const double off : {lobe, -lobe}) {
                auto alt = detail::descend_stage(
                    f_zeta, 1, Pose{0.0, 0.0, off}, opts.zeta_probe_xy_m,
                    opts.zeta_probe_theta_rad, opts.zeta_tol_wavelengths * lambda,
                    opts.zeta_initial_step_m, opts.zeta_max_step_m, opts, midrange,
                    est.evaluations, est.stage_trace);
                if (alt.value < stage1.value) stage1 = alt;
            }
        }
    }
    est.zeta_value = stage1.value;

    auto stage2 = detail::descend_stage(
        f_eta, 2, stage1.sigma, opts.eta_probe_xy_wavelengths * lambda, opts.eta_probe_theta_rad,
        opts.eta_tol_wavelengths * lambda, opts.eta_initial_step_wavelengths * lambda,
        opts.eta_max_step_wavelengths * lambda, opts, midrange, est.evaluations,
        est.stage_trace);

    est.sigma = stage2.sigma;
    est.eta_value = stage2.value;
    return est;
}

struct TrajectoryEstimate {
    std::vector<Pose> poses;         // cumulative, poses[0] = (0,0,0)
    std::vector<Pose> differentials; // one per consecutive pair
    double rotation_correction = 0.0;
    std::vector<double> nominal_x;   // nominal along-track position per ping
    std::vector<DisplacementEstimate> pair_estimates;
};

/// Estimate every consecutive pair and accumulate the differentials into a
/// trajectory anchored at the first ping.
inline TrajectoryEstimate estimate_trajectory(const std::vector<PingRecord>& pings,
                                              const EstimateOpts& opts = {},
                                              bool parallel_pairs = true) {
    if (pings.size() < 2)
        throw ValidationError("estimate_trajectory: need at least two pings");
    const std::size_t n_pairs = pings.size() - 1;
    TrajectoryEstimate out;
    out.pair_estimates.resize(n_pairs);
    out.nominal_x.resize(pings.size());
    for (std::size_t i = 0; i < pings.size(); ++i)
        out.nominal_x[i] = pings[i].nominal_pca().x;

    EstimateOpts pair_opts = opts;
    if (parallel_pairs && n_pairs > 1) pair_opts.parallel_probes = false;
    std::vector<std::string> failures(n_pairs);
    detail::parallel_for(
        n_pairs,
        [&](std::size_t i) {
            try {
                out.pair_estimates[i] = estimate_displacement(pings[i], pings[i + 1], pair_opts);
            } catch (const Error& e) {
                failures[i] = e.what();
            }
        },
        parallel_pairs ? 0 : 1);
    for (std::size_t i = 0; i < n_pairs; ++i)
        if (!failures[i].empty())
            throw NumericalError("pair " + std::to_string(i) + "-" + std::to_string(i + 1) +
                                 ": " + failures[i]);

    out.differentials.reserve(n_pairs);
    out.poses.reserve(pings.size());
    out.poses.push_back(Pose{});
    for (std::size_t i = 0; i < n_pairs; ++i) {
        const Pose& d = out.pair_estimates[i].sigma;
        out.differentials.push_back(d);
        const Pose& prev = out.poses.back();
        out.poses.emplace_back(prev.x + d.x, prev.y + d.y, prev.theta + d.theta);
    }
    return out;
}

/// Subsample a ping sequence into the arrangement with K expected overlapping
/// phase centers: every (N-K)-th ping starting at `phase`.
inline std::vector<PingRecord> rearrange_pings(const std::vector<PingRecord>& pings, int k,
                                               int phase) {
    if (pings.empty()) throw ValidationError("rearrange_pings: empty input");
    const int n = pings.front().op.cfg.n_rx;
    if (k < 0 || k >= n) throw IndexOutOfRange("rearrange_pings: need 0 <= K < N");
    const int stride = n - k;
    if (phase < 0 || phase >= stride)
        throw IndexOutOfRange("rearrange_pings: need 0 <= phase < N-K");
    std::vector<PingRecord> out;
    for (std::size_t i = static_cast<std::size_t>(phase); i < pings.size();
         i += static_cast<std::size_t>(stride))
        out.push_back(pings[i]);
    return out;
}

/// Reduce each ping to a single receiver: a SISO synthetic aperture sharing
/// the original Tx.
inline std::vector<PingRecord> extract_siso(const std::vector<PingRecord>& pings,
                                            int rx_index) {
    std::vector<PingRecord> out;
    out.reserve(pings.size());
    for (const PingRecord& p : pings) {
        if (rx_index < 0 || rx_index >= p.op.n_tracks())
            throw IndexOutOfRange("extract_siso: receiver index out of range");
        PingRecord s;
        s.op = p.op;
        s.op.geometry.rx_centers = {p.op.geometry.rx_centers[static_cast<std::size_t>(rx_index)]};
        s.op.geometry.array_mid = s.op.geometry.rx_centers.front();
        s.op.cfg.n_rx = 1;
        s.op.cfg.expected_overlap_k = 0;
        s.tracks = {p.tracks[static_cast<std::size_t>(rx_index)]};
        out.push_back(std::move(s));
    }
    return out;
}

/// Interlace per-phase subsampled trajectory estimates into one fully sampled
/// trajectory. Each phase's undetermined starting offset is the least-squares
/// constant against the phase-0 chain linearly interpolated at the phase's
/// ping indices. The angle of the cross-track drift line (sway vs nominal
/// along-track position) is reported as rotation_correction.
inline TrajectoryEstimate combine_phase_estimates(
    const std::vector<TrajectoryEstimate>& per_phase, int stride) {
    if (per_phase.empty()) throw ValidationError("combine_phase_estimates: empty input");
    if (stride < 1 || static_cast<std::size_t>(stride) != per_phase.size())
        throw InconsistentStride("combine_phase_estimates: stride must equal the phase count");
    if (stride == 1) {
        TrajectoryEstimate out = per_phase.front();
        return out;
    }
    const std::size_t n0 = per_phase.front().poses.size();
    std::size_t total = 0;
    for (const auto& t : per_phase) {
        if (t.poses.size() > n0 || t.poses.size() + 1 < n0)
            throw InconsistentStride("combine_phase_estimates: phase lengths inconsistent");
        if (t.nominal_x.size() != t.poses.size())
            throw InconsistentStride("combine_phase_estimates: missing nominal positions");
        total += t.poses.size();
    }

    // reference chain at indices 0, stride, 2*stride, ...
    const auto& ref = per_phase.front().poses;
    const auto interp_ref = [&](double idx) -> Pose {
        const double j = idx / stride;
        if (j <= 0.0) return ref.front();
        if (j >= static_cast<double>(ref.size() - 1)) return ref.back();
        const std::size_t j0 = static_cast<std::size_t>(j);
        const double f = j - static_cast<double>(j0);
        const Pose& a = ref[j0];
        const Pose& b = ref[j0 + 1];
        return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y),
                a.theta + f * (b.theta - a.theta)};
    };

    TrajectoryEstimate out;
    out.poses.resize(total);
    out.nominal_x.resize(total);
    for (int f = 0; f < stride; ++f) {
        const auto& chain = per_phase[static_cast<std::size_t>(f)];
        double ox = 0.0, oy = 0.0, ot = 0.0;
        if (f > 0) {
            for (std::size_t j = 0; j < chain.poses.size(); ++j) {
                const Pose r = interp_ref(static_cast<double>(f + j * stride));
                ox += r.x - chain.poses[j].x;
                oy += r.y - chain.poses[j].y;
                ot += r.theta - chain.poses[j].theta;
            }
            const double inv = 1.0 / static_cast<double>(chain.poses.size());
            ox *= inv;
            oy *= inv;
            ot *= inv;
        }
        for (std::size_t j = 0; j < chain.poses.size(); ++j) {
            const std::size_t idx = static_cast<std::size_t>(f) + j * static_cast<std::size_t>(stride);
            if (idx >= total) throw InconsistentStride("combine_phase_estimates: index overflow");
            out.poses[idx] = Pose{chain.poses[j].x + ox, chain.poses[j].y + oy,
                                  chain.poses[j].theta + ot};
            out.nominal_x[idx] = chain.nominal_x[j];
        }
    }

    out.differentials.reserve(total - 1);
    for (std::size_t i = 0; i + 1 < total; ++i)
        out.differentials.push_back(differential_displacement(out.poses[i], out.poses[i + 1]));

    // drift line: least-squares fit of sway against nominal along-track position
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < total; ++i) {
        sx += out.nominal_x[i];
        sy += out.poses[i].y;
        sxx += out.nominal_x[i] * out.nominal_x[i];
        sxy += out.nominal_x[i] * out.poses[i].y;
    }
    const double nn = static_cast<double>(total);
    const double denom = nn * sxx - sx * sx;
    out.rotation_correction = (denom != 0.0) ? std::atan2(nn * sxy - sx * sy, denom) : 0.0;
    return out;
}

} // namespace sasnav
