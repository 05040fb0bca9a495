#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "sasnav/errors.hpp"
#include "sasnav/ping.hpp"
#include "sasnav/scene.hpp"
#include "sasnav/solver.hpp"
#include "sasnav/track.hpp"

namespace sasnav {

/// One ping's operator descriptor plus its N recorded tracks.
struct PingRecord {
    PingOperator op;
    std::vector<Track> tracks;

    /// Nominal phase-center pose, derived from the (nominal) geometry.
    Pose nominal_pca() const { return op.geometry.phase_center_pose(); }

    void validate() const {
        op.validate();
        if (tracks.size() != static_cast<std::size_t>(op.n_tracks()))
            throw ShapeMismatch("PingRecord: track count != receiver count");
        for (const Track& t : tracks) {
            t.validate();
            if (!(t.time == op.time))
                throw ShapeMismatch("PingRecord: tracks must share the operator time grid");
        }
    }
};

inline CVector stack_tracks(const std::vector<Track>& tracks) {
    CVector out;
    if (tracks.empty()) return out;
    out.reserve(tracks.size() * tracks.front().samples.size());
    for (const Track& t : tracks) out.insert(out.end(), t.samples.begin(), t.samples.end());
    return out;
}

inline std::vector<Track> unstack_tracks(const CVector& data, const TimeGrid& time,
                                         int n_tracks) {
    if (data.size() != static_cast<std::size_t>(n_tracks) * static_cast<std::size_t>(time.m))
        throw ShapeMismatch("unstack_tracks: size mismatch");
    std::vector<Track> out;
    out.reserve(static_cast<std::size_t>(n_tracks));
    for (int l = 0; l < n_tracks; ++l) {
        Track t(time);
        const auto b = data.begin() + static_cast<std::ptrdiff_t>(l) * time.m;
        std::copy(b, b + time.m, t.samples.begin());
        out.push_back(std::move(t));
    }
    return out;
}

/// Stacked forward model of a ping: raw tracks from a scene.
inline std::vector<Track> ping_forward(const PingOperator& op, const ReflectivityGrid& rho) {
    rho.validate();
    if (!(rho.frame == op.grid)) throw ShapeMismatch("ping_forward: grid frame mismatch");
    PreparedPingOperator prep(op);
    CVector data(op.data_size());
    prep.apply(rho.values, data);
    return unstack_tracks(data, op.time, op.n_tracks());
}

/// Stacked adjoint (backprojection, Eq.-4 style sum over the ping's pairs).
inline ReflectivityGrid ping_adjoint(const PingOperator& op, const std::vector<Track>& tracks) {
    if (tracks.size() != static_cast<std::size_t>(op.n_tracks()))
        throw ShapeMismatch("ping_adjoint: track count mismatch");
    PreparedPingOperator prep(op);
    ReflectivityGrid out(op.grid);
    const CVector data = stack_tracks(tracks);
    prep.apply_adjoint(data, out.values);
    return out;
}

/// Truncated pseudoinverse reconstruction from a ping's tracks (CGNR with a
/// fixed iteration count, zero start).
inline ReflectivityGrid pseudoinverse_apply(const PingOperator& op,
                                            const std::vector<Track>& tracks, int iters) {
    if (tracks.size() != static_cast<std::size_t>(op.n_tracks()))
        throw ShapeMismatch("pseudoinverse_apply: track count mismatch");
    PreparedPingOperator prep(op);
    const CVector data = stack_tracks(tracks);
    ReflectivityGrid out(op.grid);
    out.values = cgnr_solve(prep, data, iters);
    return out;
}

/// Orthogonal projector onto the subspace a ping can observe.
inline ReflectivityGrid project(const PingOperator& op, const ReflectivityGrid& rho, int iters) {
    rho.validate();
    if (!(rho.frame == op.grid)) throw ShapeMismatch("project: grid frame mismatch");
    PreparedPingOperator prep(op);
    ReflectivityGrid out(op.grid);
    out.values = project_subspace(prep, rho.values, iters);
    return out;
}

/// Alternating-projection estimate of the intersection image psi. Each outer
/// iteration projects onto ping q's subspace displaced by the hypothesis
/// sigma (its PCA-centered operator transformed by S_sigma), then onto ping
/// p's subspace. `start` is the reconstruction the chain begins from.
inline ReflectivityGrid intersection_project(const ReflectivityGrid& start,
                                             const PingOperator& op_p,
                                             const PingOperator& op_q_base, const Pose& sigma,
                                             int outer_iters, int inner_iters) {
    start.validate();
    if (!(start.frame == op_p.grid)) throw ShapeMismatch("intersection_project: start frame");
    if (!(op_q_base.grid == op_p.grid))
        throw ShapeMismatch("intersection_project: operator grids differ");
    PingOperator op_q = op_q_base;
    op_q.geometry = displaced(op_q_base.geometry, sigma);
    PreparedPingOperator prep_p(op_p);
    PreparedPingOperator prep_q(op_q);
    ReflectivityGrid out(op_p.grid);
    out.values = alternate_project(prep_p, prep_q, start.values, outer_iters, inner_iters);
    return out;
}

} // namespace sasnav
