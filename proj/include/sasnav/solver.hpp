#pragma once

#include <complex>
#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

#include "sasnav/errors.hpp"

namespace sasnav {

/// Anything that can apply a complex linear map and its adjoint between
/// flattened vectors. Satisfied by PreparedPingOperator and by the dense
/// test operators in the suite.
template <class Op>
concept LinearOperator = requires(const Op& op, std::span<const std::complex<double>> x,
                                  std::span<std::complex<double>> y) {
    { op.rows() } -> std::convertible_to<std::size_t>;
    { op.cols() } -> std::convertible_to<std::size_t>;
    op.apply(x, y);
    op.apply_adjoint(y, x);
};

using CVector = std::vector<std::complex<double>>;

inline std::complex<double> dot(std::span<const std::complex<double>> a,
                                std::span<const std::complex<double>> b) {
    std::complex<double> s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

inline double norm2(std::span<const std::complex<double>> a) {
    double s = 0.0;
    for (const auto& v : a) s += std::norm(v);
    return std::sqrt(s);
}

/// Truncated least-squares solve of op(x) = rhs by conjugate gradient on the
/// normal equations (CGNR): zero start, fixed iteration count, no early exit,
/// so results are deterministic. The iterates stay in the row space of the
/// operator and the data residual norm is non-increasing.
template <LinearOperator Op>
CVector cgnr_solve(const Op& op, std::span<const std::complex<double>> rhs, int iters) {
    if (iters < 1) throw ConfigError("cgnr_solve: need at least one iteration");
    if (rhs.size() != op.rows()) throw ShapeMismatch("cgnr_solve: rhs size mismatch");
    const std::size_t n = op.cols();
    const std::size_t m = op.rows();
    CVector x(n);
    CVector r(rhs.begin(), rhs.end()); // data residual, x = 0
    CVector s(n);                      // normal residual A^H r
    op.apply_adjoint(r, s);
    CVector p = s;
    CVector q(m);
    double gamma = 0.0;
    for (const auto& v : s) gamma += std::norm(v);
    if (gamma == 0.0) return x;
    for (int it = 0; it < iters; ++it) {
        op.apply(p, q);
        double qq = 0.0;
        for (const auto& v : q) qq += std::norm(v);
        if (qq == 0.0) break;
        const double alpha = gamma / qq;
        for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (std::size_t i = 0; i < m; ++i) r[i] -= alpha * q[i];
        op.apply_adjoint(r, s);
        double gamma_new = 0.0;
        for (const auto& v : s) gamma_new += std::norm(v);
        if (gamma_new == 0.0) break;
        const double beta = gamma_new / gamma;
        for (std::size_t i = 0; i < n; ++i) p[i] = s[i] + beta * p[i];
        gamma = gamma_new;
    }
    return x;
}

/// Orthogonal projection of x onto the operator's row space:
/// Q x = pinv(op) (op x), with the pseudoinverse truncated to `iters` CG steps.
template <LinearOperator Op>
CVector project_subspace(const Op& op, std::span<const std::complex<double>> x, int iters) {
    if (x.size() != op.cols()) throw ShapeMismatch("project_subspace: size mismatch");
    CVector data(op.rows());
    op.apply(x, data);
    return cgnr_solve(op, data, iters);
}

/// Alternating projections toward the intersection of two subspaces: each
/// outer iteration projects onto op_b's subspace, then onto op_a's. The
/// result after `outer` iterations approximates the projection of `start`
/// onto the intersection (exactly, in the limit).
template <LinearOperator OpA, LinearOperator OpB>
CVector alternate_project(const OpA& op_a, const OpB& op_b,
                          std::span<const std::complex<double>> start, int outer, int inner) {
    if (outer < 1) throw ConfigError("alternate_project: need at least one outer iteration");
    CVector x(start.begin(), start.end());
    for (int i = 0; i < outer; ++i) {
        x = project_subspace(op_b, x, inner);
        x = project_subspace(op_a, x, inner);
    }
    return x;
}

} // namespace sasnav
