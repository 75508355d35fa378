#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "color_system.hpp"
#include "gamma.hpp"
#include "types.hpp"

namespace specrec {

// The two fixed sets of an active-constraint pass, realized as a selection
// matrix with one unit row per constrained band. Upper-bound rows come first.
struct ConstraintSet {
    std::vector<int> at_upper;  // bands pinned to 1
    std::vector<int> at_lower;  // bands pinned to the lower clamp

    int size() const { return static_cast<int>(at_upper.size() + at_lower.size()); }

    Eigen::MatrixXd selection_matrix(int n) const {
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(size(), n);
        int row = 0;
        for (int i : at_upper) K(row++, i) = 1.0;
        for (int i : at_lower) K(row++, i) = 1.0;
        return K;
    }
};

namespace detail {

inline void add_new_indices(std::vector<int>& dst, const std::vector<int>& add) {
    for (int i : add)
        if (std::find(dst.begin(), dst.end(), i) == dst.end()) dst.push_back(i);
    std::sort(dst.begin(), dst.end());
}

// The LSS map. ILSS reuses this exact expression so an unconstrained ILSS
// result is bit-identical to solve_lss.
inline Eigen::VectorXd lss_curve(const Eigen::MatrixXd& B12, const Eigen::Vector3d& rgb) {
    return B12 * rgb;
}

struct NewtonResult {
    Eigen::VectorXd z;
    Eigen::Vector3d lambda;
    int iterations = 0;
    bool converged = false;
};

// Newton's method on the log-space stationarity system
//   D z - diag(e^z) T' lambda (+ K' mu) = 0,  T e^z = rgb,  (K z = 0)
// from z = 0, lambda = 0, mu = 0, taking full steps. Iteration bookkeeping
// mirrors the reference listing: the update is applied first, then the test
// uses the pre-update residual F together with the step just taken, and the
// passing iteration is not counted.
inline NewtonResult newton_log_slope(const Eigen::MatrixXd& T, const Eigen::MatrixXd& D,
                                     const Eigen::Vector3d& rgb, const std::vector<int>& fixed,
                                     double ftol, double deltatol, int maxit) {
    const int n = static_cast<int>(T.cols());
    const int m = static_cast<int>(fixed.size());
    const int dim = n + 3 + m;

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m, n);
    for (int i = 0; i < m; ++i) K(i, fixed[i]) = 1.0;

    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    Eigen::Vector3d lambda = Eigen::Vector3d::Zero();
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);

    Eigen::VectorXd F(dim);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);
    if (m) {
        J.block(0, n + 3, n, m) = K.transpose();
        J.block(n + 3, 0, m, n) = K;
    }

    int count = 0;
    while (count <= maxit) {
        Eigen::VectorXd r = z.array().exp();
        Eigen::VectorXd v = -(r.array() * (T.transpose() * lambda).array()).matrix();
        Eigen::MatrixXd m2 = -(T * r.asDiagonal());

        F.head(n) = D * z + v;
        if (m) F.head(n) += K.transpose() * mu;
        F.segment(n, 3) = -(T * r) + rgb;
        if (m) F.tail(m) = K * z;

        J.topLeftCorner(n, n) = D;
        J.topLeftCorner(n, n).diagonal() += v;
        J.block(0, n, n, 3) = m2.transpose();
        J.block(n, 0, 3, n) = m2;

        Eigen::VectorXd delta = J.partialPivLu().solve(-F);
        z += delta.head(n);
        lambda += delta.segment<3>(n);
        if (m) mu += delta.tail(m);

        if ((F.array().abs() < ftol).all() && (delta.array().abs() < deltatol).all())
            return {std::move(z), lambda, count, true};
        ++count;
    }
    return {std::move(z), lambda, count, false};
}

inline ReflectanceCurve to_curve(const Eigen::VectorXd& v) {
    ReflectanceCurve rho;
    Eigen::Map<Eigen::VectorXd>(rho.data(), kBands) = v;
    return rho;
}

inline void require_standard_grid(const ColorSystem& sys) {
    if (sys.bands() != kBands)
        throw std::invalid_argument("solver requires the 36-band system");
}

inline double rgb_residual(const ColorSystem& sys, const Eigen::VectorXd& rho,
                           const Eigen::Vector3d& rgb) {
    return (sys.T * rho - rgb).cwiseAbs().maxCoeff();
}

}  // namespace detail

// LLS: rho = T'(TT')^-1 rgb, the least-norm metamer.
inline SolveOutcome solve_lls(const LinearRgb& rgb, const ColorSystem& sys) {
    detail::require_standard_grid(sys);
    Eigen::Vector3d t = to_vector(rgb);
    Eigen::VectorXd rho = sys.pinv_T * t;
    SolveOutcome out;
    out.rho = detail::to_curve(rho);
    out.converged = true;
    out.rgb_residual = detail::rgb_residual(sys, rho, t);
    return out;
}

// LSS: rho = B12 rgb, the minimum-slope-squared metamer.
inline SolveOutcome solve_lss(const LinearRgb& rgb, const ColorSystem& sys) {
    detail::require_standard_grid(sys);
    Eigen::Vector3d t = to_vector(rgb);
    Eigen::VectorXd rho = detail::lss_curve(sys.B12, t);
    SolveOutcome out;
    out.rho = detail::to_curve(rho);
    out.converged = true;
    out.rgb_residual = detail::rgb_residual(sys, rho, t);
    return out;
}

// LLSS: minimum slope squared in z = ln rho, via Newton on the 39-equation
// stationarity system. Strictly positive output; values above 1 allowed.
inline SolveOutcome solve_llss(const SrgbTriplet& s, const ColorSystem& sys,
                               const SolverOptions& opts = {}) {
    detail::require_standard_grid(sys);
    SolveOutcome out;
    if (s == SrgbTriplet{0, 0, 0}) {
        out.rho.fill(opts.rho_min_illss);
        out.converged = true;
        return out;
    }
    Eigen::Vector3d rgb = to_vector(decode_gamma(s));
    auto res = detail::newton_log_slope(sys.T, sys.D, rgb, {}, opts.ftol, opts.deltatol,
                                        opts.max_newton_iters_llss);
    Eigen::VectorXd rho = res.z.array().exp();
    out.rho = detail::to_curve(rho);
    out.converged = res.converged;
    out.inner_iterations = res.iterations;
    out.lambda = {res.lambda[0], res.lambda[1], res.lambda[2]};
    out.rgb_residual = detail::rgb_residual(sys, rho, rgb);
    return out;
}

// ILLSS: LLSS plus an outer loop that pins every band reaching 1 (K z = 0
// rows) and re-solves until the whole curve sits in (0, 1]. The fixed set
// only grows; pinned bands are snapped to exactly 1 after each pass.
inline SolveOutcome solve_illss(const SrgbTriplet& s, const ColorSystem& sys,
                                const SolverOptions& opts = {}) {
    detail::require_standard_grid(sys);
    SolveOutcome out;
    if (s == SrgbTriplet{0, 0, 0}) {
        out.rho.fill(opts.rho_min_illss);
        out.converged = true;
        return out;
    }
    if (s == SrgbTriplet{255, 255, 255}) {
        out.rho.fill(1.0);
        out.converged = true;
        return out;
    }

    const int n = sys.bands();
    Eigen::Vector3d rgb = to_vector(decode_gamma(s));
    std::vector<int> fixed;
    Eigen::VectorXd rho = Eigen::VectorXd::Zero(n);
    bool inner_ok = true;

    while (((rho.array() > 1.0).any() && out.outer_iterations <= opts.max_outer_iters) ||
           (rho.array() == 0.0).all()) {
        std::vector<int> reached;
        for (int i = 0; i < n; ++i)
            if (rho[i] >= 1.0) reached.push_back(i);
        detail::add_new_indices(fixed, reached);
        out.fixed_one_history.push_back(fixed);

        auto res = detail::newton_log_slope(sys.T, sys.D, rgb, fixed, opts.ftol, opts.deltatol,
                                            opts.max_newton_iters_illss);
        out.inner_iterations += res.iterations;
        out.lambda = {res.lambda[0], res.lambda[1], res.lambda[2]};
        rho = res.z.array().exp();
        ++out.outer_iterations;
        if (!res.converged) {
            inner_ok = false;
            break;
        }
        for (int i : fixed) rho[i] = 1.0;
    }

    out.rho = detail::to_curve(rho);
    out.fixed_at_one = fixed;
    out.converged = inner_ok && !(rho.array() > 1.0).any();
    out.rgb_residual = detail::rgb_residual(sys, rho, rgb);
    return out;
}

// ILSS: the LSS curve, then closed-form equality-constrained re-solves that
// pin bands crossing either bound until everything sits in [rho_min, 1].
// Always runs at least one pass; a pass with empty fixed sets just returns
// the unconstrained LSS curve.
inline SolveOutcome solve_ilss(const SrgbTriplet& s, const ColorSystem& sys,
                               const SolverOptions& opts = {}) {
    detail::require_standard_grid(sys);
    const int n = sys.bands();
    const double rho_min = opts.rho_min_ilss;
    SolveOutcome out;

    Eigen::Vector3d rgb = to_vector(decode_gamma(s));
    Eigen::VectorXd R = detail::lss_curve(sys.B12, rgb);
    out.first_pass_above_one = R.maxCoeff() - 1.0 > 1e-12;
    out.first_pass_below_zero = R.minCoeff() < 0.0;

    if (s == SrgbTriplet{255, 255, 255}) {
        out.rho.fill(1.0);
        out.converged = true;
        return out;
    }
    if (s == SrgbTriplet{0, 0, 0}) {
        out.rho.fill(rho_min);
        out.converged = true;
        return out;
    }

    Eigen::VectorXd rho = Eigen::VectorXd::Constant(n, 0.5);
    ConstraintSet set;
    bool solvable = true;

    while ((((rho.array() > 1.0).any() || (rho.array() < rho_min).any()) &&
            out.outer_iterations <= opts.max_outer_iters) ||
           out.outer_iterations == 0) {
        std::vector<int> hit_upper, hit_lower;
        for (int i = 0; i < n; ++i) {
            if (rho[i] >= 1.0) hit_upper.push_back(i);
            if (rho[i] <= rho_min) hit_lower.push_back(i);
        }
        detail::add_new_indices(set.at_upper, hit_upper);
        detail::add_new_indices(set.at_lower, hit_lower);
        out.fixed_one_history.push_back(set.at_upper);
        out.fixed_min_history.push_back(set.at_lower);

        // A band driven to both bounds has no consistent constraint row.
        for (int i : set.at_upper)
            if (std::find(set.at_lower.begin(), set.at_lower.end(), i) != set.at_lower.end())
                solvable = false;
        if (!solvable) break;

        if (set.size() == 0) {
            rho = R;
        } else {
            Eigen::MatrixXd K = set.selection_matrix(n);
            Eigen::VectorXd bounds(set.size());
            bounds.head(set.at_upper.size()).setOnes();
            bounds.tail(set.at_lower.size()).setConstant(rho_min);
            Eigen::MatrixXd KBK = K * sys.B11 * K.transpose();
            Eigen::VectorXd rhs = K * R - bounds;
            Eigen::VectorXd y = KBK.partialPivLu().solve(rhs);
            if (!((KBK * y - rhs).cwiseAbs().maxCoeff() < 1e-6)) {
                solvable = false;
                break;
            }
            rho = R - sys.B11 * (K.transpose() * y);
            for (int i : set.at_upper) rho[i] = 1.0;
            for (int i : set.at_lower) rho[i] = rho_min;
        }
        ++out.outer_iterations;
    }

    out.rho = detail::to_curve(rho);
    out.fixed_at_one = set.at_upper;
    out.fixed_at_min = set.at_lower;
    out.converged =
        solvable && !(rho.array() > 1.0).any() && !(rho.array() < rho_min).any();
    out.rgb_residual = detail::rgb_residual(sys, rho, rgb);
    return out;
}

inline SolveOutcome solve(Method m, const SrgbTriplet& s, const ColorSystem& sys,
                          const SolverOptions& opts = {}) {
    switch (m) {
        case Method::lls: return solve_lls(decode_gamma(s), sys);
        case Method::lss: return solve_lss(decode_gamma(s), sys);
        case Method::llss: return solve_llss(s, sys, opts);
        case Method::illss: return solve_illss(s, sys, opts);
        case Method::ilss: return solve_ilss(s, sys, opts);
    }
    throw std::invalid_argument("unknown method");
}

}  // namespace specrec
