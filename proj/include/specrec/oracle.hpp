#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

// Brute-force minimizer used only as a test oracle. Deliberately shares no
// linear algebra with the solvers: plain loops over std::vector, Gram-Schmidt
// for the constraint nullspace, projected conjugate gradient with bisection
// line searches for the optimization. Slow and simple on purpose.

namespace specrec::oracle {

enum class Objective { slope, log_slope };

// A small constraint system: 3 x n matrix in row-major storage.
struct ToySystem {
    int n = 0;
    std::vector<double> T;  // 3*n entries
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Orthonormal basis (row-major, 3 rows) for the row space of T.
inline std::vector<double> orthonormal_rows(const ToySystem& sys) {
    const int n = sys.n;
    std::vector<double> q(3 * n);
    for (int r = 0; r < 3; ++r) {
        std::vector<double> v(sys.T.begin() + r * n, sys.T.begin() + (r + 1) * n);
        for (int p = 0; p < r; ++p) {
            double d = 0;
            for (int i = 0; i < n; ++i) d += v[i] * q[p * n + i];
            for (int i = 0; i < n; ++i) v[i] -= d * q[p * n + i];
        }
        double nrm = std::sqrt(dot(v, v));
        if (!(nrm > 1e-10))
            throw std::runtime_error("oracle: constraint matrix is rank deficient");
        for (int i = 0; i < n; ++i) q[r * n + i] = v[i] / nrm;
    }
    return q;
}

// Remove the row-space component: the result is a feasible direction.
inline void project_out(std::vector<double>& g, const std::vector<double>& q, int n) {
    for (int r = 0; r < 3; ++r) {
        double d = 0;
        for (int i = 0; i < n; ++i) d += g[i] * q[r * n + i];
        for (int i = 0; i < n; ++i) g[i] -= d * q[r * n + i];
    }
}

inline std::array<double, 3> apply(const ToySystem& sys, const std::vector<double>& x) {
    std::array<double, 3> y{};
    for (int r = 0; r < 3; ++r)
        for (int i = 0; i < sys.n; ++i) y[r] += sys.T[r * sys.n + i] * x[i];
    return y;
}

// A feasible point lying in the row space: rho = Q' c with (T Q') c = rgb.
inline std::vector<double> row_space_point(const ToySystem& sys, const std::array<double, 3>& rgb,
                                           const std::vector<double>& q) {
    const int n = sys.n;
    // 3x3 system (T Q') c = rgb by Gaussian elimination with partial pivoting
    double A[3][4];
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += sys.T[r * n + i] * q[c * n + i];
            A[r][c] = s;
        }
        A[r][3] = rgb[r];
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        for (int c = 0; c < 4; ++c) std::swap(A[col][c], A[piv][c]);
        if (std::abs(A[col][col]) < 1e-14)
            throw std::runtime_error("oracle: feasible-point system is singular");
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            double f = A[r][col] / A[col][col];
            for (int c = col; c < 4; ++c) A[r][c] -= f * A[col][c];
        }
    }
    std::vector<double> rho(n, 0.0);
    for (int r = 0; r < 3; ++r) {
        double cr = A[r][3] / A[r][r];
        for (int i = 0; i < n; ++i) rho[i] += cr * q[r * n + i];
    }
    return rho;
}

inline double slope_objective(const std::vector<double>& x) {
    double f = 0;
    for (size_t i = 0; i + 1 < x.size(); ++i) {
        double d = x[i + 1] - x[i];
        f += d * d;
    }
    return f;
}

inline std::vector<double> slope_gradient(const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<double> g(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) {
        double d = x[i + 1] - x[i];
        g[i] -= 2 * d;
        g[i + 1] += 2 * d;
    }
    return g;
}

inline double log_slope_objective(const std::vector<double>& x) {
    double f = 0;
    for (size_t i = 0; i + 1 < x.size(); ++i) {
        double d = std::log(x[i + 1]) - std::log(x[i]);
        f += d * d;
    }
    return f;
}

inline std::vector<double> log_slope_gradient(const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<double> z(n), g(n, 0.0);
    for (int i = 0; i < n; ++i) z[i] = std::log(x[i]);
    for (int i = 0; i + 1 < n; ++i) {
        double d = z[i + 1] - z[i];
        g[i] -= 2 * d / x[i];
        g[i + 1] += 2 * d / x[i + 1];
    }
    return g;
}

}  // namespace detail

// Minimizes the objective over {rho : T rho = rgb_target} by projected
// conjugate gradient (Polak-Ribiere with a descent restart safeguard) to
// stationarity 1e-12. `start` must be feasible if given; otherwise the
// row-space point is used (and, for the log objective, must come out
// strictly positive or the caller has to supply a positive start).
inline std::vector<double> brute_force_oracle(const std::array<double, 3>& rgb_target,
                                              const ToySystem& sys, Objective obj,
                                              std::vector<double> start = {}) {
    if (sys.n < 4 || sys.n > 8)
        throw std::invalid_argument("oracle: band count must be in [4,8]");
    if (static_cast<int>(sys.T.size()) != 3 * sys.n)
        throw std::invalid_argument("oracle: T storage does not match n");

    const int n = sys.n;
    std::vector<double> q = detail::orthonormal_rows(sys);
    std::vector<double> x = start.empty() ? detail::row_space_point(sys, rgb_target, q) : start;
    if (static_cast<int>(x.size()) != n)
        throw std::invalid_argument("oracle: start point has wrong size");
    {
        auto y = detail::apply(sys, x);
        for (int r = 0; r < 3; ++r)
            if (std::abs(y[r] - rgb_target[r]) > 1e-9)
                throw std::invalid_argument("oracle: start point is not feasible");
    }
    const bool log_obj = obj == Objective::log_slope;
    if (log_obj)
        for (double v : x)
            if (!(v > 0)) throw std::invalid_argument("oracle: log objective needs a positive start");

    auto gradient = [&](const std::vector<double>& at) {
        std::vector<double> g = log_obj ? detail::log_slope_gradient(at) : detail::slope_gradient(at);
        detail::project_out(g, q, n);
        return g;
    };

    std::vector<double> g = gradient(x);
    std::vector<double> g_old, p(n);
    double step_seed = 1.0;
    for (long iter = 0; iter < 200000; ++iter) {
        double gmax = 0;
        for (double v : g) gmax = std::max(gmax, std::abs(v));
        if (gmax < 1e-12) return x;

        if (g_old.empty()) {
            for (int i = 0; i < n; ++i) p[i] = -g[i];
        } else {
            double gg_old = detail::dot(g_old, g_old);
            double num = 0;
            for (int i = 0; i < n; ++i) num += g[i] * (g[i] - g_old[i]);
            double beta = gg_old > 0 ? std::max(0.0, num / gg_old) : 0.0;
            for (int i = 0; i < n; ++i) p[i] = -g[i] + beta * p[i];
            if (detail::dot(p, g) >= 0)  // not a descent direction: restart
                for (int i = 0; i < n; ++i) p[i] = -g[i];
        }

        if (!log_obj) {
            // the objective is an exactly-minimizable quadratic along p
            double a = 0, b = 0;
            for (int i = 0; i + 1 < n; ++i) {
                double dd = p[i + 1] - p[i];
                double rd = x[i + 1] - x[i];
                a += dd * dd;
                b += 2 * rd * dd;
            }
            if (!(a > 0)) throw std::runtime_error("oracle: degenerate line search");
            double t = -b / (2 * a);
            for (int i = 0; i < n; ++i) x[i] += t * p[i];
        } else {
            // Locally bracketed line search. The feasible segment can run
            // many orders of magnitude past the nearest minimum and the
            // derivative can change sign repeatedly out there, so expansion
            // doubles from an adaptive seed and stops as soon as the
            // function value rises. Inside the local bracket the bisection
            // runs on the directional derivative's sign: near stationarity
            // the true decreases sink below f's rounding floor and only the
            // derivative stays informative.
            auto probe_point = [&](double t, std::vector<double>& y) {
                for (int i = 0; i < n; ++i) {
                    y[i] = x[i] + t * p[i];
                    if (!(y[i] > 0)) return false;
                }
                return true;
            };
            auto feval = [&](double t, bool& valid) {
                std::vector<double> y(n);
                valid = probe_point(t, y);
                return valid ? detail::log_slope_objective(y) : 0.0;
            };
            // The row-space part of the raw gradient would cancel against p
            // exactly, but p carries rounding-level row-space leakage and the
            // raw gradient is orders of magnitude larger than the projected
            // one near stationarity, so project before dotting or the noise
            // drowns the slope's sign.
            auto dphi = [&](double t, bool& valid) {
                std::vector<double> y(n);
                valid = probe_point(t, y);
                return valid ? detail::dot(gradient(y), p) : 0.0;
            };

            double wall = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i)
                if (p[i] < 0) wall = std::min(wall, x[i] / -p[i]);

            const double f0 = detail::log_slope_objective(x);
            const double f_bound = f0 * (1 + 1e-12);

            // shrink until the probe is feasible, non-increasing and still
            // on the descending side
            double t = std::isfinite(wall) ? std::min(step_seed, 0.25 * wall) : step_seed;
            double f_lo = 0;
            for (int shrink = 0;; ++shrink) {
                if (shrink > 200) throw std::runtime_error("oracle: line search failed");
                bool fv = false, dv = false;
                f_lo = feval(t, fv);
                if (fv && f_lo <= f_bound && dphi(t, dv) < 0 && dv) break;
                t *= 0.5;
            }

            // expand while the function keeps falling and the derivative
            // stays negative; the first probe beyond either closes a bracket
            double lo = t, hi = 0;
            bool have_hi = false;
            for (int h = 0; h < 200 && !have_hi; ++h) {
                double t2 = 2 * lo;
                if (std::isfinite(wall)) t2 = std::min(t2, lo + 0.5 * (wall - lo));
                if (!(t2 > lo)) break;
                bool fv = false, dv = false;
                double f2 = feval(t2, fv);
                if (!fv || f2 > f_lo) {
                    hi = t2;
                    have_hi = true;
                } else if (double d2 = dphi(t2, dv); !dv || d2 >= 0) {
                    hi = t2;
                    have_hi = true;
                } else {
                    lo = t2;
                    f_lo = f2;
                }
            }

            const double t_safe = lo;
            if (have_hi) {
                for (int h = 0; h < 120; ++h) {
                    double mid = 0.5 * (lo + hi);
                    if (mid == lo || mid == hi) break;
                    bool dv = false;
                    double d = dphi(mid, dv);
                    if (dv && d < 0.0)
                        lo = mid;
                    else
                        hi = mid;
                }
                bool fv = false;
                if (double ff = feval(lo, fv); !fv || ff > f_bound) lo = t_safe;
            }

            for (int i = 0; i < n; ++i) x[i] += lo * p[i];
            step_seed = 2 * lo;
        }

        g_old = std::move(g);
        g = gradient(x);
    }
    throw std::runtime_error("oracle: did not reach stationarity");
}

}  // namespace specrec::oracle
