#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "specrec/color_system.hpp"
#include "specrec/oracle.hpp"
#include "specrec/solvers.hpp"
#include "toy_systems.hpp"

using namespace specrec;
using oracle::Objective;

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

}  // namespace

TEST_CASE("oracle finds the flat curve for a white target") {
    toys::Toy t = toys::make_toy(99);
    // normalize rows so the flat all-ones curve maps to (1,1,1); the flat
    // curve has zero slope objective, so it must be the constrained minimum
    for (int r = 0; r < 3; ++r) {
        double s = t.T.row(r).sum();
        for (int c = 0; c < t.oracle_sys.n; ++c) {
            t.T(r, c) /= s;
            t.oracle_sys.T[r * t.oracle_sys.n + c] = t.T(r, c);
        }
    }
    std::array<double, 3> white{1.0, 1.0, 1.0};

    auto flat = oracle::brute_force_oracle(white, t.oracle_sys, Objective::slope);
    for (double v : flat) REQUIRE(v == Catch::Approx(1.0).margin(1e-8));
    REQUIRE(oracle::detail::slope_objective(flat) < 1e-15);

    auto flat_log = oracle::brute_force_oracle(white, t.oracle_sys, Objective::log_slope,
                                               std::vector<double>(t.oracle_sys.n, 1.0));
    for (double v : flat_log) REQUIRE(v == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("oracle agrees with the bordered-system slope minimizer") {
    for (int seed = 0; seed < 25; ++seed) {
        toys::Toy t = toys::make_toy(1000 + seed);
        const int n = t.oracle_sys.n;

        Eigen::MatrixXd D = detail::slope_penalty_matrix(n);
        Eigen::MatrixXd inv = detail::bordered_inverse(D, t.T);
        Eigen::VectorXd lss = detail::lss_curve(inv.topRightCorner(n, 3), t.rgb);

        auto got = oracle::brute_force_oracle({t.rgb[0], t.rgb[1], t.rgb[2]}, t.oracle_sys,
                                              Objective::slope);
        for (int i = 0; i < n; ++i) REQUIRE(got[i] == Catch::Approx(lss[i]).margin(1e-8));
    }
}

TEST_CASE("oracle agrees with the Newton log-slope minimizer") {
    for (int seed = 0; seed < 25; ++seed) {
        toys::Toy t = toys::make_toy(1000 + seed);
        const int n = t.oracle_sys.n;

        Eigen::MatrixXd D = detail::slope_penalty_matrix(n);
        auto newton = detail::newton_log_slope(t.T, D, t.rgb, {}, 1e-8, 1e-8, 100);
        REQUIRE(newton.converged);

        auto got = oracle::brute_force_oracle({t.rgb[0], t.rgb[1], t.rgb[2]}, t.oracle_sys,
                                              Objective::log_slope, to_std(t.rho_true));
        for (int i = 0; i < n; ++i)
            REQUIRE(std::log(got[i]) == Catch::Approx(newton.z[i]).margin(1e-6));
    }
}

TEST_CASE("oracle is deterministic") {
    toys::Toy t = toys::make_toy(1234);
    auto a = oracle::brute_force_oracle({t.rgb[0], t.rgb[1], t.rgb[2]}, t.oracle_sys,
                                        Objective::slope);
    auto b = oracle::brute_force_oracle({t.rgb[0], t.rgb[1], t.rgb[2]}, t.oracle_sys,
                                        Objective::slope);
    REQUIRE(a == b);
}

TEST_CASE("oracle input validation") {
    toys::Toy t = toys::make_toy(7);
    std::array<double, 3> rgb{t.rgb[0], t.rgb[1], t.rgb[2]};

    SECTION("band count out of range") {
        oracle::ToySystem big{12, std::vector<double>(36, 0.5)};
        REQUIRE_THROWS_AS(oracle::brute_force_oracle(rgb, big, Objective::slope),
                          std::invalid_argument);
    }
    SECTION("storage mismatch") {
        oracle::ToySystem bad{6, std::vector<double>(17, 0.5)};
        REQUIRE_THROWS_AS(oracle::brute_force_oracle(rgb, bad, Objective::slope),
                          std::invalid_argument);
    }
    SECTION("infeasible start") {
        std::vector<double> start(6, 10.0);
        REQUIRE_THROWS_AS(
            oracle::brute_force_oracle(rgb, t.oracle_sys, Objective::slope, start),
            std::invalid_argument);
    }
    SECTION("wrong-sized start") {
        std::vector<double> start(5, 0.5);
        REQUIRE_THROWS_AS(
            oracle::brute_force_oracle(rgb, t.oracle_sys, Objective::slope, start),
            std::invalid_argument);
    }
    SECTION("log objective needs a positive start") {
        // build a feasible start with a negative coordinate by walking along
        // a nullspace direction from the known positive feasible point
        auto q = oracle::detail::orthonormal_rows(t.oracle_sys);
        std::vector<double> d(6);
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (auto& v : d) v = u(rng);
        oracle::detail::project_out(d, q, 6);

        std::vector<double> start = to_std(t.rho_true);
        int which = 0;
        for (int i = 1; i < 6; ++i)
            if (std::abs(d[i]) > std::abs(d[which])) which = i;
        REQUIRE(std::abs(d[which]) > 1e-6);
        double step = 1.5 * start[which] / d[which];
        for (int i = 0; i < 6; ++i) start[i] -= step * d[i];
        REQUIRE(start[which] < 0.0);

        auto y = oracle::detail::apply(t.oracle_sys, start);
        for (int r = 0; r < 3; ++r) REQUIRE(y[r] == Catch::Approx(rgb[r]).margin(1e-10));

        REQUIRE_THROWS_AS(
            oracle::brute_force_oracle(rgb, t.oracle_sys, Objective::log_slope, start),
            std::invalid_argument);
    }
    SECTION("rank-deficient constraint rows") {
        oracle::ToySystem flat{6, std::vector<double>(18, 0.25)};
        REQUIRE_THROWS_AS(oracle::brute_force_oracle({1, 1, 1}, flat, Objective::slope),
                          std::runtime_error);
    }
}
