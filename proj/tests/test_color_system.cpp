#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "reference_tables.hpp"
#include "specrec/color_system.hpp"

using namespace specrec;

TEST_CASE("normalizer w") {
    const ColorSystem& sys = default_system();
    REQUIRE(sys.w == Catch::Approx(10.5677).margin(1e-4));
    // tighter bound derived from the published tables
    REQUIRE(sys.w == Catch::Approx(10.56773330).margin(5e-5));
}

TEST_CASE("T matches the published table to print precision") {
    const ColorSystem& sys = default_system();
    // spot values quoted in the text (1-based [1,1] and [3,36])
    REQUIRE(sys.T(0, 0) == Catch::Approx(5.47813e-05).epsilon(5e-6));
    REQUIRE(sys.T(2, 35) == Catch::Approx(-1.71858e-06).epsilon(5e-6));
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < kBands; ++c) {
            double printed = testref::kPrintedT[r * kBands + c];
            REQUIRE(sys.T(r, c) == Catch::Approx(printed).epsilon(5e-6));
        }
}

TEST_CASE("T rows sum to one") {
    const ColorSystem& sys = default_system();
    for (int r = 0; r < 3; ++r) REQUIRE(sys.T.row(r).sum() == Catch::Approx(1.0).margin(1e-4));
}

TEST_CASE("slope penalty matrix structure") {
    const ColorSystem& sys = default_system();
    const auto& D = sys.D;
    REQUIRE(D.rows() == kBands);
    REQUIRE(D(0, 0) == 2.0);
    REQUIRE(D(kBands - 1, kBands - 1) == 2.0);
    for (int i = 1; i + 1 < kBands; ++i) REQUIRE(D(i, i) == 4.0);
    for (int i = 0; i + 1 < kBands; ++i) {
        REQUIRE(D(i, i + 1) == -2.0);
        REQUIRE(D(i + 1, i) == -2.0);
    }
    REQUIRE(D.isApprox(D.transpose()));
    for (int i = 0; i < kBands; ++i) REQUIRE(D.row(i).sum() == 0.0);

    // D annihilates constants and its quadratic form is twice the summed
    // squared slope
    Eigen::VectorXd c = Eigen::VectorXd::Constant(kBands, 3.7);
    REQUIRE((D * c).cwiseAbs().maxCoeff() == 0.0);

    std::mt19937 rng(20417);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int trial = 0; trial < 25; ++trial) {
        Eigen::VectorXd rho(kBands);
        for (int i = 0; i < kBands; ++i) rho[i] = dist(rng);
        double quad = rho.dot(D * rho);
        double slopes = 0;
        for (int i = 0; i + 1 < kBands; ++i) {
            double d = rho[i + 1] - rho[i];
            slopes += d * d;
        }
        REQUIRE(quad == Catch::Approx(2.0 * slopes).margin(1e-9));
        REQUIRE(quad >= -1e-12);
    }
}

TEST_CASE("constraint blocks invert T") {
    const ColorSystem& sys = default_system();
    Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
    REQUIRE(((sys.T * sys.B12) - I).cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE(((sys.T * sys.pinv_T) - I).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("block inverse identities") {
    const ColorSystem& sys = default_system();
    // [B11 B12; B21 B22] [D T'; T 0] = I  =>  B11 D + B12 T = I, B11 T' = 0
    Eigen::MatrixXd I36 = Eigen::MatrixXd::Identity(kBands, kBands);
    REQUIRE((sys.B11 * sys.D + sys.B12 * sys.T - I36).cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE((sys.T * sys.B11).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pinv_T and B12 match the published tables") {
    const ColorSystem& sys = default_system();
    for (int r = 0; r < kBands; ++r)
        for (int c = 0; c < 3; ++c) {
            REQUIRE(sys.pinv_T(r, c) ==
                    Catch::Approx(testref::kPrintedPinvT[r * 3 + c]).margin(5e-5));
            REQUIRE(sys.B12(r, c) == Catch::Approx(testref::kPrintedB12[r * 3 + c]).margin(5e-5));
        }
}

TEST_CASE("reflectance to sRGB endpoints") {
    const ColorSystem& sys = default_system();
    ReflectanceCurve ones;
    ones.fill(1.0);
    REQUIRE((reflectance_to_srgb(ones, sys) == SrgbTriplet{255, 255, 255}));

    ReflectanceCurve zeros{};
    REQUIRE((reflectance_to_srgb(zeros, sys) == SrgbTriplet{0, 0, 0}));

    ReflectanceCurve half;
    half.fill(0.5);
    SrgbTriplet gray = reflectance_to_srgb(half, sys);
    REQUIRE(gray.r == gray.g);
    REQUIRE(gray.g == gray.b);
    REQUIRE(gray.r == 188);
}

TEST_CASE("assembly rejects bad inputs") {
    Eigen::Matrix3d M = Eigen::Matrix3d::Identity();
    Eigen::MatrixXd A = Eigen::MatrixXd::Constant(3, 6, 0.5);
    Eigen::VectorXd W = Eigen::VectorXd::Ones(6);

    SECTION("shape mismatch") {
        Eigen::VectorXd W5 = Eigen::VectorXd::Ones(5);
        REQUIRE_THROWS_AS(assemble_system(M, A, W5), std::invalid_argument);
    }
    SECTION("negative illuminant") {
        Eigen::VectorXd Wneg = W;
        Wneg[2] = -0.1;
        REQUIRE_THROWS_AS(assemble_system(M, A, Wneg), std::invalid_argument);
    }
    SECTION("nonpositive normalizer") {
        Eigen::MatrixXd A0 = A;
        A0.row(1).setZero();
        REQUIRE_THROWS_AS(assemble_system(M, A0, W), std::runtime_error);
    }
    SECTION("rank-deficient T") {
        Eigen::MatrixXd Aflat = A;
        Aflat.row(0) = Aflat.row(1);
        Aflat.row(2) = Aflat.row(1);  // all rows equal -> T rank 1
        REQUIRE_THROWS_AS(assemble_system(M, Aflat, W), std::runtime_error);
    }
}

TEST_CASE("toy-size assembly works") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(0.05, 1.0);
    Eigen::Matrix3d M = Eigen::Matrix3d::Identity();
    Eigen::MatrixXd A(3, 6);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 6; ++c) A(r, c) = dist(rng);
    Eigen::VectorXd W = Eigen::VectorXd::Ones(6);
    ColorSystem sys = assemble_system(M, A, W);
    REQUIRE(sys.bands() == 6);
    REQUIRE(((sys.T * sys.B12) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE((sys.T * sys.B11).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("default system is a shared singleton") {
    REQUIRE(&default_system() == &default_system());
}
