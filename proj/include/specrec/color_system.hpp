#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "constants.hpp"
#include "gamma.hpp"
#include "types.hpp"

namespace specrec {

// Every matrix the solvers need, assembled once. Immutable afterwards and
// safe to share across threads. Sizes are dynamic so the same assembly and
// solver code paths can be exercised on small toy systems in tests; the
// production system has 36 bands.
struct ColorSystem {
    Eigen::Matrix3d M;        // XYZ -> linear rgb
    Eigen::MatrixXd A_prime;  // 3 x n color matching functions, rows xbar ybar zbar
    Eigen::VectorXd W;        // illuminant spectral power per band
    double w = 0;             // normalizer, row 2 of A_prime against W
    Eigen::MatrixXd T;        // 3 x n, reflectance -> linear rgb
    Eigen::MatrixXd D;        // n x n tridiagonal slope penalty
    Eigen::MatrixXd B11;      // n x n block of the bordered inverse
    Eigen::MatrixXd B12;      // n x 3 block: the LSS map
    Eigen::MatrixXd pinv_T;   // n x 3, T'(TT')^-1: the LLS map

    int bands() const { return static_cast<int>(W.size()); }
};

namespace detail {

// Tridiagonal slope penalty: diag (2,4,...,4,2), off-diagonals -2. Rows sum
// to zero and rho'D rho = 2 sum (rho_{i+1}-rho_i)^2.
inline Eigen::MatrixXd slope_penalty_matrix(int n) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) D(i, i) = 4.0;
    D(0, 0) = D(n - 1, n - 1) = 2.0;
    for (int i = 0; i + 1 < n; ++i) D(i, i + 1) = D(i + 1, i) = -2.0;
    return D;
}

// Inverse of the bordered system [D T'; T 0]. Partial-pivot LU with an
// explicit residual check, since PartialPivLU itself never reports rank loss.
inline Eigen::MatrixXd bordered_inverse(const Eigen::MatrixXd& D, const Eigen::MatrixXd& T) {
    const int n = static_cast<int>(T.cols());
    const int k = static_cast<int>(T.rows());
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n + k, n + k);
    block.topLeftCorner(n, n) = D;
    block.topRightCorner(n, k) = T.transpose();
    block.bottomLeftCorner(k, n) = T;
    Eigen::MatrixXd inv = block.partialPivLu().inverse();
    double resid = (block * inv - Eigen::MatrixXd::Identity(n + k, n + k)).cwiseAbs().maxCoeff();
    if (!(resid < 1e-6))
        throw std::runtime_error("assembly failed: bordered slope system is singular");
    return inv;
}

}  // namespace detail

inline ColorSystem assemble_system(const Eigen::Matrix3d& M, const Eigen::MatrixXd& A_prime,
                                   const Eigen::VectorXd& W) {
    if (A_prime.rows() != 3 || A_prime.cols() != W.size() || W.size() < 3)
        throw std::invalid_argument("assembly failed: A_prime must be 3 x n with matching W");
    if ((W.array() < 0).any())
        throw std::invalid_argument("assembly failed: W has negative entries");

    ColorSystem sys;
    sys.M = M;
    sys.A_prime = A_prime;
    sys.W = W;
    sys.w = A_prime.row(1).dot(W);
    if (!(sys.w > 0))
        throw std::runtime_error("assembly failed: normalizer w is not positive");

    const int n = static_cast<int>(W.size());
    sys.T = M * A_prime * W.asDiagonal() / sys.w;
    sys.D = detail::slope_penalty_matrix(n);

    Eigen::MatrixXd inv = detail::bordered_inverse(sys.D, sys.T);
    sys.B11 = inv.topLeftCorner(n, n);
    sys.B12 = inv.topRightCorner(n, 3);

    Eigen::Matrix3d G = sys.T * sys.T.transpose();
    Eigen::Matrix3d Ginv = G.partialPivLu().inverse();
    if (!((G * Ginv - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-8))
        throw std::runtime_error("assembly failed: T does not have full row rank");
    sys.pinv_T = sys.T.transpose() * Ginv;
    return sys;
}

// The 36-band CIE 1931 / D65 / sRGB system used everywhere outside tests.
inline const ColorSystem& default_system() {
    static const ColorSystem sys = [] {
        Eigen::Matrix3d M;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) M(r, c) = constants::kXyzToRgb[3 * r + c];
        Eigen::MatrixXd A(3, constants::kBandCount);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < constants::kBandCount; ++c)
                A(r, c) = constants::kCmf[r * constants::kBandCount + c];
        Eigen::VectorXd W(constants::kBandCount);
        for (int c = 0; c < constants::kBandCount; ++c) W(c) = constants::kIlluminantD65[c];
        return assemble_system(M, A, W);
    }();
    return sys;
}

inline Eigen::Vector3d to_vector(const LinearRgb& rgb) { return {rgb.r, rgb.g, rgb.b}; }

inline LinearRgb linear_rgb_of(const ReflectanceCurve& rho, const ColorSystem& sys) {
    Eigen::Map<const Eigen::VectorXd> r(rho.data(), kBands);
    Eigen::Vector3d rgb = sys.T * r;
    return {rgb[0], rgb[1], rgb[2]};
}

inline SrgbTriplet reflectance_to_srgb(const ReflectanceCurve& rho, const ColorSystem& sys) {
    return encode_gamma(linear_rgb_of(rho, sys));
}

}  // namespace specrec
