#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace specrec {

inline constexpr int kBands = 36;

// 380-730 nm in 10 nm bands. Band i (0-based) covers 380 + 10*i nm.
struct SpectralGrid {
    int start_nm = 380;
    int end_nm = 730;
    int step_nm = 10;
    int band_count = kBands;
};

constexpr int wavelength_of_band(int i) { return 380 + 10 * i; }

// Dimensionless reflectance per band. Range depends on the method that
// produced it: LLS/LSS may leave [0,1], LLSS is strictly positive,
// ILLSS lands in (0,1], ILSS in [rho_min, 1].
using ReflectanceCurve = std::array<double, kBands>;

struct SrgbTriplet {
    int r = 0, g = 0, b = 0;
    friend bool operator==(const SrgbTriplet&, const SrgbTriplet&) = default;
};

struct LinearRgb {
    double r = 0, g = 0, b = 0;
};

enum class Method { lls, lss, llss, illss, ilss };

inline constexpr std::array<Method, 5> kAllMethods = {
    Method::lls, Method::lss, Method::llss, Method::illss, Method::ilss};

constexpr std::string_view method_name(Method m) {
    switch (m) {
        case Method::lls: return "lls";
        case Method::lss: return "lss";
        case Method::llss: return "llss";
        case Method::illss: return "illss";
        case Method::ilss: return "ilss";
    }
    return "?";
}

inline std::optional<Method> parse_method(std::string_view name) {
    for (Method m : kAllMethods)
        if (name == method_name(m)) return m;
    return std::nullopt;
}

struct SolverOptions {
    double ftol = 1e-8;      // residual tolerance, all |F| below
    double deltatol = 1e-8;  // Newton step tolerance, all |delta| below
    int max_newton_iters_llss = 100;
    int max_newton_iters_illss = 50;  // inner loop cap
    int max_outer_iters = 10;         // constraint-update passes
    double rho_min_illss = 0.0001;    // flat black curve for the log methods
    double rho_min_ilss = 0.00001;    // ILSS lower clamp and black curve
};

struct SolveOutcome {
    ReflectanceCurve rho{};
    bool converged = false;
    int inner_iterations = 0;  // total Newton steps across all passes
    int outer_iterations = 0;  // constraint-update passes; 0 for non-iterative methods
    std::vector<int> fixed_at_one;  // 0-based band indices held at 1
    std::vector<int> fixed_at_min;  // 0-based band indices held at the lower clamp

    // Telemetry beyond the headline result.
    std::array<double, 3> lambda{};  // final constraint multipliers (log methods)
    double rgb_residual = 0.0;       // max |T rho - rgb| at exit
    // ILSS only: LSS-convention violation flags of the unconstrained first
    // pass B12*rgb, defined for every input including the special cases.
    bool first_pass_above_one = false;
    bool first_pass_below_zero = false;
    // Per-pass snapshots of the fixed sets, for monotonicity checks.
    std::vector<std::vector<int>> fixed_one_history;
    std::vector<std::vector<int>> fixed_min_history;
};

}  // namespace specrec
