#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "solvers.hpp"

namespace specrec {

// Luminous-efficiency weights for the reflectance match measure. Default is
// the ybar color matching function, which is the photopic luminosity curve.
struct RmmWeights {
    std::array<double, kBands> lum{};
};

inline RmmWeights default_rmm_weights() {
    RmmWeights w;
    for (int i = 0; i < kBands; ++i) w.lum[i] = constants::kCmf[kBands + i];
    return w;
}

// Weighted absolute difference between a measured and a computed curve.
inline double rmm(const ReflectanceCurve& measured, const ReflectanceCurve& computed,
                  const RmmWeights& weights) {
    double s = 0;
    for (int i = 0; i < kBands; ++i) s += weights.lum[i] * std::abs(measured[i] - computed[i]);
    return s;
}

struct MeasuredSample {
    std::string sample_id;
    ReflectanceCurve rho_measured{};
    SrgbTriplet srgb{};  // computed during gamut filtering, not stored in files
    bool in_gamut = false;
};

// A curve is in gamut when every unrounded companded channel of T rho lies
// in [0,1]. Companding is monotone, so this is equivalent to the linear test.
inline bool curve_in_gamut(const ReflectanceCurve& rho, const ColorSystem& sys) {
    LinearRgb lin = linear_rgb_of(rho, sys);
    for (double v : {lin.r, lin.g, lin.b}) {
        double enc = compand_channel(v);
        if (!(enc >= 0.0 && enc <= 1.0)) return false;
    }
    return true;
}

struct GamutPartition {
    std::vector<MeasuredSample> in_gamut;
    std::vector<MeasuredSample> out_of_gamut;
    std::vector<std::string> rejected;  // sample ids with non-finite curves
};

inline GamutPartition gamut_filter(const std::vector<MeasuredSample>& samples,
                                   const ColorSystem& sys) {
    GamutPartition part;
    for (const MeasuredSample& s : samples) {
        bool finite = true;
        for (double v : s.rho_measured) finite = finite && std::isfinite(v);
        if (!finite) {
            part.rejected.push_back(s.sample_id);
            continue;
        }
        MeasuredSample copy = s;
        copy.in_gamut = curve_in_gamut(s.rho_measured, sys);
        if (copy.in_gamut) {
            copy.srgb = reflectance_to_srgb(s.rho_measured, sys);
            part.in_gamut.push_back(std::move(copy));
        } else {
            part.out_of_gamut.push_back(std::move(copy));
        }
    }
    return part;
}

struct SweepReport {
    std::string method;
    long run_count = 0;
    double max_rho = 0;
    double min_rho = 0;
    long num_above_1 = 0;  // curves whose max exceeds 1 by more than 1e-12
    long num_below_0 = 0;  // curves whose min is negative
    int max_iter = 0;
    double mean_iter = 0;
    long non_converged = 0;

    // Extended telemetry, not part of the report CSV.
    long single_region = 0;  // of the above-1 curves: one contiguous >1 run
    long two_region = 0;
    long multi_region = 0;
    long pre_clamp_above = 0;  // ILSS: first-pass violation flags
    long pre_clamp_below = 0;
    long roundtrip_mismatches = 0;
    std::vector<SrgbTriplet> mismatch_examples;  // first few per worker
};

// Lattice channel values 0, step, 2*step, ..., 255.
inline std::vector<int> lattice_values(int step) {
    if (step < 1 || 255 % step != 0)
        throw std::invalid_argument("sweep step must divide 255");
    std::vector<int> v;
    for (int x = 0; x <= 255; x += step) v.push_back(x);
    return v;
}

namespace detail {

// Per-worker accumulator. Every merge operation is exact (integer sums,
// max/min), so the merged report is identical for any worker count or
// schedule.
struct SweepAccum {
    double max_rho = -std::numeric_limits<double>::infinity();
    double min_rho = std::numeric_limits<double>::infinity();
    long above = 0, below = 0;
    long single = 0, two = 0, multi = 0;
    long iter_sum = 0, iter_count = 0;
    int iter_max = 0;
    long nonconv = 0;
    long pre_above = 0, pre_below = 0;
    long rt_mismatch = 0;
    std::vector<SrgbTriplet> examples;

    void merge(const SweepAccum& o) {
        max_rho = std::max(max_rho, o.max_rho);
        min_rho = std::min(min_rho, o.min_rho);
        above += o.above;
        below += o.below;
        single += o.single;
        two += o.two;
        multi += o.multi;
        iter_sum += o.iter_sum;
        iter_count += o.iter_count;
        iter_max = std::max(iter_max, o.iter_max);
        nonconv += o.nonconv;
        pre_above += o.pre_above;
        pre_below += o.pre_below;
        rt_mismatch += o.rt_mismatch;
        for (const auto& t : o.examples)
            if (examples.size() < 8) examples.push_back(t);
    }
};

inline int headline_iterations(Method method, const SolveOutcome& out) {
    // The comparison table reports the outer count for ILLSS and the pass
    // count for ILSS; LLSS has only the Newton count.
    return method == Method::llss ? out.inner_iterations : out.outer_iterations;
}

inline void accumulate_sample(SweepAccum& acc, Method method, const SrgbTriplet& s,
                              const SolveOutcome& out, const ColorSystem& sys) {
    acc.pre_above += out.first_pass_above_one ? 1 : 0;
    acc.pre_below += out.first_pass_below_zero ? 1 : 0;
    if (!out.converged) {
        ++acc.nonconv;
        return;
    }
    double mx = *std::max_element(out.rho.begin(), out.rho.end());
    double mn = *std::min_element(out.rho.begin(), out.rho.end());
    acc.max_rho = std::max(acc.max_rho, mx);
    acc.min_rho = std::min(acc.min_rho, mn);
    if (mx - 1.0 > 1e-12) {
        ++acc.above;
        int regions = 0;
        bool prev = false;
        for (double v : out.rho) {
            bool gt = v > 1.0;
            if (gt && !prev) ++regions;
            prev = gt;
        }
        if (regions == 1)
            ++acc.single;
        else if (regions == 2)
            ++acc.two;
        else
            ++acc.multi;
    }
    if (mn < 0.0) ++acc.below;
    int it = headline_iterations(method, out);
    acc.iter_sum += it;
    acc.iter_max = std::max(acc.iter_max, it);
    ++acc.iter_count;
    if (reflectance_to_srgb(out.rho, sys) != s) {
        ++acc.rt_mismatch;
        if (acc.examples.size() < 8) acc.examples.push_back(s);
    }
}

}  // namespace detail

// Runs the method over the whole lattice and aggregates the comparison-table
// statistics plus round-trip checks. Fan-out is per r-slice; the aggregation
// is schedule-independent. `progress(done, total)` reports finished slices.
inline SweepReport sweep(Method method, int step, const ColorSystem& sys,
                         const SolverOptions& opts = {}, int threads = 0,
                         const std::function<void(long, long)>& progress = {}) {
    const std::vector<int> vals = lattice_values(step);
    const long per_channel = static_cast<long>(vals.size());

    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp<int>(threads, 1, static_cast<int>(vals.size()));

    std::vector<detail::SweepAccum> partial(threads);
    std::mutex progress_mutex;
    long done_slices = 0;

    auto worker = [&](int id) {
        detail::SweepAccum& acc = partial[id];
        for (size_t ri = id; ri < vals.size(); ri += threads) {
            for (int g : vals) {
                for (int b : vals) {
                    SrgbTriplet s{vals[ri], g, b};
                    SolveOutcome out = solve(method, s, sys, opts);
                    detail::accumulate_sample(acc, method, s, out, sys);
                }
            }
            if (progress) {
                std::lock_guard<std::mutex> lock(progress_mutex);
                progress(++done_slices, per_channel);
            }
        }
    };

    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker, i);
        for (auto& t : pool) t.join();
    }

    detail::SweepAccum total;
    for (const auto& acc : partial) total.merge(acc);

    SweepReport rep;
    rep.method = std::string(method_name(method));
    rep.run_count = per_channel * per_channel * per_channel;
    rep.max_rho = total.max_rho;
    rep.min_rho = total.min_rho;
    rep.num_above_1 = total.above;
    rep.num_below_0 = total.below;
    rep.max_iter = total.iter_max;
    rep.mean_iter = total.iter_count ? static_cast<double>(total.iter_sum) / total.iter_count : 0.0;
    rep.non_converged = total.nonconv;
    rep.single_region = total.single;
    rep.two_region = total.two;
    rep.multi_region = total.multi;
    rep.pre_clamp_above = total.pre_above;
    rep.pre_clamp_below = total.pre_below;
    rep.roundtrip_mismatches = total.rt_mismatch;
    rep.mismatch_examples = total.examples;
    return rep;
}

struct RmmReport {
    std::string method;
    std::vector<std::pair<std::string, double>> per_sample;
    double max_rmm = 0;
    double mean_rmm = 0;
    long non_converged = 0;
};

// Reconstructs every (pre-filtered, in-gamut) sample from its sRGB triplet
// and scores the reconstruction against the measured curve.
inline RmmReport compare_dataset(const std::vector<MeasuredSample>& in_gamut, Method method,
                                 const RmmWeights& weights, const ColorSystem& sys,
                                 const SolverOptions& opts = {}) {
    RmmReport rep;
    rep.method = std::string(method_name(method));
    double sum = 0;
    for (const MeasuredSample& s : in_gamut) {
        SrgbTriplet srgb = reflectance_to_srgb(s.rho_measured, sys);
        SolveOutcome out = solve(method, srgb, sys, opts);
        if (!out.converged) {
            ++rep.non_converged;
            continue;
        }
        double score = rmm(s.rho_measured, out.rho, weights);
        rep.per_sample.emplace_back(s.sample_id, score);
        rep.max_rmm = std::max(rep.max_rmm, score);
        sum += score;
    }
    if (!rep.per_sample.empty()) rep.mean_rmm = sum / static_cast<double>(rep.per_sample.size());
    return rep;
}

}  // namespace specrec
