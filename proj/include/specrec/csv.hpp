#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "harness.hpp"

// Text formats. All emission goes through std::to_chars and all parsing
// through std::from_chars, so output is locale-independent: '.' decimal
// separator and LF line endings regardless of environment.

namespace specrec::csv {

// Up to 6 significant digits, %g style.
inline std::string format_g6(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

inline std::string format_long(long v) {
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

inline bool parse_double(std::string_view s, double& out) {
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline bool parse_int(std::string_view s, int& out) {
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace detail

// --- single reflectance curve ---

inline constexpr std::string_view kReflectanceHeader = "wavelength_nm,reflectance";

inline void write_reflectance_csv(std::ostream& os, const ReflectanceCurve& rho) {
    os << kReflectanceHeader << '\n';
    for (int i = 0; i < kBands; ++i)
        os << wavelength_of_band(i) << ',' << format_g6(rho[i]) << '\n';
}

inline ReflectanceCurve read_reflectance_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || detail::trim(line) != kReflectanceHeader)
        throw std::runtime_error("reflectance csv: bad header");
    ReflectanceCurve rho{};
    for (int i = 0; i < kBands; ++i) {
        if (!std::getline(is, line)) throw std::runtime_error("reflectance csv: short file");
        auto fields = detail::split(line, ',');
        int nm = 0;
        double val = 0;
        if (fields.size() != 2 || !detail::parse_int(fields[0], nm) ||
            !detail::parse_double(fields[1], val) || nm != wavelength_of_band(i))
            throw std::runtime_error("reflectance csv: malformed row " + std::to_string(i + 1));
        rho[i] = val;
    }
    while (std::getline(is, line))
        if (!detail::trim(line).empty()) throw std::runtime_error("reflectance csv: trailing rows");
    return rho;
}

// --- measured dataset ---

inline std::string dataset_header() {
    std::string h = "sample_id";
    for (int i = 0; i < kBands; ++i) h += ",r" + std::to_string(wavelength_of_band(i));
    return h;
}

struct DatasetParse {
    std::vector<MeasuredSample> samples;
    std::vector<std::string> warnings;
};

inline DatasetParse read_dataset_csv(std::istream& is) {
    DatasetParse out;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("dataset csv: empty file");
    auto header = detail::split(line, ',');
    if (header.size() != kBands + 1 || header[0] != "sample_id")
        throw std::runtime_error("dataset csv: expected header " + dataset_header());
    long row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split(line, ',');
        if (fields.size() != kBands + 1) {
            out.warnings.push_back("row " + std::to_string(row) + ": wrong column count, skipped");
            continue;
        }
        MeasuredSample s;
        s.sample_id = std::string(fields[0]);
        bool ok = !s.sample_id.empty();
        for (int i = 0; ok && i < kBands; ++i) {
            ok = detail::parse_double(fields[i + 1], s.rho_measured[i]) &&
                 std::isfinite(s.rho_measured[i]);
        }
        if (!ok) {
            out.warnings.push_back("row " + std::to_string(row) + ": malformed value, skipped");
            continue;
        }
        out.samples.push_back(std::move(s));
    }
    return out;
}

inline void write_dataset_csv(std::ostream& os, const std::vector<MeasuredSample>& samples) {
    os << dataset_header() << '\n';
    for (const auto& s : samples) {
        os << s.sample_id;
        for (int i = 0; i < kBands; ++i) os << ',' << format_g6(s.rho_measured[i]);
        os << '\n';
    }
}

// --- reports ---

inline constexpr std::string_view kSweepHeader =
    "method,run_count,max_rho,min_rho,num_above_1,num_below_0,max_iter,mean_iter,non_converged";

inline void write_sweep_csv(std::ostream& os, std::vector<SweepReport> reports) {
    std::sort(reports.begin(), reports.end(),
              [](const SweepReport& a, const SweepReport& b) { return a.method < b.method; });
    os << kSweepHeader << '\n';
    for (const SweepReport& r : reports) {
        os << r.method << ',' << format_long(r.run_count) << ',' << format_g6(r.max_rho) << ','
           << format_g6(r.min_rho) << ',' << format_long(r.num_above_1) << ','
           << format_long(r.num_below_0) << ',' << r.max_iter << ',' << format_g6(r.mean_iter)
           << ',' << format_long(r.non_converged) << '\n';
    }
}

inline constexpr std::string_view kRmmHeader = "method,sample_id,rmm";

inline void write_rmm_csv(std::ostream& os, const RmmReport& report) {
    os << kRmmHeader << '\n';
    for (const auto& [id, score] : report.per_sample)
        os << report.method << ',' << id << ',' << format_g6(score) << '\n';
}

// Row-major dump, 6 significant digits.
inline void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) os << ',';
            os << format_g6(m(r, c));
        }
        os << '\n';
    }
}

}  // namespace specrec::csv
