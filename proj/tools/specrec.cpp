// Command-line surface: single solves, lattice sweeps, dataset RMM scoring,
// constant export, and round-trip verification.
//
// Exit codes: 0 success, 2 argument/parse failure, 3 unknown method or
// matrix name, 4 non-convergence, 5 I/O failure, 6 empty in-gamut set,
// 7 round-trip mismatch.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specrec/specrec.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitUnknownName = 3;
constexpr int kExitNonConverged = 4;
constexpr int kExitIo = 5;
constexpr int kExitEmptyInput = 6;
constexpr int kExitRoundtrip = 7;

std::optional<specrec::SrgbTriplet> parse_triplet(const std::string& arg) {
    specrec::SrgbTriplet t;
    if (!arg.empty() && arg[0] == '#') {
        if (arg.size() != 7) return std::nullopt;
        int v[3];
        for (int i = 0; i < 3; ++i) {
            int hi, lo;
            auto hex = [](char c) {
                if (c >= '0' && c <= '9') return c - '0';
                if (c >= 'a' && c <= 'f') return c - 'a' + 10;
                if (c >= 'A' && c <= 'F') return c - 'A' + 10;
                return -1;
            };
            hi = hex(arg[1 + 2 * i]);
            lo = hex(arg[2 + 2 * i]);
            if (hi < 0 || lo < 0) return std::nullopt;
            v[i] = 16 * hi + lo;
        }
        t = {v[0], v[1], v[2]};
        return t;
    }
    int vals[3];
    size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        size_t next = arg.find(',', pos);
        std::string part = arg.substr(pos, next == std::string::npos ? next : next - pos);
        if (part.empty() || (next == std::string::npos) != (i == 2)) return std::nullopt;
        try {
            size_t used = 0;
            vals[i] = std::stoi(part, &used);
            if (used != part.size()) return std::nullopt;
        } catch (...) {
            return std::nullopt;
        }
        if (vals[i] < 0 || vals[i] > 255) return std::nullopt;
        pos = next + 1;
    }
    t = {vals[0], vals[1], vals[2]};
    return t;
}

// Writes through a file or stdout; reports open/write failures.
int with_output(const std::string& path, const std::function<void(std::ostream&)>& emit) {
    if (path.empty()) {
        emit(std::cout);
        return std::cout ? 0 : kExitIo;
    }
    std::ofstream os(path);
    if (!os) {
        std::cerr << "error: cannot open " << path << " for writing\n";
        return kExitIo;
    }
    emit(os);
    os.flush();
    if (!os) {
        std::cerr << "error: write to " << path << " failed\n";
        return kExitIo;
    }
    return 0;
}

std::vector<specrec::Method> parse_method_list(const std::string& arg, bool& ok) {
    using namespace specrec;
    ok = true;
    std::vector<Method> methods;
    if (arg == "all") {
        methods.assign(kAllMethods.begin(), kAllMethods.end());
    } else {
        size_t pos = 0;
        while (pos <= arg.size()) {
            size_t next = arg.find(',', pos);
            std::string name =
                arg.substr(pos, next == std::string::npos ? next : next - pos);
            auto m = parse_method(name);
            if (!m) {
                std::cerr << "error: unknown method '" << name << "'\n";
                ok = false;
                return {};
            }
            methods.push_back(*m);
            if (next == std::string::npos) break;
            pos = next + 1;
        }
    }
    std::sort(methods.begin(), methods.end(), [](auto a, auto b) {
        return specrec::method_name(a) < specrec::method_name(b);
    });
    methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
    return methods;
}

void print_solve_telemetry(const specrec::SolveOutcome& out, specrec::Method m) {
    using namespace specrec;
    std::cerr << method_name(m) << ": " << (out.converged ? "converged" : "NOT CONVERGED");
    if (m == Method::llss || m == Method::illss)
        std::cerr << ", newton steps " << out.inner_iterations;
    if (m == Method::illss || m == Method::ilss)
        std::cerr << ", passes " << out.outer_iterations;
    auto list_bands = [](const std::vector<int>& idx) {
        std::string s;
        for (int i : idx) {
            if (!s.empty()) s += ' ';
            s += std::to_string(specrec::wavelength_of_band(i));
        }
        return s;
    };
    if (!out.fixed_at_one.empty()) std::cerr << ", fixed at 1 [nm]: " << list_bands(out.fixed_at_one);
    if (!out.fixed_at_min.empty())
        std::cerr << ", fixed at min [nm]: " << list_bands(out.fixed_at_min);
    std::cerr << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    using namespace specrec;

    CLI::App app{"Reflectance curve reconstruction from sRGB triplets"};
    app.require_subcommand(1);

    // solve
    std::string solve_srgb, solve_method, solve_output;
    int solve_max_newton = 0;
    auto* cmd_solve = app.add_subcommand("solve", "Reconstruct one curve from an sRGB triplet");
    cmd_solve->add_option("srgb", solve_srgb, "Triplet r,g,b (0-255) or #RRGGBB")->required();
    cmd_solve->add_option("--method", solve_method, "lls, lss, llss, illss or ilss")->required();
    cmd_solve->add_option("-o,--output", solve_output, "Write the curve CSV here (default stdout)");
    cmd_solve->add_option("--max-newton", solve_max_newton,
                          "Override the Newton iteration cap (testing aid)");

    // sweep
    int sweep_step = 5, sweep_threads = 0;
    std::string sweep_methods = "all", sweep_report;
    auto* cmd_sweep = app.add_subcommand("sweep", "Run a method over the whole sRGB lattice");
    cmd_sweep->add_option("--step", sweep_step, "Lattice step; must divide 255");
    cmd_sweep->add_option("--methods", sweep_methods, "Comma-separated method names or 'all'");
    cmd_sweep->add_option("--report", sweep_report, "Write the report CSV here (default stdout)");
    cmd_sweep->add_option("--threads", sweep_threads, "Worker threads (default: all cores)");

    // rmm
    std::string rmm_dataset, rmm_method, rmm_report;
    auto* cmd_rmm = app.add_subcommand("rmm", "Score reconstructions against measured curves");
    cmd_rmm->add_option("--dataset", rmm_dataset, "Measured dataset CSV")->required();
    cmd_rmm->add_option("--method", rmm_method, "Reconstruction method")->required();
    cmd_rmm->add_option("--report", rmm_report, "Write per-sample CSV here (default stdout)");

    // matrices
    std::string mat_name, mat_output;
    auto* cmd_mat = app.add_subcommand("matrices", "Export an assembled constant matrix as CSV");
    cmd_mat->add_option("name", mat_name, "M, Aprime, W, T, pinvT or B12")->required();
    cmd_mat->add_option("-o,--output", mat_output, "Write here (default stdout)");

    // roundtrip
    int rt_step = 5, rt_threads = 0;
    std::string rt_method;
    auto* cmd_rt = app.add_subcommand("roundtrip", "Verify metamer exactness over the lattice");
    cmd_rt->add_option("--step", rt_step, "Lattice step; must divide 255");
    cmd_rt->add_option("--method", rt_method, "Method to verify")->required();
    cmd_rt->add_option("--threads", rt_threads, "Worker threads (default: all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    const ColorSystem& sys = default_system();

    try {
        if (*cmd_solve) {
            auto method = parse_method(solve_method);
            if (!method) {
                std::cerr << "error: unknown method '" << solve_method << "'\n";
                return kExitUnknownName;
            }
            auto triplet = parse_triplet(solve_srgb);
            if (!triplet) {
                std::cerr << "error: expected r,g,b with components 0-255 or #RRGGBB, got '"
                          << solve_srgb << "'\n";
                return kExitUsage;
            }
            SolverOptions opts;
            if (solve_max_newton > 0) {
                opts.max_newton_iters_llss = solve_max_newton;
                opts.max_newton_iters_illss = solve_max_newton;
            }
            SolveOutcome out = solve(*method, *triplet, sys, opts);
            print_solve_telemetry(out, *method);
            int io = with_output(solve_output,
                                 [&](std::ostream& os) { csv::write_reflectance_csv(os, out.rho); });
            if (io) return io;
            return out.converged ? 0 : kExitNonConverged;
        }

        if (*cmd_sweep) {
            bool ok = true;
            auto methods = parse_method_list(sweep_methods, ok);
            if (!ok) return kExitUnknownName;
            std::vector<SweepReport> reports;
            for (Method m : methods) {
                auto progress = [&](long done, long total) {
                    std::fprintf(stderr, "\rsweep %s: %ld/%ld slices", method_name(m).data(),
                                 done, total);
                    std::fflush(stderr);
                };
                reports.push_back(sweep(m, sweep_step, sys, {}, sweep_threads, progress));
                std::fprintf(stderr, "\n");
            }
            int io = with_output(sweep_report,
                                 [&](std::ostream& os) { csv::write_sweep_csv(os, reports); });
            if (io) return io;
            for (const auto& r : reports)
                if (r.non_converged > 0) {
                    std::cerr << "error: " << r.method << " failed to converge on "
                              << r.non_converged << " inputs\n";
                    return kExitNonConverged;
                }
            return 0;
        }

        if (*cmd_rmm) {
            auto method = parse_method(rmm_method);
            if (!method) {
                std::cerr << "error: unknown method '" << rmm_method << "'\n";
                return kExitUnknownName;
            }
            std::ifstream is(rmm_dataset);
            if (!is) {
                std::cerr << "error: cannot open " << rmm_dataset << "\n";
                return kExitIo;
            }
            csv::DatasetParse parsed;
            try {
                parsed = csv::read_dataset_csv(is);
            } catch (const std::runtime_error& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitIo;
            }
            for (const auto& warning : parsed.warnings) std::cerr << "warning: " << warning << "\n";

            GamutPartition part = gamut_filter(parsed.samples, sys);
            for (const auto& id : part.rejected)
                std::cerr << "warning: sample " << id << " has non-finite values, rejected\n";
            std::cerr << part.out_of_gamut.size() << " out-of-gamut samples excluded, "
                      << part.in_gamut.size() << " in-gamut samples\n";
            if (part.in_gamut.empty()) {
                std::cerr << "error: 0 in-gamut samples\n";
                return kExitEmptyInput;
            }

            RmmReport report = compare_dataset(part.in_gamut, *method, default_rmm_weights(), sys);
            int io = with_output(rmm_report,
                                 [&](std::ostream& os) { csv::write_rmm_csv(os, report); });
            if (io) return io;
            std::cerr << "max=" << csv::format_g6(report.max_rmm)
                      << ",mean=" << csv::format_g6(report.mean_rmm) << "\n";
            if (report.non_converged > 0) {
                std::cerr << "error: " << report.non_converged << " samples failed to converge\n";
                return kExitNonConverged;
            }
            return 0;
        }

        if (*cmd_mat) {
            Eigen::MatrixXd m;
            if (mat_name == "M")
                m = sys.M;
            else if (mat_name == "Aprime")
                m = sys.A_prime;
            else if (mat_name == "W")
                m = sys.W;
            else if (mat_name == "T")
                m = sys.T;
            else if (mat_name == "pinvT")
                m = sys.pinv_T;
            else if (mat_name == "B12")
                m = sys.B12;
            else {
                std::cerr << "error: unknown matrix '" << mat_name
                          << "' (expected M, Aprime, W, T, pinvT or B12)\n";
                return kExitUnknownName;
            }
            return with_output(mat_output,
                               [&](std::ostream& os) { csv::write_matrix_csv(os, m); });
        }

        if (*cmd_rt) {
            auto method = parse_method(rt_method);
            if (!method) {
                std::cerr << "error: unknown method '" << rt_method << "'\n";
                return kExitUnknownName;
            }
            auto progress = [&](long done, long total) {
                std::fprintf(stderr, "\rroundtrip %s: %ld/%ld slices",
                             method_name(*method).data(), done, total);
                std::fflush(stderr);
            };
            SweepReport rep = sweep(*method, rt_step, sys, {}, rt_threads, progress);
            std::fprintf(stderr, "\n");
            long checks = rep.run_count - rep.non_converged;
            if (rep.non_converged > 0) {
                std::cerr << "error: " << rep.non_converged << " inputs failed to converge\n";
                return kExitNonConverged;
            }
            if (rep.roundtrip_mismatches == 0) {
                std::cout << "pass, " << checks << " checks\n";
                return 0;
            }
            std::cout << "fail, " << rep.roundtrip_mismatches << " mismatches of " << checks
                      << " checks\n";
            for (const auto& t : rep.mismatch_examples)
                std::cout << "mismatch at " << t.r << ',' << t.g << ',' << t.b << "\n";
            return kExitRoundtrip;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
