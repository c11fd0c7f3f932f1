#include "cgspatial/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "cgspatial/data_io.hpp"

namespace cgspatial {

namespace {

using Clock = std::chrono::steady_clock;

std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string format_delta2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

BenchConfig default_grid() {
    BenchConfig cfg;
    cfg.sizes = {1000, 10000, 100000, 1000000};
    cfg.replications = {10000, 1000, 100, 10};
    cfg.delta2_grid = {0.001, 0.01, 0.1, 1.0};
    cfg.methods = all_methods();
    cfg.m = 10;
    cfg.phi = 7.0;
    cfg.timeout_seconds = 600.0;
    return cfg;
}

BenchConfig desk_grid() {
    BenchConfig cfg = default_grid();
    cfg.sizes = {1000, 10000};
    cfg.replications = {100, 10};
    cfg.timeout_seconds = 60.0;
    return cfg;
}

std::vector<BenchRow> run_benchmark(const BenchConfig& cfg) {
    if (cfg.sizes.size() != cfg.replications.size()) {
        throw std::invalid_argument(
            "run_benchmark: sizes and replications must pair up");
    }
    if (cfg.sizes.empty() || cfg.delta2_grid.empty() || cfg.methods.empty()) {
        throw std::invalid_argument("run_benchmark: empty grid");
    }
    for (std::size_t reps : cfg.replications) {
        if (reps < 1) {
            throw std::invalid_argument("run_benchmark: replications must be >= 1");
        }
    }
    if (!(cfg.timeout_seconds > 0.0)) {
        throw std::invalid_argument("run_benchmark: timeout must be > 0");
    }

    const CovarianceKernel kernel{KernelFamily::Exponential, cfg.sigma2,
                                  cfg.phi};
    const NigPrior prior;  // flat beta prior
    const SolverConfig solver_cfg = posterior_solver_config();
    constexpr double kGateTolerance = 1e-6;

    std::vector<BenchRow> rows;
    RngState master(cfg.seed);
    std::uint64_t setting_index = 0;

    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
        const std::size_t n = cfg.sizes[si];
        const std::size_t reps = cfg.replications[si];
        for (const double delta2 : cfg.delta2_grid) {
            RngState sub = master.substream(setting_index++);
            const DenseVector beta(cfg.p, 1.0);

            std::vector<BenchRow> group;
            group.reserve(cfg.methods.size());
            for (SolveMethod method : cfg.methods) {
                BenchRow row;
                row.method = method;
                row.n = n;
                row.delta2 = delta2;
                row.replications_requested = reps;
                group.push_back(row);
            }

            try {
                auto [dataset, truth] = simulate_dataset(
                    n, cfg.p, kernel, beta, delta2, cfg.m, sub);
                const std::vector<std::size_t> order =
                    build_order(dataset.locations);
                const NeighborSets nbrs =
                    build_neighbor_sets(dataset.locations, order, cfg.m);
                NngpFactors factors =
                    build_nngp_factors(kernel, dataset.locations, nbrs);
                DenseMatrix x_ord(n, cfg.p);
                DenseVector y_ord(n);
                for (std::size_t i = 0; i < n; ++i) {
                    y_ord[i] = dataset.y[order[i]];
                    for (std::size_t j = 0; j < cfg.p; ++j) {
                        x_ord.at(i, j) = dataset.x.at(order[i], j);
                    }
                }
                const StackedSystem sys = assemble_stacked(
                    x_ord, y_ord, std::move(factors), delta2, prior);

                // Correctness gate: one untimed solve per method; every
                // solution must agree with the most accurate one.
                std::vector<DenseVector> solutions(cfg.methods.size());
                std::vector<bool> usable(cfg.methods.size(), false);
                double best_residual = std::numeric_limits<double>::infinity();
                std::size_t best = cfg.methods.size();
                for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
                    try {
                        auto [x_sol, rep] =
                            posterior_mean(sys, cfg.methods[mi], solver_cfg);
                        solutions[mi] = std::move(x_sol);
                        usable[mi] = true;
                        if (rep.residual_norm < best_residual) {
                            best_residual = rep.residual_norm;
                            best = mi;
                        }
                    } catch (const std::exception& e) {
                        group[mi].status = BenchStatus::Error;
                        group[mi].note = e.what();
                    }
                }
                if (best < cfg.methods.size()) {
                    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
                        if (!usable[mi]) continue;
                        double max_diff = 0.0;
                        for (std::size_t i = 0; i < solutions[mi].size(); ++i) {
                            max_diff = std::max(
                                max_diff, std::abs(solutions[mi][i] -
                                                   solutions[best][i]));
                        }
                        if (max_diff > kGateTolerance) {
                            usable[mi] = false;
                            group[mi].status = BenchStatus::Error;
                            group[mi].note =
                                "correctness gate: max deviation " +
                                format_fixed(max_diff, 9);
                        }
                    }
                }

                // Timed phase, strictly sequential, identical rhs.
                for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
                    if (!usable[mi]) continue;
                    BenchRow& row = group[mi];
                    double elapsed = 0.0;
                    std::size_t done = 0;
                    bool errored = false;
                    for (std::size_t r = 0; r < reps; ++r) {
                        if (r > 0 && elapsed > cfg.timeout_seconds) break;
                        const auto t0 = Clock::now();
                        try {
                            auto solved =
                                posterior_mean(sys, cfg.methods[mi], solver_cfg);
                            (void)solved;
                        } catch (const std::exception& e) {
                            row.status = BenchStatus::Error;
                            row.note = e.what();
                            errored = true;
                            break;
                        }
                        elapsed += std::chrono::duration<double>(Clock::now() -
                                                                 t0)
                                       .count();
                        ++done;
                    }
                    row.elapsed_total = elapsed;
                    row.replications_done = done;
                    if (!errored) {
                        row.status = (done == reps) ? BenchStatus::Ok
                                                    : BenchStatus::Timeout;
                    }
                }
            } catch (const std::exception& e) {
                for (BenchRow& row : group) {
                    if (row.status == BenchStatus::Ok &&
                        row.replications_done == 0) {
                        row.status = BenchStatus::Error;
                        row.note = e.what();
                    }
                }
            }

            rows.insert(rows.end(), group.begin(), group.end());
        }
    }

    compute_relatives(rows);
    return rows;
}

void compute_relatives(std::vector<BenchRow>& rows) {
    for (BenchRow& row : rows) {
        row.relative = 0.0;
        row.has_relative = false;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].status != BenchStatus::Ok || rows[i].has_relative) continue;
        double min_elapsed = std::numeric_limits<double>::infinity();
        for (std::size_t j = i; j < rows.size(); ++j) {
            if (rows[j].n == rows[i].n && rows[j].delta2 == rows[i].delta2 &&
                rows[j].status == BenchStatus::Ok) {
                min_elapsed = std::min(min_elapsed, rows[j].elapsed_total);
            }
        }
        for (std::size_t j = i; j < rows.size(); ++j) {
            if (rows[j].n == rows[i].n && rows[j].delta2 == rows[i].delta2 &&
                rows[j].status == BenchStatus::Ok) {
                rows[j].relative = rows[j].elapsed_total / min_elapsed;
                rows[j].has_relative = true;
            }
        }
    }
}

std::string timeout_note(double timeout_seconds) {
    const double mins = timeout_seconds / 60.0;
    if (mins >= 1.0 && mins == std::floor(mins)) {
        return "more than " + format_fixed(mins, 0) + " mins";
    }
    return "more than " + format_fixed(timeout_seconds, 0) + " s";
}

std::string hardware_description() {
    std::string model = "unknown CPU";
    std::ifstream cpuinfo("/proc/cpuinfo");
    std::string line;
    while (std::getline(cpuinfo, line)) {
        if (line.rfind("model name", 0) == 0) {
            const std::size_t colon = line.find(':');
            if (colon != std::string::npos) {
                std::size_t b = colon + 1;
                while (b < line.size() && line[b] == ' ') ++b;
                model = line.substr(b);
            }
            break;
        }
    }
    return model + ", " +
           std::to_string(std::thread::hardware_concurrency()) +
           " hardware threads";
}

namespace {

std::string current_timestamp() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm_buf{};
    gmtime_r(&now, &tm_buf);
    std::strftime(buf, sizeof(buf), "%Y-%m-%d %H:%M:%S UTC", &tm_buf);
    return buf;
}

std::string elapsed_cell(const BenchRow& row, const BenchConfig& cfg) {
    switch (row.status) {
        case BenchStatus::Ok:
            return format_fixed(row.elapsed_total, 3);
        case BenchStatus::Timeout:
            return timeout_note(cfg.timeout_seconds);
        case BenchStatus::Error:
            return "error";
    }
    return {};
}

std::string relative_cell(const BenchRow& row) {
    return row.has_relative ? format_fixed(row.relative, 3) : std::string{};
}

void markdown_group(std::ostringstream& out, const std::string& title,
                    std::span<const BenchRow* const> rows,
                    const BenchConfig& cfg) {
    out << "## " << title << "\n\n";
    out << "| Method | Relative | Elapsed(s) |\n";
    out << "|---|---|---|\n";
    for (const BenchRow* row : rows) {
        out << "| " << method_name(row->method) << " | "
            << relative_cell(*row) << " | " << elapsed_cell(*row, cfg)
            << " |\n";
    }
    out << "\n";
}

}  // namespace

std::string emit_table(const std::vector<BenchRow>& rows, TableFormat format,
                       const BenchConfig& cfg) {
    if (format == TableFormat::Csv) {
        std::ostringstream out;
        out << "method,n,delta2,replications_requested,replications_done,"
               "elapsed_s,relative,status,note\n";
        for (const BenchRow& row : rows) {
            out << method_name(row.method) << ',' << row.n << ','
                << format_delta2(row.delta2) << ','
                << row.replications_requested << ',' << row.replications_done
                << ',' << format_fixed(row.elapsed_total, 6) << ','
                << relative_cell(row) << ',';
            switch (row.status) {
                case BenchStatus::Ok: out << "ok"; break;
                case BenchStatus::Timeout: out << "timeout"; break;
                case BenchStatus::Error: out << "error"; break;
            }
            std::string note = row.note;
            std::replace(note.begin(), note.end(), ',', ';');
            std::replace(note.begin(), note.end(), '\n', ' ');
            out << ',' << note << '\n';
        }
        return out.str();
    }

    std::ostringstream out;
    out << "# Solver benchmark\n\n";
    out << "Hardware: " << hardware_description() << "\n";
    out << "Date: " << current_timestamp() << "\n";
    out << "Seed: " << cfg.seed << "; m = " << cfg.m << ", phi = " << cfg.phi
        << ", sigma2 = " << cfg.sigma2
        << ", timeout = " << format_fixed(cfg.timeout_seconds, 0) << " s\n\n";

    // Per-(n, delta2) tables.
    std::vector<std::size_t> sizes;
    for (const BenchRow& row : rows) {
        if (std::find(sizes.begin(), sizes.end(), row.n) == sizes.end()) {
            sizes.push_back(row.n);
        }
    }
    for (std::size_t n : sizes) {
        std::vector<double> deltas;
        for (const BenchRow& row : rows) {
            if (row.n == n &&
                std::find(deltas.begin(), deltas.end(), row.delta2) ==
                    deltas.end()) {
                deltas.push_back(row.delta2);
            }
        }
        for (double d : deltas) {
            std::vector<const BenchRow*> group;
            std::size_t reps = 0;
            for (const BenchRow& row : rows) {
                if (row.n == n && row.delta2 == d) {
                    group.push_back(&row);
                    reps = row.replications_requested;
                }
            }
            markdown_group(out,
                           "n = " + std::to_string(n) +
                               ", delta2 = " + format_delta2(d) + " (" +
                               std::to_string(reps) + " replications)",
                           group, cfg);
        }

        // delta2-summed view: methods timed ok across every delta2.
        std::vector<BenchRow> summed;
        std::vector<const BenchRow*> summed_ptrs;
        for (const BenchRow& row : rows) {
            if (row.n != n) continue;
            auto it = std::find_if(summed.begin(), summed.end(),
                                   [&row](const BenchRow& s) {
                                       return s.method == row.method;
                                   });
            if (it == summed.end()) {
                BenchRow s;
                s.method = row.method;
                s.n = n;
                s.status = row.status;
                s.elapsed_total = row.elapsed_total;
                summed.push_back(s);
            } else {
                it->elapsed_total += row.elapsed_total;
                if (row.status != BenchStatus::Ok &&
                    it->status == BenchStatus::Ok) {
                    it->status = row.status;
                }
            }
        }
        double min_sum = std::numeric_limits<double>::infinity();
        for (const BenchRow& s : summed) {
            if (s.status == BenchStatus::Ok) {
                min_sum = std::min(min_sum, s.elapsed_total);
            }
        }
        for (BenchRow& s : summed) {
            if (s.status == BenchStatus::Ok && std::isfinite(min_sum)) {
                s.relative = s.elapsed_total / min_sum;
                s.has_relative = true;
            }
        }
        for (const BenchRow& s : summed) summed_ptrs.push_back(&s);
        markdown_group(out,
                       "n = " + std::to_string(n) +
                           ", summed over all delta2 values",
                       summed_ptrs, cfg);
    }
    return out.str();
}

std::vector<PlotFile> emit_plot_data(const std::vector<BenchRow>& rows) {
    std::vector<double> deltas;
    for (const BenchRow& row : rows) {
        if (std::find(deltas.begin(), deltas.end(), row.delta2) ==
            deltas.end()) {
            deltas.push_back(row.delta2);
        }
    }
    std::vector<PlotFile> files;
    files.reserve(deltas.size());
    for (double d : deltas) {
        PlotFile f;
        f.delta2 = d;
        f.filename = "plot_delta" + std::string(format_delta2(d)) + ".csv";
        std::ostringstream out;
        out << "method,n,delta2,elapsed_s,relative,status\n";
        for (const BenchRow& row : rows) {
            if (row.delta2 != d) continue;
            out << method_name(row.method) << ',' << row.n << ','
                << format_delta2(row.delta2) << ','
                << format_fixed(row.elapsed_total, 6) << ','
                << relative_cell(row) << ',';
            switch (row.status) {
                case BenchStatus::Ok: out << "ok"; break;
                case BenchStatus::Timeout: out << "timeout"; break;
                case BenchStatus::Error: out << "error"; break;
            }
            out << '\n';
        }
        f.csv = out.str();
        files.push_back(std::move(f));
    }
    return files;
}

}  // namespace cgspatial
