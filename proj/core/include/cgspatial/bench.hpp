#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cgspatial/posterior.hpp"

namespace cgspatial {

/// Grid of benchmark settings. sizes and replications are parallel
/// arrays: sizes[k] observations are timed over replications[k] repeats.
struct BenchConfig {
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> replications;
    std::vector<double> delta2_grid;
    std::vector<SolveMethod> methods;
    std::size_t m = 10;
    double phi = 7.0;
    double sigma2 = 1.0;
    std::size_t p = 2;  // intercept + (p-1) simulated covariates
    double timeout_seconds = 600.0;  // per method per (n, delta2)
    std::uint64_t seed = 1;
};

enum class BenchStatus { Ok, Timeout, Error };

/// One (method, n, delta2) measurement. elapsed_total sums the timed
/// replications that completed; relative is elapsed / group minimum and
/// only present on ok rows.
struct BenchRow {
    SolveMethod method = SolveMethod::Cgsparse;
    std::size_t n = 0;
    double delta2 = 0.0;
    std::size_t replications_requested = 0;
    std::size_t replications_done = 0;
    double elapsed_total = 0.0;
    double relative = 0.0;
    bool has_relative = false;
    BenchStatus status = BenchStatus::Ok;
    std::string note;  // error detail
};

/// The full experiment grid: sizes 1e3..1e6 with replications
/// 10000/1000/100/10, delta2 in {0.001, 0.01, 0.1, 1}, m = 10, phi = 7,
/// all seven methods, 600 s timeout.
BenchConfig default_grid();

/// Desk-scale variant: sizes {1e3, 1e4} with replications {100, 10}.
BenchConfig desk_grid();

/// Run the sweep. Per (n, delta2): simulate one dataset, assemble one
/// stacked system, run a correctness gate (every method solves once,
/// untimed; solutions must agree within 1e-6 per entry or the method is
/// reported status = error), then time each surviving method over the
/// replications, sequentially, with the timeout enforced between
/// replications. Method failures become rows, never exceptions.
std::vector<BenchRow> run_benchmark(const BenchConfig& cfg);

/// Fill the relative column per (n, delta2) group: the minimum-elapsed
/// ok row gets exactly 1.000, others elapsed / min; timeout and error
/// rows carry no relative.
void compute_relatives(std::vector<BenchRow>& rows);

enum class TableFormat { Markdown, Csv };

/// Render rows. Markdown emits a hardware/timestamp header, one table
/// per (n, delta2) plus a delta2-summed view per n; csv emits the flat
/// row schema. Timeout cells render the paper-style note
/// ("more than 10 mins" at a 600 s timeout).
std::string emit_table(const std::vector<BenchRow>& rows, TableFormat format,
                       const BenchConfig& cfg);

struct PlotFile {
    double delta2 = 0.0;
    std::string filename;  // plot_delta<value>.csv
    std::string csv;       // long format: method,n,delta2,elapsed_s,relative
};

/// One long-format CSV per delta2 value present in rows.
std::vector<PlotFile> emit_plot_data(const std::vector<BenchRow>& rows);

/// Human-readable timeout note, e.g. 600 -> "more than 10 mins".
std::string timeout_note(double timeout_seconds);

/// CPU model / core count / OS summary recorded in table headers.
std::string hardware_description();

}  // namespace cgspatial
