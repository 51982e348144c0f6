#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rmtgaps/ensemble_spec.hpp"
#include "rmtgaps/montecarlo.hpp"

namespace rmtgaps::io {

inline constexpr const char* kToolVersion = "0.1.0";

// Raw key/value settings from a config file and/or command-line flags, keyed
// "section.key" (sections: ensemble, query, simulation).
using Settings = std::map<std::string, std::string>;

// Parses an INI document with [ensemble], [query] and [simulation] sections.
Settings parse_ini(const std::string& text);
Settings read_ini_file(const std::string& path);

// Builds and validates a spec from the [ensemble] settings. Sigma entries may
// be exact rationals ("3/4") or decimals and are converted to doubles last.
EnsembleSpec parse_spec(const Settings& settings);

// INI text that parse_spec maps back to the same spec.
std::string spec_to_ini(const EnsembleSpec& spec);

mc::SimulationConfig parse_simulation(const Settings& settings);

// One analytic (and optionally Monte-Carlo) result.
struct Record {
    std::string query;  // gap, double-gap, sf-min, cdf-max, pdf-min, pdf-max, joint-pdf
    EnsembleSpec spec;
    bool has_x = false;  // x column instead of (r,s)
    double x = 0.0, r = 0.0, s = 0.0;
    double analytic = 0.0;
    std::optional<double> mc_value, mc_stderr;
    std::optional<double> published_value;
    std::string label;  // e.g. table row id
    std::string method; // sampler used for mc_value

    double z_score() const;
    // |analytic - mc| <= 3 stderr + 5e-5; true when there is no MC value.
    bool pass() const;
    // |analytic - published| <= 5e-5; empty without a published value.
    std::optional<bool> published_match() const;
};

struct RunReport {
    std::string tool_version = kToolVersion;
    std::uint64_t seed = 0;
    std::optional<double> wall_time;  // seconds; only with --timing
    std::vector<Record> records;

    bool all_pass() const;
};

enum class Format { CSV, JSON };
Format parse_format(const std::string& name);

// Number formatting shared by both emitters: 10 significant digits, and
// "inf" / "-inf" for infinite bounds.
std::string format_number(double v);

void write_csv(const RunReport& report, std::ostream& out);
void write_json(const RunReport& report, std::ostream& out);
// Writes to path, or stdout when path is empty or "-".
void emit(const RunReport& report, Format format, const std::string& path);

struct TableRunOptions {
    std::string data_dir;  // empty: built-in table directory
    mc::SimulationConfig sim;
    bool analytic_only = false;
};

// Analytic vs Monte-Carlo for every row of a shipped table: two records (E and
// E~) per row, in row order. Rows run in parallel.
RunReport reproduce_table(const std::string& id, const TableRunOptions& options);

enum class CurveQuantity { SfMin, CdfMax, PdfMin, PdfMax };
CurveQuantity parse_curve_quantity(const std::string& name);

struct CurveOptions {
    CurveQuantity quantity = CurveQuantity::PdfMin;
    double lo = 0.0, hi = 1.0;
    int points = 200;
    // With Monte-Carlo, x are bin centres of `points` bins on [lo,hi] and the
    // analytic column is the bin average of the density.
    bool with_mc = false;
    mc::SimulationConfig sim;
};

RunReport make_curve(const EnsembleSpec& spec, const CurveOptions& options);

// Entry point of the rmtgaps executable. Exit codes: 0 success, 1 validation
// error, 2 numerical failure, 3 reproduce-table mismatch.
int cli_main(int argc, char** argv);

}  // namespace rmtgaps::io
