#include "rmtgaps/cli_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "rmtgaps/ensembles.hpp"
#include "rmtgaps/errors.hpp"
#include "rmtgaps/tables.hpp"

namespace rmtgaps::io {

namespace {

using nlohmann::json;

constexpr double kRounding = 5e-5;  // half a unit in the fourth decimal
constexpr int kBatches = 40;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::optional<std::string> lookup(const Settings& s, const std::string& key) {
    auto it = s.find(key);
    if (it == s.end() || trim(it->second).empty()) return std::nullopt;
    return trim(it->second);
}

std::string require(const Settings& s, const std::string& key) {
    auto v = lookup(s, key);
    if (!v) throw ValidationError("missing required parameter '" + key.substr(key.find('.') + 1) + "'");
    return *v;
}

bool parse_bool(const std::string& key, const std::string& v) {
    std::string t = v;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ValidationError("'" + key + "' expects a boolean, got '" + v + "'");
}

long parse_integer(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long x = std::stol(v, &used);
        if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw ValidationError("'" + key + "' expects an integer, got '" + v + "'");
}

std::uint64_t parse_seed(const std::string& v) {
    try {
        std::size_t used = 0;
        const unsigned long long x = std::stoull(v, &used);
        if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw ValidationError("'seed' expects an unsigned integer, got '" + v + "'");
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        return parse_number(v);
    } catch (const ValidationError&) {
        throw ValidationError("'" + key + "' expects a number, got '" + v + "'");
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(key, trim(item)));
    return out;
}

struct FamilyParams {
    bool alpha, beta, kappa;
};

FamilyParams params_of(const EnsembleSpec& s) {
    switch (s.family) {
        case Family::GaussWigner:
            return {false, false, false};
        case Family::LaguerreWishart:
        case Family::BuresHall:
            return {true, false, false};
        case Family::CauchyLorentzI:
            return {false, false, true};
        case Family::CauchyLorentzII:
            return {true, false, true};
        case Family::JacobiMANOVA:
            return {true, true, s.correlated};
    }
    return {false, false, false};
}

json number_json(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return std::stod(format_number(v));
}

json spec_json(const EnsembleSpec& s) {
    json j;
    j["family"] = family_name(s.family);
    j["correlated"] = s.correlated;
    j["n"] = s.n;
    const FamilyParams p = params_of(s);
    if (p.alpha) j["alpha"] = number_json(s.alpha);
    if (p.beta) j["beta"] = number_json(s.beta);
    if (p.kappa) j["kappa"] = number_json(s.kappa);
    if (s.correlated) {
        j["sigma"] = json::array();
        for (double v : s.sigma) j["sigma"].push_back(number_json(v));
    }
    return j;
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

// MC estimates for E and E~ of one spec, with batch-means errors whenever the
// sampler is a Markov chain.
struct McPair {
    mc::EstimateWithError gap, double_gap;
    std::string method;
};

bool sampler_is_chain(const EnsembleSpec& spec, mc::Method method) {
    if (method == mc::Method::LogGas) return true;
    return spec.family == Family::CauchyLorentzI && !spec.correlated && spec.kappa > spec.n;
}

mc::Method auto_method(const EnsembleSpec& spec) {
    return mc::direct_construction_issue(spec) ? mc::Method::LogGas : mc::Method::Direct;
}

McPair simulate_pair(const EnsembleSpec& spec, mc::SimulationConfig cfg, double r, double s) {
    const auto samples = mc::simulate(spec, cfg);
    McPair out;
    out.method = mc::method_name(cfg.method);
    if (sampler_is_chain(spec, cfg.method)) {
        out.gap = mc::estimate_gap_batched(samples, r, s, kBatches);
        out.double_gap = mc::estimate_double_gap_batched(samples, r, s, kBatches);
    } else {
        out.gap = mc::estimate_gap(samples, r, s);
        out.double_gap = mc::estimate_double_gap(samples, r, s);
    }
    return out;
}

double curve_value(const EnsembleModel& m, CurveQuantity q, double x) {
    switch (q) {
        case CurveQuantity::SfMin:
            return sf_min(m, x);
        case CurveQuantity::CdfMax:
            return cdf_max(m, x);
        case CurveQuantity::PdfMin:
            return pdf_min(m, x);
        case CurveQuantity::PdfMax:
            return pdf_max(m, x);
    }
    return 0.0;
}

const char* curve_query(CurveQuantity q) {
    switch (q) {
        case CurveQuantity::SfMin:
            return "sf-min";
        case CurveQuantity::CdfMax:
            return "cdf-max";
        case CurveQuantity::PdfMin:
            return "pdf-min";
        case CurveQuantity::PdfMax:
            return "pdf-max";
    }
    return "";
}

}  // namespace

// ---- parsing ----

Settings parse_ini(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    Settings out;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ValidationError("config: key '" + section + "' is outside a section");
        if (section != "ensemble" && section != "query" && section != "simulation")
            throw ValidationError("config: unknown section [" + section + "]");
        for (const auto& [key, value] : body) out[section + "." + key] = value.get_value<std::string>();
    }
    return out;
}

Settings read_ini_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_ini(ss.str());
}

EnsembleSpec parse_spec(const Settings& st) {
    EnsembleSpec s;
    s.family = parse_family(require(st, "ensemble.family"));
    const long n = parse_integer("n", require(st, "ensemble.n"));
    if (n < 1 || n > 12) throw ValidationError(family_name(s.family) + ": constraint 1≤n≤12 violated");
    s.n = static_cast<int>(n);
    const auto sigma = lookup(st, "ensemble.sigma");
    const auto corr = lookup(st, "ensemble.correlated");
    s.correlated = corr ? parse_bool("correlated", *corr) : sigma.has_value();
    if (s.correlated) {
        if (!sigma) throw ValidationError("missing required parameter 'sigma' for a correlated ensemble");
        s.sigma = parse_list("sigma", *sigma);
    } else if (sigma) {
        throw ValidationError(family_name(s.family) + ": uncorrelated variants take no sigma");
    }
    const FamilyParams p = params_of(s);
    auto param = [&](const char* name, bool used, double& field) {
        const std::string key = std::string("ensemble.") + name;
        if (used) {
            field = parse_real(name, require(st, key));
        } else if (lookup(st, key)) {
            throw ValidationError(std::string("parameter '") + name + "' does not apply to " + describe(s));
        }
    };
    param("alpha", p.alpha, s.alpha);
    param("beta", p.beta, s.beta);
    param("kappa", p.kappa, s.kappa);
    validate(s);
    return s;
}

std::string spec_to_ini(const EnsembleSpec& s) {
    auto exact = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::ostringstream os;
    os << "[ensemble]\n";
    os << "family = " << family_name(s.family) << "\n";
    os << "correlated = " << (s.correlated ? "true" : "false") << "\n";
    os << "n = " << s.n << "\n";
    if (s.correlated) {
        os << "sigma = ";
        for (std::size_t i = 0; i < s.sigma.size(); ++i) os << (i ? "," : "") << exact(s.sigma[i]);
        os << "\n";
    }
    const FamilyParams p = params_of(s);
    if (p.alpha) os << "alpha = " << exact(s.alpha) << "\n";
    if (p.beta) os << "beta = " << exact(s.beta) << "\n";
    if (p.kappa) os << "kappa = " << exact(s.kappa) << "\n";
    return os.str();
}

mc::SimulationConfig parse_simulation(const Settings& st) {
    mc::SimulationConfig c;
    if (auto v = lookup(st, "simulation.realizations")) c.realizations = parse_integer("realizations", *v);
    if (auto v = lookup(st, "simulation.seed")) c.seed = parse_seed(*v);
    if (auto v = lookup(st, "simulation.method")) c.method = mc::parse_method(*v);
    if (auto v = lookup(st, "simulation.burn_in")) c.loggas.burn_in = parse_integer("burn_in", *v);
    if (auto v = lookup(st, "simulation.thinning")) c.loggas.thinning = parse_integer("thinning", *v);
    if (auto v = lookup(st, "simulation.proposal_width")) c.loggas.proposal_width = parse_real("proposal_width", *v);
    if (auto v = lookup(st, "simulation.adapt")) c.loggas.adapt = parse_bool("adapt", *v);
    if (auto v = lookup(st, "simulation.chains")) c.loggas.chains = static_cast<int>(parse_integer("chains", *v));
    mc::validate(c);
    return c;
}

// ---- records and emitters ----

double Record::z_score() const {
    if (!mc_value) return std::numeric_limits<double>::quiet_NaN();
    const double d = *mc_value - analytic;
    const double se = mc_stderr.value_or(0.0);
    if (se > 0) return d / se;
    if (d == 0) return 0.0;
    return d > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

bool Record::pass() const {
    if (!mc_value) return true;
    return std::abs(analytic - *mc_value) <= 3 * mc_stderr.value_or(0.0) + kRounding;
}

std::optional<bool> Record::published_match() const {
    if (!published_value) return std::nullopt;
    return std::abs(analytic - *published_value) <= kRounding;
}

bool RunReport::all_pass() const {
    return std::all_of(records.begin(), records.end(), [](const Record& r) { return r.pass(); });
}

Format parse_format(const std::string& name) {
    if (name == "csv") return Format::CSV;
    if (name == "json") return Format::JSON;
    throw ValidationError("unknown output format '" + name + "' (csv or json)");
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_csv(const RunReport& report, std::ostream& out) {
    const bool by_x = !report.records.empty() && report.records.front().has_x;
    out << (by_x ? "x" : "r,s") << ",analytic,mc_value,mc_stderr,z_score\n";
    for (const Record& r : report.records) {
        if (by_x) out << format_number(r.x);
        else out << format_number(r.r) << "," << format_number(r.s);
        out << "," << format_number(r.analytic) << "," << optional_number(r.mc_value) << ","
            << optional_number(r.mc_stderr) << "," << (r.mc_value ? format_number(r.z_score()) : "") << "\n";
    }
}

void write_json(const RunReport& report, std::ostream& out) {
    json doc;
    doc["tool_version"] = report.tool_version;
    doc["seed"] = report.seed;
    if (report.wall_time) doc["wall_time"] = number_json(*report.wall_time);
    doc["pass"] = report.all_pass();
    doc["records"] = json::array();
    for (const Record& r : report.records) {
        json j;
        if (!r.label.empty()) j["label"] = r.label;
        j["query"] = r.query;
        j["spec"] = spec_json(r.spec);
        if (r.has_x) {
            j["x"] = number_json(r.x);
        } else {
            j["r"] = number_json(r.r);
            j["s"] = number_json(r.s);
        }
        j["analytic"] = number_json(r.analytic);
        j["mc_value"] = r.mc_value ? number_json(*r.mc_value) : json(nullptr);
        j["mc_stderr"] = r.mc_stderr ? number_json(*r.mc_stderr) : json(nullptr);
        j["z_score"] = r.mc_value ? number_json(r.z_score()) : json(nullptr);
        if (!r.method.empty()) j["method"] = r.method;
        j["pass"] = r.pass();
        if (r.published_value) {
            j["published_value"] = number_json(*r.published_value);
            j["published_match"] = *r.published_match();
        }
        doc["records"].push_back(std::move(j));
    }
    out << doc.dump(2) << "\n";
}

void emit(const RunReport& report, Format format, const std::string& path) {
    if (report.records.empty()) throw ValidationError("nothing to emit: no results");
    auto write = [&](std::ostream& os) {
        if (format == Format::CSV) write_csv(report, os);
        else write_json(report, os);
    };
    if (path.empty() || path == "-") {
        write(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write(out);
    if (!out) throw std::runtime_error("write failed for " + path);
}

// ---- harness ----

RunReport reproduce_table(const std::string& id, const TableRunOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    const Table table = load_table(options.data_dir.empty() ? default_table_dir() : options.data_dir, id);
    std::vector<std::vector<Record>> rows(table.rows.size());
    mc::parallel_for(static_cast<long>(table.rows.size()), [&](long i) {
        const TableRow& row = table.rows[i];
        const ModelPtr model = build(row.spec);
        Record e, et;
        e.query = "gap";
        et.query = "double-gap";
        for (Record* rec : {&e, &et}) {
            rec->spec = row.spec;
            rec->r = row.r;
            rec->s = row.s;
            rec->label = "table " + id + " row " + std::to_string(row.index);
        }
        e.analytic = gap_probability(*model, row.r, row.s);
        et.analytic = double_gap_probability(*model, row.r, row.s);
        e.published_value = row.published_E;
        et.published_value = row.published_Et;
        if (!options.analytic_only) {
            mc::SimulationConfig cfg = options.sim;
            cfg.method = auto_method(row.spec);
            cfg.seed = options.sim.seed + 7919 * static_cast<std::uint64_t>(row.index);
            const McPair m = simulate_pair(row.spec, cfg, row.r, row.s);
            e.mc_value = m.gap.value;
            e.mc_stderr = m.gap.std_error;
            et.mc_value = m.double_gap.value;
            et.mc_stderr = m.double_gap.std_error;
            e.method = et.method = m.method;
        }
        rows[i] = {e, et};
    });
    RunReport report;
    report.seed = options.sim.seed;
    for (auto& r : rows)
        for (auto& rec : r) report.records.push_back(std::move(rec));
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

CurveQuantity parse_curve_quantity(const std::string& name) {
    for (CurveQuantity q : {CurveQuantity::SfMin, CurveQuantity::CdfMax, CurveQuantity::PdfMin, CurveQuantity::PdfMax})
        if (name == curve_query(q)) return q;
    throw ValidationError("unknown curve quantity '" + name + "' (sf-min, cdf-max, pdf-min, pdf-max)");
}

RunReport make_curve(const EnsembleSpec& spec, const CurveOptions& o) {
    if (o.points < 2) throw ValidationError("curve: at least 2 points required");
    if (!(o.hi > o.lo) || !std::isfinite(o.lo) || !std::isfinite(o.hi))
        throw ValidationError("curve: need finite lo < hi");
    const ModelPtr model = build(spec);
    const Domain dom = family_domain(spec.family);
    RunReport report;
    report.seed = o.sim.seed;
    const bool density = o.quantity == CurveQuantity::PdfMin || o.quantity == CurveQuantity::PdfMax;
    std::vector<mc::SpectrumSample> samples;
    if (o.with_mc) samples = mc::simulate(spec, o.sim);
    const bool chain = o.with_mc && sampler_is_chain(spec, o.sim.method);
    if (o.with_mc && density) {
        const bool is_min = o.quantity == CurveQuantity::PdfMin;
        const mc::Histogram h = mc::estimate_extreme_density(samples, is_min ? mc::Extreme::Min : mc::Extreme::Max,
                                                             o.points, std::make_pair(o.lo, o.hi));
        for (int i = 0; i < o.points; ++i) {
            const double a = h.edges[i], b = h.edges[i + 1];
            Record r;
            r.query = curve_query(o.quantity);
            r.spec = spec;
            r.has_x = true;
            r.x = 0.5 * (a + b);
            // Bin average of the density from the distribution function.
            r.analytic = is_min ? (sf_min(*model, a) - sf_min(*model, b)) / (b - a)
                                : (cdf_max(*model, b) - cdf_max(*model, a)) / (b - a);
            r.mc_value = h.density[i];
            r.mc_stderr = h.std_error[i];
            r.method = mc::method_name(o.sim.method);
            report.records.push_back(std::move(r));
        }
        return report;
    }
    for (int i = 0; i < o.points; ++i) {
        Record r;
        r.query = curve_query(o.quantity);
        r.spec = spec;
        r.has_x = true;
        r.x = o.lo + (o.hi - o.lo) * i / (o.points - 1);
        r.analytic = curve_value(*model, o.quantity, r.x);
        if (o.with_mc) {
            const double x = std::clamp(r.x, dom.lo, dom.hi);
            const bool is_sf = o.quantity == CurveQuantity::SfMin;
            mc::EstimateWithError est;
            if (chain)
                est = is_sf ? mc::estimate_gap_batched(samples, dom.lo, x, kBatches)
                            : mc::estimate_gap_batched(samples, x, dom.hi, kBatches);
            else
                est = is_sf ? mc::estimate_gap(samples, dom.lo, x) : mc::estimate_gap(samples, x, dom.hi);
            r.mc_value = est.value;
            r.mc_stderr = est.std_error;
            r.method = mc::method_name(o.sim.method);
        }
        report.records.push_back(std::move(r));
    }
    return report;
}

// ---- command line ----

namespace {

struct Flag {
    const char* name;
    const char* key;
    const char* help;
};

constexpr Flag kSpecFlags[] = {
    {"--family", "ensemble.family", "gauss-wigner, laguerre-wishart, cauchy-lorentz-i, cauchy-lorentz-ii, "
                                    "jacobi-manova or bures-hall"},
    {"--correlated", "ensemble.correlated", "true/false (default: true when --sigma is given)"},
    {"--n", "ensemble.n", "matrix dimension, 1..12"},
    {"--sigma", "ensemble.sigma", "comma-separated sigma_1..sigma_n, rationals like 3/4 allowed"},
    {"--alpha", "ensemble.alpha", "alpha parameter"},
    {"--beta", "ensemble.beta", "beta parameter (jacobi-manova)"},
    {"--kappa", "ensemble.kappa", "kappa parameter"},
};

constexpr Flag kSimFlags[] = {
    {"--realizations", "simulation.realizations", "Monte-Carlo sample count (default 50000)"},
    {"--seed", "simulation.seed", "64-bit seed"},
    {"--method", "simulation.method", "direct or loggas"},
    {"--burn-in", "simulation.burn_in", "log-gas burn-in sweeps (default 5000 n)"},
    {"--thinning", "simulation.thinning", "log-gas sweeps between samples (default n)"},
    {"--proposal-width", "simulation.proposal_width", "initial log-gas step relative to the spacing"},
    {"--adapt", "simulation.adapt", "adapt log-gas steps during burn-in (true/false)"},
    {"--chains", "simulation.chains", "independent log-gas chains"},
};

struct CommandLine {
    std::map<std::string, std::string> values;   // key -> flag value
    std::vector<std::pair<std::string, CLI::Option*>> options;  // one per subcommand
    std::string config;
    std::string format;
    std::string output;
    bool timing = false;

    void add(CLI::App* app, const Flag& f) {
        options.emplace_back(f.key, app->add_option(f.name, values[f.key], f.help));
    }
    void add_spec(CLI::App* app) {
        app->add_option("--config", config, "INI file with [ensemble], [query] and [simulation] sections");
        for (const Flag& f : kSpecFlags) add(app, f);
    }
    void add_sim(CLI::App* app) {
        for (const Flag& f : kSimFlags) add(app, f);
    }
    void add_output(CLI::App* app) {
        app->add_option("--format", format, "csv or json (default: plain value for single points, else csv)");
        app->add_option("--output,-o", output, "output file (default stdout)");
        app->add_flag("--timing", timing, "record wall time in JSON reports");
    }
    // File settings overlaid with the flags given on this command line.
    Settings settings() const {
        Settings s = config.empty() ? Settings{} : read_ini_file(config);
        for (const auto& [key, opt] : options)
            if (opt->count() > 0) s[key] = values.at(key);
        return s;
    }
};

struct Grid {
    double lo, hi;
    int count;
};

Grid parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(trim(item));
    if (parts.size() != 3) throw ValidationError("grid expects lo,hi,count");
    Grid g{parse_real("grid", parts[0]), parse_real("grid", parts[1]),
           static_cast<int>(parse_integer("grid", parts[2]))};
    if (g.count < 1 || !(g.hi >= g.lo)) throw ValidationError("grid needs lo <= hi and count >= 1");
    return g;
}

std::vector<double> grid_points(const Grid& g) {
    std::vector<double> xs;
    for (int i = 0; i < g.count; ++i) xs.push_back(g.count == 1 ? g.lo : g.lo + (g.hi - g.lo) * i / (g.count - 1));
    return xs;
}

void print_report(const RunReport& report, const CommandLine& cl, bool plain_default) {
    if (cl.format.empty() && cl.output.empty() && plain_default && report.records.size() == 1) {
        std::cout << format_number(report.records.front().analytic) << "\n";
        return;
    }
    RunReport r = report;
    if (!cl.timing) r.wall_time.reset();
    emit(r, parse_format(cl.format.empty() ? "csv" : cl.format), cl.output);
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Gap probabilities and extreme-eigenvalue statistics of random matrix ensembles", "rmtgaps"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    CommandLine cl;
    std::string r_text, s_text, x_text, grid_text, table_id, data_dir, quantity = "pdf-min", bins_text;
    bool with_mc = false, analytic_only = false;

    auto add_rs = [&](CLI::App* sub) {
        sub->add_option("--r", r_text, "left end of the interval ('-inf' allowed)");
        sub->add_option("--s", s_text, "right end of the interval ('inf' allowed)");
    };

    std::vector<CLI::App*> rs_cmds, x_cmds;
    for (const char* name : {"gap", "double-gap"}) {
        CLI::App* sub = app.add_subcommand(name, std::string(name == std::string("gap") ? "E(r,s): no eigenvalue in (r,s)"
                                                                                            : "E~(r,s): all eigenvalues in [r,s]"));
        cl.add_spec(sub);
        add_rs(sub);
        cl.add_output(sub);
        rs_cmds.push_back(sub);
    }
    for (const char* name : {"sf-min", "cdf-max", "pdf-min", "pdf-max"}) {
        CLI::App* sub = app.add_subcommand(name, std::string("evaluate ") + name + " at a point or on a grid");
        cl.add_spec(sub);
        sub->add_option("--x", x_text, "evaluation point");
        sub->add_option("--grid", grid_text, "lo,hi,count");
        cl.add_output(sub);
        x_cmds.push_back(sub);
    }
    CLI::App* joint = app.add_subcommand("joint-pdf", "joint density of the smallest (r) and largest (s) eigenvalue");
    cl.add_spec(joint);
    add_rs(joint);
    cl.add_output(joint);
    CLI::App* part = app.add_subcommand("partition", "print C^{-1}");
    cl.add_spec(part);
    CLI::App* sim = app.add_subcommand("simulate", "Monte-Carlo estimates of E(r,s) and E~(r,s)");
    cl.add_spec(sim);
    add_rs(sim);
    cl.add_sim(sim);
    cl.add_output(sim);
    CLI::App* table = app.add_subcommand("reproduce-table", "analytic vs Monte-Carlo comparison for a shipped table");
    table->add_option("table", table_id, "1..10, bures-corr or bures-uncorr")->required();
    table->add_option("--data-dir", data_dir, "directory with table_<id>.json files");
    table->add_flag("--analytic-only", analytic_only, "skip the Monte-Carlo columns");
    cl.add_sim(table);
    cl.add_output(table);
    CLI::App* curve = app.add_subcommand("curve", "plot-ready grid with optional Monte-Carlo histogram");
    cl.add_spec(curve);
    curve->add_option("--quantity", quantity, "sf-min, cdf-max, pdf-min or pdf-max");
    curve->add_option("--grid", grid_text, "lo,hi,points (bins when --mc is set)")->required();
    curve->add_flag("--mc", with_mc, "add Monte-Carlo columns");
    cl.add_sim(curve);
    cl.add_output(curve);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const Settings st = cl.settings();
        auto bound = [&](const std::string& flag, const std::string& key) {
            const std::string text = !flag.empty() ? flag : lookup(st, key).value_or("");
            if (text.empty()) throw ValidationError("missing required parameter '" + key.substr(key.find('.') + 1) + "'");
            return parse_real(key.substr(key.find('.') + 1), text);
        };
        CLI::App* used = app.get_subcommands().front();
        const std::string cmd = used->get_name();

        if (cmd == "reproduce-table") {
            TableRunOptions o;
            o.data_dir = data_dir;
            o.sim = parse_simulation(st);
            o.analytic_only = analytic_only;
            RunReport report = reproduce_table(table_id, o);
            if (!cl.timing) report.wall_time.reset();
            emit(report, parse_format(cl.format.empty() ? "json" : cl.format), cl.output);
            return report.all_pass() ? 0 : 3;
        }

        const EnsembleSpec spec = parse_spec(st);
        if (cmd == "partition") {
            std::cout << format_number(partition(*build(spec))) << "\n";
            return 0;
        }
        if (cmd == "curve") {
            const Grid g = parse_grid(grid_text);
            CurveOptions o;
            o.quantity = parse_curve_quantity(quantity);
            o.lo = g.lo;
            o.hi = g.hi;
            o.points = g.count;
            o.with_mc = with_mc;
            o.sim = parse_simulation(st);
            if (with_mc && !lookup(st, "simulation.method")) o.sim.method = auto_method(spec);
            print_report(make_curve(spec, o), cl, false);
            return 0;
        }

        const ModelPtr model = build(spec);
        RunReport report;
        if (cmd == "gap" || cmd == "double-gap" || cmd == "joint-pdf" || cmd == "simulate") {
            const double r = bound(r_text, "query.r"), s = bound(s_text, "query.s");
            if (!(r <= s)) throw ValidationError("r ≤ s violated");
            auto make = [&](const std::string& q, double value) {
                Record rec;
                rec.query = q;
                rec.spec = spec;
                rec.r = r;
                rec.s = s;
                rec.analytic = value;
                return rec;
            };
            if (cmd == "gap") report.records.push_back(make(cmd, gap_probability(*model, r, s)));
            if (cmd == "double-gap") report.records.push_back(make(cmd, double_gap_probability(*model, r, s)));
            if (cmd == "joint-pdf") report.records.push_back(make(cmd, joint_extreme_pdf(*model, r, s)));
            if (cmd == "simulate") {
                mc::SimulationConfig cfg = parse_simulation(st);
                if (!lookup(st, "simulation.method")) cfg.method = auto_method(spec);
                report.seed = cfg.seed;
                const McPair m = simulate_pair(spec, cfg, r, s);
                Record e = make("gap", gap_probability(*model, r, s));
                Record et = make("double-gap", double_gap_probability(*model, r, s));
                e.mc_value = m.gap.value;
                e.mc_stderr = m.gap.std_error;
                et.mc_value = m.double_gap.value;
                et.mc_stderr = m.double_gap.std_error;
                e.method = et.method = m.method;
                report.records = {e, et};
                print_report(report, cl, false);
                return 0;
            }
            print_report(report, cl, true);
            return 0;
        }

        // Point or grid queries.
        std::vector<double> xs;
        if (!grid_text.empty()) xs = grid_points(parse_grid(grid_text));
        else xs.push_back(bound(x_text, "query.x"));
        const CurveQuantity q = parse_curve_quantity(cmd);
        for (double x : xs) {
            Record rec;
            rec.query = cmd;
            rec.spec = spec;
            rec.has_x = true;
            rec.x = x;
            rec.analytic = curve_value(*model, q, x);
            report.records.push_back(std::move(rec));
        }
        print_report(report, cl, grid_text.empty());
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NotDirectlyConstructible& e) {
        std::cerr << "error: " << e.what() << " (use --method loggas)\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace rmtgaps::io
