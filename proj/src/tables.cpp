#include "rmtgaps/tables.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "rmtgaps/errors.hpp"

#ifndef RMTGAPS_DATA_DIR
#define RMTGAPS_DATA_DIR "data/tables"
#endif

namespace rmtgaps {

namespace {

using nlohmann::json;

double number_field(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_number(v.get<std::string>());
    throw ValidationError("expected a number, got " + v.dump());
}

}  // namespace

std::vector<std::string> table_ids() {
    return {"1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "bures-corr", "bures-uncorr"};
}

std::string default_table_dir() { return RMTGAPS_DATA_DIR; }

double parse_number(const std::string& text) {
    const double inf = std::numeric_limits<double>::infinity();
    if (text == "inf" || text == "+inf") return inf;
    if (text == "-inf") return -inf;
    const auto slash = text.find('/');
    try {
        std::size_t used = 0;
        if (slash == std::string::npos) {
            const double v = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return v;
        }
        const std::string num = text.substr(0, slash), den = text.substr(slash + 1);
        const double a = std::stod(num, &used);
        if (used != num.size()) throw std::invalid_argument(text);
        const double b = std::stod(den, &used);
        if (used != den.size() || b == 0) throw std::invalid_argument(text);
        return a / b;
    } catch (const std::exception&) {
        throw ValidationError("cannot parse number '" + text + "'");
    }
}

Table load_table(const std::string& dir, const std::string& id) {
    const std::string path = dir + "/table_" + id + ".json";
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open table file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    Table t;
    t.id = doc.at("id").get<std::string>();
    t.title = doc.at("title").get<std::string>();
    const Family family = parse_family(doc.at("family").get<std::string>());
    const bool correlated = doc.at("correlated").get<bool>();
    std::vector<double> pool;
    if (doc.contains("sigma_pool"))
        for (const auto& v : doc["sigma_pool"]) pool.push_back(number_field(v));
    int index = 0;
    for (const auto& r : doc.at("rows")) {
        TableRow row;
        row.index = ++index;
        row.spec.family = family;
        row.spec.correlated = correlated;
        row.spec.n = r.at("n").get<int>();
        row.spec.alpha = r.contains("alpha") ? number_field(r["alpha"]) : 0.0;
        row.spec.beta = r.contains("beta") ? number_field(r["beta"]) : 0.0;
        row.spec.kappa = r.contains("kappa") ? number_field(r["kappa"]) : 0.0;
        if (correlated) {
            if (static_cast<int>(pool.size()) < row.spec.n)
                throw ValidationError(path + ": sigma pool shorter than n");
            row.spec.sigma.assign(pool.begin(), pool.begin() + row.spec.n);
        }
        row.r = number_field(r.at("r"));
        row.s = number_field(r.at("s"));
        row.published_E = number_field(r.at("E"));
        row.published_E_sim = number_field(r.at("E_sim"));
        row.published_Et = number_field(r.at("Et"));
        row.published_Et_sim = number_field(r.at("Et_sim"));
        if (r.contains("m")) row.m = r["m"].get<int>();
        if (r.contains("nA")) row.n_a = r["nA"].get<int>();
        if (r.contains("nB")) row.n_b = r["nB"].get<int>();
        t.rows.push_back(row);
    }
    return t;
}

}  // namespace rmtgaps
