#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rmtgaps/ensemble_spec.hpp"

namespace rmtgaps {

// One row of a comparison table shipped under data/tables.
struct TableRow {
    int index = 0;
    EnsembleSpec spec;
    double r = 0.0, s = 0.0;
    double published_E = 0.0, published_E_sim = 0.0;
    double published_Et = 0.0, published_Et_sim = 0.0;
    // Matrix-construction sizes printed in the table, when present.
    std::optional<int> m, n_a, n_b;
};

struct Table {
    std::string id;
    std::string title;
    std::vector<TableRow> rows;
};

// Table ids: "1".."10", "bures-corr", "bures-uncorr".
std::vector<std::string> table_ids();

// Reads <dir>/table_<id>.json. Correlated rows take the first n entries of
// the table's sigma pool.
Table load_table(const std::string& dir, const std::string& id);

// Default data directory baked in at build time.
std::string default_table_dir();

// Parses "3/4", "0.75", "inf", "-inf".
double parse_number(const std::string& text);

}  // namespace rmtgaps
