#pragma once

#include <string>
#include <vector>

#include "rmtgaps/ensemble_spec.hpp"

namespace rmtgaps::testing {

// One parameter set per ensemble variant (six families, both correlation
// settings), small enough for dense grids.
inline std::vector<EnsembleSpec> reference_variants(int n = 3) {
    auto sig = [n](std::vector<double> v) {
        v.resize(n, 1.0);
        return v;
    };
    std::vector<EnsembleSpec> out;
    auto add = [&](Family f, bool corr, std::vector<double> sigma, double a, double b, double k) {
        EnsembleSpec s;
        s.family = f;
        s.correlated = corr;
        s.n = n;
        if (corr) s.sigma = sig(std::move(sigma));
        s.alpha = a;
        s.beta = b;
        s.kappa = k;
        out.push_back(s);
    };
    add(Family::GaussWigner, false, {}, 0, 0, 0);
    add(Family::GaussWigner, true, {0.8, 1.3, 1.7}, 0, 0, 0);
    add(Family::LaguerreWishart, false, {}, 1.5, 0, 0);
    add(Family::LaguerreWishart, true, {0.5, 2.0, 1.2}, 1, 0, 0);
    add(Family::CauchyLorentzI, false, {}, 0, 0, n + 1.0);
    add(Family::CauchyLorentzI, true, {0.7, 1.5, 1.1}, 0, 0, n + 0.6);
    add(Family::CauchyLorentzII, false, {}, 1, 0, 2 * n + 2.5);
    add(Family::CauchyLorentzII, true, {0.5, 2.0, 1.3}, 0.5, 0, 2 * n + 1.5);
    add(Family::JacobiMANOVA, false, {}, 1, 2, 0);
    add(Family::JacobiMANOVA, true, {0.5, 1.5, 0.8}, 1, 1.5, 2 * n + 1.3);
    add(Family::BuresHall, false, {}, 0.5, 0, 0);
    add(Family::BuresHall, true, {0.6, 1.8, 1.2}, 0.3, 0, 0);
    return out;
}

}  // namespace rmtgaps::testing
