#pragma once

#include <string>
#include <vector>

namespace rmtgaps {

enum class Family { GaussWigner, LaguerreWishart, CauchyLorentzI, CauchyLorentzII, JacobiMANOVA, BuresHall };

// Full parameterization of one of the twelve ensemble variants. Parameters a
// family does not use are ignored; sigma is empty for uncorrelated variants.
struct EnsembleSpec {
    Family family = Family::GaussWigner;
    bool correlated = false;
    int n = 1;
    std::vector<double> sigma;
    double alpha = 0.0;
    double beta = 0.0;
    double kappa = 0.0;
};

// Canonical lower-case names used on the command line and in data files,
// e.g. "gauss-wigner", "cauchy-lorentz-ii".
std::string family_name(Family f);
Family parse_family(const std::string& name);

// Short human-readable summary, e.g. "laguerre-wishart corr n=3 alpha=2".
std::string describe(const EnsembleSpec& spec);

// Throws ValidationError naming the first violated constraint.
void validate(const EnsembleSpec& spec);

// Eigenvalue domain (lo, hi) of the family.
struct Domain {
    double lo;
    double hi;
};
Domain family_domain(Family f);

}  // namespace rmtgaps
