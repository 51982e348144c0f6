#include "rmtgaps/ensemble_spec.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "rmtgaps/errors.hpp"

namespace rmtgaps {

namespace {

struct FamilyName {
    Family family;
    const char* name;
};

constexpr FamilyName kNames[] = {
    {Family::GaussWigner, "gauss-wigner"},       {Family::LaguerreWishart, "laguerre-wishart"},
    {Family::CauchyLorentzI, "cauchy-lorentz-i"}, {Family::CauchyLorentzII, "cauchy-lorentz-ii"},
    {Family::JacobiMANOVA, "jacobi-manova"},     {Family::BuresHall, "bures-hall"},
};

std::string fail_message(const EnsembleSpec& s, const std::string& what) {
    return family_name(s.family) + ": constraint " + what + " violated";
}

}  // namespace

std::string family_name(Family f) {
    for (const auto& e : kNames)
        if (e.family == f) return e.name;
    return "unknown";
}

Family parse_family(const std::string& name) {
    for (const auto& e : kNames)
        if (name == e.name) return e.family;
    throw ValidationError("unknown family '" + name + "'");
}

std::string describe(const EnsembleSpec& s) {
    std::ostringstream os;
    os.precision(10);
    os << family_name(s.family) << (s.correlated ? " corr" : " uncorr") << " n=" << s.n;
    switch (s.family) {
        case Family::GaussWigner:
            break;
        case Family::CauchyLorentzI:
            os << " kappa=" << s.kappa;
            break;
        case Family::LaguerreWishart:
        case Family::BuresHall:
            os << " alpha=" << s.alpha;
            break;
        case Family::CauchyLorentzII:
            os << " alpha=" << s.alpha << " kappa=" << s.kappa;
            break;
        case Family::JacobiMANOVA:
            os << " alpha=" << s.alpha << " beta=" << s.beta;
            if (s.correlated) os << " kappa=" << s.kappa;
            break;
    }
    if (s.correlated) {
        os << " sigma=(";
        for (std::size_t i = 0; i < s.sigma.size(); ++i) os << (i ? "," : "") << s.sigma[i];
        os << ")";
    }
    return os.str();
}

void validate(const EnsembleSpec& s) {
    if (s.n < 1) throw ValidationError(fail_message(s, "n≥1"));
    if (s.n > 12) throw ValidationError(fail_message(s, "n≤12"));
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(s.alpha) || !finite(s.beta) || !finite(s.kappa))
        throw ValidationError(family_name(s.family) + ": parameters must be finite");
    if (s.correlated) {
        if (static_cast<int>(s.sigma.size()) != s.n)
            throw ValidationError(family_name(s.family) + ": sigma has " + std::to_string(s.sigma.size()) +
                                  " entries but n = " + std::to_string(s.n));
        for (double v : s.sigma)
            if (!(v > 0) || !finite(v)) throw ValidationError(fail_message(s, "σ_j>0"));
        for (int i = 0; i < s.n; ++i)
            for (int j = i + 1; j < s.n; ++j) {
                const double gap = std::abs(s.sigma[i] - s.sigma[j]);
                if (gap <= 1e-6 * std::max(s.sigma[i], s.sigma[j]))
                    throw ValidationError(family_name(s.family) +
                                          ": degenerate sigma (sigma_" + std::to_string(i + 1) + " = sigma_" +
                                          std::to_string(j + 1) + "); perturb the inputs explicitly");
            }
    } else if (!s.sigma.empty()) {
        throw ValidationError(family_name(s.family) + ": uncorrelated variants take no sigma");
    }
    const double n = s.n;
    switch (s.family) {
        case Family::GaussWigner:
            break;
        case Family::LaguerreWishart:
        case Family::BuresHall:
            if (!(s.alpha > -1)) throw ValidationError(fail_message(s, "α>−1"));
            break;
        case Family::CauchyLorentzI:
            if (!(s.kappa > n - 0.5)) throw ValidationError(fail_message(s, "κ>n−1/2"));
            break;
        case Family::CauchyLorentzII:
            if (!(s.alpha > -1)) throw ValidationError(fail_message(s, "α>−1"));
            if (!(s.kappa > 2 * n + s.alpha - 1)) throw ValidationError(fail_message(s, "κ>2n+α−1"));
            break;
        case Family::JacobiMANOVA:
            if (!(s.alpha > -1)) throw ValidationError(fail_message(s, "α>−1"));
            if (!(s.beta > -1)) throw ValidationError(fail_message(s, "β>−1"));
            if (s.correlated) {
                // kappa - n + 1 = -p with 0 <= p <= n-2 makes the columns
                // (1 + c x)^p linearly dependent: a 0/0 limit.
                const double t = s.kappa - n + 1;
                const double p = -t;
                if (std::abs(p - std::round(p)) < 1e-12 && std::round(p) >= 0 && std::round(p) <= n - 2)
                    throw ValidationError(fail_message(s, "κ−n+1 ∉ {0, −1, …, 2−n} (limit case)"));
            }
            break;
    }
}

Domain family_domain(Family f) {
    const double inf = std::numeric_limits<double>::infinity();
    switch (f) {
        case Family::GaussWigner:
        case Family::CauchyLorentzI:
            return {-inf, inf};
        case Family::JacobiMANOVA:
            return {0.0, 1.0};
        default:
            return {0.0, inf};
    }
}

}  // namespace rmtgaps
