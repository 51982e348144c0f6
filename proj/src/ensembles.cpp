#include "rmtgaps/ensembles.hpp"

#include <cmath>
#include <sstream>

#include "rmtgaps/errors.hpp"
#include "rmtgaps/specfun.hpp"

namespace rmtgaps {

namespace sf = specfun;

namespace {

const double kInf = std::numeric_limits<double>::infinity();
const double kSqrtPi = std::sqrt(M_PI);

double sgn_pow(int p) { return (p % 2 == 0) ? 1.0 : -1.0; }

// Integral of one kernel entry from lo to x, from x to hi, and its integrand.
struct EntryFns {
    std::function<double(int, int, double)> lower;
    std::function<double(int, int, double)> upper;
    std::function<double(int, int, double)> density;
};

// int_a^b from whichever of the two primitives avoids the larger cancellation.
double entry_segment(const EntryFns& e, int j, int k, double a, double b, double lo, double hi) {
    if (a <= lo) return e.lower(j, k, b);
    if (b >= hi) return e.upper(j, k, a);
    const double lb = e.lower(j, k, b);
    const double ua = e.upper(j, k, a);
    if (std::abs(lb) <= std::abs(ua)) return lb - e.lower(j, k, a);
    return ua - e.upper(j, k, b);
}

TypeIKernels make_type1(const EntryFns& e, int n, double lo, double hi) {
    TypeIKernels t;
    t.segment = [e, n, lo, hi](double a, double b) {
        Matrix m(n, n);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) m(j, k) = entry_segment(e, j, k, a, b, lo, hi);
        return m;
    };
    t.density = [e, n](double x) {
        Matrix m(n, n);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) m(j, k) = e.density(j, k, x);
        return m;
    };
    return t;
}

// Primitives of x^p w(x) for an even weight on the real line, given the
// right tail T(t) = int_t^inf, the head H(t) = int_0^t (t >= 0) and the
// half-line moment M = int_0^inf.
struct HalfLine {
    std::function<double(double)> tail, head;
    double half;
};

double even_lower(const HalfLine& h, int p, double x) {
    if (x <= 0) return sgn_pow(p) * h.tail(-x);
    return sgn_pow(p) * h.half + h.head(x);
}

double even_upper(const HalfLine& h, int p, double x) { return sgn_pow(p) * even_lower(h, p, -x); }

double power(double x, double a) { return a == 0.0 ? 1.0 : std::pow(x, a); }

// ---- Type I families (0-based j, k) ----

EntryFns gue_entries() {
    EntryFns e;
    auto half_line = [](int p) {
        const double a = 0.5 * (p + 1);
        return HalfLine{[a](double t) { return 0.5 * sf::gamma_upper(a, t * t); },
                        [a](double t) { return 0.5 * sf::gamma_lower(a, t * t); }, 0.5 * std::tgamma(a)};
    };
    e.lower = [half_line](int j, int k, double x) { return even_lower(half_line(j + k), j + k, x); };
    e.upper = [half_line](int j, int k, double x) { return even_upper(half_line(j + k), j + k, x); };
    e.density = [](int j, int k, double x) { return power(x, j + k) * std::exp(-x * x); };
    return e;
}

EntryFns lue_entries(double alpha) {
    EntryFns e;
    e.lower = [alpha](int j, int k, double x) { return sf::gamma_lower(j + k + alpha + 1, x); };
    e.upper = [alpha](int j, int k, double x) { return sf::gamma_upper(j + k + alpha + 1, x); };
    e.density = [alpha](int j, int k, double x) { return power(x, j + k + alpha) * std::exp(-x); };
    return e;
}

EntryFns lw_corr_entries(double alpha, std::vector<double> sigma) {
    EntryFns e;
    e.lower = [alpha, sigma](int j, int k, double x) {
        const double a = j + alpha + 1;
        return std::pow(sigma[k], a) * sf::gamma_lower(a, x / sigma[k]);
    };
    e.upper = [alpha, sigma](int j, int k, double x) {
        const double a = j + alpha + 1;
        return std::pow(sigma[k], a) * sf::gamma_upper(a, x / sigma[k]);
    };
    e.density = [alpha, sigma](int j, int k, double x) { return power(x, j + alpha) * std::exp(-x / sigma[k]); };
    return e;
}

// int_0^t x^p (1+x^2)^(-kappa) dx and its tail through u = 1/x^2.
HalfLine cl1_half_line(int p, double kappa) {
    const double a = kappa - 0.5 * (p + 1);
    const double b = 1 - kappa;
    return HalfLine{[a, b](double t) { return t == 0 ? 0.5 * sf::beta(a, 1 - a - b) : 0.5 * sf::beta_inc_negarg(1 / (t * t), a, b); },
                    [a, b](double t) { return t == 0 ? 0.0 : 0.5 * sf::beta_inc_negarg_tail(1 / (t * t), a, b); },
                    0.5 * sf::beta(0.5 * (p + 1), kappa - 0.5 * (p + 1))};
}

EntryFns cl1_entries(double kappa) {
    EntryFns e;
    e.lower = [kappa](int j, int k, double x) { return even_lower(cl1_half_line(j + k, kappa), j + k, x); };
    e.upper = [kappa](int j, int k, double x) { return even_upper(cl1_half_line(j + k, kappa), j + k, x); };
    e.density = [kappa](int j, int k, double x) { return power(x, j + k) * std::pow(1 + x * x, -kappa); };
    return e;
}

EntryFns cl2_entries(double alpha, double kappa) {
    EntryFns e;
    e.lower = [=](int j, int k, double x) { return sf::beta_inc_negarg(x, j + k + alpha + 1, 1 - kappa); };
    e.upper = [=](int j, int k, double x) { return sf::beta_inc_negarg_tail(x, j + k + alpha + 1, 1 - kappa); };
    e.density = [=](int j, int k, double x) { return power(x, j + k + alpha) * std::pow(1 + x, -kappa); };
    return e;
}

EntryFns cl2_corr_entries(int n, double alpha, double kappa, std::vector<double> sigma) {
    EntryFns e;
    const double b = n - kappa;
    e.lower = [=](int j, int k, double x) {
        const double a = j + alpha + 1;
        return std::pow(sigma[k], a) * sf::beta_inc_negarg(x / sigma[k], a, b);
    };
    e.upper = [=](int j, int k, double x) {
        const double a = j + alpha + 1;
        return std::pow(sigma[k], a) * sf::beta_inc_negarg_tail(x / sigma[k], a, b);
    };
    e.density = [=](int j, int k, double x) {
        return power(x, j + alpha) * std::pow(1 + x / sigma[k], -kappa + n - 1);
    };
    return e;
}

EntryFns jacobi_entries(double alpha, double beta) {
    EntryFns e;
    e.lower = [=](int j, int k, double x) { return sf::beta_inc(x, j + k + alpha + 1, beta + 1); };
    e.upper = [=](int j, int k, double x) { return sf::beta_inc_upper(x, j + k + alpha + 1, beta + 1); };
    e.density = [=](int j, int k, double x) { return power(x, j + k + alpha) * power(1 - x, beta); };
    return e;
}

// General-kappa correlated Jacobi: both primitives are Appell F1 Euler
// integrals anchored at their own endpoint; the upper one uses t = 1 - x.
EntryFns jacobi_corr_entries(int n, double alpha, double beta, double kappa, std::vector<double> sigma) {
    EntryFns e;
    const double c = kappa - n + 1;
    e.lower = [=](int j, int k, double x) {
        if (x <= 0) return 0.0;
        const double a = j + alpha + 1;
        if (x >= 1) return sf::beta(a, beta + 1) * sf::hyp2f1(a, c, a + beta + 1, 1 - 1 / sigma[k]);
        return std::pow(x, a) / a * sf::appell_f1(a, -beta, c, a + 1, x, (1 - 1 / sigma[k]) * x);
    };
    e.upper = [=](int j, int k, double x) {
        const double a = j + alpha + 1;
        if (x >= 1) return 0.0;
        if (x <= 0) return sf::beta(a, beta + 1) * sf::hyp2f1(a, c, a + beta + 1, 1 - 1 / sigma[k]);
        const double t = 1 - x;
        return std::pow(sigma[k], c) * std::pow(t, beta + 1) / (beta + 1) *
               sf::appell_f1(beta + 1, 1 - a, c, beta + 2, t, (1 - sigma[k]) * t);
    };
    e.density = [=](int j, int k, double x) {
        return power(x, j + alpha) * power(1 - x, beta) * std::pow(1 + (1 / sigma[k] - 1) * x, -c);
    };
    return e;
}

// ---- Type II families ----

double schur_kernel(double l, double m) { return (m - l) / (m + l); }

// int_a^b of a single border function from its two primitives.
std::function<Eigen::VectorXd(double, double)> make_border(int n, double lo, double hi,
                                                           std::function<double(int, double)> lower,
                                                           std::function<double(int, double)> upper) {
    EntryFns e;
    e.lower = [lower](int j, int, double x) { return lower(j, x); };
    e.upper = [upper](int j, int, double x) { return upper(j, x); };
    return [e, n, lo, hi](double a, double b) {
        Eigen::VectorXd v(n);
        for (int j = 0; j < n; ++j) v(j) = b > a ? entry_segment(e, j, 0, a, b, lo, hi) : 0.0;
        return v;
    };
}

TypeIIKernels gw_corr_kernels(const std::vector<double>& sigma) {
    const int n = static_cast<int>(sigma.size());
    TypeIIKernels t;
    t.problem.count = n;
    t.problem.f = schur_kernel;
    t.problem.pair_antidiagonal = true;
    t.problem.weighted_g = [sigma, n](double x, double* out) {
        for (int j = 0; j < n; ++j) out[j] = std::exp(-x * x / (sigma[j] * sigma[j]));
    };
    auto half = [sigma](int j) {
        const double s = sigma[j];
        return HalfLine{[s](double u) { return 0.5 * kSqrtPi * s * std::erfc(u / s); },
                        [s](double u) { return 0.5 * kSqrtPi * s * sf::erf(u / s); }, 0.5 * kSqrtPi * s};
    };
    t.border = make_border(
        n, -kInf, kInf, [half](int j, double x) { return even_lower(half(j), 0, x); },
        [half](int j, double x) { return even_upper(half(j), 0, x); });
    return t;
}

TypeIIKernels cl1_corr_kernels(const std::vector<double>& sigma, double kappa) {
    const int n = static_cast<int>(sigma.size());
    const double c = kappa - n + 1;
    TypeIIKernels t;
    t.problem.count = n;
    t.problem.f = schur_kernel;
    t.problem.pair_antidiagonal = true;
    t.problem.weighted_g = [sigma, n, c](double x, double* out) {
        for (int j = 0; j < n; ++j) out[j] = std::pow(1 + x * x / (sigma[j] * sigma[j]), -c);
    };
    // int_0^t (1 + x^2/s^2)^(-c) dx = (s/2) int_0^{t^2/s^2} u^(-1/2) (1+u)^(-c) du
    auto half = [sigma, c](int j) {
        const double s = sigma[j];
        return HalfLine{[s, c](double u) { return 0.5 * s * sf::beta_inc_negarg_tail(u * u / (s * s), 0.5, 1 - c); },
                        [s, c](double u) { return 0.5 * s * sf::beta_inc_negarg(u * u / (s * s), 0.5, 1 - c); },
                        0.5 * s * sf::beta(0.5, c - 0.5)};
    };
    t.border = make_border(
        n, -kInf, kInf, [half](int j, double x) { return even_lower(half(j), 0, x); },
        [half](int j, double x) { return even_upper(half(j), 0, x); });
    return t;
}

TypeIIKernels bures_corr_kernels(const std::vector<double>& sigma, double alpha) {
    const int n = static_cast<int>(sigma.size());
    TypeIIKernels t;
    t.problem.count = n;
    t.problem.f = schur_kernel;
    t.problem.weighted_g = [sigma, n, alpha](double x, double* out) {
        const double xa = power(x, alpha);
        for (int j = 0; j < n; ++j) out[j] = xa * std::exp(-x / sigma[j]);
    };
    t.border = make_border(
        n, 0, kInf,
        [sigma, alpha](int j, double x) { return std::pow(sigma[j], alpha + 1) * sf::gamma_lower(alpha + 1, x / sigma[j]); },
        [sigma, alpha](int j, double x) { return std::pow(sigma[j], alpha + 1) * sf::gamma_upper(alpha + 1, x / sigma[j]); });
    return t;
}

TypeIIKernels bures_kernels(int n, double alpha) {
    TypeIIKernels t;
    t.problem.count = n;
    t.problem.f = schur_kernel;
    t.problem.weighted_g = [n, alpha](double x, double* out) {
        const double e = std::exp(-x);
        for (int j = 0; j < n; ++j) out[j] = power(x, alpha + j) * e;
    };
    t.border = make_border(
        n, 0, kInf, [alpha](int j, double x) { return sf::gamma_lower(j + alpha + 1, x); },
        [alpha](int j, double x) { return sf::gamma_upper(j + alpha + 1, x); });
    return t;
}

// ---- closed forms ----

double vandermonde(const std::vector<double>& v) {
    double p = 1;
    for (std::size_t j = 0; j < v.size(); ++j)
        for (std::size_t k = 0; k < j; ++k) p *= v[j] - v[k];
    return p;
}

double ratio_product(const std::vector<double>& v) {
    double p = 1;
    for (std::size_t j = 0; j < v.size(); ++j)
        for (std::size_t k = 0; k < j; ++k) p *= (v[j] - v[k]) / (v[j] + v[k]);
    return p;
}

std::vector<double> mapped(const std::vector<double>& v, double (*f)(double)) {
    std::vector<double> out;
    for (double x : v) out.push_back(f(x));
    return out;
}

double square(double x) { return x * x; }
double root(double x) { return std::sqrt(x); }

void attach_closed_sf_min(EnsembleModel& m) {
    const EnsembleSpec& s = m.spec;
    if (s.family != Family::LaguerreWishart || s.alpha != 0.0) return;
    double rate = s.n;
    if (s.correlated) {
        rate = 0;
        for (double v : s.sigma) rate += 1 / v;
    }
    m.closed_sf_min = [rate](double x) { return std::exp(-x * rate); };
}

void check_partition(const EnsembleModel& m) {
    const auto closed = closed_form_partition(m.spec);
    if (!closed) return;
    const double z = partition(m);
    if (!(std::abs(z - *closed) <= 1e-8 * std::abs(*closed))) {
        std::ostringstream os;
        os.precision(12);
        os << "partition function " << z << " disagrees with the closed form " << *closed << " for "
           << describe(m.spec);
        throw ModelBuildError(os.str());
    }
}

}  // namespace

bool jacobi_map_applies(const EnsembleSpec& s) {
    return s.family == Family::JacobiMANOVA && s.correlated &&
           std::abs(s.beta - (s.kappa - s.alpha - 2 * s.n)) <= 1e-12;
}

std::optional<double> closed_form_partition(const EnsembleSpec& s) {
    const int n = s.n;
    const double a = s.alpha, b = s.beta, k = s.kappa;
    const double nf = std::tgamma(n + 1.0);
    double p = 1;
    switch (s.family) {
        case Family::GaussWigner:
            if (s.correlated) {
                for (double v : s.sigma) p *= v;
                return nf * std::pow(M_PI, 0.5 * n) * p * ratio_product(mapped(s.sigma, square));
            }
            return std::pow(M_PI, 0.5 * n) / std::pow(2.0, 0.5 * n * (n - 1)) * sf::barnes_g(n + 2);
        case Family::LaguerreWishart:
            if (s.correlated) {
                for (int j = 1; j <= n; ++j) p *= std::pow(s.sigma[j - 1], a + 1) * std::tgamma(j + a);
                return nf * vandermonde(s.sigma) * p;
            }
            for (int j = 1; j <= n; ++j) p *= std::tgamma(j + 1.0) * std::tgamma(j + a);
            return p;
        case Family::CauchyLorentzI:
            if (s.correlated) {
                if (k != n) return std::nullopt;
                for (double v : s.sigma) p *= v;
                return nf * std::pow(M_PI, n) * p * ratio_product(s.sigma);
            }
            for (int j = 1; j <= n; ++j)
                p *= std::exp(std::lgamma(j + 1.0) + std::lgamma(j + 2 * k - 2 * n) - 2 * std::lgamma(j + k - n));
            return std::pow(2.0, n * n - 2 * k * n + n) * std::pow(M_PI, n) * p;
        case Family::CauchyLorentzII:
            if (s.correlated) {
                for (int j = 1; j <= n; ++j) p *= std::pow(s.sigma[j - 1], a + 1) * sf::beta(j + a, k - a - n + 1 - j);
                return nf * vandermonde(s.sigma) * p;
            }
            for (int j = 1; j <= n; ++j)
                p *= std::exp(std::lgamma(j) + std::lgamma(j + a) + std::lgamma(k - a - n - j + 1) - std::lgamma(k - j + 1));
            return nf * p;
        case Family::JacobiMANOVA:
            if (s.correlated) {
                if (!jacobi_map_applies(s)) return std::nullopt;
                EnsembleSpec c = s;
                c.family = Family::CauchyLorentzII;
                return closed_form_partition(c);
            }
            for (int j = 1; j <= n; ++j)
                p *= std::exp(std::lgamma(j + 1.0) + std::lgamma(j + a) + std::lgamma(j + b) - std::lgamma(j + a + b + n));
            return p;
        case Family::BuresHall:
            if (s.correlated) {
                if (a != -0.5) return std::nullopt;
                for (double v : s.sigma) p *= std::sqrt(v);
                return nf * std::pow(M_PI, 0.5 * n) * p * ratio_product(mapped(s.sigma, root));
            }
            for (int j = 1; j <= n; ++j)
                p *= std::exp(std::lgamma(j + 1.0) + std::lgamma(j + 2 * a + 1) - std::lgamma(j + a + 0.5));
            return std::pow(M_PI, 0.5 * n) / std::pow(2.0, n * n + 2 * a * n) * p;
    }
    return std::nullopt;
}

std::optional<Matrix> closed_form_h(const EnsembleSpec& s) {
    const int n = s.n;
    const int big = n % 2 == 0 ? n : n + 1;
    Matrix h = Matrix::Zero(big, big);
    std::function<double(int, int)> entry;
    std::function<double(int)> border;
    const double a = s.alpha;
    if (s.family == Family::GaussWigner && s.correlated) {
        const auto& sg = s.sigma;
        entry = [&](int j, int k) {
            return M_PI * sg[j] * sg[k] * (sg[k] * sg[k] - sg[j] * sg[j]) / (sg[k] * sg[k] + sg[j] * sg[j]);
        };
        border = [&](int j) { return kSqrtPi * sg[j]; };
    } else if (s.family == Family::CauchyLorentzI && s.correlated) {
        const auto& sg = s.sigma;
        const double d = s.kappa - n;
        const double pre = M_PI * std::exp(2 * (std::lgamma(d + 0.5) - std::lgamma(d + 1))) / 2;
        auto term = [d](double x, double y) {
            return std::pow(x, 2 * (d + 1)) * std::pow(y, -2 * d) *
                   sf::hyp2f1(2 * d + 1, d + 1.5, 2 * (d + 1), 1 - x * x / (y * y));
        };
        entry = [&sg, pre, term](int j, int k) { return pre * (term(sg[j], sg[k]) - term(sg[k], sg[j])); };
        border = [&sg, d](int j) { return kSqrtPi * sg[j] * std::exp(std::lgamma(d + 0.5) - std::lgamma(d + 1)); };
    } else if (s.family == Family::BuresHall && s.correlated) {
        const auto& sg = s.sigma;
        const double pre = 0.5 * std::exp(2 * std::lgamma(a + 1));
        auto term = [a](double x, double y) {
            return std::pow(x, 2 * a + 2) * sf::hyp2f1(2 * a + 2, a + 2, 2 * a + 3, 1 - x / y);
        };
        entry = [&sg, pre, term](int j, int k) { return pre * (term(sg[j], sg[k]) - term(sg[k], sg[j])); };
        border = [&](int j) { return std::pow(sg[j], a + 1) * std::tgamma(a + 1); };
    } else if (s.family == Family::BuresHall && !s.correlated) {
        entry = [&](int j, int k) {
            const int jj = j + 1, kk = k + 1;
            return (kk - jj) / (jj + kk + 2 * a) * std::tgamma(jj + a) * std::tgamma(kk + a);
        };
        border = [&](int j) { return std::tgamma(j + 1 + a); };
    } else {
        return std::nullopt;
    }
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            h(j, k) = entry(j, k);
            h(k, j) = -h(j, k);
        }
    if (big > n)
        for (int j = 0; j < n; ++j) {
            h(j, n) = border(j);
            h(n, j) = -h(j, n);
        }
    return h;
}

ModelPtr build(const EnsembleSpec& spec, const BuildOptions& opts) {
    validate(spec);
    auto m = std::make_shared<EnsembleModel>();
    m->spec = spec;
    const Domain dom = family_domain(spec.family);
    m->lo = dom.lo;
    m->hi = dom.hi;
    const int n = spec.n;
    const double a = spec.alpha, b = spec.beta, k = spec.kappa;
    const auto& sg = spec.sigma;

    auto type1 = [&](const EntryFns& e) {
        m->type = KernelType::TypeI;
        m->dim = n;
        m->type1 = make_type1(e, n, m->lo, m->hi);
    };
    auto type2 = [&](TypeIIKernels t) {
        m->type = KernelType::TypeII;
        m->dim = n % 2 == 0 ? n : n + 1;
        t.rel_tol = opts.type2_rel_tol;
        m->type2 = std::move(t);
    };

    switch (spec.family) {
        case Family::GaussWigner:
            if (spec.correlated) type2(gw_corr_kernels(sg));
            else type1(gue_entries());
            break;
        case Family::LaguerreWishart:
            type1(spec.correlated ? lw_corr_entries(a, sg) : lue_entries(a));
            break;
        case Family::CauchyLorentzI:
            if (spec.correlated) type2(cl1_corr_kernels(sg, k));
            else type1(cl1_entries(k));
            break;
        case Family::CauchyLorentzII:
            type1(spec.correlated ? cl2_corr_entries(n, a, k, sg) : cl2_entries(a, k));
            break;
        case Family::JacobiMANOVA: {
            if (!spec.correlated) {
                type1(jacobi_entries(a, b));
                break;
            }
            JacobiRoute route = opts.jacobi_route;
            if (route == JacobiRoute::Auto)
                route = jacobi_map_applies(spec) ? JacobiRoute::CauchyLorentzMap : JacobiRoute::GeneralKappa;
            if (route == JacobiRoute::CauchyLorentzMap) {
                if (!jacobi_map_applies(spec))
                    throw ValidationError("jacobi-manova: the Cauchy-Lorentz II route needs beta = kappa - alpha - 2n");
                EnsembleSpec base = spec;
                base.family = Family::CauchyLorentzII;
                VariableMap vm;
                vm.base = build(base, opts);
                vm.to_base = [](double x) { return x / (1 - x); };
                vm.jacobian = [](double x) { return 1 / ((1 - x) * (1 - x)); };
                m->mapped = std::move(vm);
                m->type = m->mapped->base->type;
                m->dim = m->mapped->base->dim;
                return m;
            }
            type1(jacobi_corr_entries(n, a, b, k, sg));
            break;
        }
        case Family::BuresHall:
            if (spec.correlated) type2(bures_corr_kernels(sg, a));
            else type2(bures_kernels(n, a));
            break;
    }
    finalize_model(*m);
    attach_closed_sf_min(*m);
    if (opts.check_closed_form) check_partition(*m);
    return m;
}

}  // namespace rmtgaps
