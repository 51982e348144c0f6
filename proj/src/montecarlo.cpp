#include "rmtgaps/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <thread>

#include "rmtgaps/errors.hpp"
#include "rmtgaps/linalg.hpp"

namespace rmtgaps::mc {

namespace {

using cd = std::complex<double>;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Stream indices at or above this offset belong to Markov chains, below it to
// single realizations.
constexpr std::uint64_t kChainStreams = std::uint64_t{1} << 62;
// Realizations per Metropolis-over-U block for Cauchy-Lorentz I.
constexpr long kUnitaryBlock = 1000;
constexpr int kUnitaryBurnIn = 400;
constexpr int kUnitaryThin = 6;

bool is_nonneg_integer(double v) { return v >= 0 && std::abs(v - std::round(v)) < 1e-12; }
int as_int(double v) { return static_cast<int>(std::lround(v)); }

Eigen::VectorXd sigma_vector(const EnsembleSpec& spec) {
    Eigen::VectorXd s = Eigen::VectorXd::Ones(spec.n);
    if (spec.correlated)
        for (int j = 0; j < spec.n; ++j) s(j) = spec.sigma[j];
    return s;
}

// Sigma^{1/2} G with G an n x m Ginibre matrix, so GG^dag is Wishart with
// covariance Sigma and m degrees of freedom.
CMatrix wishart_factor(const Eigen::VectorXd& sigma, int m, Rng& rng) {
    CMatrix g = sample_ginibre(static_cast<int>(sigma.size()), m, rng);
    for (int j = 0; j < sigma.size(); ++j) g.row(j) *= std::sqrt(sigma(j));
    return g;
}

std::vector<double> squared_singular_values(const CMatrix& a) {
    Eigen::JacobiSVD<CMatrix> svd(a);
    const Eigen::VectorXd s = svd.singularValues();
    std::vector<double> out(s.size());
    for (int i = 0; i < s.size(); ++i) out[i] = s(i) * s(i);
    std::sort(out.begin(), out.end());
    return out;
}

// Eigenvalues of W_A (W_A + W_B)^{-1} (jacobi) or W_A W_B^{-1}, with
// W = F F^dag, as squared singular values of L^{-1} F_A where L L^dag is the
// Cholesky factor of the denominator.
std::vector<double> ratio_spectrum(const CMatrix& fa, const CMatrix& fb, bool jacobi) {
    CMatrix den = fb * fb.adjoint();
    if (jacobi) den += fa * fa.adjoint();
    Eigen::LLT<CMatrix> llt(den);
    if (llt.info() != Eigen::Success) throw NumericalError("Cholesky of a Wishart matrix failed");
    const CMatrix x = llt.matrixL().solve(fa);
    std::vector<double> ev = squared_singular_values(x);
    if (jacobi)
        for (double& v : ev) v = std::clamp(v, 0.0, 1.0);
    return ev;
}

// H = (1/i)(1-U)/(1+U) has eigenvalues -tan(theta/2) for eigenphases theta of U.
std::vector<double> cayley_spectrum(const CMatrix& u) {
    Eigen::ComplexEigenSolver<CMatrix> es(u, false);
    if (es.info() != Eigen::Success) throw NumericalError("unitary eigendecomposition failed");
    std::vector<double> ev(u.rows());
    for (int i = 0; i < u.rows(); ++i) ev[i] = -std::tan(0.5 * std::arg(es.eigenvalues()(i)));
    std::sort(ev.begin(), ev.end());
    return ev;
}

std::vector<double> hermitian_spectrum(const CMatrix& h) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition failed");
    const Eigen::VectorXd v = es.eigenvalues();
    return std::vector<double>(v.data(), v.data() + v.size());
}

CMatrix sample_wigner(const Eigen::VectorXd& sigma, Rng& rng) {
    const int n = static_cast<int>(sigma.size());
    CMatrix h(n, n);
    for (int j = 0; j < n; ++j) {
        const double s2 = sigma(j) * sigma(j);
        h(j, j) = std::sqrt(s2 / 2) * rng.normal();
        for (int k = j + 1; k < n; ++k) {
            const double t2 = sigma(k) * sigma(k);
            const double sd = std::sqrt(s2 * t2 / (2 * (s2 + t2)));
            h(j, k) = cd(sd * rng.normal(), sd * rng.normal());
            h(k, j) = std::conj(h(j, k));
        }
    }
    return h;
}

// exp(i eps X) U for a GUE-like X: a proposal symmetric under Haar measure.
CMatrix perturb_unitary(const CMatrix& u, double eps, Rng& rng) {
    const int n = static_cast<int>(u.rows());
    const CMatrix x = sample_wigner(Eigen::VectorXd::Ones(n), rng);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(x);
    const Eigen::VectorXd d = es.eigenvalues();
    Eigen::VectorXcd phase(n);
    for (int i = 0; i < n; ++i) phase(i) = std::polar(1.0, eps * d(i));
    const CMatrix v = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
    return v * u;
}

double log_abs_det_one_plus(const CMatrix& u) {
    const CMatrix a = CMatrix::Identity(u.rows(), u.cols()) + u;
    return std::log(std::abs(Eigen::PartialPivLU<CMatrix>(a).determinant()));
}

// Blocks of kUnitaryBlock realizations from a chain over U with weight
// |det(1+U)|^{2p}, p = kappa - n, mapped through the Cayley transform.
void sample_cl1_unitary_block(const EnsembleSpec& spec, const SimulationConfig& config, long block,
                              std::vector<SpectrumSample>& out) {
    const int n = spec.n;
    const double p = spec.kappa - n;
    Rng rng(config.seed, kChainStreams + static_cast<std::uint64_t>(block));
    CMatrix u = sample_haar_unitary(n, rng);
    double logw = 2 * p * log_abs_det_one_plus(u);
    double eps = 0.6 / std::sqrt(static_cast<double>(n));
    auto step = [&] {
        const CMatrix prop = perturb_unitary(u, eps, rng);
        const double lw = 2 * p * log_abs_det_one_plus(prop);
        if (std::log(rng.uniform()) < lw - logw) {
            u = prop;
            logw = lw;
            return true;
        }
        return false;
    };
    int accepted = 0;
    for (int it = 1; it <= kUnitaryBurnIn; ++it) {
        accepted += step();
        if (it % 50 == 0) {
            eps *= std::exp(static_cast<double>(accepted) / 50 - 0.35);
            accepted = 0;
        }
    }
    const long first = block * kUnitaryBlock;
    const long last = std::min(config.realizations, first + kUnitaryBlock);
    for (long i = first; i < last; ++i) {
        for (int t = 0; t < kUnitaryThin; ++t) step();
        out[i].eigenvalues = cayley_spectrum(u);
        out[i].method = Method::Direct;
        out[i].chain = static_cast<int>(block);
    }
}

bool needs_unitary_chain(const EnsembleSpec& spec) {
    return spec.family == Family::CauchyLorentzI && !spec.correlated && spec.kappa > spec.n;
}

// ---- log-gas ----

double log_vandermonde(const std::vector<double>& x, int& sign) {
    double s = 0;
    for (std::size_t j = 0; j < x.size(); ++j)
        for (std::size_t k = 0; k < j; ++k) {
            const double d = x[j] - x[k];
            if (d < 0) sign = -sign;
            s += std::log(std::abs(d));
        }
    return s;
}

double log_plus(const std::vector<double>& x, int& sign) {
    double s = 0;
    for (std::size_t j = 0; j < x.size(); ++j)
        for (std::size_t k = 0; k < j; ++k) {
            const double d = x[j] + x[k];
            if (d < 0) sign = -sign;
            s += std::log(std::abs(d));
        }
    return s;
}

// log|det[exp(a(j,k))]| with per-column shifts so large exponents stay finite.
double log_det_exp(linalg::Matrix a, int& sign) {
    double shift = 0;
    for (int k = 0; k < a.cols(); ++k) {
        const double m = a.col(k).maxCoeff();
        shift += m;
        a.col(k) = (a.col(k).array() - m).exp().matrix();
    }
    const linalg::LogDet ld = linalg::log_det(a);
    sign *= ld.sign;
    return ld.log_abs + shift;
}

template <class F>
linalg::Matrix log_columns(const EnsembleSpec& spec, const std::vector<double>& x, F entry) {
    linalg::Matrix a(spec.n, spec.n);
    for (int j = 0; j < spec.n; ++j)
        for (int k = 0; k < spec.n; ++k) a(j, k) = entry(spec.sigma[j], x[k]);
    return a;
}

std::vector<double> initial_positions(const EnsembleSpec& spec, int attempt) {
    const int n = spec.n;
    const Domain d = family_domain(spec.family);
    double base = 1.0;
    if (spec.correlated) {
        base = 0;
        for (double v : spec.sigma) base += v;
        base /= n;
    }
    static const double kScales[] = {1.0, 3.0, 0.3, 10.0, 0.1};
    const double c = base * kScales[attempt % 5];
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
        const double q = (i + 0.5) / n;
        if (d.lo == 0.0 && d.hi == 1.0) {
            x[i] = std::pow(q, kScales[attempt % 5]);
        } else if (d.lo == 0.0) {
            x[i] = c * (q + 0.05) * std::max(1.0, n + std::max(0.0, spec.alpha)) / n;
        } else {
            // Off-centre so no pair sits on the antidiagonal lambda_j = -lambda_k.
            x[i] = c * (2 * q - 1 + 0.137 / n) * std::sqrt(static_cast<double>(n));
        }
    }
    return x;
}

bool in_domain(const EnsembleSpec& spec, const std::vector<double>& x) {
    const Domain d = family_domain(spec.family);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > d.lo && x[i] < d.hi)) return false;
        if (i > 0 && !(x[i] > x[i - 1])) return false;
    }
    return true;
}

struct ChainResult {
    std::vector<SpectrumSample> samples;
    long accepted = 0, proposed = 0;
    std::vector<double> widths;
};

ChainResult run_chain(const EnsembleSpec& spec, const SimulationConfig& config, int chain, long count) {
    const int n = spec.n;
    const LogGasConfig& g = config.loggas;
    const long burn = g.burn_in > 0 ? g.burn_in : 5000L * n;
    const long thin = g.thinning > 0 ? g.thinning : n;
    Rng rng(config.seed, kChainStreams + (std::uint64_t{1} << 40) + static_cast<std::uint64_t>(chain));

    std::vector<double> x;
    double logp = kNegInf;
    int sign0 = 0;
    for (int attempt = 0; attempt < 5; ++attempt) {
        x = initial_positions(spec, attempt);
        int s = 1;
        if (in_domain(spec, x)) logp = log_jpdf(spec, x, &s);
        if (std::isfinite(logp) && s != 0) {
            sign0 = s;
            break;
        }
    }
    if (!std::isfinite(logp))
        throw NumericalError("log-gas: no finite-energy starting point after 5 attempts (" + describe(spec) + ")");

    double spread = 0;
    for (int i = 1; i < n; ++i) spread += x[i] - x[i - 1];
    spread = n > 1 ? spread / (n - 1) : std::max(std::abs(x[0]), 0.1);
    std::vector<double> width(n, g.proposal_width * spread);

    ChainResult res;
    std::vector<long> acc(n, 0), tried(n, 0);
    auto sweep = [&](bool record) {
        for (int i = 0; i < n; ++i) {
            const double old = x[i];
            x[i] = old + width[i] * rng.normal();
            ++tried[i];
            if (record) ++res.proposed;
            bool take = false;
            double lp = kNegInf;
            if (in_domain(spec, x)) {
                int s = 1;
                lp = log_jpdf(spec, x, &s);
                if (s != sign0 && std::isfinite(lp)) {
                    // Rounding can flip the sign only where the density
                    // vanishes; anywhere else the JPDF formula is broken.
                    if (lp > logp - 30)
                        throw NumericalError("log-gas: JPDF sign changed inside the ordered sector (" +
                                             describe(spec) + ")");
                    lp = kNegInf;
                }
                take = std::isfinite(lp) && std::log(rng.uniform()) < lp - logp;
            }
            if (take) {
                logp = lp;
                ++acc[i];
                if (record) ++res.accepted;
            } else {
                x[i] = old;
            }
        }
    };
    for (long s = 1; s <= burn; ++s) {
        sweep(false);
        if (g.adapt && s % 50 == 0) {
            for (int i = 0; i < n; ++i) {
                const double rate = static_cast<double>(acc[i]) / std::max<long>(1, tried[i]);
                width[i] *= std::exp(rate - 0.35);
                acc[i] = tried[i] = 0;
            }
        }
    }
    res.samples.reserve(count);
    for (long k = 0; k < count; ++k) {
        for (long t = 0; t < thin; ++t) sweep(true);
        SpectrumSample smp;
        smp.eigenvalues = x;
        smp.method = Method::LogGas;
        smp.chain = chain;
        res.samples.push_back(std::move(smp));
    }
    res.widths = width;
    return res;
}

EstimateWithError binomial(long hits, long total) {
    if (total <= 0) throw ValidationError("estimator needs at least one sample");
    const double p = static_cast<double>(hits) / total;
    return {p, std::sqrt(p * (1 - p) / total), total};
}

void check_query(double r, double s) {
    if (std::isnan(r) || std::isnan(s)) throw ValidationError("query bound is NaN");
    if (r > s) throw ValidationError("r ≤ s violated");
}

bool has_gap(const SpectrumSample& x, double r, double s) {
    for (double v : x.eigenvalues)
        if (v > r && v < s) return false;
    return true;
}

bool inside(const SpectrumSample& x, double r, double s) {
    return x.eigenvalues.front() >= r && x.eigenvalues.back() <= s;
}

template <class Pred>
EstimateWithError batched(const std::vector<SpectrumSample>& samples, int batches, Pred pred) {
    const long total = static_cast<long>(samples.size());
    long hits = 0;
    for (const auto& x : samples) hits += pred(x);
    EstimateWithError b = binomial(hits, total);
    batches = static_cast<int>(std::min<long>(batches, total));
    if (batches < 2) return b;
    std::vector<double> means(batches, 0.0);
    for (int k = 0; k < batches; ++k) {
        const long first = total * k / batches, last = total * (k + 1) / batches;
        long h = 0;
        for (long i = first; i < last; ++i) h += pred(samples[i]);
        means[k] = static_cast<double>(h) / std::max<long>(1, last - first);
    }
    double var = 0;
    for (double m : means) var += (m - b.value) * (m - b.value);
    var /= (batches - 1);
    // Never report less than the independent-sample error.
    b.std_error = std::max(b.std_error, std::sqrt(var / batches));
    return b;
}

}  // namespace

std::string method_name(Method m) { return m == Method::Direct ? "direct" : "loggas"; }

Method parse_method(const std::string& name) {
    if (name == "direct") return Method::Direct;
    if (name == "loggas" || name == "log-gas") return Method::LogGas;
    throw ValidationError("unknown simulation method '" + name + "'");
}

void validate(const SimulationConfig& c) {
    if (c.realizations < 1) throw ValidationError("simulation: realizations >= 1 violated");
    if (c.loggas.thinning < 0 || c.loggas.burn_in < 0) throw ValidationError("simulation: negative burn-in or thinning");
    if (!(c.loggas.proposal_width > 0)) throw ValidationError("simulation: proposal_width > 0 violated");
    if (c.loggas.chains < 1) throw ValidationError("simulation: chains >= 1 violated");
}

Rng::Rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    eng_.seed(seq);
}

double Rng::normal() { return normal_(eng_); }
double Rng::uniform() { return uniform_(eng_); }

CMatrix sample_ginibre(int n, int m, Rng& rng) {
    if (n < 1 || m < 1) throw ValidationError("ginibre: n, m >= 1 violated");
    const double sd = std::sqrt(0.5);
    CMatrix g(n, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i) g(i, j) = cd(sd * rng.normal(), sd * rng.normal());
    return g;
}

CMatrix sample_haar_unitary(int n, Rng& rng) {
    const CMatrix z = sample_ginibre(n, n, rng);
    Eigen::HouseholderQR<CMatrix> qr(z);
    CMatrix q = qr.householderQ();
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        const double a = std::abs(r(j, j));
        if (a > 0) q.col(j) *= r(j, j) / a;
    }
    return q;
}

std::optional<std::string> direct_construction_issue(const EnsembleSpec& spec) {
    const int n = spec.n;
    switch (spec.family) {
        case Family::GaussWigner:
            return std::nullopt;
        case Family::LaguerreWishart:
            if (!is_nonneg_integer(spec.alpha)) return "alpha must be a nonnegative integer (alpha = m - n)";
            return std::nullopt;
        case Family::CauchyLorentzI:
            if (spec.correlated) return "correlated Cauchy-Lorentz I has no simple matrix construction";
            if (!is_nonneg_integer(spec.kappa - n)) return "kappa - n must be a nonnegative integer";
            return std::nullopt;
        case Family::CauchyLorentzII: {
            if (!is_nonneg_integer(spec.alpha)) return "alpha must be a nonnegative integer (alpha = nA - n)";
            if (!is_nonneg_integer(spec.kappa)) return "kappa must be an integer (kappa = nA + nB)";
            const int nb = as_int(spec.kappa) - n - as_int(spec.alpha);
            if (nb < n) return "kappa - nA must be at least n";
            return std::nullopt;
        }
        case Family::JacobiMANOVA:
            if (!is_nonneg_integer(spec.alpha) || !is_nonneg_integer(spec.beta))
                return "alpha and beta must be nonnegative integers";
            if (spec.correlated && std::abs(spec.kappa - (spec.alpha + spec.beta + 2 * n)) > 1e-12)
                return "correlated construction needs kappa = alpha + beta + 2n";
            return std::nullopt;
        case Family::BuresHall:
            if (spec.correlated) return "correlated Bures-Hall needs a correlated Cauchy-Lorentz I factor";
            if (std::abs(spec.alpha + 0.5) > 1e-12) return "only alpha = -1/2 has a Haar-measure construction";
            return std::nullopt;
    }
    return "unknown family";
}

SpectrumSample sample_spectrum_direct(const EnsembleSpec& spec, Rng& rng) {
    if (auto why = direct_construction_issue(spec)) throw NotDirectlyConstructible(family_name(spec.family) + ": " + *why);
    if (needs_unitary_chain(spec))
        throw NotDirectlyConstructible("cauchy-lorentz-i: kappa > n needs the Metropolis-over-U sampler (sample_direct)");
    const int n = spec.n;
    const Eigen::VectorXd sigma = sigma_vector(spec);
    SpectrumSample out;
    out.method = Method::Direct;
    switch (spec.family) {
        case Family::GaussWigner:
            out.eigenvalues = hermitian_spectrum(sample_wigner(sigma, rng));
            break;
        case Family::LaguerreWishart:
            out.eigenvalues = squared_singular_values(wishart_factor(sigma, n + as_int(spec.alpha), rng));
            break;
        case Family::CauchyLorentzI:
            out.eigenvalues = cayley_spectrum(sample_haar_unitary(n, rng));
            break;
        case Family::CauchyLorentzII:
        case Family::JacobiMANOVA: {
            // Sigma^{-1} = Sigma_A^{-1} Sigma_B with Sigma_B = 1.
            const int na = n + as_int(spec.alpha);
            const int nb = spec.family == Family::JacobiMANOVA ? n + as_int(spec.beta)
                                                               : as_int(spec.kappa) - na;
            const CMatrix fa = wishart_factor(sigma, na, rng);
            const CMatrix fb = sample_ginibre(n, nb, rng);
            out.eigenvalues = ratio_spectrum(fa, fb, spec.family == Family::JacobiMANOVA);
            break;
        }
        case Family::BuresHall: {
            const CMatrix u = sample_haar_unitary(n, rng);
            const CMatrix half = 0.5 * (CMatrix::Identity(n, n) + u);
            out.eigenvalues = squared_singular_values(half * sample_ginibre(n, n, rng));
            break;
        }
    }
    return out;
}

std::vector<SpectrumSample> sample_direct(const EnsembleSpec& spec, const SimulationConfig& config) {
    validate(spec);
    validate(config);
    if (auto why = direct_construction_issue(spec)) throw NotDirectlyConstructible(family_name(spec.family) + ": " + *why);
    std::vector<SpectrumSample> out(config.realizations);
    if (needs_unitary_chain(spec)) {
        const long blocks = (config.realizations + kUnitaryBlock - 1) / kUnitaryBlock;
        parallel_for(blocks, [&](long b) { sample_cl1_unitary_block(spec, config, b, out); });
        return out;
    }
    parallel_for(config.realizations, [&](long i) {
        Rng rng(config.seed, static_cast<std::uint64_t>(i));
        out[i] = sample_spectrum_direct(spec, rng);
    });
    return out;
}

double log_jpdf(const EnsembleSpec& spec, const std::vector<double>& x, int* sign_out) {
    int sign = 1;
    const double a = spec.alpha, b = spec.beta, k = spec.kappa;
    const double e = -k + spec.n - 1;  // exponent of the correlated columns
    double lp = 0;
    auto sum = [&](auto f) {
        double s = 0;
        for (double v : x) s += f(v);
        return s;
    };
    const bool corr = spec.correlated;
    switch (spec.family) {
        case Family::GaussWigner:
            if (!corr) {
                lp = 2 * log_vandermonde(x, sign) - sum([](double v) { return v * v; });
            } else {
                lp = log_vandermonde(x, sign) - log_plus(x, sign) +
                     log_det_exp(log_columns(spec, x, [](double s, double v) { return -v * v / (s * s); }), sign);
            }
            break;
        case Family::LaguerreWishart:
            if (!corr) {
                lp = 2 * log_vandermonde(x, sign) + sum([&](double v) { return a * std::log(v) - v; });
            } else {
                lp = log_vandermonde(x, sign) + sum([&](double v) { return a * std::log(v); }) +
                     log_det_exp(log_columns(spec, x, [](double s, double v) { return -v / s; }), sign);
            }
            break;
        case Family::CauchyLorentzI:
            if (!corr) {
                lp = 2 * log_vandermonde(x, sign) - k * sum([](double v) { return std::log1p(v * v); });
            } else {
                lp = log_vandermonde(x, sign) - log_plus(x, sign) +
                     log_det_exp(log_columns(spec, x, [e](double s, double v) { return e * std::log1p(v * v / (s * s)); }),
                                 sign);
            }
            break;
        case Family::CauchyLorentzII:
            if (!corr) {
                lp = 2 * log_vandermonde(x, sign) + sum([&](double v) { return a * std::log(v) - k * std::log1p(v); });
            } else {
                lp = log_vandermonde(x, sign) + sum([&](double v) { return a * std::log(v); }) +
                     log_det_exp(log_columns(spec, x, [e](double s, double v) { return e * std::log1p(v / s); }), sign);
            }
            break;
        case Family::JacobiMANOVA: {
            const double w = sum([&](double v) { return a * std::log(v) + b * std::log1p(-v); });
            if (!corr) {
                lp = 2 * log_vandermonde(x, sign) + w;
            } else {
                lp = log_vandermonde(x, sign) + w +
                     log_det_exp(log_columns(spec, x, [e](double s, double v) { return e * std::log1p((1 / s - 1) * v); }),
                                 sign);
            }
            break;
        }
        case Family::BuresHall:
            if (!corr) {
                lp = 2 * log_vandermonde(x, sign) - log_plus(x, sign) + sum([&](double v) { return a * std::log(v) - v; });
            } else {
                lp = log_vandermonde(x, sign) - log_plus(x, sign) + sum([&](double v) { return a * std::log(v); }) +
                     log_det_exp(log_columns(spec, x, [](double s, double v) { return -v / s; }), sign);
            }
            break;
    }
    if (std::isnan(lp)) lp = kNegInf;
    if (!std::isfinite(lp)) sign = 0;
    if (sign_out) *sign_out = sign;
    return lp;
}

std::vector<SpectrumSample> sample_spectrum_loggas(const EnsembleSpec& spec, const SimulationConfig& config,
                                                   LogGasStats* stats) {
    validate(spec);
    validate(config);
    const int chains = static_cast<int>(std::min<long>(config.loggas.chains, config.realizations));
    std::vector<ChainResult> results(chains);
    parallel_for(chains, [&](long c) {
        const long first = config.realizations * c / chains, last = config.realizations * (c + 1) / chains;
        results[c] = run_chain(spec, config, static_cast<int>(c), last - first);
    });
    std::vector<SpectrumSample> out;
    out.reserve(config.realizations);
    long acc = 0, tried = 0;
    for (auto& r : results) {
        acc += r.accepted;
        tried += r.proposed;
        for (auto& s : r.samples) out.push_back(std::move(s));
    }
    if (stats) {
        stats->acceptance = tried ? static_cast<double>(acc) / tried : 0.0;
        stats->widths = results.front().widths;
    }
    return out;
}

std::vector<SpectrumSample> simulate(const EnsembleSpec& spec, const SimulationConfig& config) {
    return config.method == Method::Direct ? sample_direct(spec, config) : sample_spectrum_loggas(spec, config);
}

EstimateWithError estimate_gap(const std::vector<SpectrumSample>& samples, double r, double s) {
    check_query(r, s);
    long hits = 0;
    for (const auto& x : samples) hits += has_gap(x, r, s);
    return binomial(hits, static_cast<long>(samples.size()));
}

EstimateWithError estimate_double_gap(const std::vector<SpectrumSample>& samples, double r, double s) {
    check_query(r, s);
    long hits = 0;
    for (const auto& x : samples) hits += inside(x, r, s);
    return binomial(hits, static_cast<long>(samples.size()));
}

EstimateWithError estimate_gap_batched(const std::vector<SpectrumSample>& samples, double r, double s, int batches) {
    check_query(r, s);
    return batched(samples, batches, [&](const SpectrumSample& x) { return has_gap(x, r, s); });
}

EstimateWithError estimate_double_gap_batched(const std::vector<SpectrumSample>& samples, double r, double s,
                                              int batches) {
    check_query(r, s);
    return batched(samples, batches, [&](const SpectrumSample& x) { return inside(x, r, s); });
}

Histogram estimate_extreme_density(const std::vector<SpectrumSample>& samples, Extreme which, int bins,
                                   std::optional<std::pair<double, double>> range) {
    if (bins < 2) throw ValidationError("histogram: bins >= 2 violated");
    if (samples.empty()) throw ValidationError("estimator needs at least one sample");
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& x : samples) v.push_back(which == Extreme::Min ? x.eigenvalues.front() : x.eigenvalues.back());
    double lo, hi;
    if (range) {
        lo = range->first;
        hi = range->second;
    } else {
        const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
        lo = *mn;
        hi = *mx;
    }
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw ValidationError("histogram: degenerate range");
    Histogram h;
    h.n_samples = static_cast<long>(v.size());
    h.edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i) h.edges[i] = lo + (hi - lo) * i / bins;
    std::vector<long> counts(bins, 0);
    for (double x : v) {
        if (x < lo || x > hi) continue;
        int b = static_cast<int>((x - lo) / (hi - lo) * bins);
        counts[std::clamp(b, 0, bins - 1)]++;
    }
    const double width = (hi - lo) / bins, total = static_cast<double>(h.n_samples);
    for (int i = 0; i < bins; ++i) {
        const double c = static_cast<double>(counts[i]);
        h.density.push_back(c / (total * width));
        h.std_error.push_back(std::sqrt(c * (1 - c / total)) / (total * width));
    }
    return h;
}

int worker_count() {
    if (const char* env = std::getenv("RMT_GAPS_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {
thread_local bool in_worker = false;  // nested loops run inline
}

void parallel_for(long count, const std::function<void(long)>& body) {
    const int workers = in_worker ? 1 : static_cast<int>(std::min<long>(worker_count(), count));
    if (workers <= 1) {
        for (long i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            in_worker = true;
            for (long i; (i = next.fetch_add(1)) < count;) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace rmtgaps::mc
