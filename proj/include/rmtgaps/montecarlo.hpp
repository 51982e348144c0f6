#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmtgaps/ensemble_spec.hpp"

namespace rmtgaps::mc {

using CMatrix = Eigen::MatrixXcd;

enum class Method { Direct, LogGas };

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct LogGasConfig {
    // Sweeps of n single-coordinate updates; 0 selects 5000 n and n.
    long burn_in = 0;
    long thinning = 0;
    double proposal_width = 0.5;
    bool adapt = true;
    // Independent chains; fixed by the config so results do not depend on
    // the number of worker threads.
    int chains = 8;
};

struct SimulationConfig {
    long realizations = 50000;
    std::uint64_t seed = 20160;
    Method method = Method::Direct;
    LogGasConfig loggas;
};

void validate(const SimulationConfig& c);

struct SpectrumSample {
    std::vector<double> eigenvalues;  // ascending
    Method method = Method::Direct;
    int chain = 0;
};

struct EstimateWithError {
    double value = 0.0;
    double std_error = 0.0;
    long n_samples = 0;
};

// Independent generator for stream `index` under `seed`: realization i and
// chain c each own one, so results do not depend on scheduling.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t index);
    double normal();   // N(0,1)
    double uniform();  // [0,1)
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// i.i.d. entries with real and imaginary parts of variance 1/2.
CMatrix sample_ginibre(int n, int m, Rng& rng);
// QR of a Ginibre matrix with the diagonal phases of R divided out.
CMatrix sample_haar_unitary(int n, Rng& rng);

// Empty when a matrix construction exists for the ensemble, else the reason.
std::optional<std::string> direct_construction_issue(const EnsembleSpec& spec);

// One realization from the explicit matrix model. Throws
// NotDirectlyConstructible when direct_construction_issue is set. Uncorrelated
// Cauchy-Lorentz I with kappa > n runs a short Metropolis chain over U and is
// only exposed through sample_direct.
SpectrumSample sample_spectrum_direct(const EnsembleSpec& spec, Rng& rng);

// config.realizations direct samples, in realization order.
std::vector<SpectrumSample> sample_direct(const EnsembleSpec& spec, const SimulationConfig& config);

// log |P({lambda})| up to the normalization, for ascending eigenvalues inside
// the domain; sign receives the sign of the unnormalized density.
double log_jpdf(const EnsembleSpec& spec, const std::vector<double>& lambda, int* sign = nullptr);

struct LogGasStats {
    double acceptance = 0.0;  // after burn-in, over all chains
    std::vector<double> widths;  // final proposal widths of chain 0
};

// config.realizations samples from config.loggas.chains chains, chain-major.
std::vector<SpectrumSample> sample_spectrum_loggas(const EnsembleSpec& spec, const SimulationConfig& config,
                                                   LogGasStats* stats = nullptr);

// Dispatches on config.method.
std::vector<SpectrumSample> simulate(const EnsembleSpec& spec, const SimulationConfig& config);

// Fraction with no eigenvalue in (r,s), binomial standard error.
EstimateWithError estimate_gap(const std::vector<SpectrumSample>& samples, double r, double s);
// Fraction with every eigenvalue in [r,s].
EstimateWithError estimate_double_gap(const std::vector<SpectrumSample>& samples, double r, double s);

// Standard error from batch means of the indicator, for correlated chains.
EstimateWithError estimate_gap_batched(const std::vector<SpectrumSample>& samples, double r, double s, int batches);
EstimateWithError estimate_double_gap_batched(const std::vector<SpectrumSample>& samples, double r, double s,
                                              int batches);

enum class Extreme { Min, Max };

struct Histogram {
    std::vector<double> edges;    // bins + 1
    std::vector<double> density;  // count / (N width)
    std::vector<double> std_error;
    long n_samples = 0;
};

// Density histogram of lambda_min or lambda_max, normalized by the total
// sample count. Without a range the data span is used, so it integrates to 1.
Histogram estimate_extreme_density(const std::vector<SpectrumSample>& samples, Extreme which, int bins,
                                   std::optional<std::pair<double, double>> range = std::nullopt);

// Worker count: RMT_GAPS_THREADS if set and positive, else the hardware count.
int worker_count();
// Runs body(i) for i in [0,count) on up to worker_count() threads.
void parallel_for(long count, const std::function<void(long)>& body);

}  // namespace rmtgaps::mc
