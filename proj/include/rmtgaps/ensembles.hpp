#pragma once

#include <memory>
#include <optional>

#include "rmtgaps/engine.hpp"
#include "rmtgaps/ensemble_spec.hpp"

namespace rmtgaps {

// Correlated Jacobi-MANOVA can be evaluated either from the general-kappa
// Appell kernels or, when beta = kappa - alpha - 2n, by mapping the
// Cauchy-Lorentz II model through x = y/(1+y).
enum class JacobiRoute { Auto, GeneralKappa, CauchyLorentzMap };

struct BuildOptions {
    JacobiRoute jacobi_route = JacobiRoute::Auto;
    // Relative tolerance of the 2D quadrature behind Type II kernels.
    double type2_rel_tol = 1e-11;
    // Compare the kernel partition function with the closed product form.
    bool check_closed_form = true;
};

using ModelPtr = std::shared_ptr<const EnsembleModel>;

ModelPtr build(const EnsembleSpec& spec, const BuildOptions& opts = {});

// Closed-form C^{-1} where the family provides one.
std::optional<double> closed_form_partition(const EnsembleSpec& spec);

// Closed-form full-domain h matrix for Type II variants where one is known
// (correlated Gauss-Wigner, Cauchy-Lorentz I and Bures-Hall, uncorrelated
// Bures-Hall), including the odd-n border column.
std::optional<Matrix> closed_form_h(const EnsembleSpec& spec);

// True when beta = kappa - alpha - 2n within 1e-12.
bool jacobi_map_applies(const EnsembleSpec& spec);

}  // namespace rmtgaps
