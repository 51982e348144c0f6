#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "rmtgaps/ensemble_spec.hpp"
#include "rmtgaps/linalg.hpp"
#include "rmtgaps/quadrature.hpp"

namespace rmtgaps {

using linalg::Matrix;

enum class KernelType { TypeI, TypeII };

// Biorthogonal (two-determinant) structure: all quantities follow from the
// n x n matrix of segment integrals int_a^b w f_j g_k and its integrand.
struct TypeIKernels {
    std::function<Matrix(double a, double b)> segment;
    std::function<Matrix(double x)> density;
};

// Pfaffian-times-determinant structure with antisymmetric f(l,m). The 2D
// kernel entries come from quadrature over unions of intervals; the odd-n
// border column int_a^b w g_j is supplied in closed form.
struct TypeIIKernels {
    quad::AntisymProblem problem;
    std::function<Eigen::VectorXd(double a, double b)> border;
    double rel_tol = 1e-11;
};

// Change of variables x = phi(y) mapping a base model onto this one, used
// for the Jacobi route through Cauchy-Lorentz II (phi(y) = y/(1+y)).
struct VariableMap {
    std::shared_ptr<const struct EnsembleModel> base;
    std::function<double(double)> to_base;     // y(x)
    std::function<double(double)> jacobian;    // dy/dx
};

struct EnsembleModel {
    EnsembleSpec spec;
    double lo = 0.0, hi = 0.0;
    KernelType type = KernelType::TypeI;
    int dim = 0;  // n for Type I, N for Type II

    TypeIKernels type1;
    TypeIIKernels type2;
    std::optional<VariableMap> mapped;

    // Full-domain kernel h and the diagonal scales applied before det/Pf.
    Matrix h;
    Eigen::VectorXd row_scale, col_scale;
    double scaled_h_value = 0.0;  // det or Pf of the scaled h
    double log_scale = 0.0;       // log of the product of all applied scales

    // Optional exact survival function of the smallest eigenvalue.
    std::function<double(double)> closed_sf_min;
};

// Fills h, scales and scaled_h_value from the kernels; throws ModelBuildError
// for a zero or non-finite partition function.
void finalize_model(EnsembleModel& m);

// C^{-1} = n! det h (Type I) or n! Pf h (Type II). Signed: with the index
// ordering of the kernels it can be negative for correlated variants whose
// sigma are not increasing.
double partition(const EnsembleModel& m);

// Kernel matrices: chi over (lo,r) u (s,hi) and chi~ over (r,s).
Matrix gap_kernel(const EnsembleModel& m, double r, double s);
Matrix double_gap_kernel(const EnsembleModel& m, double r, double s);

double gap_probability(const EnsembleModel& m, double r, double s);
double double_gap_probability(const EnsembleModel& m, double r, double s);

// E(lo,x) and E(x,hi). sf_min uses closed_sf_min when the model has one.
double sf_min(const EnsembleModel& m, double x);
double cdf_max(const EnsembleModel& m, double x);

struct DensityValue {
    double value = 0.0;
    bool finite_difference = false;  // analytic route failed, FD fallback used
};
DensityValue pdf_min_detail(const EnsembleModel& m, double x);
DensityValue pdf_max_detail(const EnsembleModel& m, double x);
double pdf_min(const EnsembleModel& m, double x);
double pdf_max(const EnsembleModel& m, double x);

// Joint density of (smallest, largest); zero for r >= s.
double joint_extreme_pdf(const EnsembleModel& m, double r, double s);

// Central difference of g at x with step h = max(1e-5, 1e-4|x|), Richardson
// extrapolated once; steps are shrunk to stay inside (lo, hi).
double central_difference(const std::function<double(double)>& g, double x, double lo, double hi);

}  // namespace rmtgaps
