#pragma once

#include <functional>
#include <vector>

namespace rmtgaps::quad {

// Integration range; either endpoint may be infinite.
struct Interval {
    double lo;
    double hi;
};

struct QuadResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    long evaluations = 0;
};

struct VecQuadResult {
    std::vector<double> value;
    std::vector<double> abs_error_estimate;
    long evaluations = 0;
};

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_subdivisions = 4000;
    // When set, a dim-component integrand writes 2*dim values: the integrand
    // followed by pointwise bounds on its rounding error. Each component then
    // converges once its error is below the integral of its bound, which
    // stops refinement chasing cancellation noise.
    bool trailing_noise_bounds = false;
};

using ScalarFn = std::function<double(double)>;
// Fills out[0..dim) with the integrand components at x.
using VectorFn = std::function<void(double, double*)>;

// Global adaptive Gauss-Kronrod (7/15). Semi-infinite ranges use two charts
// split at t = 1/2: x = a + t/(1-t) near the endpoint and x = a + (1-s)/s in
// the tail. The whole real line is folded at 0 and covered by x = tan(pi t/2)
// and x = cot(pi s/2), again split at 1/2, so algebraic tails stay resolvable.
QuadResult integrate_1d(const ScalarFn& f, Interval domain, const QuadOptions& opts);
QuadResult integrate_1d(const ScalarFn& f, Interval domain, double rel_tol = 1e-10);

VecQuadResult integrate_1d_vec(const VectorFn& f, int dim, Interval domain,
                               const QuadOptions& opts);

// Integral over (lo,r) u (s,hi); empty pieces contribute nothing.
QuadResult integrate_union_1d(const ScalarFn& f, double lo, double r, double s, double hi,
                              const QuadOptions& opts);

// Drops empty pieces of (lo,r) u (s,hi).
std::vector<Interval> union_pieces(double lo, double r, double s, double hi);

// Batched antisymmetrized double integrals
//   M_jk = 1/2 int_A int_A f(l,m) [G_j(l) G_k(m) - G_k(l) G_j(m)] dl dm,   j < k,
// where G_j = w g_j and A is a union of disjoint intervals. f must satisfy
// f(l,m) = -f(m,l). With pair_antidiagonal set, points closer than a few
// ulps-per-scale to the line l + m = 0 are replaced by the average of two
// points placed symmetrically across it, which evaluates a removable v/u
// singularity in its finite form (requires even G_j).
struct AntisymProblem {
    int count = 0;
    std::function<void(double, double*)> weighted_g;
    std::function<double(double, double)> f;
    bool pair_antidiagonal = false;
};

// Number of strictly-upper-triangular pairs for a problem of size n.
inline int pair_count(int n) { return n * (n - 1) / 2; }
// Index of pair (j,k), j < k, in the packed ordering used below.
inline int pair_index(int n, int j, int k) { return j * n - j * (j + 1) / 2 + (k - j - 1); }

// Packed results in pair_index order.
VecQuadResult integrate_2d_antisym_batch(const AntisymProblem& p,
                                         const std::vector<Interval>& pieces,
                                         const QuadOptions& opts);

// Edge integrals int_A f(x,m) [G_j(x) G_k(m) - G_k(x) G_j(m)] dm for all j < k.
VecQuadResult antisym_edge_batch(const AntisymProblem& p, double x,
                                 const std::vector<Interval>& pieces,
                                 const QuadOptions& opts);

// Single-entry form of the batched double integral.
QuadResult integrate_2d_antisym(const ScalarFn& g_j, const ScalarFn& g_k, const ScalarFn& w,
                                const std::function<double(double, double)>& f,
                                const std::vector<Interval>& pieces, double rel_tol,
                                bool pair_antidiagonal = false);

}  // namespace rmtgaps::quad
