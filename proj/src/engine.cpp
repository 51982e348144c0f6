#include "rmtgaps/engine.hpp"

#include <cmath>
#include <sstream>

#include "rmtgaps/errors.hpp"

namespace rmtgaps {

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

bool is_lo(const EnsembleModel& m, double x) { return x <= m.lo; }
bool is_hi(const EnsembleModel& m, double x) { return x >= m.hi; }

void check_query(const EnsembleModel& m, double r, double s) {
    if (std::isnan(r) || std::isnan(s)) throw ValidationError("query bound is NaN");
    if (r > s) throw ValidationError("r ≤ s violated");
    if (r < m.lo || s > m.hi) {
        std::ostringstream os;
        os << "query (" << r << ", " << s << ") outside the domain (" << m.lo << ", " << m.hi << ")";
        throw ValidationError(os.str());
    }
}

void check_point(const EnsembleModel& m, double x) {
    if (std::isnan(x) || x < m.lo || x > m.hi) {
        std::ostringstream os;
        os << "x = " << x << " outside the domain (" << m.lo << ", " << m.hi << ")";
        throw ValidationError(os.str());
    }
}

// Probabilities must land in [0,1] up to rounding; anything else is a
// kernel or conditioning failure and is reported, never clamped.
double checked_probability(double v, const char* what, double r, double s) {
    if (!std::isfinite(v) || v < -1e-8 || v > 1 + 1e-8) {
        std::ostringstream os;
        os << what << "(" << r << ", " << s << ") = " << v << " is outside [0,1]";
        throw NumericalError(os.str());
    }
    return v;
}

// ---- Type I ----

Matrix type1_segment(const EnsembleModel& m, double a, double b) {
    const int n = m.dim;
    if (b <= a) return Matrix::Zero(n, n);
    return m.type1.segment(a, b);
}

Matrix scaled(const EnsembleModel& m, const Matrix& k) {
    return m.row_scale.asDiagonal() * k * m.col_scale.asDiagonal();
}

double type1_ratio(const EnsembleModel& m, const Matrix& k) {
    return linalg::det(scaled(m, k)) / m.scaled_h_value;
}

// sum_i det(K with row i replaced by D), on scaled matrices.
double row_replacement_sum(const Matrix& k, const Matrix& d) {
    double total = 0.0;
    for (int i = 0; i < k.rows(); ++i) {
        Matrix t = k;
        t.row(i) = d.row(i);
        total += linalg::det(t);
    }
    return total;
}

// ---- Type II ----

std::vector<quad::Interval> nonempty(std::initializer_list<quad::Interval> list) {
    std::vector<quad::Interval> out;
    for (const auto& p : list)
        if (p.hi > p.lo) out.push_back(p);
    return out;
}

quad::QuadOptions type2_options(const EnsembleModel& m) {
    quad::QuadOptions o;
    o.rel_tol = m.type2.rel_tol;
    o.max_subdivisions = 20000;
    return o;
}

Matrix type2_kernel(const EnsembleModel& m, const std::vector<quad::Interval>& pieces) {
    const int n = m.spec.n;
    const int big = m.dim;
    Matrix k = Matrix::Zero(big, big);
    if (pieces.empty()) return k;
    if (n >= 2) {
        quad::VecQuadResult r = quad::integrate_2d_antisym_batch(m.type2.problem, pieces, type2_options(m));
        for (int j = 0; j < n; ++j)
            for (int l = j + 1; l < n; ++l) {
                const double v = r.value[quad::pair_index(n, j, l)];
                k(j, l) = v;
                k(l, j) = -v;
            }
    }
    if (big > n) {
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
        for (const auto& p : pieces) b += m.type2.border(p.lo, p.hi);
        for (int j = 0; j < n; ++j) {
            k(j, n) = b(j);
            k(n, j) = -b(j);
        }
    }
    return k;
}

// Derivative of the kernel over `pieces` whose moving endpoint sits at x;
// sign = -1 when x is the lower end of the region, +1 when it is the upper.
Matrix type2_kernel_derivative(const EnsembleModel& m, double x, const std::vector<quad::Interval>& pieces,
                               double sign) {
    const int n = m.spec.n;
    const int big = m.dim;
    Matrix dk = Matrix::Zero(big, big);
    if (n >= 2 && !pieces.empty()) {
        quad::VecQuadResult r = quad::antisym_edge_batch(m.type2.problem, x, pieces, type2_options(m));
        for (int j = 0; j < n; ++j)
            for (int l = j + 1; l < n; ++l) {
                const double v = sign * r.value[quad::pair_index(n, j, l)];
                dk(j, l) = v;
                dk(l, j) = -v;
            }
    }
    if (big > n) {
        std::vector<double> g(n);
        m.type2.problem.weighted_g(x, g.data());
        for (int j = 0; j < n; ++j) {
            dk(j, n) = sign * g[j];
            dk(n, j) = -sign * g[j];
        }
    }
    return dk;
}

Matrix sym_scaled(const EnsembleModel& m, const Matrix& k) {
    return m.row_scale.asDiagonal() * k * m.row_scale.asDiagonal();
}

double type2_ratio(const EnsembleModel& m, const Matrix& k) {
    return linalg::pfaffian(sym_scaled(m, k)) / m.scaled_h_value;
}

// ---- mapped models ----

double to_base(const EnsembleModel& m, double x) {
    if (is_hi(m, x)) return m.mapped->base->hi;
    if (is_lo(m, x)) return m.mapped->base->lo;
    return m.mapped->to_base(x);
}

}  // namespace

void finalize_model(EnsembleModel& m) {
    const int d = m.dim;
    if (m.type == KernelType::TypeI) {
        m.h = m.type1.segment(m.lo, m.hi);
    } else {
        m.h = type2_kernel(m, nonempty({{m.lo, m.hi}}));
    }
    if (!m.h.allFinite()) throw ModelBuildError("full-domain kernel has non-finite entries");
    m.row_scale.resize(d);
    m.col_scale.resize(d);
    m.log_scale = 0.0;
    if (m.type == KernelType::TypeI) {
        for (int j = 0; j < d; ++j) {
            const double mx = m.h.row(j).cwiseAbs().maxCoeff();
            if (mx == 0.0) throw ModelBuildError("full-domain kernel has a zero row");
            m.row_scale(j) = 1.0 / mx;
        }
        const Matrix rh = m.row_scale.asDiagonal() * m.h;
        for (int k = 0; k < d; ++k) {
            const double mx = rh.col(k).cwiseAbs().maxCoeff();
            if (mx == 0.0) throw ModelBuildError("full-domain kernel has a zero column");
            m.col_scale(k) = 1.0 / mx;
        }
        for (int j = 0; j < d; ++j) m.log_scale += std::log(m.row_scale(j)) + std::log(m.col_scale(j));
        m.scaled_h_value = linalg::det(scaled(m, m.h));
    } else {
        for (int j = 0; j < d; ++j) {
            const double mx = m.h.row(j).cwiseAbs().maxCoeff();
            if (mx == 0.0) throw ModelBuildError("full-domain kernel has a zero row");
            m.row_scale(j) = 1.0 / std::sqrt(mx);
            m.col_scale(j) = m.row_scale(j);
            m.log_scale += std::log(m.row_scale(j));
        }
        m.scaled_h_value = linalg::pfaffian(sym_scaled(m, m.h));
    }
    if (!std::isfinite(m.scaled_h_value) || std::abs(m.scaled_h_value) < 1e-280)
        throw ModelBuildError("partition function is zero or not finite for " + describe(m.spec));
}

double partition(const EnsembleModel& m) {
    if (m.mapped) return partition(*m.mapped->base);
    return factorial(m.spec.n) * m.scaled_h_value * std::exp(-m.log_scale);
}

Matrix gap_kernel(const EnsembleModel& m, double r, double s) {
    check_query(m, r, s);
    if (m.mapped) return gap_kernel(*m.mapped->base, to_base(m, r), to_base(m, s));
    if (m.type == KernelType::TypeI) return type1_segment(m, m.lo, r) + type1_segment(m, s, m.hi);
    return type2_kernel(m, nonempty({{m.lo, r}, {s, m.hi}}));
}

Matrix double_gap_kernel(const EnsembleModel& m, double r, double s) {
    check_query(m, r, s);
    if (m.mapped) return double_gap_kernel(*m.mapped->base, to_base(m, r), to_base(m, s));
    if (m.type == KernelType::TypeI) return type1_segment(m, r, s);
    return type2_kernel(m, nonempty({{r, s}}));
}

double gap_probability(const EnsembleModel& m, double r, double s) {
    check_query(m, r, s);
    if (r == s) return 1.0;
    if (m.mapped) return gap_probability(*m.mapped->base, to_base(m, r), to_base(m, s));
    const Matrix k = gap_kernel(m, r, s);
    const double v = m.type == KernelType::TypeI ? type1_ratio(m, k) : type2_ratio(m, k);
    return checked_probability(v, "E", r, s);
}

double double_gap_probability(const EnsembleModel& m, double r, double s) {
    check_query(m, r, s);
    if (m.mapped) return double_gap_probability(*m.mapped->base, to_base(m, r), to_base(m, s));
    const Matrix k = double_gap_kernel(m, r, s);
    const double v = m.type == KernelType::TypeI ? type1_ratio(m, k) : type2_ratio(m, k);
    return checked_probability(v, "E~", r, s);
}

double sf_min(const EnsembleModel& m, double x) {
    check_point(m, x);
    if (m.closed_sf_min) return m.closed_sf_min(x);
    return gap_probability(m, m.lo, x);
}

double cdf_max(const EnsembleModel& m, double x) {
    check_point(m, x);
    return gap_probability(m, x, m.hi);
}

double central_difference(const std::function<double(double)>& g, double x, double lo, double hi) {
    double h = std::max(1e-5, 1e-4 * std::abs(x));
    h = std::min({h, 0.5 * (x - lo), 0.5 * (hi - x)});
    if (!(h > 0)) throw NumericalError("finite-difference step collapsed at a domain endpoint");
    auto d = [&](double step) { return (g(x + step) - g(x - step)) / (2 * step); };
    return (4 * d(0.5 * h) - d(h)) / 3;
}

DensityValue pdf_min_detail(const EnsembleModel& m, double x) {
    check_point(m, x);
    if (is_lo(m, x) && std::isinf(x)) return {};
    if (is_hi(m, x)) return {};
    if (m.mapped) {
        DensityValue b = pdf_min_detail(*m.mapped->base, to_base(m, x));
        b.value *= m.mapped->jacobian(x);
        return b;
    }
    if (m.type == KernelType::TypeI) {
        const Matrix k = type1_segment(m, x, m.hi);
        const Matrix d = m.type1.density(x);
        return {row_replacement_sum(scaled(m, k), scaled(m, d)) / m.scaled_h_value, false};
    }
    const auto pieces = nonempty({{x, m.hi}});
    const Matrix k = sym_scaled(m, type2_kernel(m, pieces));
    const Matrix dk = sym_scaled(m, type2_kernel_derivative(m, x, pieces, -1.0));
    try {
        return {-linalg::pfaffian_derivative(k, dk) / m.scaled_h_value, false};
    } catch (const SingularMatrixError&) {
        auto sf = [&](double t) { return gap_probability(m, m.lo, t); };
        return {-central_difference(sf, x, m.lo, m.hi), true};
    }
}

DensityValue pdf_max_detail(const EnsembleModel& m, double x) {
    check_point(m, x);
    if (is_hi(m, x) && std::isinf(x)) return {};
    if (is_lo(m, x)) return {};
    if (m.mapped) {
        DensityValue b = pdf_max_detail(*m.mapped->base, to_base(m, x));
        b.value *= m.mapped->jacobian(x);
        return b;
    }
    if (m.type == KernelType::TypeI) {
        const Matrix k = type1_segment(m, m.lo, x);
        const Matrix d = m.type1.density(x);
        return {row_replacement_sum(scaled(m, k), scaled(m, d)) / m.scaled_h_value, false};
    }
    const auto pieces = nonempty({{m.lo, x}});
    const Matrix k = sym_scaled(m, type2_kernel(m, pieces));
    const Matrix dk = sym_scaled(m, type2_kernel_derivative(m, x, pieces, 1.0));
    try {
        return {linalg::pfaffian_derivative(k, dk) / m.scaled_h_value, false};
    } catch (const SingularMatrixError&) {
        auto cdf = [&](double t) { return gap_probability(m, t, m.hi); };
        return {central_difference(cdf, x, m.lo, m.hi), true};
    }
}

double pdf_min(const EnsembleModel& m, double x) { return pdf_min_detail(m, x).value; }
double pdf_max(const EnsembleModel& m, double x) { return pdf_max_detail(m, x).value; }

double joint_extreme_pdf(const EnsembleModel& m, double r, double s) {
    if (m.spec.n < 2) throw ValidationError("joint extreme density needs n >= 2");
    if (r >= s) return 0.0;
    check_query(m, r, s);
    if (is_lo(m, r) || is_hi(m, s)) return 0.0;
    if (m.mapped)
        return joint_extreme_pdf(*m.mapped->base, to_base(m, r), to_base(m, s)) * m.mapped->jacobian(r) *
               m.mapped->jacobian(s);
    if (m.type == KernelType::TypeI) {
        // -d^2/dr ds det[chi~(r,s)]: rows i and i' replaced by the densities
        // at s and r (the minus signs of d/dr and the outer minus cancel).
        const Matrix k = scaled(m, type1_segment(m, r, s));
        const Matrix ds = scaled(m, m.type1.density(s));
        const Matrix dr = scaled(m, m.type1.density(r));
        double total = 0.0;
        for (int i = 0; i < k.rows(); ++i)
            for (int ip = 0; ip < k.rows(); ++ip) {
                if (i == ip) continue;
                Matrix t = k;
                t.row(i) = ds.row(i);
                t.row(ip) = dr.row(ip);
                total += linalg::det(t);
            }
        return total / m.scaled_h_value;
    }
    // Mixed central difference, Richardson extrapolated once.
    const double hr = std::min({std::max(1e-5, 1e-4 * std::abs(r)), 0.25 * (s - r), 0.5 * (r - m.lo)});
    const double hs = std::min({std::max(1e-5, 1e-4 * std::abs(s)), 0.25 * (s - r), 0.5 * (m.hi - s)});
    auto et = [&](double a, double b) { return double_gap_probability(m, a, b); };
    auto mixed = [&](double a, double b) {
        return (et(r + a, s + b) - et(r + a, s - b) - et(r - a, s + b) + et(r - a, s - b)) / (4 * a * b);
    };
    return -(4 * mixed(0.5 * hr, 0.5 * hs) - mixed(hr, hs)) / 3;
}

}  // namespace rmtgaps
