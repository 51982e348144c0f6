#include "rmtgaps/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "rmtgaps/errors.hpp"

namespace rmtgaps::quad {

namespace {

// QUADPACK qk15 abscissae and weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Segment {
    int chart = 0;
    double a = 0, b = 0;
    std::vector<double> value, error, l1;
    bool frozen = false;
};

void check_finite(const double* v, int dim, double x) {
    for (int c = 0; c < dim; ++c) {
        if (std::isnan(v[c])) {
            std::ostringstream os;
            os << "integrand returned NaN at x=" << x << " (component " << c << ")";
            throw NumericalError(os.str());
        }
    }
}

class Rule {
public:
    explicit Rule(int dim) : dim_(dim), fc_(dim), f1_(15 * dim) {}

    long evaluate(const VectorFn& f, Segment& s) {
        const double centr = 0.5 * (s.a + s.b);
        const double hlgth = 0.5 * (s.b - s.a);
        const double dhlgth = std::fabs(hlgth);
        s.value.assign(dim_, 0.0);
        s.error.assign(dim_, 0.0);
        s.l1.assign(dim_, 0.0);

        f(centr, fc_.data());
        check_finite(fc_.data(), dim_, centr);
        // f1_ rows: 0..6 left points, 7..13 right points.
        for (int j = 0; j < 7; ++j) {
            const double absc = hlgth * kXgk[j];
            double* lo = &f1_[j * dim_];
            double* hi = &f1_[(7 + j) * dim_];
            f(centr - absc, lo);
            check_finite(lo, dim_, centr - absc);
            f(centr + absc, hi);
            check_finite(hi, dim_, centr + absc);
        }
        for (int c = 0; c < dim_; ++c) {
            double resg = fc_[c] * kWg[3];
            double resk = fc_[c] * kWgk[7];
            double resabs = std::fabs(resk);
            for (int j = 0; j < 7; ++j) {
                const double fl = f1_[j * dim_ + c];
                const double fr = f1_[(7 + j) * dim_ + c];
                resk += kWgk[j] * (fl + fr);
                resabs += kWgk[j] * (std::fabs(fl) + std::fabs(fr));
                if (j % 2 == 1) resg += kWg[j / 2] * (fl + fr);
            }
            const double reskh = resk * 0.5;
            double resasc = kWgk[7] * std::fabs(fc_[c] - reskh);
            for (int j = 0; j < 7; ++j) {
                resasc += kWgk[j] * (std::fabs(f1_[j * dim_ + c] - reskh) +
                                     std::fabs(f1_[(7 + j) * dim_ + c] - reskh));
            }
            const double result = resk * hlgth;
            resabs *= dhlgth;
            resasc *= dhlgth;
            double abserr = std::fabs((resk - resg) * hlgth);
            if (resasc != 0.0 && abserr != 0.0) {
                abserr = resasc * std::min(1.0, std::pow(200.0 * abserr / resasc, 1.5));
            }
            if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
                abserr = std::max(kEps * 50.0 * resabs, abserr);
            }
            s.value[c] = result;
            s.error[c] = abserr;
            s.l1[c] = resabs;
        }
        return 15;
    }

private:
    int dim_;
    std::vector<double> fc_;
    std::vector<double> f1_;
};

// A finite parameter range with its own integrand; the adaptive loop below
// treats the union of all charts as one integral with a global error budget.
struct Chart {
    VectorFn f;
    double a, b;
};

VecQuadResult adaptive(const std::vector<Chart>& charts, int dim, const QuadOptions& opts) {
    // Trailing noise bounds are integrated with the values but never refined.
    const int full = opts.trailing_noise_bounds ? 2 * dim : dim;
    Rule rule(full);
    std::vector<Segment> segs(charts.size());
    long evals = 0;
    for (std::size_t i = 0; i < charts.size(); ++i) {
        segs[i].chart = static_cast<int>(i);
        segs[i].a = charts[i].a;
        segs[i].b = charts[i].b;
        evals += rule.evaluate(charts[i].f, segs[i]);
    }

    // Below ~60 ulps the per-panel rounding floor dominates every estimate.
    const double rel_tol = std::max(opts.rel_tol, 60.0 * kEps);
    std::vector<double> total(full), err(full), l1(full), tol(dim);
    for (int iter = 0;; ++iter) {
        std::fill(total.begin(), total.end(), 0.0);
        std::fill(err.begin(), err.end(), 0.0);
        std::fill(l1.begin(), l1.end(), 0.0);
        for (const auto& s : segs) {
            for (int c = 0; c < full; ++c) {
                total[c] += s.value[c];
                err[c] += s.error[c];
                l1[c] += s.l1[c];
            }
        }
        bool converged = true;
        for (int c = 0; c < dim; ++c) {
            const double scale = std::max(std::fabs(total[c]), 0.01 * l1[c]);
            // Subnormal values have no relative precision left to refine.
            tol[c] = std::max({opts.abs_tol, rel_tol * scale, std::numeric_limits<double>::min()});
            if (full > dim) tol[c] = std::max(tol[c], total[dim + c]);
            if (err[c] > tol[c]) converged = false;
        }
        if (converged) break;

        int worst = -1;
        double worst_score = -1.0;
        for (int i = 0; i < static_cast<int>(segs.size()); ++i) {
            double score = 0.0;
            for (int c = 0; c < dim; ++c) {
                const double t = tol[c] > 0 ? tol[c] : std::numeric_limits<double>::min();
                score = std::max(score, segs[i].error[c] / t);
            }
            if (score > worst_score) {
                worst_score = score;
                worst = i;
            }
        }
        // The dominant error sits on a panel that cannot be split further:
        // return the best available estimate with its error bound.
        if (worst < 0 || segs[worst].frozen) break;
        if (iter >= opts.max_subdivisions) {
            std::ostringstream os;
            os << "adaptive quadrature did not converge on [" << charts[0].a << ", "
               << charts.back().b << "] after "
               << opts.max_subdivisions << " subdivisions";
            throw ConvergenceError(os.str());
        }
        Segment& w = segs[worst];
        const double mid = 0.5 * (w.a + w.b);
        const double width = w.b - w.a;
        if (width <= 64.0 * kEps * std::max(std::fabs(w.a), std::fabs(w.b)) + 1e-300 ||
            mid <= w.a || mid >= w.b) {
            w.frozen = true;
            continue;
        }
        Segment left, right;
        left.chart = right.chart = w.chart;
        left.a = w.a;
        left.b = mid;
        right.a = mid;
        right.b = w.b;
        evals += rule.evaluate(charts[w.chart].f, left);
        evals += rule.evaluate(charts[w.chart].f, right);
        segs[worst] = std::move(left);
        segs.push_back(std::move(right));
    }

    total.resize(dim);
    err.resize(dim);
    VecQuadResult out;
    out.value = total;
    out.abs_error_estimate = err;
    out.evaluations = evals;
    return out;
}

}  // namespace

VecQuadResult integrate_1d_vec(const VectorFn& f, int dim, Interval dom, const QuadOptions& opts) {
    if (std::isnan(dom.lo) || std::isnan(dom.hi)) throw ValidationError("integration limit is NaN");
    if (dom.lo > dom.hi) throw ValidationError("integration limits out of order");
    if (dom.lo == dom.hi || dom.lo == INFINITY || dom.hi == -INFINITY) {
        return VecQuadResult{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0), 0};
    }
    const bool lo_inf = std::isinf(dom.lo);
    const bool hi_inf = std::isinf(dom.hi);
    if (!lo_inf && !hi_inf) return adaptive({Chart{f, dom.lo, dom.hi}}, dim, opts);

    // Each infinite map is split at t = 1/2 and its upper half is written in
    // s = 1 - t, so panels near the infinite end keep full floating-point
    // resolution (matters for slowly decaying algebraic tails).
    const int full = opts.trailing_noise_bounds ? 2 * dim : dim;
    std::vector<double> buf(full), buf2(full);
    auto emit = [full](double* out, const double* v, double jac) {
        for (int k = 0; k < full; ++k) out[k] = v[k] == 0.0 ? 0.0 : v[k] * jac;
    };
    if (lo_inf && hi_inf) {
        // x = tan(pi t / 2), folded at 0: f(x) + f(-x).
        auto fold = [&](double x, double jac, double* out) {
            if (!std::isfinite(x) || !std::isfinite(jac)) {
                std::fill(out, out + full, 0.0);
                return;
            }
            f(x, buf.data());
            f(-x, buf2.data());
            for (int k = 0; k < full; ++k) buf[k] += buf2[k];
            emit(out, buf.data(), jac);
        };
        VectorFn near = [&](double t, double* out) {
            const double c = std::cos(0.5 * M_PI * t);
            fold(std::tan(0.5 * M_PI * t), 0.5 * M_PI / (c * c), out);
        };
        VectorFn far = [&](double s, double* out) {
            const double sn = std::sin(0.5 * M_PI * s);
            fold(1.0 / std::tan(0.5 * M_PI * s), 0.5 * M_PI / (sn * sn), out);
        };
        return adaptive({Chart{near, 0.0, 0.5}, Chart{far, 0.0, 0.5}}, dim, opts);
    }
    // x = base + dir t/(1-t)
    const double base = lo_inf ? dom.hi : dom.lo;
    const double dir = lo_inf ? -1.0 : 1.0;
    auto eval = [&](double x, double jac, double* out) {
        if (!std::isfinite(x) || !std::isfinite(jac)) {
            std::fill(out, out + full, 0.0);
            return;
        }
        f(x, buf.data());
        emit(out, buf.data(), jac);
    };
    VectorFn near = [&](double t, double* out) {
        const double u = 1.0 - t;
        eval(base + dir * t / u, 1.0 / (u * u), out);
    };
    VectorFn far = [&](double s, double* out) { eval(base + dir * (1.0 - s) / s, 1.0 / (s * s), out); };
    return adaptive({Chart{near, 0.0, 0.5}, Chart{far, 0.0, 0.5}}, dim, opts);
}

QuadResult integrate_1d(const ScalarFn& f, Interval domain, const QuadOptions& opts) {
    VectorFn g = [&](double x, double* out) { out[0] = f(x); };
    VecQuadResult r = integrate_1d_vec(g, 1, domain, opts);
    return QuadResult{r.value[0], r.abs_error_estimate[0], r.evaluations};
}

QuadResult integrate_1d(const ScalarFn& f, Interval domain, double rel_tol) {
    QuadOptions o;
    o.rel_tol = rel_tol;
    return integrate_1d(f, domain, o);
}

std::vector<Interval> union_pieces(double lo, double r, double s, double hi) {
    if (!(lo <= r && r <= s && s <= hi)) throw ValidationError("r ≤ s violated");
    std::vector<Interval> p;
    if (r > lo) p.push_back({lo, r});
    if (hi > s) p.push_back({s, hi});
    return p;
}

QuadResult integrate_union_1d(const ScalarFn& f, double lo, double r, double s, double hi,
                              const QuadOptions& opts) {
    QuadResult total;
    for (const Interval& iv : union_pieces(lo, r, s, hi)) {
        QuadResult q = integrate_1d(f, iv, opts);
        total.value += q.value;
        total.abs_error_estimate += q.abs_error_estimate;
        total.evaluations += q.evaluations;
    }
    return total;
}

namespace {

// Rounding error of f*(a - b) relative to |f|(|a| + |b|), with headroom for
// the few ulps lost inside G and f.
constexpr double kNoiseUlps = 16.0;

class AntisymEvaluator {
public:
    explicit AntisymEvaluator(const AntisymProblem& p)
        : p_(p), n_(p.count), m_(pair_count(p.count)), ga_(n_), gb_(n_), gc_(n_), gd_(n_) {}

    int pairs() const { return m_; }

    // out[pair] = f(l,m) [G_j(l) G_k(m) - G_k(l) G_j(m)], with gl = G(l) supplied,
    // followed by out[pairs + pair], a bound on its rounding error.
    void bracket(double l, const double* gl, double m, double* out) {
        double* noise = out + m_;
        if (p_.pair_antidiagonal) {
            const double u = l + m;
            const double scale = std::max({1.0, std::fabs(l), std::fabs(m)});
            const double delta = 1e-6 * scale;
            if (std::fabs(u) < delta) {
                const double v = m - l;
                const double l1 = 0.5 * (delta - v), m1 = 0.5 * (delta + v);
                const double l2 = 0.5 * (-delta - v), m2 = 0.5 * (-delta + v);
                p_.weighted_g(l1, ga_.data());
                p_.weighted_g(m1, gb_.data());
                p_.weighted_g(l2, gc_.data());
                p_.weighted_g(m2, gd_.data());
                const double f1 = p_.f(l1, m1);
                const double f2 = p_.f(l2, m2);
                int idx = 0;
                for (int j = 0; j < n_; ++j) {
                    for (int k = j + 1; k < n_; ++k, ++idx) {
                        const double b1 = ga_[j] * gb_[k] - ga_[k] * gb_[j];
                        const double b2 = gc_[j] * gd_[k] - gc_[k] * gd_[j];
                        out[idx] = 0.5 * (f1 * b1 + f2 * b2);
                        noise[idx] = kNoiseUlps * kEps * 0.5 *
                                     (std::fabs(f1) * (std::fabs(ga_[j] * gb_[k]) + std::fabs(ga_[k] * gb_[j])) +
                                      std::fabs(f2) * (std::fabs(gc_[j] * gd_[k]) + std::fabs(gc_[k] * gd_[j])));
                    }
                }
                return;
            }
        }
        p_.weighted_g(m, gb_.data());
        const double fv = p_.f(l, m);
        int idx = 0;
        for (int j = 0; j < n_; ++j) {
            for (int k = j + 1; k < n_; ++k, ++idx) {
                const double b = gl[j] * gb_[k] - gl[k] * gb_[j];
                out[idx] = b == 0.0 ? 0.0 : fv * b;
                noise[idx] = kNoiseUlps * kEps * std::fabs(fv) * (std::fabs(gl[j] * gb_[k]) + std::fabs(gl[k] * gb_[j]));
            }
        }
    }

private:
    const AntisymProblem& p_;
    int n_, m_;
    std::vector<double> ga_, gb_, gc_, gd_;
};

}  // namespace

VecQuadResult antisym_edge_batch(const AntisymProblem& p, double x,
                                 const std::vector<Interval>& pieces, const QuadOptions& opts) {
    AntisymEvaluator ev(p);
    const int m = ev.pairs();
    std::vector<double> gx(p.count);
    p.weighted_g(x, gx.data());
    VecQuadResult total{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0), 0};
    QuadOptions o = opts;
    o.trailing_noise_bounds = true;
    for (const Interval& iv : pieces) {
        VectorFn inner = [&](double mu, double* out) { ev.bracket(x, gx.data(), mu, out); };
        VecQuadResult r = integrate_1d_vec(inner, m, iv, o);
        for (int c = 0; c < m; ++c) {
            total.value[c] += r.value[c];
            total.abs_error_estimate[c] += r.abs_error_estimate[c];
        }
        total.evaluations += r.evaluations;
    }
    return total;
}

VecQuadResult integrate_2d_antisym_batch(const AntisymProblem& p,
                                         const std::vector<Interval>& input,
                                         const QuadOptions& opts) {
    const int m = pair_count(p.count);
    // Pieces straddling 0 are split there: folding the real line would mix
    // both sides of the antidiagonal with the moving inner bound of a
    // diagonal block, which stalls on algebraic tails.
    std::vector<Interval> pieces;
    for (const Interval& iv : input) {
        const bool straddles = iv.lo < 0 && iv.hi > 0;
        if (straddles && (p.pair_antidiagonal || (std::isinf(iv.lo) && std::isinf(iv.hi)))) {
            pieces.push_back({iv.lo, 0.0});
            pieces.push_back({0.0, iv.hi});
        } else {
            pieces.push_back(iv);
        }
    }
    VecQuadResult total{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0), 0};
    if (m == 0) return total;

    QuadOptions inner_opts = opts;
    inner_opts.rel_tol = std::max(opts.rel_tol * 0.1, 1e-15);
    inner_opts.abs_tol = opts.abs_tol * 0.1;
    inner_opts.trailing_noise_bounds = true;
    // The outer integrand carries the inner error estimates as its noise.
    QuadOptions outer_opts = opts;
    outer_opts.trailing_noise_bounds = true;

    // The integrand is symmetric under (l,m) -> (m,l), so each diagonal block is
    // twice its upper triangle and off-diagonal blocks appear twice.
    for (std::size_t a = 0; a < pieces.size(); ++a) {
        for (std::size_t b = a; b < pieces.size(); ++b) {
            AntisymEvaluator ev(p);
            std::vector<double> gl(p.count);
            long inner_evals = 0;
            const Interval outer_iv = pieces[a];
            const bool diagonal = a == b;
            const double hi_b = pieces[b].hi;
            VectorFn outer = [&](double l, double* out) {
                p.weighted_g(l, gl.data());
                VectorFn inner = [&](double mu, double* o) { ev.bracket(l, gl.data(), mu, o); };
                Interval iv = diagonal ? Interval{l, hi_b} : pieces[b];
                VecQuadResult r = integrate_1d_vec(inner, m, iv, inner_opts);
                inner_evals += r.evaluations;
                for (int c = 0; c < m; ++c) {
                    out[c] = r.value[c];
                    out[m + c] = r.abs_error_estimate[c];
                }
            };
            VecQuadResult r = integrate_1d_vec(outer, m, outer_iv, outer_opts);
            // 1/2 from the definition times 2 from the symmetry folding.
            for (int c = 0; c < m; ++c) {
                total.value[c] += r.value[c];
                total.abs_error_estimate[c] += r.abs_error_estimate[c];
            }
            total.evaluations += r.evaluations + inner_evals;
        }
    }
    return total;
}

QuadResult integrate_2d_antisym(const ScalarFn& g_j, const ScalarFn& g_k, const ScalarFn& w,
                                const std::function<double(double, double)>& f,
                                const std::vector<Interval>& pieces, double rel_tol,
                                bool pair_antidiagonal) {
    AntisymProblem p;
    p.count = 2;
    p.weighted_g = [&](double x, double* out) {
        const double wx = w(x);
        out[0] = wx * g_j(x);
        out[1] = wx * g_k(x);
    };
    p.f = f;
    p.pair_antidiagonal = pair_antidiagonal;
    QuadOptions o;
    o.rel_tol = rel_tol;
    VecQuadResult r = integrate_2d_antisym_batch(p, pieces, o);
    return QuadResult{r.value[0], r.abs_error_estimate[0], r.evaluations};
}

}  // namespace rmtgaps::quad
