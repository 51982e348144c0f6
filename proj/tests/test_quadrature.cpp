#include <doctest.h>

#include <cmath>
#include <random>

#include "rmtgaps/errors.hpp"
#include "rmtgaps/quadrature.hpp"

using namespace rmtgaps;
using namespace rmtgaps::quad;

TEST_CASE("1d reference integrals") {
    CHECK(integrate_1d([](double x) { return x; }, {0, 1}).value == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(integrate_1d([](double x) { return std::exp(-x); }, {0, INFINITY}).value ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(integrate_1d([](double x) { return std::exp(-x * x); }, {-INFINITY, INFINITY}).value ==
          doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
    CHECK(integrate_1d([](double x) { return std::exp(x); }, {-INFINITY, 0.5}).value ==
          doctest::Approx(std::exp(0.5)).epsilon(1e-12));
    // power-type endpoint singularity
    CHECK(integrate_1d([](double x) { return std::pow(x, -0.7); }, {0, 1}, 1e-12).value ==
          doctest::Approx(1.0 / 0.3).epsilon(1e-10));
    // algebraic tail
    CHECK(integrate_1d([](double x) { return 1.0 / (1 + x * x); }, {-INFINITY, INFINITY}, 1e-12).value ==
          doctest::Approx(M_PI).epsilon(1e-11));
    CHECK(integrate_1d([](double x) { return x; }, {2, 2}).value == 0.0);
}

TEST_CASE("15-point Kronrod rule is exact for polynomials of degree 22 on one panel") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int deg = 0; deg <= 22; ++deg) {
        const double c = u(rng);
        auto f = [&](double x) { return c * std::pow(x, deg); };
        QuadResult r = integrate_1d(f, {0.0, 1.0}, 1e-13);
        CHECK(r.value == doctest::Approx(c / (deg + 1)).epsilon(1e-14));
    }
}

TEST_CASE("additivity and union") {
    auto f = [](double x) { return std::exp(-x) * std::pow(x, 1.3); };
    const double whole = integrate_1d(f, {0, INFINITY}, 1e-13).value;
    const double parts = integrate_1d(f, {0, 2.5}, 1e-13).value + integrate_1d(f, {2.5, INFINITY}, 1e-13).value;
    CHECK(whole == doctest::Approx(parts).epsilon(1e-12));

    QuadOptions o;
    o.rel_tol = 1e-13;
    auto g = [](double x) { return std::exp(-x); };
    CHECK(integrate_union_1d(g, 0, 0, INFINITY, INFINITY, o).value == 0.0);
    CHECK(integrate_union_1d(g, 0, 1.5, 1.5, INFINITY, o).value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(integrate_union_1d(g, 0, 1, 2, INFINITY, o).value ==
          doctest::Approx(1 - std::exp(-1.0) + std::exp(-2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(integrate_union_1d(g, 0, 2, 1, INFINITY, o), ValidationError);
}

TEST_CASE("NaN integrand is reported") {
    CHECK_THROWS_AS(integrate_1d([](double x) { return x > 0.5 ? NAN : 1.0; }, {0, 1}), NumericalError);
}

TEST_CASE("vector-valued integration") {
    VectorFn f = [](double x, double* out) {
        out[0] = std::exp(-x);
        out[1] = x * std::exp(-x);
        out[2] = 0.0;
    };
    QuadOptions o;
    o.rel_tol = 1e-12;
    VecQuadResult r = integrate_1d_vec(f, 3, {0, INFINITY}, o);
    CHECK(r.value[0] == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(r.value[1] == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(r.value[2] == 0.0);
}

namespace {

double schur(double l, double m) { return (m - l) / (m + l); }

}  // namespace

TEST_CASE("antisymmetric double integral basics") {
    auto one = [](double) { return 1.0; };
    auto lin = [](double x) { return x; };
    auto ex = [](double x) { return std::exp(-x); };
    std::vector<Interval> unit{{0.0, 1.0}};
    CHECK(integrate_2d_antisym(ex, ex, one, schur, unit, 1e-10).value == 0.0);
    const double a = integrate_2d_antisym(one, lin, one, schur, unit, 1e-12).value;
    const double b = integrate_2d_antisym(lin, one, one, schur, unit, 1e-12).value;
    CHECK(a == doctest::Approx(-b).epsilon(1e-14));

    // 1/2 int int (m-l)^2/(m+l) over the unit square, by a midpoint grid with
    // Richardson extrapolation (error ~ h^2).
    auto grid = [](int n) {
        const double h = 1.0 / n;
        double s = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double l = (i + 0.5) * h, m = (j + 0.5) * h;
                s += (m - l) * (m - l) / (m + l);
            }
        return 0.5 * s * h * h;
    };
    const double g1 = grid(400), g2 = grid(800);
    const double oracle = (4 * g2 - g1) / 3;
    CHECK(a == doctest::Approx(oracle).epsilon(1e-7));
    // closed form: int_0^1 int_0^1 (m-l)^2/(m+l) = (8 ln 2 - 5)/3
    CHECK(a == doctest::Approx(0.5 * (8 * std::log(2.0) - 5) / 3).epsilon(1e-11));
}

TEST_CASE("antisymmetric integral with the removable line l + m = 0") {
    // Even g: e^{-l^2/s^2}. Reference via the Gaussian closed form
    // pi s_j s_k (s_k^2 - s_j^2)/(s_k^2 + s_j^2) for the whole real line.
    const double sj = 0.75, sk = 4.0 / 9.0;
    auto gj = [&](double x) { return std::exp(-x * x / (sj * sj)); };
    auto gk = [&](double x) { return std::exp(-x * x / (sk * sk)); };
    auto one = [](double) { return 1.0; };
    std::vector<Interval> line{{-INFINITY, INFINITY}};
    const double v = integrate_2d_antisym(gj, gk, one, schur, line, 1e-11, true).value;
    const double ref = M_PI * sj * sk * (sk * sk - sj * sj) / (sk * sk + sj * sj);
    CHECK(v == doctest::Approx(ref).epsilon(1e-9));

    // union of two half-lines straddling the origin asymmetrically, checked
    // against the complement decomposition over sub-rectangles
    std::vector<Interval> u{{-INFINITY, -0.5}, {0.6, INFINITY}};
    std::vector<Interval> mid{{-0.5, 0.6}};
    AntisymProblem p;
    p.count = 2;
    p.weighted_g = [&](double x, double* out) {
        out[0] = gj(x);
        out[1] = gk(x);
    };
    p.f = schur;
    p.pair_antidiagonal = true;
    QuadOptions o;
    o.rel_tol = 1e-11;
    const double vu = integrate_2d_antisym_batch(p, u, o).value[0];
    const double vm = integrate_2d_antisym_batch(p, mid, o).value[0];
    // cross term between the middle piece and the union
    double cross = 0;
    {
        std::vector<double> g(2);
        VectorFn outer = [&](double l, double* out) {
            p.weighted_g(l, g.data());
            VecQuadResult in = antisym_edge_batch(p, l, u, o);
            out[0] = in.value[0];
        };
        cross = integrate_1d_vec(outer, 1, mid[0], o).value[0];
    }
    CHECK(vu + vm + cross == doctest::Approx(ref).epsilon(1e-9));
}
