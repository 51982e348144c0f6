#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rmtgaps/errors.hpp"
#include "rmtgaps/linalg.hpp"

using namespace rmtgaps;
using namespace rmtgaps::linalg;

namespace {

Matrix random_antisym(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Matrix a = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            a(j, k) = nd(rng);
            a(k, j) = -a(j, k);
        }
    return a;
}

// Expansion along the first row, for an independent reference.
double pfaffian_expansion(const Matrix& a) {
    const int n = static_cast<int>(a.rows());
    if (n == 0) return 1.0;
    double s = 0.0;
    for (int k = 1; k < n; ++k) {
        std::vector<int> keep;
        for (int i = 1; i < n; ++i)
            if (i != k) keep.push_back(i);
        Matrix m(n - 2, n - 2);
        for (int p = 0; p < n - 2; ++p)
            for (int q = 0; q < n - 2; ++q) m(p, q) = a(keep[p], keep[q]);
        s += ((k % 2) ? 1.0 : -1.0) * a(0, k) * pfaffian_expansion(m);
    }
    return s;
}

}  // namespace

TEST_CASE("determinant") {
    CHECK(det(Matrix::Identity(4, 4)) == 1.0);
    Matrix m(2, 2);
    m << 1, 2, 3, 4;
    CHECK(det(m) == doctest::Approx(-2.0).epsilon(1e-15));
    Matrix eq(3, 3);
    eq << 1, 2, 1, 4, 5, 4, 7, 8, 7;
    CHECK(det(eq) == 0.0);
    const LogDet ld = log_det(m);
    CHECK(ld.sign == -1);
    CHECK(ld.log_abs == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(log_det(eq).sign == 0);

    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 50; ++t) {
        Matrix a = Matrix::NullaryExpr(5, 5, [&]() { return nd(rng); });
        const int i = t % 5;
        Eigen::RowVectorXd u = Eigen::RowVectorXd::NullaryExpr(5, [&]() { return nd(rng); });
        Eigen::RowVectorXd v = Eigen::RowVectorXd::NullaryExpr(5, [&]() { return nd(rng); });
        const double alpha = nd(rng), beta = nd(rng);
        Matrix au = a, av = a, aw = a;
        au.row(i) = u;
        av.row(i) = v;
        aw.row(i) = alpha * u + beta * v;
        CHECK(det(aw) == doctest::Approx(alpha * det(au) + beta * det(av)).epsilon(1e-11));
    }
}

TEST_CASE("pfaffian small cases") {
    Matrix a(2, 2);
    a << 0, 3.5, -3.5, 0;
    CHECK(pfaffian(a) == 3.5);
    Matrix j(2, 2);
    j << 0, 1, -1, 0;
    CHECK(pfaffian(j) == 1.0);

    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        Matrix b = random_antisym(4, rng);
        const double ref = b(0, 1) * b(2, 3) - b(0, 2) * b(1, 3) + b(0, 3) * b(1, 2);
        CHECK(pfaffian(b) == doctest::Approx(ref).epsilon(1e-13));
    }
    for (int t = 0; t < 10; ++t) {
        Matrix b = random_antisym(6, rng);
        CHECK(pfaffian(b) == doctest::Approx(pfaffian_expansion(b)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(pfaffian(Matrix::Zero(3, 3)), ValidationError);
    Matrix bad(2, 2);
    bad << 0, 1, 1, 0;
    CHECK_THROWS_AS(pfaffian(bad), ValidationError);
    // rounding-level asymmetry is accepted
    Matrix noisy = random_antisym(4, rng);
    noisy(0, 1) += 1e-15;
    CHECK_NOTHROW(pfaffian(noisy));
}

TEST_CASE("pfaffian squared equals determinant; permutation sign") {
    std::mt19937_64 rng(3);
    for (int n = 2; n <= 12; n += 2) {
        for (int t = 0; t < 20; ++t) {
            Matrix a = random_antisym(n, rng);
            const double pf = pfaffian(a);
            CHECK(pf * pf == doctest::Approx(det(a)).epsilon(1e-9));

            std::vector<int> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            Matrix p = Matrix::Zero(n, n);
            for (int i = 0; i < n; ++i) p(perm[i], i) = 1.0;
            const Matrix b = p.transpose() * a * p;
            CHECK(pfaffian(b) == doctest::Approx(det(p) * pf).epsilon(1e-10));
        }
    }
}

TEST_CASE("pfaffian derivative") {
    Matrix a(2, 2), da(2, 2);
    a << 0, 2, -2, 0;
    da << 0, 1, -1, 0;
    CHECK(pfaffian_derivative(a, da) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pfaffian_derivative(a, Matrix::Zero(2, 2)) == 0.0);

    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
        const Matrix a0 = random_antisym(4, rng), b = random_antisym(4, rng);
        const double x = 0.3, h = 1e-4;
        const double fd = (pfaffian(a0 + (x + h) * b) - pfaffian(a0 + (x - h) * b)) / (2 * h);
        CHECK(pfaffian_derivative(a0 + x * b, b) == doctest::Approx(fd).epsilon(1e-6));
    }
    Matrix s = Matrix::Zero(4, 4);
    s(0, 1) = 1;
    s(1, 0) = -1;
    CHECK_THROWS_AS(pfaffian_derivative(s, random_antisym(4, rng)), SingularMatrixError);
}
