#pragma once

// Real-valued special functions used by the ensemble kernels.

namespace rmtgaps::specfun {

struct SeriesControl {
    double rel_tol = 1e-15;
    double abs_tol = 1e-300;
    long max_terms = 100000;
};

// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x).
double gamma_p(double a, double x, const SeriesControl& ctl = {});
double gamma_q(double a, double x, const SeriesControl& ctl = {});

// Unregularized Gamma(a,x) and gamma(a,x). x may be +inf.
double gamma_upper(double a, double x, const SeriesControl& ctl = {});
double gamma_lower(double a, double x, const SeriesControl& ctl = {});

double erf(double x);

double beta(double a, double b);
double log_beta(double a, double b);

// Gauss hypergeometric 2F1(a,b;c;z) for real z < 1.
double hyp2f1(double a, double b, double c, double z, const SeriesControl& ctl = {});

// Regularized incomplete beta I_z(a,b) for a,b > 0; also returns 1 - I_z
// without cancellation.
struct BetaPair {
    double lower;
    double upper;
};
BetaPair beta_reg(double z, double a, double b, const SeriesControl& ctl = {});

// B(z;a,b) = int_0^z t^(a-1) (1-t)^(b-1) dt, a > 0, any real b (z < 1 if b <= 0).
double beta_inc(double z, double a, double b, const SeriesControl& ctl = {});

// int_z^1 t^(a-1) (1-t)^(b-1) dt for a > 0, b > 0.
double beta_inc_upper(double z, double a, double b, const SeriesControl& ctl = {});

// int_0^r u^(a-1) (1+u)^(b-1) du, r >= 0 (r = +inf allowed when a+b < 1).
// This is the real form of (-1)^(-a) B(-r;a,b).
double beta_inc_negarg(double r, double a, double b, const SeriesControl& ctl = {});

// int_r^inf u^(a-1) (1+u)^(b-1) du, requires a+b < 1.
double beta_inc_negarg_tail(double r, double a, double b, const SeriesControl& ctl = {});

// Appell F1(a; b1, b2; c; x, y) through its Euler integral; c > a > 0, x,y < 1.
double appell_f1(double a, double b1, double b2, double c, double x, double y,
                 double rel_tol = 1e-13);

double barnes_g(int n);
double log_barnes_g(int n);

}  // namespace rmtgaps::specfun
