#pragma once

#include <Eigen/Dense>

namespace rmtgaps::linalg {

using Matrix = Eigen::MatrixXd;

struct LogDet {
    double log_abs;  // -inf for a singular matrix
    int sign;        // -1, 0 or +1
};

double det(const Matrix& a);
LogDet log_det(const Matrix& a);

// Returns (A - A^T)/2; throws if A is antisymmetric only beyond 1e-12 relative.
Matrix antisymmetrized(const Matrix& a);

// Pf(A) with Pf([[0,1],[-1,0]]) = 1, by pivoted skew-symmetric tridiagonalization.
double pfaffian(const Matrix& a);

// d Pf(A(x))/dx = Pf(A) tr(A^{-1} dA) / 2. Throws SingularMatrixError when A
// cannot be inverted reliably.
double pfaffian_derivative(const Matrix& a, const Matrix& da);

}  // namespace rmtgaps::linalg
