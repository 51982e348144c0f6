#include "rmtgaps/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "rmtgaps/errors.hpp"

namespace rmtgaps::linalg {

namespace {

void require_square_finite(const Matrix& a, const char* what) {
    if (a.rows() != a.cols()) throw ValidationError(std::string(what) + ": matrix is not square");
    if (!a.allFinite()) throw NumericalError(std::string(what) + ": matrix has non-finite entries");
}

}  // namespace

LogDet log_det(const Matrix& a) {
    require_square_finite(a, "det");
    const Eigen::Index n = a.rows();
    if (n == 0) return {0.0, 1};
    Eigen::PartialPivLU<Matrix> lu(a);
    const Matrix& m = lu.matrixLU();
    int sign = static_cast<int>(lu.permutationP().determinant());
    double log_abs = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = m(i, i);
        if (d == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
        if (d < 0) sign = -sign;
        log_abs += std::log(std::fabs(d));
    }
    return {log_abs, sign};
}

double det(const Matrix& a) {
    require_square_finite(a, "det");
    if (a.rows() == 0) return 1.0;
    Eigen::PartialPivLU<Matrix> lu(a);
    return lu.determinant();
}

Matrix antisymmetrized(const Matrix& a) {
    require_square_finite(a, "pfaffian");
    const double scale = a.cwiseAbs().maxCoeff();
    const double asym = (a + a.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale * 2.0) {
        std::ostringstream os;
        os << "matrix is not antisymmetric (max |A+A^T| = " << asym << ", scale " << scale << ")";
        throw ValidationError(os.str());
    }
    return 0.5 * (a - a.transpose());
}

double pfaffian(const Matrix& input) {
    Matrix a = antisymmetrized(input);
    const Eigen::Index n = a.rows();
    if (n % 2 != 0) throw ValidationError("pfaffian of an odd-dimensional matrix");
    double pf = 1.0;
    for (Eigen::Index k = 0; k + 1 < n; k += 2) {
        // Pivot: largest entry of column k below the diagonal moves to row k+1.
        Eigen::Index kp = k + 1;
        a.col(k).segment(k + 1, n - k - 1).cwiseAbs().maxCoeff(&kp);
        kp += k + 1;
        if (kp != k + 1) {
            a.row(k + 1).swap(a.row(kp));
            a.col(k + 1).swap(a.col(kp));
            pf = -pf;
        }
        const double piv = a(k, k + 1);
        if (piv == 0.0) return 0.0;
        pf *= piv;
        if (k + 2 < n) {
            const Eigen::Index m = n - k - 2;
            Eigen::VectorXd tau = a.row(k).segment(k + 2, m).transpose() / piv;
            Eigen::VectorXd col = a.col(k + 1).segment(k + 2, m);
            a.block(k + 2, k + 2, m, m) += tau * col.transpose() - col * tau.transpose();
        }
    }
    return pf;
}

double pfaffian_derivative(const Matrix& a, const Matrix& da) {
    if (da.rows() != a.rows() || da.cols() != a.cols()) {
        throw ValidationError("pfaffian_derivative: dimension mismatch");
    }
    const Matrix as = antisymmetrized(a);
    const Matrix das = antisymmetrized(da);
    if (das.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    Eigen::PartialPivLU<Matrix> lu(as);
    const Eigen::VectorXd diag = lu.matrixLU().diagonal().cwiseAbs();
    if (!(diag.minCoeff() > 1e-13 * diag.maxCoeff()) || !(lu.rcond() >= 1e-13)) {
        throw SingularMatrixError("pfaffian_derivative: matrix is numerically singular");
    }
    const double trace = lu.solve(das).trace();
    return 0.5 * pfaffian(as) * trace;
}

}  // namespace rmtgaps::linalg
