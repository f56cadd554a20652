#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace gpls {

struct LeastSquaresOptions {
    /// Singular directions whose pivot falls below rank_tol times the largest pivot are
    /// dropped (minimum-norm solution on the remaining subspace). Non-positive: Eigen default.
    double rank_tol = 0.0;
    /// Tikhonov weight; 0 means plain least squares.
    double ridge = 0.0;
};

/// Minimum-norm least-squares solution of min ||A X - B||_2 via a rank-revealing complete
/// orthogonal decomposition. Tall systems are first compressed by an unpivoted Householder
/// QR, which leaves the solution set unchanged.
inline Eigen::MatrixXd least_squares(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                     const LeastSquaresOptions& opt = {}) {
    const Eigen::Index cols = a.cols();
    Eigen::MatrixXd lhs;
    Eigen::MatrixXd rhs;
    if (opt.ridge > 0.0) {
        lhs.resize(a.rows() + cols, cols);
        lhs << a, std::sqrt(opt.ridge) * Eigen::MatrixXd::Identity(cols, cols);
        rhs.resize(b.rows() + cols, b.cols());
        rhs << b, Eigen::MatrixXd::Zero(cols, b.cols());
    } else {
        lhs = a;
        rhs = b;
    }
    if (lhs.rows() > 2 * cols) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(lhs);
        Eigen::MatrixXd qtb = qr.householderQ().adjoint() * rhs;
        Eigen::MatrixXd r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
        lhs = std::move(r);
        rhs = qtb.topRows(cols);
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    if (opt.rank_tol > 0.0) cod.setThreshold(opt.rank_tol);
    cod.compute(lhs);
    return cod.solve(rhs);
}

/// Moore-Penrose pseudo-inverse through the same decomposition.
inline Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double rank_tol = 0.0) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    if (rank_tol > 0.0) cod.setThreshold(rank_tol);
    cod.compute(a);
    return cod.pseudoInverse();
}

/// Numerical rank from singular values: the count of sigma_i > rel_tol * sigma_max.
inline Eigen::Index svd_rank(const Eigen::MatrixXd& a, double rel_tol) {
    if (a.size() == 0) return 0;
    const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(a).singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    return (sv.array() > rel_tol * sv(0)).count();
}

/// Singular values in decreasing order.
inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& a) { return Eigen::BDCSVD<Eigen::MatrixXd>(a).singularValues(); }

}  // namespace gpls
