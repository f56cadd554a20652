#pragma once

// Level-set polynomials of algebraic varieties sampled by point clouds: Lagrange-basis
// Vandermonde, rank-revealing Gaussian elimination with full pivoting, the on-variety
// Lagrange basis, the vanishing-ideal basis and the resulting level-set polynomial.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gpls/error.hpp"
#include "gpls/linalg.hpp"
#include "gpls/mindex.hpp"
#include "gpls/nodes.hpp"
#include "gpls/poly.hpp"

namespace gpls {

/// Isotropic affine map model = scale * user + translation, scale > 0.
struct DomainTransform {
    double scale = 1.0;
    Eigen::VectorXd translation;

    static DomainTransform identity(int dim) { return {1.0, Eigen::VectorXd::Zero(dim)}; }

    /// Centers the bounding box of the rows of `points` and scales its largest half-extent
    /// to `half_width`.
    static DomainTransform fit_to_box(const Eigen::MatrixXd& points, double half_width = 0.95) {
        if (points.rows() == 0) throw DomainError("domain transform: empty point set");
        const Eigen::RowVectorXd lo = points.colwise().minCoeff();
        const Eigen::RowVectorXd hi = points.colwise().maxCoeff();
        const Eigen::VectorXd center = (0.5 * (lo + hi)).transpose();
        double extent = 0.5 * (hi - lo).maxCoeff();
        if (!(extent > 0.0)) extent = 1.0;
        DomainTransform t;
        t.scale = half_width / extent;
        t.translation = -t.scale * center;
        return t;
    }

    int dim() const { return static_cast<int>(translation.size()); }

    Eigen::MatrixXd to_model(const Eigen::MatrixXd& user) const {
        return ((scale * user).rowwise() + translation.transpose()).eval();
    }
    Eigen::MatrixXd to_user(const Eigen::MatrixXd& model) const {
        return ((model.rowwise() - translation.transpose()) / scale).eval();
    }
    Eigen::VectorXd point_to_model(const Eigen::VectorXd& x) const { return scale * x + translation; }
    Eigen::VectorXd point_to_user(const Eigen::VectorXd& y) const { return (y - translation) / scale; }
};

/// R_{A,P} with r_{i,alpha} = L_alpha(p_i); points are in model coordinates.
struct Vandermonde {
    std::shared_ptr<const UnisolventGrid> grid;
    Eigen::MatrixXd points;
    Eigen::MatrixXd entries;
};

/// Points further than `slack` outside [-1,1]^m are rejected with the offending row.
inline Vandermonde assemble_vandermonde(std::shared_ptr<const UnisolventGrid> grid, const Eigen::MatrixXd& points,
                                        double slack = 1e-9) {
    if (!grid) throw DomainError("assemble_vandermonde: null grid");
    if (points.rows() < 1) throw DomainError("assemble_vandermonde: need at least one point");
    if (points.cols() != grid->dim()) throw DomainError("assemble_vandermonde: point dimension mismatch");
    for (Eigen::Index r = 0; r < points.rows(); ++r)
        for (Eigen::Index c = 0; c < points.cols(); ++c)
            if (!(std::abs(points(r, c)) <= 1.0 + slack))
                throw DomainError("assemble_vandermonde: point " + std::to_string(r) +
                                  " lies outside the domain [-1,1]^m");
    Vandermonde v;
    v.entries = grid->lagrange_matrix(points);
    v.grid = std::move(grid);
    v.points = points;
    return v;
}

/// W1 R W2 = L U with rank-profile factors.
///   row_perm[i]: original row at pivoted position i (W1), likewise col_perm (W2)
///   lower: rows x rank, unit lower triangular in its leading block
///   upper: rank x cols, [U1 U2] with U1 upper triangular
struct GefpFactorization {
    std::vector<Eigen::Index> row_perm;
    std::vector<Eigen::Index> col_perm;
    Eigen::MatrixXd lower;
    Eigen::MatrixXd upper;
    Eigen::Index rank = 0;
    double rank_tol = 0.0;
    /// |pivot| of every accepted step, followed by the first rejected one (if any).
    std::vector<double> pivot_magnitudes;

    Eigen::Index rows() const { return static_cast<Eigen::Index>(row_perm.size()); }
    Eigen::Index cols() const { return static_cast<Eigen::Index>(col_perm.size()); }
    Eigen::Index corank() const { return cols() - rank; }

    /// Largest rejected pivot relative to the first pivot (0 when nothing was rejected).
    double rejected_ratio() const {
        if (pivot_magnitudes.size() <= static_cast<std::size_t>(rank) || pivot_magnitudes.empty() ||
            pivot_magnitudes.front() == 0.0)
            return 0.0;
        return pivot_magnitudes[static_cast<std::size_t>(rank)] / pivot_magnitudes.front();
    }
    /// Smallest accepted pivot relative to the first pivot.
    double accepted_ratio() const {
        if (rank == 0) return 0.0;
        return pivot_magnitudes[static_cast<std::size_t>(rank - 1)] / pivot_magnitudes.front();
    }
};

/// Gaussian elimination with full pivoting. Stops as soon as the largest remaining entry
/// drops to rank_tol * |first pivot| or below; ties in the pivot search go to the smallest
/// (row, column) pair of the current ordering.
inline GefpFactorization gefp(const Eigen::MatrixXd& matrix, double rank_tol = 1e-8) {
    const Eigen::Index rows = matrix.rows();
    const Eigen::Index cols = matrix.cols();
    Eigen::MatrixXd a = matrix;
    GefpFactorization f;
    f.rank_tol = rank_tol;
    f.row_perm.resize(static_cast<std::size_t>(rows));
    f.col_perm.resize(static_cast<std::size_t>(cols));
    std::iota(f.row_perm.begin(), f.row_perm.end(), Eigen::Index{0});
    std::iota(f.col_perm.begin(), f.col_perm.end(), Eigen::Index{0});
    const Eigen::Index steps = std::min(rows, cols);
    double first = 0.0;
    Eigen::Index k = 0;
    for (; k < steps; ++k) {
        Eigen::Index pr = k, pc = k;
        double best = -1.0;
        for (Eigen::Index i = k; i < rows; ++i)
            for (Eigen::Index j = k; j < cols; ++j) {
                const double v = std::abs(a(i, j));
                if (v > best) {
                    best = v;
                    pr = i;
                    pc = j;
                }
            }
        if (k == 0) first = best;
        if (best == 0.0 || best <= rank_tol * first) {
            if (best > 0.0) f.pivot_magnitudes.push_back(best);
            break;
        }
        f.pivot_magnitudes.push_back(best);
        if (pr != k) {
            a.row(k).swap(a.row(pr));
            std::swap(f.row_perm[static_cast<std::size_t>(k)], f.row_perm[static_cast<std::size_t>(pr)]);
        }
        if (pc != k) {
            a.col(k).swap(a.col(pc));
            std::swap(f.col_perm[static_cast<std::size_t>(k)], f.col_perm[static_cast<std::size_t>(pc)]);
        }
        const double piv = a(k, k);
        const Eigen::Index rem_r = rows - k - 1;
        const Eigen::Index rem_c = cols - k - 1;
        if (rem_r > 0) {
            a.col(k).tail(rem_r) /= piv;
            if (rem_c > 0)
                a.bottomRightCorner(rem_r, rem_c).noalias() -= a.col(k).tail(rem_r) * a.row(k).tail(rem_c);
        }
    }
    f.rank = k;
    f.lower = Eigen::MatrixXd::Zero(rows, k);
    f.upper = Eigen::MatrixXd::Zero(k, cols);
    for (Eigen::Index j = 0; j < k; ++j) {
        f.lower(j, j) = 1.0;
        f.lower.col(j).tail(rows - j - 1) = a.col(j).tail(rows - j - 1);
        f.upper.row(j).tail(cols - j) = a.row(j).tail(cols - j);
    }
    return f;
}

/// Max-norm of W1 R W2 - L U.
inline double reconstruction_error(const Eigen::MatrixXd& matrix, const GefpFactorization& f) {
    Eigen::MatrixXd permuted(matrix.rows(), matrix.cols());
    for (Eigen::Index i = 0; i < matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < matrix.cols(); ++j)
            permuted(i, j) = matrix(f.row_perm[static_cast<std::size_t>(i)], f.col_perm[static_cast<std::size_t>(j)]);
    if (f.rank > 0) permuted -= f.lower * f.upper;
    return permuted.cwiseAbs().maxCoeff();
}

/// Coefficients (columns, in original column order) spanning the null space of R:
/// U1 D_j = -U2 e_j, completed with e_j on the non-pivot columns.
inline Eigen::MatrixXd kernel_coefficients(const GefpFactorization& f) {
    const Eigen::Index cols = f.cols();
    const Eigen::Index k = f.rank;
    const Eigen::Index corank = cols - k;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(cols, corank);
    if (corank == 0) return out;
    Eigen::MatrixXd rhs = -f.upper.rightCols(corank);
    Eigen::MatrixXd d = k > 0 ? Eigen::MatrixXd(f.upper.leftCols(k).triangularView<Eigen::Upper>().solve(rhs))
                              : Eigen::MatrixXd(0, corank);
    for (Eigen::Index j = 0; j < corank; ++j) {
        for (Eigen::Index i = 0; i < k; ++i) out(f.col_perm[static_cast<std::size_t>(i)], j) = d(i, j);
        out(f.col_perm[static_cast<std::size_t>(k + j)], j) = 1.0;
    }
    return out;
}

/// Basis of the polynomials of Pi_A vanishing on the sample, in the Lagrange basis of the grid.
inline std::vector<Polynomial> kernel_basis(std::shared_ptr<const UnisolventGrid> grid, const GefpFactorization& f) {
    if (!grid || static_cast<std::size_t>(f.cols()) != grid->size())
        throw DomainError("kernel_basis: factorization does not match the grid");
    const Eigen::MatrixXd c = kernel_coefficients(f);
    std::vector<Polynomial> out;
    for (Eigen::Index j = 0; j < c.cols(); ++j) out.push_back(Polynomial::lagrange(grid, c.col(j)));
    return out;
}

/// Original indices of the k anchor points (the first k rows after W1).
inline std::vector<Eigen::Index> anchor_rows(const GefpFactorization& f) {
    return {f.row_perm.begin(), f.row_perm.begin() + f.rank};
}

/// The anchor-row block S_{A,P} of the Vandermonde.
inline Eigen::MatrixXd anchor_block(const Vandermonde& v, const GefpFactorization& f) {
    Eigen::MatrixXd s(f.rank, v.entries.cols());
    for (Eigen::Index i = 0; i < f.rank; ++i) s.row(i) = v.entries.row(f.row_perm[static_cast<std::size_t>(i)]);
    return s;
}

/// Columns C_i with S C_i = e_i (minimum-norm).
inline Eigen::MatrixXd on_variety_lagrange_coefficients(const Vandermonde& v, const GefpFactorization& f) {
    if (f.rank < 1) throw DomainError("on_variety_lagrange: rank is zero");
    const Eigen::MatrixXd s = anchor_block(v, f);
    return least_squares(s, Eigen::MatrixXd::Identity(f.rank, f.rank));
}

/// Lagrange polynomials L_i with L_i(p_j) = delta_ij on the anchor subset.
inline std::vector<Polynomial> on_variety_lagrange(const Vandermonde& v, const GefpFactorization& f) {
    const Eigen::MatrixXd c = on_variety_lagrange_coefficients(v, f);
    std::vector<Polynomial> out;
    for (Eigen::Index j = 0; j < c.cols(); ++j) out.push_back(Polynomial::lagrange(v.grid, c.col(j)));
    return out;
}

enum class FitMode { kernel_corank1, lagrange_sum, signed_distance };

inline std::string to_string(FitMode m) {
    switch (m) {
        case FitMode::kernel_corank1: return "kernel-corank1";
        case FitMode::lagrange_sum: return "lagrange-sum";
        case FitMode::signed_distance: return "signed-distance";
    }
    return "?";
}

inline FitMode parse_fit_mode(const std::string& s) {
    if (s == "kernel-corank1" || s == "kernel") return FitMode::kernel_corank1;
    if (s == "lagrange-sum") return FitMode::lagrange_sum;
    if (s == "signed-distance" || s == "sdf") return FitMode::signed_distance;
    throw DomainError("unknown fit mode '" + s + "' (expected kernel-corank1 or lagrange-sum)");
}

struct FitReport {
    double max_residual = 0.0;
    FitMode mode = FitMode::kernel_corank1;
    double rank_tol = 1e-8;
    std::vector<std::string> warnings;
};

/// A reconstructed level set. `q` is canonical in model coordinates; user points map to the
/// model through `transform`.
struct GplsSurface {
    Polynomial q;
    std::vector<Polynomial> kernel;
    std::shared_ptr<const UnisolventGrid> grid;
    Eigen::Index rank = 0;
    Eigen::Index corank = 0;
    std::vector<Eigen::Index> anchor_indices;
    DomainTransform transform;
    FitReport report;

    double eval_user(const Eigen::VectorXd& x) const {
        const Eigen::VectorXd y = transform.point_to_model(x);
        return eval(q, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
    }
};

enum class TransformPolicy { fit_to_box, identity };

struct GplsOptions {
    FitMode mode = FitMode::kernel_corank1;
    double rank_tol = 1e-8;
    TransformPolicy transform = TransformPolicy::fit_to_box;
    /// Rank separation below this ratio (last accepted / first rejected pivot) is reported
    /// as a conditioning warning.
    double separation_warning = 1e3;
};

namespace detail {

/// ||c||_inf = 1 with the first largest-magnitude coefficient positive.
inline Eigen::VectorXd normalize_max(const Eigen::VectorXd& c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < c.size(); ++i)
        if (std::abs(c(i)) > best) {
            best = std::abs(c(i));
            arg = i;
        }
    if (best <= 0.0) return c;
    return c / c(arg);
}

inline double gradient_norm(const Polynomial& q, const std::vector<Polynomial>& grad, std::span<const double> x) {
    double s = 0.0;
    for (const auto& g : grad) {
        const double v = eval(g, x);
        s += v * v;
    }
    (void)q;
    return std::sqrt(s);
}

}  // namespace detail

/// Level-set polynomial through a sample of an algebraic variety. Throws NoVarietyError for
/// unisolvent samples and AmbiguityError when kernel mode finds corank > 1.
inline GplsSurface build_gpls(const Eigen::MatrixXd& user_points, std::shared_ptr<const MultiIndexSet> set,
                              const GplsOptions& opt = {}) {
    if (!set) throw DomainError("build_gpls: null index set");
    if (opt.mode == FitMode::signed_distance) throw DomainError("build_gpls: use fit_sdf for signed-distance fits");
    if (user_points.cols() != set->dim()) throw DomainError("build_gpls: point dimension mismatch");
    GplsSurface s;
    s.transform = opt.transform == TransformPolicy::identity ? DomainTransform::identity(set->dim())
                                                             : DomainTransform::fit_to_box(user_points);
    const Eigen::MatrixXd model = s.transform.to_model(user_points);
    s.grid = build_grid(set);
    const Vandermonde v = assemble_vandermonde(s.grid, model);
    const GefpFactorization f = gefp(v.entries, opt.rank_tol);
    s.rank = f.rank;
    s.corank = f.corank();
    s.anchor_indices = anchor_rows(f);
    s.report.mode = opt.mode;
    s.report.rank_tol = opt.rank_tol;
    if (s.corank == 0)
        throw NoVarietyError("no variety: the " + std::to_string(user_points.rows()) +
                             " points are unisolvent for the index set (rank " + std::to_string(f.rank) +
                             " = |A|); lower the degree or add points");
    if (opt.mode == FitMode::kernel_corank1 && s.corank > 1)
        throw AmbiguityError("ambiguous variety: corank " + std::to_string(s.corank) +
                                 " (expected 1); sample more points or lower the degree",
                             static_cast<std::size_t>(s.corank));
    const double rejected = f.rejected_ratio();
    if (rejected > 0.0 && f.accepted_ratio() < opt.separation_warning * rejected)
        s.report.warnings.push_back("weak rank separation: smallest kept pivot ratio " +
                                    std::to_string(f.accepted_ratio()) + ", largest dropped " +
                                    std::to_string(rejected));
    s.kernel = kernel_basis(s.grid, f);
    if (opt.mode == FitMode::kernel_corank1) {
        const Polynomial c = to_canonical(s.kernel.front());
        s.q = Polynomial::canonical(c.index_set_ptr(), detail::normalize_max(c.coefficients()));
    } else {
        const Eigen::MatrixXd lag = on_variety_lagrange_coefficients(v, f);
        Eigen::VectorXd values = lag.rowwise().sum();
        values.array() -= 1.0;
        s.q = to_canonical(Polynomial::lagrange(s.grid, values));
    }
    const Eigen::VectorXd res = eval_many(s.q, model);
    s.report.max_residual = res.cwiseAbs().maxCoeff();

    std::vector<Polynomial> grad;
    for (int i = 0; i < set->dim(); ++i) grad.push_back(differentiate(s.q, i));
    const double scale = std::max(1.0, s.q.coefficients().cwiseAbs().maxCoeff());
    std::size_t degenerate = 0;
    for (Eigen::Index r = 0; r < model.rows(); ++r) {
        const Eigen::VectorXd x = model.row(r).transpose();
        if (detail::gradient_norm(s.q, grad, {x.data(), static_cast<std::size_t>(x.size())}) < 1e-10 * scale)
            ++degenerate;
    }
    if (degenerate > 0)
        s.report.warnings.push_back(std::to_string(degenerate) + " input points have a vanishing gradient");
    return s;
}

struct ErrorBoundReport {
    double lebesgue = 0.0;
    double pinv_norm = 0.0;
    double factor = 0.0;
};

/// Lebesgue estimate, ||S^+||_inf of the anchor block and the factor 1 + Lambda ||S^+||_inf.
inline ErrorBoundReport error_bound_report(const Vandermonde& v, const GefpFactorization& f,
                                           std::size_t lebesgue_budget = 2000, std::uint64_t seed = 1) {
    if (f.rank < 1) throw DomainError("error_bound_report: rank is zero");
    ErrorBoundReport r;
    r.lebesgue = lebesgue_estimate(*v.grid, lebesgue_budget, seed);
    const Eigen::MatrixXd pinv = pseudo_inverse(anchor_block(v, f));
    r.pinv_norm = pinv.cwiseAbs().rowwise().sum().maxCoeff();
    r.factor = 1.0 + r.lebesgue * r.pinv_norm;
    return r;
}

}  // namespace gpls
