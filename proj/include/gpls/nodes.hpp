#pragma once

// Unisolvent node grids P_A built from per-dimension generating points, together
// with the Newton/Lagrange basis machinery those grids induce.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gpls/error.hpp"
#include "gpls/mindex.hpp"
#include "gpls/parallel.hpp"

namespace gpls {

/// Chebyshev-Lobatto points cos(k pi / n), k = 0..n. Evaluated as sin(pi (n - 2k) / (2n))
/// so that the set is exactly symmetric and contains exact 0 and +-1. Cheb_0 = {0}.
inline std::vector<double> chebyshev_lobatto(int n) {
    if (n < 0) throw DomainError("chebyshev_lobatto: degree must be >= 0");
    if (n == 0) return {0.0};
    std::vector<double> pts(n + 1);
    for (int k = 0; k <= n; ++k) {
        const int num = n - 2 * k;
        if (num == 0)
            pts[k] = 0.0;
        else if (num == n)
            pts[k] = 1.0;
        else if (num == -n)
            pts[k] = -1.0;
        else
            pts[k] = std::sin(std::numbers::pi * num / (2.0 * n));
    }
    return pts;
}

/// Leja ordering: p_0 of maximal modulus, then greedily the remaining point that maximizes
/// the product of distances to the points already chosen. Ties (relative 1e-12) go to the
/// larger point value.
inline std::vector<double> leja_order(std::span<const double> points) {
    std::vector<double> rest(points.begin(), points.end());
    {
        std::vector<double> sorted = rest;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw DomainError("leja_order: duplicate points");
    }
    std::vector<double> out;
    out.reserve(rest.size());
    auto better = [](double score, double value, double best_score, double best_value) {
        const double tol = 1e-12 * std::max(std::abs(score), std::abs(best_score));
        if (score > best_score + tol) return true;
        if (score < best_score - tol) return false;
        return value > best_value;
    };
    while (!rest.empty()) {
        std::size_t best = 0;
        double best_score = -1.0;
        for (std::size_t k = 0; k < rest.size(); ++k) {
            double score;
            if (out.empty()) {
                score = std::abs(rest[k]);
            } else {
                score = 1.0;
                for (double q : out) score *= std::abs(rest[k] - q);
            }
            if (best_score < 0.0 || better(score, rest[k], best_score, rest[best])) {
                best = k;
                best_score = score;
            }
        }
        out.push_back(rest[best]);
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return out;
}

enum class GridScheme {
    custom,          ///< caller-supplied distinct generating points
    leja_chebyshev   ///< Leja-ordered Chebyshev-Lobatto points in every dimension
};

namespace detail {

/// 1D Newton data for one generating tuple p_0..p_n:
///   values(j, k)   = n_k(p_j) with n_k(t) = prod_{i<k} (t - p_i)   (lower triangular)
///   inverse        = values^{-1}
///   monomial(k, j) = coefficient of t^j in n_k(t)
///   newton(k, j)   = coefficient of n_j in t^k
struct Newton1D {
    std::vector<double> nodes;
    Eigen::MatrixXd values;
    Eigen::MatrixXd inverse;
    Eigen::MatrixXd monomial;
    Eigen::MatrixXd newton;

    explicit Newton1D(std::vector<double> pts) : nodes(std::move(pts)) {
        const int n = static_cast<int>(nodes.size());
        values = Eigen::MatrixXd::Zero(n, n);
        for (int j = 0; j < n; ++j) {
            double prod = 1.0;
            for (int k = 0; k <= j; ++k) {
                values(j, k) = prod;
                prod *= nodes[j] - nodes[k];
            }
        }
        inverse = values.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
        monomial = Eigen::MatrixXd::Zero(n, n);
        monomial(0, 0) = 1.0;
        for (int k = 1; k < n; ++k) {
            // n_k(t) = (t - p_{k-1}) n_{k-1}(t)
            for (int j = 0; j < k; ++j) {
                monomial(k, j + 1) += monomial(k - 1, j);
                monomial(k, j) -= nodes[k - 1] * monomial(k - 1, j);
            }
        }
        newton = monomial.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
    }

    /// Fills out[k] = n_k(t) for k = 0..size-1.
    void basis(double t, double* out) const {
        double prod = 1.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            out[k] = prod;
            prod *= t - nodes[k];
        }
    }
};

}  // namespace detail

/// Unisolvent nodes P_A for a downward-closed A with generating points P_1..P_m.
/// Immutable after construction.
class UnisolventGrid {
public:
    UnisolventGrid(std::shared_ptr<const MultiIndexSet> set, std::vector<std::vector<double>> generating_points,
                   GridScheme scheme)
        : set_(std::move(set)), scheme_(scheme) {
        if (!set_ || set_->empty()) throw DomainError("grid: empty multi-index set");
        const int m = set_->dim();
        if (static_cast<int>(generating_points.size()) != m)
            throw DomainError("grid: need one generating tuple per dimension");
        for (int i = 0; i < m; ++i) {
            auto& pts = generating_points[i];
            const std::size_t need = static_cast<std::size_t>(set_->max_degrees()[i]) + 1;
            if (pts.size() != need)
                throw DomainError("grid: generating tuple " + std::to_string(i) + " has length " +
                                  std::to_string(pts.size()) + ", expected " + std::to_string(need));
            std::set<double> uniq(pts.begin(), pts.end());
            if (uniq.size() != pts.size())
                throw DomainError("grid: duplicate generating points in dimension " + std::to_string(i));
            for (double p : pts)
                if (!(std::abs(p) <= 1.0))
                    throw DomainError("grid: generating points must lie in [-1, 1]");
            newton_.emplace_back(pts);
        }
        const std::size_t count = set_->size();
        nodes_.resize(static_cast<Eigen::Index>(count), m);
        for (std::size_t k = 0; k < count; ++k) {
            auto alpha = (*set_)[k];
            for (int i = 0; i < m; ++i) nodes_(static_cast<Eigen::Index>(k), i) = newton_[i].nodes[alpha[i]];
        }
        build_lagrange_transform();
    }

    const MultiIndexSet& index_set() const { return *set_; }
    std::shared_ptr<const MultiIndexSet> index_set_ptr() const { return set_; }
    GridScheme scheme() const { return scheme_; }
    int dim() const { return set_->dim(); }
    std::size_t size() const { return set_->size(); }

    std::vector<std::vector<double>> generating_points() const {
        std::vector<std::vector<double>> out;
        for (const auto& d : newton_) out.push_back(d.nodes);
        return out;
    }
    const detail::Newton1D& newton1d(int dim) const { return newton_[dim]; }

    /// Node p_alpha, one row per alpha in lex order.
    const Eigen::MatrixXd& nodes() const { return nodes_; }

    /// Sparse |A| x |A| matrix W with L_alpha = sum_gamma W(gamma, alpha) N_gamma. It is the
    /// inverse of the Newton-on-grid matrix N_alpha(p_beta), obtained as the restriction of the
    /// Kronecker product of 1D inverses (exact for downward-closed A since both are triangular
    /// with respect to the component-wise order).
    const Eigen::SparseMatrix<double>& lagrange_from_newton() const { return lagrange_in_newton_; }

    /// N_alpha(x) for all alpha.
    Eigen::VectorXd newton_basis(std::span<const double> x) const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
        std::vector<double> table;
        fill_factor_table(x, table);
        write_products(table, out.data(), 1);
        return out;
    }

    /// Rows N_alpha(p_i) for a batch of points (one point per row).
    Eigen::MatrixXd newton_matrix(const Eigen::MatrixXd& points) const {
        check_dim(points);
        const Eigen::Index rows = points.rows();
        Eigen::MatrixXd out(rows, static_cast<Eigen::Index>(size()));
        parallel_for(static_cast<std::size_t>(rows), [&](std::size_t r) {
            std::vector<double> x(dim());
            for (int i = 0; i < dim(); ++i) x[i] = points(static_cast<Eigen::Index>(r), i);
            std::vector<double> table;
            fill_factor_table(x, table);
            write_products(table, out.data() + r, rows);
        });
        return out;
    }

    /// Lagrange basis L_alpha(x) evaluated through the Newton basis.
    Eigen::VectorXd lagrange_basis(std::span<const double> x) const {
        Eigen::RowVectorXd n = newton_basis(x).transpose();
        return (n * lagrange_in_newton_).transpose();
    }

    /// Rows L_alpha(p_i) for a batch of points.
    Eigen::MatrixXd lagrange_matrix(const Eigen::MatrixXd& points) const {
        return newton_matrix(points) * lagrange_in_newton_;
    }

    /// Newton coefficients of the interpolant of node values.
    Eigen::VectorXd newton_from_values(const Eigen::VectorXd& values) const { return lagrange_in_newton_ * values; }

    /// Node values of a polynomial given by Newton coefficients.
    Eigen::VectorXd values_from_newton(const Eigen::VectorXd& coeffs) const {
        const std::size_t count = size();
        const int m = dim();
        Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count));
        std::vector<int> gamma(m);
        for (std::size_t b = 0; b < count; ++b) {
            auto beta = (*set_)[b];
            // sum over gamma <= beta (component-wise); all such gamma are in A
            double acc = 0.0;
            for_each_dominated(beta, gamma, [&](std::span<const int> g) {
                double w = 1.0;
                for (int i = 0; i < m; ++i) w *= newton_[i].values(beta[i], g[i]);
                acc += w * coeffs(static_cast<Eigen::Index>(*set_->find(g)));
            });
            out(static_cast<Eigen::Index>(b)) = acc;
        }
        return out;
    }

    /// Visits every gamma with gamma_i <= bound_i, first coordinate fastest.
    template <typename Fn>
    static void for_each_dominated(std::span<const int> bound, std::vector<int>& scratch, Fn&& fn) {
        const std::size_t m = bound.size();
        std::fill(scratch.begin(), scratch.end(), 0);
        while (true) {
            fn(std::span<const int>(scratch.data(), m));
            std::size_t i = 0;
            while (i < m) {
                if (scratch[i] < bound[i]) {
                    ++scratch[i];
                    break;
                }
                scratch[i] = 0;
                ++i;
            }
            if (i == m) return;
        }
    }

private:
    void check_dim(const Eigen::MatrixXd& points) const {
        if (points.cols() != dim())
            throw DomainError("point dimension " + std::to_string(points.cols()) + " does not match grid dimension " +
                              std::to_string(dim()));
    }

    // table layout: offsets_[i] + k holds n_k(x_i)
    void fill_factor_table(std::span<const double> x, std::vector<double>& table) const {
        if (static_cast<int>(x.size()) != dim()) throw DomainError("point dimension does not match grid dimension");
        table.resize(table_size_);
        for (int i = 0; i < dim(); ++i) newton_[i].basis(x[i], table.data() + offsets_[i]);
    }

    void write_products(const std::vector<double>& table, double* out, Eigen::Index stride) const {
        const int m = dim();
        const std::size_t count = size();
        for (std::size_t k = 0; k < count; ++k) {
            auto alpha = (*set_)[k];
            double prod = table[offsets_[0] + alpha[0]];
            for (int i = 1; i < m; ++i) prod *= table[offsets_[i] + alpha[i]];
            out[static_cast<Eigen::Index>(k) * stride] = prod;
        }
    }

    void build_lagrange_transform() {
        const int m = dim();
        offsets_.assign(m, 0);
        table_size_ = 0;
        for (int i = 0; i < m; ++i) {
            offsets_[i] = table_size_;
            table_size_ += newton_[i].nodes.size();
        }
        const std::size_t count = size();
        std::vector<Eigen::Triplet<double>> trip;
        std::vector<int> alpha(m);
        for (std::size_t g = 0; g < count; ++g) {
            auto gamma = (*set_)[g];
            for_each_dominated(gamma, alpha, [&](std::span<const int> a) {
                double w = 1.0;
                for (int i = 0; i < m; ++i) w *= newton_[i].inverse(gamma[i], a[i]);
                if (w != 0.0)
                    trip.emplace_back(static_cast<int>(g), static_cast<int>(*set_->find(a)), w);
            });
        }
        lagrange_in_newton_.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(count));
        lagrange_in_newton_.setFromTriplets(trip.begin(), trip.end());
        lagrange_in_newton_.makeCompressed();
    }

    std::shared_ptr<const MultiIndexSet> set_;
    GridScheme scheme_;
    std::vector<detail::Newton1D> newton_;
    Eigen::MatrixXd nodes_;
    std::vector<std::size_t> offsets_;
    std::size_t table_size_ = 0;
    Eigen::SparseMatrix<double> lagrange_in_newton_;
};

/// Leja-ordered Chebyshev-Lobatto grid for A.
inline std::shared_ptr<const UnisolventGrid> build_grid(std::shared_ptr<const MultiIndexSet> set) {
    if (!set) throw DomainError("build_grid: null index set");
    std::vector<std::vector<double>> gp;
    for (int i = 0; i < set->dim(); ++i) gp.push_back(leja_order(chebyshev_lobatto(set->max_degrees()[i])));
    return std::make_shared<const UnisolventGrid>(std::move(set), std::move(gp), GridScheme::leja_chebyshev);
}

inline std::shared_ptr<const UnisolventGrid> build_grid(const MultiIndexSet& set) {
    return build_grid(std::make_shared<const MultiIndexSet>(set));
}

/// Grid from caller-supplied generating tuples (first essential assumption only).
inline std::shared_ptr<const UnisolventGrid> build_grid(std::shared_ptr<const MultiIndexSet> set,
                                                        std::vector<std::vector<double>> generating_points) {
    if (!set) throw DomainError("build_grid: null index set");
    return std::make_shared<const UnisolventGrid>(std::move(set), std::move(generating_points), GridScheme::custom);
}

namespace detail {

inline double radical_inverse(std::uint64_t i, unsigned base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

inline unsigned nth_prime(int k) {
    static constexpr unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    if (k < 16) return primes[k];
    unsigned c = 59;
    int found = 16;
    while (true) {
        bool prime = true;
        for (unsigned d = 2; d * d <= c; ++d)
            if (c % d == 0) {
                prime = false;
                break;
            }
        if (prime) {
            if (found == k) return c;
            ++found;
        }
        c += 2;
    }
}

}  // namespace detail

/// Halton points in [-1,1]^m with a seeded Cranley-Patterson rotation. The first b points
/// of a budget B > b request coincide with the b-point request for the same seed.
inline Eigen::MatrixXd quasi_random_points(int m, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> shift(m);
    for (auto& s : shift) s = uni(rng);
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(count), m);
    for (std::size_t k = 0; k < count; ++k)
        for (int i = 0; i < m; ++i) {
            double u = detail::radical_inverse(k + 1, detail::nth_prime(i)) + shift[i];
            u -= std::floor(u);
            pts(static_cast<Eigen::Index>(k), i) = 2.0 * u - 1.0;
        }
    return pts;
}

/// Empirical lower bound on the Lebesgue constant: max over the grid nodes and
/// `sample_budget` quasi-random points of sum_alpha |L_alpha(x)|.
inline double lebesgue_estimate(const UnisolventGrid& grid, std::size_t sample_budget, std::uint64_t seed) {
    if (sample_budget < 1) throw DomainError("lebesgue_estimate: sample budget must be >= 1");
    double best = grid.lagrange_matrix(grid.nodes()).cwiseAbs().rowwise().sum().maxCoeff();
    const Eigen::MatrixXd samples = quasi_random_points(grid.dim(), sample_budget, seed);
    constexpr Eigen::Index batch = 1024;
    for (Eigen::Index lo = 0; lo < samples.rows(); lo += batch) {
        const Eigen::Index len = std::min(batch, samples.rows() - lo);
        Eigen::MatrixXd block = samples.middleRows(lo, len);
        best = std::max(best, grid.lagrange_matrix(block).cwiseAbs().rowwise().sum().maxCoeff());
    }
    return best;
}

}  // namespace gpls
