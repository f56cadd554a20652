#pragma once

// Multivariate polynomials over a downward-closed index set, in the Newton basis of a
// unisolvent grid, the Lagrange basis of that grid, or the canonical monomial basis.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gpls/error.hpp"
#include "gpls/mindex.hpp"
#include "gpls/nodes.hpp"

namespace gpls {

enum class Basis { newton, lagrange, canonical };

inline std::string to_string(Basis b) {
    switch (b) {
        case Basis::newton: return "newton";
        case Basis::lagrange: return "lagrange";
        case Basis::canonical: return "canonical";
    }
    return "?";
}

inline Basis parse_basis(const std::string& s) {
    if (s == "newton") return Basis::newton;
    if (s == "lagrange") return Basis::lagrange;
    if (s == "canonical") return Basis::canonical;
    throw FormatError("unknown polynomial basis '" + s + "'");
}

/// Coefficients aligned with the lex order of the index set. Newton and Lagrange
/// polynomials carry their grid; canonical ones do not. Immutable.
///
/// Canonical polynomials obtained by differentiation remember the undifferentiated
/// coefficients and the accumulated derivative order, so every partial is produced from the
/// original coefficients with a single rounding. Mixed partials therefore agree bit-for-bit
/// irrespective of the order in which the derivatives were taken.
class Polynomial {
public:
    static Polynomial canonical(std::shared_ptr<const MultiIndexSet> set, Eigen::VectorXd coeffs) {
        if (!set) throw DomainError("polynomial: null index set");
        check_size(*set, coeffs);
        Polynomial p;
        p.set_ = std::move(set);
        p.basis_ = Basis::canonical;
        p.primitive_ = std::make_shared<const Eigen::VectorXd>(coeffs);
        p.order_.assign(p.set_->dim(), 0);
        p.coeffs_ = std::move(coeffs);
        return p;
    }

    static Polynomial newton(std::shared_ptr<const UnisolventGrid> grid, Eigen::VectorXd coeffs) {
        return grid_based(std::move(grid), std::move(coeffs), Basis::newton);
    }

    /// Coefficients are the values at the grid nodes.
    static Polynomial lagrange(std::shared_ptr<const UnisolventGrid> grid, Eigen::VectorXd coeffs) {
        return grid_based(std::move(grid), std::move(coeffs), Basis::lagrange);
    }

    Basis basis() const { return basis_; }
    const MultiIndexSet& index_set() const { return *set_; }
    std::shared_ptr<const MultiIndexSet> index_set_ptr() const { return set_; }
    std::shared_ptr<const UnisolventGrid> grid() const { return grid_; }
    const Eigen::VectorXd& coefficients() const { return coeffs_; }
    int dim() const { return set_->dim(); }

    /// Accumulated derivative order (canonical polynomials only).
    const std::vector<int>& derivative_order() const { return order_; }

    double operator()(std::span<const double> x) const;

private:
    friend Polynomial partial(const Polynomial&, std::span<const int>);

    static void check_size(const MultiIndexSet& set, const Eigen::VectorXd& c) {
        if (static_cast<std::size_t>(c.size()) != set.size())
            throw DomainError("polynomial: " + std::to_string(c.size()) + " coefficients for an index set of size " +
                              std::to_string(set.size()));
    }

    static Polynomial grid_based(std::shared_ptr<const UnisolventGrid> grid, Eigen::VectorXd coeffs, Basis b) {
        if (!grid) throw DomainError("polynomial: null grid");
        check_size(grid->index_set(), coeffs);
        Polynomial p;
        p.set_ = grid->index_set_ptr();
        p.grid_ = std::move(grid);
        p.basis_ = b;
        p.coeffs_ = std::move(coeffs);
        return p;
    }

    std::shared_ptr<const MultiIndexSet> set_;
    std::shared_ptr<const UnisolventGrid> grid_;
    Basis basis_ = Basis::canonical;
    Eigen::VectorXd coeffs_;
    std::shared_ptr<const Eigen::VectorXd> primitive_;
    std::vector<int> order_;
};

namespace detail {

/// Nested Horner evaluation of sum_alpha c_alpha prod_i prod_{j<alpha_i} (x_i - node_i[j]).
/// In lex order the indices sharing all coordinates above `coord` form a contiguous range,
/// and within it the runs of equal alpha_coord appear for 0, 1, ..., K; each run is reduced
/// recursively and the run values are combined by 1D Horner in x_coord.
inline double nested_horner(const MultiIndexSet& set, const double* c, std::span<const double> x,
                            std::span<const double* const> nodes, int coord, std::size_t lo, std::size_t hi) {
    if (coord < 0) return c[lo];
    const double xc = x[coord];
    const double* pc = nodes[coord];
    std::size_t end = hi;
    double acc = 0.0;
    bool first = true;
    while (end > lo) {
        const int k = set[end - 1][coord];
        std::size_t start = end - 1;
        while (start > lo && set[start - 1][coord] == k) --start;
        const double v = nested_horner(set, c, x, nodes, coord - 1, start, end);
        acc = first ? v : v + (xc - (pc ? pc[k] : 0.0)) * acc;
        first = false;
        end = start;
    }
    return acc;
}

inline double eval_raw(const MultiIndexSet& set, const Eigen::VectorXd& c, std::span<const double> x,
                       const UnisolventGrid* grid) {
    const int m = set.dim();
    if (static_cast<int>(x.size()) != m)
        throw DomainError("eval: point has dimension " + std::to_string(x.size()) + ", polynomial has " +
                          std::to_string(m));
    std::vector<const double*> nodes(m, nullptr);
    if (grid)
        for (int i = 0; i < m; ++i) nodes[i] = grid->newton1d(i).nodes.data();
    return nested_horner(set, c.data(), x, nodes, m - 1, 0, set.size());
}

inline double falling(int a, int k) {
    double r = 1.0;
    for (int j = 0; j < k; ++j) r *= static_cast<double>(a - j);
    return r;
}

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return std::round(r);
}

}  // namespace detail

/// Value at x. Newton and canonical forms use nested Horner; Lagrange coefficients are
/// converted to Newton coefficients first.
inline double eval(const Polynomial& p, std::span<const double> x) {
    switch (p.basis()) {
        case Basis::canonical: return detail::eval_raw(p.index_set(), p.coefficients(), x, nullptr);
        case Basis::newton: return detail::eval_raw(p.index_set(), p.coefficients(), x, p.grid().get());
        case Basis::lagrange: {
            const Eigen::VectorXd nc = p.grid()->newton_from_values(p.coefficients());
            return detail::eval_raw(p.index_set(), nc, x, p.grid().get());
        }
    }
    return 0.0;
}

inline double Polynomial::operator()(std::span<const double> x) const { return eval(*this, x); }

/// Values at many points (one per row).
inline Eigen::VectorXd eval_many(const Polynomial& p, const Eigen::MatrixXd& points) {
    if (points.cols() != p.dim()) throw DomainError("eval_many: point dimension mismatch");
    Polynomial q = p;
    if (p.basis() == Basis::lagrange)
        q = Polynomial::newton(p.grid(), p.grid()->newton_from_values(p.coefficients()));
    Eigen::VectorXd out(points.rows());
    parallel_for(static_cast<std::size_t>(points.rows()), [&](std::size_t r) {
        std::vector<double> x(p.dim());
        for (int i = 0; i < p.dim(); ++i) x[i] = points(static_cast<Eigen::Index>(r), i);
        out(static_cast<Eigen::Index>(r)) = eval(q, x);
    });
    return out;
}

/// Unique interpolant in Newton form of values given at the grid nodes (lex order).
inline Polynomial interpolate(std::shared_ptr<const UnisolventGrid> grid, const Eigen::VectorXd& values) {
    if (!grid) throw DomainError("interpolate: null grid");
    if (static_cast<std::size_t>(values.size()) != grid->size())
        throw DomainError("interpolate: got " + std::to_string(values.size()) + " values for " +
                          std::to_string(grid->size()) + " nodes");
    return Polynomial::newton(grid, grid->newton_from_values(values));
}

/// Newton form on the polynomial's own grid (or on `grid` for canonical input).
inline Polynomial to_newton(const Polynomial& p, std::shared_ptr<const UnisolventGrid> grid = nullptr) {
    switch (p.basis()) {
        case Basis::newton: return p;
        case Basis::lagrange: return Polynomial::newton(p.grid(), p.grid()->newton_from_values(p.coefficients()));
        case Basis::canonical: {
            if (!grid) throw DomainError("to_newton: canonical input needs a target grid");
            if (!(grid->index_set() == p.index_set()))
                throw DomainError("to_newton: grid index set differs from polynomial index set");
            const auto& set = p.index_set();
            const int m = set.dim();
            Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set.size()));
            std::vector<int> gamma(m);
            for (std::size_t b = 0; b < set.size(); ++b) {
                const double cb = p.coefficients()(static_cast<Eigen::Index>(b));
                if (cb == 0.0) continue;
                auto beta = set[b];
                UnisolventGrid::for_each_dominated(beta, gamma, [&](std::span<const int> g) {
                    double w = cb;
                    for (int i = 0; i < m; ++i) w *= grid->newton1d(i).newton(beta[i], g[i]);
                    d(static_cast<Eigen::Index>(*set.find(g))) += w;
                });
            }
            return Polynomial::newton(std::move(grid), std::move(d));
        }
    }
    return p;
}

inline Polynomial to_lagrange(const Polynomial& p, std::shared_ptr<const UnisolventGrid> grid = nullptr) {
    if (p.basis() == Basis::lagrange) return p;
    const Polynomial n = to_newton(p, std::move(grid));
    return Polynomial::lagrange(n.grid(), n.grid()->values_from_newton(n.coefficients()));
}

/// Same function in the monomial basis, coefficients in lex order of the index set.
inline Polynomial to_canonical(const Polynomial& p) {
    if (p.basis() == Basis::canonical) return p;
    const Polynomial n = to_newton(p);
    const auto& set = n.index_set();
    const auto& grid = *n.grid();
    const int m = set.dim();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set.size()));
    std::vector<int> beta(m);
    for (std::size_t g = 0; g < set.size(); ++g) {
        const double dg = n.coefficients()(static_cast<Eigen::Index>(g));
        if (dg == 0.0) continue;
        auto gamma = set[g];
        UnisolventGrid::for_each_dominated(gamma, beta, [&](std::span<const int> b) {
            double w = dg;
            for (int i = 0; i < m; ++i) w *= grid.newton1d(i).monomial(gamma[i], b[i]);
            if (w != 0.0) c(static_cast<Eigen::Index>(*set.find(b))) += w;
        });
    }
    return Polynomial::canonical(n.index_set_ptr(), std::move(c));
}

/// Formal partial derivative d^{orders} on the canonical form. The result lives on the same
/// index set; coefficients of indices that fall out of reach are zero.
inline Polynomial partial(const Polynomial& p, std::span<const int> orders) {
    const Polynomial c = to_canonical(p);
    const auto& set = c.index_set();
    const int m = set.dim();
    if (static_cast<int>(orders.size()) != m) throw DomainError("partial: order vector has wrong dimension");
    std::vector<int> total(m);
    for (int i = 0; i < m; ++i) {
        if (orders[i] < 0) throw DomainError("partial: negative derivative order");
        total[i] = c.order_[i] + orders[i];
    }
    const Eigen::VectorXd& prim = *c.primitive_;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set.size()));
    std::vector<int> beta(m);
    for (std::size_t a = 0; a < set.size(); ++a) {
        auto alpha = set[a];
        bool reach = true;
        double factor = 1.0;  // exact: a product of small integers
        for (int i = 0; i < m; ++i) {
            if (alpha[i] < total[i]) {
                reach = false;
                break;
            }
            beta[i] = alpha[i] - total[i];
            factor *= detail::falling(alpha[i], total[i]);
        }
        if (!reach) continue;
        out(static_cast<Eigen::Index>(*set.find(beta))) = prim(static_cast<Eigen::Index>(a)) * factor;
    }
    Polynomial r;
    r.set_ = c.set_;
    r.basis_ = Basis::canonical;
    r.coeffs_ = std::move(out);
    r.primitive_ = c.primitive_;
    r.order_ = std::move(total);
    return r;
}

inline Polynomial differentiate(const Polynomial& p, int axis) {
    if (axis < 0 || axis >= p.dim()) throw DomainError("differentiate: axis out of range");
    std::vector<int> orders(p.dim(), 0);
    orders[axis] = 1;
    return partial(p, orders);
}

/// Canonical coefficients of x -> p(scale * x + translation).
inline Polynomial compose_affine(const Polynomial& p, double scale, std::span<const double> translation) {
    const Polynomial c = to_canonical(p);
    const auto& set = c.index_set();
    const int m = set.dim();
    if (static_cast<int>(translation.size()) != m) throw DomainError("compose_affine: translation has wrong dimension");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set.size()));
    std::vector<int> beta(m);
    for (std::size_t a = 0; a < set.size(); ++a) {
        const double ca = c.coefficients()(static_cast<Eigen::Index>(a));
        if (ca == 0.0) continue;
        auto alpha = set[a];
        UnisolventGrid::for_each_dominated(alpha, beta, [&](std::span<const int> b) {
            double w = ca;
            for (int i = 0; i < m; ++i)
                w *= detail::binomial(alpha[i], b[i]) * std::pow(scale, b[i]) *
                     std::pow(translation[i], alpha[i] - b[i]);
            out(static_cast<Eigen::Index>(*set.find(b))) += w;
        });
    }
    return Polynomial::canonical(c.index_set_ptr(), std::move(out));
}

}  // namespace gpls
