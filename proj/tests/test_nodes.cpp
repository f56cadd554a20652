#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "gpls/nodes.hpp"
#include "gpls/poly.hpp"

using gpls::LpDegree;

namespace {

auto make_set(int m, int n, LpDegree p) { return std::make_shared<const gpls::MultiIndexSet>(gpls::build_index_set(m, n, p)); }

// Leja conditions re-checked over every permutation: the chosen order must be a maximiser
// at every step, so no permutation may beat it at the first step where they differ.
bool satisfies_leja(const std::vector<double>& order) {
    const double widest = std::ranges::max(order, {}, [](double v) { return std::abs(v); });
    if (std::abs(order[0]) < std::abs(widest)) return false;
    std::vector<double> perm = order;
    std::sort(perm.begin(), perm.end());
    do {
        for (std::size_t j = 0; j < perm.size(); ++j) {
            if (perm[j] == order[j]) continue;
            auto score = [&](const std::vector<double>& v) {
                if (j == 0) return std::abs(v[0]);
                double s = 1.0;
                for (std::size_t i = 0; i < j; ++i) s *= std::abs(v[j] - v[i]);
                return s;
            };
            // same prefix up to j, so the scores are comparable
            if (score(perm) > score(order) * (1 + 1e-12)) return false;
            break;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return true;
}

}  // namespace

TEST(Chebyshev, SmallSets) {
    EXPECT_EQ(gpls::chebyshev_lobatto(0), std::vector<double>{0.0});
    const auto c1 = gpls::chebyshev_lobatto(1);
    ASSERT_EQ(c1.size(), 2u);
    EXPECT_DOUBLE_EQ(c1[0], 1.0);
    EXPECT_DOUBLE_EQ(c1[1], -1.0);
    const auto c2 = gpls::chebyshev_lobatto(2);
    ASSERT_EQ(c2.size(), 3u);
    EXPECT_NEAR(c2[1], 0.0, 1e-16);
    const auto c4 = gpls::chebyshev_lobatto(4);
    EXPECT_TRUE(std::ranges::any_of(c4, [](double v) { return std::abs(v - 0.7071067811865476) < 1e-15; }));
}

TEST(Chebyshev, MatchesCosineFormula) {
    for (int n = 1; n <= 20; ++n) {
        const auto c = gpls::chebyshev_lobatto(n);
        for (int k = 0; k <= n; ++k) EXPECT_NEAR(c[k], std::cos(k * std::numbers::pi / n), 1e-15);
    }
}

TEST(Leja, Examples) {
    const std::vector<double> three{1.0, 0.0, -1.0};
    EXPECT_EQ(gpls::leja_order(three), (std::vector<double>{1.0, -1.0, 0.0}));
    const std::vector<double> single{0.5};
    EXPECT_EQ(gpls::leja_order(single), single);
    for (int n = 1; n <= 16; ++n) {
        const auto c = gpls::chebyshev_lobatto(n);
        const auto l = gpls::leja_order(c);
        EXPECT_EQ(l[0], 1.0);
        EXPECT_EQ(l[1], -1.0);
    }
}

TEST(Leja, RejectsDuplicates) {
    const std::vector<double> dup{0.5, 0.5};
    EXPECT_THROW(gpls::leja_order(dup), gpls::DomainError);
}

TEST(Leja, BruteForceOverPermutations) {
    for (int n = 1; n <= 6; ++n) {
        const auto c = gpls::chebyshev_lobatto(n);
        EXPECT_TRUE(satisfies_leja(gpls::leja_order(c))) << "n=" << n;
    }
    const std::vector<double> odd{0.3, -0.9, 0.05, 0.77, -0.2};
    EXPECT_TRUE(satisfies_leja(gpls::leja_order(odd)));
}

TEST(Grid, OneDimensional) {
    const auto g = gpls::build_grid(make_set(1, 3, LpDegree::one()));
    const auto expect = gpls::leja_order(gpls::chebyshev_lobatto(3));
    ASSERT_EQ(g->size(), 4u);
    for (int k = 0; k < 4; ++k) EXPECT_EQ(g->nodes()(k, 0), expect[k]);
}

TEST(Grid, SquareCorners) {
    const auto g = gpls::build_grid(make_set(2, 1, LpDegree::infinity()));
    ASSERT_EQ(g->size(), 4u);
    Eigen::MatrixXd expect(4, 2);
    expect << 1, 1, -1, 1, 1, -1, -1, -1;
    EXPECT_EQ(g->nodes(), expect);
}

TEST(Grid, EuclideanDegreeTwo) {
    const auto g = gpls::build_grid(make_set(3, 2, LpDegree::two()));
    ASSERT_EQ(g->size(), 11u);
    EXPECT_EQ(g->nodes().row(0), Eigen::RowVector3d(1, 1, 1));
}

TEST(Grid, NodesDistinctAndLagrangeIsIdentity) {
    for (auto p : {LpDegree::one(), LpDegree::two(), LpDegree::infinity()}) {
        const auto g = gpls::build_grid(make_set(3, 5, p));
        std::set<std::array<double, 3>> seen;
        for (Eigen::Index i = 0; i < g->nodes().rows(); ++i)
            seen.insert({g->nodes()(i, 0), g->nodes()(i, 1), g->nodes()(i, 2)});
        EXPECT_EQ(seen.size(), g->size());
        const Eigen::MatrixXd l = g->lagrange_matrix(g->nodes());
        EXPECT_LE((l - Eigen::MatrixXd::Identity(l.rows(), l.cols())).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Grid, CustomGeneratingPoints) {
    auto set = make_set(2, 2, LpDegree::one());
    const auto g = gpls::build_grid(set, {{0.1, 0.9, -0.4}, {0.0, -1.0, 0.5}});
    const Eigen::MatrixXd l = g->lagrange_matrix(g->nodes());
    EXPECT_LE((l - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(gpls::build_grid(set, {{0.1, 0.9}, {0.0, -1.0, 0.5}}), gpls::DomainError);
    EXPECT_THROW(gpls::build_grid(set, {{0.1, 0.1, 0.3}, {0.0, -1.0, 0.5}}), gpls::DomainError);
}

TEST(Lebesgue, LinearIsOne) {
    const auto g = gpls::build_grid(make_set(1, 1, LpDegree::one()));
    EXPECT_NEAR(gpls::lebesgue_estimate(*g, 500, 1), 1.0, 1e-14);
}

TEST(Lebesgue, MonotoneInBudget) {
    const auto g = gpls::build_grid(make_set(3, 4, LpDegree::two()));
    const double a = gpls::lebesgue_estimate(*g, 200, 3);
    const double b = gpls::lebesgue_estimate(*g, 2000, 3);
    EXPECT_GE(b, a);
    EXPECT_EQ(gpls::lebesgue_estimate(*g, 200, 3), a);
}

TEST(Lebesgue, ChebyshevAsymptotics) {
    constexpr double gamma = 0.5772156649015329;
    for (int n = 4; n <= 32; ++n) {
        const auto g = gpls::build_grid(make_set(1, n, LpDegree::one()));
        const double est = gpls::lebesgue_estimate(*g, 20000, 1);
        const double formula = 2.0 / std::numbers::pi * (std::log(n + 1.0) + gamma + std::log(8.0 / std::numbers::pi));
        EXPECT_NEAR(est / formula, 1.0, 0.15) << "n=" << n;
    }
}
