#include <gtest/gtest.h>

#include <array>
#include <limits>
#include <random>

#include "gpls/nodes.hpp"
#include "gpls/poly.hpp"
#include "gpls/surfaces.hpp"

using gpls::LpDegree;
using gpls::Polynomial;

namespace {

auto make_set(int m, int n, LpDegree p) { return std::make_shared<const gpls::MultiIndexSet>(gpls::build_index_set(m, n, p)); }

Eigen::MatrixXd uniform_points(Eigen::Index count, int m, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd p(count, m);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
    return p;
}

Polynomial unit_sphere() {
    gpls::Monomials x = gpls::Monomials::var(0), y = gpls::Monomials::var(1), z = gpls::Monomials::var(2);
    return (x * x + y * y + z * z - 1.0).on(make_set(3, 2, LpDegree::two()));
}

double at(const Polynomial& p, double x, double y, double z) {
    const double v[3] = {x, y, z};
    return gpls::eval(p, v);
}

}  // namespace

TEST(Eval, Examples) {
    auto set = make_set(3, 3, LpDegree::two());
    auto grid = gpls::build_grid(set);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set->size()));
    c(0) = 1.0;
    const Polynomial n0 = Polynomial::newton(grid, c);
    EXPECT_EQ(at(n0, 0.3, -0.7, 0.2), 1.0);
    EXPECT_EQ(at(unit_sphere(), 1.0, 0.0, 0.0), 0.0);
    const Polynomial x1 = gpls::interpolate(grid, grid->nodes().col(0));
    EXPECT_NEAR(at(x1, 0.3, 0.1, -0.4), 0.3, 1e-14);
    const double bad[2] = {0.1, 0.2};
    EXPECT_THROW((void)gpls::eval(x1, bad), gpls::DomainError);
}

TEST(Interpolate, ZeroAndLengthMismatch) {
    auto grid = gpls::build_grid(make_set(3, 4, LpDegree::two()));
    const Polynomial z = gpls::interpolate(grid, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid->size())));
    EXPECT_EQ(z.coefficients().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(gpls::interpolate(grid, Eigen::VectorXd::Zero(3)), gpls::DomainError);
}

TEST(Interpolate, ReproducesNodeValues) {
    auto grid = gpls::build_grid(make_set(3, 7, LpDegree::two()));
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    Eigen::VectorXd values(static_cast<Eigen::Index>(grid->size()));
    for (auto& v : values) v = g(rng);
    const Polynomial p = gpls::interpolate(grid, values);
    const Eigen::VectorXd back = gpls::eval_many(p, grid->nodes());
    EXPECT_LE((back - values).cwiseAbs().maxCoeff(), 1e-12 * values.cwiseAbs().maxCoeff());
}

// Random Q in Pi_A sampled at the nodes and interpolated comes back unchanged. The canonical
// coefficients of the tensor space (p = inf) lose accuracy faster: the monomial basis of degree
// 9 per axis already costs ~3e-9, so that case stops at n = 8 and is checked by values above.
TEST(Interpolate, PolynomialReproduction) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto p : {LpDegree::one(), LpDegree::two(), LpDegree::infinity()})
        for (int n = 1; n <= (p.kind() == LpDegree::Kind::infinity ? 8 : 10); ++n) {
            auto set = make_set(3, n, p);
            auto grid = gpls::build_grid(set);
            Eigen::VectorXd c(static_cast<Eigen::Index>(set->size()));
            for (auto& v : c) v = u(rng);
            const Polynomial q = Polynomial::canonical(set, c);
            const Polynomial back = gpls::to_canonical(gpls::interpolate(grid, gpls::eval_many(q, grid->nodes())));
            EXPECT_LE((back.coefficients() - c).cwiseAbs().maxCoeff(), 1e-9 * c.cwiseAbs().maxCoeff())
                << "n=" << n << " p=" << p.to_string();
            const Eigen::MatrixXd x = uniform_points(100, 3, 17);
            const Eigen::VectorXd a = gpls::eval_many(q, x), b = gpls::eval_many(gpls::to_newton(q, grid), x);
            EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-11 * std::max(1.0, a.cwiseAbs().maxCoeff()));
        }
}

TEST(Interpolate, ValuesReproducedInTensorSpace) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int n : {9, 10}) {
        auto set = make_set(3, n, LpDegree::infinity());
        auto grid = gpls::build_grid(set);
        Eigen::VectorXd c(static_cast<Eigen::Index>(set->size()));
        for (auto& v : c) v = u(rng);
        const Polynomial q = Polynomial::canonical(set, c);
        const Polynomial back = gpls::interpolate(grid, gpls::eval_many(q, grid->nodes()));
        const Eigen::MatrixXd x = uniform_points(100, 3, 5);
        const Eigen::VectorXd a = gpls::eval_many(q, x);
        EXPECT_LE((gpls::eval_many(back, x) - a).cwiseAbs().maxCoeff(), 1e-11 * a.cwiseAbs().maxCoeff());
    }
}

// Runge is even, and the error alternates with the parity of n (odd -> even steps can
// lose a little); within each parity class it decreases strictly.
TEST(Interpolate, RungeConvergesWithDegree) {
    auto runge = [](const Eigen::MatrixXd& x) { return (1.0 / (1.0 + x.rowwise().squaredNorm().array())).matrix().eval(); };
    for (unsigned seed : {1u, 2u, 3u}) {
        const Eigen::MatrixXd test = uniform_points(1000, 3, seed);
        const Eigen::VectorXd truth = runge(test);
        std::array<double, 2> previous{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        double first = 0.0, last = 0.0;
        for (int n = 2; n <= 10; ++n) {
            auto grid = gpls::build_grid(make_set(3, n, LpDegree::two()));
            const Polynomial q = gpls::interpolate(grid, runge(grid->nodes()));
            const double err = (gpls::eval_many(q, test) - truth).cwiseAbs().maxCoeff();
            auto& prev = previous[static_cast<std::size_t>(n % 2)];
            EXPECT_LT(err, prev) << "seed " << seed << " n=" << n;
            prev = err;
            if (n == 2) first = err;
            last = err;
        }
        EXPECT_LT(last, 0.02 * first);
    }
}

TEST(Basis, LagrangeIsKroneckerAtNodes) {
    auto grid = gpls::build_grid(make_set(3, 6, LpDegree::two()));
    const Eigen::Index n = static_cast<Eigen::Index>(grid->size());
    for (Eigen::Index a = 0; a < n; a += 7) {
        const Polynomial l = Polynomial::lagrange(grid, Eigen::VectorXd::Unit(n, a));
        const Eigen::VectorXd v = gpls::eval_many(l, grid->nodes());
        EXPECT_LE((v - Eigen::VectorXd::Unit(n, a)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Basis, CanonicalRoundTrip) {
    auto set = make_set(3, 2, LpDegree::two());
    const Polynomial s = unit_sphere();
    const Polynomial back = gpls::to_canonical(gpls::to_newton(s, gpls::build_grid(set)));
    EXPECT_LE((back.coefficients() - s.coefficients()).cwiseAbs().maxCoeff(), 1e-12);

    auto grid = gpls::build_grid(make_set(3, 4, LpDegree::one()));
    Eigen::VectorXd one = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid->size()));
    one(0) = 1.0;
    const Polynomial c = gpls::to_canonical(Polynomial::newton(grid, one));
    EXPECT_EQ(c.coefficients(), one);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int n : {6, 9, 12}) {
        auto big = make_set(3, n, LpDegree::two());
        Eigen::VectorXd co(static_cast<Eigen::Index>(big->size()));
        for (auto& v : co) v = u(rng);
        const Polynomial q = Polynomial::canonical(big, co);
        const Polynomial r = gpls::to_canonical(gpls::to_newton(q, gpls::build_grid(big)));
        EXPECT_LE((r.coefficients() - co).cwiseAbs().maxCoeff(), 1e-10 * co.cwiseAbs().maxCoeff()) << n;
    }
}

TEST(Basis, ParseAndPrint) {
    for (auto b : {gpls::Basis::canonical, gpls::Basis::newton, gpls::Basis::lagrange})
        EXPECT_EQ(gpls::parse_basis(gpls::to_string(b)), b);
    EXPECT_THROW(gpls::parse_basis("chebyshev"), gpls::FormatError);
}

TEST(Differentiate, Examples) {
    const Polynomial dx = gpls::differentiate(unit_sphere(), 0);
    EXPECT_EQ(at(dx, 0.3, 0.9, -0.2), 0.6);
    EXPECT_EQ(at(dx, -1.0, 0.0, 0.5), -2.0);

    gpls::Monomials x = gpls::Monomials::var(0), y = gpls::Monomials::var(1);
    const Polynomial xy = (x * y).on(make_set(3, 2, LpDegree::one()));
    const Polynomial dxy = gpls::differentiate(gpls::differentiate(xy, 0), 1);
    EXPECT_EQ(at(dxy, 0.4, -0.1, 0.7), 1.0);
}

TEST(Differentiate, MixedPartialsCommuteExactly) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto set = make_set(3, 6, LpDegree::two());
    Eigen::VectorXd c(static_cast<Eigen::Index>(set->size()));
    for (auto& v : c) v = u(rng);
    const Polynomial q = Polynomial::canonical(set, c);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            EXPECT_EQ(gpls::differentiate(gpls::differentiate(q, i), j).coefficients(),
                      gpls::differentiate(gpls::differentiate(q, j), i).coefficients());
}

TEST(Differentiate, BiconcaveGradientAgainstFiniteDifferences) {
    const auto def = gpls::catalog_lookup("biconcave", {});
    const Polynomial& q = def.implicit;
    std::array<Polynomial, 3> grad{gpls::differentiate(q, 0), gpls::differentiate(q, 1), gpls::differentiate(q, 2)};
    const Eigen::MatrixXd pts = uniform_points(20, 3, 4) * 0.9;
    constexpr double h = 1e-5;
    for (Eigen::Index r = 0; r < pts.rows(); ++r) {
        const Eigen::Vector3d x = pts.row(r).transpose();
        Eigen::Vector3d exact, fd;
        for (int i = 0; i < 3; ++i) {
            exact(i) = gpls::eval(grad[static_cast<std::size_t>(i)], {x.data(), 3});
            Eigen::Vector3d xp = x, xm = x;
            xp(i) += h;
            xm(i) -= h;
            fd(i) = (gpls::eval(q, {xp.data(), 3}) - gpls::eval(q, {xm.data(), 3})) / (2 * h);
        }
        EXPECT_LE((exact - fd).norm(), 1e-8 * exact.norm()) << "point " << r;
    }
}

TEST(Differentiate, ComposeAffineMatchesDirectEvaluation) {
    const auto def = gpls::catalog_lookup("torus", {});
    const double t[3] = {0.1, -0.2, 0.05};
    const Polynomial c = gpls::compose_affine(def.implicit, 0.7, t);
    for (const Eigen::Vector3d& x : {Eigen::Vector3d(0.3, 0.2, -0.4), Eigen::Vector3d(-0.8, 0.1, 0.6)}) {
        const Eigen::Vector3d y = 0.7 * x + Eigen::Vector3d(t[0], t[1], t[2]);
        EXPECT_NEAR(gpls::eval(c, {x.data(), 3}), gpls::eval(def.implicit, {y.data(), 3}), 1e-14);
    }
}
