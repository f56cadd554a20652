#include <gtest/gtest.h>

#include <random>

#include "gpls/bench.hpp"
#include "gpls/geom.hpp"
#include "gpls/sdfit.hpp"
#include "gpls/surfaces.hpp"

using gpls::LpDegree;

namespace {

auto make_set(int n, LpDegree p = LpDegree::two()) {
    return std::make_shared<const gpls::MultiIndexSet>(gpls::build_index_set(3, n, p));
}

double max_distance(const gpls::GplsSurface& s, const Eigen::MatrixXd& pts) {
    const gpls::SurfaceJet jet(s);
    return gpls::bench::max_projection_distance(jet, pts);
}

}  // namespace

TEST(Band, SinglePoint) {
    const Eigen::RowVector3d q(0.1, 0.2, 0.3);
    const auto b = gpls::build_band(q, Eigen::RowVector3d(0, 0, 1), {0.01}, gpls::DomainTransform::identity(3));
    ASSERT_EQ(b.off_surface.rows(), 2);
    EXPECT_LE((b.off_surface.row(0) - Eigen::RowVector3d(0.1, 0.2, 0.31)).norm(), 1e-16);
    EXPECT_LE((b.off_surface.row(1) - Eigen::RowVector3d(0.1, 0.2, 0.29)).norm(), 1e-16);
    EXPECT_EQ(b.distance(0), 0.01);
    EXPECT_EQ(b.distance(1), -0.01);
    EXPECT_EQ(b.size(), 3);
}

TEST(Band, CountsAndGeometry) {
    const auto s = gpls::synthetic_nonalgebraic().sample(4000, 1);
    const auto b = gpls::build_band(s.points, s.normals, gpls::default_band_offsets());
    EXPECT_EQ(static_cast<std::size_t>(b.off_surface.rows()) + b.dropped, 24000u);
    EXPECT_EQ(b.on_surface.rows(), 4000);
    for (Eigen::Index i = 0; i < b.normals.rows(); ++i) EXPECT_NEAR(b.normals.row(i).norm(), 1.0, 1e-9);
    for (Eigen::Index k = 0; k < b.off_surface.rows(); ++k) {
        const Eigen::Index src = b.source[static_cast<std::size_t>(k)];
        const Eigen::RowVector3d expect = b.on_surface.row(src) + b.distance(k) * b.normals.row(src);
        EXPECT_LE((b.off_surface.row(k) - expect).norm(), 1e-15);
        EXPECT_LE(b.off_surface.row(k).cwiseAbs().maxCoeff(), 1.0);
    }
}

TEST(Band, EmptyOffsetsAndBadNormals) {
    const auto s = gpls::synthetic_nonalgebraic().sample(10, 2);
    const auto b = gpls::build_band(s.points, s.normals, {});
    EXPECT_EQ(b.off_surface.rows(), 0);
    EXPECT_EQ(b.size(), 10);

    Eigen::MatrixXd normals = s.normals;
    normals.row(3).setZero();
    normals.row(7).setZero();
    try {
        (void)gpls::build_band(s.points, normals, {0.01});
        FAIL() << "expected FormatError";
    } catch (const gpls::FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("3, 7"), std::string::npos);
    }
    EXPECT_THROW(gpls::build_band(s.points, s.normals, {-0.01}), gpls::DomainError);
}

// A quadratic cannot match |x|-1 at r = 1 and 1 +- lambda at once, so the zero set is
// biased by O(lambda^2); halving the offset must cut the distance about fourfold.
TEST(FitSdf, SphereWithExactNormals) {
    const auto s = gpls::sample_surface(gpls::catalog_lookup("sphere", {}), 200, 1);
    const auto fit = gpls::fit_sdf(gpls::build_band(s.points, s.normals, {0.01}), make_set(2));
    EXPECT_EQ(fit.report.mode, gpls::FitMode::signed_distance);
    EXPECT_TRUE(fit.kernel.empty());
    const double d1 = max_distance(fit, s.points);
    const double d2 = max_distance(gpls::fit_sdf(gpls::build_band(s.points, s.normals, {0.005}), make_set(2)), s.points);
    EXPECT_LE(d1, 1e-4);
    EXPECT_GT(d1 / d2, 3.5);
    EXPECT_LT(d1 / d2, 4.5);
}

TEST(FitSdf, ReportAndSignConsistency) {
    const auto s = gpls::synthetic_nonalgebraic().sample(2000, 3);
    const auto band = gpls::build_band(s.points, s.normals, gpls::default_band_offsets());
    const auto fit = gpls::fit_sdf(band, make_set(9));
    const Eigen::VectorXd on = gpls::eval_many(fit.q, band.on_surface);
    const Eigen::VectorXd off = gpls::eval_many(fit.q, band.off_surface);
    const double residual = std::max(on.cwiseAbs().maxCoeff(), (off - band.distance).cwiseAbs().maxCoeff());
    EXPECT_LE(residual, fit.report.max_residual * (1 + 1e-9));
    std::size_t agree = 0;
    for (Eigen::Index k = 0; k < off.size(); ++k) agree += (off(k) > 0) == (band.distance(k) > 0);
    EXPECT_GE(static_cast<double>(agree), 0.99 * static_cast<double>(off.size()));
}

TEST(FitSdf, EmptyBandCollapsesAndIsRejected) {
    const auto s = gpls::synthetic_nonalgebraic().sample(200, 2);
    const auto band = gpls::build_band(s.points, s.normals, {});
    try {
        (void)gpls::fit_sdf(band, make_set(3));
        FAIL() << "expected DegenerateError";
    } catch (const gpls::DegenerateError& e) {
        EXPECT_NE(std::string(e.what()).find("surface point 0"), std::string::npos);
    }
}

TEST(FitSdf, UnderdeterminedWarns) {
    const auto s = gpls::synthetic_nonalgebraic().sample(5, 2);
    const auto fit = gpls::fit_sdf(gpls::build_band(s.points, s.normals, {0.01}), make_set(4));
    ASSERT_FALSE(fit.report.warnings.empty());
    EXPECT_NE(fit.report.warnings.front().find("underdetermined"), std::string::npos);
}

// Mirrors the degree sweep of the narrow-band experiments; a factor 2 absorbs sample noise.
TEST(FitSdf, ConvergesWithDegree) {
    const auto syn = gpls::synthetic_nonalgebraic();
    double previous = std::numeric_limits<double>::infinity();
    for (int n = 6; n <= 12; ++n) {
        const auto m = gpls::bench::measure_sdf(syn, 2000, 300, 1, n, LpDegree::two(), gpls::default_band_offsets());
        RecordProperty("E_inf_n" + std::to_string(n), std::to_string(m.e_inf));
        EXPECT_LE(m.e_inf, 2.0 * previous) << "n=" << n;
        previous = std::min(previous, m.e_inf);
    }
}

TEST(FitSdf, NormSweepIsLogged) {
    const auto syn = gpls::synthetic_nonalgebraic();
    for (auto p : {LpDegree::one(), LpDegree::two(), LpDegree::infinity()}) {
        const auto m = gpls::bench::measure_sdf(syn, 2000, 300, 1, 9, p, gpls::default_band_offsets());
        RecordProperty("E_inf_p" + p.to_string(), std::to_string(m.e_inf));
        EXPECT_LT(m.e_inf, 0.05);
    }
}

TEST(FitSdf, DoubledOffsetsKeepTheError) {
    const auto syn = gpls::synthetic_nonalgebraic();
    const auto base = gpls::bench::measure_sdf(syn, 2000, 300, 4, 8, LpDegree::two(), {0.005, 0.01, 0.035});
    const auto doubled = gpls::bench::measure_sdf(syn, 2000, 300, 4, 8, LpDegree::two(), {0.01, 0.02, 0.07});
    RecordProperty("ratio", std::to_string(doubled.e_inf / base.e_inf));
    EXPECT_LE(doubled.e_inf, 3.0 * base.e_inf);
    EXPECT_LE(base.e_inf, 3.0 * doubled.e_inf);
}

TEST(Regression, ConstantAndPolynomialValues) {
    const auto s = gpls::sample_surface(gpls::catalog_lookup("torus", {}), 300, 1);
    gpls::GplsSurface carrier;
    carrier.transform = gpls::DomainTransform::fit_to_box(s.points);
    const auto set = make_set(4);
    const auto one = gpls::regress_on_surface(carrier, s.points, Eigen::VectorXd::Ones(300), set);
    EXPECT_LE((one.eval_user(s.points).array() - 1.0).abs().maxCoeff(), 1e-10);

    // x*y - z^2 + 0.5x lies in Pi_A in any affine coordinates
    auto f = [](const Eigen::MatrixXd& p) {
        return (p.col(0).cwiseProduct(p.col(1)) - p.col(2).cwiseAbs2() + 0.5 * p.col(0)).eval();
    };
    const Eigen::MatrixXd pts = [] {
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> u(-0.8, 0.8);
        Eigen::MatrixXd p(200, 3);
        for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
        return p;
    }();
    const auto r = gpls::regress_on_surface(carrier, pts, f(pts), set);
    EXPECT_LE((r.eval_user(pts) - f(pts)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(r.max_residual, 1e-8);
    EXPECT_THROW(gpls::regress_on_surface(carrier, Eigen::MatrixXd(0, 3), Eigen::VectorXd(0), set), gpls::DomainError);
    EXPECT_THROW(gpls::regress_on_surface(carrier, pts, Eigen::VectorXd::Ones(5), set), gpls::DomainError);
}

TEST(Regression, RungeOnSyntheticSurface) {
    const double e7 = gpls::bench::measure_runge(gpls::synthetic_nonalgebraic(), 4000, 500, 1, 7, LpDegree::two());
    const double e11 = gpls::bench::measure_runge(gpls::synthetic_nonalgebraic(), 4000, 500, 1, 11, LpDegree::two());
    EXPECT_LT(e11, e7);
    EXPECT_LT(e11, 1e-6);
}

TEST(Normals, EstimatedOnSphere) {
    const auto s = gpls::sample_surface(gpls::catalog_lookup("sphere", {}), 3000, 1);
    const Eigen::MatrixXd n = gpls::estimate_normals(s.points, 16);
    for (Eigen::Index i = 0; i < n.rows(); ++i) {
        EXPECT_NEAR(n.row(i).norm(), 1.0, 1e-12);
        EXPECT_GT(n.row(i).dot(s.normals.row(i)), 0.99);
    }
}
