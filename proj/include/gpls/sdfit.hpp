#pragma once

// Level sets of non-algebraic surfaces: narrow-band construction along normals, least-squares
// fit of the relaxed signed distance, regression of functions on a surface and k-nearest
// neighbour normal estimation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gpls/error.hpp"
#include "gpls/linalg.hpp"
#include "gpls/nodes.hpp"
#include "gpls/parallel.hpp"
#include "gpls/poly.hpp"
#include "gpls/variety.hpp"

namespace gpls {

inline const std::vector<double>& default_band_offsets() {
    static const std::vector<double> v{0.005, 0.01, 0.035};
    return v;
}

/// Surface points and their offsets along the normal, in model coordinates.
struct NarrowBand {
    DomainTransform transform;
    Eigen::MatrixXd on_surface;   // model coordinates
    Eigen::MatrixXd normals;      // unit
    Eigen::MatrixXd off_surface;  // model coordinates
    Eigen::VectorXd distance;     // signed offset of each off-surface point
    std::vector<Eigen::Index> source;  // on-surface row of each off-surface point
    std::vector<double> offsets_used;
    std::size_t dropped = 0;      // band points that left [-1,1]^3

    Eigen::Index size() const { return on_surface.rows() + off_surface.rows(); }
};

/// Builds q +- lambda eta(q) for every point and offset; offsets are in model units. Points
/// are mapped by `transform`, or by the default bounding-box fit when none is given.
inline NarrowBand build_band(const Eigen::MatrixXd& points, const Eigen::MatrixXd& normals,
                             const std::vector<double>& offsets, std::optional<DomainTransform> transform = {}) {
    if (points.cols() != 3 || normals.cols() != 3 || points.rows() != normals.rows())
        throw DomainError("build_band: points and normals must be N x 3 of equal length");
    if (points.rows() == 0) throw DomainError("build_band: no points");
    for (double l : offsets)
        if (!(l > 0.0)) throw DomainError("build_band: offsets must be positive");
    std::vector<Eigen::Index> bad;
    for (Eigen::Index i = 0; i < normals.rows(); ++i)
        if (!(normals.row(i).norm() > 0.0) || !normals.row(i).allFinite()) bad.push_back(i);
    if (!bad.empty()) {
        std::string list;
        for (std::size_t k = 0; k < bad.size() && k < 20; ++k) list += (k ? ", " : "") + std::to_string(bad[k]);
        if (bad.size() > 20) list += ", ...";
        throw FormatError("build_band: zero-length normals at points " + list);
    }
    NarrowBand b;
    b.transform = transform ? *transform : DomainTransform::fit_to_box(points);
    b.on_surface = b.transform.to_model(points);
    b.normals = normals.rowwise().normalized();
    b.offsets_used = offsets;
    std::vector<Eigen::Vector3d> pts;
    std::vector<double> dist;
    for (Eigen::Index i = 0; i < b.on_surface.rows(); ++i) {
        const Eigen::Vector3d q = b.on_surface.row(i).transpose();
        const Eigen::Vector3d eta = b.normals.row(i).transpose();
        for (double l : offsets)
            for (double sgn : {1.0, -1.0}) {
                const Eigen::Vector3d p = q + sgn * l * eta;
                if (p.cwiseAbs().maxCoeff() > 1.0) {
                    ++b.dropped;
                    continue;
                }
                pts.push_back(p);
                dist.push_back(sgn * l);
                b.source.push_back(i);
            }
    }
    b.off_surface.resize(static_cast<Eigen::Index>(pts.size()), 3);
    b.distance.resize(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t k = 0; k < pts.size(); ++k) {
        b.off_surface.row(static_cast<Eigen::Index>(k)) = pts[k].transpose();
        b.distance(static_cast<Eigen::Index>(k)) = dist[k];
    }
    return b;
}

struct SdfOptions {
    double ridge = 0.0;
};

/// Least-squares fit of the signed distance (0 on the surface, lambda on the band) in the
/// Lagrange basis of the grid of `set`. The gradient must not vanish at any surface point.
inline GplsSurface fit_sdf(const NarrowBand& band, std::shared_ptr<const MultiIndexSet> set, const SdfOptions& opt = {}) {
    if (!set) throw DomainError("fit_sdf: null index set");
    if (set->dim() != 3) throw DomainError("fit_sdf: index set must be three-dimensional");
    if (band.on_surface.rows() == 0) throw DomainError("fit_sdf: empty band");
    GplsSurface s;
    s.grid = build_grid(set);
    s.transform = band.transform;
    s.report.mode = FitMode::signed_distance;
    s.report.rank_tol = 0.0;
    const Eigen::Index n_on = band.on_surface.rows();
    const Eigen::Index n_all = band.size();
    if (static_cast<std::size_t>(n_all) < set->size())
        s.report.warnings.push_back("underdetermined fit: " + std::to_string(n_all) + " band points for " +
                                    std::to_string(set->size()) + " coefficients");
    if (band.off_surface.rows() == 0)
        s.report.warnings.push_back("no offsets: the fit regresses surface points only and may collapse to zero");
    Eigen::MatrixXd all(n_all, 3);
    all << band.on_surface, band.off_surface;
    Eigen::VectorXd rhs(n_all);
    rhs << Eigen::VectorXd::Zero(n_on), band.distance;
    const Vandermonde v = assemble_vandermonde(s.grid, all);
    LeastSquaresOptions lso;
    lso.ridge = opt.ridge;
    const Eigen::VectorXd values = least_squares(v.entries, rhs, lso);
    s.rank = static_cast<Eigen::Index>(set->size());
    s.corank = 0;
    s.q = to_canonical(Polynomial::lagrange(s.grid, values));
    const Eigen::VectorXd fitted = v.entries * values;
    s.report.max_residual = (fitted - rhs).cwiseAbs().maxCoeff();

    std::vector<Polynomial> grad;
    for (int i = 0; i < 3; ++i) grad.push_back(differentiate(s.q, i));
    const double threshold = 1e-10 * std::max(1.0, s.q.coefficients().cwiseAbs().maxCoeff());
    for (Eigen::Index r = 0; r < n_on; ++r) {
        const Eigen::Vector3d x = band.on_surface.row(r).transpose();
        double g2 = 0.0;
        for (const auto& g : grad) {
            const double d = eval(g, {x.data(), 3});
            g2 += d * d;
        }
        if (!(std::sqrt(g2) >= threshold))
            throw DegenerateError("fit_sdf: gradient vanishes at surface point " + std::to_string(r));
    }
    return s;
}

/// Least-squares polynomial in the model coordinates of a surface.
struct SurfaceRegression {
    Polynomial poly;  // Newton form on the grid of the index set, model coordinates
    DomainTransform transform;
    double max_residual = 0.0;

    double eval_user(const Eigen::Vector3d& x) const {
        const Eigen::Vector3d y = transform.point_to_model(x);
        return eval(poly, {y.data(), 3});
    }
    Eigen::VectorXd eval_user(const Eigen::MatrixXd& points) const { return eval_many(poly, transform.to_model(points)); }
};

/// Fits values given at points near the surface by least squares over Pi_A.
inline SurfaceRegression regress_on_surface(const GplsSurface& surface, const Eigen::MatrixXd& points,
                                            const Eigen::VectorXd& values, std::shared_ptr<const MultiIndexSet> set,
                                            const LeastSquaresOptions& opt = {}) {
    if (points.rows() < 1) throw DomainError("regress_on_surface: need at least one point");
    if (points.rows() != values.size()) throw DomainError("regress_on_surface: points and values differ in length");
    if (!set) throw DomainError("regress_on_surface: null index set");
    SurfaceRegression r;
    r.transform = surface.transform;
    auto grid = build_grid(set);
    const Vandermonde v = assemble_vandermonde(grid, r.transform.to_model(points));
    const Eigen::VectorXd c = least_squares(v.entries, values, opt);
    r.max_residual = (v.entries * c - values).cwiseAbs().maxCoeff();
    r.poly = to_newton(Polynomial::lagrange(grid, c));
    return r;
}

/// Unit normals from plane fits over the k nearest neighbours, oriented away from the
/// centroid of the cloud (adequate for star-shaped clouds only).
inline Eigen::MatrixXd estimate_normals(const Eigen::MatrixXd& points, int k = 16) {
    if (points.cols() != 3) throw DomainError("estimate_normals: points must be N x 3");
    const Eigen::Index n = points.rows();
    if (n < 3) throw DomainError("estimate_normals: need at least three points");
    const int kk = static_cast<int>(std::min<Eigen::Index>(k, n));
    const Eigen::RowVector3d centroid = points.colwise().mean();
    Eigen::MatrixXd normals(n, 3);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
        const auto i = static_cast<Eigen::Index>(ii);
        std::vector<std::pair<double, Eigen::Index>> d(static_cast<std::size_t>(n));
        for (Eigen::Index j = 0; j < n; ++j) d[static_cast<std::size_t>(j)] = {(points.row(j) - points.row(i)).squaredNorm(), j};
        std::partial_sort(d.begin(), d.begin() + kk, d.end());
        Eigen::MatrixXd nb(kk, 3);
        for (int j = 0; j < kk; ++j) nb.row(j) = points.row(d[static_cast<std::size_t>(j)].second);
        const Eigen::RowVector3d mean = nb.colwise().mean();
        const Eigen::MatrixXd centered = nb.rowwise() - mean;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(centered.transpose() * centered);
        Eigen::Vector3d nrm = es.eigenvectors().col(0);
        if (nrm.dot((points.row(i) - centroid).transpose()) < 0.0) nrm = -nrm;
        normals.row(i) = nrm.transpose();
    });
    return normals;
}

}  // namespace gpls
