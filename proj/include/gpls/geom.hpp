#pragma once

// Differential geometry of polynomial level sets in R^3: closest-point projection, mean and
// Gauss curvature, surface gradient, Laplace-Beltrami and the Laplacian of mean curvature.
// Quantities are evaluated in model coordinates and reported in user units.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gpls/error.hpp"
#include "gpls/parallel.hpp"
#include "gpls/poly.hpp"
#include "gpls/variety.hpp"

namespace gpls {

/// Value, gradient and Hessian of a scalar field at one point.
struct Jet2 {
    double value = 0.0;
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();
    Eigen::Matrix3d hess = Eigen::Matrix3d::Zero();

    static Jet2 constant(double c) { return {c, Eigen::Vector3d::Zero(), Eigen::Matrix3d::Zero()}; }

    friend Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.value + b.value, a.grad + b.grad, a.hess + b.hess}; }
    friend Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.value - b.value, a.grad - b.grad, a.hess - b.hess}; }
    friend Jet2 operator*(double s, const Jet2& a) { return {s * a.value, s * a.grad, s * a.hess}; }
    friend Jet2 operator*(const Jet2& a, const Jet2& b) {
        Jet2 r;
        r.value = a.value * b.value;
        r.grad = a.value * b.grad + b.value * a.grad;
        r.hess = a.value * b.hess + b.value * a.hess + a.grad * b.grad.transpose() + b.grad * a.grad.transpose();
        return r;
    }
    Jet2& operator+=(const Jet2& o) { return *this = *this + o; }
};

/// a^e by the chain rule; a.value must be positive for non-integer e.
inline Jet2 pow(const Jet2& a, double e) {
    const double v1 = std::pow(a.value, e - 1.0);
    const double v2 = std::pow(a.value, e - 2.0);
    Jet2 r;
    r.value = v1 * a.value;
    r.grad = e * v1 * a.grad;
    r.hess = e * v1 * a.hess + e * (e - 1.0) * v2 * a.grad * a.grad.transpose();
    return r;
}

/// Derivatives of q up to order 4 at one point.
struct PointDerivatives {
    double value = 0.0;
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    std::array<double, 27> t{};  // t[a*9 + b*3 + c]
    std::array<double, 81> f{};  // f[a*27 + b*9 + c*3 + d]

    double third(int a, int b, int c) const { return t[static_cast<std::size_t>(a * 9 + b * 3 + c)]; }
    double fourth(int a, int b, int c, int d) const { return f[static_cast<std::size_t>(a * 27 + b * 9 + c * 3 + d)]; }
};

namespace detail {

inline int partial_key(int i, int j, int k) { return i + 5 * j + 25 * k; }

/// Unit normal, |grad|, signed mean curvature (literal form, -1 on the outward unit sphere)
/// and Gauss curvature (adjugate form, +1 on the sphere) from a gradient and Hessian.
inline double mean_curvature_from(const Eigen::Vector3d& g, const Eigen::Matrix3d& h) {
    const double n2 = g.squaredNorm();
    return (g.dot(h * g) - n2 * h.trace()) / (2.0 * n2 * std::sqrt(n2));
}

inline Eigen::Matrix3d adjugate(const Eigen::Matrix3d& h) {
    Eigen::Matrix3d a;
    a(0, 0) = h(1, 1) * h(2, 2) - h(1, 2) * h(2, 1);
    a(0, 1) = h(0, 2) * h(2, 1) - h(0, 1) * h(2, 2);
    a(0, 2) = h(0, 1) * h(1, 2) - h(0, 2) * h(1, 1);
    a(1, 0) = h(1, 2) * h(2, 0) - h(1, 0) * h(2, 2);
    a(1, 1) = h(0, 0) * h(2, 2) - h(0, 2) * h(2, 0);
    a(1, 2) = h(0, 2) * h(1, 0) - h(0, 0) * h(1, 2);
    a(2, 0) = h(1, 0) * h(2, 1) - h(1, 1) * h(2, 0);
    a(2, 1) = h(0, 1) * h(2, 0) - h(0, 0) * h(2, 1);
    a(2, 2) = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
    return a;
}

inline double gauss_curvature_from(const Eigen::Vector3d& g, const Eigen::Matrix3d& h) {
    const double n2 = g.squaredNorm();
    return g.dot(adjugate(h) * g) / (n2 * n2);
}

/// Delta_M phi = tr(hess) + 2 K <eta, grad> - eta^T hess eta.
inline double laplace_beltrami_from(const Jet2& phi, const Eigen::Vector3d& eta, double k_mean) {
    return phi.hess.trace() + 2.0 * k_mean * eta.dot(phi.grad) - eta.dot(phi.hess * eta);
}

inline Eigen::Vector3d tangential(const Eigen::Vector3d& v, const Eigen::Vector3d& eta) { return v - eta.dot(v) * eta; }

}  // namespace detail

/// A level-set polynomial with its canonical partial derivatives up to total order 4.
class SurfaceJet {
public:
    SurfaceJet(const Polynomial& q, DomainTransform transform) : transform_(std::move(transform)) {
        if (q.dim() != 3) throw DomainError("geometry requires a polynomial in three variables");
        if (transform_.dim() != 3) throw DomainError("geometry: transform dimension must be 3");
        q_ = to_canonical(q);
        partials_.resize(125);
        for (int k = 0; k <= 4; ++k)
            for (int j = 0; j + k <= 4; ++j)
                for (int i = 0; i + j + k <= 4; ++i) {
                    const std::array<int, 3> ord{i, j, k};
                    partials_[static_cast<std::size_t>(detail::partial_key(i, j, k))] = partial(q_, ord);
                }
        coeff_scale_ = std::max(1.0, q_.coefficients().cwiseAbs().maxCoeff());
    }

    explicit SurfaceJet(const GplsSurface& s) : SurfaceJet(s.q, s.transform) {}

    const Polynomial& polynomial() const { return q_; }
    const DomainTransform& transform() const { return transform_; }
    double coefficient_scale() const { return coeff_scale_; }

    /// Cached partial d^{i,j,k} q (i+j+k <= 4).
    const Polynomial& partial_of(int i, int j, int k) const {
        if (i < 0 || j < 0 || k < 0 || i + j + k > 4) throw DomainError("partial_of: order must be at most 4");
        return partials_[static_cast<std::size_t>(detail::partial_key(i, j, k))];
    }

    double value_model(const Eigen::Vector3d& y) const { return eval(q_, span_of(y)); }

    Eigen::Vector3d gradient_model(const Eigen::Vector3d& y) const {
        return {eval(partial_of(1, 0, 0), span_of(y)), eval(partial_of(0, 1, 0), span_of(y)),
                eval(partial_of(0, 0, 1), span_of(y))};
    }

    /// Derivatives of q at a model point up to order `max_order` (<= 4).
    PointDerivatives derivatives_model(const Eigen::Vector3d& y, int max_order = 4) const {
        PointDerivatives d;
        const auto x = span_of(y);
        auto at = [&](std::initializer_list<int> axes) {
            int c[3] = {0, 0, 0};
            for (int a : axes) ++c[a];
            return eval(partial_of(c[0], c[1], c[2]), x);
        };
        d.value = eval(q_, x);
        for (int a = 0; a < 3; ++a) d.g(a) = at({a});
        if (max_order >= 2)
            for (int a = 0; a < 3; ++a)
                for (int b = a; b < 3; ++b) d.h(a, b) = d.h(b, a) = at({a, b});
        if (max_order >= 3) {
            for (int a = 0; a < 3; ++a)
                for (int b = a; b < 3; ++b)
                    for (int c = b; c < 3; ++c) {
                        const double v = at({a, b, c});
                        const int idx[3] = {a, b, c};
                        for_each_perm3(idx, [&](int p, int r, int s) { d.t[static_cast<std::size_t>(p * 9 + r * 3 + s)] = v; });
                    }
        }
        if (max_order >= 4) {
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    for (int c = 0; c < 3; ++c)
                        for (int e = 0; e < 3; ++e)
                            d.f[static_cast<std::size_t>(a * 27 + b * 9 + c * 3 + e)] = at({a, b, c, e});
        }
        return d;
    }

    /// |grad q| below this marks a degenerate point (model units).
    double degeneracy_threshold() const { return 1e-10 * coeff_scale_; }

private:
    static std::span<const double> span_of(const Eigen::Vector3d& y) { return {y.data(), 3}; }

    template <class Fn>
    static void for_each_perm3(const int (&i)[3], Fn&& fn) {
        fn(i[0], i[1], i[2]);
        fn(i[0], i[2], i[1]);
        fn(i[1], i[0], i[2]);
        fn(i[1], i[2], i[0]);
        fn(i[2], i[0], i[1]);
        fn(i[2], i[1], i[0]);
    }

    Polynomial q_;
    DomainTransform transform_;
    std::vector<Polynomial> partials_;
    double coeff_scale_ = 1.0;
};

struct ProjectionOptions {
    int max_iter = 50;
    /// Converged once |q| <= tol * (1 + ||coefficients||_inf).
    double tol = 1e-14;
};

struct ProjectionResult {
    Eigen::Vector3d point;  // user coordinates
    double distance = 0.0;  // user units
    double residual = 0.0;  // |q| at the returned point
    int iterations = 0;
};

/// Closest-point style projection onto q = 0 by the gradient-Newton iteration
/// y <- y - q grad q / |grad q|^2, with a bisection step when an update overshoots.
/// At least one step is taken, so the distance of a point already on the level set is its
/// first-order estimate |q| / |grad q| rather than zero.
inline ProjectionResult project_to_surface(const SurfaceJet& jet, const Eigen::Vector3d& x,
                                           const ProjectionOptions& opt = {}) {
    const auto& tr = jet.transform();
    const Eigen::Vector3d y0 = tr.point_to_model(x);
    Eigen::Vector3d y = y0;
    const double target = opt.tol * (1.0 + jet.polynomial().coefficients().cwiseAbs().maxCoeff());
    const double eps = std::numeric_limits<double>::epsilon();
    double qv = jet.value_model(y);
    ProjectionResult r;
    for (int it = 0; it <= opt.max_iter; ++it) {
        r.iterations = it;
        if (qv == 0.0 || (it > 0 && std::abs(qv) <= target)) break;
        if (it == opt.max_iter)
            throw ConvergenceError("projection did not converge in " + std::to_string(opt.max_iter) +
                                       " iterations (residual " + std::to_string(std::abs(qv)) + ")",
                                   std::abs(qv));
        const Eigen::Vector3d g = jet.gradient_model(y);
        const double g2 = g.squaredNorm();
        if (!(std::sqrt(g2) > jet.degeneracy_threshold()))
            throw DegenerateError("projection: gradient vanishes along the path");
        const Eigen::Vector3d step = -qv / g2 * g;
        Eigen::Vector3d next = y + step;
        double qn = jet.value_model(next);
        if (std::signbit(qn) != std::signbit(qv) && std::abs(qn) > std::abs(qv)) {
            // Overshoot: bracket the root on the segment and bisect.
            Eigen::Vector3d lo = y, hi = next;
            double qlo = qv;
            for (int b = 0; b < 60; ++b) {
                const Eigen::Vector3d mid = 0.5 * (lo + hi);
                const double qm = jet.value_model(mid);
                if (std::signbit(qm) == std::signbit(qlo)) {
                    lo = mid;
                    qlo = qm;
                } else {
                    hi = mid;
                }
                if ((hi - lo).norm() <= 4 * eps * (1.0 + mid.norm())) break;
            }
            next = std::abs(qlo) < std::abs(jet.value_model(hi)) ? lo : hi;
            qn = jet.value_model(next);
        }
        const double moved = (next - y).norm();
        y = next;
        qv = qn;
        if (moved <= 4 * eps * (1.0 + y.norm())) {
            r.iterations = it + 1;
            break;
        }
    }
    r.point = tr.point_to_user(y);
    r.distance = (y - y0).norm() / tr.scale;
    r.residual = std::abs(qv);
    return r;
}

inline ProjectionResult project_to_surface(const SurfaceJet& jet, const Eigen::Vector3d& x, int max_iter, double tol) {
    return project_to_surface(jet, x, ProjectionOptions{max_iter, tol});
}

/// Geometry at one point, user units.
struct PointGeometry {
    double grad_norm = 0.0;        // |grad q| in model units
    Eigen::Vector3d normal;        // grad q / |grad q|
    double k_mean = 0.0;
    double k_gauss = 0.0;
    std::optional<double> lap_k_mean;
};

namespace detail {

inline const PointDerivatives checked_derivatives(const SurfaceJet& jet, const Eigen::Vector3d& x, int order) {
    const Eigen::Vector3d y = jet.transform().point_to_model(x);
    PointDerivatives d = jet.derivatives_model(y, order);
    if (!(d.g.norm() >= jet.degeneracy_threshold()))
        throw DegenerateError("degenerate gradient |grad q| = " + std::to_string(d.g.norm()));
    return d;
}

/// Delta_M K_mean in model units from derivatives up to order 4, via K_mean = u v with
/// u = (g^T H g - |g|^2 tr H) / 2 and v = |g|^-3.
inline double laplacian_mean_curvature_model(const PointDerivatives& d) {
    std::array<Jet2, 3> g;
    std::array<std::array<Jet2, 3>, 3> h;
    for (int a = 0; a < 3; ++a) {
        g[a].value = d.g(a);
        g[a].grad = d.h.row(a).transpose();
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) g[a].hess(b, c) = d.third(a, b, c);
    }
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            Jet2& j = h[a][b];
            j.value = d.h(a, b);
            for (int c = 0; c < 3; ++c) {
                j.grad(c) = d.third(a, b, c);
                for (int e = 0; e < 3; ++e) j.hess(c, e) = d.fourth(a, b, c, e);
            }
        }
    Jet2 ghg = Jet2::constant(0.0), norm2 = Jet2::constant(0.0), trace = Jet2::constant(0.0);
    for (int a = 0; a < 3; ++a) {
        norm2 += g[a] * g[a];
        trace += h[a][a];
        for (int b = 0; b < 3; ++b) ghg += g[a] * h[a][b] * g[b];
    }
    const Jet2 u = 0.5 * (ghg - norm2 * trace);
    const Jet2 v = pow(norm2, -1.5);
    const Eigen::Vector3d eta = d.g.normalized();
    const double k = u.value * v.value;
    const double lap_u = laplace_beltrami_from(u, eta, k);
    const double lap_v = laplace_beltrami_from(v, eta, k);
    const double cross = tangential(u.grad, eta).dot(tangential(v.grad, eta));
    return u.value * lap_v + v.value * lap_u + 2.0 * cross;
}

}  // namespace detail

/// Signed mean curvature at a user point (orientation of grad q).
inline double mean_curvature(const SurfaceJet& jet, const Eigen::Vector3d& x) {
    const PointDerivatives d = detail::checked_derivatives(jet, x, 2);
    return jet.transform().scale * detail::mean_curvature_from(d.g, d.h);
}

inline double gauss_curvature(const SurfaceJet& jet, const Eigen::Vector3d& x) {
    const PointDerivatives d = detail::checked_derivatives(jet, x, 2);
    const double s = jet.transform().scale;
    return s * s * detail::gauss_curvature_from(d.g, d.h);
}

inline double laplacian_mean_curvature(const SurfaceJet& jet, const Eigen::Vector3d& x) {
    const PointDerivatives d = detail::checked_derivatives(jet, x, 4);
    const double s = jet.transform().scale;
    return s * s * s * detail::laplacian_mean_curvature_model(d);
}

/// All quantities at once (derivatives evaluated a single time).
inline PointGeometry point_geometry(const SurfaceJet& jet, const Eigen::Vector3d& x, bool laplacian) {
    const PointDerivatives d = detail::checked_derivatives(jet, x, laplacian ? 4 : 2);
    const double s = jet.transform().scale;
    PointGeometry p;
    p.grad_norm = d.g.norm();
    p.normal = d.g / p.grad_norm;
    p.k_mean = s * detail::mean_curvature_from(d.g, d.h);
    p.k_gauss = s * s * detail::gauss_curvature_from(d.g, d.h);
    if (laplacian) p.lap_k_mean = s * s * s * detail::laplacian_mean_curvature_model(d);
    return p;
}

namespace detail {

/// Value, gradient and Hessian of a user-coordinate polynomial f at x.
inline Jet2 polynomial_jet(const Polynomial& f, const Eigen::Vector3d& x) {
    if (f.dim() != 3) throw DomainError("surface operators need a polynomial in three variables");
    const Polynomial c = to_canonical(f);
    const std::span<const double> xs(x.data(), 3);
    Jet2 j;
    j.value = eval(c, xs);
    for (int a = 0; a < 3; ++a) {
        std::array<int, 3> o{0, 0, 0};
        o[static_cast<std::size_t>(a)] = 1;
        j.grad(a) = eval(partial(c, o), xs);
        for (int b = a; b < 3; ++b) {
            std::array<int, 3> o2 = o;
            ++o2[static_cast<std::size_t>(b)];
            j.hess(a, b) = j.hess(b, a) = eval(partial(c, o2), xs);
        }
    }
    return j;
}

}  // namespace detail

/// grad_M f = grad f - <eta, grad f> eta; f is given in user coordinates.
inline Eigen::Vector3d surface_gradient(const SurfaceJet& jet, const Polynomial& f, const Eigen::Vector3d& x) {
    const PointDerivatives d = detail::checked_derivatives(jet, x, 1);
    return detail::tangential(detail::polynomial_jet(f, x).grad, d.g.normalized());
}

/// Delta_M f = Delta f + 2 K_mean <eta, grad f> - <eta, hess f eta>; f in user coordinates.
inline double laplace_beltrami(const SurfaceJet& jet, const Polynomial& f, const Eigen::Vector3d& x) {
    const PointDerivatives d = detail::checked_derivatives(jet, x, 2);
    const double k = jet.transform().scale * detail::mean_curvature_from(d.g, d.h);
    return detail::laplace_beltrami_from(detail::polynomial_jet(f, x), d.g.normalized(), k);
}

/// Reference values at a point; signed quantities refer to the orientation `normal`.
struct OracleValues {
    Eigen::Vector3d normal = Eigen::Vector3d::Zero();
    std::optional<double> k_mean;
    std::optional<double> k_gauss;
    std::optional<double> lap_k_mean;
};

using Oracle = std::function<OracleValues(const Eigen::Vector3d&)>;

struct CurvatureRecord {
    Eigen::Vector3d point;
    PointGeometry geometry;
    std::optional<OracleValues> oracle;  // signs aligned with grad q of the fit
};

struct ErrorStats {
    std::size_t count = 0;
    double max_abs = 0.0;
    double mean_abs = 0.0;
};

struct CurvatureReport {
    std::vector<CurvatureRecord> records;
    std::vector<std::size_t> degenerate;  // input indices skipped
    bool has_laplacian = false;
    bool has_oracle = false;
    ErrorStats err_k_mean, err_k_gauss, err_lap_k_mean;
};

namespace detail {

inline void accumulate(ErrorStats& s, double e) {
    ++s.count;
    s.max_abs = std::max(s.max_abs, e);
    s.mean_abs += e;
}

}  // namespace detail

/// Per-point curvature with optional oracle comparison. Mean curvature and its Laplacian are
/// compared after aligning the oracle's orientation with grad q; Gauss curvature does not
/// depend on the orientation.
inline CurvatureReport curvature_report(const SurfaceJet& jet, const Eigen::MatrixXd& points, bool laplacian,
                                        const Oracle& oracle = nullptr) {
    if (points.cols() != 3) throw DomainError("curvature_report: points must have three columns");
    const std::size_t n = static_cast<std::size_t>(points.rows());
    std::vector<std::optional<CurvatureRecord>> slots(n);
    parallel_for(n, [&](std::size_t i) {
        const Eigen::Vector3d x = points.row(static_cast<Eigen::Index>(i)).transpose();
        CurvatureRecord rec;
        rec.point = x;
        try {
            rec.geometry = point_geometry(jet, x, laplacian);
        } catch (const DegenerateError&) {
            return;
        }
        if (oracle) {
            OracleValues o = oracle(x);
            const double sign = rec.geometry.normal.dot(o.normal) < 0.0 ? -1.0 : 1.0;
            if (o.k_mean) *o.k_mean *= sign;
            if (o.lap_k_mean) *o.lap_k_mean *= sign;
            o.normal *= sign;
            rec.oracle = o;
        }
        slots[i] = std::move(rec);
    });
    CurvatureReport r;
    r.has_laplacian = laplacian;
    r.has_oracle = static_cast<bool>(oracle);
    for (std::size_t i = 0; i < n; ++i) {
        if (!slots[i]) {
            r.degenerate.push_back(i);
            continue;
        }
        const CurvatureRecord& rec = *slots[i];
        if (rec.oracle) {
            const auto& o = *rec.oracle;
            if (o.k_mean) detail::accumulate(r.err_k_mean, std::abs(rec.geometry.k_mean - *o.k_mean));
            if (o.k_gauss) detail::accumulate(r.err_k_gauss, std::abs(rec.geometry.k_gauss - *o.k_gauss));
            if (o.lap_k_mean && rec.geometry.lap_k_mean)
                detail::accumulate(r.err_lap_k_mean, std::abs(*rec.geometry.lap_k_mean - *o.lap_k_mean));
        }
        r.records.push_back(rec);
    }
    for (ErrorStats* s : {&r.err_k_mean, &r.err_k_gauss, &r.err_lap_k_mean})
        if (s->count > 0) s->mean_abs /= static_cast<double>(s->count);
    return r;
}

}  // namespace gpls
