#pragma once

// Benchmark surfaces: ellipsoid, biconcave disc, torus, genus-2 surface and Klein bottle as
// exact implicit polynomials, a seeded sampler, curvature oracles and a star-shaped
// non-algebraic test surface.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gpls/error.hpp"
#include "gpls/geom.hpp"
#include "gpls/mindex.hpp"
#include "gpls/poly.hpp"

namespace gpls {

using SurfaceParams = std::map<std::string, double>;

/// Parses "a=0.8,b=0.9,c=1.0" (empty string gives no parameters).
inline SurfaceParams parse_params(const std::string& text) {
    SurfaceParams p;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw DomainError("parameter '" + item + "' is not key=value");
        const std::string key = item.substr(0, eq);
        const std::string val = item.substr(eq + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(val, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != val.size() || val.empty()) throw DomainError("parameter '" + key + "' has a non-numeric value");
        p[key] = v;
    }
    return p;
}

inline std::string format_params(const SurfaceParams& p) {
    std::string out;
    for (const auto& [k, v] : p) {
        if (!out.empty()) out += ',';
        std::ostringstream os;
        os << k << '=' << v;
        out += os.str();
    }
    return out;
}

/// Sparse polynomial in x, y, z keyed by exponent triples; used to expand the catalog
/// equations exactly as written.
class Monomials {
public:
    using Key = std::array<int, 3>;

    Monomials() = default;
    static Monomials constant(double c) {
        Monomials m;
        m.add({0, 0, 0}, c);
        return m;
    }
    static Monomials var(int axis) {
        Monomials m;
        Key k{0, 0, 0};
        k[static_cast<std::size_t>(axis)] = 1;
        m.add(k, 1.0);
        return m;
    }

    void add(const Key& k, double c) {
        if (c == 0.0) return;
        terms_[k] += c;
    }
    const std::map<Key, double>& terms() const { return terms_; }

    friend Monomials operator+(Monomials a, const Monomials& b) {
        for (const auto& [k, c] : b.terms_) a.add(k, c);
        return a;
    }
    friend Monomials operator-(Monomials a, const Monomials& b) {
        for (const auto& [k, c] : b.terms_) a.add(k, -c);
        return a;
    }
    friend Monomials operator*(double s, Monomials a) {
        for (auto& [k, c] : a.terms_) c *= s;
        return a;
    }
    friend Monomials operator*(const Monomials& a, const Monomials& b) {
        Monomials r;
        for (const auto& [ka, ca] : a.terms_)
            for (const auto& [kb, cb] : b.terms_) r.add({ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]}, ca * cb);
        return r;
    }
    friend Monomials operator+(Monomials a, double c) { return a + constant(c); }
    friend Monomials operator-(Monomials a, double c) { return a + constant(-c); }

    /// Canonical polynomial on `set`; every monomial must be a member.
    Polynomial on(std::shared_ptr<const MultiIndexSet> set) const {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set->size()));
        for (const auto& [k, v] : terms_) {
            if (v == 0.0) continue;
            const auto idx = set->find(std::span<const int>(k.data(), 3));
            if (!idx)
                throw DomainError("monomial x^" + std::to_string(k[0]) + " y^" + std::to_string(k[1]) + " z^" +
                                  std::to_string(k[2]) + " is outside the index set");
            c(static_cast<Eigen::Index>(*idx)) = v;
        }
        return Polynomial::canonical(std::move(set), std::move(c));
    }

private:
    std::map<Key, double> terms_;
};

struct SurfaceDef {
    std::string name;
    SurfaceParams params;
    Polynomial implicit;  // canonical, user coordinates
    int degree = 0;
    LpDegree lp = LpDegree::two();
    bool orientable = true;
    bool closed_form_oracle = false;    // ellipsoid, torus
    bool revolution_laplacian = false;  // axisymmetric ellipsoid, torus

    std::shared_ptr<const MultiIndexSet> index_set() const { return implicit.index_set_ptr(); }
    double param(const std::string& k) const { return params.at(k); }
};

inline const std::vector<std::string>& catalog_names() {
    static const std::vector<std::string> names{"ellipsoid", "sphere", "biconcave", "torus", "genus2", "klein"};
    return names;
}

namespace detail {

inline double take(SurfaceParams& p, const std::string& key, double fallback, const std::string& surface) {
    auto it = p.find(key);
    if (it == p.end()) {
        p[key] = fallback;
        return fallback;
    }
    if (!std::isfinite(it->second)) throw DomainError(surface + ": parameter " + key + " must be finite");
    return it->second;
}

inline void reject_unknown(const SurfaceParams& p, std::initializer_list<const char*> known, const std::string& surface) {
    for (const auto& [k, v] : p) {
        bool ok = false;
        for (const char* n : known) ok = ok || k == n;
        if (!ok) throw DomainError(surface + ": unknown parameter '" + k + "'");
    }
}

}  // namespace detail

/// Exact implicit polynomial and metadata of a catalog surface. Missing parameters take the
/// benchmark defaults.
inline SurfaceDef catalog_lookup(const std::string& name, SurfaceParams params = {}) {
    const Monomials x = Monomials::var(0), y = Monomials::var(1), z = Monomials::var(2);
    const Monomials r2 = x * x + y * y + z * z;
    SurfaceDef d;
    d.params = params;
    Monomials poly;
    if (name == "ellipsoid" || name == "sphere") {
        detail::reject_unknown(params, {"a", "b", "c", "r"}, name);
        double a, b, c;
        if (name == "sphere") {
            const double r = detail::take(d.params, "r", 1.0, name);
            d.params.erase("r");
            a = b = c = r;
            d.params = {{"a", r}, {"b", r}, {"c", r}};
        } else {
            a = detail::take(d.params, "a", 0.8, name);
            b = detail::take(d.params, "b", 0.9, name);
            c = detail::take(d.params, "c", 1.0, name);
        }
        if (!(a > 0 && b > 0 && c > 0)) throw DomainError("ellipsoid: requires a > 0, b > 0, c > 0");
        poly = (1.0 / (a * a)) * (x * x) + (1.0 / (b * b)) * (y * y) + (1.0 / (c * c)) * (z * z) - 1.0;
        d.name = "ellipsoid";
        d.degree = 2;
        d.closed_form_oracle = true;
        d.revolution_laplacian = a == b;
    } else if (name == "biconcave") {
        detail::reject_unknown(params, {"d", "c"}, name);
        const double dd = detail::take(d.params, "d", 0.5, name);
        const double c = detail::take(d.params, "c", 0.375, name);
        if (!(c > 0 && c < dd)) throw DomainError("biconcave: requires 0 < c < d");
        const Monomials s = r2 + dd * dd;
        poly = s * s * s - (8.0 * dd * dd) * (y * y + z * z) - c * c * c * c;
        d.name = name;
        d.degree = 6;
    } else if (name == "torus") {
        detail::reject_unknown(params, {"R", "r"}, name);
        const double big = detail::take(d.params, "R", 0.5, name);
        const double small = detail::take(d.params, "r", 0.3, name);
        if (!(small > 0 && small < big)) throw DomainError("torus: requires 0 < r < R");
        const Monomials s = r2 + (big * big - small * small);
        poly = s * s - (4.0 * big * big) * (x * x + y * y);
        d.name = name;
        d.degree = 4;
        d.closed_form_oracle = true;
        d.revolution_laplacian = true;
    } else if (name == "genus2") {
        detail::reject_unknown(params, {}, name);
        const Monomials one_minus_z2 = Monomials::constant(1.0) - z * z;
        poly = 2.0 * y * (y * y - 3.0 * (x * x)) * one_minus_z2 + (x * x + y * y) * (x * x + y * y) -
               (9.0 * (z * z) - 1.0) * one_minus_z2;
        d.name = name;
        d.degree = 4;
    } else if (name == "klein") {
        detail::reject_unknown(params, {}, name);
        const Monomials a = r2 + 2.0 * y - 1.0;
        const Monomials b = r2 - 2.0 * y - 1.0;
        poly = a * (b * b - 8.0 * (z * z)) + 16.0 * x * z * b;
        d.name = name;
        d.degree = 6;
        d.orientable = false;
    } else {
        throw DomainError("unknown surface '" + name + "' (expected ellipsoid, sphere, biconcave, torus, genus2, klein)");
    }
    auto set = std::make_shared<const MultiIndexSet>(build_index_set(3, d.degree, d.lp));
    d.implicit = poly.on(set);
    return d;
}

struct SurfaceSample {
    Eigen::MatrixXd points;           // N x 3
    Eigen::MatrixXd normals;          // N x 3, zero rows where invalid
    std::vector<bool> normal_valid;
    std::size_t attempts = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based uniform draw in [0,1).
inline double counter_uniform(std::uint64_t seed, std::uint64_t counter, unsigned lane) {
    const std::uint64_t h = splitmix64(splitmix64(seed) ^ splitmix64(counter * 4 + lane + 1));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Uniform draws in [-1,1]^3 projected onto the exact zero set. Draws whose projection fails
/// or leaves a residual above 1e-13 * scale are rejected.
inline SurfaceSample sample_surface(const SurfaceDef& def, std::size_t count, std::uint64_t seed) {
    if (count < 1) throw DomainError("sample_surface: count must be >= 1");
    const SurfaceJet jet(def.implicit, DomainTransform::identity(3));
    const double scale = jet.coefficient_scale();
    SurfaceSample s;
    s.points.resize(static_cast<Eigen::Index>(count), 3);
    s.normals = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(count), 3);
    s.normal_valid.assign(count, false);
    const std::size_t budget = 100 * count;
    std::size_t got = 0;
    for (std::size_t attempt = 0; attempt < budget && got < count; ++attempt) {
        ++s.attempts;
        Eigen::Vector3d x;
        for (unsigned l = 0; l < 3; ++l) x(l) = 2.0 * detail::counter_uniform(seed, attempt, l) - 1.0;
        ProjectionResult pr;
        try {
            pr = project_to_surface(jet, x);
        } catch (const Error&) {
            continue;
        }
        if (!(pr.residual <= 1e-13 * scale) || !pr.point.allFinite() || pr.point.cwiseAbs().maxCoeff() > 10.0) continue;
        const Eigen::Vector3d g = jet.gradient_model(pr.point);
        const auto row = static_cast<Eigen::Index>(got);
        s.points.row(row) = pr.point.transpose();
        if (g.norm() > 1e-6 * scale) {
            s.normals.row(row) = g.normalized().transpose();
            s.normal_valid[got] = true;
        }
        ++got;
    }
    if (got < count)
        throw NumericalError("sampling failed: only " + std::to_string(got) + " of " + std::to_string(count) +
                             " points converged after " + std::to_string(budget) + " attempts");
    return s;
}

/// Closed-form curvature for the ellipsoid and the torus. Signed values refer to the outward
/// normal (the gradient of the catalog polynomial) and follow the literal mean curvature sign
/// convention, negative on convex surfaces.
inline OracleValues oracle_curvature(const SurfaceDef& def, const Eigen::Vector3d& p) {
    OracleValues o;
    const Eigen::Vector3d g = SurfaceJet(def.implicit, DomainTransform::identity(3)).gradient_model(p);
    o.normal = g.normalized();
    const double x = p(0), y = p(1), z = p(2);
    if (def.name == "ellipsoid") {
        const double a = def.param("a"), b = def.param("b"), c = def.param("c");
        const double abc2 = (a * b * c) * (a * b * c);
        const double s = x * x / std::pow(a, 4) + y * y / std::pow(b, 4) + z * z / std::pow(c, 4);
        o.k_mean = -std::abs(x * x + y * y + z * z - a * a - b * b - c * c) / (2.0 * abc2 * std::pow(s, 1.5));
        o.k_gauss = 1.0 / (abc2 * s * s);
    } else if (def.name == "torus") {
        const double big = def.param("R"), r = def.param("r");
        const double cos_t = (std::hypot(x, y) - big) / r;
        o.k_mean = -(big + 2.0 * r * cos_t) / (2.0 * r * (big + r * cos_t));
        o.k_gauss = cos_t / (r * (big + r * cos_t));
    } else {
        throw DomainError("no closed-form curvature oracle for surface '" + def.name + "'");
    }
    return o;
}

namespace detail {

/// Central finite-difference weights of order 8 for the first and second derivative.
inline double fd1(const std::function<double(double)>& f, double t, double h) {
    static constexpr double w[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    double s = 0.0;
    for (int k = 1; k <= 4; ++k) s += w[k - 1] * (f(t + k * h) - f(t - k * h));
    return s / h;
}

inline double fd2(const std::function<double(double)>& f, double t, double h) {
    static constexpr double w[4] = {8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};
    double s = -205.0 / 72.0 * f(t);
    for (int k = 1; k <= 4; ++k) s += w[k - 1] * (f(t + k * h) + f(t - k * h));
    return s / (h * h);
}

/// Laplace-Beltrami of an axisymmetric function on a surface of revolution with meridian
/// (rho(t), z(t)): (1/(rho w)) d/dt (rho/w df/dt), w = |(rho', z')|.
struct Meridian {
    std::function<double(double)> rho, drho, ddrho, dz, ddz;
};

inline double revolution_laplacian(const Meridian& m, const std::function<double(double)>& f, double t, double h) {
    const double rho = m.rho(t), rp = m.drho(t), rpp = m.ddrho(t), zp = m.dz(t), zpp = m.ddz(t);
    const double w = std::hypot(rp, zp);
    const double wp = (rp * rpp + zp * zpp) / w;
    const double f1 = fd1(f, t, h), f2 = fd2(f, t, h);
    const double coef = rho / w;
    const double dcoef = rp / w - rho * wp / (w * w);
    return (dcoef * f1 + coef * f2) / (rho * w);
}

}  // namespace detail

/// Delta_M K_mean from finite differences of the closed-form mean curvature along the
/// meridian (axisymmetric ellipsoid a = b, or torus). Signed for the outward normal.
inline double oracle_revolution_laplacian(const SurfaceDef& def, const Eigen::Vector3d& p, double h = 1e-2) {
    const double rho_p = std::hypot(p(0), p(1));
    if (def.name == "ellipsoid" && def.param("a") == def.param("b")) {
        const double a = def.param("a"), c = def.param("c");
        const double t = std::atan2(rho_p / a, p(2) / c);
        detail::Meridian m{[a](double s) { return a * std::sin(s); }, [a](double s) { return a * std::cos(s); },
                           [a](double s) { return -a * std::sin(s); }, [c](double s) { return -c * std::sin(s); },
                           [c](double s) { return -c * std::cos(s); }};
        auto k = [&](double s) {
            return *oracle_curvature(def, Eigen::Vector3d(a * std::sin(s), 0.0, c * std::cos(s))).k_mean;
        };
        if (std::sin(t) < 1e-4) {
            // Pole: Delta_M f = 2 f'' / w^2 for an even function of the meridian angle.
            const double tp = t < std::numbers::pi / 2 ? 0.0 : std::numbers::pi;
            const double w = std::hypot(m.drho(tp), m.dz(tp));
            return 2.0 * detail::fd2(k, tp, h) / (w * w);
        }
        return detail::revolution_laplacian(m, k, t, h);
    }
    if (def.name == "torus") {
        const double big = def.param("R"), r = def.param("r");
        const double t = std::atan2(p(2), rho_p - big);
        detail::Meridian m{[=](double s) { return big + r * std::cos(s); }, [=](double s) { return -r * std::sin(s); },
                           [=](double s) { return -r * std::cos(s); }, [=](double s) { return r * std::cos(s); },
                           [=](double s) { return -r * std::sin(s); }};
        auto k = [&](double s) {
            return -(big + 2.0 * r * std::cos(s)) / (2.0 * r * (big + r * std::cos(s)));
        };
        return detail::revolution_laplacian(m, k, t, h);
    }
    throw DomainError("no surface-of-revolution oracle for surface '" + def.name + "'");
}

enum class Quantity { mean, gauss, lap_mean };

/// Curvature quantities evaluated on the exact implicit polynomial.
class NumericOracle {
public:
    explicit NumericOracle(const SurfaceDef& def) : def_(def), jet_(def.implicit, DomainTransform::identity(3)) {
        if (!def.orientable) throw DomainError("no curvature oracle for the non-orientable surface '" + def.name + "'");
    }

    OracleValues operator()(const Eigen::Vector3d& x) const {
        const PointGeometry g = point_geometry(jet_, x, true);
        OracleValues o;
        o.normal = g.normal;
        o.k_mean = g.k_mean;
        o.k_gauss = g.k_gauss;
        o.lap_k_mean = g.lap_k_mean;
        return o;
    }

    double operator()(const Eigen::Vector3d& x, Quantity q) const {
        const OracleValues o = (*this)(x);
        switch (q) {
            case Quantity::mean: return *o.k_mean;
            case Quantity::gauss: return *o.k_gauss;
            case Quantity::lap_mean: return *o.lap_k_mean;
        }
        return 0.0;
    }

    const SurfaceJet& jet() const { return jet_; }

private:
    SurfaceDef def_;
    SurfaceJet jet_;
};

inline double oracle_numeric(const SurfaceDef& def, const Eigen::Vector3d& x, Quantity q) {
    return NumericOracle(def)(x, q);
}

/// Star-shaped surface |x| = r(theta, phi) with r = r0 + amp sin(3 theta) sin(2 phi),
/// theta the polar angle and phi the azimuth.
struct SyntheticSurface {
    double r0 = 0.7;
    double amp = 0.1;

    double radius(double theta, double phi) const { return r0 + amp * std::sin(3 * theta) * std::sin(2 * phi); }

    Eigen::Vector3d point(double theta, double phi) const {
        const double r = radius(theta, phi);
        return {r * std::sin(theta) * std::cos(phi), r * std::sin(theta) * std::sin(phi), r * std::cos(theta)};
    }

    /// Outward unit normal: gradient of |x| - r(theta(x), phi(x)).
    Eigen::Vector3d normal(double theta, double phi) const {
        const double st = std::sin(theta), ct = std::cos(theta), sp = std::sin(phi), cp = std::cos(phi);
        const double r = radius(theta, phi);
        const double r_theta = 3 * amp * std::cos(3 * theta) * std::sin(2 * phi);
        // (dr/dphi) / sin(theta), with sin(3t)/sin(t) = 3 - 4 sin^2(t)
        const double r_phi_over_st = amp * (3.0 - 4.0 * st * st) * 2.0 * std::cos(2 * phi);
        const Eigen::Vector3d e_r(st * cp, st * sp, ct);
        const Eigen::Vector3d e_t(ct * cp, ct * sp, -st);
        const Eigen::Vector3d e_p(-sp, cp, 0.0);
        return (e_r - (r_theta / r) * e_t - (r_phi_over_st / r) * e_p).normalized();
    }

    /// Points with uniformly distributed directions and their exact normals.
    SurfaceSample sample(std::size_t count, std::uint64_t seed) const {
        SurfaceSample s;
        s.points.resize(static_cast<Eigen::Index>(count), 3);
        s.normals.resize(static_cast<Eigen::Index>(count), 3);
        s.normal_valid.assign(count, true);
        s.attempts = count;
        for (std::size_t i = 0; i < count; ++i) {
            const double u = detail::counter_uniform(seed, i, 0);
            const double v = detail::counter_uniform(seed, i, 1);
            const double theta = std::acos(std::clamp(1.0 - 2.0 * u, -1.0, 1.0));
            const double phi = 2.0 * std::numbers::pi * v;
            s.points.row(static_cast<Eigen::Index>(i)) = point(theta, phi).transpose();
            s.normals.row(static_cast<Eigen::Index>(i)) = normal(theta, phi).transpose();
        }
        return s;
    }
};

inline SyntheticSurface synthetic_nonalgebraic(double r0 = 0.7, double amp = 0.1) { return {r0, amp}; }

}  // namespace gpls
