#pragma once

// File formats: XYZ/XYZN text and ASCII PLY point clouds, polynomial and surface JSON,
// curvature CSV, legacy-VTK scalar fields. All writes go through a temporary file and rename.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "gpls/error.hpp"
#include "gpls/geom.hpp"
#include "gpls/mindex.hpp"
#include "gpls/nodes.hpp"
#include "gpls/poly.hpp"
#include "gpls/variety.hpp"

namespace gpls::io {

using nlohmann::json;

/// Shortest decimal string that parses back to the same double.
inline std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Writes `content` to `path` via a sibling temporary file and an atomic rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw FormatError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw FormatError("cannot move output into place at '" + path.string() + "'");
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct PointCloud {
    Eigen::MatrixXd points;
    std::optional<Eigen::MatrixXd> normals;
};

namespace detail {

inline std::vector<double> parse_numbers(const std::string& line, std::size_t lineno, const std::string& source) {
    std::vector<double> out;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
        while (p < end && (*p == ' ' || *p == '\t' || *p == '\r' || *p == ',')) ++p;
        if (p >= end) break;
        double v = 0.0;
        if (*p == '+') ++p;
        const auto res = std::from_chars(p, end, v);
        if (res.ec != std::errc() || !std::isfinite(v))
            throw FormatError(source + ":" + std::to_string(lineno) + ": not a number");
        out.push_back(v);
        p = res.ptr;
    }
    return out;
}

inline PointCloud assemble(const std::vector<std::vector<double>>& rows, bool with_normals) {
    PointCloud c;
    const auto n = static_cast<Eigen::Index>(rows.size());
    c.points.resize(n, 3);
    if (with_normals) c.normals = Eigen::MatrixXd(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        for (int j = 0; j < 3; ++j) c.points(i, j) = r[static_cast<std::size_t>(j)];
        if (with_normals)
            for (int j = 0; j < 3; ++j) (*c.normals)(i, j) = r[static_cast<std::size_t>(3 + j)];
    }
    return c;
}

inline PointCloud parse_ply(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 1;
    std::size_t vertices = 0;
    bool in_vertex = false;
    std::vector<std::string> props;
    bool ascii = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "format") {
            std::string kind;
            ls >> kind;
            ascii = kind == "ascii";
            if (!ascii) throw FormatError(source + ": only ASCII PLY is supported");
        } else if (word == "element") {
            std::string name;
            ls >> name;
            in_vertex = name == "vertex";
            if (in_vertex) ls >> vertices;
        } else if (word == "property") {
            if (in_vertex) {
                std::string type, name;
                ls >> type;
                if (type == "list") throw FormatError(source + ": list properties on vertices are not supported");
                ls >> name;
                props.push_back(name);
            }
        } else if (word == "end_header") {
            break;
        }
    }
    if (!ascii) throw FormatError(source + ": missing PLY format line");
    auto find = [&](const char* name) -> int {
        for (std::size_t i = 0; i < props.size(); ++i)
            if (props[i] == name) return static_cast<int>(i);
        return -1;
    };
    const int ix = find("x"), iy = find("y"), iz = find("z");
    const int inx = find("nx"), iny = find("ny"), inz = find("nz");
    if (ix < 0 || iy < 0 || iz < 0) throw FormatError(source + ": PLY vertices lack x, y, z");
    const bool normals = inx >= 0 && iny >= 0 && inz >= 0;
    std::vector<std::vector<double>> rows;
    rows.reserve(vertices);
    while (rows.size() < vertices && std::getline(in, line)) {
        ++lineno;
        auto v = parse_numbers(line, lineno, source);
        if (v.empty()) continue;
        if (v.size() < props.size()) throw FormatError(source + ":" + std::to_string(lineno) + ": short vertex record");
        std::vector<double> r{v[static_cast<std::size_t>(ix)], v[static_cast<std::size_t>(iy)], v[static_cast<std::size_t>(iz)]};
        if (normals)
            for (int k : {inx, iny, inz}) r.push_back(v[static_cast<std::size_t>(k)]);
        rows.push_back(std::move(r));
    }
    if (rows.size() != vertices)
        throw FormatError(source + ": expected " + std::to_string(vertices) + " vertices, found " + std::to_string(rows.size()));
    return assemble(rows, normals);
}

}  // namespace detail

/// XYZ (3 columns) or XYZN (6 columns) text, or ASCII PLY. '#' starts a comment.
inline PointCloud parse_points(std::istream& in, const std::string& source = "<input>") {
    std::string first;
    std::streampos start = in.tellg();
    if (std::getline(in, first)) {
        std::string t = first;
        if (!t.empty() && t.back() == '\r') t.pop_back();
        if (t == "ply") return detail::parse_ply(in, source);
    }
    in.clear();
    in.seekg(start);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto v = detail::parse_numbers(line, lineno, source);
        if (v.empty()) continue;
        if (v.size() != 3 && v.size() != 6)
            throw FormatError(source + ":" + std::to_string(lineno) + ": expected 3 or 6 columns, got " +
                              std::to_string(v.size()));
        if (width == 0) width = v.size();
        if (v.size() != width)
            throw FormatError(source + ":" + std::to_string(lineno) + ": inconsistent column count");
        rows.push_back(std::move(v));
    }
    return detail::assemble(rows, width == 6);
}

inline PointCloud read_points(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path.string() + "'");
    return parse_points(in, path.string());
}

inline std::string format_points(const Eigen::MatrixXd& points, const Eigen::MatrixXd* normals = nullptr) {
    std::string out;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (int j = 0; j < 3; ++j) {
            if (j) out += ' ';
            out += fmt(points(i, j));
        }
        if (normals)
            for (int j = 0; j < 3; ++j) {
                out += ' ';
                out += fmt((*normals)(i, j));
            }
        out += '\n';
    }
    return out;
}

inline void write_points(const std::filesystem::path& path, const Eigen::MatrixXd& points,
                         const Eigen::MatrixXd* normals = nullptr) {
    write_atomic(path, format_points(points, normals));
}

// ---- polynomial and surface records ----

inline json polynomial_to_json(const Polynomial& p) {
    const auto& set = p.index_set();
    json j;
    j["m"] = set.dim();
    j["n"] = set.degree();
    j["p"] = set.norm().to_string();
    j["basis"] = to_string(p.basis());
    json idx = json::array();
    for (std::size_t k = 0; k < set.size(); ++k) idx.push_back(set.index(k));
    j["index_set"] = std::move(idx);
    if (p.grid()) j["generating_points"] = p.grid()->generating_points();
    j["coefficients"] = std::vector<double>(p.coefficients().data(), p.coefficients().data() + p.coefficients().size());
    return j;
}

inline Polynomial polynomial_from_json(const json& j) {
    try {
        const int m = j.at("m").get<int>();
        const int n = j.at("n").get<int>();
        const LpDegree p = LpDegree::parse(j.at("p").is_string() ? j.at("p").get<std::string>()
                                                                 : std::to_string(j.at("p").get<int>()));
        auto set = std::make_shared<const MultiIndexSet>(build_index_set(m, n, p));
        const auto idx = j.at("index_set").get<std::vector<std::vector<int>>>();
        if (idx.size() != set->size()) throw FormatError("polynomial record: index_set does not match (m, n, p)");
        for (std::size_t k = 0; k < idx.size(); ++k)
            if (idx[k] != set->index(k)) throw FormatError("polynomial record: index_set is not A_{m,n,p} in lex order");
        const auto c = j.at("coefficients").get<std::vector<double>>();
        Eigen::VectorXd coeffs = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
        const Basis b = parse_basis(j.at("basis").get<std::string>());
        if (b == Basis::canonical) return Polynomial::canonical(set, std::move(coeffs));
        auto grid = build_grid(set, j.at("generating_points").get<std::vector<std::vector<double>>>());
        return b == Basis::newton ? Polynomial::newton(grid, std::move(coeffs)) : Polynomial::lagrange(grid, std::move(coeffs));
    } catch (const json::exception& e) {
        throw FormatError(std::string("polynomial record: ") + e.what());
    } catch (const DomainError& e) {
        throw FormatError(std::string("polynomial record: ") + e.what());
    }
}

inline json surface_to_json(const GplsSurface& s) {
    json j = polynomial_to_json(s.q);
    j["rank"] = s.rank;
    j["corank"] = s.corank;
    j["anchor_indices"] = s.anchor_indices;
    j["transform"] = {{"scale", s.transform.scale},
                      {"translation", std::vector<double>(s.transform.translation.data(),
                                                          s.transform.translation.data() + s.transform.translation.size())}};
    j["fit_report"] = {{"max_residual", s.report.max_residual},
                       {"mode", to_string(s.report.mode)},
                       {"rank_tol", s.report.rank_tol},
                       {"warnings", s.report.warnings}};
    return j;
}

inline GplsSurface surface_from_json(const json& j) {
    GplsSurface s;
    s.q = to_canonical(polynomial_from_json(j));
    try {
        s.rank = j.value("rank", Eigen::Index{0});
        s.corank = j.value("corank", Eigen::Index{0});
        s.anchor_indices = j.value("anchor_indices", std::vector<Eigen::Index>{});
        const auto& t = j.at("transform");
        s.transform.scale = t.at("scale").get<double>();
        const auto tr = t.at("translation").get<std::vector<double>>();
        if (static_cast<int>(tr.size()) != s.q.dim()) throw FormatError("surface record: translation has wrong length");
        if (!(s.transform.scale > 0.0)) throw FormatError("surface record: transform scale must be positive");
        s.transform.translation = Eigen::Map<const Eigen::VectorXd>(tr.data(), static_cast<Eigen::Index>(tr.size()));
        if (j.contains("fit_report")) {
            const auto& r = j.at("fit_report");
            s.report.max_residual = r.value("max_residual", 0.0);
            s.report.mode = parse_fit_mode(r.value("mode", std::string("kernel-corank1")));
            s.report.rank_tol = r.value("rank_tol", 0.0);
            s.report.warnings = r.value("warnings", std::vector<std::string>{});
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("surface record: ") + e.what());
    }
    return s;
}

inline GplsSurface read_surface(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
    return surface_from_json(j);
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_atomic(path, j.dump(2) + "\n"); }

// ---- curvature report ----

inline std::string curvature_csv(const CurvatureReport& r) {
    std::string out = "x,y,z,grad_norm,k_mean,k_gauss";
    if (r.has_laplacian) out += ",lap_k_mean";
    if (r.has_oracle) {
        out += ",oracle_k_mean,err_k_mean,oracle_k_gauss,err_k_gauss";
        if (r.has_laplacian) out += ",oracle_lap_k_mean,err_lap_k_mean";
    }
    out += '\n';
    auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
    auto err = [](double a, const std::optional<double>& v) { return v ? fmt(std::abs(a - *v)) : std::string(); };
    for (const auto& rec : r.records) {
        const auto& g = rec.geometry;
        out += fmt(rec.point(0)) + ',' + fmt(rec.point(1)) + ',' + fmt(rec.point(2)) + ',' + fmt(g.grad_norm) + ',' +
               fmt(g.k_mean) + ',' + fmt(g.k_gauss);
        if (r.has_laplacian) out += ',' + opt(g.lap_k_mean);
        if (r.has_oracle) {
            const OracleValues o = rec.oracle.value_or(OracleValues{});
            out += ',' + opt(o.k_mean) + ',' + err(g.k_mean, o.k_mean) + ',' + opt(o.k_gauss) + ',' + err(g.k_gauss, o.k_gauss);
            if (r.has_laplacian)
                out += ',' + opt(o.lap_k_mean) + ',' + (g.lap_k_mean ? err(*g.lap_k_mean, o.lap_k_mean) : std::string());
        }
        out += '\n';
    }
    return out;
}

inline json curvature_summary(const CurvatureReport& r) {
    auto stats = [](const ErrorStats& s) {
        return json{{"count", s.count}, {"linf", s.max_abs}, {"mean", s.mean_abs}};
    };
    json j;
    j["points"] = r.records.size();
    j["degenerate_indices"] = r.degenerate;
    if (r.has_oracle) {
        j["errors"]["k_mean"] = stats(r.err_k_mean);
        j["errors"]["k_gauss"] = stats(r.err_k_gauss);
        if (r.has_laplacian) j["errors"]["lap_k_mean"] = stats(r.err_lap_k_mean);
    }
    return j;
}

// ---- scalar field export ----

/// q sampled on a res^3 lattice over [-1,1]^3 (model coordinates), legacy VTK ASCII.
inline std::string vtk_structured_points(const Polynomial& q, int res) {
    if (res < 2) throw DomainError("grid export: resolution must be at least 2");
    if (q.dim() != 3) throw DomainError("grid export: polynomial must be three-dimensional");
    const double h = 2.0 / (res - 1);
    const auto n = static_cast<std::size_t>(res);
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(n * n * n), 3);
    Eigen::Index row = 0;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i, ++row)
                pts.row(row) << -1.0 + h * static_cast<double>(i), -1.0 + h * static_cast<double>(j),
                    -1.0 + h * static_cast<double>(k);
    const Eigen::VectorXd v = eval_many(q, pts);
    std::string out = "# vtk DataFile Version 3.0\ngpls level-set polynomial\nASCII\nDATASET STRUCTURED_POINTS\n";
    out += "DIMENSIONS " + std::to_string(res) + ' ' + std::to_string(res) + ' ' + std::to_string(res) + '\n';
    out += "ORIGIN -1 -1 -1\n";
    out += "SPACING " + fmt(h) + ' ' + fmt(h) + ' ' + fmt(h) + '\n';
    out += "POINT_DATA " + std::to_string(v.size()) + "\nSCALARS q double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out += fmt(v(i));
        out += '\n';
    }
    return out;
}

}  // namespace gpls::io
