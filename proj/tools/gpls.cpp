// gpls: command-line front end.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gpls/gpls.hpp"

#ifndef GPLS_DEFAULT_BENCH_CONFIG
#define GPLS_DEFAULT_BENCH_CONFIG "bench/tables.json"
#endif

namespace {

using gpls::io::json;
namespace fs = std::filesystem;

enum Exit : int { ok = 0, usage = 2, data = 3, numerical = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("'" + item + "' is not a number");
        }
    }
    return out;
}

gpls::io::PointCloud load_points(const std::string& path) {
    auto cloud = gpls::io::read_points(path);
    if (cloud.points.rows() == 0) throw UsageError("point file '" + path + "' contains no points");
    return cloud;
}

std::shared_ptr<const gpls::MultiIndexSet> index_set(int degree, const std::string& lp) {
    return std::make_shared<const gpls::MultiIndexSet>(gpls::build_index_set(3, degree, gpls::LpDegree::parse(lp)));
}

void warn(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

// ---- subcommands ----

struct SampleArgs {
    std::string surface, params, out;
    std::size_t n = 0;
    std::uint64_t seed = 1;
};

int cmd_sample(const SampleArgs& a) {
    const auto def = gpls::catalog_lookup(a.surface, gpls::parse_params(a.params));
    const auto s = gpls::sample_surface(def, a.n, a.seed);
    const auto flagged = static_cast<std::size_t>(std::count(s.normal_valid.begin(), s.normal_valid.end(), false));
    if (flagged > 0) std::cerr << "warning: " << flagged << " points have no normal (degenerate gradient); written as 0 0 0\n";
    gpls::io::write_points(a.out, s.points, &s.normals);
    return ok;
}

struct FitVarietyArgs {
    std::string points, lp = "2", mode = "kernel-corank1", out;
    int degree = 2;
    double rank_tol = 1e-8;
    bool no_transform = false;
};

int cmd_fit_variety(const FitVarietyArgs& a) {
    const auto cloud = load_points(a.points);
    gpls::GplsOptions opt;
    opt.mode = gpls::parse_fit_mode(a.mode);
    if (opt.mode == gpls::FitMode::signed_distance) throw UsageError("use fit-sdf for signed-distance fits");
    opt.rank_tol = a.rank_tol;
    opt.transform = a.no_transform ? gpls::TransformPolicy::identity : gpls::TransformPolicy::fit_to_box;
    const auto s = gpls::build_gpls(cloud.points, index_set(a.degree, a.lp), opt);
    warn(s.report.warnings);
    gpls::io::write_json(a.out, gpls::io::surface_to_json(s));
    std::cerr << "rank " << s.rank << ", corank " << s.corank << ", max residual " << s.report.max_residual << '\n';
    return ok;
}

struct FitSdfArgs {
    std::string points, offsets = "0.005,0.01,0.035", lp = "2", out;
    int degree = 9;
    double ridge = 0.0;
    bool estimate = false;
    int neighbours = 16;
};

int cmd_fit_sdf(const FitSdfArgs& a) {
    const auto cloud = load_points(a.points);
    Eigen::MatrixXd normals;
    if (cloud.normals) {
        normals = *cloud.normals;
    } else if (a.estimate) {
        std::cerr << "warning: normals estimated from " << a.neighbours << " nearest neighbours\n";
        normals = gpls::estimate_normals(cloud.points, a.neighbours);
    } else {
        throw gpls::FormatError("'" + a.points + "' has no normals (XYZN or PLY with nx,ny,nz required; or pass --estimate-normals)");
    }
    const auto offsets = parse_list(a.offsets);
    // fit_sdf throws on the collapsed fit, so its own warning would never be printed
    if (offsets.empty()) std::cerr << "warning: no offsets given; the fit will collapse to the zero polynomial\n";
    const auto band = gpls::build_band(cloud.points, normals, offsets);
    if (band.dropped > 0) std::cerr << "note: " << band.dropped << " band points left the domain and were dropped\n";
    gpls::SdfOptions opt;
    opt.ridge = a.ridge;
    const auto s = gpls::fit_sdf(band, index_set(a.degree, a.lp), opt);
    warn(s.report.warnings);
    gpls::io::write_json(a.out, gpls::io::surface_to_json(s));
    std::cerr << "band points " << band.size() << ", max residual " << s.report.max_residual << '\n';
    return ok;
}

struct CurvatureArgs {
    std::string surface, points, oracle, oracle_params, out, summary;
    bool laplacian = false;
};

int cmd_curvature(const CurvatureArgs& a) {
    const auto s = gpls::io::read_surface(a.surface);
    const auto cloud = load_points(a.points);
    const gpls::SurfaceJet jet(s);
    gpls::Oracle oracle;
    if (!a.oracle.empty()) {
        const auto def = gpls::catalog_lookup(a.oracle, gpls::parse_params(a.oracle_params));
        if (!def.orientable) throw UsageError("no curvature oracle for the non-orientable surface '" + def.name + "'");
        oracle = gpls::bench::reference_oracle(def, a.laplacian);
    }
    const auto report = gpls::curvature_report(jet, cloud.points, a.laplacian, oracle);
    if (!report.degenerate.empty())
        std::cerr << "warning: " << report.degenerate.size() << " points skipped (degenerate gradient)\n";
    gpls::io::write_atomic(a.out, gpls::io::curvature_csv(report));
    const std::string summary = a.summary.empty() ? fs::path(a.out).replace_extension(".json").string() : a.summary;
    gpls::io::write_json(summary, gpls::io::curvature_summary(report));
    return ok;
}

struct EvalArgs {
    std::string surface, points, out;
};

int cmd_eval(const EvalArgs& a) {
    const auto s = gpls::io::read_surface(a.surface);
    const auto cloud = load_points(a.points);
    const gpls::SurfaceJet jet(s);
    double mean = 0.0;
    const double e_inf = gpls::bench::max_projection_distance(jet, cloud.points, &mean);
    double residual = 0.0;
    for (Eigen::Index i = 0; i < cloud.points.rows(); ++i)
        residual = std::max(residual, std::abs(s.eval_user(cloud.points.row(i).transpose())));
    json j{{"points", cloud.points.rows()}, {"E_inf", e_inf}, {"E_mean", mean}, {"max_abs_q", residual}};
    gpls::io::write_json(a.out, j);
    std::cout << "E_inf " << gpls::io::fmt(e_inf) << " / E_mean " << gpls::io::fmt(mean) << '\n';
    return ok;
}

struct GridArgs {
    std::string surface, out;
    int res = 64;
};

int cmd_grid_export(const GridArgs& a) {
    if (a.res < 2) throw UsageError("--res must be at least 2");
    const auto s = gpls::io::read_surface(a.surface);
    gpls::io::write_atomic(a.out, gpls::io::vtk_structured_points(s.q, a.res));
    return ok;
}

struct BenchArgs {
    std::string table = "1", out, config = GPLS_DEFAULT_BENCH_CONFIG, external_data, external_name = "bunny";
    std::optional<std::uint64_t> seed;
};

std::vector<gpls::bench::BenchResult> external_recipe(const BenchArgs& a, std::uint64_t seed) {
    // Sub-sample 4000 points, build the band with the default offsets and sweep n = 8..12.
    auto cloud = load_points(a.external_data);
    const Eigen::Index total = cloud.points.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(total));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const Eigen::Index keep = std::min<Eigen::Index>(4000, total);
    Eigen::MatrixXd pts(keep, 3), nrm(keep, 3);
    const Eigen::MatrixXd normals = cloud.normals ? *cloud.normals : gpls::estimate_normals(cloud.points);
    for (Eigen::Index i = 0; i < keep; ++i) {
        pts.row(i) = cloud.points.row(order[static_cast<std::size_t>(i)]);
        nrm.row(i) = normals.row(order[static_cast<std::size_t>(i)]);
    }
    const auto band = gpls::build_band(pts, nrm, gpls::default_band_offsets());
    std::vector<gpls::bench::BenchResult> out;
    for (int n = 8; n <= 12; ++n)
        for (const char* lp : {"1", "2", "inf"}) {
            const auto fit = gpls::fit_sdf(band, index_set(n, lp));
            const gpls::SurfaceJet jet(fit);
            double mean = 0.0;
            const double e_inf = gpls::bench::max_projection_distance(jet, cloud.points, &mean);
            for (const auto& [metric, v] : {std::pair{"E_inf", e_inf}, std::pair{"E_mean", mean}}) {
                gpls::bench::BenchResult r;
                r.surface = a.external_name;
                r.params = fs::path(a.external_data).filename().string();
                r.n = static_cast<std::size_t>(keep);
                r.degree = n;
                r.lp = gpls::LpDegree::parse(lp).to_string();
                r.metric = metric;
                r.measured = v;
                out.push_back(r);
            }
        }
    return out;
}

int cmd_bench(const BenchArgs& a) {
    json config;
    try {
        config = json::parse(gpls::io::read_file(a.config));
    } catch (const json::parse_error& e) {
        throw gpls::FormatError("bench config '" + a.config + "': " + e.what());
    }
    const std::uint64_t seed = a.seed ? *a.seed : config.value("seed", std::uint64_t{1});
    std::vector<gpls::bench::BenchResult> rows;
    if (!a.external_data.empty()) {
        rows = external_recipe(a, seed);
    } else {
        std::vector<std::string> tables;
        if (a.table == "all")
            tables = {"1", "2", "3", "sweep"};
        else
            tables = {a.table};
        for (const auto& t : tables) {
            auto r = gpls::bench::run_table(config, t, seed);
            rows.insert(rows.end(), r.begin(), r.end());
        }
    }
    std::string csv = gpls::bench::csv_header() + '\n';
    bool all_pass = true;
    for (const auto& r : rows) {
        csv += gpls::bench::csv_line(r) + '\n';
        all_pass = all_pass && r.pass;
    }
    if (a.out.empty() || a.out == "-")
        std::cout << csv;
    else
        gpls::io::write_atomic(a.out, csv);
    return all_pass ? ok : numerical;
}

int exit_code(const gpls::Error& e) {
    switch (e.kind()) {
        case gpls::ErrorKind::domain: return usage;
        case gpls::ErrorKind::format: return data;
        case gpls::ErrorKind::numerical: return numerical;
    }
    return numerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Global polynomial level sets: surface reconstruction and curvature"};
    app.require_subcommand(1);

    SampleArgs sa;
    auto* sample = app.add_subcommand("sample", "Sample points and normals on a catalog surface (XYZN)");
    sample->add_option("--surface", sa.surface, "ellipsoid, sphere, biconcave, torus, genus2, klein")->required();
    sample->add_option("--params", sa.params, "key=value list, e.g. R=0.5,r=0.3");
    sample->add_option("--n", sa.n, "number of points")->required()->check(CLI::PositiveNumber);
    sample->add_option("--seed", sa.seed, "random seed");
    sample->add_option("--out", sa.out, "output XYZN file")->required();

    FitVarietyArgs fv;
    auto* fitv = app.add_subcommand("fit-variety", "Level-set polynomial through samples of an algebraic surface");
    fitv->add_option("--points", fv.points, "XYZ, XYZN or PLY input")->required();
    fitv->add_option("--degree", fv.degree, "degree n")->required()->check(CLI::NonNegativeNumber);
    fitv->add_option("--lp", fv.lp, "1, 2 or inf");
    fitv->add_option("--mode", fv.mode, "kernel-corank1 or lagrange-sum");
    fitv->add_option("--rank-tol", fv.rank_tol, "relative pivot threshold")->check(CLI::PositiveNumber);
    fitv->add_flag("--no-transform", fv.no_transform, "use the input coordinates as model coordinates");
    fitv->add_option("--out", fv.out, "surface JSON")->required();

    FitSdfArgs fs_;
    auto* fits = app.add_subcommand("fit-sdf", "Narrow-band signed-distance fit of a non-algebraic surface");
    fits->add_option("--points", fs_.points, "XYZN or PLY with normals")->required();
    fits->add_option("--offsets", fs_.offsets, "comma list of band offsets (model units); empty for none");
    fits->add_option("--degree", fs_.degree, "degree n")->check(CLI::NonNegativeNumber);
    fits->add_option("--lp", fs_.lp, "1, 2 or inf");
    fits->add_option("--ridge", fs_.ridge, "Tikhonov weight")->check(CLI::NonNegativeNumber);
    fits->add_flag("--estimate-normals", fs_.estimate, "estimate missing normals from nearest neighbours");
    fits->add_option("--neighbours", fs_.neighbours, "neighbour count for normal estimation")->check(CLI::Range(3, 1000));
    fits->add_option("--out", fs_.out, "surface JSON")->required();

    CurvatureArgs ca;
    auto* curv = app.add_subcommand("curvature", "Mean and Gauss curvature (and Laplacian of mean curvature) at points");
    curv->add_option("--surface", ca.surface, "surface JSON")->required();
    curv->add_option("--points", ca.points, "evaluation points")->required();
    curv->add_option("--oracle", ca.oracle, "catalog surface providing reference values");
    curv->add_option("--oracle-params", ca.oracle_params, "parameters of the oracle surface");
    curv->add_flag("--laplacian", ca.laplacian, "also compute the Laplacian of mean curvature");
    curv->add_option("--out", ca.out, "per-point CSV")->required();
    curv->add_option("--summary", ca.summary, "summary JSON (default: CSV path with .json)");

    EvalArgs ea;
    auto* ev = app.add_subcommand("eval", "Distances of points to the zero set of a fit");
    ev->add_option("--surface", ea.surface, "surface JSON")->required();
    ev->add_option("--points", ea.points, "points to project")->required();
    ev->add_option("--out", ea.out, "JSON report")->required();

    GridArgs ga;
    auto* grid = app.add_subcommand("grid-export", "Sample q on a regular lattice over [-1,1]^3 (legacy VTK)");
    grid->add_option("--surface", ga.surface, "surface JSON")->required();
    grid->add_option("--res", ga.res, "lattice points per axis (>= 2)");
    grid->add_option("--out", ga.out, "VTK file")->required();

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Reproduce the benchmark tables");
    bench->add_option("--table", ba.table, "1, 2, 3, sweep or all")->check(CLI::IsMember({"1", "2", "3", "sweep", "all"}));
    bench->add_option("--seed", ba.seed, "override the configured seed");
    bench->add_option("--config", ba.config, "bench configuration JSON");
    bench->add_option("--out", ba.out, "CSV output (default stdout)");
    bench->add_option("--external-data", ba.external_data, "scan file (XYZN/PLY) for the external-dataset recipe");
    bench->add_option("--external-name", ba.external_name, "label of the external dataset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    try {
        if (*sample) return cmd_sample(sa);
        if (*fitv) return cmd_fit_variety(fv);
        if (*fits) return cmd_fit_sdf(fs_);
        if (*curv) return cmd_curvature(ca);
        if (*ev) return cmd_eval(ea);
        if (*grid) return cmd_grid_export(ga);
        if (*bench) return cmd_bench(ba);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    } catch (const gpls::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return numerical;
    }
    return usage;
}
