// Command line front end: run simulations, check convergence orders,
// validate configurations and render network geometry.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "netflux/errors.hpp"
#include "netflux/output.hpp"
#include "netflux/time_integration.hpp"

namespace fs = std::filesystem;
using namespace netflux;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitOrder = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct GeometryCliArgs {
    std::string points;
    std::string lines;
    double length_scale = 0.0;  // 0 = take from config
};

/// CLI paths win over the [geometry] block; relative config paths resolve
/// against the config file's directory.
NetworkGeometry load_geometry(const GeometryCliArgs& cli, const SimulationConfig& cfg,
                              const std::string& config_path) {
    std::string points = cli.points, lines = cli.lines;
    double scale = cli.length_scale;
    if (points.empty() || lines.empty()) {
        if (!cfg.geometry)
            throw ConfigError("no geometry: pass --points/--lines or add a [geometry] table");
        const fs::path base = config_path.empty() ? fs::path(".")
                                                  : fs::path(config_path).parent_path();
        auto resolve_path = [&](const std::string& p) {
            return fs::path(p).is_absolute() ? p : (base / p).string();
        };
        if (points.empty()) points = resolve_path(cfg.geometry->points_path);
        if (lines.empty()) lines = resolve_path(cfg.geometry->lines_path);
        if (scale <= 0.0) scale = cfg.geometry->length_scale;
    }
    if (scale <= 0.0) scale = 1.0;
    return build_geometry(parse_points(read_file(points)), parse_lines(read_file(lines)), scale);
}

HdgSystem build_system(const NetworkGeometry& geo, const SimulationConfig& cfg,
                       double h_override = 0.0) {
    auto problem = build_problem(cfg.model, cfg);
    auto conditions = resolve_conditions(geo, problem, &cfg);
    std::vector<DomainParams> params;
    for (std::size_t a = 0; a < geo.arcs.size(); ++a)
        params.push_back(apply_domain_overrides(cfg, static_cast<int>(a),
                                                static_cast<int>(geo.arcs.size())));
    return HdgSystem(geo, std::move(problem), h_override > 0.0 ? h_override : cfg.h_target,
                     std::move(conditions), std::move(params));
}

/// P1 interpolation of the bulk solution of `eq` at local coordinate s.
double sample_bulk(const HdgSystem& sys, const SystemState& st, int arc, int eq, double s) {
    const auto& disc = sys.disc();
    const auto& mesh = disc.meshes[arc];
    int lo = 0;
    for (int i = 0; i + 2 < mesh.n_nodes(); ++i)
        if (s >= mesh.nodes[i + 1]) lo = i + 1;
    const int k = disc.arc_elem_offset[arc] + lo;
    const auto& el = disc.elements[k];
    const double x = (s - el.s_left) / el.h;
    const Eigen::VectorXd& u = st.bulk.elem[k];
    const int off = sys.eq_offset(eq);
    return u[off] * (1.0 - x) + u[off + 1] * x;
}

int cmd_run(const std::string& config_path, const std::string& model,
            const GeometryCliArgs& geo_args, int steps, double t_final, bool adaptive,
            bool fixed, const std::string& out_dir, int snapshot_every, bool render, bool force,
            int threads) {
    // Validate everything before writing a single byte.
    auto cfg = load_config(read_file(config_path), model);
    auto geo = load_geometry(geo_args, cfg, config_path);
    if (!geo.disconnected_tags.empty())
        std::cerr << "warning: network is not connected (e.g. near '"
                  << geo.disconnected_tags.front() << "')\n";
    if (t_final > 0.0) cfg.time.t_final = t_final;
    if (adaptive) cfg.time.adaptive = true;
    if (fixed) cfg.time.adaptive = false;
    if (steps > 0) cfg.time.adaptive = false;
    auto sys = build_system(geo, cfg);

    const fs::path out(out_dir);
    if (fs::exists(out) && !fs::is_directory(out))
        throw ConfigError("--out '" + out_dir + "' exists and is not a directory");
    if (fs::exists(out) && !fs::is_empty(out) && !force)
        throw ConfigError("--out '" + out_dir + "' is not empty (use --force to overwrite)");
    fs::create_directories(out);

    auto st = sys.initial_state(0.0);
    int snap_id = 0;
    auto maybe_snapshot = [&](const SystemState& s, const StepRecord& rec) {
        if (snapshot_every > 0 && rec.accepted && (rec.step + 1) % snapshot_every == 0) {
            char name[64];
            std::snprintf(name, sizeof name, "snapshot_%04d.csv", snap_id++);
            export_snapshot(sys, s, (out / name).string());
        }
    };

    std::vector<StepRecord> records;
    if (cfg.time.adaptive) {
        records = advance_adaptive(sys, st, cfg.time, threads, maybe_snapshot);
    } else {
        const int n = steps > 0
                          ? steps
                          : static_cast<int>(std::ceil(cfg.time.t_final / cfg.time.dt_init));
        const double dt = steps > 0 ? cfg.time.dt_init : cfg.time.t_final / n;
        records = advance_fixed(sys, st, dt, n, cfg.time.newton, threads, maybe_snapshot);
    }

    export_snapshot(sys, st, (out / "final.csv").string());
    export_diagnostics(records, (out / "diagnostics.csv").string());
    if (render) {
        for (int e = 0; e < sys.problem().n_equations; ++e)
            render_birdview_file(sys, st, e,
                                 (out / ("birdview_" + sys.problem().equations[e].name + ".svg"))
                                     .string());
        render_geometry_file(geo, (out / "geometry.svg").string());
    }

    int accepted = 0;
    for (const auto& r : records) accepted += r.accepted ? 1 : 0;
    std::cout << "t = " << st.time << ", steps accepted " << accepted << "/" << records.size()
              << "\n";
    for (int e = 0; e < sys.problem().n_equations; ++e)
        std::cout << "mass[" << sys.problem().equations[e].name
                  << "] = " << compute_mass(sys, st, e) << "\n";
    return kExitOk;
}

/// Built-in refinement scenario: heat equation on one straight arc of
/// length L with no-flux ends; u(s,t) = exp(-D (pi/L)^2 t) cos(pi s / L).
struct HeatRun {
    HdgSystem sys;
    SystemState state;
};

HeatRun run_heat(double length, double diffusivity, double h, double dt, double t_final,
                 int threads) {
    std::vector<TaggedPoint> pts = {{"B01", 0, 0}, {"B02", length, 0}};
    auto geo = build_geometry(pts, {{"B01", "B02"}}, 1.0);
    auto problem = make_diffusion_problem(diffusivity, 1.0, 1);
    std::vector<DomainParams> params(1);
    params[0].initial = {ResolvedFunction(
        "ic", [length](double s, double) { return std::cos(M_PI * s / length); })};
    params[0].sources = {ResolvedFunction{}};
    HdgSystem sys(geo, problem, h, resolve_conditions(geo, problem), std::move(params));
    auto st = sys.initial_state(0.0);
    const int n = std::max(1, static_cast<int>(std::llround(t_final / dt)));
    NewtonConfig ncfg;
    advance_fixed(sys, st, t_final / n, n, ncfg, threads);
    return {std::move(sys), std::move(st)};
}

/// Elementwise 5-point Gauss L2 norm of (u_h - ref), ref given pointwise.
double l2_error(const HdgSystem& sys, const SystemState& st,
                const std::function<double(double)>& ref) {
    double err2 = 0.0;
    const auto& disc = sys.disc();
    for (int k = 0; k < disc.n_elements(); ++k) {
        const auto& el = disc.elements[k];
        const auto& E = cached_matrices(1, el.h);
        const Eigen::VectorXd& u = st.bulk.elem[k];
        for (int q = 0; q < E.quad_nodes.size(); ++q) {
            const double x = E.quad_nodes[q] / el.h;
            const double uh = u[0] * (1.0 - x) + u[1] * x;
            err2 += E.quad_weights[q] * std::pow(uh - ref(el.s_left + E.quad_nodes[q]), 2);
        }
    }
    return std::sqrt(err2);
}

int cmd_convergence(const std::string& mode, int levels, double h0, double dt0, double length,
                    double diffusivity, double t_final, double min_order, int threads) {
    if (levels < 2) throw ConfigError("--levels must be at least 2");
    if (h0 <= 0.0) h0 = length / 8.0;
    if (dt0 <= 0.0) dt0 = t_final / 25.0;
    const double decay = std::exp(-diffusivity * std::pow(M_PI / length, 2) * t_final);
    const auto exact = [&](double s) { return decay * std::cos(M_PI * s / length); };

    std::vector<double> errors;
    if (mode == "h") {
        for (int k = 0; k < levels; ++k) {
            // dt ~ h^2 keeps the first-order-in-time error subordinate
            auto run = run_heat(length, diffusivity, h0 / std::pow(2.0, k),
                                dt0 / std::pow(4.0, k), t_final, threads);
            errors.push_back(l2_error(run.sys, run.state, exact));
        }
    } else {
        const double h = h0 / 8.0;  // fine fixed mesh
        auto ref = run_heat(length, diffusivity, h, dt0 / std::pow(2.0, levels + 4), t_final,
                            threads);
        for (int k = 0; k < levels; ++k) {
            auto run = run_heat(length, diffusivity, h, dt0 / std::pow(2.0, k), t_final, threads);
            // same mesh: compare against the small-dt reference to cancel
            // the shared spatial error
            double err2 = 0.0;
            const auto& disc = run.sys.disc();
            for (int e = 0; e < disc.n_elements(); ++e) {
                const auto& el = disc.elements[e];
                const auto& E = cached_matrices(1, el.h);
                const Eigen::Vector2d d =
                    run.state.bulk.elem[e].head<2>() - ref.state.bulk.elem[e].head<2>();
                err2 += d.dot(E.M * d);
            }
            errors.push_back(std::sqrt(err2));
        }
    }

    std::printf("%-10s %-14s %-10s\n", mode == "h" ? "h" : "dt", "l2_error", "order");
    double worst = 1e9;
    for (int k = 0; k < levels; ++k) {
        const double param =
            mode == "h" ? h0 / std::pow(2.0, k) : dt0 / std::pow(2.0, k);
        if (k == 0) {
            std::printf("%-10.5g %-14.6e %-10s\n", param, errors[k], "-");
        } else {
            const double order = std::log2(errors[k - 1] / errors[k]);
            std::printf("%-10.5g %-14.6e %-10.3f\n", param, errors[k], order);
            worst = std::min(worst, order);
        }
    }
    if (worst < min_order) {
        std::cerr << "observed order " << worst << " below required " << min_order << "\n";
        return kExitOrder;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"network reaction-diffusion-chemotaxis solver"};
    app.require_subcommand(1);

    std::string config_path, model, out_dir, plot_out, mode = "h";
    GeometryCliArgs geo_args;
    int steps = 0, snapshot_every = 0, threads = 1, levels = 4;
    double t_final = 0.0, h0 = 0.0, dt0 = 0.0, min_order = 1.9;
    bool adaptive = false, fixed = false, render = false, force = false;

    auto add_geo_opts = [&](CLI::App* c) {
        c->add_option("--points", geo_args.points, "points.csv path (overrides config)");
        c->add_option("--lines", geo_args.lines, "lines.csv path (overrides config)");
        c->add_option("--length-scale", geo_args.length_scale, "length scale override");
    };

    auto* run = app.add_subcommand("run", "run a simulation");
    run->add_option("--config", config_path, "TOML configuration")->required();
    run->add_option("--model", model, "ks | ooc (defaults to the config's model)");
    add_geo_opts(run);
    run->add_option("--steps", steps, "fixed step count (disables adaptivity)");
    run->add_option("--t-final", t_final, "override final time");
    run->add_flag("--adaptive", adaptive, "force the adaptive controller on");
    run->add_flag("--fixed", fixed, "force fixed steps");
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--snapshot-every", snapshot_every, "CSV snapshot every N accepted steps");
    run->add_flag("--render", render, "write SVG renders");
    run->add_flag("--force", force, "allow writing into a non-empty directory");
    run->add_option("--threads", threads, "assembly threads");

    double conv_length = 2.0, conv_diffusivity = 1.0, conv_t_final = 0.5;
    auto* conv = app.add_subcommand(
        "convergence", "refinement study on the built-in single-arc heat scenario");
    conv->add_option("--mode", mode, "h (spatial) or dt (temporal)")
        ->check(CLI::IsMember({"h", "dt"}));
    conv->add_option("--levels", levels, "number of refinement levels");
    conv->add_option("--h0", h0, "coarsest h (default: length/8)");
    conv->add_option("--dt0", dt0, "coarsest dt (default: t_final/25)");
    conv->add_option("--length", conv_length, "arc length");
    conv->add_option("--diffusivity", conv_diffusivity, "diffusion coefficient");
    conv->add_option("--t-final", conv_t_final, "horizon of the study");
    conv->add_option("--min-order", min_order, "required observed order");
    conv->add_option("--threads", threads, "assembly threads");

    auto* val = app.add_subcommand("validate-config", "parse and echo a configuration");
    val->add_option("--config", config_path, "TOML configuration")->required();
    val->add_option("--model", model, "expected model");

    auto* plot = app.add_subcommand("plot-geometry", "render the network to SVG");
    add_geo_opts(plot);
    plot->add_option("--out", plot_out, "output SVG path")->required();

    auto* geom = app.add_subcommand("geometry", "geometry utilities");
    auto* describe = geom->add_subcommand("describe", "print arcs and connections");
    add_geo_opts(describe);
    geom->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) {
            if (steps > 0 && adaptive)
                throw ConfigError("--steps and --adaptive are mutually exclusive");
            return cmd_run(config_path, model, geo_args, steps, t_final, adaptive, fixed,
                           out_dir, snapshot_every, render, force, threads);
        }
        if (conv->parsed()) {
            if (mode == "dt" && min_order == 1.9) min_order = 0.9;
            return cmd_convergence(mode, levels, h0, dt0, conv_length, conv_diffusivity,
                                   conv_t_final, min_order, threads);
        }
        if (val->parsed()) {
            auto cfg = load_config(read_file(config_path), model);
            std::cout << config_to_toml(cfg);
            return kExitOk;
        }
        if (plot->parsed()) {
            if (geo_args.points.empty() || geo_args.lines.empty())
                throw ConfigError("plot-geometry requires --points and --lines");
            const double scale = geo_args.length_scale > 0.0 ? geo_args.length_scale : 1.0;
            auto geo = build_geometry(parse_points(read_file(geo_args.points)),
                                      parse_lines(read_file(geo_args.lines)), scale);
            render_geometry_file(geo, plot_out);
            return kExitOk;
        }
        if (describe->parsed()) {
            if (geo_args.points.empty() || geo_args.lines.empty())
                throw ConfigError("geometry describe requires --points and --lines");
            const double scale = geo_args.length_scale > 0.0 ? geo_args.length_scale : 1.0;
            auto geo = build_geometry(parse_points(read_file(geo_args.points)),
                                      parse_lines(read_file(geo_args.lines)), scale);
            std::cout << describe_geometry(geo);
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const GeometryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
