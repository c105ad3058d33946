// End-to-end acceptance suite. Each test case checks one numbered
// criterion and prints a single PASS/FAIL line for it.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "netflux/errors.hpp"
#include "netflux/hdg.hpp"
#include "netflux/output.hpp"
#include "netflux/time_integration.hpp"

using namespace netflux;

namespace {

void report(int n, const char* name, bool ok) {
    std::printf("criterion %d (%s): %s\n", n, name, ok ? "PASS" : "FAIL");
    std::fflush(stdout);
    CHECK(ok);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

NetworkGeometry maze_geometry() {
    const std::string dir = std::string(NETFLUX_DATA_DIR) + "/maze_3_data";
    return build_geometry(parse_points(read_file(dir + "/points.csv")),
                          parse_lines(read_file(dir + "/lines.csv")), 50.0);
}

HdgSystem make_system(const NetworkGeometry& geo, const SimulationConfig& cfg, double h) {
    auto problem = build_problem(cfg.model, cfg);
    auto conditions = resolve_conditions(geo, problem, &cfg);
    std::vector<DomainParams> params;
    for (std::size_t a = 0; a < geo.arcs.size(); ++a)
        params.push_back(apply_domain_overrides(cfg, static_cast<int>(a),
                                                static_cast<int>(geo.arcs.size())));
    return HdgSystem(geo, problem, h, std::move(conditions), std::move(params));
}

NetworkGeometry two_arc_chain() {
    std::vector<TaggedPoint> pts = {{"B01", 0, 0}, {"J01", 1, 0}, {"B02", 2, 0}};
    return build_geometry(pts, {{"B01", "J01"}, {"J01", "B02"}}, 1.0);
}

// Monolithic reference layout: element interiors in order, then the trace
// and multiplier unknowns. Independent of the condensation path.
struct Mono {
    const HdgSystem& sys;
    std::vector<int> ioff;
    int n_interior = 0;

    explicit Mono(const HdgSystem& s) : sys(s) {
        ioff.resize(sys.disc().n_elements());
        for (int k = 0; k < sys.disc().n_elements(); ++k) {
            ioff[k] = n_interior;
            n_interior += sys.interior_size();
        }
    }
    int total() const { return n_interior + sys.disc().n_unknowns(); }

    Eigen::VectorXd flatten(const SystemState& st) const {
        Eigen::VectorXd x(total());
        for (int k = 0; k < sys.disc().n_elements(); ++k)
            x.segment(ioff[k], sys.interior_size()) = st.bulk.elem[k];
        x.segment(n_interior, sys.disc().n_traces) = st.traces;
        x.tail(sys.disc().n_multipliers) = st.multipliers;
        return x;
    }
    SystemState unflatten(const Eigen::VectorXd& x, const SystemState& like) const {
        SystemState st = like;
        for (int k = 0; k < sys.disc().n_elements(); ++k)
            st.bulk.elem[k] = x.segment(ioff[k], sys.interior_size());
        st.traces = x.segment(n_interior, sys.disc().n_traces);
        st.multipliers = x.tail(sys.disc().n_multipliers);
        return st;
    }
    Eigen::VectorXd residual(const BulkState& prev, const SystemState& st, double dt,
                             double t_next) const {
        auto locals = sys.assemble_all_locals(prev, st, dt, t_next);
        Eigen::VectorXd r(total());
        for (int k = 0; k < sys.disc().n_elements(); ++k)
            r.segment(ioff[k], sys.interior_size()) = locals[k].ri;
        r.tail(sys.disc().n_unknowns()) = sys.trace_residual(locals, st, t_next);
        return r;
    }
    int trace_row(int arc, int eq, int node) const {
        return n_interior + sys.disc().trace_index(arc, eq, node);
    }

    Eigen::MatrixXd jacobian(const BulkState& prev, const SystemState& st, double dt,
                             double t_next) const {
        auto locals = sys.assemble_all_locals(prev, st, dt, t_next);
        const auto& disc = sys.disc();
        const auto& geo = sys.geometry();
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(total(), total());
        const int nb = sys.boundary_size();
        for (int k = 0; k < disc.n_elements(); ++k) {
            const auto& el = disc.elements[k];
            std::vector<int> tcols(nb);
            for (int e = 0; e < sys.problem().n_equations; ++e) {
                tcols[sys.b_index(e, 0)] = trace_row(el.arc, e, el.node_left);
                tcols[sys.b_index(e, 1)] = trace_row(el.arc, e, el.node_right);
            }
            J.block(ioff[k], ioff[k], sys.interior_size(), sys.interior_size()) = locals[k].Aii;
            for (int j = 0; j < nb; ++j) {
                J.col(tcols[j]).segment(ioff[k], sys.interior_size()) += locals[k].Aib.col(j);
                for (int i = 0; i < nb; ++i) J(tcols[i], tcols[j]) += locals[k].Abb(i, j);
            }
            for (int i = 0; i < nb; ++i)
                J.row(tcols[i]).segment(ioff[k], sys.interior_size()) += locals[k].Abi.row(i);
        }
        for (int cn = 0; cn < static_cast<int>(disc.constrained.size()); ++cn) {
            const auto& node = disc.constrained[cn];
            for (int e = 0; e < sys.problem().n_equations; ++e)
                J(trace_row(node.arc, e, node.node),
                  n_interior + disc.multiplier_index(cn, e)) += 1.0;
        }
        for (int c = 0; c < static_cast<int>(geo.connections.size()); ++c) {
            const auto& conn = geo.connections[c];
            auto cn_of = [&](int m) {
                return disc.constrained_at(conn.members[m].arc_id, disc.member_node(c, m));
            };
            auto tcol = [&](int m, int e) {
                return trace_row(conn.members[m].arc_id, e, disc.member_node(c, m));
            };
            auto lcol = [&](int m, int e) {
                return n_interior + disc.multiplier_index(cn_of(m), e);
            };
            for (int e = 0; e < sys.problem().n_equations; ++e) {
                const auto& rc = sys.conditions()[c][e];
                if (rc.kind == ResolvedCondition::Kind::Boundary) {
                    J(lcol(0, e), tcol(0, e)) += rc.alpha;
                    J(lcol(0, e), lcol(0, e)) += rc.beta;
                } else if (rc.kind == ResolvedCondition::Kind::Continuity) {
                    for (int m = 1; m < static_cast<int>(conn.members.size()); ++m) {
                        J(lcol(m, e), tcol(0, e)) += 1.0;
                        J(lcol(m, e), tcol(m, e)) -= 1.0;
                    }
                    for (int m = 0; m < static_cast<int>(conn.members.size()); ++m)
                        J(lcol(0, e), lcol(m, e)) += 1.0;
                } else {
                    J(lcol(0, e), lcol(0, e)) += 1.0;
                    J(lcol(0, e), tcol(0, e)) -= rc.omega_kk;
                    J(lcol(0, e), tcol(1, e)) += rc.omega_kk;
                    J(lcol(1, e), lcol(0, e)) += 1.0;
                    J(lcol(1, e), lcol(1, e)) += 1.0;
                }
            }
        }
        return J;
    }
};

SystemState perturbed_state(const HdgSystem& sys, unsigned seed) {
    SystemState st = sys.initial_state(0.0);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(-0.05, 0.05);
    for (auto& v : st.bulk.elem)
        for (int i = 0; i < v.size(); ++i) v[i] += d(rng);
    for (int i = 0; i < st.traces.size(); ++i) st.traces[i] += d(rng);
    for (int i = 0; i < st.multipliers.size(); ++i) st.multipliers[i] += d(rng);
    return st;
}

// max over entries of |J - Jfd| / max(1, |J|, |Jfd|)
double jacobian_fd_mismatch(const HdgSystem& sys, unsigned seed) {
    Mono mono(sys);
    auto prev = sys.initial_state(0.0);
    auto st = perturbed_state(sys, seed);
    const double dt = 0.3, t_next = 0.3;
    const Eigen::MatrixXd J = mono.jacobian(prev.bulk, st, dt, t_next);
    const Eigen::VectorXd x0 = mono.flatten(st);
    double worst = 0.0;
    for (int j = 0; j < mono.total(); ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x0[j]));
        Eigen::VectorXd xp = x0, xm = x0;
        xp[j] += h;
        xm[j] -= h;
        const Eigen::VectorXd col =
            (mono.residual(prev.bulk, mono.unflatten(xp, st), dt, t_next) -
             mono.residual(prev.bulk, mono.unflatten(xm, st), dt, t_next)) /
            (2.0 * h);
        for (int i = 0; i < mono.total(); ++i) {
            const double denom = std::max({1.0, std::abs(J(i, j)), std::abs(col[i])});
            worst = std::max(worst, std::abs(J(i, j) - col[i]) / denom);
        }
    }
    return worst;
}

struct HeatRun {
    HdgSystem sys;
    SystemState state;
};

HeatRun run_heat(double length, double h, double dt, double t_final) {
    std::vector<TaggedPoint> pts = {{"B01", 0, 0}, {"B02", length, 0}};
    auto geo = build_geometry(pts, {{"B01", "B02"}}, 1.0);
    auto problem = make_diffusion_problem(1.0, 1.0, 1);
    std::vector<DomainParams> params(1);
    params[0].initial = {ResolvedFunction(
        "ic", [length](double s, double) { return std::cos(M_PI * s / length); })};
    params[0].sources = {ResolvedFunction{}};
    HdgSystem sys(geo, problem, h, resolve_conditions(geo, problem), std::move(params));
    auto st = sys.initial_state(0.0);
    const int n = std::max(1, static_cast<int>(std::llround(t_final / dt)));
    NewtonConfig ncfg;
    advance_fixed(sys, st, t_final / n, n, ncfg);
    return {std::move(sys), std::move(st)};
}

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

double arc_mass(const HdgSystem& sys, const SystemState& st, int eq, int arc) {
    const int off = sys.eq_offset(eq);
    double mass = 0.0;
    const auto& disc = sys.disc();
    for (int k = 0; k < disc.n_elements(); ++k) {
        const auto& el = disc.elements[k];
        if (el.arc != arc) continue;
        const Eigen::VectorXd& u = st.bulk.elem[k];
        mass += el.h * 0.5 * (u[off] + u[off + 1]);
    }
    return mass;
}

const char* kDiffusionOnlyKs =
    "model = \"ks\"\n"
    "[physical]\nnu = 1.0\nmu = 1.5\na = 0.0\nb = 0.0\n"
    "chi = \"constant\"\nchi0 = 0.0\n"
    "[initial]\nu = \"1+0.5*sin(3*s)\"\nphi = \"0.5+0.25*cos(2*s)\"\n";

}  // namespace

TEST_CASE("condensation matches the monolithic solve") {
    // 2 arcs of unit length at h = 0.5: exactly 4 elements
    auto cfg = load_config(
        "model = \"ks\"\n[physical]\nnu = 1.0\nmu = 2.0\na = 0.5\nb = 0.25\n"
        "chi = \"receptor_saturation\"\nk1 = 0.3\nk2 = 0.8\n"
        "[initial]\nu = \"0.5+0.25*sin(s)\"\nphi = \"1+0.5*cos(s)\"\n",
        "ks");
    auto sys = make_system(two_arc_chain(), cfg, 0.5);
    REQUIRE(sys.disc().n_elements() == 4);
    Mono mono(sys);
    auto prev = sys.initial_state(0.0);
    auto st = perturbed_state(sys, 11);
    const double dt = 0.25, t_next = 0.25;

    const Eigen::MatrixXd J = mono.jacobian(prev.bulk, st, dt, t_next);
    const Eigen::VectorXd r = mono.residual(prev.bulk, st, dt, t_next);
    const Eigen::VectorXd delta_mono = J.partialPivLu().solve(-r);

    auto locals = sys.assemble_all_locals(prev.bulk, st, dt, t_next);
    std::vector<CondensedElement> cond(locals.size());
    for (std::size_t k = 0; k < locals.size(); ++k) cond[k] = condense(locals[k]);
    auto gs = sys.assemble_global(cond, st, t_next);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(gs.J);
    REQUIRE(lu.info() == Eigen::Success);
    const Eigen::VectorXd delta_tr = lu.solve(-gs.R);

    const int nt = sys.disc().n_traces;
    double worst =
        (delta_tr - delta_mono.tail(sys.disc().n_unknowns())).cwiseAbs().maxCoeff();
    for (int k = 0; k < sys.disc().n_elements(); ++k) {
        const Eigen::VectorXd du = sys.gather_element_traces(delta_tr.head(nt), k);
        const Eigen::VectorXd dbulk = HdgSystem::recover_bulk_delta(cond[k], du);
        worst = std::max(
            worst,
            (dbulk - delta_mono.segment(mono.ioff[k], sys.interior_size())).cwiseAbs().maxCoeff());
    }
    report(1, "condensation equals monolithic step", worst < 1e-10);
}

TEST_CASE("assembled Jacobian matches central finite differences") {
    auto ks = load_config(
        "model = \"ks\"\n[physical]\nnu = 200.0\nmu = 900.0\na = 1e-4\nb = 0.2\n"
        "chi = \"receptor_saturation\"\nk1 = 3.9e-9\nk2 = 5e-6\n"
        "[initial]\nu = \"0.5+0.25*sin(s)\"\nphi = \"1+0.5*cos(s)\"\n",
        "ks");
    const double mismatch_ks = jacobian_fd_mismatch(make_system(two_arc_chain(), ks, 0.4), 7);

    auto ooc = load_config(
        "model = \"ooc\"\n[physical]\nnu = 1.0\nepsilon = 2.0\nsigma = 0.1\nmu = 1.5\n"
        "a = 0.3\nb = 0.2\nc = 0.4\nd = 0.1\n"
        "chi = \"receptor_saturation\"\nk1 = 0.5\nk2 = 0.8\nm1 = 0.6\nm2 = 1.2\n"
        "[initial]\nu = \"0.5+0.2*sin(s)\"\nomega = \"0.8+0.1*cos(s)\"\n"
        "v = \"0.4+0.1*sin(2*s)\"\nphi = \"0.6+0.2*cos(2*s)\"\n",
        "ooc");
    const double mismatch_ooc = jacobian_fd_mismatch(make_system(two_arc_chain(), ooc, 0.4), 13);

    report(2, "Jacobian vs finite differences", mismatch_ks < 1e-5 && mismatch_ooc < 1e-5);
}

TEST_CASE("heat equation convergence orders") {
    const double length = 1.0, t_final = 0.1;
    const double h0 = length / 8.0, dt0 = t_final / 25.0;
    const int levels = 4;
    const double decay = std::exp(-M_PI * M_PI * t_final);
    const auto exact = [&](double s) { return decay * std::cos(M_PI * s); };

    // spatial sweep at dt ~ h^2
    std::vector<double> eh;
    for (int k = 0; k < levels; ++k) {
        auto run = run_heat(length, h0 / std::pow(2.0, k), dt0 / std::pow(4.0, k), t_final);
        eh.push_back(l2_error(run.sys, run.state, exact));
    }
    double min_space_order = 1e9;
    for (int k = 1; k < levels; ++k)
        min_space_order = std::min(min_space_order, std::log2(eh[k - 1] / eh[k]));

    // temporal sweep on a fixed fine mesh against a small-dt reference
    const double h = h0 / 8.0;
    auto ref = run_heat(length, h, dt0 / std::pow(2.0, levels + 4), t_final);
    std::vector<double> et;
    for (int k = 0; k < levels; ++k) {
        auto run = run_heat(length, h, dt0 / std::pow(2.0, k), t_final);
        double err2 = 0.0;
        const auto& disc = run.sys.disc();
        for (int e = 0; e < disc.n_elements(); ++e) {
            const auto& E = cached_matrices(1, disc.elements[e].h);
            const Eigen::Vector2d d =
                run.state.bulk.elem[e].head<2>() - ref.state.bulk.elem[e].head<2>();
            err2 += d.dot(E.M * d);
        }
        et.push_back(std::sqrt(err2));
    }
    double min_time_order = 1e9, max_time_order = -1e9;
    for (int k = 1; k < levels; ++k) {
        const double order = std::log2(et[k - 1] / et[k]);
        min_time_order = std::min(min_time_order, order);
        max_time_order = std::max(max_time_order, order);
    }

    std::printf("  spatial order >= %.3f, temporal order in [%.3f, %.3f]\n", min_space_order,
                min_time_order, max_time_order);
    report(3, "convergence orders",
           min_space_order >= 1.9 && min_time_order >= 0.9 && max_time_order <= 1.1);
}

TEST_CASE("mass conservation on the maze") {
    auto cfg = load_config(
        "model = \"ooc\"\n"
        "[physical]\nnu = 200.0\nepsilon = 900.0\nsigma = 1e-9\nmu = 900.0\n"
        "a = 0.0\nb = 0.0\nc = 0.0\nd = 0.0\n"
        "chi = \"constant\"\nchi0 = 0.0\nm1 = 0.0\nm2 = 1.0\n"
        "[initial]\nu = \"1+0.5*sin(0.05*s)\"\n",
        "ooc");
    auto geo = maze_geometry();
    auto sys = make_system(geo, cfg, 30.0);
    auto st = sys.initial_state(0.0);
    const double m0 = compute_mass(sys, st, 0);

    bool drift_ok = true, split_ok = true;
    NewtonConfig ncfg;
    advance_fixed(sys, st, 5.0, 20, ncfg, 1,
                  [&](const SystemState& s, const StepRecord&) {
                      auto rep = compute_mass_report(sys, s, 0);
                      if (std::abs(rep.total - m0) > 1e-8 * std::abs(m0)) drift_ok = false;
                      if (std::abs(rep.left + rep.right - rep.total) >
                          1e-12 * std::max(1.0, std::abs(rep.total)))
                          split_ok = false;
                  });
    report(4, "maze mass conservation", drift_ok && split_ok);
}

TEST_CASE("adaptive step controller factors") {
    const double lo = 1e-6, hi = 1e6;
    bool ok = true;
    const int n[] = {1, 8, 9, 14, 15, 30};
    const double f[] = {1.2, 1.2, 1.0, 1.0, 0.8, 0.8};
    for (int i = 0; i < 6; ++i)
        ok = ok && adapt_dt(2.0, true, n[i], lo, hi) == 2.0 * f[i];
    // failure branch: halve and retry from the unchanged previous state
    ok = ok && adapt_dt(2.0, false, 25, lo, hi) == 1.0;

    // nonlinear chemotaxis instance: a starved Newton budget rejects the
    // first oversized attempt
    auto cfg = load_config(
        "model = \"ks\"\n[physical]\nnu = 1.0\nmu = 2.0\na = 0.5\nb = 0.25\n"
        "chi = \"receptor_saturation\"\nk1 = 0.3\nk2 = 0.8\n"
        "[initial]\nu = \"0.5+0.25*sin(s)\"\nphi = \"1+0.5*cos(s)\"\n",
        "ks");
    auto sys = make_system(two_arc_chain(), cfg, 0.25);
    auto st = sys.initial_state(0.0);
    TimeConfig tc;
    tc.t_final = 0.4;
    tc.dt_init = 0.4;
    tc.adaptive = true;
    tc.newton.max_iterations = 2;
    tc.newton.eps_abs = 1e-12;
    auto recs = advance_adaptive(sys, st, tc);
    bool saw_retry = false;
    for (std::size_t i = 0; i + 1 < recs.size(); ++i)
        if (!recs[i].accepted && recs[i + 1].dt == 0.5 * recs[i].dt) saw_retry = true;
    report(5, "adapt_dt table and retry", ok && saw_retry);
}

TEST_CASE("maze scenario sanity") {
    auto cfg = load_config(read_file(std::string(NETFLUX_DATA_DIR) + "/config/ooc_maze.toml"),
                           "ooc");
    auto geo = maze_geometry();
    auto sys = make_system(geo, cfg, 30.0);
    auto st = sys.initial_state(0.0);

    const int eq_u = 0, eq_v = 2;
    const double v0 = compute_mass(sys, st, eq_v);
    REQUIRE(v0 > 0.0);

    // 10 adaptive steps
    double t = 0.0, dt = cfg.time.dt_init;
    const double dt_min = cfg.time.dt_min_factor * cfg.time.dt_init;
    const double dt_max = cfg.time.dt_max_factor * cfg.time.dt_init;
    for (int step = 0; step < 10; ++step) {
        const BulkState prev = st.bulk;
        auto nr = newton_solve(sys, prev, st, t + dt, cfg.time.newton);
        REQUIRE(nr.converged);
        t += dt;
        dt = adapt_dt(dt, true, nr.iterations, dt_min, dt_max);
    }

    // arcs adjacent to domain 17 share a node with it
    std::set<int> near = {17};
    for (const auto& conn : geo.connections) {
        bool touches = false;
        for (const auto& m : conn.members) touches = touches || m.arc_id == 17;
        if (touches)
            for (const auto& m : conn.members) near.insert(m.arc_id);
    }
    double v_near = 0.0;
    for (int a : near) v_near += arc_mass(sys, st, eq_v, a);
    const double v_total = compute_mass(sys, st, eq_v);

    int u_positive_elsewhere = 0;
    for (int a = 0; a < static_cast<int>(geo.arcs.size()); ++a)
        if (a != 28 && arc_mass(sys, st, eq_u, a) > 0.0) ++u_positive_elsewhere;

    std::printf("  v localisation %.6f, v drift %.3e, u spread to %d arcs\n", v_near / v0,
                std::abs(v_total - v0) / v0, u_positive_elsewhere);
    report(6, "maze scenario",
           v_near >= 0.999 * v0 && std::abs(v_total - v0) <= 1e-6 * v0 &&
               u_positive_elsewhere >= 3);
}

TEST_CASE("junction constraints") {
    // 3-arc star with default trace continuity
    std::vector<TaggedPoint> pts = {
        {"B01", 0, 0}, {"J01", 1, 0}, {"B02", 2, 0.75}, {"B03", 2, -0.75}};
    auto star_geo = build_geometry(pts, {{"B01", "J01"}, {"J01", "B02"}, {"J01", "B03"}}, 1.0);
    auto cfg = load_config(kDiffusionOnlyKs, "ks");
    auto sys = make_system(star_geo, cfg, 0.3);
    auto st = sys.initial_state(0.0);
    NewtonConfig ncfg;
    ncfg.eps_abs = 1e-12;
    advance_fixed(sys, st, 0.1, 3, ncfg);

    bool star_ok = true;
    const auto& disc = sys.disc();
    for (int c = 0; c < static_cast<int>(star_geo.connections.size()); ++c) {
        const auto& conn = star_geo.connections[c];
        if (conn.kind != NodeKind::Junction) continue;
        for (int e = 0; e < 2; ++e) {
            double lam_sum = 0.0, u0 = 0.0;
            for (int m = 0; m < static_cast<int>(conn.members.size()); ++m) {
                const int node = disc.member_node(c, m);
                const double u = st.traces[disc.trace_index(conn.members[m].arc_id, e, node)];
                if (m == 0) u0 = u;
                if (std::abs(u - u0) > 1e-10) star_ok = false;
                const int cn = disc.constrained_at(conn.members[m].arc_id, node);
                lam_sum += st.multipliers[disc.multiplier_index(cn, e) - disc.n_traces];
            }
            if (std::abs(lam_sum) > 1e-10) star_ok = false;
        }
    }

    // Kedem-Katchalsky with omega = 0 decouples the two arcs
    auto kk_cfg = load_config(std::string(kDiffusionOnlyKs) +
                                  "[junctions.J01]\ntype = \"kedem_katchalsky\"\nomega_kk = 0.0\n",
                              "ks");
    auto chain = make_system(two_arc_chain(), kk_cfg, 0.25);
    auto chain_st = chain.initial_state(0.0);
    advance_fixed(chain, chain_st, 0.05, 5, ncfg);

    std::vector<TaggedPoint> single_pts = {{"B01", 0, 0}, {"B02", 1, 0}};
    auto single_geo = build_geometry(single_pts, {{"B01", "B02"}}, 1.0);
    auto single = make_system(single_geo, load_config(kDiffusionOnlyKs, "ks"), 0.25);
    auto single_st = single.initial_state(0.0);
    advance_fixed(single, single_st, 0.05, 5, ncfg);

    double kk_diff = 0.0;
    const auto& cd = chain.disc();
    const auto& sd = single.disc();
    const int epa = sd.n_elements();  // elements per arc, identical meshes
    REQUIRE(cd.n_elements() == 2 * epa);
    for (int a = 0; a < 2; ++a) {
        for (int e = 0; e < 2; ++e)
            for (int i = 0; i < sd.meshes[0].n_nodes(); ++i)
                kk_diff = std::max(kk_diff,
                                   std::abs(chain_st.traces[cd.trace_index(a, e, i)] -
                                            single_st.traces[sd.trace_index(0, e, i)]));
        for (int k = 0; k < epa; ++k)
            kk_diff = std::max(kk_diff, (chain_st.bulk.elem[a * epa + k] -
                                         single_st.bulk.elem[k])
                                            .cwiseAbs()
                                            .maxCoeff());
    }
    report(7, "junction constraints", star_ok && kk_diff < 1e-9);
}

TEST_CASE("parser corpus and maze dataset") {
    bool ok = true;

    auto e1 = parse_expression("2.5 + 0.0*s");
    ok = ok && e1->kind == Expression::Kind::Binary && e1->op == '+';
    ok = ok && e1->evaluate(0.0, 0.0) == 2.5 && e1->evaluate(123.0, 7.0) == 2.5;

    auto e2 = parse_expression("sin(2*pi*s)");
    ok = ok && e2->kind == Expression::Kind::Call && e2->callee == "sin";
    ok = ok && std::abs(e2->evaluate(0.25, 0.0) - 1.0) < 1e-15;
    ok = ok && std::abs(e2->evaluate(0.5, 0.0) - std::sin(M_PI)) < 1e-15;
    ok = ok && e2->evaluate(0.0, 0.0) == 0.0;

    auto geo = maze_geometry();
    ok = ok && geo.arcs.size() == 29;
    for (const auto& arc : geo.arcs) ok = ok && arc.length >= 50.0 && arc.length <= 300.0;

    report(8, "parser corpus and maze dataset", ok);
}
