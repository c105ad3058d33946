#include "netflux/hdg.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "netflux/errors.hpp"

namespace netflux {

ConditionTable resolve_conditions(const NetworkGeometry& geo, const ProblemSpec& problem,
                                  const SimulationConfig* cfg) {
    const int n_eq = problem.n_equations;
    ConditionTable table(geo.connections.size(), std::vector<ResolvedCondition>(n_eq));
    for (std::size_t c = 0; c < geo.connections.size(); ++c) {
        const auto& conn = geo.connections[c];
        for (int e = 0; e < n_eq; ++e) {
            ResolvedCondition& rc = table[c][e];
            if (conn.kind == NodeKind::Boundary) {
                rc.kind = ResolvedCondition::Kind::Boundary;
                rc.alpha = 0.0;
                rc.beta = 1.0;  // homogeneous Neumann by default
            } else {
                rc.kind = ResolvedCondition::Kind::Continuity;
            }
        }
        if (!cfg) continue;
        const std::string& eq_name_base = conn.node_tag;  // keyed by tag
        if (conn.kind == NodeKind::Boundary) {
            auto it = cfg->boundary.find(eq_name_base);
            if (it == cfg->boundary.end()) continue;
            for (const auto& [eq_name, bc] : it->second) {
                ResolvedCondition& rc = table[c][cfg->equation_index(eq_name)];
                rc.kind = ResolvedCondition::Kind::Boundary;
                rc.alpha = bc.alpha;
                rc.beta = bc.beta;
                rc.g = bc.g;
            }
        } else {
            auto it = cfg->junctions.find(eq_name_base);
            if (it == cfg->junctions.end()) continue;
            for (const auto& [eq_name, jc] : it->second) {
                ResolvedCondition& rc = table[c][cfg->equation_index(eq_name)];
                if (jc.type == JunctionConditionConfig::Type::KedemKatchalsky) {
                    if (conn.members.size() != 2)
                        throw ConfigError("junctions." + conn.node_tag +
                                          ": Kedem-Katchalsky requires exactly 2 arcs, node has " +
                                          std::to_string(conn.members.size()));
                    rc.kind = ResolvedCondition::Kind::KedemKatchalsky;
                    rc.omega_kk = jc.omega_kk;
                } else {
                    rc.kind = ResolvedCondition::Kind::Continuity;
                }
            }
        }
    }
    return table;
}

HdgSystem::HdgSystem(NetworkGeometry geometry, ProblemSpec problem, double h_target,
                     ConditionTable conditions, std::vector<DomainParams> arc_params)
    : geometry_(std::move(geometry)),
      problem_(std::move(problem)),
      disc_(build_discretization(geometry_, h_target, problem_.n_equations)),
      conditions_(std::move(conditions)),
      arc_params_(std::move(arc_params)) {
    if (conditions_.empty()) conditions_ = resolve_conditions(geometry_, problem_);
    if (arc_params_.empty()) {
        DomainParams zero;
        zero.initial.assign(problem_.n_equations, ResolvedFunction{});
        zero.sources.assign(problem_.n_equations, ResolvedFunction{});
        arc_params_.assign(geometry_.arcs.size(), zero);
    }
    if (conditions_.size() != geometry_.connections.size())
        throw SolverError("condition table does not match geometry connections");
    if (arc_params_.size() != geometry_.arcs.size())
        throw SolverError("per-arc parameter table does not match geometry arcs");
    for (const auto& dp : arc_params_)
        if (static_cast<int>(dp.initial.size()) != problem_.n_equations ||
            static_cast<int>(dp.sources.size()) != problem_.n_equations)
            throw SolverError("per-arc parameter table has wrong equation count");
    eq_offset_.resize(problem_.n_equations);
    int off = 0;
    for (int e = 0; e < problem_.n_equations; ++e) {
        eq_offset_[e] = off;
        off += 2 + (problem_.equations[e].flux_order == 0 ? 1 : 2);
    }
    interior_size_ = off;
    if (problem_.chemo_attractant_eq >= 0 &&
        problem_.equations[problem_.chemo_attractant_eq].flux_order != 1)
        throw SolverError("chemotaxis requires a P1 flux for the attractant equation");
}

HdgSystem::HdgSystem(NetworkGeometry geometry, ProblemSpec problem, double h_target)
    : HdgSystem(std::move(geometry), std::move(problem), h_target, ConditionTable{},
                std::vector<DomainParams>{}) {}

SystemState HdgSystem::initial_state(double t0) const {
    SystemState st;
    st.time = t0;
    st.traces = Eigen::VectorXd::Zero(disc_.n_traces);
    st.multipliers = Eigen::VectorXd::Zero(disc_.n_multipliers);
    st.bulk.time = t0;
    st.bulk.elem.resize(disc_.n_elements());

    const int n_eq = problem_.n_equations;
    for (int a = 0; a < static_cast<int>(geometry_.arcs.size()); ++a) {
        const auto& mesh = disc_.meshes[a];
        for (int e = 0; e < n_eq; ++e) {
            const auto& ic = arc_params_[a].initial[e];
            for (int i = 0; i < mesh.n_nodes(); ++i)
                st.traces[disc_.trace_index(a, e, i)] = ic(mesh.nodes[i], t0);
        }
    }
    for (int k = 0; k < disc_.n_elements(); ++k) {
        const auto& el = disc_.elements[k];
        Eigen::VectorXd x = Eigen::VectorXd::Zero(interior_size_);
        for (int e = 0; e < n_eq; ++e) {
            const auto& ic = arc_params_[el.arc].initial[e];
            x[eq_offset_[e] + 0] = ic(el.s_left, t0);
            x[eq_offset_[e] + 1] = ic(el.s_left + el.h, t0);
        }
        st.bulk.elem[k] = std::move(x);
    }
    return st;
}

Eigen::VectorXd HdgSystem::gather_element_traces(const Eigen::VectorXd& traces, int elem) const {
    const auto& el = disc_.elements[elem];
    Eigen::VectorXd out(boundary_size());
    for (int e = 0; e < problem_.n_equations; ++e) {
        out[b_index(e, 0)] = traces[disc_.trace_index(el.arc, e, el.node_left)];
        out[b_index(e, 1)] = traces[disc_.trace_index(el.arc, e, el.node_right)];
    }
    return out;
}

LocalBlocks HdgSystem::assemble_local(int elem, const BulkState& prev, const SystemState& iterate,
                                      double dt, double t_next) const {
    if (dt <= 0.0) throw SolverError("assemble_local: dt must be positive");
    const auto& el = disc_.elements[elem];
    const int n_eq = problem_.n_equations;
    const int ni = interior_size_;
    const int nb = boundary_size();

    const Eigen::VectorXd& x = iterate.bulk.elem[elem];
    const Eigen::VectorXd& xp = prev.elem[elem];
    const Eigen::VectorXd uhat = gather_element_traces(iterate.traces, elem);

    LocalBlocks lb;
    lb.Aii = Eigen::MatrixXd::Zero(ni, ni);
    lb.Aib = Eigen::MatrixXd::Zero(ni, nb);
    lb.Abi = Eigen::MatrixXd::Zero(nb, ni);
    lb.Abb = Eigen::MatrixXd::Zero(nb, nb);
    lb.ri = Eigen::VectorXd::Zero(ni);
    lb.rb = Eigen::VectorXd::Zero(nb);

    // Per-equation diffusion, stabilisation and trace coupling.
    for (int e = 0; e < n_eq; ++e) {
        const auto& eq = problem_.equations[e];
        const ElementMatrices& E = cached_matrices(eq.flux_order, el.h);
        const int off = eq_offset_[e];
        const int nq = E.n_flux();
        const auto u = x.segment<2>(off);
        const auto up = xp.segment<2>(off);
        const auto q = x.segment(off + 2, nq);
        const double uhat_l = uhat[b_index(e, 0)];
        const double uhat_r = uhat[b_index(e, 1)];
        const double q_l = E.Nq.row(0).dot(q);
        const double q_r = E.Nq.row(1).dot(q);

        // u-rows: mass/dt - int q w' + [q w nu] + tau (u - uhat) w|endpoints
        Eigen::Vector2d ru = (E.M * (u - up)) / dt - E.Cuq * q;
        ru[0] += -q_l + eq.tau * (u[0] - uhat_l);
        ru[1] += q_r + eq.tau * (u[1] - uhat_r);
        lb.ri.segment<2>(off) += ru;

        lb.Aii.block<2, 2>(off, off) += E.M / dt + eq.tau * Eigen::Matrix2d::Identity();
        lb.Aii.block(off, off + 2, 2, nq) -= E.Cuq;
        lb.Aii.block(off, off + 2, 1, nq) -= E.Nq.row(0);
        lb.Aii.block(off + 1, off + 2, 1, nq) += E.Nq.row(1);
        lb.Aib(off + 0, b_index(e, 0)) -= eq.tau;
        lb.Aib(off + 1, b_index(e, 1)) -= eq.tau;

        // q-rows: D^-1 Mq q - int u psi' + [uhat psi nu]
        Eigen::VectorXd rq = (E.Mq * q) / eq.diffusivity - E.Cqu * u;
        for (int j = 0; j < nq; ++j) rq[j] += E.Nq(1, j) * uhat_r - E.Nq(0, j) * uhat_l;
        lb.ri.segment(off + 2, nq) += rq;

        lb.Aii.block(off + 2, off + 2, nq, nq) += E.Mq / eq.diffusivity;
        lb.Aii.block(off + 2, off, nq, 2) -= E.Cqu;
        for (int j = 0; j < nq; ++j) {
            lb.Aib(off + 2 + j, b_index(e, 1)) += E.Nq(1, j);
            lb.Aib(off + 2 + j, b_index(e, 0)) -= E.Nq(0, j);
        }

        // boundary rows: outward numerical flux q nu + tau (u - uhat)
        lb.rb[b_index(e, 0)] += -q_l + eq.tau * (u[0] - uhat_l);
        lb.rb[b_index(e, 1)] += q_r + eq.tau * (u[1] - uhat_r);
        lb.Abi.block(b_index(e, 0), off + 2, 1, nq) -= E.Nq.row(0);
        lb.Abi.block(b_index(e, 1), off + 2, 1, nq) += E.Nq.row(1);
        lb.Abi(b_index(e, 0), off + 0) += eq.tau;
        lb.Abi(b_index(e, 1), off + 1) += eq.tau;
        lb.Abb(b_index(e, 0), b_index(e, 0)) -= eq.tau;
        lb.Abb(b_index(e, 1), b_index(e, 1)) -= eq.tau;
    }

    // Reaction terms sampled at the quadrature nodes of the P1 space.
    const ElementMatrices& Eq0 = cached_matrices(1, el.h);
    const int n_quad = static_cast<int>(Eq0.quad_nodes.size());
    std::vector<double> state(n_eq), partials(n_eq);
    for (int k = 0; k < n_quad; ++k) {
        const double xk = Eq0.quad_nodes[k] / el.h;  // reference coordinate
        const double wk = Eq0.quad_weights[k];
        const double s_phys = el.s_left + Eq0.quad_nodes[k];
        const double phi[2] = {1.0 - xk, xk};
        for (int e = 0; e < n_eq; ++e)
            state[e] = x[eq_offset_[e]] * phi[0] + x[eq_offset_[e] + 1] * phi[1];
        for (int e = 0; e < n_eq; ++e) {
            const double f = arc_params_[el.arc].sources[e](s_phys, t_next);
            double value;
            problem_.reaction(e, state.data(), f, value, partials.data());
            const int off = eq_offset_[e];
            for (int i = 0; i < 2; ++i) {
                lb.ri[off + i] -= wk * value * phi[i];
                for (int ee = 0; ee < n_eq; ++ee) {
                    if (partials[ee] == 0.0) continue;
                    for (int m = 0; m < 2; ++m)
                        lb.Aii(off + i, eq_offset_[ee] + m) -= wk * partials[ee] * phi[i] * phi[m];
                }
            }
        }
    }

    // Chemotaxis drift for equation 0: advective flux F = chi(phi) u d_s(phi)
    // with d_s(phi) = -q_phi / mu from the P1 flux of the attractant.
    const int pe = problem_.chemo_attractant_eq;
    if (pe >= 0) {
        const auto& chi = problem_.chi;
        const double mu = problem_.equations[pe].diffusivity;
        const int off_u = eq_offset_[0];
        const int off_p = eq_offset_[pe];
        const double dphi[2] = {-1.0 / el.h, 1.0 / el.h};

        for (int k = 0; k < n_quad; ++k) {
            const double xk = Eq0.quad_nodes[k] / el.h;
            const double wk = Eq0.quad_weights[k];
            const double phi[2] = {1.0 - xk, xk};
            const double uv = x[off_u] * phi[0] + x[off_u + 1] * phi[1];
            const double pv = x[off_p] * phi[0] + x[off_p + 1] * phi[1];
            const double qv = x[off_p + 2] * phi[0] + x[off_p + 3] * phi[1];
            const double grad = -qv / mu;
            const auto [cv, dcv] = chi.eval(pv);
            const double F = cv * uv * grad;
            // u-rows gain -int F w'
            for (int i = 0; i < 2; ++i) {
                lb.ri[off_u + i] -= wk * F * dphi[i];
                for (int m = 0; m < 2; ++m) {
                    lb.Aii(off_u + i, off_u + m) -= wk * dphi[i] * cv * grad * phi[m];
                    lb.Aii(off_u + i, off_p + m) -= wk * dphi[i] * dcv * uv * grad * phi[m];
                    lb.Aii(off_u + i, off_p + 2 + m) -= wk * dphi[i] * cv * uv * (-phi[m] / mu);
                }
            }
        }

        // Endpoint advective flux uses the traces and the element-side flux;
        // it enters both the u-rows and the flux-balance rows with sign nu.
        for (int side = 0; side < 2; ++side) {
            const double nu = side == 0 ? -1.0 : 1.0;
            const double phat = uhat[b_index(pe, side)];
            const double uhat0 = uhat[b_index(0, side)];
            const double q_end = x[off_p + 2 + side];  // P1 nodal flux
            const double grad = -q_end / mu;
            const auto [cv, dcv] = chi.eval(phat);
            const double F = cv * uhat0 * grad;

            const double dF_du0 = cv * grad;
            const double dF_dp = dcv * uhat0 * grad;
            const double dF_dq = cv * uhat0 * (-1.0 / mu);

            lb.ri[off_u + side] += nu * F;
            lb.Aib(off_u + side, b_index(0, side)) += nu * dF_du0;
            lb.Aib(off_u + side, b_index(pe, side)) += nu * dF_dp;
            lb.Aii(off_u + side, off_p + 2 + side) += nu * dF_dq;

            lb.rb[b_index(0, side)] += nu * F;
            lb.Abb(b_index(0, side), b_index(0, side)) += nu * dF_du0;
            lb.Abb(b_index(0, side), b_index(pe, side)) += nu * dF_dp;
            lb.Abi(b_index(0, side), off_p + 2 + side) += nu * dF_dq;
        }
    }

    return lb;
}

std::vector<LocalBlocks> HdgSystem::assemble_all_locals(const BulkState& prev,
                                                        const SystemState& iterate, double dt,
                                                        double t_next, int threads) const {
    const int n = disc_.n_elements();
    std::vector<LocalBlocks> out(n);
    if (threads <= 1 || n < 2 * threads) {
        for (int k = 0; k < n; ++k) out[k] = assemble_local(k, prev, iterate, dt, t_next);
        return out;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int k = next.fetch_add(1); k < n; k = next.fetch_add(1))
                out[k] = assemble_local(k, prev, iterate, dt, t_next);
        });
    for (auto& th : pool) th.join();
    return out;
}

CondensedElement condense(const LocalBlocks& lb) {
    CondensedElement ce;
    ce.Aii_lu = Eigen::PartialPivLU<Eigen::MatrixXd>(lb.Aii);
    if (ce.Aii_lu.rcond() < 1e-14)
        throw SolverError("singular local block (dt or data pathology)");
    ce.Aib = lb.Aib;
    ce.fi = -lb.ri;
    const Eigen::MatrixXd X = ce.Aii_lu.solve(lb.Aib);
    ce.Atilde = lb.Abb - lb.Abi * X;
    ce.ftilde = -lb.rb - lb.Abi * ce.Aii_lu.solve(ce.fi);
    return ce;
}

Eigen::VectorXd HdgSystem::recover_bulk_delta(const CondensedElement& ce,
                                              const Eigen::VectorXd& delta_traces) {
    return ce.Aii_lu.solve(ce.fi - ce.Aib * delta_traces);
}

void HdgSystem::append_constraints(const SystemState& iterate, double t_next,
                                   std::vector<Eigen::Triplet<double>>* triplets,
                                   Eigen::VectorXd& residual) const {
    const int n_eq = problem_.n_equations;
    // Constrained-node index per (connection, member).
    auto cn_of = [&](int c, int m) {
        const int node = disc_.member_node(c, m);
        const int arc = geometry_.connections[c].members[m].arc_id;
        return disc_.constrained_at(arc, node);
    };
    auto trace_of = [&](int c, int m, int e) {
        const auto& mem = geometry_.connections[c].members[m];
        return disc_.trace_index(mem.arc_id, e, disc_.member_node(c, m));
    };
    auto add = [&](int row, int col, double v) {
        if (triplets) triplets->emplace_back(row, col, v);
    };

    for (int c = 0; c < static_cast<int>(geometry_.connections.size()); ++c) {
        const auto& conn = geometry_.connections[c];
        const int k = static_cast<int>(conn.members.size());
        for (int e = 0; e < n_eq; ++e) {
            const ResolvedCondition& rc = conditions_[c][e];
            switch (rc.kind) {
                case ResolvedCondition::Kind::Boundary: {
                    const int cn = cn_of(c, 0);
                    const int row = disc_.multiplier_index(cn, e);
                    const int tcol = trace_of(c, 0, e);
                    const int lcol = disc_.multiplier_index(cn, e);
                    const double uhat = iterate.traces[tcol];
                    const double lam = iterate.multipliers[lcol - disc_.n_traces];
                    const double g = rc.g(0.0, t_next);
                    residual[row] = rc.alpha * uhat + rc.beta * lam - g;
                    add(row, tcol, rc.alpha);
                    add(row, lcol, rc.beta);
                    break;
                }
                case ResolvedCondition::Kind::Continuity: {
                    // k-1 chained continuity rows plus one multiplier-sum row
                    const int t0 = trace_of(c, 0, e);
                    for (int j = 1; j < k; ++j) {
                        const int row = disc_.multiplier_index(cn_of(c, j), e);
                        const int tj = trace_of(c, j, e);
                        residual[row] = iterate.traces[t0] - iterate.traces[tj];
                        add(row, t0, 1.0);
                        add(row, tj, -1.0);
                    }
                    const int row = disc_.multiplier_index(cn_of(c, 0), e);
                    double sum = 0.0;
                    for (int j = 0; j < k; ++j) {
                        const int lcol = disc_.multiplier_index(cn_of(c, j), e);
                        sum += iterate.multipliers[lcol - disc_.n_traces];
                        add(row, lcol, 1.0);
                    }
                    residual[row] = sum;
                    break;
                }
                case ResolvedCondition::Kind::KedemKatchalsky: {
                    const int t0 = trace_of(c, 0, e);
                    const int t1 = trace_of(c, 1, e);
                    const int l0 = disc_.multiplier_index(cn_of(c, 0), e);
                    const int l1 = disc_.multiplier_index(cn_of(c, 1), e);
                    const double lam0 = iterate.multipliers[l0 - disc_.n_traces];
                    const double lam1 = iterate.multipliers[l1 - disc_.n_traces];
                    const double jump = iterate.traces[t0] - iterate.traces[t1];
                    residual[l0] = lam0 - rc.omega_kk * jump;
                    add(l0, l0, 1.0);
                    add(l0, t0, -rc.omega_kk);
                    add(l0, t1, rc.omega_kk);
                    residual[l1] = lam0 + lam1;
                    add(l1, l0, 1.0);
                    add(l1, l1, 1.0);
                    break;
                }
            }
        }
    }
}

GlobalSystem HdgSystem::assemble_global(const std::vector<CondensedElement>& condensed,
                                        const SystemState& iterate, double t_next) const {
    const int n = disc_.n_unknowns();
    GlobalSystem gs;
    gs.R = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(disc_.n_elements()) * boundary_size() *
                     boundary_size() +
                 4 * static_cast<std::size_t>(disc_.n_multipliers));

    const int nb = boundary_size();
    for (int kel = 0; kel < disc_.n_elements(); ++kel) {
        const auto& el = disc_.elements[kel];
        const auto& ce = condensed[kel];
        std::vector<int> rows(nb);
        for (int e = 0; e < problem_.n_equations; ++e) {
            rows[b_index(e, 0)] = disc_.trace_index(el.arc, e, el.node_left);
            rows[b_index(e, 1)] = disc_.trace_index(el.arc, e, el.node_right);
        }
        for (int i = 0; i < nb; ++i) {
            gs.R[rows[i]] += -ce.ftilde[i];
            for (int j = 0; j < nb; ++j) {
                const double v = ce.Atilde(i, j);
                if (v != 0.0) trip.emplace_back(rows[i], rows[j], v);
            }
        }
    }

    // Each arc's flux-balance row at a constrained node gains +lambda.
    for (int cn = 0; cn < static_cast<int>(disc_.constrained.size()); ++cn) {
        const auto& node = disc_.constrained[cn];
        for (int e = 0; e < problem_.n_equations; ++e) {
            const int row = disc_.trace_index(node.arc, e, node.node);
            const int col = disc_.multiplier_index(cn, e);
            gs.R[row] += iterate.multipliers[col - disc_.n_traces];
            trip.emplace_back(row, col, 1.0);
        }
    }

    append_constraints(iterate, t_next, &trip, gs.R);

    gs.J.resize(n, n);
    gs.J.setFromTriplets(trip.begin(), trip.end());
    return gs;
}

Eigen::VectorXd HdgSystem::trace_residual(const std::vector<LocalBlocks>& locals,
                                          const SystemState& iterate, double t_next) const {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(disc_.n_unknowns());
    for (int kel = 0; kel < disc_.n_elements(); ++kel) {
        const auto& el = disc_.elements[kel];
        for (int e = 0; e < problem_.n_equations; ++e) {
            r[disc_.trace_index(el.arc, e, el.node_left)] += locals[kel].rb[b_index(e, 0)];
            r[disc_.trace_index(el.arc, e, el.node_right)] += locals[kel].rb[b_index(e, 1)];
        }
    }
    for (int cn = 0; cn < static_cast<int>(disc_.constrained.size()); ++cn) {
        const auto& node = disc_.constrained[cn];
        for (int e = 0; e < problem_.n_equations; ++e) {
            const int row = disc_.trace_index(node.arc, e, node.node);
            const int col = disc_.multiplier_index(cn, e);
            r[row] += iterate.multipliers[col - disc_.n_traces];
        }
    }
    append_constraints(iterate, t_next, nullptr, r);
    return r;
}

double HdgSystem::full_residual_norm(const std::vector<LocalBlocks>& locals,
                                     const SystemState& iterate, double t_next) const {
    double sq = trace_residual(locals, iterate, t_next).squaredNorm();
    for (const auto& lb : locals) sq += lb.ri.squaredNorm();
    return std::sqrt(sq);
}

}  // namespace netflux
