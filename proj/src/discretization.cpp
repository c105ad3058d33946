#include "netflux/discretization.hpp"

#include <algorithm>
#include <cmath>

#include "netflux/errors.hpp"

namespace netflux {

Discretization build_discretization(const NetworkGeometry& geo, double h_target,
                                    int n_equations) {
    if (h_target <= 0.0) throw SolverError("h_target must be positive");
    if (n_equations < 1) throw SolverError("n_equations must be >= 1");

    Discretization d;
    d.n_equations = n_equations;
    d.h_target = h_target;

    const int n_arcs = static_cast<int>(geo.arcs.size());

    // Interior T attachment coordinates per arc.
    std::vector<std::vector<double>> t_points(n_arcs);
    for (const auto& conn : geo.connections)
        for (const auto& m : conn.members)
            if (m.where == Attachment::Interior) t_points[m.arc_id].push_back(m.s);

    for (const auto& arc : geo.arcs) {
        ArcMesh mesh;
        mesh.arc_id = arc.id;
        const int n_el = std::max(1, static_cast<int>(std::ceil(arc.length / h_target)));
        for (int i = 0; i <= n_el; ++i)
            mesh.nodes.push_back(arc.x0 + arc.length * static_cast<double>(i) / n_el);
        const double tol = 1e-9 * arc.length;
        for (double s : t_points[arc.id]) {
            auto near = std::find_if(mesh.nodes.begin(), mesh.nodes.end(),
                                     [&](double x) { return std::abs(x - s) <= tol; });
            if (near == mesh.nodes.end()) mesh.nodes.push_back(s);
        }
        std::sort(mesh.nodes.begin(), mesh.nodes.end());
        d.meshes.push_back(std::move(mesh));
    }

    // Elements and trace offsets.
    d.arc_elem_offset.resize(n_arcs);
    d.trace_offset.resize(n_arcs);
    int trace = 0;
    for (int a = 0; a < n_arcs; ++a) {
        d.arc_elem_offset[a] = d.n_elements();
        d.trace_offset[a] = trace;
        trace += n_equations * d.meshes[a].n_nodes();
        for (int i = 0; i + 1 < d.meshes[a].n_nodes(); ++i) {
            ElementRef e;
            e.arc = a;
            e.index_in_arc = i;
            e.s_left = d.meshes[a].nodes[i];
            e.h = d.meshes[a].nodes[i + 1] - d.meshes[a].nodes[i];
            e.node_left = i;
            e.node_right = i + 1;
            d.elements.push_back(e);
        }
    }
    d.n_traces = trace;

    // Constrained nodes: one per connection member, deterministic order.
    for (int c = 0; c < static_cast<int>(geo.connections.size()); ++c) {
        const auto& conn = geo.connections[c];
        for (int m = 0; m < static_cast<int>(conn.members.size()); ++m) {
            const auto& mem = conn.members[m];
            const auto& mesh = d.meshes[mem.arc_id];
            int node = -1;
            switch (mem.where) {
                case Attachment::StartEnd: node = 0; break;
                case Attachment::EndEnd: node = mesh.n_nodes() - 1; break;
                case Attachment::Interior: {
                    const double tol = 1e-9 * geo.arcs[mem.arc_id].length;
                    for (int i = 0; i < mesh.n_nodes(); ++i)
                        if (std::abs(mesh.nodes[i] - mem.s) <= tol) {
                            node = i;
                            break;
                        }
                    break;
                }
            }
            if (node < 0)
                throw SolverError("T attachment node missing on arc " +
                                  std::to_string(mem.arc_id));
            const int cn = static_cast<int>(d.constrained.size());
            d.constrained.push_back({mem.arc_id, node, c, m});
            d.constrained_lookup_[{mem.arc_id, node}] = cn;
            d.member_node_[{c, m}] = node;
        }
    }
    d.n_multipliers = static_cast<int>(d.constrained.size()) * n_equations;
    return d;
}

}  // namespace netflux
