#pragma once

#include <map>
#include <vector>

#include "netflux/geometry.hpp"

namespace netflux {

/// Uniform partition of one arc with T-junction projection points snapped
/// in as extra nodes. Node coordinates are local s values, ascending.
struct ArcMesh {
    int arc_id = -1;
    std::vector<double> nodes;

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int n_elements() const { return n_nodes() - 1; }
};

/// Context of one global element (arc-major, ascending order).
struct ElementRef {
    int arc = -1;
    int index_in_arc = -1;
    double s_left = 0.0;
    double h = 0.0;
    int node_left = -1;
    int node_right = -1;
};

/// A mesh node carrying a Lagrange multiplier: an arc endpoint or the
/// interior attachment point of a T-junction.
struct ConstrainedNode {
    int arc = -1;
    int node = -1;        // node index within the arc mesh
    int connection = -1;  // index into NetworkGeometry::connections
    int member = -1;      // member index within that connection
};

/// DOF layout over the network. Traces are per (arc, equation, node);
/// junction-end nodes are duplicated across arcs and tied by constraint
/// rows. Multipliers are per (constrained node, equation).
struct Discretization {
    int n_equations = 0;
    double h_target = 0.0;
    std::vector<ArcMesh> meshes;
    std::vector<ElementRef> elements;
    std::vector<int> arc_elem_offset;  // first global element of each arc
    std::vector<int> trace_offset;     // trace index of (arc, eq 0, node 0)
    int n_traces = 0;
    std::vector<ConstrainedNode> constrained;
    int n_multipliers = 0;

    int n_elements() const { return static_cast<int>(elements.size()); }
    int nodes_in_arc(int arc) const { return meshes[arc].n_nodes(); }
    int n_unknowns() const { return n_traces + n_multipliers; }

    int trace_index(int arc, int eq, int node) const {
        return trace_offset[arc] + eq * nodes_in_arc(arc) + node;
    }
    int multiplier_index(int cn, int eq) const {
        return n_traces + cn * n_equations + eq;
    }
    /// Index into `constrained`, or -1 when the node carries no multiplier.
    int constrained_at(int arc, int node) const {
        auto it = constrained_lookup_.find({arc, node});
        return it == constrained_lookup_.end() ? -1 : it->second;
    }
    /// Mesh node index of a connection member (endpoint or snapped T node).
    int member_node(int connection, int member) const {
        return member_node_.at({connection, member});
    }

    // populated by build_discretization
    std::map<std::pair<int, int>, int> constrained_lookup_;
    std::map<std::pair<int, int>, int> member_node_;
};

/// Split each arc into ceil(L / h_target) uniform elements, then snap in
/// T-junction projection points; build trace/multiplier DOF maps.
/// Every element length ends up in (0, 2*h_target].
Discretization build_discretization(const NetworkGeometry& geometry, double h_target,
                                    int n_equations);

}  // namespace netflux
