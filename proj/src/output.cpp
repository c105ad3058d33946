#include "netflux/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "netflux/errors.hpp"

namespace netflux {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string f3(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

// 9-anchor viridis approximation, linearly interpolated.
struct Rgb {
    double r, g, b;
};

Rgb viridis(double t) {
    static const Rgb anchors[9] = {{68, 1, 84},    {72, 40, 120},  {62, 74, 137},
                                   {49, 104, 142}, {38, 130, 142}, {31, 158, 137},
                                   {53, 183, 121}, {109, 205, 89}, {253, 231, 37}};
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * 8.0;
    const int i = std::min(7, static_cast<int>(pos));
    const double f = pos - i;
    return {anchors[i].r + f * (anchors[i + 1].r - anchors[i].r),
            anchors[i].g + f * (anchors[i + 1].g - anchors[i].g),
            anchors[i].b + f * (anchors[i + 1].b - anchors[i].b)};
}

std::string rgb_hex(const Rgb& c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  static_cast<int>(std::lround(c.r)), static_cast<int>(std::lround(c.g)),
                  static_cast<int>(std::lround(c.b)));
    return buf;
}

/// World-to-screen mapping with a uniform scale and a 5% margin.
struct Canvas {
    double scale = 1.0;
    double x_off = 0.0, y_off = 0.0, y_max = 0.0;
    double width = 0.0, height = 0.0;
    double extra_right = 0.0;  // colour bar gutter

    static Canvas fit(const Eigen::Vector4d& bb, int width_px, double extra_right) {
        Canvas c;
        c.extra_right = extra_right;
        const double dx = std::max(bb[2] - bb[0], 1e-12);
        const double dy = std::max(bb[3] - bb[1], 1e-12);
        const double margin = 0.05 * static_cast<double>(width_px);
        const double inner_w = width_px - 2.0 * margin - extra_right;
        c.scale = inner_w / dx;
        c.width = width_px;
        c.height = dy * c.scale + 2.0 * margin;
        c.x_off = margin - bb[0] * c.scale;
        c.y_max = bb[3];
        c.y_off = margin;
        return c;
    }
    double sx(double x) const { return x * scale + x_off; }
    double sy(double y) const { return (y_max - y) * scale + y_off; }
};

std::string svg_open(const Canvas& c) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f3(c.width) << "\" height=\""
       << f3(c.height) << "\" viewBox=\"0 0 " << f3(c.width) << ' ' << f3(c.height) << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return os.str();
}

}  // namespace

double compute_mass(const HdgSystem& sys, const SystemState& state, int eq, Region region) {
    if (eq < 0 || eq >= sys.problem().n_equations)
        throw SolverError("compute_mass: equation index out of range");
    const auto& disc = sys.disc();
    const Eigen::Vector4d bb = sys.geometry().bounding_box();
    const double mid = 0.5 * (bb[0] + bb[2]);
    const int off = sys.eq_offset(eq);
    double mass = 0.0;
    for (int k = 0; k < disc.n_elements(); ++k) {
        const auto& el = disc.elements[k];
        if (region != Region::All) {
            const double x = sys.geometry().arcs[el.arc].point_at(el.s_left + 0.5 * el.h).x();
            if (region == Region::LeftHalf ? x >= mid : x < mid) continue;
        }
        const Eigen::VectorXd& u = state.bulk.elem[k];
        mass += el.h * 0.5 * (u[off] + u[off + 1]);
    }
    return mass;
}

MassReport compute_mass_report(const HdgSystem& sys, const SystemState& state, int eq) {
    MassReport r;
    r.total = compute_mass(sys, state, eq, Region::All);
    r.left = compute_mass(sys, state, eq, Region::LeftHalf);
    r.right = compute_mass(sys, state, eq, Region::RightHalf);
    return r;
}

std::string snapshot_csv(const HdgSystem& sys, const SystemState& state) {
    std::ostringstream os;
    os << "arc_id,equation,s,value,time\n";
    const auto& disc = sys.disc();
    const std::string t = g17(state.time);
    for (int a = 0; a < static_cast<int>(sys.geometry().arcs.size()); ++a) {
        const auto& mesh = disc.meshes[a];
        for (int e = 0; e < sys.problem().n_equations; ++e) {
            const std::string& name = sys.problem().equations[e].name;
            const int off = sys.eq_offset(e);
            // interleave node traces and element midpoints in ascending s
            for (int i = 0; i < mesh.n_nodes(); ++i) {
                os << a << ',' << name << ',' << g17(mesh.nodes[i]) << ','
                   << g17(state.traces[disc.trace_index(a, e, i)]) << ',' << t << '\n';
                if (i + 1 < mesh.n_nodes()) {
                    const int k = disc.arc_elem_offset[a] + i;
                    const auto& el = disc.elements[k];
                    const Eigen::VectorXd& u = state.bulk.elem[k];
                    os << a << ',' << name << ',' << g17(el.s_left + 0.5 * el.h) << ','
                       << g17(0.5 * (u[off] + u[off + 1])) << ',' << t << '\n';
                }
            }
        }
    }
    return os.str();
}

void export_snapshot(const HdgSystem& sys, const SystemState& state, const std::string& path) {
    write_file(path, snapshot_csv(sys, state));
}

std::string diagnostics_csv(const std::vector<StepRecord>& records) {
    std::ostringstream os;
    os << "step,time,dt,newton_iterations,accepted\n";
    for (const auto& r : records)
        os << r.step << ',' << g17(r.time) << ',' << g17(r.dt) << ',' << r.newton_iterations
           << ',' << (r.accepted ? 1 : 0) << '\n';
    return os.str();
}

void export_diagnostics(const std::vector<StepRecord>& records, const std::string& path) {
    write_file(path, diagnostics_csv(records));
}

std::string render_birdview(const HdgSystem& sys, const SystemState& state, int eq, int width) {
    if (eq < 0 || eq >= sys.problem().n_equations)
        throw SolverError("render_birdview: equation index out of range");
    const auto& disc = sys.disc();
    const auto& arcs = sys.geometry().arcs;
    const int off = sys.eq_offset(eq);

    std::vector<double> avg(disc.n_elements());
    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -vmin;
    for (int k = 0; k < disc.n_elements(); ++k) {
        const Eigen::VectorXd& u = state.bulk.elem[k];
        avg[k] = 0.5 * (u[off] + u[off + 1]);
        vmin = std::min(vmin, avg[k]);
        vmax = std::max(vmax, avg[k]);
    }
    const bool degenerate = !(vmax > vmin);

    const double bar_gutter = 70.0;
    const Canvas c = Canvas::fit(sys.geometry().bounding_box(), width, bar_gutter);
    std::ostringstream os;
    os << svg_open(c);
    os << "<title>" << sys.problem().equations[eq].name << " at t=" << g6(state.time)
       << "</title>\n";

    for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
        os << "<g id=\"arc-" << a << "\" stroke-linecap=\"round\" stroke-width=\"5\">\n";
        const int first = disc.arc_elem_offset[a];
        for (int i = 0; i < disc.meshes[a].n_elements(); ++i) {
            const auto& el = disc.elements[first + i];
            const auto p0 = arcs[a].point_at(el.s_left);
            const auto p1 = arcs[a].point_at(el.s_left + el.h);
            const double t = degenerate ? 0.5 : (avg[first + i] - vmin) / (vmax - vmin);
            os << "<line x1=\"" << f3(c.sx(p0.x())) << "\" y1=\"" << f3(c.sy(p0.y()))
               << "\" x2=\"" << f3(c.sx(p1.x())) << "\" y2=\"" << f3(c.sy(p1.y()))
               << "\" stroke=\"" << rgb_hex(viridis(t)) << "\"/>\n";
        }
        os << "</g>\n";
    }

    // colour bar
    const double bx = c.width - bar_gutter + 12.0;
    const double by = 0.1 * c.height;
    const double bh = 0.8 * c.height;
    const double bw = 16.0;
    const int n_seg = 64;
    os << "<g id=\"colorbar\">\n";
    for (int i = 0; i < n_seg; ++i) {
        const double t0 = static_cast<double>(i) / n_seg;
        const double y = by + bh * (1.0 - static_cast<double>(i + 1) / n_seg);
        os << "<rect x=\"" << f3(bx) << "\" y=\"" << f3(y) << "\" width=\"" << f3(bw)
           << "\" height=\"" << f3(bh / n_seg + 0.5) << "\" fill=\""
           << rgb_hex(viridis(degenerate ? 0.5 : t0 + 0.5 / n_seg)) << "\"/>\n";
    }
    os << "<text x=\"" << f3(bx + bw + 4) << "\" y=\"" << f3(by + bh)
       << "\" font-size=\"11\" font-family=\"sans-serif\">" << g6(vmin) << "</text>\n";
    os << "<text x=\"" << f3(bx + bw + 4) << "\" y=\"" << f3(by + 10)
       << "\" font-size=\"11\" font-family=\"sans-serif\">" << g6(vmax) << "</text>\n";
    os << "</g>\n</svg>\n";
    return os.str();
}

void render_birdview_file(const HdgSystem& sys, const SystemState& state, int eq,
                          const std::string& path, int width) {
    write_file(path, render_birdview(sys, state, eq, width));
}

std::string render_geometry(const NetworkGeometry& geometry, int width) {
    const Canvas c = Canvas::fit(geometry.bounding_box(), width, 0.0);
    std::ostringstream os;
    os << svg_open(c);
    os << "<g stroke=\"#888888\" stroke-width=\"2\">\n";
    for (const auto& arc : geometry.arcs) {
        os << "<line x1=\"" << f3(c.sx(arc.p_start.x())) << "\" y1=\"" << f3(c.sy(arc.p_start.y()))
           << "\" x2=\"" << f3(c.sx(arc.p_end.x())) << "\" y2=\"" << f3(c.sy(arc.p_end.y()))
           << "\"/>\n";
    }
    os << "</g>\n<g font-size=\"11\" font-family=\"sans-serif\" fill=\"#333333\">\n";
    for (const auto& arc : geometry.arcs) {
        const Eigen::Vector2d m = 0.5 * (arc.p_start + arc.p_end);
        os << "<text x=\"" << f3(c.sx(m.x()) + 3) << "\" y=\"" << f3(c.sy(m.y()) - 3) << "\">"
           << arc.id << "</text>\n";
    }
    os << "</g>\n<g font-size=\"10\" font-family=\"sans-serif\">\n";
    for (const auto& conn : geometry.connections) {
        Eigen::Vector2d p{0.0, 0.0};
        const auto& mem = conn.members.front();
        p = geometry.arcs[mem.arc_id].point_at(mem.s);
        const char* color = conn.kind == NodeKind::Junction     ? "#1f77b4"
                            : conn.kind == NodeKind::TJunction  ? "#ff7f0e"
                                                                : "#d62728";
        os << "<circle cx=\"" << f3(c.sx(p.x())) << "\" cy=\"" << f3(c.sy(p.y()))
           << "\" r=\"4\" fill=\"" << color << "\"/>\n";
        os << "<text x=\"" << f3(c.sx(p.x()) + 5) << "\" y=\"" << f3(c.sy(p.y()) + 4)
           << "\" fill=\"" << color << "\">" << conn.node_tag << "</text>\n";
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

void render_geometry_file(const NetworkGeometry& geometry, const std::string& path, int width) {
    write_file(path, render_geometry(geometry, width));
}

}  // namespace netflux
