#include "netflux/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "netflux/errors.hpp"

namespace netflux {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& f : out) {
        const auto b = f.find_first_not_of(" \t\r");
        if (b == std::string::npos) {
            f.clear();
            continue;
        }
        const auto e = f.find_last_not_of(" \t\r");
        f = f.substr(b, e - b + 1);
    }
    return out;
}

bool parse_real(const std::string& text, double& value) {
    if (text.empty()) return false;
    char* end = nullptr;
    value = std::strtod(text.c_str(), &end);
    return end == text.c_str() + text.size();
}

struct CsvRow {
    int line_no;
    std::vector<std::string> fields;
};

std::vector<CsvRow> csv_rows(const std::string& text) {
    std::vector<CsvRow> rows;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        if (line[b] == '#') continue;
        rows.push_back({line_no, split_fields(line)});
    }
    return rows;
}

std::string normalize_tag(const std::string& tag) {
    std::string t = tag;
    t[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
    return t;
}

}  // namespace

std::vector<TaggedPoint> parse_points(const std::string& csv_text) {
    std::vector<TaggedPoint> points;
    std::set<std::string> seen;
    bool first = true;
    for (const auto& row : csv_rows(csv_text)) {
        if (row.fields.size() != 3)
            throw GeometryError("points.csv: malformed row at line " + std::to_string(row.line_no));
        double x, y;
        if (!parse_real(row.fields[1], x) || !parse_real(row.fields[2], y)) {
            if (first) {
                first = false;  // header row
                continue;
            }
            throw GeometryError("points.csv: malformed row at line " + std::to_string(row.line_no));
        }
        first = false;
        if (row.fields[0].empty())
            throw GeometryError("points.csv: empty tag at line " + std::to_string(row.line_no));
        const std::string tag = normalize_tag(row.fields[0]);
        const char k = tag[0];
        if (k != 'J' && k != 'T' && k != 'B')
            throw GeometryError("points.csv: bad tag prefix '" + tag + "' (expected J, T or B)");
        if (!seen.insert(tag).second)
            throw GeometryError("points.csv: duplicate tag '" + tag + "'");
        points.push_back({tag, x, y});
    }
    return points;
}

std::vector<std::pair<std::string, std::string>> parse_lines(const std::string& csv_text) {
    std::vector<std::pair<std::string, std::string>> lines;
    for (const auto& row : csv_rows(csv_text)) {
        if (row.fields.size() != 2 || row.fields[0].empty() || row.fields[1].empty())
            throw GeometryError("lines.csv: malformed row at line " + std::to_string(row.line_no));
        lines.emplace_back(normalize_tag(row.fields[0]), normalize_tag(row.fields[1]));
    }
    return lines;
}

NetworkGeometry build_geometry(const std::vector<TaggedPoint>& points,
                               const std::vector<std::pair<std::string, std::string>>& lines,
                               double length_scale) {
    if (length_scale <= 0.0) throw GeometryError("length_scale must be positive");

    std::map<std::string, Eigen::Vector2d> coord;
    for (const auto& p : points) coord[p.tag] = length_scale * Eigen::Vector2d(p.x, p.y);

    NetworkGeometry geo;
    geo.length_scale = length_scale;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& [a, b] = lines[i];
        auto ia = coord.find(a);
        auto ib = coord.find(b);
        if (ia == coord.end()) throw GeometryError("lines.csv: unknown tag '" + a + "'");
        if (ib == coord.end()) throw GeometryError("lines.csv: unknown tag '" + b + "'");
        Arc arc;
        arc.id = static_cast<int>(i);
        arc.start_tag = a;
        arc.end_tag = b;
        arc.p_start = ia->second;
        arc.p_end = ib->second;
        arc.length = (arc.p_end - arc.p_start).norm();
        if (arc.length <= 0.0)
            throw GeometryError("zero-length arc " + std::to_string(i) + " (" + a + "," + b + ")");
        geo.arcs.push_back(arc);
    }

    // Endpoint incidence per tag.
    std::map<std::string, std::vector<ConnectionMember>> incidence;
    for (const auto& arc : geo.arcs) {
        incidence[arc.start_tag].push_back({arc.id, Attachment::StartEnd, arc.x0});
        incidence[arc.end_tag].push_back({arc.id, Attachment::EndEnd, arc.x0 + arc.length});
    }

    const double tol = 1e-9 * length_scale;
    for (const auto& p : points) {
        const char kind = p.tag[0];
        auto it = incidence.find(p.tag);
        const int n_end = it == incidence.end() ? 0 : static_cast<int>(it->second.size());
        Connection conn;
        conn.node_tag = p.tag;
        if (kind == 'B') {
            if (n_end != 1)
                throw GeometryError("boundary point '" + p.tag + "' must terminate exactly one arc, got " +
                                    std::to_string(n_end));
            conn.kind = NodeKind::Boundary;
            conn.members = it->second;
        } else if (kind == 'J') {
            if (n_end < 2)
                throw GeometryError("junction point '" + p.tag + "' must join at least two arcs, got " +
                                    std::to_string(n_end));
            conn.kind = NodeKind::Junction;
            conn.members = it->second;
        } else {  // T
            if (n_end != 1)
                throw GeometryError("T-point '" + p.tag + "' must terminate exactly one arc, got " +
                                    std::to_string(n_end));
            conn.kind = NodeKind::TJunction;
            conn.members = it->second;
            // Locate the touched arc by projection.
            const Eigen::Vector2d pt = coord.at(p.tag);
            int hits = 0;
            for (const auto& arc : geo.arcs) {
                if (arc.id == conn.members[0].arc_id) continue;
                const Eigen::Vector2d d = arc.p_end - arc.p_start;
                const double s = (pt - arc.p_start).dot(d) / d.squaredNorm();
                if (s <= tol / arc.length || s >= 1.0 - tol / arc.length) continue;
                const Eigen::Vector2d proj = arc.p_start + s * d;
                if ((proj - pt).norm() <= tol) {
                    conn.members.push_back({arc.id, Attachment::Interior, arc.x0 + s * arc.length});
                    ++hits;
                }
            }
            if (hits == 0) throw GeometryError("T-point '" + p.tag + "' does not touch the interior of any arc");
            if (hits > 1) throw GeometryError("T-point '" + p.tag + "' touches more than one arc");
        }
        geo.connections.push_back(conn);
    }

    // Every arc endpoint must appear in exactly one connection.
    std::map<std::pair<int, int>, int> endpoint_count;  // (arc, side)
    for (const auto& conn : geo.connections)
        for (const auto& m : conn.members) {
            if (m.where == Attachment::StartEnd) endpoint_count[{m.arc_id, 0}]++;
            if (m.where == Attachment::EndEnd) endpoint_count[{m.arc_id, 1}]++;
        }
    for (const auto& arc : geo.arcs)
        for (int side = 0; side < 2; ++side) {
            const int c = endpoint_count[{arc.id, side}];
            if (c != 1)
                throw GeometryError("arc " + std::to_string(arc.id) + (side ? " end" : " start") +
                                    " endpoint appears in " + std::to_string(c) + " connections");
        }

    // Connectivity (warning only): BFS over arcs via shared connections.
    if (!geo.arcs.empty()) {
        std::vector<std::set<int>> adj(geo.arcs.size());
        for (const auto& conn : geo.connections)
            for (const auto& m1 : conn.members)
                for (const auto& m2 : conn.members)
                    if (m1.arc_id != m2.arc_id) adj[m1.arc_id].insert(m2.arc_id);
        std::vector<bool> seen(geo.arcs.size(), false);
        std::vector<int> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
            const int a = stack.back();
            stack.pop_back();
            for (int b : adj[a])
                if (!seen[b]) {
                    seen[b] = true;
                    stack.push_back(b);
                }
        }
        for (std::size_t i = 0; i < seen.size(); ++i)
            if (!seen[i]) geo.disconnected_tags.push_back(geo.arcs[i].start_tag);
    }

    return geo;
}

Eigen::Vector4d NetworkGeometry::bounding_box() const {
    Eigen::Vector4d bb(0, 0, 0, 0);
    bool first = true;
    for (const auto& arc : arcs) {
        for (const auto& p : {arc.p_start, arc.p_end}) {
            if (first) {
                bb << p.x(), p.y(), p.x(), p.y();
                first = false;
            } else {
                bb[0] = std::min(bb[0], p.x());
                bb[1] = std::min(bb[1], p.y());
                bb[2] = std::max(bb[2], p.x());
                bb[3] = std::max(bb[3], p.y());
            }
        }
    }
    return bb;
}

std::string points_to_csv(const std::vector<TaggedPoint>& points) {
    std::ostringstream out;
    out << std::setprecision(17);
    for (const auto& p : points) out << p.tag << ',' << p.x << ',' << p.y << '\n';
    return out.str();
}

std::string lines_to_csv(const std::vector<std::pair<std::string, std::string>>& lines) {
    std::ostringstream out;
    for (const auto& [a, b] : lines) out << a << ',' << b << '\n';
    return out.str();
}

std::string describe_geometry(const NetworkGeometry& geo) {
    std::ostringstream out;
    out << "arcs: " << geo.arcs.size() << "  length_scale: " << geo.length_scale << "\n\n";
    out << "  id  start   end     length\n";
    for (const auto& arc : geo.arcs) {
        out << std::setw(4) << arc.id << "  " << std::setw(6) << std::left << arc.start_tag << "  "
            << std::setw(6) << arc.end_tag << std::right << "  " << std::setw(9) << std::fixed
            << std::setprecision(3) << arc.length << "\n";
    }
    out << "\nconnections:\n";
    for (const auto& conn : geo.connections) {
        out << "  " << std::setw(6) << std::left << conn.node_tag << std::right;
        switch (conn.kind) {
            case NodeKind::Junction: out << "  junction   "; break;
            case NodeKind::TJunction: out << "  t-junction "; break;
            case NodeKind::Boundary: out << "  boundary   "; break;
        }
        for (const auto& m : conn.members) {
            out << " arc" << m.arc_id;
            switch (m.where) {
                case Attachment::StartEnd: out << "@start"; break;
                case Attachment::EndEnd: out << "@end"; break;
                case Attachment::Interior:
                    out << "@s=" << std::setprecision(3) << m.s;
                    break;
            }
        }
        out << "\n";
    }
    if (!geo.disconnected_tags.empty()) {
        out << "\nwarning: graph is not connected\n";
    }
    return out.str();
}

}  // namespace netflux
