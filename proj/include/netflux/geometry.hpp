#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace netflux {

/// A node of the network as read from points.csv. The first letter of the
/// tag classifies the node: J (junction), T (T-junction), B (boundary).
struct TaggedPoint {
    std::string tag;
    double x = 0.0;
    double y = 0.0;
};

/// One edge of the network, parametrised by a local coordinate
/// s in [x0, x0 + length]. Coordinates and length are physical
/// (already multiplied by the length scale).
struct Arc {
    int id = -1;
    std::string start_tag;
    std::string end_tag;
    double length = 0.0;
    double x0 = 0.0;
    Eigen::Vector2d p_start{0.0, 0.0};
    Eigen::Vector2d p_end{0.0, 0.0};

    /// Planar position of the local coordinate s (measured from x0).
    Eigen::Vector2d point_at(double s) const {
        const double r = (s - x0) / length;
        return (1.0 - r) * p_start + r * p_end;
    }
};

enum class NodeKind { Junction, TJunction, Boundary };

enum class Attachment { StartEnd, EndEnd, Interior };

struct ConnectionMember {
    int arc_id = -1;
    Attachment where = Attachment::StartEnd;
    /// Local coordinate of the attachment on the arc (x0, x0+L for
    /// endpoints, strictly inside for Interior).
    double s = 0.0;
};

struct Connection {
    std::string node_tag;
    NodeKind kind = NodeKind::Boundary;
    std::vector<ConnectionMember> members;
};

struct NetworkGeometry {
    std::vector<Arc> arcs;
    std::vector<Connection> connections;
    double length_scale = 1.0;
    /// Nodes not connected to arc 0's component (empty when connected).
    std::vector<std::string> disconnected_tags;

    /// Axis-aligned bounding box of all arc endpoints: (xmin, ymin, xmax, ymax).
    Eigen::Vector4d bounding_box() const;
};

/// Parse points.csv text: rows `tag,x,y`, `#` comments skipped, optional
/// header detected by a non-numeric x field. Tags are normalised to an
/// uppercase first letter and must be unique.
std::vector<TaggedPoint> parse_points(const std::string& csv_text);

/// Parse lines.csv text: rows `start_tag,end_tag` in file order. Row order
/// fixes arc ids; orientation fixes the local coordinate direction.
std::vector<std::pair<std::string, std::string>> parse_lines(const std::string& csv_text);

/// Assemble the network: scale coordinates, compute arc lengths, classify
/// connections by tag letter and locate T-junction interior attachments by
/// projection (distance tolerance 1e-9 * length_scale).
NetworkGeometry build_geometry(const std::vector<TaggedPoint>& points,
                               const std::vector<std::pair<std::string, std::string>>& lines,
                               double length_scale);

/// Serialise back to the CSV pair (unscaled coordinates), suitable for
/// re-parsing into an identical structure.
std::string points_to_csv(const std::vector<TaggedPoint>& points);
std::string lines_to_csv(const std::vector<std::pair<std::string, std::string>>& lines);

/// Aligned-text table of arcs, lengths and connections (CLI `geometry describe`).
std::string describe_geometry(const NetworkGeometry& geometry);

}  // namespace netflux
