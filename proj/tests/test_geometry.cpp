#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "netflux/errors.hpp"
#include "netflux/geometry.hpp"

using namespace netflux;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("points parsing: header, comments, normalisation") {
    const std::string csv =
        "tag,x,y\n"
        "# a comment\n"
        "j01, 0.0, 1.0\n"
        "T01,2,3\n"
        "\n"
        "B01,4.5,-1\n";
    auto pts = parse_points(csv);
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].tag == "J01");  // lower-case prefix normalised
    CHECK(pts[0].x == 0.0);
    CHECK(pts[0].y == 1.0);
    CHECK(pts[1].tag == "T01");
    CHECK(pts[2].y == -1.0);
}

TEST_CASE("points parsing rejects bad input") {
    CHECK_THROWS_AS(parse_points("J01,0\n"), GeometryError);
    CHECK_THROWS_AS(parse_points("X01,0,0\n"), GeometryError);
    CHECK_THROWS_AS(parse_points("J01,0,0\nJ01,1,1\n"), GeometryError);
    CHECK_THROWS_AS(parse_points("J01,0,0\nJ02,abc,1\n"), GeometryError);
}

TEST_CASE("lines parsing keeps file order and rejects short rows") {
    auto lines = parse_lines("start,end\nj01,j02\nJ02,B01\n");
    // 'start,end' is not special for lines.csv: it is two tags
    REQUIRE(lines.size() == 3);
    CHECK(lines[1].first == "J01");
    CHECK(lines[1].second == "J02");
    CHECK_THROWS_AS(parse_lines("J01\n"), GeometryError);
    CHECK_THROWS_AS(parse_lines("J01,,J02\n"), GeometryError);
}

TEST_CASE("Y network: classification, lengths, scaling") {
    std::vector<TaggedPoint> pts = {
        {"B01", 0, 0}, {"J01", 1, 0}, {"B02", 2, 1}, {"B03", 2, -1}};
    std::vector<std::pair<std::string, std::string>> lns = {
        {"B01", "J01"}, {"J01", "B02"}, {"J01", "B03"}};
    auto geo = build_geometry(pts, lns, 2.0);
    REQUIRE(geo.arcs.size() == 3);
    CHECK(geo.arcs[0].length == doctest::Approx(2.0));
    CHECK(geo.arcs[1].length == doctest::Approx(2.0 * std::sqrt(2.0)));
    REQUIRE(geo.connections.size() == 4);
    int n_bdry = 0, n_junc = 0;
    for (const auto& c : geo.connections) {
        if (c.kind == NodeKind::Boundary) ++n_bdry;
        if (c.kind == NodeKind::Junction) ++n_junc;
    }
    CHECK(n_bdry == 3);
    CHECK(n_junc == 1);
    // the junction joins all three arcs
    for (const auto& c : geo.connections)
        if (c.kind == NodeKind::Junction) CHECK(c.members.size() == 3);
    CHECK(geo.disconnected_tags.empty());
}

TEST_CASE("T point projects onto the interior of exactly one arc") {
    std::vector<TaggedPoint> pts = {
        {"B01", 0, 0}, {"B02", 4, 0}, {"T01", 1, 2}, {"B03", 1, 0}};
    // B03 shares the coordinate foot of T01 on purpose? no: B03 at (1,0)
    // would terminate nothing; drop it and use a proper stub instead.
    pts.pop_back();
    pts.push_back({"B03", 1, 2});
    std::vector<std::pair<std::string, std::string>> lns = {{"B01", "B02"}, {"B03", "T01"}};
    // T01 at (1,2) does not touch arc 0; expect failure
    CHECK_THROWS_AS(build_geometry(pts, lns, 1.0), GeometryError);

    pts[2] = {"T01", 1, 0};  // now on arc 0 interior
    pts[3] = {"B03", 1, 2};
    auto geo = build_geometry(pts, lns, 1.0);
    const auto& t = geo.connections[2];
    REQUIRE(t.kind == NodeKind::TJunction);
    REQUIRE(t.members.size() == 2);
    CHECK(t.members[0].arc_id == 1);
    CHECK(t.members[0].where == Attachment::EndEnd);
    CHECK(t.members[1].arc_id == 0);
    CHECK(t.members[1].where == Attachment::Interior);
    CHECK(t.members[1].s == doctest::Approx(1.0));
}

TEST_CASE("endpoint ownership errors") {
    // boundary tag terminating two arcs
    std::vector<TaggedPoint> pts = {{"B01", 0, 0}, {"J01", 1, 0}, {"B02", 2, 0}};
    std::vector<std::pair<std::string, std::string>> lns = {{"B01", "B02"}, {"B02", "J01"}};
    CHECK_THROWS_AS(build_geometry(pts, lns, 1.0), GeometryError);
    // junction with a single arc
    lns = {{"B01", "J01"}};
    CHECK_THROWS_AS(build_geometry(pts, lns, 1.0), GeometryError);
    // zero-length arc
    pts = {{"B01", 0, 0}, {"B02", 0, 0}};
    lns = {{"B01", "B02"}};
    CHECK_THROWS_AS(build_geometry(pts, lns, 1.0), GeometryError);
}

TEST_CASE("CSV round trip is idempotent") {
    const std::string pts_csv = "J01,0.25,1e-3\nT01,3.125,4\nB01,-2,0.1\n";
    auto pts = parse_points(pts_csv);
    auto pts2 = parse_points(points_to_csv(pts));
    REQUIRE(pts2.size() == pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(pts2[i].tag == pts[i].tag);
        CHECK(pts2[i].x == pts[i].x);  // exact: 17 digits round-trip
        CHECK(pts2[i].y == pts[i].y);
    }
    auto lns = parse_lines("J01,T01\nT01,B01\n");
    CHECK(parse_lines(lines_to_csv(lns)) == lns);
}

TEST_CASE("maze dataset loads and is connected") {
    auto pts = parse_points(read_file(std::string(NETFLUX_DATA_DIR) + "/maze_3_data/points.csv"));
    auto lns = parse_lines(read_file(std::string(NETFLUX_DATA_DIR) + "/maze_3_data/lines.csv"));
    auto geo = build_geometry(pts, lns, 50.0);
    CHECK(geo.arcs.size() == 29);
    CHECK(geo.disconnected_tags.empty());
    for (const auto& arc : geo.arcs) {
        CHECK(arc.length >= 50.0);
        CHECK(arc.length <= 300.0);
    }
    // every T point must have exactly two members
    for (const auto& c : geo.connections)
        if (c.kind == NodeKind::TJunction) CHECK(c.members.size() == 2);
    const auto d = describe_geometry(geo);
    CHECK(d.find("t-junction") != std::string::npos);
    CHECK(d.find("warning") == std::string::npos);
}
