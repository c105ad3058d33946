#pragma once

#include <string>
#include <vector>

#include "netflux/hdg.hpp"
#include "netflux/time_integration.hpp"

namespace netflux {

enum class Region { All, LeftHalf, RightHalf };

/// Trapezoidal mass of one equation: sum over elements of h (u0 + u1) / 2.
/// Halves are split by the element midpoint's planar x coordinate against
/// the bounding-box midline.
double compute_mass(const HdgSystem& sys, const SystemState& state, int eq,
                    Region region = Region::All);

struct MassReport {
    double total = 0.0;
    double left = 0.0;
    double right = 0.0;
};

MassReport compute_mass_report(const HdgSystem& sys, const SystemState& state, int eq);

/// CSV snapshot `arc_id,equation,s,value,time`: trace values at mesh nodes
/// plus element-average bulk values at element midpoints, sorted by
/// (arc, equation, s). Values print with 17 significant digits.
std::string snapshot_csv(const HdgSystem& sys, const SystemState& state);
void export_snapshot(const HdgSystem& sys, const SystemState& state, const std::string& path);

/// CSV step log `step,time,dt,newton_iterations,accepted`.
std::string diagnostics_csv(const std::vector<StepRecord>& records);
void export_diagnostics(const std::vector<StepRecord>& records, const std::string& path);

/// Bird's-eye SVG of one equation: every element drawn as a coloured
/// segment (viridis ramp over the element averages, degenerate ranges map
/// to the mid colour), one <g> per arc, plus a colour bar. Deterministic
/// output for identical inputs.
std::string render_birdview(const HdgSystem& sys, const SystemState& state, int eq,
                            int width = 900);
void render_birdview_file(const HdgSystem& sys, const SystemState& state, int eq,
                          const std::string& path, int width = 900);

/// Geometry-only SVG: arcs with id labels, nodes marked by kind with tags.
std::string render_geometry(const NetworkGeometry& geometry, int width = 900);
void render_geometry_file(const NetworkGeometry& geometry, const std::string& path,
                          int width = 900);

}  // namespace netflux
