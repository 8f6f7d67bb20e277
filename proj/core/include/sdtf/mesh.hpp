#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace sdtf {

enum class Region { fluid, porous };

enum class BoundaryTag {
    fluid_wall,
    fluid_inflow,
    fluid_outflow,
    porous_dirichlet,
    interface,
};

std::string to_string(Region r);
std::string to_string(BoundaryTag t);

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Triangle {
    std::array<std::size_t, 3> v;  // counter-clockwise
    Region region;
};

struct BoundaryEdge {
    std::array<std::size_t, 2> v;
    BoundaryTag tag;
};

/// Interface edge shared verbatim by one fluid and one porous triangle.
/// The normal points from the fluid into the porous region.
struct InterfaceEdge {
    std::array<std::size_t, 2> v;
    std::size_t fluid_tri = 0;
    std::size_t porous_tri = 0;
    Point2 normal_f;   // unit, fluid -> porous
    Point2 tangent;    // unit, normal rotated by -90 degrees
};

/// Matched triangulations of the fluid and porous subdomains with tagged
/// boundaries and a shared straight interface.
struct CoupledMesh {
    std::vector<Point2> vertices;
    std::vector<Triangle> triangles;
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<InterfaceEdge> interface_edges;
    double h = 0.0;  // max element diameter

    std::size_t count(Region r) const;
    double region_area(Region r) const;
};

struct Rect {
    double x0, y0, x1, y1;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

/// Structured triangulation of a fluid rectangle stacked on top of a porous
/// rectangle sharing one full horizontal edge. Cells are split into two
/// triangles with alternating diagonals; interface vertices coincide exactly.
CoupledMesh build_rect_union(const Rect& fluid_rect, const Rect& porous_rect,
                             std::size_t nx, std::size_t ny_fluid, std::size_t ny_porous);

/// One open wellbore slot sitting on top of the porous block.
struct WellboreSlot {
    double x0 = 0.0;
    double width = 0.0;
    bool injection = true;  // false: production (free outflow at the top)
};

struct WellboreGeometry {
    Rect porous{0.0, 0.0, 7.0, 2.0};
    double slot_height = 1.0;
    std::vector<WellboreSlot> slots{
        {0.0, 0.25, true},
        {3.25, 0.50, false},
        {6.75, 0.25, true},
    };
};

/// Conceptual production domain: a porous block with rectangular wellbore
/// slots opening into it. Slot edges must align with the target grid.
CoupledMesh build_wellbore_domain(const WellboreGeometry& geometry, double target_h);

/// Reports violated mesh invariants; an empty report means the mesh is valid.
std::vector<std::string> validate(const CoupledMesh& mesh);

double triangle_area(const CoupledMesh& mesh, const Triangle& tri);

}  // namespace sdtf
