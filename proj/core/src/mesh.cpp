#include "sdtf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sdtf {

namespace {

double cross(const Point2& a, const Point2& b, const Point2& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

std::pair<std::size_t, std::size_t> sorted_edge(std::size_t a, std::size_t b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

struct EdgeIncidence {
    std::vector<std::size_t> tris;
};

std::map<std::pair<std::size_t, std::size_t>, EdgeIncidence>
edge_incidence(const CoupledMesh& mesh) {
    std::map<std::pair<std::size_t, std::size_t>, EdgeIncidence> edges;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int e = 0; e < 3; ++e) {
            edges[sorted_edge(tri.v[e], tri.v[(e + 1) % 3])].tris.push_back(t);
        }
    }
    return edges;
}

Point2 centroid(const CoupledMesh& mesh, std::size_t t) {
    const auto& tri = mesh.triangles[t];
    const Point2& a = mesh.vertices[tri.v[0]];
    const Point2& b = mesh.vertices[tri.v[1]];
    const Point2& c = mesh.vertices[tri.v[2]];
    return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

/// Fills interface_edges and h, and collects untagged boundary edges. The
/// caller assigns boundary tags from the returned list.
std::vector<std::array<std::size_t, 2>> extract_topology(CoupledMesh& mesh) {
    std::vector<std::array<std::size_t, 2>> boundary;
    for (const auto& [key, inc] : edge_incidence(mesh)) {
        if (inc.tris.size() == 1) {
            boundary.push_back({key.first, key.second});
        } else if (inc.tris.size() == 2) {
            const Region r0 = mesh.triangles[inc.tris[0]].region;
            const Region r1 = mesh.triangles[inc.tris[1]].region;
            if (r0 == r1) continue;
            InterfaceEdge ie;
            ie.v = {key.first, key.second};
            ie.fluid_tri = r0 == Region::fluid ? inc.tris[0] : inc.tris[1];
            ie.porous_tri = r0 == Region::porous ? inc.tris[0] : inc.tris[1];
            const Point2& a = mesh.vertices[key.first];
            const Point2& b = mesh.vertices[key.second];
            const double len = std::hypot(b.x - a.x, b.y - a.y);
            Point2 n{(b.y - a.y) / len, -(b.x - a.x) / len};
            const Point2 pc = centroid(mesh, ie.porous_tri);
            const Point2 mid{(a.x + b.x) / 2.0, (a.y + b.y) / 2.0};
            if ((pc.x - mid.x) * n.x + (pc.y - mid.y) * n.y < 0.0) {
                n.x = -n.x;
                n.y = -n.y;
            }
            ie.normal_f = n;
            ie.tangent = {-n.y, n.x};
            mesh.interface_edges.push_back(ie);
        } else {
            throw std::runtime_error("edge shared by more than two triangles");
        }
    }
    std::sort(mesh.interface_edges.begin(), mesh.interface_edges.end(),
              [&](const InterfaceEdge& a, const InterfaceEdge& b) {
                  const Point2 ma{(mesh.vertices[a.v[0]].x + mesh.vertices[a.v[1]].x) / 2.0,
                                  (mesh.vertices[a.v[0]].y + mesh.vertices[a.v[1]].y) / 2.0};
                  const Point2 mb{(mesh.vertices[b.v[0]].x + mesh.vertices[b.v[1]].x) / 2.0,
                                  (mesh.vertices[b.v[0]].y + mesh.vertices[b.v[1]].y) / 2.0};
                  return ma.x != mb.x ? ma.x < mb.x : ma.y < mb.y;
              });

    double h = 0.0;
    for (const auto& tri : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            const Point2& a = mesh.vertices[tri.v[e]];
            const Point2& b = mesh.vertices[tri.v[(e + 1) % 3]];
            h = std::max(h, std::hypot(b.x - a.x, b.y - a.y));
        }
    }
    mesh.h = h;
    return boundary;
}

void add_cell_triangles(CoupledMesh& mesh, std::size_t v00, std::size_t v10,
                        std::size_t v01, std::size_t v11, bool diag_main, Region region) {
    if (diag_main) {
        // diagonal v00 -- v11
        mesh.triangles.push_back({{v00, v10, v11}, region});
        mesh.triangles.push_back({{v00, v11, v01}, region});
    } else {
        // diagonal v10 -- v01
        mesh.triangles.push_back({{v00, v10, v01}, region});
        mesh.triangles.push_back({{v10, v11, v01}, region});
    }
}

}  // namespace

std::string to_string(Region r) {
    return r == Region::fluid ? "fluid" : "porous";
}

std::string to_string(BoundaryTag t) {
    switch (t) {
        case BoundaryTag::fluid_wall: return "fluid_wall";
        case BoundaryTag::fluid_inflow: return "fluid_inflow";
        case BoundaryTag::fluid_outflow: return "fluid_outflow";
        case BoundaryTag::porous_dirichlet: return "porous_dirichlet";
        case BoundaryTag::interface: return "interface";
    }
    return "?";
}

std::size_t CoupledMesh::count(Region r) const {
    std::size_t n = 0;
    for (const auto& t : triangles) n += t.region == r ? 1 : 0;
    return n;
}

double CoupledMesh::region_area(Region r) const {
    double a = 0.0;
    for (const auto& t : triangles) {
        if (t.region == r) a += triangle_area(*this, t);
    }
    return a;
}

double triangle_area(const CoupledMesh& mesh, const Triangle& tri) {
    return 0.5 * cross(mesh.vertices[tri.v[0]], mesh.vertices[tri.v[1]], mesh.vertices[tri.v[2]]);
}

CoupledMesh build_rect_union(const Rect& fluid_rect, const Rect& porous_rect,
                             std::size_t nx, std::size_t ny_fluid, std::size_t ny_porous) {
    const double tol = 1e-12;
    if (std::abs(fluid_rect.y0 - porous_rect.y1) > tol ||
        std::abs(fluid_rect.x0 - porous_rect.x0) > tol ||
        std::abs(fluid_rect.x1 - porous_rect.x1) > tol) {
        throw std::invalid_argument(
            "build_rect_union: rectangles must share one full horizontal edge");
    }
    if (nx == 0 || ny_fluid == 0 || ny_porous == 0) {
        throw std::invalid_argument("build_rect_union: subdivisions must be positive");
    }

    CoupledMesh mesh;
    const std::size_t ny = ny_fluid + ny_porous;
    const double dx = porous_rect.width() / static_cast<double>(nx);
    // One shared column of y-coordinates: porous rows first, interface row shared.
    std::vector<double> ys(ny + 1);
    for (std::size_t j = 0; j <= ny_porous; ++j) {
        ys[j] = porous_rect.y0 + porous_rect.height() * static_cast<double>(j) /
                                     static_cast<double>(ny_porous);
    }
    for (std::size_t j = 1; j <= ny_fluid; ++j) {
        ys[ny_porous + j] = fluid_rect.y0 + fluid_rect.height() * static_cast<double>(j) /
                                                static_cast<double>(ny_fluid);
    }

    auto vid = [&](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
    mesh.vertices.resize((nx + 1) * (ny + 1));
    for (std::size_t j = 0; j <= ny; ++j) {
        for (std::size_t i = 0; i <= nx; ++i) {
            mesh.vertices[vid(i, j)] = {porous_rect.x0 + dx * static_cast<double>(i), ys[j]};
        }
    }
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const Region region = j < ny_porous ? Region::porous : Region::fluid;
            add_cell_triangles(mesh, vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1),
                               (i + j) % 2 == 0, region);
        }
    }

    const auto boundary = extract_topology(mesh);
    const double y_bot = porous_rect.y0;
    const double y_int = porous_rect.y1;
    for (const auto& e : boundary) {
        const Point2& a = mesh.vertices[e[0]];
        const Point2& b = mesh.vertices[e[1]];
        const double ym = (a.y + b.y) / 2.0;
        BoundaryTag tag;
        if (ym < y_int - tol || std::abs(ym - y_bot) < tol) {
            tag = BoundaryTag::porous_dirichlet;
        } else {
            tag = BoundaryTag::fluid_wall;
        }
        mesh.boundary_edges.push_back({{e[0], e[1]}, tag});
    }
    return mesh;
}

CoupledMesh build_wellbore_domain(const WellboreGeometry& geometry, double target_h) {
    if (target_h <= 0.0) throw std::invalid_argument("build_wellbore_domain: target_h <= 0");
    const Rect& pr = geometry.porous;
    const double tol = 1e-9;

    for (std::size_t i = 0; i < geometry.slots.size(); ++i) {
        const auto& s = geometry.slots[i];
        if (s.width <= 0.0) throw std::invalid_argument("wellbore slot with non-positive width");
        if (s.x0 < pr.x0 - tol || s.x0 + s.width > pr.x1 + tol) {
            throw std::invalid_argument("wellbore slot outside the porous block");
        }
        for (std::size_t j = i + 1; j < geometry.slots.size(); ++j) {
            const auto& o = geometry.slots[j];
            if (s.x0 < o.x0 + o.width - tol && o.x0 < s.x0 + s.width - tol) {
                throw std::invalid_argument("overlapping wellbore slots");
            }
        }
    }

    // Uniform grid over the bounding box; slot edges must land on grid lines.
    const std::size_t per_unit = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                              std::lround(1.0 / target_h)));
    const double h = 1.0 / static_cast<double>(per_unit);
    auto snap = [&](double x, const char* what) {
        const double g = (x - pr.x0) / h;
        if (std::abs(g - std::lround(g)) > 1e-9) {
            throw std::invalid_argument(std::string("wellbore ") + what +
                                        " does not align with the target grid");
        }
        return static_cast<std::size_t>(std::lround(g));
    };

    const double y_top = geometry.slots.empty() ? pr.y1 : pr.y1 + geometry.slot_height;
    const std::size_t nx = snap(pr.x1, "width");
    for (const auto& s : geometry.slots) {
        snap(s.x0, "slot wall");
        snap(s.x0 + s.width, "slot wall");
    }
    const std::size_t ny = static_cast<std::size_t>(std::lround((y_top - pr.y0) / h));
    const std::size_t ny_por = static_cast<std::size_t>(std::lround(pr.height() / h));
    if (std::abs(pr.height() / h - static_cast<double>(ny_por)) > 1e-9 ||
        (!geometry.slots.empty() &&
         std::abs(geometry.slot_height / h - std::lround(geometry.slot_height / h)) > 1e-9)) {
        throw std::invalid_argument("wellbore heights do not align with the target grid");
    }

    CoupledMesh mesh;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> vmap;
    auto vertex = [&](std::size_t i, std::size_t j) {
        const auto key = std::make_pair(i, j);
        auto it = vmap.find(key);
        if (it == vmap.end()) {
            it = vmap.emplace(key, mesh.vertices.size()).first;
            mesh.vertices.push_back({pr.x0 + h * static_cast<double>(i),
                                     pr.y0 + h * static_cast<double>(j)});
        }
        return it->second;
    };

    auto slot_at = [&](double xc) -> const WellboreSlot* {
        for (const auto& s : geometry.slots) {
            if (xc > s.x0 && xc < s.x0 + s.width) return &s;
        }
        return nullptr;
    };

    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double xc = pr.x0 + h * (static_cast<double>(i) + 0.5);
            const double yc = pr.y0 + h * (static_cast<double>(j) + 0.5);
            Region region;
            if (yc < pr.y1) {
                region = Region::porous;
            } else if (slot_at(xc) != nullptr) {
                region = Region::fluid;
            } else {
                continue;
            }
            add_cell_triangles(mesh, vertex(i, j), vertex(i + 1, j), vertex(i, j + 1),
                               vertex(i + 1, j + 1), (i + j) % 2 == 0, region);
        }
    }

    const auto boundary = extract_topology(mesh);
    for (const auto& e : boundary) {
        const Point2& a = mesh.vertices[e[0]];
        const Point2& b = mesh.vertices[e[1]];
        const Point2 mid{(a.x + b.x) / 2.0, (a.y + b.y) / 2.0};
        BoundaryTag tag;
        if (mid.y < pr.y1 + tol) {
            tag = BoundaryTag::porous_dirichlet;
        } else if (std::abs(mid.y - y_top) < tol && std::abs(a.y - b.y) < tol) {
            const WellboreSlot* s = slot_at(mid.x);
            if (s == nullptr) throw std::runtime_error("top edge outside every slot");
            tag = s->injection ? BoundaryTag::fluid_inflow : BoundaryTag::fluid_outflow;
        } else {
            tag = BoundaryTag::fluid_wall;
        }
        mesh.boundary_edges.push_back({{e[0], e[1]}, tag});
    }
    return mesh;
}

std::vector<std::string> validate(const CoupledMesh& mesh) {
    std::vector<std::string> report;
    auto complain = [&](const std::string& msg) { report.push_back(msg); };

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (triangle_area(mesh, mesh.triangles[t]) <= 0.0) {
            complain("triangle " + std::to_string(t) + " is not counter-clockwise");
        }
    }

    const auto edges = edge_incidence(mesh);

    std::set<std::pair<std::size_t, std::size_t>> tagged;
    for (const auto& be : mesh.boundary_edges) {
        const auto key = sorted_edge(be.v[0], be.v[1]);
        if (!tagged.insert(key).second) {
            complain("boundary edge tagged more than once");
        }
        const auto it = edges.find(key);
        if (it == edges.end() || it->second.tris.size() != 1) {
            complain("tagged boundary edge is not on the boundary");
        }
    }
    for (const auto& [key, inc] : edges) {
        if (inc.tris.size() == 1 && tagged.count(key) == 0) {
            complain("boundary edge (" + std::to_string(key.first) + "," +
                     std::to_string(key.second) + ") carries no tag");
        }
    }

    std::set<std::pair<std::size_t, std::size_t>> interface_keys;
    for (const auto& ie : mesh.interface_edges) {
        const auto key = sorted_edge(ie.v[0], ie.v[1]);
        interface_keys.insert(key);
        const auto it = edges.find(key);
        if (it == edges.end() || it->second.tris.size() != 2) {
            complain("interface edge is not shared by exactly two triangles");
            continue;
        }
        const Region r0 = mesh.triangles[it->second.tris[0]].region;
        const Region r1 = mesh.triangles[it->second.tris[1]].region;
        if (r0 == r1) {
            complain("interface edge not shared by one fluid and one porous triangle");
        }
        const Point2 pc = centroid(mesh, ie.porous_tri);
        const Point2& a = mesh.vertices[ie.v[0]];
        const Point2& b = mesh.vertices[ie.v[1]];
        const Point2 mid{(a.x + b.x) / 2.0, (a.y + b.y) / 2.0};
        if ((pc.x - mid.x) * ie.normal_f.x + (pc.y - mid.y) * ie.normal_f.y <= 0.0) {
            complain("interface normal does not point from fluid to porous");
        }
        const double nlen = std::hypot(ie.normal_f.x, ie.normal_f.y);
        if (std::abs(nlen - 1.0) > 1e-12) complain("interface normal is not a unit vector");
    }
    for (const auto& [key, inc] : edges) {
        if (inc.tris.size() == 2 &&
            mesh.triangles[inc.tris[0]].region != mesh.triangles[inc.tris[1]].region &&
            interface_keys.count(key) == 0) {
            complain("fluid/porous edge missing from interface list");
        }
    }

    // Unmatched grids leave geometrically coincident but distinct vertices
    // along the interface; each region then sees the edge as boundary.
    std::set<std::size_t> iface_vertices;
    for (const auto& ie : mesh.interface_edges) {
        iface_vertices.insert(ie.v[0]);
        iface_vertices.insert(ie.v[1]);
    }
    for (std::size_t a : iface_vertices) {
        for (std::size_t b = 0; b < mesh.vertices.size(); ++b) {
            if (b == a) continue;
            if (std::abs(mesh.vertices[a].x - mesh.vertices[b].x) < 1e-12 &&
                std::abs(mesh.vertices[a].y - mesh.vertices[b].y) < 1e-12) {
                complain("duplicated vertex on the interface (unmatched grids)");
            }
        }
    }
    return report;
}

}  // namespace sdtf
