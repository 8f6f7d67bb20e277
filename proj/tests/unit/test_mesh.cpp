#include <doctest.h>

#include <map>
#include <set>
#include <stdexcept>

#include "sdtf/mesh.hpp"

using namespace sdtf;

namespace {

const Rect kFluid{0.0, 1.0, 1.0, 2.0};
const Rect kPorous{0.0, 0.0, 1.0, 1.0};

// Combinatorial oracle: V - E + F per region for a simply connected patch.
int euler_characteristic(const CoupledMesh& mesh, Region region) {
    std::set<std::size_t> verts;
    std::set<std::pair<std::size_t, std::size_t>> edges;
    int faces = 0;
    for (const auto& tri : mesh.triangles) {
        if (tri.region != region) continue;
        ++faces;
        for (int e = 0; e < 3; ++e) {
            const std::size_t a = tri.v[e];
            const std::size_t b = tri.v[(e + 1) % 3];
            verts.insert(a);
            verts.insert(b);
            edges.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
        }
    }
    return static_cast<int>(verts.size()) - static_cast<int>(edges.size()) + faces;
}

}  // namespace

TEST_CASE("minimal rect union") {
    const auto mesh = build_rect_union(kFluid, kPorous, 1, 1, 1);
    CHECK(mesh.count(Region::fluid) == 2);
    CHECK(mesh.count(Region::porous) == 2);
    CHECK(mesh.interface_edges.size() == 1);
    CHECK(validate(mesh).empty());
}

TEST_CASE("structured counts at nx = ny = 4") {
    const auto mesh = build_rect_union(kFluid, kPorous, 4, 4, 4);
    CHECK(mesh.count(Region::fluid) == 32);
    CHECK(mesh.count(Region::porous) == 32);
    CHECK(mesh.interface_edges.size() == 4);
    CHECK(mesh.vertices.size() == 25 + 25 - 5);
    CHECK(validate(mesh).empty());
    CHECK(mesh.region_area(Region::fluid) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mesh.region_area(Region::porous) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Euler characteristic is 1 per region") {
    for (std::size_t n : {1, 2, 3, 5}) {
        const auto mesh = build_rect_union(kFluid, kPorous, n, n + 1, n);
        CHECK(euler_characteristic(mesh, Region::fluid) == 1);
        CHECK(euler_characteristic(mesh, Region::porous) == 1);
    }
}

TEST_CASE("interface edges separate regions and normals point into the porous side") {
    const auto mesh = build_rect_union(kFluid, kPorous, 3, 2, 2);
    for (const auto& ie : mesh.interface_edges) {
        CHECK(mesh.triangles[ie.fluid_tri].region == Region::fluid);
        CHECK(mesh.triangles[ie.porous_tri].region == Region::porous);
        CHECK(ie.normal_f.x == doctest::Approx(0.0));
        CHECK(ie.normal_f.y == doctest::Approx(-1.0));
    }
}

TEST_CASE("refining by 2 halves h") {
    const auto coarse = build_rect_union(kFluid, kPorous, 4, 4, 4);
    const auto fine = build_rect_union(kFluid, kPorous, 8, 8, 8);
    CHECK(fine.h == doctest::Approx(coarse.h / 2.0).epsilon(0.01));
}

TEST_CASE("bad rectangle layouts are rejected") {
    CHECK_THROWS_AS(build_rect_union({0, 1.5, 1, 2}, kPorous, 2, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_rect_union({0.1, 1, 1, 2}, kPorous, 2, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_rect_union(kFluid, kPorous, 0, 2, 2), std::invalid_argument);
}

TEST_CASE("validate flags a flipped triangle") {
    auto mesh = build_rect_union(kFluid, kPorous, 2, 2, 2);
    std::swap(mesh.triangles[0].v[0], mesh.triangles[0].v[1]);
    const auto report = validate(mesh);
    REQUIRE(!report.empty());
    bool found = false;
    for (const auto& msg : report) found = found || msg.find("counter-clockwise") != std::string::npos;
    CHECK(found);
}

TEST_CASE("validate flags an unmatched interface grid") {
    auto mesh = build_rect_union(kFluid, kPorous, 2, 2, 2);
    // Duplicate one interface vertex and re-point the porous triangles at the
    // copy, as an unmatched grid pair would.
    const std::size_t v = mesh.interface_edges[0].v[0];
    const std::size_t copy = mesh.vertices.size();
    mesh.vertices.push_back(mesh.vertices[v]);
    for (auto& tri : mesh.triangles) {
        if (tri.region != Region::porous) continue;
        for (auto& vid : tri.v) {
            if (vid == v) vid = copy;
        }
    }
    const auto report = validate(mesh);
    CHECK(!report.empty());
}

TEST_CASE("wellbore default geometry validates") {
    const auto mesh = build_wellbore_domain(WellboreGeometry{}, 0.25);
    CHECK(validate(mesh).empty());
    CHECK(mesh.count(Region::fluid) > 0);
    CHECK(mesh.count(Region::porous) > 0);
    CHECK(!mesh.interface_edges.empty());

    std::map<BoundaryTag, int> tag_counts;
    for (const auto& be : mesh.boundary_edges) tag_counts[be.tag]++;
    CHECK(tag_counts[BoundaryTag::fluid_inflow] == 2);   // two injection tops, one cell wide
    CHECK(tag_counts[BoundaryTag::fluid_outflow] == 2);  // production top, two cells wide
    CHECK(tag_counts[BoundaryTag::porous_dirichlet] > 0);
    CHECK(tag_counts[BoundaryTag::fluid_wall] > 0);

    // Region tags flip across each interface edge and the normal points at
    // the porous triangle.
    for (const auto& ie : mesh.interface_edges) {
        CHECK(mesh.triangles[ie.fluid_tri].region == Region::fluid);
        CHECK(mesh.triangles[ie.porous_tri].region == Region::porous);
        CHECK(ie.normal_f.y == doctest::Approx(-1.0));
    }
}

TEST_CASE("wellbore with no slots degenerates to a porous rectangle") {
    WellboreGeometry geometry;
    geometry.porous = {0.0, 0.0, 1.0, 1.0};
    geometry.slots.clear();
    const auto mesh = build_wellbore_domain(geometry, 0.25);
    CHECK(mesh.count(Region::fluid) == 0);
    CHECK(mesh.interface_edges.empty());
    CHECK(validate(mesh).empty());
    for (const auto& be : mesh.boundary_edges) CHECK(be.tag == BoundaryTag::porous_dirichlet);
}

TEST_CASE("bad wellbore geometries are rejected") {
    WellboreGeometry overlapping;
    overlapping.slots = {{0.0, 0.5, true}, {0.25, 0.5, false}};
    CHECK_THROWS_AS(build_wellbore_domain(overlapping, 0.25), std::invalid_argument);

    WellboreGeometry outside;
    outside.slots = {{6.9, 0.5, true}};
    CHECK_THROWS_AS(build_wellbore_domain(outside, 0.25), std::invalid_argument);

    WellboreGeometry misaligned;
    misaligned.slots = {{0.1, 0.25, true}};
    CHECK_THROWS_AS(build_wellbore_domain(misaligned, 0.25), std::invalid_argument);
}
