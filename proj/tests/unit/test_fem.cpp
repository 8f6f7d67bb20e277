#include <doctest.h>

#include <cmath>
#include <random>

#include "sdtf/fem.hpp"
#include "sdtf/linalg.hpp"

using namespace sdtf;

namespace {

const Rect kFluid{0.0, 1.0, 1.0, 2.0};
const Rect kPorous{0.0, 0.0, 1.0, 1.0};

CoupledMesh unit_square_porous(double h) {
    WellboreGeometry geometry;
    geometry.porous = {0.0, 0.0, 1.0, 1.0};
    geometry.slots.clear();
    return build_wellbore_domain(geometry, h);
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

TEST_CASE("reference basis has the Lagrange property at its nodes") {
    for (int degree : {1, 2, 3}) {
        const auto nodes = reference_nodes(degree);
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            const auto eval = reference_basis(degree, nodes[n][0], nodes[n][1]);
            for (std::size_t i = 0; i < eval.values.size(); ++i) {
                CHECK(eval.values[i] == doctest::Approx(i == n ? 1.0 : 0.0).epsilon(1e-13));
            }
        }
    }
    CHECK_THROWS_AS(reference_basis(4, 0.1, 0.1), std::invalid_argument);
}

TEST_CASE("partition of unity and vanishing gradient sum") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int degree : {1, 2, 3}) {
        for (int round = 0; round < 50; ++round) {
            double xi = dist(rng);
            double eta = dist(rng) * (1.0 - xi);
            const auto eval = reference_basis(degree, xi, eta);
            double sum = 0.0, gx = 0.0, gy = 0.0;
            for (std::size_t i = 0; i < eval.values.size(); ++i) {
                sum += eval.values[i];
                gx += eval.gradients[i][0];
                gy += eval.gradients[i][1];
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
            CHECK(gx == doctest::Approx(0.0).epsilon(1e-12));
            CHECK(gy == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("triangle quadrature reproduces the factorial formula") {
    // int_T x^a y^b = a! b! / (a+b+2)! on the reference triangle.
    for (int d = 1; d <= 8; ++d) {
        const auto rule = triangle_quadrature(d);
        for (int a = 0; a + 0 <= d; ++a) {
            for (int b = 0; a + b <= d; ++b) {
                double acc = 0.0;
                for (const auto& q : rule.points) {
                    acc += q.weight * std::pow(q.xi, a) * std::pow(q.eta, b);
                }
                const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                CHECK(std::abs(acc - exact) <= 1e-13 * std::max(1.0, std::abs(exact)));
            }
        }
    }
}

TEST_CASE("exactness-1 rule is the centroid rule") {
    const auto rule = triangle_quadrature(1);
    REQUIRE(rule.points.size() == 1);
    CHECK(rule.points[0].weight == doctest::Approx(0.5));
    CHECK(rule.points[0].xi == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(triangle_quadrature(9), std::invalid_argument);
}

TEST_CASE("segment quadrature integrates cubics with two points") {
    const auto rule = segment_quadrature(3);
    CHECK(rule.size() == 2);
    double acc = 0.0;
    for (const auto& q : rule) acc += q.weight * q.s * q.s * q.s;
    CHECK(acc == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("P1 mass matrix on one triangle matches the closed form") {
    // Unit right triangle as the single porous element of a tiny mesh.
    CoupledMesh mesh;
    mesh.vertices = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    mesh.triangles = {{{0, 1, 2}, Region::porous}};
    mesh.boundary_edges = {{{0, 1}, BoundaryTag::porous_dirichlet},
                           {{1, 2}, BoundaryTag::porous_dirichlet},
                           {{2, 0}, BoundaryTag::porous_dirichlet}};
    mesh.h = std::sqrt(2.0);
    const FiniteElementSpace space(mesh, Region::porous, 1, 1);
    const auto m = assemble_mass(space);
    const double area = 0.5;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(m.coeff(i, j) == doctest::Approx(area / 12.0 * (i == j ? 2.0 : 1.0))
                                        .epsilon(1e-13));
        }
    }
}

TEST_CASE("stiffness annihilates constants and mass sums to the area") {
    const auto mesh = build_rect_union(kFluid, kPorous, 3, 3, 3);
    for (int degree : {1, 2, 3}) {
        const FiniteElementSpace space(mesh, Region::fluid, degree, 1);
        const auto a = assemble_stiffness(space, 2.5);
        const Vector ones = Vector::Ones(static_cast<Eigen::Index>(space.n_dofs()));
        CHECK(a.matvec(ones).lpNorm<Eigen::Infinity>() < 1e-12);

        const auto m = assemble_mass(space);
        CHECK(ones.dot(m.matvec(ones)) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("loads integrate constants and polynomials exactly") {
    const auto mesh = build_rect_union(kFluid, kPorous, 4, 4, 4);
    const FiniteElementSpace p1(mesh, Region::fluid, 1, 1);
    const Vector zero_load = assemble_load(p1, [](double, double, double) { return 0.0; }, 0.0);
    CHECK(zero_load.norm() == 0.0);

    const Vector unit_load = assemble_load(p1, [](double, double, double) { return 1.0; }, 0.0);
    CHECK(unit_load.sum() == doctest::Approx(1.0).epsilon(1e-13));  // fluid area

    const FiniteElementSpace p2(mesh, Region::fluid, 2, 1);
    const Vector x_load = assemble_load(p2, [](double x, double, double) { return x; }, 0.0);
    CHECK(x_load.sum() == doctest::Approx(0.5).epsilon(1e-13));  // int x over the unit square
}

TEST_CASE("Poisson patch test reproduces polynomials of each degree") {
    const auto mesh = unit_square_porous(0.25);
    struct Case {
        int degree;
        ScalarField u;
        ScalarField minus_laplace;
    };
    const std::vector<Case> cases = {
        {1, [](double x, double y, double) { return 2.0 * x - 3.0 * y + 1.0; },
         [](double, double, double) { return 0.0; }},
        {2, [](double x, double y, double) { return x * x + y * y; },
         [](double, double, double) { return -4.0; }},
        {3, [](double x, double y, double) { return x * x * x + 2.0 * y * y * y - 3.0 * x * y * y; },
         [](double x, double y, double) { return -(6.0 * x + 12.0 * y - 6.0 * x); }},
    };
    for (const auto& c : cases) {
        const FiniteElementSpace space(mesh, Region::porous, c.degree, 1);
        SparseMatrix a = assemble_stiffness(space);
        Vector rhs = assemble_load(space, c.minus_laplace, 0.0);
        apply_dirichlet(a, rhs, space, BoundaryTag::porous_dirichlet, c.u, 0.0);
        const Vector x = solve_direct(a, rhs);
        const FeFunction fh{&space, x};
        CHECK(error_norm(fh, c.u, Norm::l2, 0.0) < 1e-9);
    }
}

TEST_CASE("apply_dirichlet interpolates boundary data exactly") {
    const auto mesh = unit_square_porous(0.25);
    const FiniteElementSpace space(mesh, Region::porous, 2, 1);
    SparseMatrix a = assemble_stiffness(space);
    Vector rhs = assemble_load(space, [](double, double, double) { return 0.0; }, 0.0);

    SUBCASE("homogeneous data pins boundary dofs to zero") {
        apply_dirichlet(a, rhs, space, BoundaryTag::porous_dirichlet,
                        ScalarField([](double, double, double) { return 0.0; }), 0.0);
        const Vector x = solve_direct(a, rhs);
        for (std::size_t s : space.boundary_scalar_dofs(BoundaryTag::porous_dirichlet)) {
            CHECK(std::abs(x[static_cast<Eigen::Index>(s)]) < 1e-14);
        }
    }
    SUBCASE("polynomial data is exact at boundary nodes") {
        const ScalarField g = [](double x, double y, double) { return x * x - y; };
        apply_dirichlet(a, rhs, space, BoundaryTag::porous_dirichlet, g, 0.0);
        const Vector x = solve_direct(a, rhs);
        for (std::size_t s : space.boundary_scalar_dofs(BoundaryTag::porous_dirichlet)) {
            const Point2 p = space.dof_node(s);
            CHECK(x[static_cast<Eigen::Index>(s)] == doctest::Approx(g(p.x, p.y, 0.0)).epsilon(1e-13));
        }
    }
    SUBCASE("unknown tags are rejected") {
        CHECK_THROWS_AS(apply_dirichlet(a, rhs, space, BoundaryTag::fluid_inflow,
                                        ScalarField([](double, double, double) { return 0.0; }),
                                        0.0),
                        std::invalid_argument);
    }
}

TEST_CASE("divergence matrix annihilates constants against zero-trace velocities") {
    const auto mesh = build_rect_union(kFluid, kPorous, 4, 4, 4);
    const FiniteElementSpace velocity(mesh, Region::fluid, 2, 2);
    const FiniteElementSpace pressure(mesh, Region::fluid, 1, 1);
    const auto b = assemble_divergence(velocity, pressure);

    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector v(static_cast<Eigen::Index>(velocity.n_dofs()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
    // Zero the full fluid boundary (x in {0,1} or y in {1,2} edges) so the
    // normal trace vanishes on the closed boundary.
    for (std::size_t s = 0; s < velocity.n_scalar_dofs(); ++s) {
        const Point2 p = velocity.dof_node(s);
        const bool on_boundary = std::abs(p.x) < 1e-12 || std::abs(p.x - 1.0) < 1e-12 ||
                                 std::abs(p.y - 1.0) < 1e-12 || std::abs(p.y - 2.0) < 1e-12;
        if (on_boundary) {
            v[static_cast<Eigen::Index>(velocity.dof_index(s, 0))] = 0.0;
            v[static_cast<Eigen::Index>(velocity.dof_index(s, 1))] = 0.0;
        }
    }
    const Vector bv = b.matvec(v);
    CHECK(std::abs(bv.sum()) < 1e-12 * std::max(1.0, v.norm()));
}

TEST_CASE("interface normal coupling matches a line-integral oracle") {
    const auto mesh = build_rect_union(kFluid, kPorous, 4, 4, 4);
    const FiniteElementSpace velocity(mesh, Region::fluid, 2, 2);
    const FiniteElementSpace head(mesh, Region::porous, 2, 1);
    const double g = 1.7;
    const auto c_nf = assemble_interface_normal(velocity, head, g);

    // Polynomial fields are represented exactly, so the quadrature of the
    // assembled form must match the closed-form line integral on y = 1 with
    // n_f = (0, -1).
    const VectorField vf = [](double x, double y, double) {
        return std::array<double, 2>{0.0, x * y};
    };
    const ScalarField hf = [](double x, double y, double) { return 1.0 + x * (2.0 - y); };
    const Vector v = interpolate(velocity, vf, 0.0).coeffs;
    const Vector phi = interpolate(head, hf, 0.0).coeffs;
    // g int_0^1 (1 + x)(x)(-1) dx at y = 1.
    const double expected = -g * (1.0 / 2.0 + 1.0 / 3.0);
    CHECK(v.dot(c_nf.matvec(phi)) == doctest::Approx(expected).epsilon(1e-12));

    SUBCASE("skew pairing: head-to-velocity block is the transpose") {
        const auto c_fn = c_nf.transposed();
        CHECK(phi.dot(c_fn.matvec(v)) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("BJS tangential form integrates tangential products") {
    const auto mesh = build_rect_union(kFluid, kPorous, 2, 2, 2);
    const FiniteElementSpace velocity(mesh, Region::fluid, 2, 2);
    const double weight = 0.35;
    const auto a = assemble_interface_tangential(velocity, weight);
    const Vector tangential =
        interpolate(velocity, [](double, double, double) { return std::array<double, 2>{1.0, 0.0}; },
                    0.0)
            .coeffs;
    const Vector normal =
        interpolate(velocity, [](double, double, double) { return std::array<double, 2>{0.0, 1.0}; },
                    0.0)
            .coeffs;
    CHECK(tangential.dot(a.matvec(tangential)) == doctest::Approx(weight).epsilon(1e-12));
    CHECK(normal.dot(a.matvec(normal)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("error norms: interpolation exactness, zero function, and order") {
    const auto mesh = build_rect_union(kFluid, kPorous, 8, 8, 8);
    const FiniteElementSpace p2(mesh, Region::fluid, 2, 1);
    const ScalarField quadratic = [](double x, double y, double) { return x * x - 2.0 * x * y; };
    const FeFunction interp = interpolate(p2, quadratic, 0.0);
    CHECK(error_norm(interp, quadratic, Norm::l2, 0.0) < 1e-12);

    const FeFunction zero{&p2, Vector::Zero(static_cast<Eigen::Index>(p2.n_dofs()))};
    const ScalarField one = [](double, double, double) { return 1.0; };
    CHECK(error_norm(zero, one, Norm::l2, 0.0) == doctest::Approx(1.0).epsilon(1e-12));

    // P1 interpolation error of sin(pi x) drops by ~4x per refinement.
    const ScalarField sine = [](double x, double, double) { return std::sin(M_PI * x); };
    const auto mesh16 = build_rect_union(kFluid, kPorous, 16, 16, 16);
    const FiniteElementSpace p1_8(mesh, Region::fluid, 1, 1);
    const FiniteElementSpace p1_16(mesh16, Region::fluid, 1, 1);
    const double e8 = error_norm(interpolate(p1_8, sine, 0.0), sine, Norm::l2, 0.0);
    const double e16 = error_norm(interpolate(p1_16, sine, 0.0), sine, Norm::l2, 0.0);
    CHECK(e8 / e16 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("h1 seminorm needs the exact gradient") {
    const auto mesh = build_rect_union(kFluid, kPorous, 2, 2, 2);
    const FiniteElementSpace p1(mesh, Region::fluid, 1, 1);
    const ScalarField linear = [](double x, double y, double) { return x + 2.0 * y; };
    const FeFunction fh = interpolate(p1, linear, 0.0);
    CHECK_THROWS_AS(error_norm(fh, linear, Norm::h1_semi, 0.0), std::invalid_argument);
    const ScalarGradField grad = [](double, double, double) {
        return std::array<double, 2>{1.0, 2.0};
    };
    CHECK(error_norm(fh, linear, Norm::h1_semi, 0.0, grad) < 1e-12);
}

TEST_CASE("interface flux of simple fields") {
    const auto mesh = build_rect_union(kFluid, kPorous, 4, 4, 4);
    const FiniteElementSpace velocity(mesh, Region::fluid, 2, 2);
    const FeFunction zero{&velocity, Vector::Zero(static_cast<Eigen::Index>(velocity.n_dofs()))};
    CHECK(interface_normal_flux(zero) == 0.0);

    const FeFunction upward = interpolate(
        velocity, [](double, double, double) { return std::array<double, 2>{0.0, 1.0}; }, 0.0);
    CHECK(interface_normal_flux(upward) == doctest::Approx(-1.0).epsilon(1e-13));
}

TEST_CASE("vector spaces interleave components consistently") {
    const auto mesh = build_rect_union(kFluid, kPorous, 2, 2, 2);
    const FiniteElementSpace velocity(mesh, Region::fluid, 2, 2);
    CHECK(velocity.n_dofs() == 2 * velocity.n_scalar_dofs());
    const FeFunction f = interpolate(
        velocity, [](double x, double y, double) { return std::array<double, 2>{x, y}; }, 0.0);
    for (std::size_t s = 0; s < velocity.n_scalar_dofs(); ++s) {
        const Point2 p = velocity.dof_node(s);
        CHECK(f.coeffs[static_cast<Eigen::Index>(velocity.dof_index(s, 0))] == doctest::Approx(p.x));
        CHECK(f.coeffs[static_cast<Eigen::Index>(velocity.dof_index(s, 1))] == doctest::Approx(p.y));
    }
}
