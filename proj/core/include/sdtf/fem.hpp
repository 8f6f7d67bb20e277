#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "sdtf/linalg.hpp"
#include "sdtf/mesh.hpp"

namespace sdtf {

/// Scalar/vector fields of (x, y, t) used for loads, boundary data, and
/// manufactured solutions.
using ScalarField = std::function<double(double, double, double)>;
using VectorField = std::function<std::array<double, 2>(double, double, double)>;
using ScalarGradField = std::function<std::array<double, 2>(double, double, double)>;
using VectorGradField = std::function<std::array<double, 4>(double, double, double)>;  // row-major du_i/dx_j

/// Values and gradients of all Lagrange basis functions of the given degree
/// at a reference-triangle point.
struct BasisEval {
    std::vector<double> values;
    std::vector<std::array<double, 2>> gradients;
};

BasisEval reference_basis(int degree, double xi, double eta);

/// Barycentric coordinates of the Lagrange nodes, in the local dof order.
std::vector<std::array<double, 2>> reference_nodes(int degree);

struct QuadraturePoint {
    double xi, eta, weight;
};

/// Quadrature rule on the reference triangle, exact for polynomials up to
/// the stored degree; weights sum to the reference area 1/2.
struct QuadratureRule {
    std::vector<QuadraturePoint> points;
    int exactness = 0;
};

QuadratureRule triangle_quadrature(int exactness);

struct SegmentQuadraturePoint {
    double s, weight;  // on [0, 1], weights sum to 1
};
std::vector<SegmentQuadraturePoint> segment_quadrature(int exactness);

/// Continuous Lagrange space of degree 1..3 over the triangles of one mesh
/// region; vector-valued spaces interleave the components per scalar dof.
class FiniteElementSpace {
  public:
    FiniteElementSpace(const CoupledMesh& mesh, Region region, int degree, int components);

    const CoupledMesh& mesh() const { return *mesh_; }
    Region region() const { return region_; }
    int degree() const { return degree_; }
    int components() const { return components_; }
    std::size_t n_scalar_dofs() const { return n_scalar_dofs_; }
    std::size_t n_dofs() const { return n_scalar_dofs_ * static_cast<std::size_t>(components_); }

    std::size_t n_elements() const { return elements_.size(); }
    std::size_t element_triangle(std::size_t e) const { return elements_[e]; }
    const std::vector<std::size_t>& element_dofs(std::size_t e) const { return element_dofs_[e]; }
    /// Element index for a mesh triangle, or npos if outside the region.
    std::size_t element_of_triangle(std::size_t tri) const { return tri_to_element_[tri]; }
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    Point2 dof_node(std::size_t scalar_dof) const { return node_coords_[scalar_dof]; }

    /// Scalar dof sitting on a mesh vertex, or npos outside the region.
    std::size_t vertex_scalar_dof(std::size_t mesh_vertex) const {
        return vertex_dof_[mesh_vertex];
    }

    /// Scalar dofs whose Lagrange nodes lie on boundary edges with the tag.
    std::vector<std::size_t> boundary_scalar_dofs(BoundaryTag tag) const;

    std::size_t dof_index(std::size_t scalar_dof, int component) const {
        return scalar_dof * static_cast<std::size_t>(components_) + static_cast<std::size_t>(component);
    }

  private:
    const CoupledMesh* mesh_;
    Region region_;
    int degree_;
    int components_;
    std::size_t n_scalar_dofs_ = 0;
    std::vector<std::size_t> elements_;                 // triangle ids in the region
    std::vector<std::size_t> tri_to_element_;
    std::vector<std::vector<std::size_t>> element_dofs_;  // scalar dof ids, local order
    std::vector<Point2> node_coords_;
    std::vector<std::size_t> vertex_dof_;               // mesh vertex -> scalar dof or npos
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_dof_base_;
};

struct FeFunction {
    const FiniteElementSpace* space = nullptr;
    Vector coeffs;
};

FeFunction interpolate(const FiniteElementSpace& space, const ScalarField& f, double t);
FeFunction interpolate(const FiniteElementSpace& space, const VectorField& f, double t);

// Bilinear forms. Quadrature exactness is 2*degree+2 throughout.
SparseMatrix assemble_mass(const FiniteElementSpace& space, double density = 1.0);
SparseMatrix assemble_stiffness(const FiniteElementSpace& space, double coefficient = 1.0);
/// (K grad phi, grad psi) with a constant SPD tensor; scalar spaces only.
SparseMatrix assemble_stiffness_tensor(const FiniteElementSpace& space,
                                       const std::array<double, 4>& k_tensor);
/// b(v, q) = -(q, div v); rows test the pressure space, columns the velocity.
SparseMatrix assemble_divergence(const FiniteElementSpace& velocity,
                                 const FiniteElementSpace& pressure);
/// weight * int_Gamma psi_j (chi_i . n_f); rows velocity, columns head.
SparseMatrix assemble_interface_normal(const FiniteElementSpace& velocity,
                                       const FiniteElementSpace& head, double weight);
/// weight * int_Gamma (u . tau)(v . tau) on the fluid side.
SparseMatrix assemble_interface_tangential(const FiniteElementSpace& velocity, double weight);

Vector assemble_load(const FiniteElementSpace& space, const ScalarField& f, double t);
Vector assemble_load(const FiniteElementSpace& space, const VectorField& f, double t);

// Interface line-integral loads (compensation sources and couplings).
Vector interface_load_normal(const FiniteElementSpace& velocity, const ScalarField& f, double t);
Vector interface_load_tangential(const FiniteElementSpace& velocity, const ScalarField& f, double t);
Vector interface_load_scalar(const FiniteElementSpace& head, const ScalarField& f, double t);

/// Symmetry-preserving elimination of Dirichlet dofs: constrained rows and
/// columns are cleared with a unit diagonal, and the stored column block
/// moves the boundary values to the right-hand side at apply time.
class DirichletConstraints {
  public:
    /// dof_offset places the space inside a larger block system.
    DirichletConstraints(const FiniteElementSpace& space, const std::vector<BoundaryTag>& tags,
                         std::size_t dof_offset = 0);

    const std::vector<std::size_t>& dofs() const { return dofs_; }
    const std::vector<std::size_t>& scalar_dofs() const { return scalar_dofs_; }
    const std::vector<int>& components() const { return component_; }
    bool empty() const { return dofs_.empty(); }

    SparseMatrix eliminate(const SparseMatrix& matrix);

    /// Boundary values at the Lagrange nodes at time t, in dofs() order.
    Vector boundary_values(const ScalarField& g, double t) const;
    Vector boundary_values(const VectorField& g, double t) const;

    /// rhs -= A_cols * values; rhs[constrained] = values. Requires eliminate()
    /// to have run on the matching matrix.
    void apply_rhs(Vector& rhs, const Vector& values) const;

  private:
    const FiniteElementSpace* space_;
    std::vector<std::size_t> dofs_;           // global (offset) dof ids
    std::vector<std::size_t> scalar_dofs_;    // scalar dof per entry
    std::vector<int> component_;
    std::optional<SparseMatrix> columns_;
};

/// One-shot constrained-system setup for a single-space problem.
void apply_dirichlet(SparseMatrix& matrix, Vector& rhs, const FiniteElementSpace& space,
                     BoundaryTag tag, const ScalarField& g, double t);
void apply_dirichlet(SparseMatrix& matrix, Vector& rhs, const FiniteElementSpace& space,
                     BoundaryTag tag, const VectorField& g, double t);

enum class Norm { l2, h1_semi };

double error_norm(const FeFunction& fh, const ScalarField& exact, Norm norm, double t,
                  const ScalarGradField& exact_grad = nullptr);
double error_norm(const FeFunction& fh, const VectorField& exact, Norm norm, double t,
                  const VectorGradField& exact_grad = nullptr);

/// Integral of u . n_f over the interface for a velocity FeFunction.
double interface_normal_flux(const FeFunction& velocity);

}  // namespace sdtf
