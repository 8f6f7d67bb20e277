#include "sdtf/fem.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace sdtf {

namespace {

constexpr int kMaxExactness = 8;

// d/dlambda_i of each basis function, combined into reference-plane
// gradients via dxi = d/dl1 - d/dl0, deta = d/dl2 - d/dl0.
std::array<double, 2> chain(const std::array<double, 3>& dl) {
    return {dl[1] - dl[0], dl[2] - dl[0]};
}

/// Gauss-Legendre nodes and weights on [0, 1] by Newton iteration on the
/// Legendre recurrence.
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[i] = 0.5 * (1.0 - x);  // descending x -> ascending node
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    std::sort(nodes.begin(), nodes.end());
}

}  // namespace

BasisEval reference_basis(int degree, double xi, double eta) {
    if (degree < 1 || degree > 3) {
        throw std::invalid_argument("reference_basis: degree must be 1, 2, or 3");
    }
    const double l0 = 1.0 - xi - eta;
    const double l1 = xi;
    const double l2 = eta;
    const std::array<double, 3> l{l0, l1, l2};

    BasisEval out;
    if (degree == 1) {
        out.values = {l0, l1, l2};
        out.gradients = {chain({1, 0, 0}), chain({0, 1, 0}), chain({0, 0, 1})};
        return out;
    }
    if (degree == 2) {
        out.values.resize(6);
        out.gradients.resize(6);
        for (int i = 0; i < 3; ++i) {
            out.values[i] = l[i] * (2.0 * l[i] - 1.0);
            std::array<double, 3> dl{0, 0, 0};
            dl[i] = 4.0 * l[i] - 1.0;
            out.gradients[i] = chain(dl);
        }
        constexpr int ea[3] = {0, 1, 2};
        constexpr int eb[3] = {1, 2, 0};
        for (int k = 0; k < 3; ++k) {
            const int i = ea[k], j = eb[k];
            out.values[3 + k] = 4.0 * l[i] * l[j];
            std::array<double, 3> dl{0, 0, 0};
            dl[i] = 4.0 * l[j];
            dl[j] = 4.0 * l[i];
            out.gradients[3 + k] = chain(dl);
        }
        return out;
    }
    // degree == 3
    out.values.resize(10);
    out.gradients.resize(10);
    for (int i = 0; i < 3; ++i) {
        out.values[i] = 0.5 * l[i] * (3.0 * l[i] - 1.0) * (3.0 * l[i] - 2.0);
        std::array<double, 3> dl{0, 0, 0};
        dl[i] = 0.5 * (27.0 * l[i] * l[i] - 18.0 * l[i] + 2.0);
        out.gradients[i] = chain(dl);
    }
    constexpr int ea[3] = {0, 1, 2};
    constexpr int eb[3] = {1, 2, 0};
    for (int k = 0; k < 3; ++k) {
        const int i = ea[k], j = eb[k];
        // node nearer vertex i, then node nearer vertex j
        out.values[3 + 2 * k] = 4.5 * l[i] * l[j] * (3.0 * l[i] - 1.0);
        std::array<double, 3> da{0, 0, 0};
        da[i] = 4.5 * l[j] * (6.0 * l[i] - 1.0);
        da[j] = 4.5 * l[i] * (3.0 * l[i] - 1.0);
        out.gradients[3 + 2 * k] = chain(da);

        out.values[4 + 2 * k] = 4.5 * l[i] * l[j] * (3.0 * l[j] - 1.0);
        std::array<double, 3> db{0, 0, 0};
        db[j] = 4.5 * l[i] * (6.0 * l[j] - 1.0);
        db[i] = 4.5 * l[j] * (3.0 * l[j] - 1.0);
        out.gradients[4 + 2 * k] = chain(db);
    }
    out.values[9] = 27.0 * l0 * l1 * l2;
    out.gradients[9] = chain({27.0 * l1 * l2, 27.0 * l0 * l2, 27.0 * l0 * l1});
    return out;
}

std::vector<std::array<double, 2>> reference_nodes(int degree) {
    const std::array<std::array<double, 2>, 3> v{{{0, 0}, {1, 0}, {0, 1}}};
    std::vector<std::array<double, 2>> nodes(v.begin(), v.end());
    constexpr int ea[3] = {0, 1, 2};
    constexpr int eb[3] = {1, 2, 0};
    if (degree == 1) return nodes;
    if (degree == 2) {
        for (int k = 0; k < 3; ++k) {
            const auto& a = v[ea[k]];
            const auto& b = v[eb[k]];
            nodes.push_back({0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])});
        }
        return nodes;
    }
    if (degree == 3) {
        for (int k = 0; k < 3; ++k) {
            const auto& a = v[ea[k]];
            const auto& b = v[eb[k]];
            nodes.push_back({a[0] + (b[0] - a[0]) / 3.0, a[1] + (b[1] - a[1]) / 3.0});
            nodes.push_back({a[0] + 2.0 * (b[0] - a[0]) / 3.0, a[1] + 2.0 * (b[1] - a[1]) / 3.0});
        }
        nodes.push_back({1.0 / 3.0, 1.0 / 3.0});
        return nodes;
    }
    throw std::invalid_argument("reference_nodes: degree must be 1, 2, or 3");
}

QuadratureRule triangle_quadrature(int exactness) {
    if (exactness < 0 || exactness > kMaxExactness) {
        throw std::invalid_argument("triangle_quadrature: exactness " +
                                    std::to_string(exactness) + " unsupported");
    }
    QuadratureRule rule;
    rule.exactness = std::max(exactness, 1);
    if (exactness <= 1) {
        rule.points = {{1.0 / 3.0, 1.0 / 3.0, 0.5}};
        return rule;
    }
    if (exactness == 2) {
        const double w = 1.0 / 6.0;
        rule.points = {{1.0 / 6.0, 1.0 / 6.0, w}, {2.0 / 3.0, 1.0 / 6.0, w},
                       {1.0 / 6.0, 2.0 / 3.0, w}};
        return rule;
    }
    // Collapsed (Duffy) Gauss product: x = u, y = v (1 - u), extra factor
    // (1 - u) in the weight. A monomial of total degree d becomes degree
    // d + 1 in u, so n = ceil((d + 2) / 2) points per direction suffice.
    const int n = (exactness + 3) / 2;
    std::vector<double> gu, wu;
    gauss_legendre_01(n, gu, wu);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            rule.points.push_back({gu[i], gu[j] * (1.0 - gu[i]), wu[i] * wu[j] * (1.0 - gu[i])});
        }
    }
    return rule;
}

std::vector<SegmentQuadraturePoint> segment_quadrature(int exactness) {
    if (exactness < 0 || exactness > 2 * kMaxExactness + 1) {
        throw std::invalid_argument("segment_quadrature: exactness unsupported");
    }
    const int n = std::max(1, (exactness + 2) / 2);
    std::vector<double> g, w;
    gauss_legendre_01(n, g, w);
    std::vector<SegmentQuadraturePoint> pts(n);
    for (int i = 0; i < n; ++i) pts[i] = {g[i], w[i]};
    return pts;
}

FiniteElementSpace::FiniteElementSpace(const CoupledMesh& mesh, Region region, int degree,
                                       int components)
    : mesh_(&mesh), region_(region), degree_(degree), components_(components) {
    if (degree < 1 || degree > 3) throw std::invalid_argument("space degree must be 1..3");
    if (components < 1 || components > 2) throw std::invalid_argument("components must be 1 or 2");

    tri_to_element_.assign(mesh.triangles.size(), npos);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (mesh.triangles[t].region == region) {
            tri_to_element_[t] = elements_.size();
            elements_.push_back(t);
        }
    }

    vertex_dof_.assign(mesh.vertices.size(), npos);
    const int per_edge = degree - 1;
    const bool has_interior = degree == 3;

    auto vertex_dof = [&](std::size_t v) {
        if (vertex_dof_[v] == npos) {
            vertex_dof_[v] = n_scalar_dofs_++;
            node_coords_.push_back(mesh.vertices[v]);
        }
        return vertex_dof_[v];
    };
    auto edge_base = [&](std::size_t a, std::size_t b) {
        const auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        auto it = edge_dof_base_.find(key);
        if (it == edge_dof_base_.end()) {
            it = edge_dof_base_.emplace(key, n_scalar_dofs_).first;
            const Point2& pa = mesh.vertices[key.first];
            const Point2& pb = mesh.vertices[key.second];
            for (int m = 1; m <= per_edge; ++m) {
                const double s = static_cast<double>(m) / degree_;
                node_coords_.push_back({pa.x + s * (pb.x - pa.x), pa.y + s * (pb.y - pa.y)});
                ++n_scalar_dofs_;
            }
        }
        return it->second;
    };

    element_dofs_.resize(elements_.size());
    constexpr int ea[3] = {0, 1, 2};
    constexpr int eb[3] = {1, 2, 0};
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        const Triangle& tri = mesh.triangles[elements_[e]];
        auto& dofs = element_dofs_[e];
        for (int i = 0; i < 3; ++i) dofs.push_back(vertex_dof(tri.v[i]));
        if (per_edge > 0) {
            for (int k = 0; k < 3; ++k) {
                const std::size_t va = tri.v[ea[k]];
                const std::size_t vb = tri.v[eb[k]];
                const std::size_t base = edge_base(va, vb);
                if (per_edge == 1) {
                    dofs.push_back(base);
                } else {
                    // Global edge dofs run from the smaller vertex id; flip
                    // when the element traverses the edge the other way.
                    if (va < vb) {
                        dofs.push_back(base);
                        dofs.push_back(base + 1);
                    } else {
                        dofs.push_back(base + 1);
                        dofs.push_back(base);
                    }
                }
            }
        }
        if (has_interior) {
            const Point2& a = mesh.vertices[tri.v[0]];
            const Point2& b = mesh.vertices[tri.v[1]];
            const Point2& c = mesh.vertices[tri.v[2]];
            node_coords_.push_back({(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0});
            dofs.push_back(n_scalar_dofs_++);
        }
    }
}

std::vector<std::size_t> FiniteElementSpace::boundary_scalar_dofs(BoundaryTag tag) const {
    std::set<std::size_t> dofs;
    for (const auto& be : mesh_->boundary_edges) {
        if (be.tag != tag) continue;
        if (vertex_dof_[be.v[0]] == npos || vertex_dof_[be.v[1]] == npos) continue;
        dofs.insert(vertex_dof_[be.v[0]]);
        dofs.insert(vertex_dof_[be.v[1]]);
        if (degree_ > 1) {
            const auto key = be.v[0] < be.v[1] ? std::make_pair(be.v[0], be.v[1])
                                               : std::make_pair(be.v[1], be.v[0]);
            const auto it = edge_dof_base_.find(key);
            if (it != edge_dof_base_.end()) {
                for (int m = 0; m < degree_ - 1; ++m) dofs.insert(it->second + m);
            }
        }
    }
    return {dofs.begin(), dofs.end()};
}

namespace {

struct ElementMap {
    double j[2][2];     // [dx/dxi dx/deta; dy/dxi dy/deta]
    double inv_t[2][2];  // J^{-T}
    double det;
};

ElementMap element_map(const CoupledMesh& mesh, const Triangle& tri) {
    const Point2& a = mesh.vertices[tri.v[0]];
    const Point2& b = mesh.vertices[tri.v[1]];
    const Point2& c = mesh.vertices[tri.v[2]];
    ElementMap m;
    m.j[0][0] = b.x - a.x;
    m.j[0][1] = c.x - a.x;
    m.j[1][0] = b.y - a.y;
    m.j[1][1] = c.y - a.y;
    m.det = m.j[0][0] * m.j[1][1] - m.j[0][1] * m.j[1][0];
    m.inv_t[0][0] = m.j[1][1] / m.det;
    m.inv_t[0][1] = -m.j[1][0] / m.det;
    m.inv_t[1][0] = -m.j[0][1] / m.det;
    m.inv_t[1][1] = m.j[0][0] / m.det;
    return m;
}

Point2 physical_point(const CoupledMesh& mesh, const Triangle& tri, double xi, double eta) {
    const Point2& a = mesh.vertices[tri.v[0]];
    const Point2& b = mesh.vertices[tri.v[1]];
    const Point2& c = mesh.vertices[tri.v[2]];
    return {a.x + (b.x - a.x) * xi + (c.x - a.x) * eta,
            a.y + (b.y - a.y) * xi + (c.y - a.y) * eta};
}

std::array<double, 2> physical_gradient(const ElementMap& m, const std::array<double, 2>& g) {
    return {m.inv_t[0][0] * g[0] + m.inv_t[0][1] * g[1],
            m.inv_t[1][0] * g[0] + m.inv_t[1][1] * g[1]};
}

std::vector<BasisEval> tabulate(int degree, const QuadratureRule& rule) {
    std::vector<BasisEval> tab;
    tab.reserve(rule.points.size());
    for (const auto& q : rule.points) tab.push_back(reference_basis(degree, q.xi, q.eta));
    return tab;
}

int default_exactness(const FiniteElementSpace& space) { return 2 * space.degree() + 2; }

/// Reference coordinates along a triangle edge given the two mesh vertex ids
/// of the edge endpoints, parameterized from v0 to v1 by s in [0, 1].
std::array<double, 2> edge_reference_point(const Triangle& tri, std::size_t v0, std::size_t v1,
                                           double s) {
    const std::array<std::array<double, 2>, 3> ref{{{0, 0}, {1, 0}, {0, 1}}};
    int l0 = -1, l1 = -1;
    for (int i = 0; i < 3; ++i) {
        if (tri.v[i] == v0) l0 = i;
        if (tri.v[i] == v1) l1 = i;
    }
    if (l0 < 0 || l1 < 0) throw std::logic_error("edge endpoints not found in triangle");
    return {ref[l0][0] + s * (ref[l1][0] - ref[l0][0]),
            ref[l0][1] + s * (ref[l1][1] - ref[l0][1])};
}

double edge_length(const CoupledMesh& mesh, const std::array<std::size_t, 2>& e) {
    const Point2& a = mesh.vertices[e[0]];
    const Point2& b = mesh.vertices[e[1]];
    return std::hypot(b.x - a.x, b.y - a.y);
}

}  // namespace

FeFunction interpolate(const FiniteElementSpace& space, const ScalarField& f, double t) {
    if (space.components() != 1) throw std::invalid_argument("scalar field on vector space");
    FeFunction fh{&space, Vector::Zero(static_cast<Eigen::Index>(space.n_dofs()))};
    for (std::size_t s = 0; s < space.n_scalar_dofs(); ++s) {
        const Point2 p = space.dof_node(s);
        fh.coeffs[static_cast<Eigen::Index>(s)] = f(p.x, p.y, t);
    }
    return fh;
}

FeFunction interpolate(const FiniteElementSpace& space, const VectorField& f, double t) {
    if (space.components() != 2) throw std::invalid_argument("vector field on scalar space");
    FeFunction fh{&space, Vector::Zero(static_cast<Eigen::Index>(space.n_dofs()))};
    for (std::size_t s = 0; s < space.n_scalar_dofs(); ++s) {
        const Point2 p = space.dof_node(s);
        const auto v = f(p.x, p.y, t);
        fh.coeffs[static_cast<Eigen::Index>(space.dof_index(s, 0))] = v[0];
        fh.coeffs[static_cast<Eigen::Index>(space.dof_index(s, 1))] = v[1];
    }
    return fh;
}

SparseMatrix assemble_mass(const FiniteElementSpace& space, double density) {
    const QuadratureRule rule = triangle_quadrature(default_exactness(space));
    const auto tab = tabulate(space.degree(), rule);
    const int nc = space.components();
    std::vector<Triplet> trip;
    std::vector<double> local;
    for (std::size_t e = 0; e < space.n_elements(); ++e) {
        const Triangle& tri = space.mesh().triangles[space.element_triangle(e)];
        const ElementMap m = element_map(space.mesh(), tri);
        const auto& dofs = space.element_dofs(e);
        const std::size_t nb = dofs.size();
        local.assign(nb * nb, 0.0);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double w = rule.points[q].weight * m.det * density;
            for (std::size_t i = 0; i < nb; ++i) {
                const double wi = w * tab[q].values[i];
                for (std::size_t j = 0; j < nb; ++j) {
                    local[i * nb + j] += wi * tab[q].values[j];
                }
            }
        }
        for (std::size_t i = 0; i < nb; ++i) {
            for (std::size_t j = 0; j < nb; ++j) {
                for (int c = 0; c < nc; ++c) {
                    trip.push_back({space.dof_index(dofs[i], c), space.dof_index(dofs[j], c),
                                    local[i * nb + j]});
                }
            }
        }
    }
    return SparseMatrix::from_triplets(std::move(trip), space.n_dofs(), space.n_dofs());
}

SparseMatrix assemble_stiffness(const FiniteElementSpace& space, double coefficient) {
    return assemble_stiffness_tensor(space, {coefficient, 0.0, 0.0, coefficient});
}

SparseMatrix assemble_stiffness_tensor(const FiniteElementSpace& space,
                                       const std::array<double, 4>& k) {
    const QuadratureRule rule = triangle_quadrature(default_exactness(space));
    const auto tab = tabulate(space.degree(), rule);
    const int nc = space.components();
    std::vector<Triplet> trip;
    std::vector<double> local;
    std::vector<std::array<double, 2>> grads;
    for (std::size_t e = 0; e < space.n_elements(); ++e) {
        const Triangle& tri = space.mesh().triangles[space.element_triangle(e)];
        const ElementMap m = element_map(space.mesh(), tri);
        const auto& dofs = space.element_dofs(e);
        const std::size_t nb = dofs.size();
        local.assign(nb * nb, 0.0);
        grads.resize(nb);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double w = rule.points[q].weight * m.det;
            for (std::size_t i = 0; i < nb; ++i) grads[i] = physical_gradient(m, tab[q].gradients[i]);
            for (std::size_t i = 0; i < nb; ++i) {
                for (std::size_t j = 0; j < nb; ++j) {
                    const double kx = k[0] * grads[j][0] + k[1] * grads[j][1];
                    const double ky = k[2] * grads[j][0] + k[3] * grads[j][1];
                    local[i * nb + j] += w * (grads[i][0] * kx + grads[i][1] * ky);
                }
            }
        }
        for (std::size_t i = 0; i < nb; ++i) {
            for (std::size_t j = 0; j < nb; ++j) {
                for (int c = 0; c < nc; ++c) {
                    trip.push_back({space.dof_index(dofs[i], c), space.dof_index(dofs[j], c),
                                    local[i * nb + j]});
                }
            }
        }
    }
    return SparseMatrix::from_triplets(std::move(trip), space.n_dofs(), space.n_dofs());
}

SparseMatrix assemble_divergence(const FiniteElementSpace& velocity,
                                 const FiniteElementSpace& pressure) {
    if (&velocity.mesh() != &pressure.mesh() || velocity.region() != pressure.region()) {
        throw std::invalid_argument("divergence: spaces must live on the same mesh region");
    }
    if (velocity.components() != 2 || pressure.components() != 1) {
        throw std::invalid_argument("divergence: expects vector velocity, scalar pressure");
    }
    const int exactness = 2 * std::max(velocity.degree(), pressure.degree()) + 2;
    const QuadratureRule rule = triangle_quadrature(exactness);
    const auto tab_v = tabulate(velocity.degree(), rule);
    const auto tab_p = tabulate(pressure.degree(), rule);
    std::vector<Triplet> trip;
    std::vector<double> local;
    for (std::size_t e = 0; e < velocity.n_elements(); ++e) {
        const std::size_t tri_id = velocity.element_triangle(e);
        const std::size_t ep = pressure.element_of_triangle(tri_id);
        const Triangle& tri = velocity.mesh().triangles[tri_id];
        const ElementMap m = element_map(velocity.mesh(), tri);
        const auto& vdofs = velocity.element_dofs(e);
        const auto& pdofs = pressure.element_dofs(ep);
        local.assign(pdofs.size() * vdofs.size() * 2, 0.0);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double w = rule.points[q].weight * m.det;
            for (std::size_t jv = 0; jv < vdofs.size(); ++jv) {
                const auto g = physical_gradient(m, tab_v[q].gradients[jv]);
                for (std::size_t ip = 0; ip < pdofs.size(); ++ip) {
                    const double wp = w * tab_p[q].values[ip];
                    local[(ip * vdofs.size() + jv) * 2] -= wp * g[0];
                    local[(ip * vdofs.size() + jv) * 2 + 1] -= wp * g[1];
                }
            }
        }
        for (std::size_t ip = 0; ip < pdofs.size(); ++ip) {
            for (std::size_t jv = 0; jv < vdofs.size(); ++jv) {
                trip.push_back({pdofs[ip], velocity.dof_index(vdofs[jv], 0),
                                local[(ip * vdofs.size() + jv) * 2]});
                trip.push_back({pdofs[ip], velocity.dof_index(vdofs[jv], 1),
                                local[(ip * vdofs.size() + jv) * 2 + 1]});
            }
        }
    }
    return SparseMatrix::from_triplets(std::move(trip), pressure.n_dofs(), velocity.n_dofs());
}

SparseMatrix assemble_interface_normal(const FiniteElementSpace& velocity,
                                       const FiniteElementSpace& head, double weight) {
    if (velocity.mesh().interface_edges.empty()) {
        throw std::invalid_argument("interface assembly requires a nonempty interface");
    }
    const int exactness = 2 * std::max(velocity.degree(), head.degree()) + 2;
    const auto seg = segment_quadrature(exactness);
    std::vector<Triplet> trip;
    for (const auto& ie : velocity.mesh().interface_edges) {
        const std::size_t ev = velocity.element_of_triangle(ie.fluid_tri);
        const std::size_t eh = head.element_of_triangle(ie.porous_tri);
        if (ev == FiniteElementSpace::npos || eh == FiniteElementSpace::npos) {
            throw std::logic_error("interface edge outside the space regions");
        }
        const Triangle& ftri = velocity.mesh().triangles[ie.fluid_tri];
        const Triangle& ptri = velocity.mesh().triangles[ie.porous_tri];
        const double len = edge_length(velocity.mesh(), ie.v);
        const auto& vdofs = velocity.element_dofs(ev);
        const auto& hdofs = head.element_dofs(eh);
        for (const auto& q : seg) {
            const auto rf = edge_reference_point(ftri, ie.v[0], ie.v[1], q.s);
            const auto rp = edge_reference_point(ptri, ie.v[0], ie.v[1], q.s);
            const BasisEval bv = reference_basis(velocity.degree(), rf[0], rf[1]);
            const BasisEval bh = reference_basis(head.degree(), rp[0], rp[1]);
            const double w = weight * q.weight * len;
            for (std::size_t i = 0; i < vdofs.size(); ++i) {
                for (std::size_t j = 0; j < hdofs.size(); ++j) {
                    const double prod = w * bv.values[i] * bh.values[j];
                    trip.push_back({velocity.dof_index(vdofs[i], 0), hdofs[j], prod * ie.normal_f.x});
                    trip.push_back({velocity.dof_index(vdofs[i], 1), hdofs[j], prod * ie.normal_f.y});
                }
            }
        }
    }
    return SparseMatrix::from_triplets(std::move(trip), velocity.n_dofs(), head.n_dofs());
}

SparseMatrix assemble_interface_tangential(const FiniteElementSpace& velocity, double weight) {
    if (velocity.mesh().interface_edges.empty()) {
        throw std::invalid_argument("interface assembly requires a nonempty interface");
    }
    const auto seg = segment_quadrature(2 * velocity.degree() + 2);
    std::vector<Triplet> trip;
    for (const auto& ie : velocity.mesh().interface_edges) {
        const std::size_t ev = velocity.element_of_triangle(ie.fluid_tri);
        const Triangle& ftri = velocity.mesh().triangles[ie.fluid_tri];
        const double len = edge_length(velocity.mesh(), ie.v);
        const auto& vdofs = velocity.element_dofs(ev);
        const std::array<double, 2> tau{ie.tangent.x, ie.tangent.y};
        for (const auto& q : seg) {
            const auto rf = edge_reference_point(ftri, ie.v[0], ie.v[1], q.s);
            const BasisEval bv = reference_basis(velocity.degree(), rf[0], rf[1]);
            const double w = weight * q.weight * len;
            for (std::size_t i = 0; i < vdofs.size(); ++i) {
                for (std::size_t j = 0; j < vdofs.size(); ++j) {
                    const double prod = w * bv.values[i] * bv.values[j];
                    for (int ci = 0; ci < 2; ++ci) {
                        for (int cj = 0; cj < 2; ++cj) {
                            trip.push_back({velocity.dof_index(vdofs[i], ci),
                                            velocity.dof_index(vdofs[j], cj),
                                            prod * tau[ci] * tau[cj]});
                        }
                    }
                }
            }
        }
    }
    return SparseMatrix::from_triplets(std::move(trip), velocity.n_dofs(), velocity.n_dofs());
}

Vector assemble_load(const FiniteElementSpace& space, const ScalarField& f, double t) {
    if (space.components() != 1) throw std::invalid_argument("scalar load on vector space");
    const QuadratureRule rule = triangle_quadrature(default_exactness(space));
    const auto tab = tabulate(space.degree(), rule);
    Vector load = Vector::Zero(static_cast<Eigen::Index>(space.n_dofs()));
    for (std::size_t e = 0; e < space.n_elements(); ++e) {
        const Triangle& tri = space.mesh().triangles[space.element_triangle(e)];
        const ElementMap m = element_map(space.mesh(), tri);
        const auto& dofs = space.element_dofs(e);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Point2 p = physical_point(space.mesh(), tri, rule.points[q].xi, rule.points[q].eta);
            const double w = rule.points[q].weight * m.det * f(p.x, p.y, t);
            for (std::size_t i = 0; i < dofs.size(); ++i) {
                load[static_cast<Eigen::Index>(dofs[i])] += w * tab[q].values[i];
            }
        }
    }
    return load;
}

Vector assemble_load(const FiniteElementSpace& space, const VectorField& f, double t) {
    if (space.components() != 2) throw std::invalid_argument("vector load on scalar space");
    const QuadratureRule rule = triangle_quadrature(default_exactness(space));
    const auto tab = tabulate(space.degree(), rule);
    Vector load = Vector::Zero(static_cast<Eigen::Index>(space.n_dofs()));
    for (std::size_t e = 0; e < space.n_elements(); ++e) {
        const Triangle& tri = space.mesh().triangles[space.element_triangle(e)];
        const ElementMap m = element_map(space.mesh(), tri);
        const auto& dofs = space.element_dofs(e);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Point2 p = physical_point(space.mesh(), tri, rule.points[q].xi, rule.points[q].eta);
            const auto fv = f(p.x, p.y, t);
            const double w = rule.points[q].weight * m.det;
            for (std::size_t i = 0; i < dofs.size(); ++i) {
                load[static_cast<Eigen::Index>(space.dof_index(dofs[i], 0))] +=
                    w * tab[q].values[i] * fv[0];
                load[static_cast<Eigen::Index>(space.dof_index(dofs[i], 1))] +=
                    w * tab[q].values[i] * fv[1];
            }
        }
    }
    return load;
}

namespace {

template <typename Weight>
Vector interface_velocity_load(const FiniteElementSpace& velocity, const ScalarField& f, double t,
                               Weight direction) {
    Vector load = Vector::Zero(static_cast<Eigen::Index>(velocity.n_dofs()));
    const auto seg = segment_quadrature(2 * velocity.degree() + 2);
    for (const auto& ie : velocity.mesh().interface_edges) {
        const std::size_t ev = velocity.element_of_triangle(ie.fluid_tri);
        const Triangle& ftri = velocity.mesh().triangles[ie.fluid_tri];
        const double len = edge_length(velocity.mesh(), ie.v);
        const auto& vdofs = velocity.element_dofs(ev);
        const std::array<double, 2> dir = direction(ie);
        const Point2& a = velocity.mesh().vertices[ie.v[0]];
        const Point2& b = velocity.mesh().vertices[ie.v[1]];
        for (const auto& q : seg) {
            const auto rf = edge_reference_point(ftri, ie.v[0], ie.v[1], q.s);
            const BasisEval bv = reference_basis(velocity.degree(), rf[0], rf[1]);
            const double x = a.x + q.s * (b.x - a.x);
            const double y = a.y + q.s * (b.y - a.y);
            const double w = q.weight * len * f(x, y, t);
            for (std::size_t i = 0; i < vdofs.size(); ++i) {
                load[static_cast<Eigen::Index>(velocity.dof_index(vdofs[i], 0))] +=
                    w * bv.values[i] * dir[0];
                load[static_cast<Eigen::Index>(velocity.dof_index(vdofs[i], 1))] +=
                    w * bv.values[i] * dir[1];
            }
        }
    }
    return load;
}

}  // namespace

Vector interface_load_normal(const FiniteElementSpace& velocity, const ScalarField& f, double t) {
    return interface_velocity_load(velocity, f, t, [](const InterfaceEdge& ie) {
        return std::array<double, 2>{ie.normal_f.x, ie.normal_f.y};
    });
}

Vector interface_load_tangential(const FiniteElementSpace& velocity, const ScalarField& f,
                                 double t) {
    return interface_velocity_load(velocity, f, t, [](const InterfaceEdge& ie) {
        return std::array<double, 2>{ie.tangent.x, ie.tangent.y};
    });
}

Vector interface_load_scalar(const FiniteElementSpace& head, const ScalarField& f, double t) {
    Vector load = Vector::Zero(static_cast<Eigen::Index>(head.n_dofs()));
    const auto seg = segment_quadrature(2 * head.degree() + 2);
    for (const auto& ie : head.mesh().interface_edges) {
        const std::size_t eh = head.element_of_triangle(ie.porous_tri);
        const Triangle& ptri = head.mesh().triangles[ie.porous_tri];
        const double len = edge_length(head.mesh(), ie.v);
        const auto& hdofs = head.element_dofs(eh);
        const Point2& a = head.mesh().vertices[ie.v[0]];
        const Point2& b = head.mesh().vertices[ie.v[1]];
        for (const auto& q : seg) {
            const auto rp = edge_reference_point(ptri, ie.v[0], ie.v[1], q.s);
            const BasisEval bh = reference_basis(head.degree(), rp[0], rp[1]);
            const double x = a.x + q.s * (b.x - a.x);
            const double y = a.y + q.s * (b.y - a.y);
            const double w = q.weight * len * f(x, y, t);
            for (std::size_t i = 0; i < hdofs.size(); ++i) {
                load[static_cast<Eigen::Index>(hdofs[i])] += w * bh.values[i];
            }
        }
    }
    return load;
}

DirichletConstraints::DirichletConstraints(const FiniteElementSpace& space,
                                           const std::vector<BoundaryTag>& tags,
                                           std::size_t dof_offset)
    : space_(&space) {
    std::set<std::size_t> scalar;
    for (const BoundaryTag tag : tags) {
        for (std::size_t s : space.boundary_scalar_dofs(tag)) scalar.insert(s);
    }
    for (std::size_t s : scalar) {
        for (int c = 0; c < space.components(); ++c) {
            dofs_.push_back(dof_offset + space.dof_index(s, c));
            scalar_dofs_.push_back(s);
            component_.push_back(c);
        }
    }
}

SparseMatrix DirichletConstraints::eliminate(const SparseMatrix& matrix) {
    std::vector<char> constrained(matrix.rows(), 0);
    std::vector<std::size_t> position(matrix.rows(), 0);
    for (std::size_t k = 0; k < dofs_.size(); ++k) {
        constrained[dofs_[k]] = 1;
        position[dofs_[k]] = k;
    }

    std::vector<Triplet> kept;
    std::vector<Triplet> cols;
    const auto& offsets = matrix.row_offsets();
    const auto& colidx = matrix.col_indices();
    const auto& vals = matrix.values();
    for (std::size_t row = 0; row < matrix.rows(); ++row) {
        for (std::size_t k = offsets[row]; k < offsets[row + 1]; ++k) {
            const std::size_t col = colidx[k];
            if (constrained[row]) continue;
            if (constrained[col]) {
                cols.push_back({row, position[col], vals[k]});
            } else {
                kept.push_back({row, col, vals[k]});
            }
        }
    }
    for (std::size_t d : dofs_) kept.push_back({d, d, 1.0});
    columns_ = SparseMatrix::from_triplets(std::move(cols), matrix.rows(), dofs_.size());
    return SparseMatrix::from_triplets(std::move(kept), matrix.rows(), matrix.cols());
}

Vector DirichletConstraints::boundary_values(const ScalarField& g, double t) const {
    if (space_->components() != 1) throw std::invalid_argument("scalar data on vector space");
    Vector v(static_cast<Eigen::Index>(dofs_.size()));
    for (std::size_t k = 0; k < dofs_.size(); ++k) {
        const Point2 p = space_->dof_node(scalar_dofs_[k]);
        v[static_cast<Eigen::Index>(k)] = g(p.x, p.y, t);
    }
    return v;
}

Vector DirichletConstraints::boundary_values(const VectorField& g, double t) const {
    if (space_->components() != 2) throw std::invalid_argument("vector data on scalar space");
    Vector v(static_cast<Eigen::Index>(dofs_.size()));
    for (std::size_t k = 0; k < dofs_.size(); ++k) {
        const Point2 p = space_->dof_node(scalar_dofs_[k]);
        v[static_cast<Eigen::Index>(k)] = g(p.x, p.y, t)[static_cast<std::size_t>(component_[k])];
    }
    return v;
}

void DirichletConstraints::apply_rhs(Vector& rhs, const Vector& values) const {
    if (!columns_) throw std::logic_error("apply_rhs before eliminate");
    rhs -= columns_->matvec(values);
    for (std::size_t k = 0; k < dofs_.size(); ++k) {
        rhs[static_cast<Eigen::Index>(dofs_[k])] = values[static_cast<Eigen::Index>(k)];
    }
}

namespace {

void require_tag(const CoupledMesh& mesh, BoundaryTag tag) {
    for (const auto& be : mesh.boundary_edges) {
        if (be.tag == tag) return;
    }
    throw std::invalid_argument("no boundary edges carry tag " + to_string(tag));
}

}  // namespace

void apply_dirichlet(SparseMatrix& matrix, Vector& rhs, const FiniteElementSpace& space,
                     BoundaryTag tag, const ScalarField& g, double t) {
    require_tag(space.mesh(), tag);
    DirichletConstraints bc(space, {tag});
    matrix = bc.eliminate(matrix);
    bc.apply_rhs(rhs, bc.boundary_values(g, t));
}

void apply_dirichlet(SparseMatrix& matrix, Vector& rhs, const FiniteElementSpace& space,
                     BoundaryTag tag, const VectorField& g, double t) {
    require_tag(space.mesh(), tag);
    DirichletConstraints bc(space, {tag});
    matrix = bc.eliminate(matrix);
    bc.apply_rhs(rhs, bc.boundary_values(g, t));
}

namespace {

template <int Components, typename Exact, typename ExactGrad>
double error_norm_impl(const FeFunction& fh, const Exact& exact, Norm norm, double t,
                       const ExactGrad& exact_grad) {
    const FiniteElementSpace& space = *fh.space;
    const QuadratureRule rule = triangle_quadrature(2 * space.degree() + 2);
    const auto tab = tabulate(space.degree(), rule);
    double acc = 0.0;
    for (std::size_t e = 0; e < space.n_elements(); ++e) {
        const Triangle& tri = space.mesh().triangles[space.element_triangle(e)];
        const ElementMap m = element_map(space.mesh(), tri);
        const auto& dofs = space.element_dofs(e);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Point2 p = physical_point(space.mesh(), tri, rule.points[q].xi, rule.points[q].eta);
            const double w = rule.points[q].weight * m.det;
            if (norm == Norm::l2) {
                std::array<double, Components> uh{};
                for (std::size_t i = 0; i < dofs.size(); ++i) {
                    for (int c = 0; c < Components; ++c) {
                        uh[c] += fh.coeffs[static_cast<Eigen::Index>(space.dof_index(dofs[i], c))] *
                                 tab[q].values[i];
                    }
                }
                const auto ue = exact(p.x, p.y, t);
                for (int c = 0; c < Components; ++c) {
                    const double d = uh[c] - ue[c];
                    acc += w * d * d;
                }
            } else {
                std::array<double, 2 * Components> gh{};
                for (std::size_t i = 0; i < dofs.size(); ++i) {
                    const auto g = physical_gradient(m, tab[q].gradients[i]);
                    for (int c = 0; c < Components; ++c) {
                        const double coef =
                            fh.coeffs[static_cast<Eigen::Index>(space.dof_index(dofs[i], c))];
                        gh[2 * c] += coef * g[0];
                        gh[2 * c + 1] += coef * g[1];
                    }
                }
                const auto ge = exact_grad(p.x, p.y, t);
                for (int c = 0; c < 2 * Components; ++c) {
                    const double d = gh[c] - ge[c];
                    acc += w * d * d;
                }
            }
        }
    }
    return std::sqrt(acc);
}

}  // namespace

double error_norm(const FeFunction& fh, const ScalarField& exact, Norm norm, double t,
                  const ScalarGradField& exact_grad) {
    if (fh.space->components() != 1) throw std::invalid_argument("scalar norm on vector space");
    if (norm == Norm::h1_semi && !exact_grad) {
        throw std::invalid_argument("h1_semi norm requires the exact gradient");
    }
    auto wrap = [&](double x, double y, double tt) { return std::array<double, 1>{exact(x, y, tt)}; };
    return error_norm_impl<1>(fh, wrap, norm, t, exact_grad);
}

double error_norm(const FeFunction& fh, const VectorField& exact, Norm norm, double t,
                  const VectorGradField& exact_grad) {
    if (fh.space->components() != 2) throw std::invalid_argument("vector norm on scalar space");
    if (norm == Norm::h1_semi && !exact_grad) {
        throw std::invalid_argument("h1_semi norm requires the exact gradient");
    }
    return error_norm_impl<2>(fh, exact, norm, t, exact_grad);
}

double interface_normal_flux(const FeFunction& velocity) {
    const FiniteElementSpace& space = *velocity.space;
    if (space.components() != 2) throw std::invalid_argument("flux needs a velocity function");
    const auto seg = segment_quadrature(2 * space.degree() + 2);
    double flux = 0.0;
    for (const auto& ie : space.mesh().interface_edges) {
        const std::size_t ev = space.element_of_triangle(ie.fluid_tri);
        const Triangle& ftri = space.mesh().triangles[ie.fluid_tri];
        const double len = edge_length(space.mesh(), ie.v);
        const auto& vdofs = space.element_dofs(ev);
        for (const auto& q : seg) {
            const auto rf = edge_reference_point(ftri, ie.v[0], ie.v[1], q.s);
            const BasisEval bv = reference_basis(space.degree(), rf[0], rf[1]);
            double un = 0.0;
            for (std::size_t i = 0; i < vdofs.size(); ++i) {
                const double ux =
                    velocity.coeffs[static_cast<Eigen::Index>(space.dof_index(vdofs[i], 0))];
                const double uy =
                    velocity.coeffs[static_cast<Eigen::Index>(space.dof_index(vdofs[i], 1))];
                un += bv.values[i] * (ux * ie.normal_f.x + uy * ie.normal_f.y);
            }
            flux += q.weight * len * un;
        }
    }
    return flux;
}

}  // namespace sdtf
