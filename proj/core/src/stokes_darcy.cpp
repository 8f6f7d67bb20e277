#include "sdtf/stokes_darcy.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace sdtf {

namespace {

// Cache fingerprint: 40-bit relative quantization. Accumulated time roundoff
// perturbs step ratios at the last bits; scalars that close are numerically
// the same operator.
double fingerprint(double x) {
    if (x == 0.0) return 0.0;
    int exponent = 0;
    std::frexp(x, &exponent);
    const double scale = std::ldexp(1.0, exponent - 40);
    return std::round(x / scale) * scale;
}

std::pair<double, double> cache_key(double mass_weight, double k) {
    return {fingerprint(mass_weight), fingerprint(k)};
}

}  // namespace

void PhysicalParams::validate() const {
    if (!(nu > 0.0)) throw std::invalid_argument("PhysicalParams: nu must be positive");
    if (!(g > 0.0)) throw std::invalid_argument("PhysicalParams: g must be positive");
    if (!(storativity > 0.0)) throw std::invalid_argument("PhysicalParams: S must be positive");
    if (!(alpha_bjs >= 0.0)) throw std::invalid_argument("PhysicalParams: alpha must be >= 0");
    const auto& k = hydraulic_k;
    if (k[1] != k[2]) throw std::invalid_argument("PhysicalParams: K must be symmetric");
    if (!(k[0] > 0.0) || !(k[0] * k[3] - k[1] * k[2] > 0.0)) {
        throw std::invalid_argument("PhysicalParams: K must be positive definite");
    }
}

double PhysicalParams::bjs_weight() const {
    return alpha_bjs * std::sqrt(nu * g) / std::sqrt(trace_k());
}

PhysicalParams PhysicalParams::isotropic(double nu, double g, double s, double k, double alpha) {
    PhysicalParams p;
    p.nu = nu;
    p.g = g;
    p.storativity = s;
    p.hydraulic_k = {k, 0.0, 0.0, k};
    p.alpha_bjs = alpha;
    return p;
}

StokesDarcyModel::StokesDarcyModel(const CoupledMesh& mesh, const FeDegrees& degrees,
                                   const PhysicalParams& params, StokesDarcyBcs bcs)
    : mesh_(&mesh),
      params_(params),
      bcs_(std::move(bcs)),
      velocity_(mesh, Region::fluid, degrees.velocity, 2),
      pressure_(mesh, Region::fluid, degrees.pressure, 1),
      head_(mesh, Region::porous, degrees.head, 1) {
    params_.validate();
    if (mesh.interface_edges.empty()) {
        throw std::invalid_argument("StokesDarcyModel: mesh has no interface edges");
    }
    n_u_ = velocity_.n_dofs();
    n_p_ = pressure_.n_dofs();
    n_h_ = head_.n_dofs();

    mass_f_ = assemble_mass(velocity_);
    stiff_f_ = assemble_stiffness(velocity_);
    a_f_ = SparseMatrix::add(stiff_f_.scaled(params_.nu),
                             assemble_interface_tangential(velocity_, params_.bjs_weight()));
    div_ = assemble_divergence(velocity_, pressure_);
    mass_p_plain_ = assemble_mass(head_);
    const auto& k = params_.hydraulic_k;
    a_p_ = assemble_stiffness_tensor(
        head_, {params_.g * k[0], params_.g * k[1], params_.g * k[2], params_.g * k[3]});
    c_nf_ = assemble_interface_normal(velocity_, head_, params_.g);
    c_fn_ = c_nf_.transposed();

    for (const BoundaryTag tag : {BoundaryTag::fluid_wall, BoundaryTag::fluid_inflow}) {
        if (!velocity_.boundary_scalar_dofs(tag).empty()) fluid_dirichlet_tags_.push_back(tag);
    }
    has_porous_dirichlet_ = !head_.boundary_scalar_dofs(BoundaryTag::porous_dirichlet).empty();
}

void StokesDarcyModel::set_forcing(VectorField f1, ScalarField f2) {
    f1_ = std::move(f1);
    f2_ = std::move(f2);
}

void StokesDarcyModel::set_interface_compensation(InterfaceCompensation comp) {
    compensation_ = std::move(comp);
}

Eigen::VectorBlock<const Vector> StokesDarcyModel::velocity_part(const Vector& state) const {
    return state.segment(0, static_cast<Eigen::Index>(n_u_));
}
Eigen::VectorBlock<const Vector> StokesDarcyModel::pressure_part(const Vector& state) const {
    return state.segment(static_cast<Eigen::Index>(n_u_), static_cast<Eigen::Index>(n_p_));
}
Eigen::VectorBlock<const Vector> StokesDarcyModel::head_part(const Vector& state) const {
    return state.segment(static_cast<Eigen::Index>(n_u_ + n_p_), static_cast<Eigen::Index>(n_h_));
}

Vector StokesDarcyModel::pack_state(const Vector& u, const Vector& p, const Vector& phi) const {
    Vector s(static_cast<Eigen::Index>(size()));
    s.segment(0, static_cast<Eigen::Index>(n_u_)) = u;
    s.segment(static_cast<Eigen::Index>(n_u_), static_cast<Eigen::Index>(n_p_)) = p;
    s.segment(static_cast<Eigen::Index>(n_u_ + n_p_), static_cast<Eigen::Index>(n_h_)) = phi;
    return s;
}

FeFunction StokesDarcyModel::velocity_function(const Vector& state) const {
    return {&velocity_, velocity_part(state)};
}
FeFunction StokesDarcyModel::pressure_function(const Vector& state) const {
    return {&pressure_, pressure_part(state)};
}
FeFunction StokesDarcyModel::head_function(const Vector& state) const {
    return {&head_, head_part(state)};
}

Vector StokesDarcyModel::interpolate_state(const VectorField& u, const ScalarField& p,
                                           const ScalarField& phi, double t) const {
    return pack_state(interpolate(velocity_, u, t).coeffs, interpolate(pressure_, p, t).coeffs,
                      interpolate(head_, phi, t).coeffs);
}

SparseMatrix StokesDarcyModel::stokes_system_matrix(double mass_weight, double k) const {
    const std::size_t n = n_u_ + n_p_;
    const SparseMatrix f_block = SparseMatrix::add(mass_f_, a_f_, mass_weight / k, 1.0);
    std::vector<Triplet> trip;
    const auto push_block = [&trip](const SparseMatrix& m, std::size_t row0, std::size_t col0,
                                    bool transpose) {
        const auto& offsets = m.row_offsets();
        const auto& cols = m.col_indices();
        const auto& vals = m.values();
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t kk = offsets[r]; kk < offsets[r + 1]; ++kk) {
                if (transpose) {
                    trip.push_back({row0 + cols[kk], col0 + r, vals[kk]});
                } else {
                    trip.push_back({row0 + r, col0 + cols[kk], vals[kk]});
                }
            }
        }
    };
    push_block(f_block, 0, 0, false);
    push_block(div_, 0, n_u_, true);  // b(v, p) couples pressure into momentum
    push_block(div_, n_u_, 0, false);
    return SparseMatrix::from_triplets(std::move(trip), n, n);
}

SparseMatrix StokesDarcyModel::darcy_system_matrix(double mass_weight, double k) const {
    const double gs = params_.g * params_.storativity;
    return SparseMatrix::add(mass_p_plain_, a_p_, mass_weight * gs / k, 1.0);
}

StokesDarcyModel::CachedStokes& StokesDarcyModel::stokes_operator(double mass_weight, double k) {
    const auto key = cache_key(mass_weight, k);
    auto it = stokes_cache_.find(key);
    if (it == stokes_cache_.end()) {
        if (stokes_cache_.size() > 48) stokes_cache_.clear();
        DirichletConstraints bc(velocity_, fluid_dirichlet_tags_, 0);
        SparseMatrix sys = bc.eliminate(stokes_system_matrix(mass_weight, k));
        it = stokes_cache_.emplace(key, CachedStokes{std::move(bc), LuSolver(sys)}).first;
    }
    return it->second;
}

StokesDarcyModel::CachedDarcy& StokesDarcyModel::darcy_operator(double mass_weight, double k) {
    const auto key = cache_key(mass_weight, k);
    auto it = darcy_cache_.find(key);
    if (it == darcy_cache_.end()) {
        if (darcy_cache_.size() > 48) darcy_cache_.clear();
        DirichletConstraints bc(head_,
                                has_porous_dirichlet_
                                    ? std::vector<BoundaryTag>{BoundaryTag::porous_dirichlet}
                                    : std::vector<BoundaryTag>{},
                                0);
        SparseMatrix sys = bc.eliminate(darcy_system_matrix(mass_weight, k));
        it = darcy_cache_.emplace(key, CachedDarcy{std::move(bc), LuSolver(sys)}).first;
    }
    return it->second;
}

Vector StokesDarcyModel::stokes_rhs(double t, double k, const Vector& mass_history,
                                    const Vector& extrapolated) const {
    Vector rhs_u = mass_f_.matvec(velocity_part(mass_history)) / k;
    if (f1_) rhs_u += assemble_load(velocity_, f1_, t);
    rhs_u -= c_nf_.matvec(head_part(extrapolated));
    if (compensation_) {
        if (compensation_->normal_stress) {
            rhs_u -= interface_load_normal(velocity_, compensation_->normal_stress, t);
        }
        if (compensation_->bjs) {
            rhs_u -= interface_load_tangential(velocity_, compensation_->bjs, t);
        }
    }
    Vector rhs = Vector::Zero(static_cast<Eigen::Index>(n_u_ + n_p_));
    rhs.segment(0, static_cast<Eigen::Index>(n_u_)) = rhs_u;
    return rhs;
}

Vector StokesDarcyModel::darcy_rhs(double t, double k, const Vector& mass_history,
                                   const Vector& extrapolated) const {
    const double gs = params_.g * params_.storativity;
    Vector rhs = mass_p_plain_.matvec(head_part(mass_history)) * (gs / k);
    if (f2_) rhs += params_.g * assemble_load(head_, f2_, t);
    rhs += c_fn_.matvec(velocity_part(extrapolated));
    if (compensation_ && compensation_->mass_flux) {
        rhs -= params_.g * interface_load_scalar(head_, compensation_->mass_flux, t);
    }
    return rhs;
}

Vector StokesDarcyModel::fluid_boundary_values(const DirichletConstraints& bc, double t) const {
    // Wall data wins over inflow data at shared corner nodes.
    std::set<std::size_t> wall_dofs;
    for (std::size_t s : velocity_.boundary_scalar_dofs(BoundaryTag::fluid_wall)) {
        wall_dofs.insert(s);
    }
    const auto& scalars = bc.scalar_dofs();
    const auto& comps = bc.components();
    Vector values(static_cast<Eigen::Index>(scalars.size()));
    for (std::size_t i = 0; i < scalars.size(); ++i) {
        const Point2 p = velocity_.dof_node(scalars[i]);
        const bool on_wall = wall_dofs.count(scalars[i]) > 0;
        const VectorField& field = on_wall ? bcs_.fluid_wall : bcs_.fluid_inflow;
        values[static_cast<Eigen::Index>(i)] =
            field ? field(p.x, p.y, t)[static_cast<std::size_t>(comps[i])] : 0.0;
    }
    return values;
}

Vector StokesDarcyModel::solve_implicit(double t, double k, double mass_weight,
                                        const Vector& mass_history, const Vector& extrapolated) {
    // Stokes substep (lagged head trace on the interface).
    CachedStokes& sop = stokes_operator(mass_weight, k);
    Vector rhs_s = stokes_rhs(t, k, mass_history, extrapolated);
    sop.bc.apply_rhs(rhs_s, fluid_boundary_values(sop.bc, t));
    const Vector up = sop.lu.solve(rhs_s);

    // Darcy substep (lagged velocity trace); independent of the Stokes result.
    CachedDarcy& dop = darcy_operator(mass_weight, k);
    Vector rhs_d = darcy_rhs(t, k, mass_history, extrapolated);
    dop.bc.apply_rhs(rhs_d, bcs_.porous_head ? dop.bc.boundary_values(bcs_.porous_head, t)
                                             : Vector::Zero(static_cast<Eigen::Index>(
                                                   dop.bc.dofs().size())));
    const Vector phi = dop.lu.solve(rhs_d);

    Vector out(static_cast<Eigen::Index>(size()));
    out.segment(0, static_cast<Eigen::Index>(n_u_ + n_p_)) = up;
    out.segment(static_cast<Eigen::Index>(n_u_ + n_p_), static_cast<Eigen::Index>(n_h_)) = phi;
    if (!out.allFinite()) throw std::runtime_error("StokesDarcyModel: non-finite solution");
    return out;
}

double StokesDarcyModel::step_residual(double t, double k, double mass_weight,
                                       const Vector& mass_history, const Vector& extrapolated,
                                       const Vector& hat_state) {
    CachedStokes& sop = stokes_operator(mass_weight, k);
    Vector rhs_s = stokes_rhs(t, k, mass_history, extrapolated);
    sop.bc.apply_rhs(rhs_s, fluid_boundary_values(sop.bc, t));
    Vector x_s(static_cast<Eigen::Index>(n_u_ + n_p_));
    x_s.segment(0, static_cast<Eigen::Index>(n_u_)) = velocity_part(hat_state);
    x_s.segment(static_cast<Eigen::Index>(n_u_), static_cast<Eigen::Index>(n_p_)) =
        pressure_part(hat_state);
    const SparseMatrix sys_s = [&] {
        DirichletConstraints bc(velocity_, fluid_dirichlet_tags_, 0);
        return bc.eliminate(stokes_system_matrix(mass_weight, k));
    }();
    const double r_s = (sys_s.matvec(x_s) - rhs_s).norm() / std::max(1.0, rhs_s.norm());

    CachedDarcy& dop = darcy_operator(mass_weight, k);
    Vector rhs_d = darcy_rhs(t, k, mass_history, extrapolated);
    dop.bc.apply_rhs(rhs_d, bcs_.porous_head ? dop.bc.boundary_values(bcs_.porous_head, t)
                                             : Vector::Zero(static_cast<Eigen::Index>(
                                                   dop.bc.dofs().size())));
    const SparseMatrix sys_d = [&] {
        DirichletConstraints bc(head_,
                                has_porous_dirichlet_
                                    ? std::vector<BoundaryTag>{BoundaryTag::porous_dirichlet}
                                    : std::vector<BoundaryTag>{},
                                0);
        return bc.eliminate(darcy_system_matrix(mass_weight, k));
    }();
    const double r_d = (sys_d.matvec(Vector(head_part(hat_state))) - rhs_d).norm() /
                       std::max(1.0, rhs_d.norm());
    return r_s + r_d;
}

double StokesDarcyModel::field_norm(const Vector& state, int field) const {
    return field == 0 ? velocity_l2(state) : head_l2(state);
}

double StokesDarcyModel::velocity_l2(const Vector& state) const {
    const Vector u = velocity_part(state);
    return std::sqrt(std::max(0.0, u.dot(mass_f_.matvec(u))));
}

double StokesDarcyModel::head_l2(const Vector& state) const {
    const Vector p = head_part(state);
    return std::sqrt(std::max(0.0, p.dot(mass_p_plain_.matvec(p))));
}

double StokesDarcyModel::velocity_h1(const Vector& state) const {
    const Vector u = velocity_part(state);
    return std::sqrt(std::max(0.0, u.dot(stiff_f_.matvec(u))));
}

double StokesDarcyModel::head_k_seminorm(const Vector& state) const {
    const Vector p = head_part(state);
    return std::sqrt(std::max(0.0, p.dot(a_p_.matvec(p)) / params_.g));
}

double StokesDarcyModel::interface_mass_flux(const Vector& state) const {
    const FeFunction u = velocity_function(state);
    return interface_normal_flux(u);
}

StokesDarcyModel::EnergyDiagnostics StokesDarcyModel::energy_functionals(
    const StepHistory& history) const {
    if (history.size() < 3) {
        throw std::invalid_argument("energy_functionals: needs three states");
    }
    const double tau_n = history.ratio(0);
    const double tau_nm1 = history.size() >= 4 ? history.ratio(1) : tau_n;
    const auto c = variable_step_coefficients(tau_n, tau_nm1);
    const double gs = params_.g * params_.storativity;

    const Vector d_new = history.state(0) - history.state(1);
    const Vector d_old = history.state(1) - history.state(2);

    auto sq = [](double x) { return x * x; };
    EnergyDiagnostics out;
    out.e = 0.5 * (c.beta1 + c.beta2) * sq(velocity_l2(d_new)) +
            0.5 * c.beta1 * sq(velocity_l2(d_old)) +
            0.5 * gs * (c.beta1 + c.beta2) * sq(head_l2(d_new)) +
            0.5 * gs * c.beta1 * sq(head_l2(d_old));
    out.f = 0.5 * params_.nu * sq(velocity_h1(history.state(0))) +
            0.5 * params_.nu * (c.gamma1 + c.gamma2) * sq(velocity_h1(d_new)) +
            0.5 * params_.nu * c.gamma1 * sq(velocity_h1(d_old)) +
            0.5 * params_.g * sq(head_k_seminorm(history.state(0))) +
            0.5 * params_.g * (c.gamma1 + c.gamma2) * sq(head_k_seminorm(d_new)) +
            0.5 * params_.g * c.gamma1 * sq(head_k_seminorm(d_old));
    return out;
}

}  // namespace sdtf
