#pragma once

#include <map>
#include <memory>
#include <optional>

#include "sdtf/fem.hpp"
#include "sdtf/linalg.hpp"
#include "sdtf/mesh.hpp"
#include "sdtf/time_integration.hpp"

namespace sdtf {

struct PhysicalParams {
    double nu = 1.0;       // kinematic viscosity
    double g = 1.0;        // gravitational acceleration
    double storativity = 1.0;
    std::array<double, 4> hydraulic_k{1.0, 0.0, 0.0, 1.0};  // SPD conductivity tensor
    double alpha_bjs = 1.0;

    void validate() const;
    double trace_k() const { return hydraulic_k[0] + hydraulic_k[3]; }
    double bjs_weight() const;  // alpha sqrt(nu g) / sqrt(trace K)
    static PhysicalParams isotropic(double nu, double g, double s, double k, double alpha);
};

struct FeDegrees {
    int velocity = 2;
    int pressure = 1;
    int head = 2;
};

/// Dirichlet data per tag; a missing entry means homogeneous. Tags absent
/// from the mesh are ignored. Outflow boundaries stay natural.
struct StokesDarcyBcs {
    VectorField fluid_wall;
    VectorField fluid_inflow;
    ScalarField porous_head;
};

/// Extra interface line sources that make a manufactured solution satisfy
/// the discrete weak form exactly when the printed closed form misses one of
/// the interface conditions. Each is a residual field r(x, y, t) on Gamma.
struct InterfaceCompensation {
    ScalarField mass_flux;      // u.n_f - (K grad phi).n_p
    ScalarField normal_stress;  // p - nu n_f.du/dn_f - g phi
    ScalarField bjs;            // -nu tau.du/dn_f - bjs_weight u.tau
};

/// Spatial discretization of the coupled problem and the decoupled implicit
/// substeps. State layout: velocity block, pressure block, head block.
///
/// The Stokes substep solves the saddle-point system with the full pressure
/// space. The interface coupling fixes the pressure constant through the
/// normal-stress condition, so no mean constraint is imposed.
class StokesDarcyModel : public EvolutionSystem {
  public:
    StokesDarcyModel(const CoupledMesh& mesh, const FeDegrees& degrees,
                     const PhysicalParams& params, StokesDarcyBcs bcs);

    // Field loads f1 (fluid) and f2 (porous); defaults are zero.
    void set_forcing(VectorField f1, ScalarField f2);
    void set_interface_compensation(InterfaceCompensation comp);

    std::size_t size() const override { return n_u_ + n_p_ + n_h_; }
    Vector solve_implicit(double t, double k, double mass_weight, const Vector& mass_history,
                          const Vector& extrapolated) override;
    int num_fields() const override { return 2; }
    double field_norm(const Vector& state, int field) const override;
    std::string field_name(int field) const override { return field == 0 ? "u" : "phi"; }

    const FiniteElementSpace& velocity_space() const { return velocity_; }
    const FiniteElementSpace& pressure_space() const { return pressure_; }
    const FiniteElementSpace& head_space() const { return head_; }
    const PhysicalParams& params() const { return params_; }

    // Assembled blocks, exposed for verification.
    const SparseMatrix& velocity_mass() const { return mass_f_; }
    const SparseMatrix& fluid_operator() const { return a_f_; }
    const SparseMatrix& head_mass_plain() const { return mass_p_plain_; }
    const SparseMatrix& porous_operator() const { return a_p_; }
    const SparseMatrix& divergence() const { return div_; }
    const SparseMatrix& coupling_nf() const { return c_nf_; }
    const SparseMatrix& coupling_fn() const { return c_fn_; }

    Eigen::VectorBlock<const Vector> velocity_part(const Vector& state) const;
    Eigen::VectorBlock<const Vector> pressure_part(const Vector& state) const;
    Eigen::VectorBlock<const Vector> head_part(const Vector& state) const;
    Vector pack_state(const Vector& u, const Vector& p, const Vector& phi) const;

    FeFunction velocity_function(const Vector& state) const;
    FeFunction pressure_function(const Vector& state) const;
    FeFunction head_function(const Vector& state) const;

    /// Interpolates closed forms into a packed state vector.
    Vector interpolate_state(const VectorField& u, const ScalarField& p, const ScalarField& phi,
                             double t) const;

    /// Residual of the assembled substep equations for a candidate hat state;
    /// Dirichlet rows are excluded. Used by consistency checks.
    double step_residual(double t, double k, double mass_weight, const Vector& mass_history,
                         const Vector& extrapolated, const Vector& hat_state);

    double interface_mass_flux(const Vector& state) const;

    // Diagnostic norms used by the stability functionals.
    double velocity_l2(const Vector& state) const;
    double head_l2(const Vector& state) const;
    double velocity_h1(const Vector& state) const;
    double head_k_seminorm(const Vector& state) const;  // ||K^{1/2} grad phi||

    struct EnergyDiagnostics {
        double e = 0.0;  // history-difference energy
        double f = 0.0;  // gradient energy
    };
    /// Stability functionals of the newest history entry; needs >= 3 states
    /// (with exactly 3 the older ratio falls back to the newest one).
    EnergyDiagnostics energy_functionals(const StepHistory& history) const;

    std::size_t stokes_cache_size() const { return stokes_cache_.size(); }

  private:
    struct CachedStokes {
        DirichletConstraints bc;
        LuSolver lu;
    };
    struct CachedDarcy {
        DirichletConstraints bc;
        LuSolver lu;
    };

    SparseMatrix stokes_system_matrix(double mass_weight, double k) const;
    SparseMatrix darcy_system_matrix(double mass_weight, double k) const;
    CachedStokes& stokes_operator(double mass_weight, double k);
    CachedDarcy& darcy_operator(double mass_weight, double k);
    Vector stokes_rhs(double t, double k, const Vector& mass_history, const Vector& extrapolated) const;
    Vector darcy_rhs(double t, double k, const Vector& mass_history, const Vector& extrapolated) const;
    Vector fluid_boundary_values(const DirichletConstraints& bc, double t) const;

    const CoupledMesh* mesh_;
    PhysicalParams params_;
    StokesDarcyBcs bcs_;
    FiniteElementSpace velocity_;
    FiniteElementSpace pressure_;
    FiniteElementSpace head_;
    std::size_t n_u_, n_p_, n_h_;

    SparseMatrix mass_f_;        // velocity mass
    SparseMatrix stiff_f_;       // plain velocity stiffness (no nu)
    SparseMatrix a_f_;           // nu stiffness + BJS interface term
    SparseMatrix div_;           // pressure x velocity divergence
    SparseMatrix mass_p_plain_;  // head mass
    SparseMatrix a_p_;           // g (K grad, grad)
    SparseMatrix c_nf_;          // g int_Gamma phi (v . n_f), velocity x head
    SparseMatrix c_fn_;          // transpose of c_nf_

    VectorField f1_;
    ScalarField f2_;
    std::optional<InterfaceCompensation> compensation_;

    std::vector<BoundaryTag> fluid_dirichlet_tags_;
    bool has_porous_dirichlet_ = false;

    std::map<std::pair<double, double>, CachedStokes> stokes_cache_;
    std::map<std::pair<double, double>, CachedDarcy> darcy_cache_;
};

}  // namespace sdtf
