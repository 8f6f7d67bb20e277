#pragma once

#include <string>
#include <vector>

#include "sdtf/stokes_darcy.hpp"
#include "sdtf/time_integration.hpp"

namespace sdtf {

/// Closed-form solution on the unit-square stack (fluid (0,1)x(1,2) over
/// porous (0,1)x(0,1)) with forcings derived for the given parameters and
/// residual evaluators for the three interface conditions on y = 1.
struct ExactSolution2D {
    PhysicalParams params;

    VectorField u;
    ScalarField p;
    ScalarField phi;
    VectorGradField grad_u;
    ScalarGradField grad_phi;

    VectorField f1;
    ScalarField f2;

    // Interface condition residuals of the closed form (zero when the
    // printed solution satisfies the condition exactly).
    ScalarField r_mass_flux;
    ScalarField r_normal_stress;
    ScalarField r_bjs;

    /// Maximum per-condition residual magnitude sampled along the interface.
    std::array<double, 3> max_interface_residuals(double t, int samples = 64) const;
    /// Compensation bundle for MMS runs; members with residuals below the
    /// threshold stay empty.
    InterfaceCompensation compensation(double threshold = 1e-8) const;
};

ExactSolution2D exact_solution_2d(const PhysicalParams& params);

/// Max norm of the strong-form residuals (Stokes momentum and Darcy) of the
/// derived forcings, with time/space derivatives replaced by central
/// differences. Verification oracle for the forcings. The default width
/// balances truncation against second-difference roundoff (both ~1e-7);
/// narrower widths drown the 1e-6 check in roundoff.
double strong_form_residual_fd(const ExactSolution2D& sol, double x, double y, double t,
                               bool fluid, double fd_width = 1e-4);

enum class MmsField { u, phi, p };

/// Global relative space-time error
/// Err = sqrt(sum_{i>=3} k_i ||Phi(t_i) - Phi_h^i||^2 / ||Phi(t_i)||^2).
/// Nodes with a vanishing exact norm are excluded (warned once).
double global_error(const StokesDarcyModel& model, const Trajectory& trajectory,
                    const ExactSolution2D& exact, MmsField field);

/// Relative L2 error of one state against the exact solution at time t.
double state_error(const StokesDarcyModel& model, const Vector& state, double t,
                   const ExactSolution2D& exact, MmsField field);

double observed_order(double err_coarse, double err_fine, double ratio);

/// rho_v = ||v_k - v_{k/2}|| / ||v_{k/2} - v_{k/4}|| with the given norm;
/// approximately (4^kappa - 2^kappa) / (2^kappa - 1) for an order-kappa scheme.
double cauchy_ratio(const Vector& v_k, const Vector& v_k2, const Vector& v_k4,
                    const std::function<double(const Vector&)>& norm);

struct StepSchedule {
    std::string name;
    ScheduleFn k_next;  // (index of the state being produced, current time)
};

/// Named schedules: k_n1, k_n2, k_n3, k_n5.
StepSchedule step_schedule(const std::string& name);
StepSchedule constant_schedule(double k);

/// Largest step ratio produced by a schedule over the given number of steps.
double schedule_max_ratio(const StepSchedule& schedule, double t0, std::size_t steps);

struct ConvergenceRow {
    std::string resolution;
    double err_u = 0.0;
    double rho_u = 0.0;
    double err_phi = 0.0;
    double rho_phi = 0.0;
    double wall_seconds = 0.0;
};

}  // namespace sdtf
