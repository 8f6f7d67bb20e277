#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdtf/linalg.hpp"

namespace sdtf {

/// Ring buffer of the most recent time points and states. Index 0 is the
/// newest entry; times are strictly increasing towards index 0.
class StepHistory {
  public:
    explicit StepHistory(std::size_t capacity = 6) : capacity_(capacity) {}

    void push(double t, Vector state);
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    void ensure_capacity(std::size_t n) { capacity_ = std::max(capacity_, n); }

    /// i steps ago: time(0) is the newest node.
    double time(std::size_t i) const;
    const Vector& state(std::size_t i) const;

    /// k_{n+1-i}; step(0) = t(0) - t(1).
    double step(std::size_t i) const { return time(i) - time(i + 1); }
    /// tau at the newest level given the upcoming step size.
    double ratio_next(double k_next) const { return k_next / step(0); }
    /// tau_{n-1-i}; ratio(0) = step(0) / step(1).
    double ratio(std::size_t i) const { return step(i) / step(i + 1); }

  private:
    std::size_t capacity_;
    std::deque<std::pair<double, Vector>> entries_;  // front = newest
};

/// The sigma/beta/gamma/alpha coefficient bundle of the variable-step
/// scheme, as closed forms of the two most recent step ratios.
struct VariableStepCoefficients {
    double sigma1, sigma2, sigma3;
    double beta1, beta2, beta3;
    double gamma1, gamma2, gamma3;
    double alpha_filter;
};

VariableStepCoefficients variable_step_coefficients(double tau_n, double tau_nm1);

/// Quadratic extrapolation of the three newest states to t(0) + k_next,
/// w_sigma = sigma3 w^n + sigma2 dw^n - sigma1 dw^{n-1}.
Vector sigma_extrapolate(const StepHistory& history, double k_next);

/// Two-point linear extrapolation (1 + tau) w^n - tau w^{n-1}.
Vector linear_extrapolate(const StepHistory& history, double k_next);

/// Newton divided difference of order j over j+1 nodes.
double divided_difference(std::span<const double> times, std::span<const double> values,
                          std::size_t j);
Vector divided_difference(std::span<const double> times, std::span<const Vector> values,
                          std::size_t j);

/// eta^{p+1} = prod_{i=1..p}(t0 - t_i) / sum_{j=1..p+1} (t0 - t_j)^{-1}
/// with times[0] the newest node; needs p+2 nodes.
double eta_factor(std::span<const double> times, int p);

/// Generic time filter: hat - eta^{p+1} rho^{p+1} over the node set
/// (t_new, history times); p = 2 raises BDF2 to third order, p = 3 raises
/// BDF3 to fourth.
Vector time_filter(const Vector& hat_state, double t_new, const StepHistory& history, int p);

/// The printed step-ratio form of the p = 2 filter; cross-check path only.
Vector time_filter_ratio_form(const Vector& hat_state, double t_new, const StepHistory& history);

/// Inverse of the p = 2 filter: recovers the hat value from the filtered one.
Vector reconstruct_hat(const Vector& filtered_state, double t_new, const StepHistory& history);

enum class SchemeKind { bdf2, bdf2_tf, bdf3, bdf3_tf_const };

std::string to_string(SchemeKind s);
/// Past states the scheme needs before its first step.
std::size_t scheme_history_requirement(SchemeKind s);
/// Divided-difference order p of the scheme's error estimator
/// (eta^{p+1} rho^{p+1}); the estimator needs p+1 past states plus the new one.
int scheme_estimator_order(SchemeKind s);

/// Implicit linear evolution contract: anything able to solve
/// ((c/k) M + A) x = loads(t) + (1/k) M h + coupling(extrapolated) can be
/// advanced by every scheme here. Schemes own all history combinations;
/// systems own the spatial discretization.
class EvolutionSystem {
  public:
    virtual ~EvolutionSystem() = default;
    virtual std::size_t size() const = 0;

    virtual Vector solve_implicit(double t, double k, double mass_weight,
                                  const Vector& mass_history, const Vector& extrapolated) = 0;

    /// Estimator fields (velocity and head for the coupled model).
    virtual int num_fields() const = 0;
    virtual double field_norm(const Vector& state, int field) const = 0;
    virtual std::string field_name(int field) const = 0;
};

/// Scalar linear ODE  u' = a u + f(t)  for scheme verification.
class ScalarOde : public EvolutionSystem {
  public:
    explicit ScalarOde(double a, std::function<double(double)> forcing = nullptr)
        : a_(a), forcing_(std::move(forcing)) {}

    std::size_t size() const override { return 1; }
    Vector solve_implicit(double t, double k, double mass_weight, const Vector& mass_history,
                          const Vector& extrapolated) override;
    int num_fields() const override { return 1; }
    double field_norm(const Vector& state, int) const override { return std::abs(state[0]); }
    std::string field_name(int) const override { return "u"; }

  private:
    double a_;
    std::function<double(double)> forcing_;
};

struct StepResult {
    double t_new = 0.0;
    Vector state;  // filtered for *_tf schemes
    Vector hat;    // pre-filter solution (equals state when no filter applies)
};

/// One step of the scheme from the given history.
StepResult step_once(EvolutionSystem& system, SchemeKind scheme, const StepHistory& history,
                     double k);

/// First-order implicit advance used only to bootstrap start-up data.
Vector backward_euler_advance(EvolutionSystem& system, double t0, const Vector& state0,
                              double k_total, int substeps);

struct TrajectoryPoint {
    double t;
    Vector state;
};
using Trajectory = std::vector<TrajectoryPoint>;

/// k_{n+1} as a function of the step index n and time t_n.
using ScheduleFn = std::function<double(std::size_t, double)>;

struct FixedScheduleOptions {
    std::optional<std::size_t> max_steps;
    bool truncate_at_end = true;
};

/// Drives the scheme over a prescribed step schedule, starting from the
/// newest history time. The initial history is part of the returned
/// trajectory.
Trajectory integrate_fixed_schedule(EvolutionSystem& system, SchemeKind scheme,
                                    const ScheduleFn& schedule, double t_end,
                                    const StepHistory& initial_history,
                                    const FixedScheduleOptions& options = {});

}  // namespace sdtf
