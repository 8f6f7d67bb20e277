#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sdtf/time_integration.hpp"

namespace sdtf {

struct AdaptiveConfig {
    double eps = 1e-4;
    double gamma_hat = 1.0;    // slows growth so recomputed steps keep passing
    double gamma_check = 0.5;  // rejection shrink factor
    double max_growth = 2.0;
    std::optional<double> tau_cap;  // 1.0315 enables the theory bound
    double k_min = 1e-8;
    double k_max = 1.0;
    int max_consecutive_rejections = 25;
    /// Printed growth exponent is 1/3 for every scheme; 1/4 is the classical
    /// choice for the order-3 estimator and stays opt-in.
    double growth_exponent = 1.0 / 3.0;

    void validate() const;
};

struct StepDecision {
    bool accepted = false;
    double k_next = 0.0;  // proposal after acceptance, retry size otherwise
    double theta = 0.0;
    double est_u = 0.0;
    double est_phi = 0.0;
};

/// Relative L2 estimator per field: |eta^{p+1} rho^{p+1} hat| normalized by
/// max(1, |hat|). Needs p+1 past states plus the hat value.
std::vector<double> error_estimators(EvolutionSystem& system, const Vector& hat_state,
                                     double t_new, const StepHistory& history, int p);

StepDecision controller_decide(double est_u, double est_phi, double eps, double k,
                               const AdaptiveConfig& config);

enum class StepStatus { warmup, accepted, rejected };
std::string to_string(StepStatus s);

struct StepLogRow {
    std::size_t step_index;
    double t;
    double k;
    double tau;
    double est_u;
    double est_phi;
    StepStatus status;
    bool truncated = false;
};

struct AdaptiveResult {
    Trajectory trajectory;
    std::vector<StepLogRow> step_log;
    std::size_t n_accepted = 0;
    std::size_t n_rejected = 0;
    std::size_t n_warmup = 0;
};

/// Tolerance-driven driver. Steps before the estimator has enough nodes run
/// at the initial step size and are logged as warmup; the final step is
/// truncated to land on t_end exactly.
AdaptiveResult integrate_adaptive(EvolutionSystem& system, SchemeKind scheme,
                                  const AdaptiveConfig& config, double t_end, double k_initial,
                                  const StepHistory& initial_history);

}  // namespace sdtf
