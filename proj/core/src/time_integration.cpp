#include "sdtf/time_integration.hpp"

#include <cmath>
#include <stdexcept>

namespace sdtf {

void StepHistory::push(double t, Vector state) {
    if (!entries_.empty() && t <= entries_.front().first) {
        throw std::invalid_argument("StepHistory: times must be strictly increasing");
    }
    entries_.emplace_front(t, std::move(state));
    while (entries_.size() > capacity_) entries_.pop_back();
}

double StepHistory::time(std::size_t i) const {
    if (i >= entries_.size()) throw std::out_of_range("StepHistory::time");
    return entries_[i].first;
}

const Vector& StepHistory::state(std::size_t i) const {
    if (i >= entries_.size()) throw std::out_of_range("StepHistory::state");
    return entries_[i].second;
}

VariableStepCoefficients variable_step_coefficients(double tau_n, double tau_nm1) {
    if (!(tau_n > 0.0) || !(tau_nm1 > 0.0)) {
        throw std::invalid_argument("variable_step_coefficients: ratios must be positive");
    }
    const double tn = tau_n;
    const double tm = tau_nm1;
    const double q = 1.0 + tm * (1.0 + tn);  // recurring subexpression

    VariableStepCoefficients c{};
    c.sigma3 = 1.0;
    c.sigma2 = tn * (1.0 + tm * (2.0 + tn)) / (1.0 + tm);
    c.sigma1 = tn * tm * tm * (1.0 + tn) / (1.0 + tm);

    c.beta3 = 1.0 + tn / (1.0 + tn) + tn * tm / q;
    c.beta2 = tn * tn / (1.0 + tn) + tn * tn * tm * (1.0 + tm * (2.0 + tn)) / ((1.0 + tm) * q);
    c.beta1 = tn * tn * tm * tm * tm * (1.0 + tn) / ((1.0 + tm) * q);

    c.gamma3 = tn * tm * (1.0 + tn) / ((1.0 + 2.0 * tn) * q);
    c.gamma2 = tn * tn * tm * (1.0 + tn) * (1.0 + tm * (2.0 + tn)) /
               ((1.0 + 2.0 * tn) * (1.0 + tm) * q);
    c.gamma1 = tn * tn * tm * tm * tm * (1.0 + tn) * (1.0 + tn) /
               ((1.0 + 2.0 * tn) * (1.0 + tm) * q);

    c.alpha_filter = -(1.0 / 6.0) * tn * tm * (1.0 + tn) * (1.0 + tn) * q /
                     ((1.0 + 2.0 * tn) * q + tn * tm * (1.0 + tn));
    return c;
}

Vector sigma_extrapolate(const StepHistory& history, double k_next) {
    if (history.size() < 3) {
        throw std::invalid_argument("sigma_extrapolate: needs three states");
    }
    const auto c = variable_step_coefficients(history.ratio_next(k_next), history.ratio(0));
    return c.sigma3 * history.state(0) + c.sigma2 * (history.state(0) - history.state(1)) -
           c.sigma1 * (history.state(1) - history.state(2));
}

Vector linear_extrapolate(const StepHistory& history, double k_next) {
    if (history.size() < 2) {
        throw std::invalid_argument("linear_extrapolate: needs two states");
    }
    const double tau = history.ratio_next(k_next);
    return (1.0 + tau) * history.state(0) - tau * history.state(1);
}

namespace {

void check_distinct(std::span<const double> times, std::size_t n) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (times[i + 1] == times[i]) {
            throw std::invalid_argument("divided_difference: repeated time nodes");
        }
    }
}

}  // namespace

double divided_difference(std::span<const double> times, std::span<const double> values,
                          std::size_t j) {
    if (times.size() < j + 1 || values.size() < j + 1) {
        throw std::invalid_argument("divided_difference: needs j+1 nodes");
    }
    check_distinct(times, j + 1);
    std::vector<double> table(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(j + 1));
    for (std::size_t level = 1; level <= j; ++level) {
        for (std::size_t i = 0; i + level <= j; ++i) {
            table[i] = (table[i + 1] - table[i]) / (times[i + level] - times[i]);
        }
    }
    return table[0];
}

Vector divided_difference(std::span<const double> times, std::span<const Vector> values,
                          std::size_t j) {
    if (times.size() < j + 1 || values.size() < j + 1) {
        throw std::invalid_argument("divided_difference: needs j+1 nodes");
    }
    check_distinct(times, j + 1);
    std::vector<Vector> table(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(j + 1));
    for (std::size_t level = 1; level <= j; ++level) {
        for (std::size_t i = 0; i + level <= j; ++i) {
            table[i] = (table[i + 1] - table[i]) / (times[i + level] - times[i]);
        }
    }
    return table[0];
}

double eta_factor(std::span<const double> times, int p) {
    if (p < 1 || times.size() < static_cast<std::size_t>(p) + 2) {
        throw std::invalid_argument("eta_factor: needs p+2 nodes");
    }
    check_distinct(times, static_cast<std::size_t>(p) + 2);
    double prod = 1.0;
    for (int i = 1; i <= p; ++i) prod *= times[0] - times[static_cast<std::size_t>(i)];
    double inv_sum = 0.0;
    for (int jj = 1; jj <= p + 1; ++jj) inv_sum += 1.0 / (times[0] - times[static_cast<std::size_t>(jj)]);
    return prod / inv_sum;
}

Vector time_filter(const Vector& hat_state, double t_new, const StepHistory& history, int p) {
    const std::size_t need = static_cast<std::size_t>(p) + 1;
    if (history.size() < need) {
        throw std::invalid_argument("time_filter: needs " + std::to_string(need) +
                                    " history states");
    }
    std::vector<double> times{t_new};
    std::vector<Vector> values{hat_state};
    for (std::size_t i = 0; i < need; ++i) {
        times.push_back(history.time(i));
        values.push_back(history.state(i));
    }
    const double eta = eta_factor(times, p);
    const Vector rho = divided_difference(times, values, static_cast<std::size_t>(p) + 1);
    return hat_state - eta * rho;
}

Vector time_filter_ratio_form(const Vector& hat_state, double t_new, const StepHistory& history) {
    if (history.size() < 3) {
        throw std::invalid_argument("time_filter_ratio_form: needs three history states");
    }
    const double tn = (t_new - history.time(0)) / history.step(0);
    const double tm = history.ratio(0);
    const auto c = variable_step_coefficients(tn, tm);
    const double q = 1.0 + tm * (1.0 + tn);
    const Vector brace = 6.0 / ((tn + 1.0) * q) * hat_state -
                         6.0 / (1.0 + tm) * history.state(0) +
                         6.0 * tn / (1.0 + tn) * history.state(1) -
                         6.0 * tm * tm * tn / ((1.0 + tm) * q) * history.state(2);
    return hat_state + c.alpha_filter * brace;
}

Vector reconstruct_hat(const Vector& filtered_state, double t_new, const StepHistory& history) {
    if (history.size() < 3) {
        throw std::invalid_argument("reconstruct_hat: needs three history states");
    }
    const double tn = (t_new - history.time(0)) / history.step(0);
    const auto c = variable_step_coefficients(tn, history.ratio(0));
    return filtered_state + c.gamma3 * (filtered_state - history.state(0)) -
           c.gamma2 * (history.state(0) - history.state(1)) +
           c.gamma1 * (history.state(1) - history.state(2));
}

std::string to_string(SchemeKind s) {
    switch (s) {
        case SchemeKind::bdf2: return "BDF2";
        case SchemeKind::bdf2_tf: return "BDF2_TF";
        case SchemeKind::bdf3: return "BDF3";
        case SchemeKind::bdf3_tf_const: return "BDF3_TF";
    }
    return "?";
}

std::size_t scheme_history_requirement(SchemeKind s) {
    return s == SchemeKind::bdf3_tf_const ? 4 : 3;
}

int scheme_estimator_order(SchemeKind s) {
    return s == SchemeKind::bdf2 ? 2 : 3;
}

Vector ScalarOde::solve_implicit(double t, double k, double mass_weight,
                                 const Vector& mass_history, const Vector&) {
    const double lhs = mass_weight / k - a_;
    if (lhs == 0.0) throw std::runtime_error("ScalarOde: singular implicit step");
    const double rhs = (forcing_ ? forcing_(t) : 0.0) + mass_history[0] / k;
    Vector x(1);
    x[0] = rhs / lhs;
    return x;
}

StepResult step_once(EvolutionSystem& system, SchemeKind scheme, const StepHistory& history,
                     double k) {
    if (!(k > 0.0)) throw std::invalid_argument("step_once: step size must be positive");
    if (history.size() < scheme_history_requirement(scheme)) {
        throw std::invalid_argument("step_once: insufficient history for " + to_string(scheme));
    }
    const double t_new = history.time(0) + k;
    const double tau = history.ratio_next(k);

    StepResult out;
    out.t_new = t_new;
    switch (scheme) {
        case SchemeKind::bdf2: {
            const double c = (1.0 + 2.0 * tau) / (1.0 + tau);
            const Vector mh = (1.0 + tau) * history.state(0) -
                              tau * tau / (1.0 + tau) * history.state(1);
            out.hat = system.solve_implicit(t_new, k, c, mh, linear_extrapolate(history, k));
            out.state = out.hat;
            break;
        }
        case SchemeKind::bdf2_tf: {
            const double c = (1.0 + 2.0 * tau) / (1.0 + tau);
            const Vector mh = (1.0 + tau) * history.state(0) -
                              tau * tau / (1.0 + tau) * history.state(1);
            out.hat = system.solve_implicit(t_new, k, c, mh, sigma_extrapolate(history, k));
            out.state = time_filter(out.hat, t_new, history, 2);
            break;
        }
        case SchemeKind::bdf3: {
            const auto cf = variable_step_coefficients(tau, history.ratio(0));
            const Vector mh = (cf.beta3 + cf.beta2) * history.state(0) -
                              (cf.beta2 + cf.beta1) * history.state(1) +
                              cf.beta1 * history.state(2);
            out.hat = system.solve_implicit(t_new, k, cf.beta3, mh, sigma_extrapolate(history, k));
            out.state = out.hat;
            break;
        }
        case SchemeKind::bdf3_tf_const: {
            if (std::abs(tau - 1.0) > 1e-10 || std::abs(history.ratio(0) - 1.0) > 1e-10 ||
                std::abs(history.ratio(1) - 1.0) > 1e-10) {
                throw std::invalid_argument("BDF3_TF requires a constant step schedule");
            }
            const Vector mh = (18.0 * history.state(0) - 9.0 * history.state(1) +
                               2.0 * history.state(2)) /
                              6.0;
            const Vector extrap = 4.0 * history.state(0) - 6.0 * history.state(1) +
                                  4.0 * history.state(2) - history.state(3);
            out.hat = system.solve_implicit(t_new, k, 11.0 / 6.0, mh, extrap);
            out.state = time_filter(out.hat, t_new, history, 3);
            break;
        }
    }
    return out;
}

Vector backward_euler_advance(EvolutionSystem& system, double t0, const Vector& state0,
                              double k_total, int substeps) {
    if (substeps < 1 || !(k_total > 0.0)) {
        throw std::invalid_argument("backward_euler_advance: bad step arguments");
    }
    const double dk = k_total / substeps;
    Vector x = state0;
    for (int i = 1; i <= substeps; ++i) {
        x = system.solve_implicit(t0 + i * dk, dk, 1.0, x, x);
    }
    return x;
}

Trajectory integrate_fixed_schedule(EvolutionSystem& system, SchemeKind scheme,
                                    const ScheduleFn& schedule, double t_end,
                                    const StepHistory& initial_history,
                                    const FixedScheduleOptions& options) {
    if (initial_history.size() < scheme_history_requirement(scheme)) {
        throw std::invalid_argument("integrate_fixed_schedule: initial history too short for " +
                                    to_string(scheme));
    }
    StepHistory history = initial_history;
    history.ensure_capacity(scheme_history_requirement(scheme) + 2);
    Trajectory traj;
    for (std::size_t i = history.size(); i-- > 0;) {
        traj.push_back({history.time(i), history.state(i)});
    }

    std::size_t produced = history.size();  // index of the next state
    std::size_t steps_taken = 0;
    const double t_tol = 1e-12 * std::max(1.0, std::abs(t_end));
    while (true) {
        const double t = history.time(0);
        if (options.max_steps && steps_taken >= *options.max_steps) break;
        if (t >= t_end - t_tol) break;

        double k = schedule(produced, t);
        if (!(k > 0.0)) {
            throw std::runtime_error("schedule produced a non-positive step at t=" +
                                     std::to_string(t));
        }
        // Truncate only meaningful overshoot; roundoff-level overshoot would
        // otherwise perturb k and defeat factorization reuse.
        if (options.truncate_at_end && t + k > t_end + t_tol) k = t_end - t;

        StepResult res;
        try {
            res = step_once(system, scheme, history, k);
        } catch (const std::exception& e) {
            throw std::runtime_error("step " + std::to_string(produced) + " failed: " + e.what());
        }
        history.push(res.t_new, res.state);
        traj.push_back({res.t_new, std::move(res.state)});
        ++produced;
        ++steps_taken;
    }
    return traj;
}

}  // namespace sdtf
