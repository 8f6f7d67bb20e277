#include "sdtf/scenarios.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include "sdtf/adaptivity.hpp"
#include "sdtf/io.hpp"

namespace sdtf {

namespace {

namespace fs = std::filesystem;

class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::string summary_line(const std::string& scenario, const std::string& status,
                         const std::map<std::string, double>& metrics) {
    std::ostringstream os;
    os << "SUMMARY scenario=" << scenario << " status=" << status;
    for (const auto& [k, v] : metrics) os << " " << k << "=" << format_double(v);
    return os.str();
}

ScheduleFn named_schedule(const RunConfig& config) {
    if (config.schedule == "constant") return constant_schedule(config.k).k_next;
    return step_schedule(config.schedule).k_next;
}

void write_trajectory_csv(const std::string& path, EvolutionSystem& system,
                          const Trajectory& traj) {
    std::vector<std::string> schema{"step", "t", "k", "tau"};
    for (int f = 0; f < system.num_fields(); ++f) schema.push_back(system.field_name(f) + "_l2");
    std::vector<CsvRow> rows;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CsvRow row{static_cast<std::int64_t>(i), traj[i].t,
                   i ? traj[i].t - traj[i - 1].t : 0.0,
                   i >= 2 ? (traj[i].t - traj[i - 1].t) / (traj[i - 1].t - traj[i - 2].t) : 0.0};
        for (int f = 0; f < system.num_fields(); ++f) {
            row.push_back(system.field_norm(traj[i].state, f));
        }
        rows.push_back(std::move(row));
    }
    export_csv(path, schema, rows);
}

double trajectory_max_ratio(const Trajectory& traj) {
    double m = 0.0;
    for (std::size_t i = 2; i < traj.size(); ++i) {
        const double k1 = traj[i].t - traj[i - 1].t;
        const double k0 = traj[i - 1].t - traj[i - 2].t;
        if (k0 > 0.0) m = std::max(m, k1 / k0);
    }
    return m;
}

// ---------------------------------------------------------------- ode_orders

ScenarioResult scenario_ode_orders(const RunConfig& config) {
    ScenarioResult out;
    std::vector<CsvRow> rows;
    const double t_end = 1.0;
    const double exact_end = std::exp(-t_end);

    for (const SchemeKind scheme : {SchemeKind::bdf2, SchemeKind::bdf2_tf, SchemeKind::bdf3,
                                    SchemeKind::bdf3_tf_const}) {
        std::vector<double> errs;
        std::vector<double> ks;
        for (int level = 0; level < 5; ++level) {
            const double k = 0.1 / std::pow(2.0, level);
            ScalarOde ode(-1.0);
            StepHistory seed(8);
            const std::size_t m = scheme_history_requirement(scheme);
            for (std::size_t i = 0; i < m; ++i) {
                Vector v(1);
                v[0] = std::exp(-(static_cast<double>(i) * k));
                seed.push(static_cast<double>(i) * k, v);
            }
            const auto traj = integrate_fixed_schedule(ode, scheme, constant_schedule(k).k_next,
                                                       t_end, seed);
            errs.push_back(std::abs(traj.back().state[0] - exact_end));
            ks.push_back(k);
        }
        double order = 0.0;
        for (std::size_t i = errs.size() - 2; i < errs.size(); ++i) {
            order += observed_order(errs[i - 1], errs[i], ks[i - 1] / ks[i]);
        }
        order /= 2.0;
        for (std::size_t i = 0; i < errs.size(); ++i) {
            rows.push_back({to_string(scheme), ks[i], errs[i],
                            i == 0 ? std::string("-")
                                   : format_double(observed_order(errs[i - 1], errs[i],
                                                                  ks[i - 1] / ks[i]))});
        }
        std::string key = "order_" + to_string(scheme);
        for (auto& ch : key) ch = static_cast<char>(std::tolower(ch));
        out.metrics[key] = order;
    }
    if (config.write_csv) {
        const std::string path = join_path(config.outdir, "ode_orders.csv");
        export_csv(path, {"scheme", "k", "err", "order"}, rows);
        out.files.push_back(path);
    }
    return out;
}

// ------------------------------------------------------------ convergence_2d

Trajectory run_mms_fixed(MmsProblem& problem, SchemeKind scheme, const ScheduleFn& schedule,
                         double t_end, std::optional<std::size_t> max_steps = {}) {
    const std::size_t m = scheme_history_requirement(scheme);
    const StepHistory seed = exact_seed_history(*problem.model, problem.exact, 0.0, schedule, m);
    FixedScheduleOptions opts;
    opts.max_steps = max_steps;
    return integrate_fixed_schedule(*problem.model, scheme, schedule, t_end, seed, opts);
}

ScenarioResult scenario_convergence_temporal(const RunConfig& config) {
    ScenarioResult out;
    MmsProblem problem = make_mms_problem(config.physical_params(), config.degrees(), config.nx);
    const SchemeKind scheme = config.scheme_kind();

    std::vector<Vector> finals;
    for (int level = 0; level < 3; ++level) {
        const double k = config.k / std::pow(2.0, level);
        const auto traj = run_mms_fixed(problem, scheme, constant_schedule(k).k_next,
                                        config.t_end);
        finals.push_back(traj.back().state);
    }
    const double rho_u = cauchy_ratio(finals[0], finals[1], finals[2], [&](const Vector& v) {
        return problem.model->velocity_l2(v);
    });
    const double rho_phi = cauchy_ratio(finals[0], finals[1], finals[2], [&](const Vector& v) {
        return problem.model->head_l2(v);
    });
    out.metrics["rho_u"] = rho_u;
    out.metrics["rho_phi"] = rho_phi;
    const auto residuals = problem.exact.max_interface_residuals(0.0);
    out.metrics["iface_residual_mass"] = residuals[0];
    out.metrics["iface_residual_stress"] = residuals[1];
    out.metrics["iface_residual_bjs"] = residuals[2];
    if (config.write_csv) {
        const std::string path = join_path(config.outdir, "cauchy_" + config.scheme + ".csv");
        export_csv(path, {"scheme", "k", "rho_u", "rho_phi"},
                   {{config.scheme, config.k, rho_u, rho_phi}});
        out.files.push_back(path);
    }
    return out;
}

ScenarioResult scenario_convergence_spatial(const RunConfig& config) {
    ScenarioResult out;
    std::vector<CsvRow> rows;
    std::vector<double> errs_u, errs_phi;
    const std::vector<std::size_t> resolutions{4, 8, 16};
    for (const std::size_t nx : resolutions) {
        Stopwatch watch;
        MmsProblem problem = make_mms_problem(config.physical_params(), config.degrees(), nx);
        const auto traj = run_mms_fixed(problem, config.scheme_kind(),
                                        constant_schedule(config.k).k_next, config.t_end);
        const double err_u = state_error(*problem.model, traj.back().state, traj.back().t,
                                         problem.exact, MmsField::u);
        const double err_phi = state_error(*problem.model, traj.back().state, traj.back().t,
                                           problem.exact, MmsField::phi);
        errs_u.push_back(err_u);
        errs_phi.push_back(err_phi);
        const std::size_t i = errs_u.size() - 1;
        rows.push_back({std::string("1/") + std::to_string(nx), err_u,
                        i == 0 ? 0.0 : observed_order(errs_u[i - 1], err_u, 2.0), err_phi,
                        i == 0 ? 0.0 : observed_order(errs_phi[i - 1], err_phi, 2.0),
                        watch.seconds()});
    }
    out.metrics["order_u"] = observed_order(errs_u[errs_u.size() - 2], errs_u.back(), 2.0);
    out.metrics["order_phi"] =
        observed_order(errs_phi[errs_phi.size() - 2], errs_phi.back(), 2.0);
    if (config.write_csv) {
        const std::string path = join_path(config.outdir, "spatial_orders.csv");
        export_csv(path, {"resolution", "err_u", "rho_u", "err_phi", "rho_phi", "wall_seconds"},
                   rows);
        out.files.push_back(path);
    }
    return out;
}

ScenarioResult scenario_convergence_adaptive(const RunConfig& config) {
    ScenarioResult out;
    std::vector<CsvRow> rows;
    MmsProblem problem = make_mms_problem(config.physical_params(), config.degrees(), config.nx);
    const SchemeKind scheme = config.scheme_kind();

    double prev_err = -1.0;
    bool err_monotone = true;
    bool step_monotone = true;
    double prev_avg_k = -1.0;
    int eps_index = 0;
    for (const double eps : {1e-3, 1e-4, 1e-5}) {
        AdaptiveConfig acfg;
        acfg.eps = eps;
        acfg.gamma_hat = config.gamma_hat;
        acfg.gamma_check = config.gamma_check;
        acfg.k_min = config.k_min;
        acfg.k_max = config.k_max;
        acfg.tau_cap = config.tau_cap;
        acfg.growth_exponent = config.growth_exponent;
        const ScheduleFn seed_schedule = constant_schedule(config.k).k_next;
        const StepHistory seed = exact_seed_history(*problem.model, problem.exact, 0.0,
                                                    seed_schedule, 3);
        const auto result =
            integrate_adaptive(*problem.model, scheme, acfg, config.t_end, config.k, seed);
        const double err_u = global_error(*problem.model, result.trajectory, problem.exact,
                                          MmsField::u);
        double max_accepted_est = 0.0;
        double sum_k = 0.0;
        std::size_t n_acc = 0;
        for (const auto& row : result.step_log) {
            if (row.status == StepStatus::accepted) {
                max_accepted_est = std::max({max_accepted_est, row.est_u, row.est_phi});
                if (!row.truncated) {  // the forced final step is not a controller choice
                    sum_k += row.k;
                    ++n_acc;
                }
            }
        }
        const double avg_k = n_acc ? sum_k / static_cast<double>(n_acc) : 0.0;
        if (config.write_csv) {
            std::vector<CsvRow> log_rows;
            for (const auto& row : result.step_log) {
                log_rows.push_back({static_cast<std::int64_t>(row.step_index), row.t, row.k,
                                    row.tau, row.est_u, row.est_phi, to_string(row.status)});
            }
            const std::string path = join_path(
                config.outdir, "adaptive_steps_eps" + std::to_string(eps_index) + ".csv");
            export_csv(path, {"step_index", "t", "k", "tau", "est_u", "est_phi", "status"},
                       log_rows);
            out.files.push_back(path);
        }
        if (prev_err >= 0.0 && err_u > prev_err) err_monotone = false;
        if (prev_avg_k >= 0.0 && avg_k > prev_avg_k) step_monotone = false;
        prev_err = err_u;
        prev_avg_k = avg_k;
        rows.push_back({eps, err_u, max_accepted_est, avg_k,
                        static_cast<std::int64_t>(n_acc),
                        static_cast<std::int64_t>(result.n_rejected)});
        out.metrics["max_est_eps" + std::to_string(eps_index)] = max_accepted_est;
        out.metrics["err_u_eps" + std::to_string(eps_index)] = err_u;
        out.metrics["avg_k_eps" + std::to_string(eps_index)] = avg_k;
        ++eps_index;
    }
    out.metrics["err_monotone"] = err_monotone ? 1.0 : 0.0;
    out.metrics["avg_k_monotone"] = step_monotone ? 1.0 : 0.0;
    if (config.write_csv) {
        const std::string path = join_path(config.outdir, "adaptive_sweep.csv");
        export_csv(path, {"eps", "err_u", "max_accepted_est", "avg_accepted_k", "accepted",
                          "rejected"},
                   rows);
        out.files.push_back(path);
    }
    return out;
}

ScenarioResult scenario_convergence_2d(const RunConfig& config) {
    if (config.mode == "temporal_cauchy" || config.mode.empty()) {
        return scenario_convergence_temporal(config);
    }
    if (config.mode == "spatial") return scenario_convergence_spatial(config);
    if (config.mode == "adaptive") return scenario_convergence_adaptive(config);
    throw ConfigError("convergence_2d: unknown mode '" + config.mode + "'");
}

// ------------------------------------------------------------ stability_decay

ScenarioResult scenario_stability_decay(const RunConfig& config) {
    ScenarioResult out;
    // Zero forcing and homogeneous boundary data; only the initial history
    // carries energy.
    const CoupledMesh mesh = build_rect_union({0.0, 1.0, 1.0, 2.0}, {0.0, 0.0, 1.0, 1.0},
                                              config.nx, config.nx, config.nx);
    StokesDarcyModel model(mesh, config.degrees(), config.physical_params(), {});

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const ScheduleFn schedule = named_schedule(config);

    StepHistory seed(8);
    double t = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        Vector state(static_cast<Eigen::Index>(model.size()));
        for (Eigen::Index j = 0; j < state.size(); ++j) state[j] = dist(rng);
        seed.push(t, std::move(state));
        t += schedule(i + 1, t);
    }

    const std::size_t n_steps = config.max_steps ? config.max_steps : 200;
    FixedScheduleOptions opts;
    opts.max_steps = n_steps;
    const auto traj = integrate_fixed_schedule(model, config.scheme_kind(), schedule, 1e9,
                                               seed, opts);

    const double initial_norm = model.velocity_l2(traj[2].state) + model.head_l2(traj[2].state);
    double max_ratio = 0.0;
    double max_e = 0.0;
    double final_e = 0.0;
    std::vector<CsvRow> rows;
    StepHistory rolling(8);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        rolling.push(traj[i].t, traj[i].state);
        const double norm = model.velocity_l2(traj[i].state) + model.head_l2(traj[i].state);
        max_ratio = std::max(max_ratio, norm / initial_norm);
        double e = 0.0, f = 0.0;
        if (rolling.size() >= 3 && i >= 2) {
            const auto diag = model.energy_functionals(rolling);
            e = diag.e;
            f = diag.f;
            max_e = std::max(max_e, e);
            final_e = e;
        }
        const double k_i = i ? traj[i].t - traj[i - 1].t : 0.0;
        rows.push_back({traj[i].t, k_i, e, f});
    }
    out.metrics["max_norm_ratio"] = max_ratio;
    out.metrics["max_E"] = max_e;
    out.metrics["final_E"] = final_e;
    out.metrics["max_tau"] = trajectory_max_ratio(traj);
    out.metrics["steps"] = static_cast<double>(traj.size() - 3);
    if (config.write_csv) {
        const std::string path = join_path(config.outdir, "energy_trace.csv");
        export_csv(path, {"t", "k", "E", "F"}, rows);
        out.files.push_back(path);
    }
    return out;
}

// ------------------------------------------------------------- schedule_sweep

ScenarioResult scenario_schedule_sweep(const RunConfig& config) {
    ScenarioResult out;
    std::vector<CsvRow> rows;
    MmsProblem problem = make_mms_problem(config.physical_params(), config.degrees(), config.nx);
    const std::size_t n_steps = config.max_steps ? config.max_steps : 40;
    int index = 0;
    for (const std::string name : {"k_n1", "k_n2", "k_n3"}) {
        const StepSchedule schedule = step_schedule(name);
        const auto traj = run_mms_fixed(problem, config.scheme_kind(), schedule.k_next, 1e9,
                                        n_steps);
        const double err_u = state_error(*problem.model, traj.back().state, traj.back().t,
                                         problem.exact, MmsField::u);
        const double err_phi = state_error(*problem.model, traj.back().state, traj.back().t,
                                           problem.exact, MmsField::phi);
        const double max_tau = trajectory_max_ratio(traj);
        rows.push_back({name, static_cast<std::int64_t>(traj.size() - 3), traj.back().t, err_u,
                        err_phi, max_tau});
        if (config.write_csv) {
            const std::string tpath = join_path(config.outdir, "trajectory_" + name + ".csv");
            write_trajectory_csv(tpath, *problem.model, traj);
            out.files.push_back(tpath);
        }
        out.metrics["err_u_" + std::to_string(index)] = err_u;
        out.metrics["err_phi_" + std::to_string(index)] = err_phi;
        out.metrics["max_tau_" + std::to_string(index)] = max_tau;
        ++index;
    }
    if (config.write_csv) {
        const std::string path = join_path(config.outdir, "schedule_sweep.csv");
        export_csv(path, {"schedule", "steps", "t_final", "err_u", "err_phi", "max_tau"}, rows);
        out.files.push_back(path);
    }
    return out;
}

// -------------------------------------------------------------- wellbore_demo

VectorField wellbore_inflow(const WellboreGeometry& geometry, bool literal_left) {
    const double left_x0 = geometry.slots.front().x0;
    const double left_x1 = left_x0 + geometry.slots.front().width;
    return [left_x0, left_x1, literal_left](double x, double, double) {
        double v;
        if (x <= left_x1) {
            v = literal_left ? -4096.0 * (left_x1 - x) : -4096.0 * (x - left_x0) * (left_x1 - x);
        } else {
            v = -4096.0 * (x - 6.75) * (7.0 - x);
        }
        return std::array<double, 2>{0.0, v};
    };
}

ScenarioResult scenario_wellbore_demo(const RunConfig& config) {
    ScenarioResult out;
    WellboreGeometry geometry;
    auto mesh = std::make_unique<CoupledMesh>(build_wellbore_domain(geometry, config.wellbore_h));

    StokesDarcyBcs bcs;
    bcs.fluid_inflow = wellbore_inflow(geometry, config.wellbore_left_profile == "literal");
    const double head_value = config.wellbore_head_dirichlet;
    bcs.porous_head = [head_value](double, double, double) { return head_value; };

    StokesDarcyModel model(*mesh, config.degrees(), config.physical_params(), bcs);

    const ScheduleFn schedule = named_schedule(config);
    // Zero start-up data advanced by short backward-Euler sub-stepping.
    std::cerr << "wellbore_demo: bootstrapping start-up states with backward Euler; "
                 "start-up accuracy is first order\n";
    StepHistory seed(8);
    Vector state = Vector::Zero(static_cast<Eigen::Index>(model.size()));
    double t = 0.0;
    seed.push(t, state);
    for (std::size_t i = 1; i < scheme_history_requirement(config.scheme_kind()); ++i) {
        const double k = schedule(i, t);
        state = backward_euler_advance(model, t, state, k, 20);
        t += k;
        seed.push(t, state);
    }

    FixedScheduleOptions opts;
    if (config.max_steps) opts.max_steps = config.max_steps;
    const auto traj = integrate_fixed_schedule(model, config.scheme_kind(), schedule,
                                               config.t_end, seed, opts);

    double max_u = 0.0;
    for (const auto& pt : traj) max_u = std::max(max_u, model.velocity_l2(pt.state));
    out.metrics["max_velocity_l2"] = max_u;
    out.metrics["final_t"] = traj.back().t;
    out.metrics["steps"] = static_cast<double>(traj.size() - 3);
    out.metrics["interface_flux_final"] = model.interface_mass_flux(traj.back().state);

    if (config.write_csv) {
        const std::string path = join_path(config.outdir,
                                           "wellbore_" + config.scheme + "_steps.csv");
        write_trajectory_csv(path, model, traj);
        out.files.push_back(path);
    }
    if (config.write_vtk) {
        const std::size_t stride = std::max<std::size_t>(1, traj.size() / 5);
        for (std::size_t i = 0; i < traj.size(); i += stride) {
            const std::string path = join_path(
                config.outdir, "wellbore_" + config.scheme + "_" + std::to_string(i) + ".vtk");
            export_vtk(path, *mesh,
                       {vtk_field("velocity", model.velocity_function(traj[i].state)),
                        vtk_field("head", model.head_function(traj[i].state))});
            out.files.push_back(path);
        }
    }
    return out;
}

}  // namespace

std::vector<std::string> scenario_names() {
    return {"ode_orders", "convergence_2d", "stability_decay", "schedule_sweep", "wellbore_demo"};
}

MmsProblem make_mms_problem(const PhysicalParams& params, const FeDegrees& degrees,
                            std::size_t nx) {
    MmsProblem problem;
    problem.mesh = std::make_unique<CoupledMesh>(
        build_rect_union({0.0, 1.0, 1.0, 2.0}, {0.0, 0.0, 1.0, 1.0}, nx, nx, nx));
    problem.exact = exact_solution_2d(params);

    StokesDarcyBcs bcs;
    bcs.fluid_wall = problem.exact.u;
    bcs.porous_head = problem.exact.phi;
    problem.model = std::make_unique<StokesDarcyModel>(*problem.mesh, degrees, params, bcs);
    problem.model->set_forcing(problem.exact.f1, problem.exact.f2);
    problem.model->set_interface_compensation(problem.exact.compensation());
    return problem;
}

StepHistory exact_seed_history(const StokesDarcyModel& model, const ExactSolution2D& exact,
                               double t0, const ScheduleFn& schedule, std::size_t n_states) {
    StepHistory seed(8);
    double t = t0;
    for (std::size_t i = 0; i < n_states; ++i) {
        seed.push(t, model.interpolate_state(exact.u, exact.p, exact.phi, t));
        t += schedule(i + 1, t);
    }
    return seed;
}

ScenarioResult run_scenario(const RunConfig& config) {
    config.validate();
    fs::create_directories(config.outdir);
    Stopwatch watch;
    ScenarioResult out;
    try {
        if (config.scenario == "ode_orders") {
            out = scenario_ode_orders(config);
        } else if (config.scenario == "convergence_2d") {
            out = scenario_convergence_2d(config);
        } else if (config.scenario == "stability_decay") {
            out = scenario_stability_decay(config);
        } else if (config.scenario == "schedule_sweep") {
            out = scenario_schedule_sweep(config);
        } else if (config.scenario == "wellbore_demo") {
            out = scenario_wellbore_demo(config);
        } else {
            throw ConfigError("unknown scenario '" + config.scenario + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        out.exit_code = 3;
        out.metrics.clear();
        out.summary = "SUMMARY scenario=" + config.scenario + " status=failed error=\"" +
                      e.what() + "\"";
        return out;
    }
    out.metrics["wall_seconds"] = watch.seconds();
    out.summary = summary_line(config.scenario, "ok", out.metrics);
    return out;
}

}  // namespace sdtf
