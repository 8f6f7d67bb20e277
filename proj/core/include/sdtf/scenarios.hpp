#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sdtf/config.hpp"
#include "sdtf/mms.hpp"
#include "sdtf/stokes_darcy.hpp"

namespace sdtf {

struct ScenarioResult {
    int exit_code = 0;  // 0 ok, 2 config error, 3 numerical failure
    std::vector<std::string> files;
    std::map<std::string, double> metrics;
    std::string summary;  // one machine-readable line
};

std::vector<std::string> scenario_names();

/// Runs one scenario to completion; numerical failures are reported through
/// the exit code and summary rather than exceptions.
ScenarioResult run_scenario(const RunConfig& config);

/// The manufactured problem on the unit-square stack, ready to integrate.
struct MmsProblem {
    std::unique_ptr<CoupledMesh> mesh;
    std::unique_ptr<StokesDarcyModel> model;
    ExactSolution2D exact;
};

MmsProblem make_mms_problem(const PhysicalParams& params, const FeDegrees& degrees,
                            std::size_t nx);

/// History of exact states at t0, t0+k, ..., spaced by the schedule.
StepHistory exact_seed_history(const StokesDarcyModel& model, const ExactSolution2D& exact,
                               double t0, const ScheduleFn& schedule, std::size_t n_states);

}  // namespace sdtf
