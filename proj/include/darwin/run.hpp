#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "darwin/output.hpp"
#include "darwin/scenario.hpp"
#include "darwin/stepper.hpp"

namespace darwin {

/// A fully assembled simulation: grid, operators, material matrices, the
/// Darwin system and the evolving state. Owns everything; not movable (the
/// system holds references into the members).
class Simulation {
public:
    explicit Simulation(const Scenario& scn);
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    const Scenario& scenario() const { return scn_; }
    const StaggeredGrid& grid() const { return scn_.grid; }
    const IncidenceOperators& ops() const { return ops_; }
    const DofMaps& dof_maps() const { return dofs_; }
    const HodgeMatrices& hodge() const { return hodge_; }
    const StepperConfig& config() const { return config_; }
    const DarwinSystem& system() const { return *system_; }
    const SimState& state() const { return state_; }
    const SimState& previous_state() const { return prev_; }
    const StepDiagnostics& last_diag() const { return diag_; }

    SourceSample source_at(double t) const { return sample_sources(scn_, t); }
    /// Advances one step of scn.stepper.dt.
    void step();
    /// Fields reconstructed from the current and previous state.
    Fields fields() const { return reconstruct_fields(*system_, state_, prev_); }

private:
    Scenario scn_;
    MaterialField mat_;
    IncidenceOperators ops_;
    DofMaps dofs_;
    HodgeMatrices hodge_;
    StepperConfig config_;
    std::unique_ptr<DarwinSystem> system_;
    SimState state_, prev_;
    StepDiagnostics diag_;
};

struct RunOptions {
    std::string out_dir;
    std::optional<double> dt;
    std::optional<Scheme> scheme;
    std::optional<int> snap_every;
    long seed = 0;     // recorded in the manifest; the run itself is deterministic
    bool quiet = false;
};

struct RunResult {
    std::vector<HistoryRow> history;
    std::vector<std::string> snapshots;  // file names within out_dir
};

/// Runs the scenario and writes history.csv, VTK snapshots, manifest.json and
/// the canonical scenario echo into out_dir. Throws ScenarioError / SolverError
/// / IoError; the CLI maps these to exit codes.
RunResult run_scenario(const Scenario& scn, const RunOptions& opt);

}  // namespace darwin
