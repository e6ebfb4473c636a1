#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "darwin/grid.hpp"
#include "darwin/hodge.hpp"
#include "darwin/operators.hpp"
#include "darwin/stepper.hpp"

namespace darwin {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Source waveforms. ramped_sine is amplitude * r(t) * sin(2 pi f t) with a
/// smooth half-cosine ramp r(t) = (1 - cos(pi t / t_r)) / 2 over the first
/// ramp_periods periods (t_r = ramp_periods / f); step switches to amplitude
/// for t > 0; table is piecewise-linear interpolation, clamped at the ends.
struct Waveform {
    enum class Kind { ramped_sine, step, table };
    std::string name;
    Kind kind = Kind::step;
    double amplitude = 1.0;
    double frequency = 0.0;
    double ramp_periods = 2.0;
    std::vector<double> times, values;  // table kind
    double eval(double t) const;
};

/// Axis-aligned material region, stored as inclusive grid-plane index ranges
/// (snapped from the box coordinates at parse time). Cells covered are
/// [lo, hi) in each axis.
struct MaterialBox {
    std::string name;
    std::array<int, 3> lo{}, hi{};
    double kappa = 0.0;   // S/m
    double eps_r = 1.0;
    double mu_r = 1.0;
};

/// Rectangular single-turn source-current loop in a grid plane. normal is the
/// loop axis; the loop lives on the plane with index `plane` along it, spanning
/// [u0,u1] x [v0,v1] in the transverse axes (u,v) chosen so that (u,v,normal)
/// is a right-handed triple. Positive waveform values drive current
/// circulating right-handed about +normal.
struct CoilSpec {
    std::string name;
    Axis normal = Axis::z;
    int plane = 0;
    int u0 = 0, u1 = 0, v0 = 0, v1 = 0;
    int waveform = -1;
    double scale = 1.0;
};

struct OutputSettings {
    int snap_every = 0;                // field snapshot cadence, 0 = none
    std::vector<double> snap_times;    // extra snapshot times (nearest step)
};

/// Stepper block of the scenario file; translated to the engine StepperConfig
/// by make_stepper_config (which also resolves the automatic kappa_reg rule).
struct StepperSettings {
    double dt = 0.0;
    int steps = 0;
    Scheme scheme = Scheme::two_step;
    double eqs_tol = 1e-10;
    double mqs_tol = 1e-10;
    int max_iter = 5000;
    Preconditioner precond = Preconditioner::jacobi;
    double ssor_omega = 1.0;
    int gs_max_sweeps = 8;
    double gs_sweep_tol = 1e-8;
    std::optional<double> kappa_reg;   // unset = automatic rule
    double mass_reg = 0.0;
    bool exact_solves = false;
};

struct Scenario {
    explicit Scenario(StaggeredGrid g) : grid(std::move(g)) {}

    std::string name = "unnamed";
    StaggeredGrid grid;
    WallPhi wall_phi = WallPhi::natural;
    double bg_kappa = 0.0;
    double bg_eps_r = 1.0;
    double bg_mu_r = 1.0;
    std::vector<MaterialBox> materials;
    std::vector<Waveform> waveforms;
    std::vector<ElectrodeRegion> electrodes;  // node_lo/node_hi as node indices
    std::vector<CoilSpec> coils;
    StepperSettings stepper;
    OutputSettings output;
};

/// Parses and validates a scenario document ("schema": 1). Box coordinates are
/// snapped to the nearest grid planes; all waveform references are resolved.
/// Errors carry the offending field path.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);

/// Canonical serialization: defaults filled in, boxes as snapped plane
/// coordinates, keys sorted. parse(serialize(s)) == serialize-idempotent.
std::string serialize_scenario(const Scenario& s);

/// Cell-wise material samples (background overpainted by boxes in file order).
MaterialField build_materials(const Scenario& s);

BoundaryConfig boundary_config(const Scenario& s);

/// Signed free-edge incidence of a coil loop: (edge id, orientation).
std::vector<std::pair<long, int>> coil_edges(const StaggeredGrid& grid, const CoilSpec& c);

/// Sources at time t: coil currents scattered onto edges, electrode potentials
/// onto their nodes.
SourceSample sample_sources(const Scenario& s, double t);

/// Engine config from the scenario stepper block. Applies the automatic
/// conductivity floor for the monolithic scheme (1e-6 * max kappa when the
/// material map mixes conducting and non-conducting cells and no explicit
/// kappa_reg is given).
StepperConfig make_stepper_config(const Scenario& s);

}  // namespace darwin
