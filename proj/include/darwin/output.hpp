#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "darwin/grid.hpp"
#include "darwin/stepper.hpp"

namespace darwin {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One diagnostics row per completed step. Column order is part of the output
/// contract: step,t,W_e,W_m,div_residual,eqs_iters,eqs_res,mqs_iters,mqs_res,wall_s
struct HistoryRow {
    int step = 0;
    double t = 0.0;
    double w_e = 0.0, w_m = 0.0;
    double div_residual = 0.0;  // charge-conservation residual of the step
    int eqs_iters = 0;
    double eqs_res = 0.0;
    int mqs_iters = 0;
    double mqs_res = 0.0;
    double wall_s = 0.0;
};

std::string csv_header();
/// Doubles with 17 significant digits (round-trip exact).
std::string csv_row(const HistoryRow& r);
void write_history_csv(const std::string& path, const std::vector<HistoryRow>& rows);

/// |E| (V/m) and |B| (T) sampled at cell centers: per-cell component averages
/// of the edge voltages / lengths and face fluxes / areas.
std::pair<std::vector<double>, std::vector<double>> cell_field_magnitudes(
    const StaggeredGrid& grid, const Fields& f);

/// Legacy ASCII VTK structured-points snapshot of the cell-center field
/// magnitudes. The lattice is the cell-center grid; on non-uniform grids the
/// header uses the mean spacing (the format carries a single spacing per axis).
void write_vtk_snapshot(const std::string& path, const StaggeredGrid& grid,
                        const Fields& f, const std::string& title);

}  // namespace darwin
