#include "darwin/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace darwin {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string csv_header() {
    return "step,t,W_e,W_m,div_residual,eqs_iters,eqs_res,mqs_iters,mqs_res,wall_s";
}

std::string csv_row(const HistoryRow& r) {
    std::string out = std::to_string(r.step);
    out += ',';
    out += fmt17(r.t);
    out += ',';
    out += fmt17(r.w_e);
    out += ',';
    out += fmt17(r.w_m);
    out += ',';
    out += fmt17(r.div_residual);
    out += ',';
    out += std::to_string(r.eqs_iters);
    out += ',';
    out += fmt17(r.eqs_res);
    out += ',';
    out += std::to_string(r.mqs_iters);
    out += ',';
    out += fmt17(r.mqs_res);
    out += ',';
    out += fmt17(r.wall_s);
    return out;
}

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << csv_header() << '\n';
    for (const HistoryRow& r : rows) out << csv_row(r) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

std::pair<std::vector<double>, std::vector<double>> cell_field_magnitudes(
    const StaggeredGrid& grid, const Fields& f) {
    const auto ext = grid.extents(EntityKind::cell);
    const long nc = grid.cell_count();
    std::vector<double> e_mag(nc, 0.0), b_mag(nc, 0.0);
    long idx = 0;
    for (int k = 0; k < ext[2]; ++k)
        for (int j = 0; j < ext[1]; ++j)
            for (int i = 0; i < ext[0]; ++i, ++idx) {
                double e2 = 0.0;
                {  // x component: 4 surrounding x-edges
                    const double len = grid.spacing(Axis::x, i);
                    double s = 0.0;
                    for (int dj = 0; dj <= 1; ++dj)
                        for (int dk = 0; dk <= 1; ++dk)
                            s += f.e[grid.edge_id(Axis::x, i, j + dj, k + dk)];
                    const double ex = 0.25 * s / len;
                    e2 += ex * ex;
                }
                {
                    const double len = grid.spacing(Axis::y, j);
                    double s = 0.0;
                    for (int di = 0; di <= 1; ++di)
                        for (int dk = 0; dk <= 1; ++dk)
                            s += f.e[grid.edge_id(Axis::y, i + di, j, k + dk)];
                    const double ey = 0.25 * s / len;
                    e2 += ey * ey;
                }
                {
                    const double len = grid.spacing(Axis::z, k);
                    double s = 0.0;
                    for (int di = 0; di <= 1; ++di)
                        for (int dj = 0; dj <= 1; ++dj)
                            s += f.e[grid.edge_id(Axis::z, i + di, j + dj, k)];
                    const double ez = 0.25 * s / len;
                    e2 += ez * ez;
                }
                e_mag[idx] = std::sqrt(e2);

                double b2 = 0.0;
                {
                    const double bx =
                        0.5 * (f.b[grid.face_id(Axis::x, i, j, k)] /
                                   grid.primal_area(Axis::x, {i, j, k}) +
                               f.b[grid.face_id(Axis::x, i + 1, j, k)] /
                                   grid.primal_area(Axis::x, {i + 1, j, k}));
                    b2 += bx * bx;
                }
                {
                    const double by =
                        0.5 * (f.b[grid.face_id(Axis::y, i, j, k)] /
                                   grid.primal_area(Axis::y, {i, j, k}) +
                               f.b[grid.face_id(Axis::y, i, j + 1, k)] /
                                   grid.primal_area(Axis::y, {i, j + 1, k}));
                    b2 += by * by;
                }
                {
                    const double bz =
                        0.5 * (f.b[grid.face_id(Axis::z, i, j, k)] /
                                   grid.primal_area(Axis::z, {i, j, k}) +
                               f.b[grid.face_id(Axis::z, i, j, k + 1)] /
                                   grid.primal_area(Axis::z, {i, j, k + 1}));
                    b2 += bz * bz;
                }
                b_mag[idx] = std::sqrt(b2);
            }
    return {std::move(e_mag), std::move(b_mag)};
}

void write_vtk_snapshot(const std::string& path, const StaggeredGrid& grid,
                        const Fields& f, const std::string& title) {
    const auto [e_mag, b_mag] = cell_field_magnitudes(grid, f);
    const auto ext = grid.extents(EntityKind::cell);
    const auto origin = grid.origin();
    const auto size = grid.size();

    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\n";
    out << "DATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << ext[0] << ' ' << ext[1] << ' ' << ext[2] << '\n';
    double spacing[3], first[3];
    for (int a = 0; a < 3; ++a) {
        spacing[a] = size[a] / ext[a];
        first[a] = origin[a] + 0.5 * spacing[a];
    }
    out << "ORIGIN " << fmt17(first[0]) << ' ' << fmt17(first[1]) << ' ' << fmt17(first[2])
        << '\n';
    out << "SPACING " << fmt17(spacing[0]) << ' ' << fmt17(spacing[1]) << ' '
        << fmt17(spacing[2]) << '\n';
    out << "POINT_DATA " << grid.cell_count() << '\n';
    out << "SCALARS e_magnitude double 1\nLOOKUP_TABLE default\n";
    for (double v : e_mag) out << fmt17(v) << '\n';
    out << "SCALARS b_magnitude double 1\nLOOKUP_TABLE default\n";
    for (double v : b_mag) out << fmt17(v) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace darwin
