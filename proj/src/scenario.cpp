#include "darwin/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace darwin {

using nlohmann::json;

double Waveform::eval(double t) const {
    switch (kind) {
        case Kind::ramped_sine: {
            if (t <= 0.0) return 0.0;
            double ramp = 1.0;
            if (ramp_periods > 0.0) {
                const double t_ramp = ramp_periods / frequency;
                if (t < t_ramp) ramp = 0.5 * (1.0 - std::cos(M_PI * t / t_ramp));
            }
            return ramp * amplitude * std::sin(2.0 * M_PI * frequency * t);
        }
        case Kind::step:
            return t > 0.0 ? amplitude : 0.0;
        case Kind::table: {
            if (times.empty()) return 0.0;
            if (t <= times.front()) return values.front();
            if (t >= times.back()) return values.back();
            // times are strictly increasing (validated at parse)
            std::size_t hi = 1;
            while (times[hi] < t) ++hi;
            const double w = (t - times[hi - 1]) / (times[hi] - times[hi - 1]);
            return values[hi - 1] + w * (values[hi] - values[hi - 1]);
        }
    }
    return 0.0;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ScenarioError("scenario: " + path + ": " + what);
}

const char* axis_name(Axis a);

void need_object(const json& v, const std::string& path) {
    if (!v.is_object()) fail(path, "expected an object");
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) fail(path + "." + it.key(), "unknown field");
    }
}

double num_field(const json& o, const std::string& path, const char* key,
                 std::optional<double> def = std::nullopt) {
    if (!o.contains(key)) {
        if (def) return *def;
        fail(path + "." + key, "missing required number");
    }
    const json& v = o.at(key);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path + "." + key, "must be finite");
    return x;
}

int int_field(const json& o, const std::string& path, const char* key,
              std::optional<int> def = std::nullopt) {
    if (!o.contains(key)) {
        if (def) return *def;
        fail(path + "." + key, "missing required integer");
    }
    const json& v = o.at(key);
    if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
    return v.get<int>();
}

std::string str_field(const json& o, const std::string& path, const char* key,
                      std::optional<std::string> def = std::nullopt) {
    if (!o.contains(key)) {
        if (def) return *def;
        fail(path + "." + key, "missing required string");
    }
    const json& v = o.at(key);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

bool bool_field(const json& o, const std::string& path, const char* key, bool def) {
    if (!o.contains(key)) return def;
    const json& v = o.at(key);
    if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
    return v.get<bool>();
}

std::array<double, 3> vec3_field(const json& o, const std::string& path, const char* key,
                                 std::optional<std::array<double, 3>> def = std::nullopt) {
    if (!o.contains(key)) {
        if (def) return *def;
        fail(path + "." + key, "missing required [x, y, z] array");
    }
    const json& v = o.at(key);
    if (!v.is_array() || v.size() != 3) fail(path + "." + key, "expected [x, y, z]");
    std::array<double, 3> out{};
    for (int a = 0; a < 3; ++a) {
        if (!v[a].is_number()) fail(path + "." + key, "expected numeric components");
        out[a] = v[a].get<double>();
        if (!std::isfinite(out[a])) fail(path + "." + key, "components must be finite");
    }
    return out;
}

/// [[x0,y0,z0],[x1,y1,z1]] corner box, lo <= hi required.
std::pair<std::array<double, 3>, std::array<double, 3>> box_field(const json& o,
                                                                  const std::string& path,
                                                                  const char* key) {
    if (!o.contains(key)) fail(path + "." + key, "missing required box [[lo],[hi]]");
    const json& v = o.at(key);
    if (!v.is_array() || v.size() != 2) fail(path + "." + key, "expected [[lo],[hi]]");
    json wrap0 = json::object(), wrap1 = json::object();
    wrap0["c"] = v[0];
    wrap1["c"] = v[1];
    const auto lo = vec3_field(wrap0, path + "." + key + "[0]", "c");
    const auto hi = vec3_field(wrap1, path + "." + key + "[1]", "c");
    for (int a = 0; a < 3; ++a)
        if (lo[a] > hi[a]) fail(path + "." + key, "lo corner exceeds hi corner");
    return {lo, hi};
}

Axis axis_field(const json& o, const std::string& path, const char* key) {
    const std::string s = str_field(o, path, key);
    if (s == "x") return Axis::x;
    if (s == "y") return Axis::y;
    if (s == "z") return Axis::z;
    fail(path + "." + key, "expected \"x\", \"y\" or \"z\"");
}

StaggeredGrid parse_domain(const json& root) {
    if (!root.contains("domain")) fail("domain", "missing required object");
    const json& d = root.at("domain");
    need_object(d, "domain");
    if (d.contains("planes")) {
        check_keys(d, "domain", {"planes"});
        const json& p = d.at("planes");
        need_object(p, "domain.planes");
        check_keys(p, "domain.planes", {"x", "y", "z"});
        std::array<std::vector<double>, 3> planes;
        const char* names[3] = {"x", "y", "z"};
        for (int a = 0; a < 3; ++a) {
            if (!p.contains(names[a]))
                fail(std::string("domain.planes.") + names[a], "missing required array");
            const json& arr = p.at(names[a]);
            if (!arr.is_array() || arr.size() < 2)
                fail(std::string("domain.planes.") + names[a],
                     "expected an array of at least 2 coordinates");
            for (const json& x : arr) {
                if (!x.is_number())
                    fail(std::string("domain.planes.") + names[a], "expected numbers");
                planes[a].push_back(x.get<double>());
            }
        }
        try {
            return StaggeredGrid::from_planes(std::move(planes));
        } catch (const std::invalid_argument& e) {
            fail("domain.planes", e.what());
        }
    }
    check_keys(d, "domain", {"cells", "size", "origin"});
    if (!d.contains("cells")) fail("domain.cells", "missing required [nx, ny, nz]");
    const json& c = d.at("cells");
    if (!c.is_array() || c.size() != 3) fail("domain.cells", "expected [nx, ny, nz]");
    std::array<int, 3> cells{};
    for (int a = 0; a < 3; ++a) {
        if (!c[a].is_number_integer()) fail("domain.cells", "expected integers");
        cells[a] = c[a].get<int>();
        if (cells[a] < 1) fail("domain.cells", "cell counts must be >= 1");
    }
    const auto size = vec3_field(d, "domain", "size");
    for (int a = 0; a < 3; ++a)
        if (!(size[a] > 0.0)) fail("domain.size", "extents must be positive");
    const auto origin = vec3_field(d, "domain", "origin", {{0.0, 0.0, 0.0}});
    return StaggeredGrid::uniform(cells, size, origin);
}

void check_in_domain(const StaggeredGrid& g, const std::array<double, 3>& x,
                     const std::string& path) {
    for (Axis a : all_axes) {
        const double lo = g.plane(a, 0);
        const double hi = g.plane(a, g.nodes(a) - 1);
        const double tol = 1e-12 * (hi - lo);
        const double v = x[axis_index(a)];
        if (v < lo - tol || v > hi + tol)
            fail(path, "coordinate " + std::to_string(v) + " lies outside the domain along " +
                           axis_name(a));
    }
}

std::array<int, 3> snap_point(const StaggeredGrid& g, const std::array<double, 3>& x) {
    return {g.snap_plane(Axis::x, x[0]), g.snap_plane(Axis::y, x[1]),
            g.snap_plane(Axis::z, x[2])};
}

/// Distinct box faces must stay distinct after snapping (the documented
/// snapping rule errors out when a box collapses).
void check_distinct_snap(const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                         const std::array<int, 3>& lo_idx, const std::array<int, 3>& hi_idx,
                         const std::string& path) {
    for (int a = 0; a < 3; ++a)
        if (lo[a] != hi[a] && lo_idx[a] == hi_idx[a])
            fail(path, std::string("distinct box planes snap to the same grid plane (axis ") +
                           axis_name(static_cast<Axis>(a)) + ")");
}

Waveform::Kind waveform_kind(const std::string& s, const std::string& path) {
    if (s == "ramped_sine") return Waveform::Kind::ramped_sine;
    if (s == "step") return Waveform::Kind::step;
    if (s == "table") return Waveform::Kind::table;
    fail(path, "unknown waveform kind \"" + s + "\"");
}

int waveform_ref(const std::vector<Waveform>& wfs, const json& o, const std::string& path) {
    const std::string name = str_field(o, path, "waveform");
    for (std::size_t i = 0; i < wfs.size(); ++i)
        if (wfs[i].name == name) return static_cast<int>(i);
    fail(path + ".waveform", "no waveform named \"" + name + "\"");
}

Scheme parse_scheme(const std::string& s, const std::string& path) {
    if (s == "two_step") return Scheme::two_step;
    if (s == "gauss_seidel") return Scheme::gauss_seidel;
    if (s == "monolithic") return Scheme::monolithic;
    fail(path, "unknown scheme \"" + s + "\"");
}

Preconditioner parse_precond(const std::string& s, const std::string& path) {
    if (s == "none") return Preconditioner::none;
    if (s == "jacobi") return Preconditioner::jacobi;
    if (s == "ssor") return Preconditioner::ssor;
    fail(path, "unknown preconditioner \"" + s + "\"");
}

const char* axis_name(Axis a) {
    switch (a) {
        case Axis::x: return "x";
        case Axis::y: return "y";
        case Axis::z: return "z";
    }
    return "?";
}

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::two_step: return "two_step";
        case Scheme::gauss_seidel: return "gauss_seidel";
        case Scheme::monolithic: return "monolithic";
    }
    return "?";
}

const char* precond_name(Preconditioner p) {
    switch (p) {
        case Preconditioner::none: return "none";
        case Preconditioner::jacobi: return "jacobi";
        case Preconditioner::ssor: return "ssor";
    }
    return "?";
}

const char* kind_name(Waveform::Kind k) {
    switch (k) {
        case Waveform::Kind::ramped_sine: return "ramped_sine";
        case Waveform::Kind::step: return "step";
        case Waveform::Kind::table: return "table";
    }
    return "?";
}

/// Transverse axes (u, v) with (u, v, normal) right-handed.
std::pair<Axis, Axis> transverse_axes(Axis normal) {
    switch (normal) {
        case Axis::x: return {Axis::y, Axis::z};
        case Axis::y: return {Axis::z, Axis::x};
        case Axis::z: return {Axis::x, Axis::y};
    }
    throw std::logic_error("bad axis");
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("scenario: invalid JSON: ") + e.what());
    }
    need_object(root, "(document)");
    check_keys(root, "(document)",
               {"schema", "name", "domain", "background", "boundary", "materials",
                "waveforms", "electrodes", "coils", "stepper", "output"});
    if (!root.contains("schema")) fail("schema", "missing required field");
    if (!root.at("schema").is_number_integer() || root.at("schema").get<int>() != 1)
        fail("schema", "unsupported schema version (expected 1)");

    Scenario scn(parse_domain(root));
    scn.name = str_field(root, "(document)", "name", std::string("unnamed"));

    if (root.contains("background")) {
        const json& b = root.at("background");
        need_object(b, "background");
        check_keys(b, "background", {"kappa", "eps_r", "mu_r"});
        scn.bg_kappa = num_field(b, "background", "kappa", 0.0);
        scn.bg_eps_r = num_field(b, "background", "eps_r", 1.0);
        scn.bg_mu_r = num_field(b, "background", "mu_r", 1.0);
    }
    if (scn.bg_kappa < 0.0) fail("background.kappa", "must be >= 0");
    if (!(scn.bg_eps_r > 0.0)) fail("background.eps_r", "must be > 0");
    if (!(scn.bg_mu_r > 0.0)) fail("background.mu_r", "must be > 0");

    if (root.contains("boundary")) {
        const json& b = root.at("boundary");
        need_object(b, "boundary");
        check_keys(b, "boundary", {"wall_phi"});
        const std::string w = str_field(b, "boundary", "wall_phi", std::string("natural"));
        if (w == "natural")
            scn.wall_phi = WallPhi::natural;
        else if (w == "ground")
            scn.wall_phi = WallPhi::ground;
        else
            fail("boundary.wall_phi", "expected \"natural\" or \"ground\"");
    }

    if (root.contains("materials")) {
        const json& arr = root.at("materials");
        if (!arr.is_array()) fail("materials", "expected an array");
        for (std::size_t n = 0; n < arr.size(); ++n) {
            const std::string path = "materials[" + std::to_string(n) + "]";
            const json& m = arr[n];
            need_object(m, path);
            check_keys(m, path, {"name", "box", "kappa", "eps_r", "mu_r"});
            MaterialBox box;
            box.name = str_field(m, path, "name", std::string("material"));
            const auto [lo, hi] = box_field(m, path, "box");
            check_in_domain(scn.grid, lo, path + ".box");
            check_in_domain(scn.grid, hi, path + ".box");
            box.lo = snap_point(scn.grid, lo);
            box.hi = snap_point(scn.grid, hi);
            for (int a = 0; a < 3; ++a)
                if (box.hi[a] <= box.lo[a])
                    fail(path + ".box",
                         "collapses to zero cells after grid snapping (axis " +
                             std::string(axis_name(static_cast<Axis>(a))) + ")");
            box.kappa = num_field(m, path, "kappa", 0.0);
            box.eps_r = num_field(m, path, "eps_r", 1.0);
            box.mu_r = num_field(m, path, "mu_r", 1.0);
            if (box.kappa < 0.0) fail(path + ".kappa", "must be >= 0");
            if (!(box.eps_r > 0.0)) fail(path + ".eps_r", "must be > 0");
            if (!(box.mu_r > 0.0)) fail(path + ".mu_r", "must be > 0");
            scn.materials.push_back(std::move(box));
        }
    }

    if (root.contains("waveforms")) {
        const json& arr = root.at("waveforms");
        if (!arr.is_array()) fail("waveforms", "expected an array");
        std::set<std::string> names;
        for (std::size_t n = 0; n < arr.size(); ++n) {
            const std::string path = "waveforms[" + std::to_string(n) + "]";
            const json& w = arr[n];
            need_object(w, path);
            check_keys(w, path,
                       {"name", "kind", "amplitude", "frequency", "ramp_periods", "times",
                        "values"});
            Waveform wf;
            wf.name = str_field(w, path, "name");
            if (wf.name.empty()) fail(path + ".name", "must not be empty");
            if (!names.insert(wf.name).second)
                fail(path + ".name", "duplicate waveform name \"" + wf.name + "\"");
            wf.kind = waveform_kind(str_field(w, path, "kind"), path + ".kind");
            wf.amplitude = num_field(w, path, "amplitude", 1.0);
            if (wf.kind == Waveform::Kind::ramped_sine) {
                wf.frequency = num_field(w, path, "frequency");
                if (!(wf.frequency > 0.0)) fail(path + ".frequency", "must be > 0");
                wf.ramp_periods = num_field(w, path, "ramp_periods", 2.0);
                if (wf.ramp_periods < 0.0) fail(path + ".ramp_periods", "must be >= 0");
            } else if (wf.kind == Waveform::Kind::table) {
                if (!w.contains("times") || !w.contains("values"))
                    fail(path, "table waveform needs times and values");
                for (const json& v : w.at("times")) {
                    if (!v.is_number()) fail(path + ".times", "expected numbers");
                    wf.times.push_back(v.get<double>());
                }
                for (const json& v : w.at("values")) {
                    if (!v.is_number()) fail(path + ".values", "expected numbers");
                    wf.values.push_back(v.get<double>());
                }
                if (wf.times.size() != wf.values.size() || wf.times.size() < 2)
                    fail(path, "times and values must have equal length >= 2");
                for (std::size_t i = 1; i < wf.times.size(); ++i)
                    if (!(wf.times[i] > wf.times[i - 1]))
                        fail(path + ".times", "must be strictly increasing");
            }
            scn.waveforms.push_back(std::move(wf));
        }
    }

    if (root.contains("electrodes")) {
        const json& arr = root.at("electrodes");
        if (!arr.is_array()) fail("electrodes", "expected an array");
        for (std::size_t n = 0; n < arr.size(); ++n) {
            const std::string path = "electrodes[" + std::to_string(n) + "]";
            const json& e = arr[n];
            need_object(e, path);
            check_keys(e, path, {"name", "box", "waveform", "scale", "value"});
            ElectrodeRegion el;
            el.name = str_field(e, path, "name", "electrode" + std::to_string(n));
            const auto [lo, hi] = box_field(e, path, "box");
            check_in_domain(scn.grid, lo, path + ".box");
            check_in_domain(scn.grid, hi, path + ".box");
            el.node_lo = snap_point(scn.grid, lo);
            el.node_hi = snap_point(scn.grid, hi);
            check_distinct_snap(lo, hi, el.node_lo, el.node_hi, path + ".box");
            const bool has_wf = e.contains("waveform");
            const bool has_val = e.contains("value");
            if (has_wf == has_val)
                fail(path, "give exactly one of waveform or value");
            if (has_wf) {
                el.waveform = waveform_ref(scn.waveforms, e, path);
                el.scale = num_field(e, path, "scale", 1.0);
            } else {
                el.value = num_field(e, path, "value");
            }
            scn.electrodes.push_back(std::move(el));
        }
    }

    if (root.contains("coils")) {
        const json& arr = root.at("coils");
        if (!arr.is_array()) fail("coils", "expected an array");
        for (std::size_t n = 0; n < arr.size(); ++n) {
            const std::string path = "coils[" + std::to_string(n) + "]";
            const json& c = arr[n];
            need_object(c, path);
            check_keys(c, path, {"name", "normal", "position", "rect", "waveform", "scale"});
            CoilSpec coil;
            coil.name = str_field(c, path, "name", "coil" + std::to_string(n));
            coil.normal = axis_field(c, path, "normal");
            const auto [u_axis, v_axis] = transverse_axes(coil.normal);
            const double pos = num_field(c, path, "position");
            {
                std::array<double, 3> p{scn.grid.plane(Axis::x, 0), scn.grid.plane(Axis::y, 0),
                                        scn.grid.plane(Axis::z, 0)};
                p[axis_index(coil.normal)] = pos;
                check_in_domain(scn.grid, p, path + ".position");
            }
            coil.plane = scn.grid.snap_plane(coil.normal, pos);
            if (!c.contains("rect")) fail(path + ".rect", "missing required [[u0,v0],[u1,v1]]");
            const json& r = c.at("rect");
            if (!r.is_array() || r.size() != 2 || !r[0].is_array() || r[0].size() != 2 ||
                !r[1].is_array() || r[1].size() != 2)
                fail(path + ".rect", "expected [[u0,v0],[u1,v1]]");
            for (int q = 0; q < 2; ++q)
                for (int p = 0; p < 2; ++p)
                    if (!r[q][p].is_number()) fail(path + ".rect", "expected numbers");
            auto in_axis = [&](Axis a, double v) {
                const double lo = scn.grid.plane(a, 0);
                const double hi = scn.grid.plane(a, scn.grid.nodes(a) - 1);
                if (v < lo - 1e-12 * (hi - lo) || v > hi + 1e-12 * (hi - lo))
                    fail(path + ".rect", "coordinate " + std::to_string(v) +
                                             " lies outside the domain along " + axis_name(a));
            };
            in_axis(u_axis, r[0][0].get<double>());
            in_axis(v_axis, r[0][1].get<double>());
            in_axis(u_axis, r[1][0].get<double>());
            in_axis(v_axis, r[1][1].get<double>());
            coil.u0 = scn.grid.snap_plane(u_axis, r[0][0].get<double>());
            coil.v0 = scn.grid.snap_plane(v_axis, r[0][1].get<double>());
            coil.u1 = scn.grid.snap_plane(u_axis, r[1][0].get<double>());
            coil.v1 = scn.grid.snap_plane(v_axis, r[1][1].get<double>());
            if (coil.u1 <= coil.u0 || coil.v1 <= coil.v0)
                fail(path + ".rect", "collapses to a degenerate loop after grid snapping");
            coil.waveform = waveform_ref(scn.waveforms, c, path);
            coil.scale = num_field(c, path, "scale", 1.0);
            scn.coils.push_back(std::move(coil));
        }
    }

    if (!root.contains("stepper")) fail("stepper", "missing required object");
    {
        const json& st = root.at("stepper");
        need_object(st, "stepper");
        check_keys(st, "stepper",
                   {"dt", "steps", "scheme", "eqs_tol", "mqs_tol", "max_iter",
                    "preconditioner", "ssor_omega", "gs_max_sweeps", "gs_sweep_tol",
                    "kappa_reg", "mass_reg", "exact_solves"});
        StepperSettings& s = scn.stepper;
        s.dt = num_field(st, "stepper", "dt");
        if (!(s.dt > 0.0)) fail("stepper.dt", "must be > 0");
        s.steps = int_field(st, "stepper", "steps");
        if (s.steps < 0) fail("stepper.steps", "must be >= 0");
        s.scheme = parse_scheme(str_field(st, "stepper", "scheme", std::string("two_step")),
                                "stepper.scheme");
        s.eqs_tol = num_field(st, "stepper", "eqs_tol", 1e-10);
        s.mqs_tol = num_field(st, "stepper", "mqs_tol", 1e-10);
        if (!(s.eqs_tol > 0.0)) fail("stepper.eqs_tol", "must be > 0");
        if (!(s.mqs_tol > 0.0)) fail("stepper.mqs_tol", "must be > 0");
        s.max_iter = int_field(st, "stepper", "max_iter", 5000);
        if (s.max_iter < 1) fail("stepper.max_iter", "must be >= 1");
        s.precond = parse_precond(
            str_field(st, "stepper", "preconditioner", std::string("jacobi")),
            "stepper.preconditioner");
        s.ssor_omega = num_field(st, "stepper", "ssor_omega", 1.0);
        if (!(s.ssor_omega > 0.0 && s.ssor_omega < 2.0))
            fail("stepper.ssor_omega", "must lie in (0, 2)");
        s.gs_max_sweeps = int_field(st, "stepper", "gs_max_sweeps", 8);
        if (s.gs_max_sweeps < 1) fail("stepper.gs_max_sweeps", "must be >= 1");
        s.gs_sweep_tol = num_field(st, "stepper", "gs_sweep_tol", 1e-8);
        if (!(s.gs_sweep_tol > 0.0)) fail("stepper.gs_sweep_tol", "must be > 0");
        if (st.contains("kappa_reg") && !st.at("kappa_reg").is_null()) {
            s.kappa_reg = num_field(st, "stepper", "kappa_reg");
            if (*s.kappa_reg < 0.0) fail("stepper.kappa_reg", "must be >= 0");
        }
        s.mass_reg = num_field(st, "stepper", "mass_reg", 0.0);
        if (s.mass_reg < 0.0) fail("stepper.mass_reg", "must be >= 0");
        s.exact_solves = bool_field(st, "stepper", "exact_solves", false);
    }

    if (root.contains("output")) {
        const json& o = root.at("output");
        need_object(o, "output");
        check_keys(o, "output", {"snap_every", "snap_times"});
        scn.output.snap_every = int_field(o, "output", "snap_every", 0);
        if (scn.output.snap_every < 0) fail("output.snap_every", "must be >= 0");
        if (o.contains("snap_times")) {
            const json& st = o.at("snap_times");
            if (!st.is_array()) fail("output.snap_times", "expected an array");
            for (const json& v : st) {
                if (!v.is_number()) fail("output.snap_times", "expected numbers");
                scn.output.snap_times.push_back(v.get<double>());
            }
        }
    }

    return scn;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("scenario: cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
    const StaggeredGrid& g = s.grid;
    json root;
    root["schema"] = 1;
    root["name"] = s.name;

    json planes;
    for (Axis a : all_axes) {
        json arr = json::array();
        for (int i = 0; i < g.nodes(a); ++i) arr.push_back(g.plane(a, i));
        planes[axis_name(a)] = std::move(arr);
    }
    root["domain"] = json{{"planes", std::move(planes)}};
    root["background"] =
        json{{"kappa", s.bg_kappa}, {"eps_r", s.bg_eps_r}, {"mu_r", s.bg_mu_r}};
    root["boundary"] =
        json{{"wall_phi", s.wall_phi == WallPhi::ground ? "ground" : "natural"}};

    auto corner = [&](const std::array<int, 3>& p) {
        return json::array({g.plane(Axis::x, p[0]), g.plane(Axis::y, p[1]),
                            g.plane(Axis::z, p[2])});
    };

    json materials = json::array();
    for (const MaterialBox& m : s.materials)
        materials.push_back(json{{"name", m.name},
                                 {"box", json::array({corner(m.lo), corner(m.hi)})},
                                 {"kappa", m.kappa},
                                 {"eps_r", m.eps_r},
                                 {"mu_r", m.mu_r}});
    root["materials"] = std::move(materials);

    json waveforms = json::array();
    for (const Waveform& w : s.waveforms) {
        json j{{"name", w.name}, {"kind", kind_name(w.kind)}, {"amplitude", w.amplitude}};
        if (w.kind == Waveform::Kind::ramped_sine) {
            j["frequency"] = w.frequency;
            j["ramp_periods"] = w.ramp_periods;
        } else if (w.kind == Waveform::Kind::table) {
            j["times"] = w.times;
            j["values"] = w.values;
        }
        waveforms.push_back(std::move(j));
    }
    root["waveforms"] = std::move(waveforms);

    json electrodes = json::array();
    for (const ElectrodeRegion& e : s.electrodes) {
        json j{{"name", e.name},
               {"box", json::array({corner(e.node_lo), corner(e.node_hi)})}};
        if (e.waveform >= 0) {
            j["waveform"] = s.waveforms[e.waveform].name;
            j["scale"] = e.scale;
        } else {
            j["value"] = e.value;
        }
        electrodes.push_back(std::move(j));
    }
    root["electrodes"] = std::move(electrodes);

    json coils = json::array();
    for (const CoilSpec& c : s.coils) {
        const auto [u_axis, v_axis] = transverse_axes(c.normal);
        coils.push_back(
            json{{"name", c.name},
                 {"normal", axis_name(c.normal)},
                 {"position", g.plane(c.normal, c.plane)},
                 {"rect", json::array({json::array({g.plane(u_axis, c.u0),
                                                    g.plane(v_axis, c.v0)}),
                                       json::array({g.plane(u_axis, c.u1),
                                                    g.plane(v_axis, c.v1)})})},
                 {"waveform", s.waveforms[c.waveform].name},
                 {"scale", c.scale}});
    }
    root["coils"] = std::move(coils);

    const StepperSettings& st = s.stepper;
    json stepper{{"dt", st.dt},
                 {"steps", st.steps},
                 {"scheme", scheme_name(st.scheme)},
                 {"eqs_tol", st.eqs_tol},
                 {"mqs_tol", st.mqs_tol},
                 {"max_iter", st.max_iter},
                 {"preconditioner", precond_name(st.precond)},
                 {"ssor_omega", st.ssor_omega},
                 {"gs_max_sweeps", st.gs_max_sweeps},
                 {"gs_sweep_tol", st.gs_sweep_tol},
                 {"mass_reg", st.mass_reg},
                 {"exact_solves", st.exact_solves}};
    if (st.kappa_reg)
        stepper["kappa_reg"] = *st.kappa_reg;
    else
        stepper["kappa_reg"] = nullptr;
    root["stepper"] = std::move(stepper);

    root["output"] =
        json{{"snap_every", s.output.snap_every}, {"snap_times", s.output.snap_times}};

    return root.dump(2) + "\n";
}

MaterialField build_materials(const Scenario& s) {
    const StaggeredGrid& g = s.grid;
    MaterialField mat;
    const long nc = g.cell_count();
    mat.kappa.assign(nc, s.bg_kappa);
    mat.eps.assign(nc, s.bg_eps_r * vacuum_permittivity);
    mat.nu.assign(nc, 1.0 / (s.bg_mu_r * vacuum_permeability));
    for (const MaterialBox& m : s.materials) {
        for (int k = m.lo[2]; k < m.hi[2]; ++k)
            for (int j = m.lo[1]; j < m.hi[1]; ++j)
                for (int i = m.lo[0]; i < m.hi[0]; ++i) {
                    const long idx = g.flat_index({EntityKind::cell, i, j, k});
                    mat.kappa[idx] = m.kappa;
                    mat.eps[idx] = m.eps_r * vacuum_permittivity;
                    mat.nu[idx] = 1.0 / (m.mu_r * vacuum_permeability);
                }
    }
    return mat;
}

BoundaryConfig boundary_config(const Scenario& s) {
    BoundaryConfig bc;
    bc.wall_phi = s.wall_phi;
    bc.electrodes = s.electrodes;
    return bc;
}

std::vector<std::pair<long, int>> coil_edges(const StaggeredGrid& grid, const CoilSpec& c) {
    const auto [u_axis, v_axis] = transverse_axes(c.normal);
    std::vector<std::pair<long, int>> out;
    auto edge = [&](Axis along, int u, int v) {
        std::array<int, 3> ijk{};
        ijk[axis_index(u_axis)] = u;
        ijk[axis_index(v_axis)] = v;
        ijk[axis_index(c.normal)] = c.plane;
        return grid.edge_id(along, ijk[0], ijk[1], ijk[2]);
    };
    for (int u = c.u0; u < c.u1; ++u) out.emplace_back(edge(u_axis, u, c.v0), +1);
    for (int v = c.v0; v < c.v1; ++v) out.emplace_back(edge(v_axis, c.u1, v), +1);
    for (int u = c.u0; u < c.u1; ++u) out.emplace_back(edge(u_axis, u, c.v1), -1);
    for (int v = c.v0; v < c.v1; ++v) out.emplace_back(edge(v_axis, c.u0, v), -1);
    return out;
}

SourceSample sample_sources(const Scenario& s, double t) {
    const StaggeredGrid& g = s.grid;
    SourceSample out;
    out.j_s.assign(g.edge_count(), 0.0);
    out.dirichlet_phi.assign(g.node_count(), 0.0);
    for (const CoilSpec& c : s.coils) {
        const double cur = c.scale * s.waveforms[c.waveform].eval(t);
        for (const auto& [e, sign] : coil_edges(g, c)) out.j_s[e] += sign * cur;
    }
    for (const ElectrodeRegion& e : s.electrodes) {
        const double val =
            e.waveform >= 0 ? e.scale * s.waveforms[e.waveform].eval(t) : e.value;
        for (int k = e.node_lo[2]; k <= e.node_hi[2]; ++k)
            for (int j = e.node_lo[1]; j <= e.node_hi[1]; ++j)
                for (int i = e.node_lo[0]; i <= e.node_hi[0]; ++i)
                    out.dirichlet_phi[g.flat_index({EntityKind::node, i, j, k})] = val;
    }
    return out;
}

StepperConfig make_stepper_config(const Scenario& s) {
    const StepperSettings& st = s.stepper;
    StepperConfig c;
    c.dt = st.dt;
    c.scheme = st.scheme;
    c.eqs_cg.tol = st.eqs_tol;
    c.mqs_cg.tol = st.mqs_tol;
    c.eqs_cg.max_iter = c.mqs_cg.max_iter = st.max_iter;
    c.eqs_cg.precond = c.mqs_cg.precond = st.precond;
    c.eqs_cg.ssor_omega = c.mqs_cg.ssor_omega = st.ssor_omega;
    c.gs_max_sweeps = st.gs_max_sweeps;
    c.gs_sweep_tol = st.gs_sweep_tol;
    c.mass_reg = st.mass_reg;
    c.exact_solves = st.exact_solves;
    if (st.kappa_reg) {
        c.kappa_reg = *st.kappa_reg;
    } else if (st.scheme == Scheme::monolithic) {
        const MaterialField mat = build_materials(s);
        double max_kappa = 0.0;
        bool any_zero = false;
        for (double k : mat.kappa) {
            max_kappa = std::max(max_kappa, k);
            if (k == 0.0) any_zero = true;
        }
        c.kappa_reg = any_zero ? 1e-6 * max_kappa : 0.0;
    }
    return c;
}

}  // namespace darwin
