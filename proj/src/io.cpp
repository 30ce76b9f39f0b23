#include "penaflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "penaflow/stencil.hpp"

namespace penaflow {

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues)
{
    std::string s;
    for (const auto& i : issues) {
        if (!s.empty()) s += "\n";
        s += (i.pointer.empty() ? std::string("/") : i.pointer) + ": " + i.message;
    }
    return s;
}

// Reads one JSON object, recording the keys it consumed so the rest can be reported.
class Reader {
public:
    Reader(const json& j, std::string pointer, std::vector<ConfigIssue>& issues)
        : j_(j), ptr_(std::move(pointer)), issues_(issues)
    {
        if (!j_.is_object()) issue("", "expected an object");
    }

    ~Reader()
    {
        if (!j_.is_object()) return;
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) issue(it.key(), "unknown key");
    }

    Reader(const Reader&) = delete;
    Reader& operator=(const Reader&) = delete;

    [[nodiscard]] bool has(const std::string& key)
    {
        if (!j_.is_object() || !j_.contains(key)) return false;
        seen_.insert(key);
        return true;
    }
    [[nodiscard]] const json& at(const std::string& key) const { return j_.at(key); }
    [[nodiscard]] std::string path(const std::string& key) const { return ptr_ + "/" + key; }
    void issue(const std::string& key, const std::string& message)
    {
        issues_.push_back({key.empty() ? ptr_ : path(key), message});
    }

    void number(const std::string& key, double& out, bool allow_null_infinity = false)
    {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (allow_null_infinity && v.is_null()) {
            out = std::numeric_limits<double>::infinity();
            return;
        }
        if (!v.is_number()) return issue(key, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) return issue(key, "expected a finite number");
        out = x;
    }
    void integer(const std::string& key, int& out)
    {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) return issue(key, "expected an integer");
        out = v.get<int>();
    }
    void boolean(const std::string& key, bool& out)
    {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_boolean()) return issue(key, "expected true or false");
        out = v.get<bool>();
    }
    void string(const std::string& key, std::string& out)
    {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_string()) return issue(key, "expected a string");
        out = v.get<std::string>();
    }
    void vec(const std::string& key, Vec& out)
    {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_array() || v.size() < 2 || v.size() > 3) return issue(key, "expected an array of 2 or 3 numbers");
        Vec r{};
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) return issue(key, "expected an array of 2 or 3 numbers");
            r[i] = v[i].get<double>();
        }
        out = r;
    }
    template <class E>
    void enumeration(const std::string& key, E& out, const std::vector<std::pair<std::string, E>>& names)
    {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (v.is_string())
            for (const auto& [name, value] : names)
                if (v.get<std::string>() == name) {
                    out = value;
                    return;
                }
        std::string allowed;
        for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : ", ") + name;
        issue(key, "expected one of: " + allowed);
    }

private:
    const json& j_;
    std::string ptr_;
    std::vector<ConfigIssue>& issues_;
    std::set<std::string> seen_;
};

const std::vector<std::pair<std::string, Shape::Kind>> kShapeKinds = {
    {"disk", Shape::Kind::disk}, {"box", Shape::Kind::box}, {"ellipse", Shape::Kind::ellipse},
    {"union", Shape::Kind::set_union}, {"intersection", Shape::Kind::set_intersection}};
const std::vector<std::pair<std::string, VelocityFieldSpec::Kind>> kFieldKinds = {
    {"zero", VelocityFieldSpec::Kind::zero},
    {"rigid_translation", VelocityFieldSpec::Kind::rigid_translation},
    {"rigid_rotation", VelocityFieldSpec::Kind::rigid_rotation},
    {"linear", VelocityFieldSpec::Kind::linear},
    {"time_ramped", VelocityFieldSpec::Kind::time_ramped},
    {"superposition", VelocityFieldSpec::Kind::superposition}};
const std::vector<std::pair<std::string, DensityProfile::Kind>> kDensityKinds = {
    {"uniform_in_domain", DensityProfile::Kind::uniform_in_domain},
    {"uniform", DensityProfile::Kind::uniform},
    {"smooth_in_domain", DensityProfile::Kind::smooth_in_domain},
    {"manufactured", DensityProfile::Kind::manufactured}};
const std::vector<std::pair<std::string, VelocityProfile::Kind>> kVelocityKinds = {
    {"zero", VelocityProfile::Kind::zero},         {"uniform", VelocityProfile::Kind::uniform},
    {"follow_boundary", VelocityProfile::Kind::follow_boundary}, {"rotation", VelocityProfile::Kind::rotation},
    {"vortex", VelocityProfile::Kind::vortex},     {"manufactured", VelocityProfile::Kind::manufactured}};
const std::vector<std::pair<std::string, AdvectionScheme>> kSchemes = {{"upwind1", AdvectionScheme::upwind1},
                                                                       {"weno5", AdvectionScheme::weno5}};

template <class E>
std::string name_of(E value, const std::vector<std::pair<std::string, E>>& names)
{
    for (const auto& [n, v] : names)
        if (v == value) return n;
    return "unknown";
}

json vec_json(const Vec& v, int dim) { return dim == 3 ? json::array({v[0], v[1], v[2]}) : json::array({v[0], v[1]}); }

void read_shape(const json& j, const std::string& ptr, Shape& s, std::vector<ConfigIssue>& issues)
{
    Reader r(j, ptr, issues);
    r.enumeration("kind", s.kind, kShapeKinds);
    r.vec("center", s.center);
    r.number("radius", s.radius);
    r.vec("lo", s.lo);
    r.vec("hi", s.hi);
    r.vec("semi_axes", s.semi_axes);
    r.number("angle", s.angle);
    if (r.has("children")) {
        const json& c = r.at("children");
        if (!c.is_array()) {
            r.issue("children", "expected an array");
        } else {
            s.children.assign(c.size(), Shape{});
            for (std::size_t i = 0; i < c.size(); ++i) read_shape(c[i], r.path("children") + "/" + std::to_string(i), s.children[i], issues);
        }
    }
    if (s.kind == Shape::Kind::disk && !(s.radius > 0.0)) r.issue("radius", "must be positive");
}

void read_field(const json& j, const std::string& ptr, VelocityFieldSpec& v, std::vector<ConfigIssue>& issues)
{
    Reader r(j, ptr, issues);
    r.enumeration("kind", v.kind, kFieldKinds);
    r.vec("vector", v.vector);
    r.vec("center", v.center);
    r.number("angular_rate", v.angular_rate);
    if (r.has("matrix")) {
        const json& m = r.at("matrix");
        bool ok = m.is_array() && (m.size() == 2 || m.size() == 3);
        Tensor t{};
        for (std::size_t i = 0; ok && i < m.size(); ++i) {
            ok = m[i].is_array() && m[i].size() == m.size();
            for (std::size_t k = 0; ok && k < m.size(); ++k) {
                ok = m[i][k].is_number();
                if (ok) t[i][k] = m[i][k].get<double>();
            }
        }
        if (ok) v.matrix = t;
        else r.issue("matrix", "expected a square 2x2 or 3x3 array of numbers");
    }
    r.number("ramp_time", v.ramp_time);
    r.number("cutoff_radius", v.cutoff_radius, true);
    r.number("taper_width", v.taper_width);
    if (r.has("children")) {
        const json& c = r.at("children");
        if (!c.is_array()) {
            r.issue("children", "expected an array");
        } else {
            v.children.assign(c.size(), VelocityFieldSpec{});
            for (std::size_t i = 0; i < c.size(); ++i) read_field(c[i], r.path("children") + "/" + std::to_string(i), v.children[i], issues);
        }
    }
    if (!(v.cutoff_radius > 0.0)) r.issue("cutoff_radius", "must be positive");
    if (!(v.taper_width >= 0.0)) r.issue("taper_width", "must be nonnegative");
    if (v.kind == VelocityFieldSpec::Kind::time_ramped && v.children.size() != 1) r.issue("children", "time_ramped needs exactly one child");
}

ScenarioConfig base_config(const json& doc, std::vector<ConfigIssue>& issues)
{
    if (!doc.is_object() || !doc.contains("base")) return ScenarioConfig{};
    const json& b = doc.at("base");
    if (!b.is_string()) {
        issues.push_back({"/base", "expected a scenario name"});
        return ScenarioConfig{};
    }
    try {
        return scenario(b.get<std::string>());
    } catch (const Error&) {
        issues.push_back({"/base", "unknown scenario '" + b.get<std::string>() + "'"});
        return ScenarioConfig{};
    }
}

} // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error(ErrorCode::schema_violation, join_issues(issues)), issues_(std::move(issues))
{
}

ConfigFile parse_config(const json& doc)
{
    std::vector<ConfigIssue> issues;
    ConfigFile out;
    out.scenario = base_config(doc, issues);
    ScenarioConfig& c = out.scenario;
    {
        Reader r(doc, "", issues);
        if (!r.has("schema_version")) {
            issues.push_back({"/schema_version", "missing; expected " + std::to_string(kSchemaVersion)});
        } else if (!r.at("schema_version").is_number_integer() || r.at("schema_version").get<int>() != kSchemaVersion) {
            r.issue("schema_version", "unsupported; expected " + std::to_string(kSchemaVersion));
        }
        (void)r.has("base");
        r.string("name", c.name);
        if (r.has("grid")) {
            Reader g(r.at("grid"), r.path("grid"), issues);
            g.integer("dim", c.grid.dim);
            g.integer("n", c.grid.n);
            g.number("half_width", c.grid.half_width);
            if (c.grid.dim != 2 && c.grid.dim != 3) g.issue("dim", "must be 2 or 3");
            if (c.grid.n < 4) g.issue("n", "must be at least 4");
            if (!(c.grid.half_width > 0.0)) g.issue("half_width", "must be positive");
        }
        if (r.has("shape")) {
            c.shape = Shape{};
            read_shape(r.at("shape"), r.path("shape"), c.shape, issues);
        }
        r.number("band_width_cells", c.band_width_cells);
        if (r.has("fluid")) {
            Reader f(r.at("fluid"), r.path("fluid"), issues);
            f.number("gamma", c.fluid.gamma);
            f.number("a", c.fluid.a);
            f.number("mu", c.fluid.mu);
            f.number("eta", c.fluid.eta);
            f.number("kappa", c.fluid.kappa);
            if (f.has("body_force")) {
                c.fluid.body_force = VelocityFieldSpec{};
                read_field(f.at("body_force"), f.path("body_force"), c.fluid.body_force, issues);
            }
            if (!(c.fluid.gamma > 1.5)) f.issue("gamma", "gamma must exceed 3/2 (existence theory for the barotropic model)");
            if (!(c.fluid.a > 0.0)) f.issue("a", "must be positive");
            if (!(c.fluid.mu > 0.0)) f.issue("mu", "must be positive");
            if (!(c.fluid.eta >= 0.0)) f.issue("eta", "must be nonnegative");
            if (!(c.fluid.kappa >= 0.0)) f.issue("kappa", "must be nonnegative");
        }
        if (r.has("regularization")) {
            Reader g(r.at("regularization"), r.path("regularization"), issues);
            g.number("epsilon", c.reg.epsilon);
            g.number("delta", c.reg.delta);
            g.number("beta", c.reg.beta);
            g.number("omega", c.reg.omega);
            g.number("ramp_width", c.reg.ramp_width);
            if (!(c.reg.epsilon > 0.0)) g.issue("epsilon", "must be positive");
            if (!(c.reg.delta >= 0.0)) g.issue("delta", "must be nonnegative");
            if (!(c.reg.beta >= 2.0)) g.issue("beta", "must be at least 2");
            if (!(c.reg.omega > 0.0 && c.reg.omega <= 1.0)) g.issue("omega", "must lie in (0, 1]");
            if (!(c.reg.ramp_width >= 0.0)) g.issue("ramp_width", "must be nonnegative");
        }
        if (r.has("density")) {
            Reader g(r.at("density"), r.path("density"), issues);
            g.enumeration("kind", c.density.kind, kDensityKinds);
            g.number("value", c.density.value);
            g.number("rise_width", c.density.rise_width);
            if (!(c.density.value > 0.0)) g.issue("value", "must be positive");
            if (!(c.density.rise_width > 0.0)) g.issue("rise_width", "must be positive");
        }
        if (r.has("velocity")) {
            Reader g(r.at("velocity"), r.path("velocity"), issues);
            g.enumeration("kind", c.velocity.kind, kVelocityKinds);
            g.vec("vector", c.velocity.vector);
            g.vec("center", c.velocity.center);
            g.number("rate", c.velocity.rate);
            g.number("core_radius", c.velocity.core_radius);
            if (!(c.velocity.core_radius > 0.0)) g.issue("core_radius", "must be positive");
        }
        if (r.has("boundary_velocity")) {
            c.boundary_velocity = VelocityFieldSpec{};
            read_field(r.at("boundary_velocity"), r.path("boundary_velocity"), c.boundary_velocity, issues);
        }
        r.number("end_time", c.end_time);
        r.number("cfl", c.cfl);
        r.number("fixed_dt", c.fixed_dt);
        r.integer("output_cadence", c.output_cadence);
        r.integer("reinit_interval", c.reinit_interval);
        r.enumeration("levelset_scheme", c.levelset_scheme, kSchemes);
        r.boolean("confine_initial_density", c.confine_initial_density);
        r.number("pressure_monitor_bands", c.pressure_monitor_bands);
        if (r.has("manufactured")) {
            if (r.at("manufactured").is_null()) {
                c.manufactured.reset();
            } else {
                ManufacturedSolution m;
                Reader g(r.at("manufactured"), r.path("manufactured"), issues);
                g.number("rho_amplitude", m.rho_amplitude);
                g.number("u_amplitude", m.u_amplitude);
                g.number("support_radius", m.support_radius);
                if (!(m.support_radius > 0.0)) g.issue("support_radius", "must be positive");
                c.manufactured = m;
            }
        }
        if (r.has("sweep")) {
            SweepRequest sw;
            Reader g(r.at("sweep"), r.path("sweep"), issues);
            g.string("parameter", sw.parameter);
            if (sw.parameter != "epsilon" && sw.parameter != "omega" && sw.parameter != "delta")
                g.issue("parameter", "expected one of: epsilon, omega, delta");
            if (g.has("values")) {
                const json& v = g.at("values");
                if (!v.is_array()) g.issue("values", "expected an array of numbers");
                else
                    for (const auto& x : v) {
                        if (!x.is_number()) {
                            g.issue("values", "expected an array of numbers");
                            break;
                        }
                        sw.values.push_back(x.get<double>());
                    }
            } else {
                g.issue("values", "missing");
            }
            out.sweep = sw;
        }
        if (c.end_time < 0.0) r.issue("end_time", "must be nonnegative");
        if (c.fixed_dt < 0.0) r.issue("fixed_dt", "must be nonnegative");
        if (c.output_cadence < 1) r.issue("output_cadence", "must be at least 1");
        if (c.reinit_interval < 1) r.issue("reinit_interval", "must be at least 1");
        if (!(c.band_width_cells >= 1.0)) r.issue("band_width_cells", "must be at least 1");
    }
    if (issues.empty()) {
        try {
            c.validate();
        } catch (const Error& e) {
            issues.push_back({"", e.what()});
        }
    }
    if (!issues.empty()) throw ConfigError(std::move(issues));
    return out;
}

ConfigFile parse_config_file(const std::filesystem::path& path)
{
    return parse_config(read_json(path));
}

json to_json(const Shape& s)
{
    json j;
    j["kind"] = name_of(s.kind, kShapeKinds);
    switch (s.kind) {
    case Shape::Kind::disk:
        j["center"] = vec_json(s.center, 3);
        j["radius"] = s.radius;
        break;
    case Shape::Kind::box:
        j["lo"] = vec_json(s.lo, 3);
        j["hi"] = vec_json(s.hi, 3);
        break;
    case Shape::Kind::ellipse:
        j["center"] = vec_json(s.center, 3);
        j["semi_axes"] = vec_json(s.semi_axes, 3);
        j["angle"] = s.angle;
        break;
    case Shape::Kind::set_union:
    case Shape::Kind::set_intersection: {
        json c = json::array();
        for (const auto& ch : s.children) c.push_back(to_json(ch));
        j["children"] = c;
        break;
    }
    }
    return j;
}

json to_json(const VelocityFieldSpec& v)
{
    json j;
    j["kind"] = name_of(v.kind, kFieldKinds);
    j["vector"] = vec_json(v.vector, 3);
    j["center"] = vec_json(v.center, 3);
    j["angular_rate"] = v.angular_rate;
    json m = json::array();
    for (int i = 0; i < 3; ++i) m.push_back(json::array({v.matrix[i][0], v.matrix[i][1], v.matrix[i][2]}));
    j["matrix"] = m;
    j["ramp_time"] = v.ramp_time;
    j["cutoff_radius"] = std::isfinite(v.cutoff_radius) ? json(v.cutoff_radius) : json(nullptr);
    j["taper_width"] = v.taper_width;
    json c = json::array();
    for (const auto& ch : v.children) c.push_back(to_json(ch));
    j["children"] = c;
    return j;
}

json to_json(const ScenarioConfig& c)
{
    json j;
    j["schema_version"] = kSchemaVersion;
    j["name"] = c.name;
    j["grid"] = {{"dim", c.grid.dim}, {"n", c.grid.n}, {"half_width", c.grid.half_width}};
    j["shape"] = to_json(c.shape);
    j["band_width_cells"] = c.band_width_cells;
    j["fluid"] = {{"gamma", c.fluid.gamma}, {"a", c.fluid.a},         {"mu", c.fluid.mu},
                  {"eta", c.fluid.eta},     {"kappa", c.fluid.kappa}, {"body_force", to_json(c.fluid.body_force)}};
    j["regularization"] = {{"epsilon", c.reg.epsilon}, {"delta", c.reg.delta}, {"beta", c.reg.beta},
                           {"omega", c.reg.omega},     {"ramp_width", c.reg.ramp_width}};
    j["density"] = {{"kind", name_of(c.density.kind, kDensityKinds)}, {"value", c.density.value}, {"rise_width", c.density.rise_width}};
    j["velocity"] = {{"kind", name_of(c.velocity.kind, kVelocityKinds)},
                     {"vector", vec_json(c.velocity.vector, 3)},
                     {"center", vec_json(c.velocity.center, 3)},
                     {"rate", c.velocity.rate},
                     {"core_radius", c.velocity.core_radius}};
    j["boundary_velocity"] = to_json(c.boundary_velocity);
    j["end_time"] = c.end_time;
    j["cfl"] = c.cfl;
    j["fixed_dt"] = c.fixed_dt;
    j["output_cadence"] = c.output_cadence;
    j["reinit_interval"] = c.reinit_interval;
    j["levelset_scheme"] = name_of(c.levelset_scheme, kSchemes);
    j["confine_initial_density"] = c.confine_initial_density;
    j["pressure_monitor_bands"] = c.pressure_monitor_bands;
    if (c.manufactured)
        j["manufactured"] = {{"rho_amplitude", c.manufactured->rho_amplitude},
                             {"u_amplitude", c.manufactured->u_amplitude},
                             {"support_radius", c.manufactured->support_radius}};
    else
        j["manufactured"] = nullptr;
    return j;
}

json to_json(const ConfigFile& cfg)
{
    json j = to_json(cfg.scenario);
    if (cfg.sweep) j["sweep"] = {{"parameter", cfg.sweep->parameter}, {"values", cfg.sweep->values}};
    return j;
}

json default_config()
{
    return to_json(scenario("rest_disk"));
}

std::string csv_header()
{
    return "time,mass,energy,dissipation_cum,penalty_cum,solid_mass,h1_sq,max_rho,clipped_mass,local_pressure";
}

std::string csv_row(const DiagnosticsRecord& r)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.time, r.mass, r.energy,
                  r.dissipation_cum, r.penalty_cum, r.solid_mass, r.h1_sq, r.max_rho, r.clipped_mass, r.local_pressure);
    return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records)
{
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    f << csv_header() << '\n';
    for (const auto& r : records) f << csv_row(r) << '\n';
    if (!f) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

void write_vtk(const std::filesystem::path& path, const FlowState& s, const LevelSetField& d, const FluidParams& fp,
               const RegularizationParams& rp)
{
    const Grid& g = s.grid;
    const std::size_t n = g.cell_count();
    const std::vector<double> mu = viscosity_cells(d, fp, rp);
    std::ostringstream o;
    char buf[128];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    const double h = g.spacing();
    const double x0 = g.coord(0);
    o << "# vtk DataFile Version 3.0\n";
    o << "penaflow t=" << num(s.time) << "\n";
    o << "ASCII\nDATASET STRUCTURED_POINTS\n";
    o << "DIMENSIONS " << g.n << ' ' << g.n << ' ' << g.nz() << "\n";
    o << "ORIGIN " << num(x0) << ' ' << num(x0) << ' ' << (g.dim == 3 ? num(x0) : std::string("0")) << "\n";
    o << "SPACING " << num(h) << ' ' << num(h) << ' ' << num(h) << "\n";
    o << "POINT_DATA " << n << "\n";
    auto scalars = [&](const char* name, const std::vector<double>& v) {
        o << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (std::size_t c = 0; c < n; ++c) o << num(v[c]) << '\n';
    };
    scalars("rho", s.rho);
    o << "VECTORS mom double\n";
    for (std::size_t c = 0; c < n; ++c)
        o << num(s.mom[0][c]) << ' ' << num(s.mom[1][c]) << ' ' << num(g.dim == 3 ? s.mom[2][c] : 0.0) << '\n';
    scalars("levelset", d.values);
    scalars("mu_omega", mu);
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    f << o.str();
    if (!f) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
double number_or_nan(const json& j) { return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN(); }

} // namespace

json to_json(const SweepReport& rep)
{
    json j;
    j["parameter"] = rep.parameter;
    j["values"] = rep.values;
    j["dt"] = rep.dt;
    j["fitted_metric"] = rep.fitted_metric;
    j["slope"] = finite_or_null(rep.slope);
    j["slope_residual"] = finite_or_null(rep.slope_residual);
    j["slope_note"] = "empirical log-log slope of this discretization";
    json checks = json::object();
    for (const auto& [k, v] : rep.checks) checks[k] = v;
    j["checks"] = checks;
    j["verdict"] = rep.verdict;
    json runs = json::array();
    for (const auto& r : rep.runs) {
        json m = json::object();
        for (const auto& [k, v] : r.metrics) m[k] = finite_or_null(v);
        runs.push_back({{"value", r.value}, {"steps", r.steps}, {"metrics", m}});
    }
    j["runs"] = runs;
    return j;
}

SweepReport sweep_report_from_json(const json& j)
{
    try {
        SweepReport rep;
        rep.parameter = j.at("parameter").get<std::string>();
        rep.values = j.at("values").get<std::vector<double>>();
        rep.dt = j.at("dt").get<double>();
        rep.fitted_metric = j.at("fitted_metric").get<std::string>();
        rep.slope = number_or_nan(j.at("slope"));
        rep.slope_residual = number_or_nan(j.at("slope_residual"));
        for (auto it = j.at("checks").begin(); it != j.at("checks").end(); ++it) rep.checks[it.key()] = it.value().get<bool>();
        rep.verdict = j.at("verdict").get<std::string>();
        for (const auto& r : j.at("runs")) {
            SweepRun run;
            run.value = r.at("value").get<double>();
            run.steps = r.at("steps").get<int>();
            for (auto it = r.at("metrics").begin(); it != r.at("metrics").end(); ++it) run.metrics[it.key()] = number_or_nan(it.value());
            rep.runs.push_back(std::move(run));
        }
        return rep;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::schema_violation, std::string("malformed sweep report: ") + e.what());
    }
}

json to_json(const OrderReport& rep)
{
    return {{"n_coarse", rep.n_coarse},
            {"n_fine", rep.n_fine},
            {"rho_error", {rep.rho_error_coarse, rep.rho_error_fine}},
            {"momentum_error", {rep.mom_error_coarse, rep.mom_error_fine}},
            {"rho_order", finite_or_null(rep.rho_order)},
            {"momentum_order", finite_or_null(rep.mom_order)}};
}

void write_json(const std::filesystem::path& path, const json& j)
{
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    f << j.dump(2) << '\n';
    if (!f) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

json read_json(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::io_error, "cannot read " + path.string());
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::vector<ConfigIssue>{{"", std::string("invalid JSON: ") + e.what()}});
    }
}

std::filesystem::path resolve_output_dir(const std::filesystem::path& requested)
{
    if (const char* env = std::getenv("PENAFLOW_OUT"); env && *env) return env;
    return requested;
}

OutputWriter::OutputWriter(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)), worker_([this] { loop(); }) {}

OutputWriter::~OutputWriter()
{
    {
        std::lock_guard lock(mutex_);
        closing_ = true;
    }
    changed_.notify_all();
    if (worker_.joinable()) worker_.join();
}

void OutputWriter::submit(std::function<void()> job)
{
    std::unique_lock lock(mutex_);
    changed_.wait(lock, [&] { return queue_.size() < capacity_ || closing_; });
    queue_.push_back(std::move(job));
    changed_.notify_all();
}

void OutputWriter::finish()
{
    std::unique_lock lock(mutex_);
    changed_.wait(lock, [&] { return queue_.empty() && !busy_; });
    if (failure_) {
        auto f = failure_;
        failure_ = nullptr;
        std::rethrow_exception(f);
    }
}

void OutputWriter::loop()
{
    std::unique_lock lock(mutex_);
    for (;;) {
        changed_.wait(lock, [&] { return !queue_.empty() || closing_; });
        if (queue_.empty()) return;
        auto job = std::move(queue_.front());
        queue_.pop_front();
        busy_ = true;
        lock.unlock();
        changed_.notify_all();
        try {
            job();
        } catch (...) {
            std::lock_guard g(mutex_);
            if (!failure_) failure_ = std::current_exception();
        }
        lock.lock();
        busy_ = false;
        changed_.notify_all();
    }
}

} // namespace penaflow
