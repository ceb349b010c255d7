#include "vagsim/sim/scenario.hpp"

#include "vagsim/common/errors.hpp"
#include "vagsim/fluid/fluid.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace vagsim {

namespace {

using Json = nlohmann::json;

/// Typed access to one JSON object; rejects keys that are never read.
class Section {
public:
    Section(const Json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <class T>
    T get(const std::string& key) const
    {
        seen_.insert(key);
        if (!j_.contains(key)) throw ConfigError(path_ + "." + key + ": missing");
        try {
            return j_.at(key).get<T>();
        } catch (const Json::exception& e) {
            throw ConfigError(path_ + "." + key + ": " + e.what());
        }
    }

    template <class T>
    T get(const std::string& key, const T& fallback) const
    {
        return has(key) ? get<T>(key) : (seen_.insert(key), fallback);
    }

    Section child(const std::string& key) const
    {
        seen_.insert(key);
        if (!j_.contains(key)) throw ConfigError(path_ + "." + key + ": missing");
        return Section(j_.at(key), path_ + "." + key);
    }

    const Json& raw(const std::string& key) const
    {
        seen_.insert(key);
        return j_.at(key);
    }

    const std::string& path() const { return path_; }

    void finish() const
    {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError(path_ + "." + k + ": unknown key");
    }

private:
    const Json& j_;
    std::string path_;
    mutable std::set<std::string> seen_;
};

int axis_from_string(const std::string& s, const std::string& where)
{
    if (s == "x") return 0;
    if (s == "y") return 1;
    if (s == "z") return 2;
    throw ConfigError(where + ": axis must be x, y or z");
}

MeshSource parse_mesh(const Section& s, const std::filesystem::path& base)
{
    MeshSource m;
    const std::string gen = s.get<std::string>("generator");
    if (gen == "file") {
        m.kind = MeshSource::Kind::file;
        m.file = s.get<std::string>("file");
        if (m.file.is_relative()) m.file = base / m.file;
        s.finish();
        return m;
    }
    if (gen == "hex") m.kind = MeshSource::Kind::hex;
    else if (gen == "tet") m.kind = MeshSource::Kind::tet;
    else throw ConfigError(s.path() + ".generator: expected hex, tet or file");

    const auto cells = s.get<std::vector<int>>("cells");
    const auto extent = s.get<std::vector<double>>("extent_m");
    if (cells.size() != 3 || extent.size() != 3) throw ConfigError(s.path() + ": cells and extent_m need 3 entries");
    for (int a = 0; a < 3; ++a) {
        m.box.cells_per_axis[a] = cells[a];
        m.box.extent[a] = extent[a];
    }
    if (s.has("grading")) m.box.grading = s.get<double>("grading");
    if (s.has("fractures")) {
        const Json& list = s.raw("fractures");
        if (!list.is_array()) throw ConfigError(s.path() + ".fractures: expected an array");
        int id = 0;
        for (const Json& f : list) {
            Section fs(f, s.path() + ".fractures[" + std::to_string(id) + "]");
            FractureRect r;
            r.id = id++;
            r.axis = axis_from_string(fs.get<std::string>("axis"), fs.path());
            r.position = fs.get<double>("position_m");
            const auto lo = fs.get<std::vector<double>>("lo_m");
            const auto hi = fs.get<std::vector<double>>("hi_m");
            if (lo.size() != 2 || hi.size() != 2) throw ConfigError(fs.path() + ": lo_m and hi_m need 2 entries");
            r.lo = {lo[0], lo[1]};
            r.hi = {hi[0], hi[1]};
            r.width = fs.get<double>("width_m");
            fs.finish();
            m.box.fractures.push_back(r);
        }
    }
    s.finish();
    return m;
}

StateSpec parse_state(const Section& s)
{
    StateSpec st;
    st.phases = s.get<std::vector<std::string>>("phases", {});
    if (s.has("pressure_pa")) st.pressure = s.get<double>("pressure_pa");
    if (s.has("temperature_k")) st.temperature = s.get<double>("temperature_k");
    if (s.has("saturation")) st.saturation = s.get<std::map<std::string, double>>("saturation");
    if (s.has("hc_fraction_in_water")) st.hc_fraction_in_water = s.get<double>("hc_fraction_in_water");
    s.finish();
    return st;
}

Profile parse_profile(const Section& s, const std::string& unit)
{
    Profile p;
    const std::string kind = s.get<std::string>("profile");
    if (kind == "constant") {
        p.kind = Profile::Kind::constant;
        p.value = s.get<double>("value_" + unit);
    } else if (kind == "linear") {
        p.kind = Profile::Kind::linear;
        p.top = s.get<double>("top_" + unit);
        p.bottom = s.get<double>("bottom_" + unit);
    } else if (kind == "hydrostatic" && unit == "pa") {
        p.kind = Profile::Kind::hydrostatic;
        p.value = s.get<double>("top_pa");
    } else {
        throw ConfigError(s.path() + ".profile: unsupported profile '" + kind + "'");
    }
    s.finish();
    return p;
}

BoundaryCondition parse_boundary(const Section& s)
{
    BoundaryCondition bc;
    const std::string type = s.get<std::string>("type");
    bc.side = box_side_from_string(s.get<std::string>("side"));
    const std::string on = s.get<std::string>("on", "all");
    if (on == "all") bc.on = BoundaryCondition::On::all;
    else if (on == "matrix") bc.on = BoundaryCondition::On::matrix;
    else if (on == "fracture") bc.on = BoundaryCondition::On::fracture;
    else throw ConfigError(s.path() + ".on: expected all, matrix or fracture");
    if (type == "dirichlet") {
        bc.type = BoundaryCondition::Type::dirichlet;
        if (s.has("state")) bc.state = parse_state(s.child("state"));
    } else if (type == "temperature") {
        bc.type = BoundaryCondition::Type::temperature;
        bc.temperature = s.get<double>("temperature_k");
    } else if (type == "mass_rate") {
        bc.type = BoundaryCondition::Type::mass_rate;
        bc.rate = s.get<double>("rate_kg_per_s");
    } else {
        throw ConfigError(s.path() + ".type: expected dirichlet, temperature or mass_rate");
    }
    s.finish();
    return bc;
}

TimeControls parse_time(const Section& s)
{
    TimeControls t;
    t.final_time = s.get<double>("final_days") * kSecondsPerDay;
    t.dt_init = s.get<double>("dt_init_days") * kSecondsPerDay;
    t.growth = s.get<double>("growth", 1.2);
    const Json& list = s.raw("intervals");
    if (!list.is_array()) throw ConfigError(s.path() + ".intervals: expected an array");
    int k = 0;
    for (const Json& iv : list) {
        Section is(iv, s.path() + ".intervals[" + std::to_string(k++) + "]");
        t.schedule.push_back({is.get<double>("until_days") * kSecondsPerDay, is.get<double>("dt_max_days") * kSecondsPerDay});
        is.finish();
    }
    s.finish();
    try {
        t.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(s.path() + ": " + e.what());
    }
    return t;
}

SolverControls parse_solver(const Section& s)
{
    SolverControls c;
    c.newton_tolerance = s.get<double>("newton_tolerance", c.newton_tolerance);
    c.newton_max_iterations = s.get<int>("newton_max_iterations", c.newton_max_iterations);
    c.gmres_tolerance = s.get<double>("gmres_tolerance", c.gmres_tolerance);
    c.gmres_max_iterations = s.get<int>("gmres_max_iterations", c.gmres_max_iterations);
    c.gmres_restart = s.get<int>("gmres_restart", c.gmres_max_iterations);
    const std::string pc = s.get<std::string>("preconditioner", "cpr");
    if (pc == "cpr") c.preconditioner = SolverControls::Preconditioner::cpr;
    else if (pc == "ilu") c.preconditioner = SolverControls::Preconditioner::ilu;
    else throw ConfigError(s.path() + ".preconditioner: expected cpr or ilu");
    c.max_change = s.get<double>("max_change", c.max_change);
    s.finish();
    c.validate();
    return c;
}

} // namespace

BoxSide box_side_from_string(const std::string& s)
{
    if (s == "x_min") return BoxSide::x_min;
    if (s == "x_max") return BoxSide::x_max;
    if (s == "y_min") return BoxSide::y_min;
    if (s == "y_max") return BoxSide::y_max;
    if (s == "z_min" || s == "bottom") return BoxSide::z_min;
    if (s == "z_max" || s == "top") return BoxSide::z_max;
    throw ConfigError("unknown box side '" + s + "'");
}

void SolverControls::validate() const
{
    if (!(newton_tolerance > 0.0 && newton_tolerance < 1.0)) throw ConfigError("solver.newton_tolerance must lie in (0, 1)");
    if (!(gmres_tolerance > 0.0 && gmres_tolerance < 1.0)) throw ConfigError("solver.gmres_tolerance must lie in (0, 1)");
    if (newton_max_iterations < 1) throw ConfigError("solver.newton_max_iterations must be at least 1");
    if (gmres_max_iterations < 1) throw ConfigError("solver.gmres_max_iterations must be at least 1");
    if (gmres_restart < 1) throw ConfigError("solver.gmres_restart must be at least 1");
    if (!(max_change > 0.0)) throw ConfigError("solver.max_change must be positive");
}

Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir)
{
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    Section root(j, "config");
    Scenario sc;
    sc.name = root.get<std::string>("name", "scenario");
    sc.ranks = root.get<int>("ranks", 1);
    if (sc.ranks < 1) throw ConfigError("config.ranks must be at least 1");

    sc.mesh = parse_mesh(root.child("mesh"), base_dir);

    if (root.has("rock")) {
        const Section r = root.child("rock");
        RockProperties& k = sc.rock;
        k.perm_matrix = r.get<double>("perm_matrix_m2", k.perm_matrix);
        k.perm_fracture = r.get<double>("perm_fracture_m2", k.perm_fracture);
        k.porosity_matrix = r.get<double>("porosity_matrix", k.porosity_matrix);
        k.porosity_fracture = r.get<double>("porosity_fracture", k.porosity_fracture);
        k.conductivity = r.get<double>("conductivity_w_per_m_k", k.conductivity);
        k.rock_heat_capacity = r.get<double>("rock_heat_capacity_j_per_m3_k", k.rock_heat_capacity);
        k.node_volume_fraction = r.get<double>("node_volume_fraction", k.node_volume_fraction);
        r.finish();
        if (!(k.perm_matrix >= 0.0 && k.perm_fracture >= 0.0)) throw ConfigError("rock: permeabilities must be >= 0");
        if (!(k.porosity_matrix > 0.0 && k.porosity_matrix <= 1.0 && k.porosity_fracture > 0.0 &&
              k.porosity_fracture <= 1.0))
            throw ConfigError("rock: porosities must lie in (0, 1]");
    }

    if (root.has("fluid")) {
        const Section f = root.child("fluid");
        sc.fluid.model = f.get<std::string>("model", sc.fluid.model);
        sc.fluid.residual_water_saturation = f.get<double>("residual_water_saturation", 0.0);
        sc.fluid.gravity = f.get<double>("gravity_m_per_s2", sc.fluid.gravity);
        f.finish();
        try {
            (void)FluidModel::from_name(sc.fluid.model);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("config.fluid.model: ") + e.what());
        }
        if (!(sc.fluid.residual_water_saturation >= 0.0 && sc.fluid.residual_water_saturation < 1.0))
            throw ConfigError("fluid.residual_water_saturation must lie in [0, 1)");
    }

    if (root.has("boundary")) {
        const Json& list = root.raw("boundary");
        if (!list.is_array()) throw ConfigError("config.boundary: expected an array");
        int k = 0;
        for (const Json& b : list)
            sc.boundary.push_back(parse_boundary(Section(b, "config.boundary[" + std::to_string(k++) + "]")));
    }

    {
        const Section in = root.child("initial");
        sc.initial.pressure = parse_profile(in.child("pressure"), "pa");
        if (in.has("temperature")) sc.initial.temperature = parse_profile(in.child("temperature"), "k");
        if (in.has("state")) sc.initial.state = parse_state(in.child("state"));
        in.finish();
    }

    sc.time = parse_time(root.child("time"));
    if (root.has("solver")) sc.solver = parse_solver(root.child("solver"));

    if (root.has("output")) {
        const Section o = root.child("output");
        sc.output.directory = o.get<std::string>("directory", "");
        for (double d : o.get<std::vector<double>>("times_days", {}))
            sc.output.times.push_back(d * kSecondsPerDay);
        sc.output.fields = o.get<bool>("fields", true);
        o.finish();
    }
    root.finish();
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path.parent_path());
}

void apply_scale(Scenario& sc, double s)
{
    if (!(s > 0.0)) throw ConfigError("scale must be positive");
    if (sc.mesh.kind == MeshSource::Kind::file) return;
    for (int& n : sc.mesh.box.cells_per_axis)
        n = std::max(2, static_cast<int>(std::lround(n * s)));
}

} // namespace vagsim
