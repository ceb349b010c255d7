#pragma once

#include "vagsim/mesh/mesh.hpp"
#include "vagsim/sim/time_control.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vagsim {

struct MeshSource {
    enum class Kind { hex, tet, file };
    Kind kind = Kind::hex;
    BoxMeshSpec box;        // hex and tet generators
    std::filesystem::path file;
};

struct RockProperties {
    double perm_matrix = 1e-15;      // m^2
    double perm_fracture = 1e-11;    // m^2
    double porosity_matrix = 0.1;
    double porosity_fracture = 0.5;
    double conductivity = 2.0;       // W m^-1 K^-1
    double rock_heat_capacity = 1.6e6; // J m^-3 K^-1
    /// Share ω of a cell (or fracture face) volume given to each eligible node.
    double node_volume_fraction = 0.05;
};

struct FluidSpec {
    std::string model = "immiscible";
    double residual_water_saturation = 0.0;
    double gravity = 9.81; // m s^-2, acting along -z
};

/// Partial thermodynamic state; unset entries come from the initial profile.
struct StateSpec {
    std::vector<std::string> phases; // empty: keep the initial phase set
    std::optional<double> pressure;
    std::optional<double> temperature;
    std::map<std::string, double> saturation;
    std::optional<double> hc_fraction_in_water;
};

enum class BoxSide { x_min, x_max, y_min, y_max, z_min, z_max };
BoxSide box_side_from_string(const std::string& s);

struct BoundaryCondition {
    enum class Type { dirichlet, temperature, mass_rate };
    /// Node subset: every node of the side, or only fracture / non-fracture ones.
    enum class On { all, matrix, fracture };
    Type type = Type::dirichlet;
    BoxSide side = BoxSide::z_min;
    On on = On::all;
    StateSpec state;            // dirichlet
    double temperature = 0.0;   // temperature, K
    double rate = 0.0;          // mass_rate, kg/s over the whole selection
};

struct Profile {
    enum class Kind { constant, linear, hydrostatic };
    Kind kind = Kind::constant;
    double value = 0.0;  // constant; top value for hydrostatic
    double top = 0.0;    // linear
    double bottom = 0.0; // linear
};

struct InitialSpec {
    Profile pressure;
    Profile temperature{Profile::Kind::constant, 293.0, 0.0, 0.0};
    StateSpec state;
};

struct SolverControls {
    double newton_tolerance = 1e-5;
    int newton_max_iterations = 35;
    double gmres_tolerance = 1e-4;
    int gmres_max_iterations = 150;
    int gmres_restart = 150;
    enum class Preconditioner { cpr, ilu } preconditioner = Preconditioner::cpr;
    /// Cap on saturation change and relative P, T change per Newton iteration.
    double max_change = 0.2;

    void validate() const;
};

struct OutputSpec {
    std::filesystem::path directory;
    std::vector<double> times; // seconds
    bool fields = true;
};

struct Scenario {
    std::string name;
    MeshSource mesh;
    RockProperties rock;
    FluidSpec fluid;
    std::vector<BoundaryCondition> boundary;
    InitialSpec initial;
    TimeControls time;
    SolverControls solver;
    OutputSpec output;
    int ranks = 1;
};

inline constexpr double kSecondsPerDay = 86400.0;

/// Parse a JSON scenario; throws ConfigError naming the offending key.
Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// Multiply the generated mesh resolution by s (at least two cells per axis).
void apply_scale(Scenario& sc, double s);

} // namespace vagsim
