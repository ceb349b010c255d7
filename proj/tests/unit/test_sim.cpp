#include "vagsim/common/errors.hpp"
#include "vagsim/sim/simulation.hpp"

#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vagsim;
using Json = nlohmann::json;

namespace {

Json tiny_scenario(const std::string& model)
{
    const bool water = model == "water_nonisothermal";
    Json j = {
        {"name", "tiny"},
        {"mesh",
         {{"generator", "hex"},
          {"cells", {3, 3, 3}},
          {"extent_m", {30, 30, 30}},
          {"fractures", Json::array({{{"axis", "x"}, {"position_m", 10}, {"lo_m", {0, 0}}, {"hi_m", {30, 30}},
                                      {"width_m", 0.01}}})}}},
        {"rock", {{"perm_matrix_m2", 1e-14}, {"perm_fracture_m2", 1e-11}}},
        {"fluid", {{"model", model}}},
        {"initial",
         {{"pressure", {{"profile", "hydrostatic"}, {"top_pa", water ? 1e5 : 1e6}}},
          {"temperature", {{"profile", "constant"}, {"value_k", 300}}},
          {"state", {{"phases", water ? Json{"liquid"} : Json{"water", "oil"}}}}}},
        {"time",
         {{"final_days", 200},
          {"dt_init_days", 1},
          {"intervals", Json::array({{{"until_days", 200}, {"dt_max_days", 50}}})}}},
        {"output", {{"times_days", Json::array()}}},
    };
    if (water) {
        j["boundary"] = Json::array({{{"type", "temperature"}, {"side", "bottom"}, {"temperature_k", 380}},
                                     {{"type", "dirichlet"},
                                      {"side", "top"},
                                      {"state", {{"phases", {"liquid"}}, {"pressure_pa", 1e5}, {"temperature_k", 300}}}}});
    } else {
        j["initial"]["state"]["saturation"] = {{"water", 0.7}};
        j["boundary"] = Json::array(
            {{{"type", "dirichlet"}, {"side", "bottom"}, {"state", {{"phases", {"water", "oil"}}, {"saturation", {{"oil", 0.9}}}}}}});
    }
    return j;
}

Scenario parse(const Json& j) { return parse_scenario(j.dump()); }

std::string config_error(const Json& j)
{
    try {
        (void)parse(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_SUITE("sim")
{
    TEST_CASE("scenario parsing converts units and rejects bad keys")
    {
        const Scenario sc = parse(tiny_scenario("blackoil"));
        CHECK(sc.name == "tiny");
        CHECK(sc.time.final_time == 200 * kSecondsPerDay);
        CHECK(sc.time.dt_init == kSecondsPerDay);
        CHECK(sc.time.schedule.size() == 1);
        CHECK(sc.mesh.box.fractures.size() == 1);

        Json j = tiny_scenario("blackoil");
        j["rock"]["perm_matrix"] = 1.0;
        CHECK(config_error(j).find("perm_matrix: unknown key") != std::string::npos);

        j = tiny_scenario("blackoil");
        j["time"].erase("dt_init_days");
        CHECK(config_error(j).find("dt_init_days: missing") != std::string::npos);

        j = tiny_scenario("blackoil");
        j["fluid"]["model"] = "steam";
        CHECK(config_error(j).find("config.fluid.model") != std::string::npos);

        j = tiny_scenario("blackoil");
        j["time"]["intervals"][0]["until_days"] = 100;
        CHECK_FALSE(config_error(j).empty());

        CHECK_THROWS_AS(parse_scenario("{ not json"), ConfigError);
        CHECK_THROWS_AS(load_scenario("/nonexistent/file.json"), ConfigError);
    }

    TEST_CASE("shipped scenarios parse")
    {
        for (const auto& entry : std::filesystem::directory_iterator(VAGSIM_SCENARIO_DIR)) {
            CAPTURE(entry.path().string());
            CHECK_NOTHROW(load_scenario(entry.path()));
        }
    }

    TEST_CASE("time controls validation and step arithmetic")
    {
        TimeControls c;
        c.dt_init = 1.0;
        c.final_time = 100.0;
        c.schedule = {{10.0, 2.0}, {100.0, 7.0}};
        CHECK_NOTHROW(c.validate());
        CHECK(c.cap_at(0.0) == 2.0);
        // A step starting on an interval end belongs to the next interval.
        CHECK(c.cap_at(9.99) == 2.0);
        CHECK(c.cap_at(10.0) == 7.0);
        CHECK(c.cap_at(10.5) == 7.0);
        CHECK(c.next_breakpoint(3.0) == 10.0);
        CHECK(c.next_breakpoint(10.0) == 100.0);

        CHECK(next_time_step(1.0, 2.0, true) == 1.2);
        CHECK(next_time_step(1.9, 2.0, true) == 2.0);
        CHECK(next_time_step(1.0, 2.0, false) == 0.5);

        TimeControls bad = c;
        bad.schedule = {{10.0, 2.0}, {90.0, 7.0}};
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = c;
        bad.dt_init = 0.0;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = c;
        bad.schedule = {{50.0, 2.0}, {20.0, 1.0}, {100.0, 7.0}};
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }

    TEST_CASE("time controller lands on interval ends and enforces the floor")
    {
        TimeControls c;
        c.dt_init = 3.0;
        c.final_time = 20.0;
        c.schedule = {{10.0, 4.0}, {20.0, 8.0}};
        TimeController tc(c);
        std::vector<double> times;
        while (!tc.finished()) {
            tc.accept();
            times.push_back(tc.time());
        }
        CHECK(std::find(times.begin(), times.end(), 10.0) != times.end());
        CHECK(times.back() == 20.0);

        TimeController fail(c);
        CHECK_THROWS_AS(
            [&] {
                for (int i = 0; i < 100; ++i)
                    fail.reject();
            }(),
            SolverError);
    }

    TEST_CASE("hydrostatic initial pressure matches the closed form")
    {
        Json j = tiny_scenario("water_nonisothermal");
        const Scenario sc = parse(j);
        const FluidModel m = FluidModel::water();
        std::vector<Vec3> xyz;
        for (double z : {0.0, 7.5, 15.0, 29.0, 30.0})
            xyz.emplace_back(1.0, 2.0, z);
        const auto x = initial_state(sc, m, xyz, 30.0, 0.0);
        // Liquid density is pressure independent: P = P_top + ρ g (z_top - z).
        const double rho = m.rho(0, 1e5, 300.0, std::array<double, 2>{1.0, 0.0});
        for (std::size_t i = 0; i < xyz.size(); ++i) {
            CHECK(x[i].p == doctest::Approx(1e5 + rho * 9.81 * (30.0 - xyz[i].z())).epsilon(1e-10));
            CHECK(x[i].t == 300.0);
            CHECK(x[i].q == 1u);
        }
    }

    TEST_CASE("state specs overlay phases, saturations and fractions")
    {
        const FluidModel m = FluidModel::blackoil();
        CoatsState base;
        base.q = 1u;
        base.p = 1.5e6;
        base.s = {1.0, 0.0};
        base.c[0] = {1.0, 0.0};
        StateSpec spec;
        spec.phases = {"water", "oil"};
        spec.saturation = {{"oil", 0.3}};
        const CoatsState two = apply_state_spec(m, base, spec);
        CHECK(two.q == 3u);
        CHECK(two.s[1] == doctest::Approx(0.3));
        CHECK(two.s[0] == doctest::Approx(0.7));
        // Two-phase states start at equilibrium composition.
        CHECK(two.c[0][1] == doctest::Approx(m.fugacity(1, 1, 1.5e6, 300.0, two.c[1])));

        StateSpec p;
        p.pressure = 2e6;
        p.hc_fraction_in_water = 0.001;
        const CoatsState w = apply_state_spec(m, base, p);
        CHECK(w.p == 2e6);
        CHECK(w.q == 1u);
        CHECK(w.c[0][1] == doctest::Approx(0.001));
    }

    TEST_CASE("mass-rate boundary distributes the whole rate")
    {
        Json j = tiny_scenario("water_nonisothermal");
        j["boundary"].push_back({{"type", "mass_rate"}, {"side", "bottom"}, {"on", "fracture"}, {"rate_kg_per_s", 100.0}});
        const Scenario sc = parse(j);
        const Mesh mesh = build_cartesian_hex_mesh(sc.mesh.box);
        const Connectivity conn = build_connectivity(mesh);
        const BoundarySetup b = resolve_boundary(sc, mesh, conn);
        double total = 0.0;
        for (int s = 0; s < mesh.num_nodes(); ++s) {
            if (b.mass_rate[s] != 0.0) {
                CHECK(conn.fracture_node[s]);
                CHECK(mesh.nodes[s].z() == 0.0);
            }
            total += b.mass_rate[s];
        }
        CHECK(total == doctest::Approx(100.0).epsilon(1e-14));
        int pinned = 0, dirichlet = 0;
        for (int s = 0; s < mesh.num_nodes(); ++s) {
            pinned += b.pinned[s];
            dirichlet += b.dirichlet[s];
        }
        CHECK(pinned == 16);
        CHECK(dirichlet == 16);
    }

    TEST_CASE("runs are deterministic and rank invariant")
    {
        Scenario sc = parse(tiny_scenario("blackoil"));
        Simulation a(sc), b(sc);
        const RunReport ra = a.run(), rb = b.run();
        REQUIRE(ra.completed);
        CHECK(ra.to_json() == rb.to_json());
        const auto xa = a.state(), xb = b.state();
        bool same = true;
        for (std::size_t v = 0; v < xa.size(); ++v)
            same = same && xa[v].q == xb[v].q && xa[v].p == xb[v].p && xa[v].s == xb[v].s && xa[v].c == xb[v].c;
        CHECK(same);

        sc.ranks = 3;
        Simulation c(sc);
        const RunReport rc = c.run();
        CHECK(rc.time_steps == ra.time_steps);
        const auto xc = c.state();
        double diff = 0.0;
        for (std::size_t v = 0; v < xa.size(); ++v)
            diff = std::max(diff, std::abs(xa[v].p - xc[v].p) / xa[v].p);
        CHECK(diff <= 1e-8);
    }

    TEST_CASE("black oil run conserves mass step by step")
    {
        const Scenario sc = parse(tiny_scenario("blackoil"));
        Simulation sim(sc);
        const RunReport r = sim.run();
        REQUIRE(r.completed);
        CHECK(r.final_time == doctest::Approx(sc.time.final_time));
        for (const StepBalance& b : sim.balances())
            for (int e = 0; e < kNumEquations; ++e)
                CHECK(std::abs(b.imbalance[e]) <= 1e-6 * std::abs(b.total[e]));
    }

    TEST_CASE("thermal run writes fields, balances and the report")
    {
        Json j = tiny_scenario("water_nonisothermal");
        const auto dir = std::filesystem::temp_directory_path() / "vagsim_unit_output";
        std::filesystem::remove_all(dir);
        j["output"]["times_days"] = {100, 200};
        Scenario sc = parse(j);
        sc.output.directory = dir;
        Simulation sim(sc);
        const RunReport r = sim.run();
        REQUIRE(r.completed);
        CHECK(std::filesystem::exists(dir / "tiny_cells.pvd"));
        CHECK(std::filesystem::exists(dir / "tiny_fractures.pvd"));
        CHECK(std::filesystem::exists(dir / "tiny_balance.csv"));
        CHECK(std::filesystem::exists(dir / "tiny_report.json"));
        const auto frac = dir / "tiny_1_fractures.vtu";
        REQUIRE(std::filesystem::exists(frac));
        std::ifstream in(frac);
        std::stringstream ss;
        ss << in.rdbuf();
        const std::string expect = "NumberOfCells=\"" + std::to_string(sim.mesh().num_fracture_faces()) + "\"";
        CHECK(ss.str().find(expect) != std::string::npos);

        const Json report = Json::parse(std::ifstream(dir / "tiny_report.json"));
        CHECK(report.contains("N_newton_per_timestep"));
        std::filesystem::remove_all(dir);
    }
}
