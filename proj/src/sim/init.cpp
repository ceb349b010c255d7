#include "vagsim/sim/simulation.hpp"

#include "vagsim/common/errors.hpp"

#include <algorithm>
#include <cmath>

namespace vagsim {

namespace {

double profile_value(const Profile& p, double z, double z_top, double z_bottom)
{
    switch (p.kind) {
    case Profile::Kind::constant:
    case Profile::Kind::hydrostatic: return p.value;
    case Profile::Kind::linear: {
        const double h = z_top - z_bottom;
        const double w = h > 0.0 ? (z_top - z) / h : 0.0; // 0 at the top, 1 at the bottom
        return p.top + w * (p.bottom - p.top);
    }
    }
    return p.value;
}

int phase_index(const FluidModel& m, const std::string& name)
{
    for (int a = 0; a < m.num_phases(); ++a)
        if (name == m.phase_name(a)) return a;
    throw ConfigError(std::string("unknown phase '") + name + "' for model " + m.name());
}

/// Pressure along a vertical column from the top, integrating dP/dz = -ρ g
/// with trapezoidal steps and a fixed-point iteration on ρ(P, T) per step.
class HydrostaticColumn {
public:
    HydrostaticColumn(const FluidModel& m, const Scenario& sc, const CoatsState& phase_template, double z_top,
                      double z_bottom)
        : z_top_(z_top), dz_((z_top - z_bottom) / kSteps)
    {
        const double g = sc.fluid.gravity;
        p_.resize(kSteps + 1);
        p_[0] = sc.initial.pressure.value;
        auto rho = [&](double p, double z) {
            CoatsState x = phase_template;
            x.p = p;
            x.t = profile_value(sc.initial.temperature, z, z_top, z_bottom);
            const int a = x.present(0) ? 0 : 1;
            return m.rho(a, x.p, x.t, x.c[a]);
        };
        for (int k = 0; k < kSteps; ++k) {
            const double z0 = z_top - k * dz_, z1 = z0 - dz_;
            const double r0 = rho(p_[k], z0);
            double p1 = p_[k] + r0 * g * dz_;
            bool converged = false;
            for (int sweep = 0; sweep < 10; ++sweep) {
                const double next = p_[k] + 0.5 * (r0 + rho(p1, z1)) * g * dz_;
                const bool done = std::abs(next - p1) <= 1.0;
                p1 = next;
                if (done) {
                    converged = true;
                    break;
                }
            }
            if (!converged) throw ConfigError("hydrostatic initialization did not converge");
            p_[k + 1] = p1;
        }
    }

    double at(double z) const
    {
        if (dz_ <= 0.0) return p_[0];
        const double s = std::clamp((z_top_ - z) / dz_, 0.0, static_cast<double>(kSteps));
        const int k = std::min(static_cast<int>(s), kSteps - 1);
        const double w = s - k;
        return (1.0 - w) * p_[k] + w * p_[k + 1];
    }

private:
    static constexpr int kSteps = 400;
    double z_top_;
    double dz_;
    std::vector<double> p_;
};

} // namespace

CoatsState apply_state_spec(const FluidModel& m, CoatsState x, const StateSpec& spec)
{
    if (!spec.phases.empty()) {
        unsigned q = 0;
        for (const auto& name : spec.phases)
            q |= 1u << phase_index(m, name);
        x.q = q;
    }
    if (m.kind() == ModelKind::immiscible) x.q = 3u;
    if (!m.admissible(x.q)) throw ConfigError(std::string("phase set not admissible for model ") + m.name());
    if (spec.pressure) x.p = *spec.pressure;
    if (spec.temperature) x.t = *spec.temperature;

    // Saturations: explicit values first, the remainder to unspecified phases.
    std::array<bool, kMaxPhases> given{};
    double sum = 0.0;
    for (const auto& [name, value] : spec.saturation) {
        const int a = phase_index(m, name);
        if (!x.present(a)) {
            if (value != 0.0) throw ConfigError("saturation given for absent phase " + name);
            continue;
        }
        if (!(value >= 0.0 && value <= 1.0)) throw ConfigError("saturation of " + name + " outside [0, 1]");
        x.s[a] = value;
        given[a] = true;
        sum += value;
    }
    int open = 0;
    for (int a = 0; a < m.num_phases(); ++a)
        if (x.present(a) && !given[a]) ++open;
    for (int a = 0; a < m.num_phases(); ++a) {
        if (!x.present(a)) x.s[a] = 0.0;
        else if (!given[a]) x.s[a] = open ? std::max(0.0, 1.0 - sum) / open : 0.0;
    }
    if (open == 0 && std::abs(sum - 1.0) > 1e-12) throw ConfigError("saturations do not sum to one");

    x.c = {};
    x.n.fill(0.0);
    switch (m.kind()) {
    case ModelKind::immiscible:
        x.c[0] = {1.0, 0.0};
        x.c[1] = {0.0, 1.0};
        break;
    case ModelKind::blackoil: {
        double hc = spec.hc_fraction_in_water.value_or(0.0);
        if (x.q == 3u) hc = m.fugacity(1, 1, x.p, x.t, x.c[1]);
        if (!(hc >= 0.0 && hc <= 1.0)) throw ConfigError("hc_fraction_in_water outside [0, 1]");
        if (x.present(0)) x.c[0] = {1.0 - hc, hc};
        if (x.present(1)) x.c[1] = {0.0, 1.0};
        break;
    }
    case ModelKind::water:
        for (int a = 0; a < 2; ++a)
            if (x.present(a)) x.c[a][0] = 1.0;
        break;
    }
    return flash(m, normalized(m, x));
}

std::vector<Vec3> dof_positions(const Mesh& mesh, const DofNumbering& dofs)
{
    std::vector<Vec3> xyz(dofs.size());
    for (int k = 0; k < dofs.num_cells; ++k)
        xyz[dofs.cell(k)] = mesh.cells[k].center;
    for (int s = 0; s < dofs.num_nodes; ++s)
        xyz[dofs.node(s)] = mesh.nodes[s];
    for (int f = 0; f < dofs.num_fracture_faces; ++f)
        xyz[dofs.fracture_face(f)] = mesh.face_center(mesh.fracture_faces[f].face);
    return xyz;
}

std::vector<CoatsState> initial_state(const Scenario& sc, const FluidModel& m, const std::vector<Vec3>& xyz,
                                      double z_top, double z_bottom)
{
    // Phase recipe at a reference point; P and T are overwritten per dof.
    CoatsState base;
    base.q = m.kind() == ModelKind::immiscible ? 3u : 1u;
    base.p = sc.initial.pressure.kind == Profile::Kind::linear ? sc.initial.pressure.top : sc.initial.pressure.value;
    base.t = profile_value(sc.initial.temperature, z_top, z_top, z_bottom);
    StateSpec recipe = sc.initial.state;
    recipe.pressure.reset();
    recipe.temperature.reset();
    const CoatsState phase_template = apply_state_spec(m, base, recipe);

    std::optional<HydrostaticColumn> column;
    if (sc.initial.pressure.kind == Profile::Kind::hydrostatic)
        column.emplace(m, sc, phase_template, z_top, z_bottom);

    std::vector<CoatsState> x(xyz.size());
    for (std::size_t v = 0; v < xyz.size(); ++v) {
        const double z = xyz[v][2];
        CoatsState s = phase_template;
        s.p = column ? column->at(z) : profile_value(sc.initial.pressure, z, z_top, z_bottom);
        s.t = profile_value(sc.initial.temperature, z, z_top, z_bottom);
        x[v] = apply_state_spec(m, s, recipe);
    }
    return x;
}

BoundarySetup resolve_boundary(const Scenario& sc, const Mesh& mesh, const Connectivity& conn)
{
    const int nn = mesh.num_nodes();
    BoundarySetup b;
    b.dirichlet.assign(nn, 0);
    b.dirichlet_state.assign(nn, {});
    b.pinned.assign(nn, 0);
    b.pinned_temperature.assign(nn, 0.0);
    b.mass_rate.assign(nn, 0.0);
    if (nn == 0) return b;

    Vec3 lo = mesh.nodes[0], hi = mesh.nodes[0];
    for (const Vec3& x : mesh.nodes) {
        lo = lo.cwiseMin(x);
        hi = hi.cwiseMax(x);
    }
    const double tol = 1e-9 * (hi - lo).norm();

    auto on_side = [&](int s, BoxSide side) {
        const Vec3& x = mesh.nodes[s];
        switch (side) {
        case BoxSide::x_min: return std::abs(x[0] - lo[0]) <= tol;
        case BoxSide::x_max: return std::abs(x[0] - hi[0]) <= tol;
        case BoxSide::y_min: return std::abs(x[1] - lo[1]) <= tol;
        case BoxSide::y_max: return std::abs(x[1] - hi[1]) <= tol;
        case BoxSide::z_min: return std::abs(x[2] - lo[2]) <= tol;
        case BoxSide::z_max: return std::abs(x[2] - hi[2]) <= tol;
        }
        return false;
    };

    int index = 0;
    for (const BoundaryCondition& bc : sc.boundary) {
        std::vector<std::uint8_t> sel(nn, 0);
        int count = 0;
        for (int s = 0; s < nn; ++s) {
            if (!on_side(s, bc.side)) continue;
            const bool frac = conn.fracture_node[s] != 0;
            if (bc.on == BoundaryCondition::On::fracture && !frac) continue;
            if (bc.on == BoundaryCondition::On::matrix && frac) continue;
            sel[s] = 1;
            ++count;
        }
        const std::string where = "boundary[" + std::to_string(index++) + "]";
        if (count == 0) throw ConfigError(where + ": selects no node");

        switch (bc.type) {
        case BoundaryCondition::Type::dirichlet:
            for (int s = 0; s < nn; ++s)
                if (sel[s]) {
                    b.dirichlet[s] = 1;
                    b.dirichlet_state[s] = bc.state;
                    b.pinned[s] = 0;
                    b.mass_rate[s] = 0.0;
                }
            break;
        case BoundaryCondition::Type::temperature:
            for (int s = 0; s < nn; ++s)
                if (sel[s]) {
                    b.dirichlet[s] = 0;
                    b.pinned[s] = 1;
                    b.pinned_temperature[s] = bc.temperature;
                }
            break;
        case BoundaryCondition::Type::mass_rate: {
            // Weight of a node: half the length of each selected fracture-face
            // boundary edge touching it; plain nodes fall back to equal shares.
            std::vector<double> w(nn, 0.0);
            double total = 0.0;
            for (int f = 0; f < conn.num_fracture_faces(); ++f) {
                const auto nodes = conn.fracture_face_nodes[f];
                const int k = static_cast<int>(nodes.size());
                for (int i = 0; i < k; ++i) {
                    const int a = nodes[i], c = nodes[(i + 1) % k];
                    if (!sel[a] || !sel[c]) continue;
                    const double len = (mesh.nodes[a] - mesh.nodes[c]).norm();
                    w[a] += 0.5 * len;
                    w[c] += 0.5 * len;
                    total += len;
                }
            }
            if (!(total > 0.0)) {
                for (int s = 0; s < nn; ++s)
                    w[s] = sel[s] ? 1.0 : 0.0;
                total = count;
            }
            for (int s = 0; s < nn; ++s)
                if (sel[s]) {
                    if (b.dirichlet[s]) throw ConfigError(where + ": mass rate on a Dirichlet node");
                    b.mass_rate[s] += bc.rate * w[s] / total;
                }
            break;
        }
        }
    }
    return b;
}

} // namespace vagsim
