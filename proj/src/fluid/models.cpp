#include "vagsim/fluid/fluid.hpp"

#include <cmath>

namespace vagsim {

double tsat(double p)
{
    if (!(p > 0.0)) throw DomainError("tsat: pressure must be positive");
    return 1.0 / (1.0 / 373.15 - std::log(p / 1.013e5) / 4892.0);
}

FluidModel FluidModel::immiscible() { return FluidModel(ModelKind::immiscible); }
FluidModel FluidModel::blackoil() { return FluidModel(ModelKind::blackoil); }
FluidModel FluidModel::water() { return FluidModel(ModelKind::water); }

FluidModel FluidModel::from_name(const std::string& name)
{
    if (name == "immiscible") return immiscible();
    if (name == "blackoil") return blackoil();
    if (name == "water_nonisothermal") return water();
    throw ConfigError("unknown fluid model '" + name + "'");
}

const char* FluidModel::name() const
{
    switch (kind_) {
    case ModelKind::immiscible: return "immiscible";
    case ModelKind::blackoil: return "blackoil";
    case ModelKind::water: return "water_nonisothermal";
    }
    return "";
}

bool FluidModel::contains(int a, int i) const
{
    switch (kind_) {
    case ModelKind::immiscible: return a == i;
    case ModelKind::blackoil: return a == 0 || i == 1;
    case ModelKind::water: return i == 0;
    }
    return false;
}

const char* FluidModel::phase_name(int a) const
{
    if (kind_ == ModelKind::water) return a == 0 ? "liquid" : "gas";
    return a == 0 ? "water" : "oil";
}

const char* FluidModel::component_name(int i) const
{
    if (kind_ == ModelKind::water) return "H2O";
    return i == 0 ? "H2O" : "HC";
}

bool FluidModel::admissible(unsigned q) const
{
    if (kind_ == ModelKind::immiscible) return q == 3u;
    return q >= 1u && q <= 3u;
}

double get_var(const CoatsState& x, const Var& v)
{
    switch (v.kind) {
    case VarKind::pressure: return x.p;
    case VarKind::temperature: return x.t;
    case VarKind::saturation: return x.s[v.phase];
    case VarKind::fraction: return x.c[v.phase][v.comp];
    case VarKind::moles: return x.n[v.comp];
    }
    return 0.0;
}

void set_var(CoatsState& x, const Var& v, double value)
{
    switch (v.kind) {
    case VarKind::pressure: x.p = value; break;
    case VarKind::temperature: x.t = value; break;
    case VarKind::saturation: x.s[v.phase] = value; break;
    case VarKind::fraction: x.c[v.phase][v.comp] = value; break;
    case VarKind::moles: x.n[v.comp] = value; break;
    }
}

namespace {

UnknownLayout build_layout(const FluidModel& m, unsigned q)
{
    UnknownLayout l;
    auto add = [&](VarKind k, int a, int i) {
        l.vars[l.num_unknowns++] = Var{k, static_cast<std::int8_t>(a), static_cast<std::int8_t>(i)};
    };
    add(VarKind::pressure, -1, -1);
    if (m.thermal()) add(VarKind::temperature, -1, -1);
    for (int a = 0; a < m.num_phases(); ++a)
        if ((q >> a) & 1u) add(VarKind::saturation, a, -1);
    for (int a = 0; a < m.num_phases(); ++a)
        if ((q >> a) & 1u)
            for (int i = 0; i < m.num_components(); ++i)
                if (m.contains(a, i)) add(VarKind::fraction, a, i);
    for (int i = 0; i < m.num_components(); ++i) {
        bool carried = false;
        for (int a = 0; a < m.num_phases(); ++a)
            carried = carried || (((q >> a) & 1u) && m.contains(a, i));
        if (!carried) add(VarKind::moles, -1, i);
    }

    auto find = [&](VarKind k, int a, int i) {
        for (int j = 0; j < l.num_unknowns; ++j)
            if (l.vars[j].kind == k && l.vars[j].phase == a && l.vars[j].comp == i) return j;
        throw ConfigError("internal: unknown not in layout");
    };
    // The second primary completes P (and T when thermal) to #equations.
    int second = -1;
    switch (m.kind()) {
    case ModelKind::immiscible: second = find(VarKind::saturation, 1, -1); break;
    case ModelKind::blackoil:
        if (q == 1u) second = find(VarKind::fraction, 0, 1);
        else if (q == 2u) second = find(VarKind::moles, -1, 0);
        else second = find(VarKind::saturation, 1, -1);
        break;
    case ModelKind::water:
        second = q == 3u ? find(VarKind::saturation, 1, -1) : find(VarKind::temperature, -1, -1);
        break;
    }
    l.num_primary = kNumEquations;
    l.primary = {0, second};
    for (int j = 0; j < l.num_unknowns; ++j)
        if (j != 0 && j != second) l.secondary[l.num_secondary++] = j;
    return l;
}

} // namespace

const UnknownLayout& select_unknown_split(const FluidModel& m, unsigned q)
{
    if (!m.admissible(q))
        throw ConfigError(std::string(m.name()) + ": phase set " + std::to_string(q) + " is not admissible");
    static const auto tables = [] {
        std::array<std::array<UnknownLayout, 4>, 3> t{};
        const FluidModel models[3] = {FluidModel::immiscible(), FluidModel::blackoil(), FluidModel::water()};
        for (int k = 0; k < 3; ++k)
            for (unsigned q = 1; q <= 3; ++q)
                if (models[k].admissible(q)) t[k][q] = build_layout(models[k], q);
        return t;
    }();
    return tables[static_cast<int>(m.kind())][q];
}

CoatsState normalized(const FluidModel& m, CoatsState x)
{
    for (int a = 0; a < kMaxPhases; ++a) {
        if (x.present(a) && a < m.num_phases()) continue;
        x.s[a] = 0.0;
        x.c[a].fill(0.0);
    }
    for (int i = 0; i < kMaxComponents; ++i) {
        bool carried = false;
        for (int a = 0; a < m.num_phases(); ++a)
            carried = carried || (x.present(a) && i < m.num_components() && m.contains(a, i));
        if (carried || i >= m.num_components()) x.n[i] = 0.0;
    }
    return x;
}

} // namespace vagsim
