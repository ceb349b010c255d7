#pragma once

#include "vagsim/common/dual.hpp"
#include "vagsim/common/errors.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

namespace vagsim {

inline constexpr int kMaxPhases = 2;
inline constexpr int kMaxComponents = 2;
/// Natural unknowns per dof: P, T, two saturations, two molar fractions.
inline constexpr int kMaxUnknowns = 6;
/// Conservation equations per dof, identical for the three shipped models.
inline constexpr int kNumEquations = 2;

inline constexpr double kGasConstant = 8.314;
inline constexpr double kWaterMolarMass = 0.018;

enum class ModelKind : std::uint8_t { immiscible, blackoil, water };

/// Natural variables of one dof. Entries of absent phases are zero; C[a][i]
/// is zero when component i is not part of phase a.
template <class S>
struct NaturalState {
    unsigned q = 0; // bit a set <=> phase a present
    S p{};
    S t{};
    std::array<S, kMaxPhases> s{};
    std::array<std::array<S, kMaxComponents>, kMaxPhases> c{};
    std::array<S, kMaxComponents> n{};

    bool present(int a) const { return (q >> a) & 1u; }
};

using CoatsState = NaturalState<double>;

/// Clausius-Clapeyron saturation pressure of water, valid on [273, 650] K.
template <class S>
S psat(const S& t)
{
    using std::exp;
    if (!(value(t) >= 273.0 && value(t) <= 650.0))
        throw DomainError("psat: temperature " + std::to_string(value(t)) + " K outside [273, 650]");
    return 1.013e5 * exp(4892.0 * (1.0 / 373.15 - 1.0 / t));
}

/// Inverse of psat.
double tsat(double p);

class FluidModel {
public:
    static FluidModel immiscible();
    static FluidModel blackoil();
    static FluidModel water();
    /// "immiscible", "blackoil" or "water_nonisothermal"; ConfigError otherwise.
    static FluidModel from_name(const std::string& name);

    ModelKind kind() const { return kind_; }
    const char* name() const;
    int num_phases() const { return 2; }
    int num_components() const { return kind_ == ModelKind::water ? 1 : 2; }
    bool thermal() const { return kind_ == ModelKind::water; }
    /// i ∈ C^α
    bool contains(int a, int i) const;
    const char* phase_name(int a) const;
    const char* component_name(int i) const;
    /// Present-phase sets the model may visit.
    bool admissible(unsigned q) const;

    /// Corey residual saturations per phase; zero by default.
    std::array<double, kMaxPhases> residual_saturation{0.0, 0.0};
    /// Volumetric rock heat capacity, J m^-3 K^-1.
    double rock_heat_capacity = 1.6e6;

    template <class S>
    S zeta(int a, const S& p, const S& t, const std::array<S, kMaxComponents>& c) const
    {
        check_state(p, t);
        if (kind_ != ModelKind::water) return rho(a, p, t, c);
        if (a == 0) return rho(a, p, t, c) / kWaterMolarMass;
        return p / (kGasConstant * t);
    }

    template <class S>
    S rho(int a, const S& p, const S& t, const std::array<S, kMaxComponents>& c) const
    {
        switch (kind_) {
        case ModelKind::immiscible: return S(a == 0 ? 1000.0 : 700.0);
        case ModelKind::blackoil: return a == 0 ? 990.0 * (1.0 + c[1]) : S(700.0);
        case ModelKind::water:
            if (a == 0) return 1000.0 * (1.0 - 5e-4 * (t - 293.0));
            return p * kWaterMolarMass / (kGasConstant * t);
        }
        return S(0.0);
    }

    template <class S>
    S mu(int a, const S& p, const S& t, const std::array<S, kMaxComponents>& c) const
    {
        using std::exp;
        if (kind_ != ModelKind::water) return S(a == 0 ? 1e-3 : 5e-3);
        if (a == 1) return S(2e-5);
        const S m = 1e-3 * exp(-0.02 * (t - 293.0));
        return value(m) < 1e-4 ? S(1e-4) : m;
    }

    /// Molar enthalpy, J/mol; zero for isothermal models.
    template <class S>
    S enthalpy(int a, const S& p, const S& t, const std::array<S, kMaxComponents>& c) const
    {
        if (kind_ != ModelKind::water) return S(0.0);
        const S hl = 75.3 * (t - 273.15);
        return a == 0 ? hl : hl + 4.07e4;
    }

    /// Molar internal energy e = h - P/ζ.
    template <class S>
    S energy(int a, const S& p, const S& t, const std::array<S, kMaxComponents>& c) const
    {
        if (kind_ != ModelKind::water) return S(0.0);
        return enthalpy(a, p, t, c) - p / zeta(a, p, t, c);
    }

    /// Fugacity coefficient f_i^α.
    template <class S>
    S fugacity(int a, int i, const S& p, const S& t, const std::array<S, kMaxComponents>& c) const
    {
        switch (kind_) {
        case ModelKind::immiscible: return S(1.0);
        case ModelKind::blackoil: {
            if (a == 0) return S(1.0);
            constexpr double p1 = 1e6, p2 = 2e6, c1 = 5e-3, c2 = 1e-2;
            return (p - p2) / (p1 - p2) * c1 + (p - p1) / (p2 - p1) * c2;
        }
        case ModelKind::water: return a == 1 ? p : psat(t);
        }
        return S(1.0);
    }

    /// Divisor applied to fugacity-equality closure rows so they are O(1).
    double fugacity_scale() const { return kind_ == ModelKind::water ? 1e5 : 1.0; }

    template <class S>
    S kr(int a, const S& s) const
    {
        const double sr = residual_saturation[a];
        const S se = (s - sr) / (1.0 - sr);
        if (value(se) <= 0.0) return S(0.0);
        if (value(se) >= 1.0) return S(1.0);
        return se * se;
    }

    /// Rock energy per unit rock volume.
    template <class S>
    S rock_energy(const S& p, const S& t) const
    {
        if (kind_ != ModelKind::water) return S(0.0);
        return rock_heat_capacity * t;
    }

private:
    explicit FluidModel(ModelKind k) : kind_(k) {}

    template <class S>
    void check_state(const S& p, const S& t) const
    {
        if (!(value(p) > 0.0) || !std::isfinite(value(p)))
            throw DomainError(std::string(name()) + ": pressure must be positive");
        if (!(value(t) > 0.0) || !std::isfinite(value(t)))
            throw DomainError(std::string(name()) + ": temperature must be positive");
        if (kind_ == ModelKind::water && !(value(t) >= 273.0 && value(t) <= 650.0))
            throw DomainError("water density: temperature " + std::to_string(value(t)) + " K outside [273, 650]");
    }

    ModelKind kind_;
};

/// Moles of component i per unit pore volume.
template <class S>
S component_moles(const FluidModel& m, const NaturalState<S>& x, int i)
{
    bool carried = false;
    S n(0.0);
    for (int a = 0; a < m.num_phases(); ++a) {
        if (!x.present(a) || !m.contains(a, i)) continue;
        carried = true;
        n += m.zeta(a, x.p, x.t, x.c[a]) * x.s[a] * x.c[a][i];
    }
    return carried ? n : x.n[i];
}

/// Fluid energy per unit pore volume.
template <class S>
S fluid_energy(const FluidModel& m, const NaturalState<S>& x)
{
    S e(0.0);
    for (int a = 0; a < m.num_phases(); ++a)
        if (x.present(a)) e += m.zeta(a, x.p, x.t, x.c[a]) * x.s[a] * m.energy(a, x.p, x.t, x.c[a]);
    return e;
}

/// Local closure laws: Σ S - 1, then Σ_i C_i^α - 1 per present phase, then
/// one scaled fugacity equality per component shared by two present phases.
/// Returns the number of rows written.
template <class S>
int closure_residual(const FluidModel& m, const NaturalState<S>& x, S* out)
{
    int r = 0;
    S ssum(0.0);
    for (int a = 0; a < m.num_phases(); ++a)
        if (x.present(a)) ssum += x.s[a];
    out[r++] = ssum - 1.0;
    for (int a = 0; a < m.num_phases(); ++a) {
        if (!x.present(a)) continue;
        S csum(0.0);
        for (int i = 0; i < m.num_components(); ++i)
            if (m.contains(a, i)) csum += x.c[a][i];
        out[r++] = csum - 1.0;
    }
    if (x.present(0) && x.present(1)) {
        for (int i = 0; i < m.num_components(); ++i) {
            if (!m.contains(0, i) || !m.contains(1, i)) continue;
            const S f0 = m.fugacity(0, i, x.p, x.t, x.c[0]) * x.c[0][i];
            const S f1 = m.fugacity(1, i, x.p, x.t, x.c[1]) * x.c[1][i];
            out[r++] = (f0 - f1) / m.fugacity_scale();
        }
    }
    return r;
}

/// Phase appearance and disappearance. Removal takes precedence and ends the
/// call, so a phase removed now cannot reappear before the next Newton
/// iteration. Throws FlashError when no phase can remain.
CoatsState flash(const FluidModel& m, const CoatsState& x);

enum class VarKind : std::uint8_t { pressure, temperature, saturation, fraction, moles };

struct Var {
    VarKind kind = VarKind::pressure;
    std::int8_t phase = -1;
    std::int8_t comp = -1;
};

/// Natural unknowns of a dof for one present-phase set, ordered P, [T], S^α,
/// C_i^α, n_i, with the primary/secondary split used by closure elimination.
struct UnknownLayout {
    int num_unknowns = 0;
    std::array<Var, kMaxUnknowns> vars{};
    int num_primary = 0;
    std::array<int, kNumEquations> primary{};
    int num_secondary = 0;
    std::array<int, kMaxUnknowns> secondary{};

    int num_closures() const { return num_unknowns - num_primary; }
};

const UnknownLayout& select_unknown_split(const FluidModel& m, unsigned q);

double get_var(const CoatsState& x, const Var& v);
void set_var(CoatsState& x, const Var& v, double value);

/// Lift a state to Dual numbers seeded on the layout's unknowns.
template <int N>
NaturalState<Dual<N>> seed_state(const CoatsState& x, const UnknownLayout& lay)
{
    NaturalState<Dual<N>> d;
    d.q = x.q;
    d.p = x.p;
    d.t = x.t;
    for (int a = 0; a < kMaxPhases; ++a) {
        d.s[a] = x.s[a];
        for (int i = 0; i < kMaxComponents; ++i)
            d.c[a][i] = x.c[a][i];
    }
    for (int i = 0; i < kMaxComponents; ++i)
        d.n[i] = x.n[i];
    for (int k = 0; k < lay.num_unknowns; ++k) {
        const Var& v = lay.vars[k];
        Dual<N>* slot = nullptr;
        switch (v.kind) {
        case VarKind::pressure: slot = &d.p; break;
        case VarKind::temperature: slot = &d.t; break;
        case VarKind::saturation: slot = &d.s[v.phase]; break;
        case VarKind::fraction: slot = &d.c[v.phase][v.comp]; break;
        case VarKind::moles: slot = &d.n[v.comp]; break;
        }
        slot->d[k] = 1.0;
    }
    return d;
}

/// Closure-consistent state with the given present phases: saturations of
/// absent phases, fractions of absent phases and moles of carried components
/// are zeroed.
CoatsState normalized(const FluidModel& m, CoatsState x);

} // namespace vagsim
