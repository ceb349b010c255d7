#include "vagsim/fluid/fluid.hpp"

#include <algorithm>

namespace vagsim {

namespace {

constexpr double kAppearTol = 1e-12;

void clip_fractions(const FluidModel& m, CoatsState& x, int a)
{
    double sum = 0.0;
    for (int i = 0; i < m.num_components(); ++i) {
        if (!m.contains(a, i)) continue;
        x.c[a][i] = std::clamp(x.c[a][i], 0.0, 1.0);
        sum += x.c[a][i];
    }
    if (!(sum > 0.0)) throw FlashError(std::string("phase ") + m.phase_name(a) + " has no components left");
    for (int i = 0; i < m.num_components(); ++i)
        if (m.contains(a, i)) x.c[a][i] /= sum;
}

void set_single_fraction_phases(const FluidModel& m, CoatsState& x, int a)
{
    int members = 0, last = -1;
    for (int i = 0; i < m.num_components(); ++i)
        if (m.contains(a, i)) {
            ++members;
            last = i;
        }
    if (members == 1) x.c[a][last] = 1.0;
}

/// Drop phase `gone`, leaving the other phase alone with S = 1, then project
/// the remaining state onto the undersaturated side of the appearance test.
CoatsState remove_phase(const FluidModel& m, CoatsState x, int gone)
{
    const int keep = 1 - gone;
    x.q = 1u << keep;
    x.s[keep] = 1.0;
    x.s[gone] = 0.0;
    x.c[gone].fill(0.0);
    clip_fractions(m, x, keep);
    for (int i = 0; i < m.num_components(); ++i)
        x.n[i] = 0.0;
    if (m.kind() == ModelKind::blackoil && keep == 0) {
        const double cmax = m.fugacity(1, 1, x.p, x.t, x.c[1]);
        x.c[0][1] = std::min(x.c[0][1], cmax);
        x.c[0][0] = 1.0 - x.c[0][1];
    }
    if (m.kind() == ModelKind::water) {
        const double ps = psat(x.t);
        if ((keep == 0 && x.p < ps) || (keep == 1 && x.p > ps)) x.t = tsat(x.p);
    }
    return x;
}

} // namespace

CoatsState flash(const FluidModel& m, const CoatsState& in)
{
    CoatsState x = in;
    if (!m.admissible(x.q) && m.kind() != ModelKind::immiscible)
        throw FlashError("empty present-phase set");

    if (m.kind() == ModelKind::immiscible) {
        x.q = 3u;
        x.s[1] = std::clamp(x.s[1], 0.0, 1.0);
        x.s[0] = 1.0 - x.s[1];
        x.c[0] = {1.0, 0.0};
        x.c[1] = {0.0, 1.0};
        x.n.fill(0.0);
        return x;
    }

    if (x.q == 3u) {
        const bool neg0 = x.s[0] < 0.0;
        const bool neg1 = x.s[1] < 0.0;
        if (neg0 && neg1) throw FlashError("all phase saturations are negative");
        if (neg0) return remove_phase(m, x, 0);
        if (neg1) return remove_phase(m, x, 1);
        const double sum = x.s[0] + x.s[1];
        x.s[0] /= sum;
        x.s[1] /= sum;
        clip_fractions(m, x, 0);
        clip_fractions(m, x, 1);
        return x;
    }

    const int a = x.q == 1u ? 0 : 1;
    const int b = 1 - a;
    x.s[a] = 1.0;
    x.s[b] = 0.0;
    clip_fractions(m, x, a);
    for (int i = 0; i < m.num_components(); ++i)
        x.n[i] = std::max(x.n[i], 0.0);

    bool appear = false;
    if (m.kind() == ModelKind::blackoil) {
        const double f_oil = m.fugacity(1, 1, x.p, x.t, x.c[1]);
        if (a == 0) {
            appear = m.fugacity(0, 1, x.p, x.t, x.c[0]) * x.c[0][1] > f_oil * (1.0 + kAppearTol);
            if (appear) {
                x.c[0][1] = f_oil;
                x.c[0][0] = 1.0 - f_oil;
            }
        } else {
            std::array<double, kMaxComponents> ceq{1.0 - f_oil, f_oil};
            appear = x.n[0] > kAppearTol * m.zeta(0, x.p, x.t, ceq);
            if (appear) x.c[0] = ceq;
        }
    } else {
        const double ps = psat(x.t);
        appear = a == 0 ? x.p < ps * (1.0 - kAppearTol) : x.p > ps * (1.0 + kAppearTol);
    }
    if (appear) {
        x.q = 3u;
        x.s[b] = 0.0;
        set_single_fraction_phases(m, x, b);
        set_single_fraction_phases(m, x, a);
        x.n.fill(0.0);
    }
    return x;
}

} // namespace vagsim
