#include "vagsim/sim/time_control.hpp"

#include "vagsim/common/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vagsim {

void TimeControls::validate() const
{
    if (!(dt_init > 0.0)) throw ConfigError("time: initial step must be positive");
    if (!(final_time > 0.0)) throw ConfigError("time: final time must be positive");
    if (!(growth >= 1.0)) throw ConfigError("time: growth factor must be at least 1");
    if (schedule.empty()) throw ConfigError("time: schedule is empty");
    double prev = 0.0;
    for (const TimeInterval& iv : schedule) {
        if (!(iv.dt_max > 0.0)) throw ConfigError("time: interval step caps must be positive");
        if (!(iv.end > prev)) throw ConfigError("time: interval ends must increase");
        prev = iv.end;
    }
    if (prev < final_time) throw ConfigError("time: schedule ends before the final time");
}

double TimeControls::cap_at(double t) const
{
    for (const TimeInterval& iv : schedule)
        if (t < iv.end) return iv.dt_max;
    return schedule.back().dt_max;
}

double TimeControls::next_breakpoint(double t) const
{
    for (const TimeInterval& iv : schedule)
        if (t < iv.end) return std::min(iv.end, final_time);
    return final_time;
}

double next_time_step(double dt, double cap, bool success, double growth)
{
    return success ? std::min(growth * dt, cap) : 0.5 * dt;
}

TimeController::TimeController(TimeControls controls) : c_(std::move(controls))
{
    c_.validate();
    dt_ = std::min(c_.dt_init, c_.cap_at(0.0));
}

bool TimeController::finished() const
{
    // Relative slack absorbs round-off from summing many steps.
    return t_ >= c_.final_time * (1.0 - 1e-12);
}

double TimeController::proposed_step() const
{
    return std::min(dt_, c_.next_breakpoint(t_) - t_);
}

void TimeController::accept()
{
    const double taken = proposed_step();
    const double bp = c_.next_breakpoint(t_);
    t_ = (taken == bp - t_) ? bp : t_ + taken;
    dt_ = next_time_step(taken, c_.cap_at(t_), true, c_.growth);
}

void TimeController::reject()
{
    dt_ = next_time_step(proposed_step(), c_.cap_at(t_), false, c_.growth);
    if (dt_ < c_.floor_ratio * c_.dt_init)
        throw SolverError("time step " + std::to_string(dt_) + " s fell below the floor at t = " +
                          std::to_string(t_) + " s");
}

} // namespace vagsim
