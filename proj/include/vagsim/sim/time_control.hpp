#pragma once

#include <vector>

namespace vagsim {

/// Maximum step on [previous end, end); times in seconds.
struct TimeInterval {
    double end = 0.0;
    double dt_max = 0.0;
};

struct TimeControls {
    double dt_init = 0.0;
    /// Consecutive intervals starting at t = 0; the last one ends at final_time.
    std::vector<TimeInterval> schedule;
    double final_time = 0.0;
    double growth = 1.2;
    /// Steps below floor_ratio * dt_init abort the run.
    double floor_ratio = 1e-6;

    /// Throws ConfigError unless steps are positive and the schedule covers [0, final_time].
    void validate() const;
    /// Cap of the interval containing t (the last interval for t >= final_time).
    double cap_at(double t) const;
    /// Nearest interval end strictly after t.
    double next_breakpoint(double t) const;
};

/// Success: min(growth * dt, cap). Failure: dt / 2.
double next_time_step(double dt, double cap, bool success, double growth = 1.2);

/// Step state of a run. The proposed step never crosses an interval end or
/// the final time.
class TimeController {
public:
    explicit TimeController(TimeControls controls);

    double time() const { return t_; }
    bool finished() const;
    /// Step to try next.
    double proposed_step() const;
    /// Advance past a converged step of size proposed_step().
    void accept();
    /// Halve the step after a failure; throws SolverError below the floor.
    void reject();
    const TimeControls& controls() const { return c_; }

private:
    TimeControls c_;
    double t_ = 0.0;
    double dt_ = 0.0; // unclipped nominal step
};

} // namespace vagsim
