#pragma once

// Multi-parameter extremum seeking with sinusoidal dithers.
//
// Each tuned gain owns a channel (x, a, omega). The offset applied to the
// gain is  delta(t) = x(t) + a sin(omega t + pi/2)  and the integrator obeys
// x' = a sin(omega t - pi/2) Q. The cost Q is only available at iteration
// boundaries, so it is held constant over an iteration and x is advanced with
// the exact integral of the dither over that window.

#include <optional>
#include <string>
#include <vector>

namespace mes {

struct ESChannel {
    std::string name;
    double x_state = 0.0;
    double omega = 1.0;            // rad/s
    double base_amplitude = 1.0;
    double current_amplitude = 1.0;
    double nominal_value = 0.0;
};

struct AmplitudeStage {
    double cost_fraction = 0.5;       // fires when Q <= cost_fraction * Q(1)
    double multiplier = 0.5;          // applied to every base amplitude...
    std::vector<double> per_channel;  // ...unless overridden here (same length as channels)
    bool scale_by_first_cost = true;  // multiply by Q(1) as well
};

// Stages ordered by strictly decreasing cost_fraction.
struct AmplitudeSchedule {
    std::vector<AmplitudeStage> stages;
};

struct ESBank {
    std::vector<ESChannel> channels; // K1, K2, K3, k_robust
    int stage = 0;                   // 0 = base amplitudes, s = stages[s-1] in effect

    double omega0() const;
};

struct FrequencyViolation {
    enum class Kind { duplicate, sum } kind;
    std::vector<std::size_t> indices; // 2 for duplicate, (p, q, r) with w_p + w_q = w_r for sum
    std::string describe(const std::vector<double>& omegas) const;
};

// All pairwise-distinct frequencies with no w_p + w_q = w_r among distinct
// indices (relative tolerance 1e-9).
std::vector<FrequencyViolation> frequency_violations(const std::vector<double>& omegas);
bool validate_frequencies(const std::vector<double>& omegas);

// Throws std::invalid_argument if the schedule is malformed for `channel_count`.
void validate_schedule(const AmplitudeSchedule& schedule, std::size_t channel_count);

// Default schedule: halve at Q(1)/2, third at Q(1)/3,
// both scaled by Q(1).
AmplitudeSchedule default_schedule();

double delta_at(const ESChannel& channel, double t);

// Exact integral of a sin(omega tau - pi/2) Q over [t_start, t_end].
ESChannel advance_channel(const ESChannel& channel, double q_measured, double t_start, double t_end);

// Latching: amplitudes follow the deepest stage ever reached.
ESBank schedule_amplitudes(const ESBank& bank, const AmplitudeSchedule& schedule, double q_current,
                           double q_first);

} // namespace mes
