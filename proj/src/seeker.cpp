#include "mes/seeker.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mes {

namespace {
constexpr double kRelTol = 1e-9;

bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= kRelTol * std::max({std::abs(a), std::abs(b), 1e-300});
}
} // namespace

double ESBank::omega0() const {
    double w = 0.0;
    for (const auto& c : channels)
        w = std::max(w, c.omega);
    return w;
}

std::string FrequencyViolation::describe(const std::vector<double>& omegas) const {
    std::ostringstream os;
    auto w = [&](std::size_t i) { return omegas.at(i); };
    if (kind == Kind::duplicate) {
        os << "frequencies " << indices[0] + 1 << " and " << indices[1] + 1 << " coincide ("
           << w(indices[0]) << " rad/s)";
    } else {
        os << "frequency triple violates w_p + w_q != w_r: " << w(indices[0]) << " + "
           << w(indices[1]) << " = " << w(indices[2]) << " (channels " << indices[0] + 1 << ", "
           << indices[1] + 1 << ", " << indices[2] + 1 << ")";
    }
    return os.str();
}

std::vector<FrequencyViolation> frequency_violations(const std::vector<double>& omegas) {
    std::vector<FrequencyViolation> out;
    const std::size_t n = omegas.size();
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = p + 1; q < n; ++q)
            if (nearly_equal(omegas[p], omegas[q]))
                out.push_back({FrequencyViolation::Kind::duplicate, {p, q}});
    // p < q covers both orders of the (commutative) sum.
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = p + 1; q < n; ++q)
            for (std::size_t r = 0; r < n; ++r)
                if (r != p && r != q && nearly_equal(omegas[p] + omegas[q], omegas[r]))
                    out.push_back({FrequencyViolation::Kind::sum, {p, q, r}});
    return out;
}

bool validate_frequencies(const std::vector<double>& omegas) {
    if (omegas.empty())
        throw std::invalid_argument("validate_frequencies: empty frequency list");
    return frequency_violations(omegas).empty();
}

void validate_schedule(const AmplitudeSchedule& schedule, std::size_t channel_count) {
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& s : schedule.stages) {
        if (!(s.cost_fraction > 0.0) || !(s.cost_fraction < prev))
            throw std::invalid_argument("amplitude schedule: cost fractions must be positive and "
                                        "strictly decreasing");
        prev = s.cost_fraction;
        if (!s.per_channel.empty() && s.per_channel.size() != channel_count)
            throw std::invalid_argument("amplitude schedule: per-channel multipliers must match "
                                        "the channel count");
        if (s.per_channel.empty() && !(s.multiplier > 0.0))
            throw std::invalid_argument("amplitude schedule: multipliers must be positive");
        for (double m : s.per_channel)
            if (!(m > 0.0))
                throw std::invalid_argument("amplitude schedule: multipliers must be positive");
    }
}

AmplitudeSchedule default_schedule() {
    AmplitudeSchedule s;
    s.stages.push_back({0.5, 0.5, {}, true});
    s.stages.push_back({1.0 / 3.0, 1.0 / 3.0, {}, true});
    return s;
}

double delta_at(const ESChannel& channel, double t) {
    return channel.x_state +
           channel.current_amplitude * std::sin(channel.omega * t + std::numbers::pi / 2);
}

ESChannel advance_channel(const ESChannel& channel, double q_measured, double t_start,
                          double t_end) {
    if (!(t_end > t_start))
        throw std::invalid_argument("advance_channel: t_end must exceed t_start");
    if (q_measured < 0.0)
        throw std::invalid_argument("advance_channel: cost must be nonnegative");
    ESChannel out = channel;
    if (q_measured == 0.0)
        return out;
    const double w = channel.omega;
    const double half_pi = std::numbers::pi / 2;
    out.x_state += q_measured * (channel.current_amplitude / w) *
                   (std::cos(w * t_start - half_pi) - std::cos(w * t_end - half_pi));
    return out;
}

ESBank schedule_amplitudes(const ESBank& bank, const AmplitudeSchedule& schedule, double q_current,
                           double q_first) {
    if (!(q_first > 0.0))
        throw std::invalid_argument("schedule_amplitudes: Q(1) must be positive");
    int deepest = 0;
    for (std::size_t s = 0; s < schedule.stages.size(); ++s)
        if (q_current <= schedule.stages[s].cost_fraction * q_first)
            deepest = static_cast<int>(s) + 1;

    ESBank out = bank;
    if (deepest <= bank.stage)
        return out;
    out.stage = deepest;
    const AmplitudeStage& st = schedule.stages[static_cast<std::size_t>(deepest - 1)];
    const double scale = st.scale_by_first_cost ? q_first : 1.0;
    for (std::size_t c = 0; c < out.channels.size(); ++c) {
        const double mult = st.per_channel.empty() ? st.multiplier : st.per_channel[c];
        out.channels[c].current_amplitude = out.channels[c].base_amplitude * mult * scale;
    }
    return out;
}

} // namespace mes
