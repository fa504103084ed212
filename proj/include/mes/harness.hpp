#pragma once

// Iterative learning engine: every iteration resets the plant to the same
// initial state, replays the reference in iteration-local time with frozen
// gains, measures the cost and feeds it to the extremum seeker.

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mes/actuator.hpp"
#include "mes/controller.hpp"
#include "mes/seeker.hpp"
#include "mes/stability.hpp"
#include "mes/trajectory.hpp"

namespace mes {

enum class CostMode { terminal, integral };

struct CostWeights {
    CostMode mode = CostMode::terminal;
    std::array<double, 3> terminal{500.0, 500.0, 10.0};          // C1, C2, C3
    Eigen::Matrix3d state_weight = Eigen::Matrix3d::Identity();  // integral mode
    double input_weight = 0.0;                                   // integral mode
};

struct TelemetryRow {
    double t = 0.0;
    PlantState state;
    ReferenceSample ref;
    double u = 0.0;
    double robust_component = 0.0;
    ErrorVector z;
    bool in_invariant_set = true;
};

using Telemetry = std::vector<TelemetryRow>;

struct InitialConditions {
    double z1 = 1e-5;          // m
    double z2 = 1e-4;          // m/s
    std::optional<double> i0;  // A; force balance at the reset state when empty
};

// (dK1, dK2, dK3, dk) in gain units.
using TuningVector = std::array<double, 4>;

struct IterationRecord {
    int index = 0;
    GainSet gains_used;
    TuningVector beta{};  // offsets proposed by the seeker for this iteration
    double Q = 0.0;
    ErrorVector z_terminal;
    std::array<double, 3> max_abs_z{};
    double max_norm_z = 0.0;
    bool position_range_violated = false;
    bool in_invariant_set_at_tf = false;
    bool hurwitz_rejected = false;
    int amp_stage = 0;
    PlantState initial_state;
};

struct CampaignConfig {
    PlantParams plant;
    UncertaintyBounds bounds;
    TrueDisturbance disturbance;
    ReferenceSpec reference;
    GainSet nominal_gains;
    double k_robust_min = 0.0;
    AccelerationSource acceleration_source = AccelerationSource::measured;
    double i_min = kDefaultCurrentGuard;
    ESBank bank;
    AmplitudeSchedule schedule;
    CostWeights cost;
    int iterations = 60;
    double dt = 1e-5;
    InitialConditions initial;
};

// Reference actuator, quintic to 0.5 mm in 1 s, nominal gains (-500, -125, -26, 1),
// dithers 7.5/5.3/5.1/6.1 rad/s with amplitudes 200/120/20/0.2, terminal cost
// (500, 500, 10), default 10% disturbance corner.
CampaignConfig default_campaign();

// One line per violated precondition; empty when the config is runnable.
std::vector<std::string> validate(const CampaignConfig& config);

// Plant state every episode starts from.
PlantState reset_state(const CampaignConfig& config);

double evaluate_cost(const CostWeights& weights, const Telemetry& telemetry);

// Throws EpisodeDiverged. When `telemetry` is given, every grid point is
// appended to it as the episode runs, so a diverged episode leaves the rows
// it produced.
IterationRecord run_episode(const CampaignConfig& config, const GainSet& gains,
                            const LyapunovData& lyapunov, int iteration,
                            Telemetry* telemetry = nullptr);

struct CampaignFailure {
    int iteration = 0;
    double time = 0.0;
    std::string message;
};

struct CampaignResult {
    std::vector<IterationRecord> records;
    ESBank final_bank;
    TuningVector final_beta{};
    double q_first = 0.0;
    std::optional<CampaignFailure> failure;
};

using EpisodeCallback = std::function<void(const IterationRecord&, const Telemetry&)>;

// When `on_episode` is set, each episode's full telemetry is recorded and
// handed to it before being dropped.
CampaignResult run_campaign(const CampaignConfig& config, const EpisodeCallback& on_episode = {});

// Gains the seeker proposes at global time t, before the Hurwitz check.
GainSet proposed_gains(const CampaignConfig& config, const ESBank& bank, double t,
                       TuningVector* beta = nullptr);

} // namespace mes
