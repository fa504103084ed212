#include "mes/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mes/errors.hpp"
#include "mes/integrator.hpp"

namespace mes {

namespace {

double state_cost(const CostWeights& w, const ErrorVector& z) {
    const Eigen::Vector3d v = z.as_vector();
    return v.dot(w.state_weight * v);
}

double input_cost(const CostWeights& w, double u) { return w.input_weight * u * u; }

double terminal_cost(const CostWeights& w, const ErrorVector& z) {
    return w.terminal[0] * z.z1 * z.z1 + w.terminal[1] * z.z2 * z.z2 + w.terminal[2] * z.z3 * z.z3;
}

// Running trapezoid over the telemetry grid. evaluate_cost uses the same
// accumulation order so both paths agree exactly.
struct TrapezoidCost {
    bool started = false;
    double t_prev = 0.0;
    double f_prev = 0.0;
    double total = 0.0;

    void add(double t, double f) {
        if (started)
            total += 0.5 * (t - t_prev) * (f_prev + f);
        started = true;
        t_prev = t;
        f_prev = f;
    }
};

ESBank make_bank(const GainSet& nominal) {
    const double nominal_values[4] = {nominal.K1, nominal.K2, nominal.K3, nominal.k_robust};
    const char* names[4] = {"K1", "K2", "K3", "k_robust"};
    const double omegas[4] = {7.5, 5.3, 5.1, 6.1};
    const double amplitudes[4] = {200.0, 120.0, 20.0, 0.2};
    ESBank bank;
    for (int c = 0; c < 4; ++c)
        bank.channels.push_back(
            {names[c], 0.0, omegas[c], amplitudes[c], amplitudes[c], nominal_values[c]});
    return bank;
}

} // namespace

CampaignConfig default_campaign() {
    CampaignConfig cfg;
    cfg.bounds = default_bounds(cfg.plant);
    cfg.disturbance = default_disturbance(cfg.bounds);
    cfg.reference = build_quintic(1.0, cfg.plant.x_f);
    cfg.bank = make_bank(cfg.nominal_gains);
    cfg.schedule = default_schedule();
    return cfg;
}

std::vector<std::string> validate(const CampaignConfig& cfg) {
    std::vector<std::string> out;
    auto fail = [&](const std::string& s) { out.push_back(s); };

    const PlantParams& p = cfg.plant;
    if (!(p.m > 0 && p.R > 0 && p.eta_nominal > 0 && p.x0_spring > 0 && p.k_nominal > 0 &&
          p.a_coil > 0 && p.b_coil > 0 && p.x_f > 0))
        fail("plant parameters must all be strictly positive");
    if (cfg.bounds.delta_k_max < 0 || cfg.bounds.delta_eta_max < 0)
        fail("uncertainty bounds must be nonnegative");
    if (!cfg.bounds.contains(cfg.disturbance))
        fail("disturbance lies outside the uncertainty bounds");
    if (!(cfg.reference.t_f > 0))
        fail("reference t_f must be positive");

    if (!is_hurwitz(cfg.nominal_gains))
        fail("gains not Hurwitz: s^3 - K3 s^2 - K2 s - K1 fails Routh-Hurwitz");
    if (cfg.nominal_gains.k_robust < 0)
        fail("k_robust must be nonnegative");
    if (cfg.k_robust_min < 0)
        fail("k_robust_min must be nonnegative");

    if (cfg.bank.channels.size() != 4) {
        fail("es: exactly 4 channels required (K1, K2, K3, k_robust)");
    } else {
        std::vector<double> omegas;
        for (const auto& c : cfg.bank.channels) {
            omegas.push_back(c.omega);
            if (!(c.omega > 0))
                fail("es: channel " + c.name + " frequency must be positive");
            if (!(c.base_amplitude > 0) || !(c.current_amplitude > 0))
                fail("es: channel " + c.name + " amplitude must be positive");
        }
        for (const auto& v : frequency_violations(omegas))
            fail(v.describe(omegas));
        try {
            validate_schedule(cfg.schedule, cfg.bank.channels.size());
        } catch (const std::invalid_argument& e) {
            fail(std::string("es: ") + e.what());
        }
    }

    if (cfg.cost.mode == CostMode::terminal) {
        for (double c : cfg.cost.terminal)
            if (!(c > 0)) {
                fail("cost: terminal weights must be strictly positive");
                break;
            }
    } else {
        const Eigen::Matrix3d& C = cfg.cost.state_weight;
        if (!(C - C.transpose()).isZero(0.0) || !is_positive_definite(C))
            fail("cost: state weight must be symmetric positive definite");
        if (!(cfg.cost.input_weight > 0))
            fail("cost: input weight must be strictly positive");
    }

    if (!(cfg.dt > 0))
        fail("sim: dt must be positive");
    if (cfg.iterations < 1)
        fail("sim: iterations must be at least 1");
    if (!(cfg.i_min > 0))
        fail("controller: i_min must be positive");

    try {
        const PlantState s = reset_state(cfg);
        if (!(p.b_coil + s.x_a > 0))
            fail("initial: armature starts at the coil singularity");
        if (std::abs(s.i) < cfg.i_min)
            fail("initial: coil current below the singularity guard i_min");
    } catch (const std::exception& e) {
        fail(std::string("initial: ") + e.what());
    }
    return out;
}

PlantState reset_state(const CampaignConfig& cfg) {
    const ReferenceSample r0 = sample(cfg.reference, 0.0);
    PlantState s;
    s.x_a = cfg.initial.z1 + r0.pos;
    s.v = cfg.initial.z2 + r0.vel;
    s.i = cfg.initial.i0 ? *cfg.initial.i0
                         : force_balance_current(cfg.plant, cfg.disturbance, s.x_a, s.v);
    return s;
}

double evaluate_cost(const CostWeights& weights, const Telemetry& telemetry) {
    if (telemetry.empty())
        return 0.0;
    if (weights.mode == CostMode::terminal)
        return terminal_cost(weights, telemetry.back().z);
    TrapezoidCost zc, uc;
    for (const auto& row : telemetry) {
        zc.add(row.t, state_cost(weights, row.z));
        uc.add(row.t, input_cost(weights, row.u));
    }
    return std::max(0.0, zc.total + uc.total);
}

IterationRecord run_episode(const CampaignConfig& cfg, const GainSet& gains,
                            const LyapunovData& lyapunov, int iteration, Telemetry* telemetry) {
    const ControllerSetup setup{cfg.plant, cfg.bounds, gains, lyapunov, cfg.i_min};
    const ClosedLoopField field(setup, cfg.disturbance, cfg.reference, cfg.acceleration_source);
    const IntegrationConfig ic{cfg.dt, 0.0, cfg.reference.t_f};

    IterationRecord rec;
    rec.index = iteration;
    rec.gains_used = gains;

    TrapezoidCost zc, uc;
    double last_t = 0.0;
    ControlOutput last;

    auto observe = [&](double t, const StateVector<3>& x) {
        last_t = t;
        const ControlOutput c = field.control(t, x);
        const PlantState s = PlantState::from_vector(x);
        const ErrorVector& z = c.z;
        rec.max_abs_z[0] = std::max(rec.max_abs_z[0], std::abs(z.z1));
        rec.max_abs_z[1] = std::max(rec.max_abs_z[1], std::abs(z.z2));
        rec.max_abs_z[2] = std::max(rec.max_abs_z[2], std::abs(z.z3));
        rec.max_norm_z = std::max(rec.max_norm_z, z.as_vector().norm());
        if (!in_stroke(cfg.plant, s.x_a))
            rec.position_range_violated = true;
        if (cfg.cost.mode == CostMode::integral) {
            zc.add(t, state_cost(cfg.cost, z));
            uc.add(t, input_cost(cfg.cost, c.u));
        }
        if (telemetry)
            telemetry->push_back(
                {t, s, sample(cfg.reference, t), c.u, c.robust_component, z, c.in_invariant_set});
        last = c;
    };

    try {
        rec.initial_state = reset_state(cfg);
        if (telemetry)
            telemetry->reserve(telemetry->size() + static_cast<std::size_t>(step_count(ic)) + 1);
        integrate<3>(field, rec.initial_state.to_vector(), ic, observe);
    } catch (const NonFiniteState& e) {
        throw EpisodeDiverged(iteration, e.time(), e.what());
    } catch (const Error& e) {
        throw EpisodeDiverged(iteration, last_t, e.what());
    } catch (const std::invalid_argument& e) {
        throw EpisodeDiverged(iteration, last_t, e.what());
    }

    rec.z_terminal = last.z;
    rec.in_invariant_set_at_tf = last.in_invariant_set;
    rec.Q = cfg.cost.mode == CostMode::terminal ? terminal_cost(cfg.cost, last.z)
                                                : std::max(0.0, zc.total + uc.total);
    return rec;
}

GainSet proposed_gains(const CampaignConfig& cfg, const ESBank& bank, double t, TuningVector* beta) {
    TuningVector b{};
    for (std::size_t c = 0; c < 4; ++c)
        b[c] = delta_at(bank.channels[c], t);
    if (beta)
        *beta = b;
    const GainSet& n = cfg.nominal_gains;
    return {n.K1 + b[0], n.K2 + b[1], n.K3 + b[2],
            std::max(cfg.k_robust_min, n.k_robust + b[3])};
}

CampaignResult run_campaign(const CampaignConfig& cfg, const EpisodeCallback& on_episode) {
    if (cfg.bank.channels.size() != 4)
        throw std::invalid_argument("run_campaign: exactly 4 ES channels required");
    if (cfg.iterations < 1)
        throw std::invalid_argument("run_campaign: iterations must be at least 1");
    if (!is_hurwitz(cfg.nominal_gains))
        throw NonHurwitzGains("nominal gains not Hurwitz");

    CampaignResult result;
    result.final_bank = cfg.bank;
    ESBank& bank = result.final_bank;
    const double t_f = cfg.reference.t_f;

    GainSet accepted = cfg.nominal_gains;
    accepted.k_robust = std::max(cfg.k_robust_min, accepted.k_robust);
    Telemetry telemetry;

    for (int I = 1; I <= cfg.iterations; ++I) {
        const double t0 = (I - 1) * t_f;
        TuningVector beta{};
        const GainSet proposal = proposed_gains(cfg, bank, t0, &beta);
        const bool rejected = !is_hurwitz(proposal);
        if (!rejected)
            accepted = proposal;
        const int stage_used = bank.stage;

        IterationRecord rec;
        try {
            const LyapunovData lyap = make_lyapunov_data(accepted);
            telemetry.clear();
            rec = run_episode(cfg, accepted, lyap, I, on_episode ? &telemetry : nullptr);
        } catch (const EpisodeDiverged& e) {
            result.failure = CampaignFailure{e.iteration(), e.time(), e.what()};
            if (on_episode) {
                IterationRecord partial;
                partial.index = I;
                partial.gains_used = accepted;
                partial.beta = beta;
                partial.hurwitz_rejected = rejected;
                partial.amp_stage = stage_used;
                on_episode(partial, telemetry);
            }
            break;
        }
        rec.beta = beta;
        rec.hurwitz_rejected = rejected;
        rec.amp_stage = stage_used;
        if (on_episode)
            on_episode(rec, telemetry);

        if (I == 1)
            result.q_first = rec.Q;
        if (result.q_first > 0.0)
            bank = schedule_amplitudes(bank, cfg.schedule, rec.Q, result.q_first);
        for (auto& ch : bank.channels)
            ch = advance_channel(ch, rec.Q, t0, t0 + t_f);

        result.records.push_back(rec);
    }

    const double t_end = static_cast<double>(result.records.size()) * t_f;
    for (std::size_t c = 0; c < 4; ++c)
        result.final_beta[c] = delta_at(bank.channels[c], t_end);
    return result;
}

} // namespace mes
