#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "mes/errors.hpp"
#include "mes/harness.hpp"

using namespace mes;

namespace {

CampaignConfig exact_config() {
    CampaignConfig c = default_campaign();
    c.disturbance = {};
    c.nominal_gains.k_robust = 0.0;
    return c;
}

TelemetryRow row_with(double t, ErrorVector z, double u = 0.0) {
    TelemetryRow r;
    r.t = t;
    r.z = z;
    r.u = u;
    return r;
}

} // namespace

TEST_CASE("defaults") {
    const CampaignConfig c = default_campaign();
    CHECK(c.nominal_gains == GainSet{-500, -125, -26, 1});
    CHECK(c.iterations == 60);
    CHECK(c.dt == 1e-5);
    REQUIRE(c.bank.channels.size() == 4);
    CHECK(c.bank.channels[0].omega == 7.5);
    CHECK(c.bank.channels[1].omega == 5.3);
    CHECK(c.bank.channels[2].omega == 5.1);
    CHECK(c.bank.channels[3].omega == 6.1);
    CHECK(c.bank.channels[0].base_amplitude == 200);
    CHECK(c.bank.channels[3].base_amplitude == 0.2);
    CHECK(c.cost.terminal == std::array<double, 3>{500, 500, 10});
    CHECK(c.initial.z1 == 1e-5);
    CHECK(c.initial.z2 == 1e-4);
    CHECK(validate(c).empty());
}

TEST_CASE("terminal cost") {
    CostWeights w;
    CHECK(evaluate_cost(w, {row_with(1.0, {0, 0, 0})}) == 0.0);
    CHECK(evaluate_cost(w, {row_with(0.0, {1, 1, 1}), row_with(1.0, {1e-5, 1e-4, 0})}) ==
          doctest::Approx(5.05e-6).epsilon(1e-14));
    CHECK(evaluate_cost(w, {}) == 0.0);
}

TEST_CASE("integral cost") {
    CostWeights w;
    w.mode = CostMode::integral;
    w.input_weight = 2.0;
    Telemetry zero;
    for (int k = 0; k <= 10; ++k)
        zero.push_back(row_with(0.1 * k, {0, 0, 0}, 0.0));
    CHECK(evaluate_cost(w, zero) == 0.0);

    // z1 = t, u = 1 on [0, 1]: trapezoid of t^2 on a 0.1 grid plus 2 * 1
    Telemetry ramp;
    for (int k = 0; k <= 10; ++k)
        ramp.push_back(row_with(0.1 * k, {0.1 * k, 0, 0}, 1.0));
    CHECK(evaluate_cost(w, ramp) == doctest::Approx(0.335 + 2.0).epsilon(1e-12));
}

TEST_CASE("episode under exact cancellation") {
    const CampaignConfig c = exact_config();
    const GainSet g = c.nominal_gains;
    const IterationRecord r = run_episode(c, g, make_lyapunov_data(g), 1);
    const Eigen::Vector3d oracle(-3.4119991139191334e-06, 4.0547899753135304e-06,
                                 6.1013849681092412e-05);
    CHECK((r.z_terminal.as_vector() - oracle).norm() / oracle.norm() <= 1e-6);
    CHECK(r.in_invariant_set_at_tf);
}

TEST_CASE("episode is deterministic and resets exactly") {
    const CampaignConfig c = default_campaign();
    const GainSet g = c.nominal_gains;
    const LyapunovData lyap = make_lyapunov_data(g);
    Telemetry ta, tb;
    const IterationRecord a = run_episode(c, g, lyap, 1, &ta);
    const IterationRecord b = run_episode(c, g, lyap, 2, &tb);
    CHECK(a.Q == b.Q);
    CHECK(a.z_terminal.as_vector() == b.z_terminal.as_vector());
    CHECK(a.max_abs_z == b.max_abs_z);
    REQUIRE(ta.size() == tb.size());
    CHECK(ta.size() == 100001);
    for (std::size_t k = 0; k < ta.size(); k += 997) {
        CHECK(ta[k].state.to_vector() == tb[k].state.to_vector());
        CHECK(ta[k].u == tb[k].u);
    }
    const PlantState x0 = reset_state(c);
    CHECK(ta.front().state.to_vector() == x0.to_vector());
    CHECK(a.initial_state.to_vector() == x0.to_vector());
    CHECK(ta.front().t == 0.0);
    CHECK(ta.back().t == c.reference.t_f);
}

TEST_CASE("fixed-gain baseline under the default disturbance") {
    const CampaignConfig c = default_campaign();
    const GainSet g = c.nominal_gains;
    const IterationRecord r = run_episode(c, g, make_lyapunov_data(g), 1);
    CHECK(std::isfinite(r.Q));
    CHECK(r.Q > 0.0);
    CHECK(r.max_norm_z < 0.1);
    CHECK_FALSE(r.position_range_violated);
    CHECK(std::abs(r.z_terminal.z2) == doctest::Approx(4.652696521025772e-06).epsilon(1e-6));
}

TEST_CASE("incremental cost equals the telemetry cost") {
    CampaignConfig c = default_campaign();
    c.cost.mode = CostMode::integral;
    c.cost.input_weight = 1e-3;
    c.cost.state_weight = Eigen::Vector3d(500, 500, 10).asDiagonal();
    c.dt = 1e-4;
    Telemetry t;
    const IterationRecord r = run_episode(c, c.nominal_gains, make_lyapunov_data(c.nominal_gains), 1, &t);
    CHECK(r.Q == evaluate_cost(c.cost, t));
    c.cost.mode = CostMode::terminal;
    const IterationRecord q = run_episode(c, c.nominal_gains, make_lyapunov_data(c.nominal_gains), 1, &t);
    CHECK(q.Q == evaluate_cost(c.cost, {t.back()}));
}

TEST_CASE("diverging episode keeps its partial telemetry") {
    CampaignConfig c = default_campaign();
    c.acceleration_source = AccelerationSource::nominal_model;
    Telemetry t;
    try {
        run_episode(c, c.nominal_gains, make_lyapunov_data(c.nominal_gains), 4, &t);
        FAIL("expected divergence");
    } catch (const EpisodeDiverged& e) {
        CHECK(e.iteration() == 4);
        CHECK(e.time() > 0.0);
        CHECK(e.time() < c.reference.t_f);
        CHECK_FALSE(t.empty());
        CHECK(t.back().t <= e.time());
    }
}

TEST_CASE("single-iteration campaign applies the initial dither") {
    CampaignConfig c = default_campaign();
    c.iterations = 1;
    const double a[4] = {20, 10, 2, 0.05};
    for (int k = 0; k < 4; ++k)
        c.bank.channels[k].base_amplitude = c.bank.channels[k].current_amplitude = a[k];
    const CampaignResult r = run_campaign(c);
    REQUIRE(r.records.size() == 1);
    const GainSet& g = r.records[0].gains_used;
    CHECK(g.K1 == -500 + 20);
    CHECK(g.K2 == -125 + 10);
    CHECK(g.K3 == -26 + 2);
    CHECK(g.k_robust == 1.05);
    CHECK_FALSE(r.records[0].hurwitz_rejected);
    CHECK(r.q_first == r.records[0].Q);
    CHECK(r.records[0].beta == TuningVector{20, 10, 2, 0.05});
}

TEST_CASE("non-Hurwitz proposals fall back to the last accepted gains") {
    CampaignConfig c = default_campaign();
    c.iterations = 3;
    c.dt = 1e-4;
    const CampaignResult r = run_campaign(c);
    REQUIRE(r.records.size() == 3);
    // nominal + base amplitudes is not Hurwitz: (-300, -5, -6)
    CHECK(r.records[0].hurwitz_rejected);
    CHECK(r.records[0].gains_used == c.nominal_gains);
    for (const auto& rec : r.records)
        CHECK(is_hurwitz(rec.gains_used));
}

TEST_CASE("zero cost freezes every integrator") {
    CampaignConfig c = default_campaign();
    c.cost.terminal = {0, 0, 0};
    c.iterations = 12;
    c.dt = 1e-4;
    const CampaignResult r = run_campaign(c);
    REQUIRE(r.records.size() == 12);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(r.final_bank.channels[k].x_state == c.bank.channels[k].x_state);
        CHECK(r.final_bank.channels[k].current_amplitude == c.bank.channels[k].base_amplitude);
    }
    for (const auto& rec : r.records) {
        CHECK(rec.Q == 0.0);
        CHECK(std::abs(rec.gains_used.K1 - c.nominal_gains.K1) <= 200.0);
        CHECK(std::abs(rec.gains_used.K2 - c.nominal_gains.K2) <= 120.0);
        CHECK(std::abs(rec.gains_used.K3 - c.nominal_gains.K3) <= 20.0);
    }
}

TEST_CASE("one reset per iteration and bounded tuning steps") {
    CampaignConfig c = default_campaign();
    c.iterations = 15;
    c.dt = 1e-4;
    int resets = 0;
    std::vector<PlantState> starts;
    const CampaignResult r = run_campaign(c, [&](const IterationRecord& rec, const Telemetry& t) {
        ++resets;
        REQUIRE_FALSE(t.empty());
        CHECK(t.front().t == 0.0);
        CHECK(t.back().t == c.reference.t_f);
        starts.push_back(t.front().state);
        CHECK(rec.index == resets);
    });
    CHECK(resets == 15);
    for (const auto& s : starts)
        CHECK(s.to_vector() == reset_state(c).to_vector());

    double amp_norm = 0.0;
    for (const auto& ch : c.bank.channels)
        amp_norm += ch.base_amplitude * ch.base_amplitude;
    amp_norm = std::sqrt(amp_norm);
    for (std::size_t k = 1; k < r.records.size(); ++k) {
        const auto& prev = r.records[k - 1];
        double step2 = 0.0, bound2 = 0.0;
        for (std::size_t j = 0; j < 4; ++j) {
            const double d = r.records[k].beta[j] - prev.beta[j];
            step2 += d * d;
            const double a = c.bank.channels[j].base_amplitude;
            bound2 += (a * prev.Q * c.reference.t_f) * (a * prev.Q * c.reference.t_f);
        }
        CHECK(std::sqrt(step2) <= std::sqrt(bound2) + 2.0 * amp_norm);
    }
}

TEST_CASE("campaign stops at the first divergence") {
    CampaignConfig c = default_campaign();
    c.acceleration_source = AccelerationSource::nominal_model;
    c.iterations = 5;
    int calls = 0;
    const CampaignResult r = run_campaign(c, [&](const IterationRecord&, const Telemetry&) { ++calls; });
    REQUIRE(r.failure.has_value());
    CHECK(r.failure->iteration == 1);
    CHECK(r.records.empty());
    CHECK(calls == 1);
}

TEST_CASE("validation diagnostics") {
    CampaignConfig c = default_campaign();
    c.nominal_gains.K1 = 500;
    c.bank.channels[0].omega = 1;
    c.bank.channels[1].omega = 2;
    c.bank.channels[2].omega = 3;
    c.cost.terminal[1] = 0;
    const auto d = validate(c);
    auto has = [&](const std::string& s) {
        return std::any_of(d.begin(), d.end(),
                           [&](const std::string& x) { return x.find(s) != std::string::npos; });
    };
    CHECK(has("gains not Hurwitz"));
    CHECK(has("1 + 2 = 3"));
    CHECK(has("terminal weights"));
    CHECK(d.size() == 3);
}
