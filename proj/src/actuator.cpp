#include "mes/actuator.hpp"

#include <cmath>
#include <stdexcept>

#include "mes/errors.hpp"

namespace mes {

namespace {

double gap_or_throw(const PlantParams& p, double x_a, double t) {
    const double gap = p.b_coil + x_a;
    if (!(gap > 0.0))
        throw NonFiniteState(t, "armature reached the coil singularity (b + x_a <= 0)");
    return gap;
}

double acceleration(const PlantParams& p, double k, double eta, const PlantState& s) {
    const double gap = p.b_coil + s.x_a;
    const double emf = p.a_coil * s.i * s.i / (2.0 * gap * gap);
    return (k * (p.x0_spring - s.x_a) - eta * s.v - emf) / p.m;
}

} // namespace

UncertaintyBounds default_bounds(const PlantParams& p) {
    return {0.1 * p.k_nominal, 0.1 * p.eta_nominal};
}

TrueDisturbance default_disturbance(const UncertaintyBounds& b) {
    return {b.delta_k_max, -b.delta_eta_max};
}

StateVector<3> true_dynamics(const PlantParams& p, const TrueDisturbance& d, const PlantState& s,
                             double u, double t) {
    const double gap = gap_or_throw(p, s.x_a, t);
    const double acc = acceleration(p, p.k_nominal + d.delta_k, p.eta_nominal + d.delta_eta, s);
    const double di = (u - p.R * s.i + p.a_coil * s.i * s.v / (gap * gap)) * gap / p.a_coil;
    return {s.v, acc, di};
}

double nominal_acceleration(const PlantParams& p, const PlantState& s) {
    return acceleration(p, p.k_nominal, p.eta_nominal, s);
}

double true_acceleration(const PlantParams& p, const TrueDisturbance& d, const PlantState& s) {
    return acceleration(p, p.k_nominal + d.delta_k, p.eta_nominal + d.delta_eta, s);
}

LinearizedTerms linearized_terms(const PlantParams& p, const PlantState& s, double acc,
                                 double i_min) {
    if (std::abs(s.i) < i_min)
        throw CurrentSingularity(s.i);
    const double gap = gap_or_throw(p, s.x_a, 0.0);
    LinearizedTerms out;
    out.b_term = -p.k_nominal / p.m * s.v - p.eta_nominal / p.m * acc +
                 p.R * s.i * s.i / (gap * p.m);
    out.A_term = -s.i / (p.m * gap);
    return out;
}

LinearizedTerms linearized_terms(const PlantParams& p, const PlantState& s) {
    return linearized_terms(p, s, nominal_acceleration(p, s));
}

double d2_bound(const UncertaintyBounds& b, const PlantParams& p, const PlantState& s, double acc) {
    return b.delta_k_max / p.m * std::abs(s.v) + b.delta_eta_max / p.m * std::abs(acc);
}

double d2_bound(const UncertaintyBounds& b, const PlantParams& p, const PlantState& s) {
    return d2_bound(b, p, s, nominal_acceleration(p, s));
}

double force_balance_current(const PlantParams& p, const TrueDisturbance& d, double x_a, double v) {
    const double gap = p.b_coil + x_a;
    const double force = (p.k_nominal + d.delta_k) * (p.x0_spring - x_a) -
                         (p.eta_nominal + d.delta_eta) * v;
    if (!(gap > 0.0) || force < 0.0)
        throw std::invalid_argument("force_balance_current: no balancing current at this state");
    return std::sqrt(2.0 * gap * gap * force / p.a_coil);
}

double equilibrium_current(const PlantParams& p) {
    return force_balance_current(p, TrueDisturbance{}, 0.0, 0.0);
}

} // namespace mes
