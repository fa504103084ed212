#pragma once

// Electromagnetic actuator: armature on a spring, pulled back by a coil.
//
//   m x'' = k (x0 - x) - eta x' - a i^2 / (2 (b + x)^2)
//   u     = R i + a/(b + x) di/dt - a i x' / (b + x)^2
//
// All quantities are SI. k and eta used by the plant are nominal + disturbance;
// the controller only ever sees the nominal values.

#include <cmath>

#include "mes/integrator.hpp"

namespace mes {

inline constexpr double kDefaultCurrentGuard = 1e-3; // A

struct PlantParams {
    double m = 0.27;            // kg
    double R = 6.0;             // ohm
    double eta_nominal = 7.53;  // kg/s
    double x0_spring = 8e-3;    // m
    double k_nominal = 1.58e5;  // N/m
    double a_coil = 14.96e-6;   // N m^2 / A^2
    double b_coil = 4e-5;       // m
    double x_f = 0.5e-3;        // m, end of stroke
};

struct TrueDisturbance {
    double delta_k = 0.0;   // N/m
    double delta_eta = 0.0; // kg/s
};

struct UncertaintyBounds {
    double delta_k_max = 0.0;   // N/m
    double delta_eta_max = 0.0; // kg/s

    bool contains(const TrueDisturbance& d) const {
        return std::abs(d.delta_k) <= delta_k_max && std::abs(d.delta_eta) <= delta_eta_max;
    }
};

// Default bounds are 10% of the nominal spring and damping coefficients.
UncertaintyBounds default_bounds(const PlantParams& p);
// Worst corner used by the reference campaign: stiffer spring, less damping.
TrueDisturbance default_disturbance(const UncertaintyBounds& b);

struct PlantState {
    double x_a = 0.0; // m
    double v = 0.0;   // m/s
    double i = 0.0;   // A

    StateVector<3> to_vector() const { return {x_a, v, i}; }
    static PlantState from_vector(const StateVector<3>& x) { return {x[0], x[1], x[2]}; }
};

struct LinearizedTerms {
    double b_term = 0.0; // m/s^3
    double A_term = 0.0; // m/s^3 per volt
};

// Time derivative of (x_a, v, i) under the true spring/damping. The time
// argument only labels the error raised at b + x_a <= 0.
StateVector<3> true_dynamics(const PlantParams& p, const TrueDisturbance& d, const PlantState& s,
                             double u, double t = 0.0);

double nominal_acceleration(const PlantParams& p, const PlantState& s);
double true_acceleration(const PlantParams& p, const TrueDisturbance& d, const PlantState& s);

// b and A of x_a''' = b + A*u, evaluated with the supplied acceleration signal.
// Throws CurrentSingularity when |i| < i_min.
LinearizedTerms linearized_terms(const PlantParams& p, const PlantState& s, double acceleration,
                                 double i_min = kDefaultCurrentGuard);
LinearizedTerms linearized_terms(const PlantParams& p, const PlantState& s);

// d2 = (dk_max/m)|v| + (deta_max/m)|acceleration|
double d2_bound(const UncertaintyBounds& b, const PlantParams& p, const PlantState& s,
                double acceleration);
double d2_bound(const UncertaintyBounds& b, const PlantParams& p, const PlantState& s);

// Current at which the true forces on the armature balance at (x_a, v).
double force_balance_current(const PlantParams& p, const TrueDisturbance& d, double x_a, double v);

// Nominal resting current at x_a = 0.
double equilibrium_current(const PlantParams& p);

inline bool in_stroke(const PlantParams& p, double x_a) { return x_a >= 0.0 && x_a <= p.x_f; }

} // namespace mes
