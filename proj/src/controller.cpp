#include "mes/controller.hpp"

#include <cmath>

#include "mes/errors.hpp"

namespace mes {

ErrorVector tracking_error(const PlantState& s, double acceleration, const ReferenceSample& ref) {
    return {s.x_a - ref.pos, s.v - ref.vel, acceleration - ref.acc};
}

double virtual_input(const GainSet& gains, const ErrorVector& z, double ref_jerk) {
    return ref_jerk + gains.K3 * z.z3 + gains.K2 * z.z2 + gains.K1 * z.z1;
}

ControlOutput robust_control(const ControllerSetup& setup, const PlantState& s,
                             const ReferenceSample& ref, double acceleration) {
    if (!is_hurwitz(setup.gains))
        throw NonHurwitzGains("gains not Hurwitz");
    ControlOutput out;
    out.terms = linearized_terms(setup.params, s, acceleration, setup.i_min);
    out.z = tracking_error(s, acceleration, ref);
    out.v_s = virtual_input(setup.gains, out.z, ref.jerk);

    const Eigen::Matrix3d& P = setup.lyapunov.P;
    out.lyapunov_gradient = 2.0 * P.row(2).dot(out.z.as_vector());
    out.in_invariant_set =
        1.0 - setup.gains.k_robust * std::abs(out.lyapunov_gradient) >= 0.0;

    const double d2 = d2_bound(setup.bounds, setup.params, s, acceleration);
    const double A = out.terms.A_term;
    if (setup.gains.k_robust != 0.0 && d2 != 0.0)
        out.robust_component = -out.lyapunov_gradient * setup.gains.k_robust * d2 / A;
    out.u = (out.v_s - out.terms.b_term) / A + out.robust_component;
    return out;
}

ControlOutput robust_control(const ControllerSetup& setup, const PlantState& s,
                             const ReferenceSample& ref) {
    return robust_control(setup, s, ref, nominal_acceleration(setup.params, s));
}

ClosedLoopField::ClosedLoopField(ControllerSetup setup, TrueDisturbance disturbance,
                                 ReferenceSpec reference, AccelerationSource source)
    : setup_(std::move(setup)), disturbance_(disturbance), reference_(reference), source_(source) {}

double ClosedLoopField::acceleration_signal(const PlantState& s) const {
    return source_ == AccelerationSource::measured
               ? true_acceleration(setup_.params, disturbance_, s)
               : nominal_acceleration(setup_.params, s);
}

ControlOutput ClosedLoopField::control(double t, const StateVector<3>& x) const {
    const PlantState s = PlantState::from_vector(x);
    if (!(setup_.params.b_coil + s.x_a > 0.0))
        throw NonFiniteState(t, "armature reached the coil singularity (b + x_a <= 0)");
    return robust_control(setup_, s, sample(reference_, t), acceleration_signal(s));
}

StateVector<3> ClosedLoopField::operator()(double t, const StateVector<3>& x) const {
    const ControlOutput c = control(t, x);
    return true_dynamics(setup_.params, disturbance_, PlantState::from_vector(x), c.u, t);
}

ClosedLoopField closed_loop_field(const ControllerSetup& setup, const TrueDisturbance& disturbance,
                                  const ReferenceSpec& reference, AccelerationSource source) {
    return ClosedLoopField(setup, disturbance, reference, source);
}

Eigen::VectorXd ActuatorLinearization::drift(const State& s) const {
    Eigen::VectorXd b(1);
    b(0) = linearized_terms(params, s, nominal_acceleration(params, s), i_min).b_term;
    return b;
}

Eigen::MatrixXd ActuatorLinearization::input_matrix(const State& s) const {
    Eigen::MatrixXd A(1, 1);
    A(0, 0) = linearized_terms(params, s, nominal_acceleration(params, s), i_min).A_term;
    return A;
}

double ActuatorLinearization::uncertainty_bound(const State& s) const {
    return d2_bound(bounds, params, s);
}

} // namespace mes
