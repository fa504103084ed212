#pragma once

// Robust input-output linearizing controller for the actuator:
//
//   u = A^-1 (v_s - b) - A^-1 * (dV/dz3) * k * d2
//   v_s = jerk_ref + K3 z3 + K2 z2 + K1 z1
//
// with V = z^T P z and P solving the Lyapunov equation for the companion
// matrix of the current gains.

#include <concepts>
#include <vector>

#include <Eigen/Dense>

#include "mes/actuator.hpp"
#include "mes/stability.hpp"
#include "mes/trajectory.hpp"

namespace mes {

// Where the controller's armature acceleration comes from. `measured` feeds
// the true plant acceleration (an ideal accelerometer); `nominal_model`
// reconstructs it from position, velocity and current with nominal k and eta.
enum class AccelerationSource { measured, nominal_model };

struct ErrorVector {
    double z1 = 0.0; // m
    double z2 = 0.0; // m/s
    double z3 = 0.0; // m/s^2

    Eigen::Vector3d as_vector() const { return {z1, z2, z3}; }
};

struct ControlOutput {
    double u = 0.0;                // V
    double v_s = 0.0;              // m/s^3
    double robust_component = 0.0; // V
    bool in_invariant_set = true;
    ErrorVector z;
    double lyapunov_gradient = 0.0; // dV/dz3
    LinearizedTerms terms;
};

struct ControllerSetup {
    PlantParams params;
    UncertaintyBounds bounds;
    GainSet gains;
    LyapunovData lyapunov;
    double i_min = kDefaultCurrentGuard;
};

ErrorVector tracking_error(const PlantState& s, double acceleration, const ReferenceSample& ref);

double virtual_input(const GainSet& gains, const ErrorVector& z, double ref_jerk);

// Throws CurrentSingularity below i_min and NonHurwitzGains for gains outside
// the Hurwitz set.
ControlOutput robust_control(const ControllerSetup& setup, const PlantState& s,
                             const ReferenceSample& ref, double acceleration);

// Acceleration reconstructed from the nominal model.
ControlOutput robust_control(const ControllerSetup& setup, const PlantState& s,
                             const ReferenceSample& ref);

// Plant + controller as a time-varying vector field on (x_a, v, i).
class ClosedLoopField {
  public:
    ClosedLoopField(ControllerSetup setup, TrueDisturbance disturbance, ReferenceSpec reference,
                    AccelerationSource source);

    StateVector<3> operator()(double t, const StateVector<3>& x) const;

    ControlOutput control(double t, const StateVector<3>& x) const;
    double acceleration_signal(const PlantState& s) const;

    const ControllerSetup& setup() const { return setup_; }
    const ReferenceSpec& reference() const { return reference_; }

  private:
    ControllerSetup setup_;
    TrueDisturbance disturbance_;
    ReferenceSpec reference_;
    AccelerationSource source_;
};

ClosedLoopField closed_loop_field(const ControllerSetup& setup, const TrueDisturbance& disturbance,
                                  const ReferenceSpec& reference,
                                  AccelerationSource source = AccelerationSource::measured);

// Multi-output form of the same law. A plant exposes its linearization
// y^(r) = b(xi) + A(xi) u, a bound d2 on the matched uncertainty, and the
// relative degree of each output.
template <class Plant>
concept IOLinearizablePlant = requires(const Plant& plant, const typename Plant::State& x) {
    { plant.relative_degrees() } -> std::convertible_to<std::vector<int>>;
    { plant.drift(x) } -> std::convertible_to<Eigen::VectorXd>;
    { plant.input_matrix(x) } -> std::convertible_to<Eigen::MatrixXd>;
    { plant.uncertainty_bound(x) } -> std::convertible_to<double>;
};

template <IOLinearizablePlant Plant>
Eigen::VectorXd robust_linearizing_input(const Plant& plant, const typename Plant::State& x,
                                         const Eigen::VectorXd& v_s, const Eigen::MatrixXd& P,
                                         const Eigen::VectorXd& z, double k_robust) {
    const std::vector<int> degrees = plant.relative_degrees();
    const std::vector<int> idx = gradient_indices(degrees);
    const Eigen::VectorXd grad = lyapunov_gradient(P, z, idx);
    const Eigen::MatrixXd A = plant.input_matrix(x);
    const auto lu = A.fullPivLu();
    if (!lu.isInvertible())
        throw SingularSystem("decoupling matrix is singular");
    return lu.solve(v_s - plant.drift(x)) - lu.solve(grad) * (k_robust * plant.uncertainty_bound(x));
}

// The actuator seen through the generic interface (single output, r = 3).
struct ActuatorLinearization {
    using State = PlantState;
    PlantParams params;
    UncertaintyBounds bounds;
    double i_min = kDefaultCurrentGuard;

    std::vector<int> relative_degrees() const { return {3}; }
    Eigen::VectorXd drift(const State& s) const;
    Eigen::MatrixXd input_matrix(const State& s) const;
    double uncertainty_bound(const State& s) const;
};

} // namespace mes
