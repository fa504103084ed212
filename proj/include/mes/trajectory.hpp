#pragma once

#include <array>

namespace mes {

// Rest-to-rest quintic x_ref(t) = sum_i coeffs[i] * (t/t_f)^i, held at x_f after t_f.
struct ReferenceSpec {
    double t_f = 1.0;
    double x_f = 0.5e-3;
    std::array<double, 6> coeffs{};
};

struct ReferenceSample {
    double pos = 0.0;
    double vel = 0.0;
    double acc = 0.0;
    double jerk = 0.0;
};

// Solves the six boundary conditions (pos/vel/acc at 0 and t_f).
ReferenceSpec build_quintic(double t_f, double x_f);

// Polynomial on [0, t_f] (t_f included), hold sample (x_f, 0, 0, 0) after.
// Time is iteration-local.
ReferenceSample sample(const ReferenceSpec& spec, double t);

} // namespace mes
