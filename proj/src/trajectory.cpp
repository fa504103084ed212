#include "mes/trajectory.hpp"

#include <stdexcept>

#include <Eigen/Dense>

namespace mes {

ReferenceSpec build_quintic(double t_f, double x_f) {
    if (!(t_f > 0.0))
        throw std::invalid_argument("build_quintic: t_f must be positive");

    // Unknowns are the coefficients in normalized time s = t/t_f; the rows are
    // p(0), p'(0), p''(0), p(1), p'(1), p''(1). Derivatives in t only rescale
    // the right-hand side, which is zero for them.
    Eigen::Matrix<double, 6, 6> M = Eigen::Matrix<double, 6, 6>::Zero();
    M(0, 0) = 1.0;
    M(1, 1) = 1.0;
    M(2, 2) = 2.0;
    for (int i = 0; i < 6; ++i) {
        M(3, i) = 1.0;
        M(4, i) = i;
        M(5, i) = i * (i - 1);
    }
    Eigen::Matrix<double, 6, 1> rhs;
    rhs << 0.0, 0.0, 0.0, x_f, 0.0, 0.0;
    const Eigen::Matrix<double, 6, 1> a = M.fullPivLu().solve(rhs);

    ReferenceSpec spec;
    spec.t_f = t_f;
    spec.x_f = x_f;
    for (int i = 0; i < 6; ++i)
        spec.coeffs[static_cast<std::size_t>(i)] = a(i);
    return spec;
}

ReferenceSample sample(const ReferenceSpec& spec, double t) {
    if (t > spec.t_f)
        return {spec.x_f, 0.0, 0.0, 0.0};
    const auto& a = spec.coeffs;
    const double s = t / spec.t_f;
    const double T = spec.t_f;
    // Horner in s for each derivative.
    const double pos = a[0] + s * (a[1] + s * (a[2] + s * (a[3] + s * (a[4] + s * a[5]))));
    const double d1 = a[1] + s * (2 * a[2] + s * (3 * a[3] + s * (4 * a[4] + s * 5 * a[5])));
    const double d2 = 2 * a[2] + s * (6 * a[3] + s * (12 * a[4] + s * 20 * a[5]));
    const double d3 = 6 * a[3] + s * (24 * a[4] + s * 60 * a[5]);
    return {pos, d1 / T, d2 / (T * T), d3 / (T * T * T)};
}

} // namespace mes
