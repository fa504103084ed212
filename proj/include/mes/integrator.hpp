#pragma once

// Fixed-step classical Runge-Kutta (order 4).
//
// States are std::array<T, N> (T = double unless stated); a vector field is
// any callable (T t, const State&) -> State. Everything here is a pure
// function of its arguments, so independent integrations may run on separate
// threads.

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "mes/errors.hpp"

namespace mes {

template <std::size_t N, class T = double> using StateVector = std::array<T, N>;

template <class F, std::size_t N, class T = double>
concept VectorField = requires(const F& f, T t, const StateVector<N, T>& x) {
    { f(t, x) } -> std::convertible_to<StateVector<N, T>>;
};

template <class T = double> struct BasicIntegrationConfig {
    T dt = T(1e-5);
    T t_start = T(0);
    T t_end = T(1);
};

using IntegrationConfig = BasicIntegrationConfig<double>;

template <std::size_t N, class T> bool all_finite(const StateVector<N, T>& x) {
    for (const T& v : x)
        if (!std::isfinite(v))
            return false;
    return true;
}

namespace detail {

template <std::size_t N, class T>
StateVector<N, T> axpy(const StateVector<N, T>& x, T a, const StateVector<N, T>& k) {
    StateVector<N, T> out;
    for (std::size_t j = 0; j < N; ++j)
        out[j] = x[j] + a * k[j];
    return out;
}

template <std::size_t N, class T>
void require_finite(const StateVector<N, T>& k, T t, const char* what) {
    if (!all_finite(k))
        throw NonFiniteState(static_cast<double>(t), what);
}

} // namespace detail

// One RK4 step of size dt from (t, x). Throws NonFiniteState if any stage
// evaluation or the result is not finite.
template <std::size_t N, class T = double, VectorField<N, T> F>
StateVector<N, T> rk4_step(const F& field, T t, const StateVector<N, T>& x, T dt) {
    if (!(dt > T(0)))
        throw std::invalid_argument("rk4_step: dt must be positive");
    detail::require_finite(x, t, "non-finite state");
    const T h2 = dt / 2;
    const StateVector<N, T> k1 = field(t, x);
    detail::require_finite(k1, t, "non-finite derivative (stage 1)");
    const StateVector<N, T> k2 = field(t + h2, detail::axpy(x, h2, k1));
    detail::require_finite(k2, t + h2, "non-finite derivative (stage 2)");
    const StateVector<N, T> k3 = field(t + h2, detail::axpy(x, h2, k2));
    detail::require_finite(k3, t + h2, "non-finite derivative (stage 3)");
    const StateVector<N, T> k4 = field(t + dt, detail::axpy(x, dt, k3));
    detail::require_finite(k4, t + dt, "non-finite derivative (stage 4)");
    StateVector<N, T> out;
    const T h6 = dt / 6;
    for (std::size_t j = 0; j < N; ++j)
        out[j] = x[j] + h6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    detail::require_finite(out, t + dt, "non-finite state after step");
    return out;
}

// Number of steps covering [t_start, t_end]. A span within 1e-9 (relative)
// of a whole number of steps uses that number; otherwise the last step is
// shortened.
template <class T> std::int64_t step_count(const BasicIntegrationConfig<T>& cfg) {
    if (!(cfg.dt > T(0)) || !(cfg.t_end > cfg.t_start))
        throw std::invalid_argument("IntegrationConfig: need dt > 0 and t_end > t_start");
    const T ratio = (cfg.t_end - cfg.t_start) / cfg.dt;
    if (!(ratio < static_cast<T>(std::numeric_limits<std::int64_t>::max() / 2)))
        throw std::invalid_argument("IntegrationConfig: step count out of range");
    const T nearest = std::round(ratio);
    if (std::abs(ratio - nearest) <= T(1e-9) * std::max(T(1), ratio))
        return std::max<std::int64_t>(1, static_cast<std::int64_t>(nearest));
    return static_cast<std::int64_t>(std::ceil(ratio));
}

// Grid times are computed from the index, not accumulated, and the final
// point is exactly t_end.
template <class T>
T grid_time(const BasicIntegrationConfig<T>& cfg, std::int64_t k, std::int64_t n) {
    if (k >= n)
        return cfg.t_end;
    return cfg.t_start + static_cast<T>(k) * cfg.dt;
}

// Integrates from t_start to t_end. The observer is called with (t, x) at
// every grid point, t_start and t_end included.
template <std::size_t N, class T = double, VectorField<N, T> F, class Observer>
StateVector<N, T> integrate(const F& field, const StateVector<N, T>& x0,
                            const BasicIntegrationConfig<T>& cfg, Observer&& observer) {
    const std::int64_t n = step_count(cfg);
    StateVector<N, T> x = x0;
    T t = cfg.t_start;
    observer(t, x);
    for (std::int64_t k = 0; k < n; ++k) {
        const T t_next = grid_time(cfg, k + 1, n);
        x = rk4_step<N, T>(field, t, x, t_next - t);
        t = t_next;
        observer(t, x);
    }
    return x;
}

template <std::size_t N, class T = double, VectorField<N, T> F>
StateVector<N, T> integrate(const F& field, const StateVector<N, T>& x0,
                            const BasicIntegrationConfig<T>& cfg) {
    return integrate<N, T>(field, x0, cfg, [](T, const StateVector<N, T>&) {});
}

} // namespace mes
