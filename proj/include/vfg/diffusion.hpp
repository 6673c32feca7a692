// Closed-form diffusion math: noise schedules, forward noising, deterministic
// DDIM stepping and its algebraic inverse, subsampled step schedules.
#pragma once

#include <cmath>
#include <type_traits>
#include <vector>

#include "vfg/common.hpp"

namespace vfg {

struct NoiseSchedule {
    int T = 0;
    std::vector<double> beta;       // beta[i] is the i+1'th step, size T
    std::vector<double> alpha_bar;  // cumulative product, size T+1, alpha_bar[0] = 1

    double alpha_bar_at(int t) const {
        check(t >= 0 && t <= T, "t-out-of-range",
              "timestep " + std::to_string(t) + " outside [0, " + std::to_string(T) + "]");
        return alpha_bar[static_cast<std::size_t>(t)];
    }
};

inline NoiseSchedule linear_beta_schedule(int T, double beta_start = 1e-4,
                                          double beta_end = 0.02) {
    check(T >= 1, "invalid-schedule", "T must be >= 1");
    check(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0, "invalid-schedule",
          "need 0 < beta_start <= beta_end < 1");
    NoiseSchedule s;
    s.T = T;
    s.beta.resize(static_cast<std::size_t>(T));
    s.alpha_bar.resize(static_cast<std::size_t>(T) + 1);
    s.alpha_bar[0] = 1.0;
    for (int t = 1; t <= T; ++t) {
        double frac = (T == 1) ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(T - 1);
        double b = beta_start + (beta_end - beta_start) * frac;
        s.beta[static_cast<std::size_t>(t - 1)] = b;
        s.alpha_bar[static_cast<std::size_t>(t)] =
            s.alpha_bar[static_cast<std::size_t>(t - 1)] * (1.0 - b);
    }
    return s;
}

struct StepSchedule {
    std::vector<int> t;  // strictly increasing, t.front() = 0, t.back() = T

    int segments() const { return static_cast<int>(t.size()) - 1; }
};

// Evenly spaced subsequence of {0..T} with both endpoints, round-to-nearest.
inline StepSchedule make_step_schedule(int T, int num_steps) {
    check(num_steps >= 1 && num_steps <= T, "invalid-schedule",
          "num_steps must lie in [1, T]");
    std::vector<int> t;
    t.reserve(static_cast<std::size_t>(num_steps) + 1);
    for (int k = 0; k <= num_steps; ++k) {
        double pos = static_cast<double>(T) * static_cast<double>(k) / num_steps;
        int v = static_cast<int>(std::llround(pos));
        if (!t.empty() && v <= t.back()) v = t.back() + 1;  // collapse+shift guard
        t.push_back(v);
    }
    t.front() = 0;
    t.back() = T;
    for (std::size_t i = 1; i < t.size(); ++i)
        check(t[i] > t[i - 1], "invalid-schedule", "step schedule not strictly increasing");
    return StepSchedule{std::move(t)};
}

namespace detail {
// scalar type of an image container (Eigen expression or plain arithmetic)
template <class A, class = void>
struct scalar_of {
    using type = typename A::Scalar;
};
template <class A>
struct scalar_of<A, std::enable_if_t<std::is_arithmetic_v<A>>> {
    using type = A;
};
template <class A>
using scalar_t = typename scalar_of<A>::type;
}  // namespace detail

// x_t = sqrt(ab_t) x0 + sqrt(1-ab_t) eps.  t = 0 is the identity endpoint.
template <class A>
A q_sample(const A& x0, int t, const A& eps, const NoiseSchedule& s) {
    using S = detail::scalar_t<A>;
    double ab = s.alpha_bar_at(t);
    return static_cast<S>(std::sqrt(ab)) * x0 + static_cast<S>(std::sqrt(1.0 - ab)) * eps;
}

// Deterministic (eta = 0) DDIM update from t down to t_prev.
template <class A>
A ddim_step(const A& x_t, const A& eps_pred, int t, int t_prev, const NoiseSchedule& s) {
    using S = detail::scalar_t<A>;
    check(t > t_prev && t_prev >= 0, "invalid-step", "ddim_step requires t > t_prev >= 0");
    double ab_t = s.alpha_bar_at(t);
    double ab_p = s.alpha_bar_at(t_prev);
    // x0_pred then re-noise to t_prev with the same predicted eps
    A x0_pred = static_cast<S>(1.0 / std::sqrt(ab_t)) *
                (x_t - static_cast<S>(std::sqrt(1.0 - ab_t)) * eps_pred);
    return static_cast<S>(std::sqrt(ab_p)) * x0_pred +
           static_cast<S>(std::sqrt(1.0 - ab_p)) * eps_pred;
}

// Exact inverse of ddim_step under a shared eps_pred: t_prev up to t.
template <class A>
A ddim_invert_step(const A& x_tprev, const A& eps_pred, int t_prev, int t,
                   const NoiseSchedule& s) {
    using S = detail::scalar_t<A>;
    check(t > t_prev && t_prev >= 0, "invalid-step",
          "ddim_invert_step requires t > t_prev >= 0");
    double ab_t = s.alpha_bar_at(t);
    double ab_p = s.alpha_bar_at(t_prev);
    A x0_pred = static_cast<S>(1.0 / std::sqrt(ab_p)) *
                (x_tprev - static_cast<S>(std::sqrt(1.0 - ab_p)) * eps_pred);
    return static_cast<S>(std::sqrt(ab_t)) * x0_pred +
           static_cast<S>(std::sqrt(1.0 - ab_t)) * eps_pred;
}

}  // namespace vfg
