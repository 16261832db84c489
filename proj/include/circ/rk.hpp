#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace circ::rk {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
Vec<N> axpy(const Vec<N>& y, double a, const Vec<N>& x) {
  Vec<N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + a * x[i];
  return out;
}

/// One step of the classic 4th-order Runge–Kutta method.
/// f(t, y) -> dy/dt, both as Vec<N>.
template <std::size_t N, class Rhs>
Vec<N> rk4_step(Rhs&& f, double t, const Vec<N>& y, double dt) {
  const Vec<N> k1 = f(t, y);
  const Vec<N> k2 = f(t + 0.5 * dt, axpy(y, 0.5 * dt, k1));
  const Vec<N> k3 = f(t + 0.5 * dt, axpy(y, 0.5 * dt, k2));
  const Vec<N> k4 = f(t + dt, axpy(y, dt, k3));
  Vec<N> out;
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = y[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

template <std::size_t N>
struct EmbeddedResult {
  Vec<N> y;         ///< 5th-order solution
  double err_norm;  ///< scaled error estimate; accept when <= 1
};

/// One trial step of the Dormand–Prince 5(4) embedded pair. The error norm is
/// the RMS of the componentwise error scaled by atol + rtol·max(|y|, |y_new|).
template <std::size_t N, class Rhs>
EmbeddedResult<N> dp54_step(Rhs&& f, double t, const Vec<N>& y, double dt, double atol,
                            double rtol) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  const Vec<N> k1 = f(t, y);
  Vec<N> tmp;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + dt * (1.0 / 5) * k1[i];
  const Vec<N> k2 = f(t + c2 * dt, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + dt * (3.0 / 40 * k1[i] + 9.0 / 40 * k2[i]);
  const Vec<N> k3 = f(t + c3 * dt, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + dt * (44.0 / 45 * k1[i] - 56.0 / 15 * k2[i] + 32.0 / 9 * k3[i]);
  const Vec<N> k4 = f(t + c4 * dt, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + dt * (19372.0 / 6561 * k1[i] - 25360.0 / 2187 * k2[i] +
                          64448.0 / 6561 * k3[i] - 212.0 / 729 * k4[i]);
  const Vec<N> k5 = f(t + c5 * dt, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + dt * (9017.0 / 3168 * k1[i] - 355.0 / 33 * k2[i] + 46732.0 / 5247 * k3[i] +
                          49.0 / 176 * k4[i] - 5103.0 / 18656 * k5[i]);
  const Vec<N> k6 = f(t + dt, tmp);

  EmbeddedResult<N> res;
  for (std::size_t i = 0; i < N; ++i) {
    res.y[i] = y[i] + dt * (35.0 / 384 * k1[i] + 500.0 / 1113 * k3[i] + 125.0 / 192 * k4[i] -
                            2187.0 / 6784 * k5[i] + 11.0 / 84 * k6[i]);
  }
  const Vec<N> k7 = f(t + dt, res.y);

  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double y4 = y[i] + dt * (5179.0 / 57600 * k1[i] + 7571.0 / 16695 * k3[i] +
                                   393.0 / 640 * k4[i] - 92097.0 / 339200 * k5[i] +
                                   187.0 / 2100 * k6[i] + 1.0 / 40 * k7[i]);
    const double scale = atol + rtol * std::max(std::abs(y[i]), std::abs(res.y[i]));
    const double e = (res.y[i] - y4) / scale;
    acc += e * e;
  }
  res.err_norm = std::sqrt(acc / static_cast<double>(N));
  return res;
}

}  // namespace circ::rk
