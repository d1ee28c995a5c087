#pragma once

#include <cmath>
#include <vector>

#include "rnash/core.hpp"

// Fixed-step classical RK4 over Matrix or player-family states.
namespace rnash::rk4 {

inline void axpy(Matrix& y, double a, const Matrix& x) { y += a * x; }

inline void axpy(std::vector<Matrix>& y, double a, const std::vector<Matrix>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline void assign_axpy(Matrix& out, const Matrix& y, double a, const Matrix& x) {
  out = y + a * x;
}

inline void assign_axpy(std::vector<Matrix>& out, const std::vector<Matrix>& y, double a,
                        const std::vector<Matrix>& x) {
  out.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + a * x[i];
}

inline bool finite_below(const Matrix& y, double bound) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double v = y.data()[i];
    if (!(std::abs(v) < bound)) return false;
  }
  return true;
}

inline bool finite_below(const std::vector<Matrix>& y, double bound) {
  for (const Matrix& m : y) {
    if (!finite_below(m, bound)) return false;
  }
  return true;
}

// Calls observe(n, y_n) for n = 0..steps; observe may throw to stop.
// Four state buffers are live at a time (y, accumulator, stage, slope).
template <class State, class Rhs, class Observer>
void integrate(const State& y0, int steps, double h, Rhs&& rhs, Observer&& observe) {
  State y = y0;
  observe(0, y);
  State stage;
  for (int n = 1; n <= steps; ++n) {
    State acc = rhs(y);
    assign_axpy(stage, y, 0.5 * h, acc);
    State k = rhs(stage);
    axpy(acc, 2.0, k);
    assign_axpy(stage, y, 0.5 * h, k);
    k = rhs(stage);
    axpy(acc, 2.0, k);
    assign_axpy(stage, y, h, k);
    k = rhs(stage);
    axpy(acc, 1.0, k);
    axpy(y, h / 6.0, acc);
    observe(n, y);
  }
}

}  // namespace rnash::rk4
