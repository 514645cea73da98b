#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <utility>

namespace curvrig {

struct AdaptiveTolerance {
  double rtol = 1e-10;
  double atol = 1e-12;
  int max_steps = 1'000'000;
};

/// Outcome of one adaptive integration segment.
enum class SegmentStatus { reached, aborted, step_underflow, step_limit };

/// Embedded Dormand-Prince 5(4) integrator with standard PI-free step
/// control. `abort(t, y)` is checked after every accepted step; the
/// integration stops with the last accepted state when it returns true.
template <std::size_t N>
class DormandPrince {
 public:
  using State = std::array<double, N>;

  explicit DormandPrince(AdaptiveTolerance tol) : tol_(tol) {}

  /// Advances (t, y) to t_end. `h` carries the step-size guess between
  /// calls so consecutive segments reuse the controller state.
  template <class Rhs, class Abort>
  SegmentStatus integrate(Rhs&& f, Abort&& abort, double& t, State& y, double t_end, double& h) {
    const double dir = t_end >= t ? 1.0 : -1.0;
    if (h <= 0.0) h = 1e-3 * std::abs(t_end - t);
    int steps = 0;
    while (dir * (t_end - t) > 0.0) {
      if (++steps > tol_.max_steps) return SegmentStatus::step_limit;
      const bool last = h >= std::abs(t_end - t);
      const double step = last ? std::abs(t_end - t) : h;
      State y5{};
      State err{};
      attempt(f, t, y, dir * step, y5, err);
      double e = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double sc = tol_.atol + tol_.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
        e = std::max(e, std::abs(err[i]) / sc);
      }
      if (!std::isfinite(e)) e = 1e10;
      if (e <= 1.0) {
        t = last ? t_end : t + dir * step;
        y = y5;
        if (abort(t, y)) return SegmentStatus::aborted;
      }
      const double factor = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
      if (e <= 1.0 && last) {
        // Keep the controller's estimate rather than the clipped final step.
        h = std::max(h, step * factor);
      } else {
        h = step * factor;
      }
      if (h < 1e-14 * std::max(1.0, std::abs(t))) return SegmentStatus::step_underflow;
    }
    return SegmentStatus::reached;
  }

 private:
  template <class Rhs>
  static void attempt(Rhs& f, double t, const State& y, double h, State& y5, State& err) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const auto comb = [&](std::initializer_list<std::pair<double, const State*>> terms) {
      State out = y;
      for (const auto& [c, k] : terms) {
        for (std::size_t i = 0; i < N; ++i) out[i] += h * c * (*k)[i];
      }
      return out;
    };
    const State k1 = f(t, y);
    const State k2 = f(t + c2 * h, comb({{a21, &k1}}));
    const State k3 = f(t + c3 * h, comb({{a31, &k1}, {a32, &k2}}));
    const State k4 = f(t + c4 * h, comb({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State k5 = f(t + c5 * h, comb({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State k6 = f(t + h, comb({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    y5 = comb({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const State k7 = f(t + h, y5);
    for (std::size_t i = 0; i < N; ++i) {
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }
  }

  AdaptiveTolerance tol_;
};

}  // namespace curvrig
