#include "curvrig/fields.hpp"

#include <algorithm>
#include <cmath>

#include "curvrig/errors.hpp"

namespace curvrig {

bool ScalarField::all_finite() const noexcept {
  return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

ConformalFactor ConformalFactor::power(int n, std::vector<double> u) {
  if (n < 3) {
    throw InputError("power convention requires n >= 3, got n = " + std::to_string(n));
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0) || !std::isfinite(u[i])) {
      throw DomainError("conformal factor must be positive and finite (node " + std::to_string(i) +
                        ")");
    }
  }
  return {n, Convention::power, std::move(u)};
}

ConformalFactor ConformalFactor::exponential(std::vector<double> w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i])) {
      throw DomainError("log conformal factor must be finite (node " + std::to_string(i) + ")");
    }
  }
  return {2, Convention::exponential, std::move(w)};
}

}  // namespace curvrig
