#pragma once

#include <doctest.h>

#include "curvrig/quotient.hpp"

namespace test_support {

/// estimate_Q with the suite-wide bound value ≤ 1.02 Q(Sⁿ) asserted.
inline curvrig::QuotientEstimate estimate_Q_checked(const curvrig::DiscreteDomain& domain,
                                                    const curvrig::ScalarField& R_bar,
                                                    const curvrig::QuotientParams& params = {}) {
  auto est = curvrig::estimate_Q(domain, R_bar, params);
  CHECK(est.value <= 1.02 * curvrig::sphere_yamabe_constant(domain.dimension()));
  CHECK(est.value <= est.upper_bound);
  return est;
}

}  // namespace test_support
