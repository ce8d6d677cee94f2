#pragma once

// Central finite-difference oracle. Lives in test code only and evaluates the
// objective through plain forward passes, independent of Tape::backward.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "gaitvib/core/param_store.hpp"

namespace gaitvib::testing {

inline std::vector<double> central_differences(const std::function<double(const num::ParamStore&)>& f,
                                               num::ParamStore params, double h = 1e-5) {
  std::vector<double> g(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double x = params.values()[i];
    params.values()[i] = x + h;
    const double fp = f(params);
    params.values()[i] = x - h;
    const double fm = f(params);
    params.values()[i] = x;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor). The floor keeps components
/// whose true gradient is ~0 from dominating through round-off.
inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b,
                                 double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

}  // namespace gaitvib::testing
