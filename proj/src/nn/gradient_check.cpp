#include "deepref/nn/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "deepref/error.hpp"

namespace deepref::nn {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradientCheckResult gradient_check(const std::function<double()>& loss, std::span<Tensor> params,
                                   std::span<const Tensor> analytic, double h, std::size_t stride) {
  if (params.size() != analytic.size()) throw UsageError("gradient check: tensor count mismatch");
  if (stride == 0) stride = 1;
  GradientCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k].data;
    if (p.size() != analytic[k].data.size()) throw UsageError("gradient check: shape mismatch");
    for (std::size_t j = 0; j < p.size(); j += stride) {
      const double saved = p[j];
      p[j] = saved + h;
      const double up = loss();
      p[j] = saved - h;
      const double down = loss();
      p[j] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = relative_error(analytic[k].data[j], numeric);
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_tensor = k;
        result.worst_index = j;
      }
      ++result.checked;
    }
  }
  return result;
}

}  // namespace deepref::nn
