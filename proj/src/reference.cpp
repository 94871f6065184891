#include "fsts/reference.hpp"

#include <algorithm>
#include <limits>

namespace fsts::ref {

double dtw_full_matrix(const float* a, size_t n, const float* b, size_t m) {
  if (n == 0 || m == 0) throw InputError("dtw: series must be non-empty");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp((n + 1) * (m + 1), inf);
  dp[0] = 0.0;
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const double cost = std::abs(static_cast<double>(a[i - 1]) - static_cast<double>(b[j - 1]));
      const double best = std::min({dp[(i - 1) * (m + 1) + j], dp[i * (m + 1) + j - 1],
                                    dp[(i - 1) * (m + 1) + j - 1]});
      dp[i * (m + 1) + j] = cost + best;
    }
  }
  return dp[n * (m + 1) + m];
}

}  // namespace fsts::ref
