#include "fsts/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fsts/errors.hpp"

namespace fsts {

double euclidean_distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw InputError("euclidean distance needs equal lengths, got " +
                     std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double acc = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

double dtw_distance(std::span<const float> a, std::span<const float> b,
                    std::optional<int64_t> window) {
  if (a.empty() || b.empty()) throw InputError("dtw: series must be non-empty");
  // Keep the shorter series on the inner axis so memory is O(min(n,m)).
  if (a.size() < b.size()) std::swap(a, b);
  const int64_t n = static_cast<int64_t>(a.size());
  const int64_t m = static_cast<int64_t>(b.size());
  if (window) {
    if (*window < 0) throw ConfigError("dtw: window must be non-negative");
    if (*window < n - m) {
      throw ConfigError("dtw: window " + std::to_string(*window) +
                        " cannot connect series of lengths " + std::to_string(n) + " and " +
                        std::to_string(m));
    }
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(static_cast<size_t>(m) + 1, inf);
  std::vector<double> cur(static_cast<size_t>(m) + 1, inf);
  prev[0] = 0.0;
  for (int64_t i = 1; i <= n; ++i) {
    std::fill(cur.begin(), cur.end(), inf);
    int64_t lo = 1, hi = m;
    if (window) {
      lo = std::max<int64_t>(1, i - *window);
      hi = std::min<int64_t>(m, i + *window);
    }
    for (int64_t j = lo; j <= hi; ++j) {
      const double cost = std::abs(static_cast<double>(a[static_cast<size_t>(i - 1)]) -
                                   static_cast<double>(b[static_cast<size_t>(j - 1)]));
      const double best = std::min(prev[static_cast<size_t>(j)],        // (i-1, j)
                                   std::min(cur[static_cast<size_t>(j - 1)],   // (i, j-1)
                                            prev[static_cast<size_t>(j - 1)])); // (i-1, j-1)
      cur[static_cast<size_t>(j)] = cost + best;
    }
    std::swap(prev, cur);
  }
  return prev[static_cast<size_t>(m)];
}

int32_t one_nn_classify(const std::vector<LabeledSeriesView>& support,
                        std::span<const float> query, const DistanceKind& distance) {
  if (support.empty()) throw InputError("1-NN: empty support set");
  double best = std::numeric_limits<double>::infinity();
  int32_t best_label = support.front().label;
  for (const LabeledSeriesView& s : support) {
    const double d = distance.family == DistanceKind::Family::euclidean
                         ? euclidean_distance(s.values, query)
                         : dtw_distance(s.values, query, distance.window);
    if (d < best) {  // strict: first minimum (lowest index) wins ties
      best = d;
      best_label = s.label;
    }
  }
  return best_label;
}

namespace {

std::span<const float> series_view(const Dataset& ds, int64_t index, bool unpadded) {
  const TimeSeries& ts = ds.series[static_cast<size_t>(index)];
  if (unpadded) return {ts.values.data(), static_cast<size_t>(ts.original_length)};
  return {ts.values.data(), ts.values.size()};
}

}  // namespace

EvalResult evaluate_baseline(const Dataset& dataset, const DistanceKind& distance,
                             int64_t n_way, int64_t k_shot, int64_t q_queries,
                             int64_t n_tasks, uint64_t seed) {
  if (n_tasks < 1) throw ConfigError("evaluate_baseline: n_tasks must be >= 1");
  const bool unpadded = distance.family == DistanceKind::Family::dtw;
  EvalResult result;
  result.per_task.resize(static_cast<size_t>(n_tasks));
  for (int64_t ti = 0; ti < n_tasks; ++ti) {
    const FewShotTask task =
        sample_task(dataset, n_way, k_shot, q_queries, derive_task_seed(seed, ti));
    std::vector<LabeledSeriesView> support;
    support.reserve(task.support.size());
    for (size_t s = 0; s < task.support.size(); ++s) {
      const int32_t slot = static_cast<int32_t>(s / static_cast<size_t>(k_shot));
      support.push_back({series_view(dataset, task.support[s], unpadded), slot});
    }
    const int64_t n_queries = task.n_way * task.q_queries;
    std::vector<int32_t> predicted(static_cast<size_t>(n_queries), 0);
#pragma omp parallel for schedule(dynamic)
    for (int64_t qi = 0; qi < n_queries; ++qi) {
      predicted[static_cast<size_t>(qi)] = one_nn_classify(
          support, series_view(dataset, task.query[static_cast<size_t>(qi)], unpadded),
          distance);
    }
    result.per_task[static_cast<size_t>(ti)] = metrics_from_predictions(task, predicted);
  }
  result.mean = mean_metrics(result.per_task);
  return result;
}

}  // namespace fsts
