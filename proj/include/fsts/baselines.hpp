#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fsts/episodes.hpp"
#include "fsts/timeseries.hpp"

namespace fsts {

// Distance family for the 1-NN baselines. Euclidean needs equal lengths;
// dynamic time warping does not and may carry a Sakoe-Chiba band.
struct DistanceKind {
  enum class Family { euclidean, dtw } family = Family::euclidean;
  std::optional<int64_t> window;  // dtw only

  static DistanceKind euclidean() { return {Family::euclidean, std::nullopt}; }
  static DistanceKind dtw(std::optional<int64_t> window = std::nullopt) {
    return {Family::dtw, window};
  }
  std::string name() const { return family == Family::euclidean ? "ED" : "DTW"; }
};

double euclidean_distance(std::span<const float> a, std::span<const float> b);

// Dynamic time warping with |a_i - b_j| local cost and steps (i-1,j),
// (i,j-1), (i-1,j-1). Two-row DP, O(n*m) time, O(min(n,m)) memory.
double dtw_distance(std::span<const float> a, std::span<const float> b,
                    std::optional<int64_t> window = std::nullopt);

struct LabeledSeriesView {
  std::span<const float> values;
  int32_t label = 0;
};

// Label of the minimum-distance support element; ties go to the lowest
// support index.
int32_t one_nn_classify(const std::vector<LabeledSeriesView>& support,
                        std::span<const float> query, const DistanceKind& distance);

// Episodic evaluation under a classical distance. Tasks are sampled with
// the same seed derivation as the network evaluation, so the same master
// seed compares all models on identical tasks. Euclidean runs on the padded
// vectors; DTW runs on the unpadded prefixes.
EvalResult evaluate_baseline(const Dataset& dataset, const DistanceKind& distance,
                             int64_t n_way, int64_t k_shot, int64_t q_queries,
                             int64_t n_tasks, uint64_t seed);

}  // namespace fsts
