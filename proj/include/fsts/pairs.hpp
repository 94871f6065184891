#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fsts/tensor.hpp"
#include "fsts/timeseries.hpp"

namespace fsts {

// One labeled pair of series indices. label 1 means same class, 0 different.
struct Pair {
  int64_t index_a = 0;
  int64_t index_b = 0;
  uint8_t label = 0;
};

struct PairSet {
  std::string source;  // dataset name the indices refer to
  uint64_t seed = 0;
  std::vector<Pair> pairs;
};

inline constexpr int64_t kDefaultPairCap = 10000;

// Balanced pair generation. Per class with n members: p = min(n*(n-1)/2,
// cap) distinct same-label combinations (subsampled uniformly without
// replacement when capped) and exactly p different-label pairs, each a
// uniform member vs a uniform non-member. Classes with fewer than two
// members contribute nothing.
PairSet generate_pairs(const Dataset& dataset, std::optional<int64_t> cap_per_class,
                       uint64_t seed);

void dump_pairs_csv(const PairSet& ps, std::ostream& out);
void dump_pairs_csv(const PairSet& ps, const std::string& path);

// One batch of pair values ready for the network.
struct PairBatch {
  Tensor side_a;  // [B, l_max]
  Tensor side_b;  // [B, l_max]
  Tensor labels;  // [B], values 0 or 1
};

// Batches pairs drawn from one or more (dataset, pair set) sources, with a
// fresh shuffle per epoch derived from the seed. The final short batch is
// kept.
class PairBatcher {
 public:
  PairBatcher(const std::vector<const Dataset*>& datasets,
              const std::vector<const PairSet*>& pair_sets, int64_t batch_size, uint64_t seed);

  // Single-source convenience.
  PairBatcher(const Dataset& dataset, const PairSet& pair_set, int64_t batch_size,
              uint64_t seed);

  int64_t total_pairs() const { return static_cast<int64_t>(entries_.size()); }
  int64_t batches_per_epoch() const;

  void begin_epoch(int64_t epoch);
  PairBatch batch(int64_t index) const;

 private:
  struct Entry {
    const Dataset* dataset;
    Pair pair;
  };
  std::vector<Entry> entries_;
  std::vector<int64_t> order_;
  int64_t batch_size_;
  int64_t l_max_;
  uint64_t seed_;
};

// Combination index -> (i, j) with i < j, lexicographic order over n items.
std::pair<int64_t, int64_t> unrank_combination(int64_t n, int64_t rank);

}  // namespace fsts
