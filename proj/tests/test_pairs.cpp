#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "fsts/pairs.hpp"
#include "fsts/rng.hpp"
#include "support/synthetic.hpp"

using namespace fsts;

namespace {

Dataset tiny_dataset(const std::vector<int>& class_sizes, int64_t l_max = 8) {
  Dataset ds;
  ds.name = "tiny";
  ds.l_max = l_max;
  for (size_t c = 0; c < class_sizes.size(); ++c) {
    ds.label_names.push_back(std::to_string(c));
    for (int s = 0; s < class_sizes[c]; ++s) {
      TimeSeries ts;
      ts.values.assign(static_cast<size_t>(l_max), 0.0f);
      ts.values[0] = static_cast<float>(c) * 0.1f;
      ts.values[1] = static_cast<float>(ds.series.size()) * 0.01f;  // unique per series
      ts.original_length = 2;
      ts.label = static_cast<int32_t>(c);
      ds.series.push_back(ts);
    }
  }
  return ds;
}

// Exhaustive verification of every pair's label against the dataset.
void verify_pairset(const Dataset& ds, const PairSet& ps, int64_t cap) {
  std::vector<int64_t> same_per_class(ds.n_classes(), 0);
  std::vector<int64_t> diff_per_class(ds.n_classes(), 0);
  std::set<std::pair<int64_t, int64_t>> seen_combos;
  for (const Pair& p : ps.pairs) {
    const int32_t la = ds.series[static_cast<size_t>(p.index_a)].label;
    const int32_t lb = ds.series[static_cast<size_t>(p.index_b)].label;
    if (p.label == 1) {
      CHECK(la == lb);
      CHECK(p.index_a != p.index_b);
      const auto key = std::minmax(p.index_a, p.index_b);
      CHECK(seen_combos.insert({key.first, key.second}).second);  // no duplicates
      ++same_per_class[static_cast<size_t>(la)];
    } else {
      CHECK(la != lb);
      ++diff_per_class[static_cast<size_t>(la)];
    }
  }
  const auto members = ds.class_members();
  for (size_t c = 0; c < ds.n_classes(); ++c) {
    const int64_t n = static_cast<int64_t>(members[c].size());
    const int64_t expected = n < 2 ? 0 : std::min(n * (n - 1) / 2, cap);
    CHECK(same_per_class[c] == expected);
    CHECK(diff_per_class[c] == expected);
  }
}

}  // namespace

TEST_CASE("unrank_combination enumerates every combination exactly once") {
  for (int64_t n = 2; n <= 40; ++n) {
    std::set<std::pair<int64_t, int64_t>> seen;
    for (int64_t r = 0; r < n * (n - 1) / 2; ++r) {
      const auto [i, j] = unrank_combination(n, r);
      CHECK(i >= 0);
      CHECK(i < j);
      CHECK(j < n);
      CHECK(seen.insert({i, j}).second);
    }
    CHECK(static_cast<int64_t>(seen.size()) == n * (n - 1) / 2);
  }
}

TEST_CASE("a class of five members yields ten same-label pairs") {
  const Dataset ds = tiny_dataset({5, 3});
  const PairSet ps = generate_pairs(ds, std::nullopt, 1);
  int64_t same_from_big = 0;
  for (const Pair& p : ps.pairs) {
    if (p.label == 1 && ds.series[static_cast<size_t>(p.index_a)].label == 0) ++same_from_big;
  }
  CHECK(same_from_big == 10);
}

TEST_CASE("singleton classes contribute nothing") {
  const Dataset ds = tiny_dataset({1, 4});
  const PairSet ps = generate_pairs(ds, std::nullopt, 1);
  for (const Pair& p : ps.pairs) {
    CHECK(ds.series[static_cast<size_t>(p.index_a)].label == 1);
  }
  verify_pairset(ds, ps, 1 << 30);
}

TEST_CASE("two classes of three members: 3+3 same, 3+3 different, half label 1") {
  const Dataset ds = tiny_dataset({3, 3});
  const PairSet ps = generate_pairs(ds, std::nullopt, 7);
  CHECK(ps.pairs.size() == 12);
  int64_t ones = 0;
  for (const Pair& p : ps.pairs) ones += p.label;
  CHECK(ones == 6);
  verify_pairset(ds, ps, 1 << 30);
}

TEST_CASE("single-class dataset cannot form different-label pairs") {
  const Dataset ds = tiny_dataset({6});
  CHECK_THROWS_AS(generate_pairs(ds, std::nullopt, 1), InputError);
}

TEST_CASE("cap limits same-label combinations without duplicates") {
  const Dataset ds = tiny_dataset({30, 12, 1});
  const int64_t cap = 50;
  const PairSet ps = generate_pairs(ds, cap, 9);
  verify_pairset(ds, ps, cap);
  // class 0: C(30,2)=435 capped to 50; class 1: C(12,2)=66 capped to 50.
  int64_t total_same = 0;
  for (const Pair& p : ps.pairs) total_same += p.label;
  CHECK(total_same == 100);
}

TEST_CASE("generation is deterministic per seed") {
  const Dataset ds = tiny_dataset({9, 7, 5});
  const PairSet a = generate_pairs(ds, 10, 42);
  const PairSet b = generate_pairs(ds, 10, 42);
  const PairSet c = generate_pairs(ds, 10, 43);
  REQUIRE(a.pairs.size() == b.pairs.size());
  bool all_equal = true;
  for (size_t i = 0; i < a.pairs.size(); ++i) {
    all_equal = all_equal && a.pairs[i].index_a == b.pairs[i].index_a &&
                a.pairs[i].index_b == b.pairs[i].index_b && a.pairs[i].label == b.pairs[i].label;
  }
  CHECK(all_equal);
  bool differs = c.pairs.size() != a.pairs.size();
  for (size_t i = 0; !differs && i < a.pairs.size(); ++i) {
    differs = a.pairs[i].index_a != c.pairs[i].index_a ||
              a.pairs[i].index_b != c.pairs[i].index_b;
  }
  CHECK(differs);
}

TEST_CASE("balance holds over many random synthetic datasets") {
  Rng rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<int> sizes;
    const int n_classes = 2 + static_cast<int>(rng.below(4));
    for (int c = 0; c < n_classes; ++c) sizes.push_back(1 + static_cast<int>(rng.below(12)));
    const Dataset ds = tiny_dataset(sizes);
    const int64_t cap = 1 + static_cast<int64_t>(rng.below(30));
    bool multi_class = false;
    int populated = 0;
    for (int s : sizes) populated += s > 0 ? 1 : 0;
    multi_class = populated >= 2;
    if (!multi_class) continue;
    const PairSet ps = generate_pairs(ds, cap, rng.next_u64());
    verify_pairset(ds, ps, cap);
    int64_t ones = 0, zeros = 0;
    for (const Pair& p : ps.pairs) (p.label == 1 ? ones : zeros) += 1;
    CHECK(ones == zeros);
  }
}

TEST_CASE("pair CSV dump layout") {
  const Dataset ds = tiny_dataset({2, 2});
  const PairSet ps = generate_pairs(ds, std::nullopt, 3);
  std::ostringstream out;
  dump_pairs_csv(ps, out);
  std::istringstream lines(out.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "index_a,index_b,label");
  size_t rows = 0;
  std::string row;
  while (std::getline(lines, row)) ++rows;
  CHECK(rows == ps.pairs.size());
}

TEST_CASE("batching: sizes, determinism, fresh permutation per epoch") {
  const Dataset ds = tiny_dataset({4, 3});
  PairSet ps = generate_pairs(ds, std::nullopt, 5);
  // force exactly 10 pairs for the 4,4,2 split
  ps.pairs.resize(10);
  PairBatcher batcher(ds, ps, 4, 11);
  CHECK(batcher.total_pairs() == 10);
  CHECK(batcher.batches_per_epoch() == 3);
  batcher.begin_epoch(1);
  CHECK(batcher.batch(0).labels.size() == 4);
  CHECK(batcher.batch(1).labels.size() == 4);
  CHECK(batcher.batch(2).labels.size() == 2);

  PairBatcher again(ds, ps, 4, 11);
  again.begin_epoch(1);
  for (int64_t i = 0; i < 3; ++i) {
    CHECK(batcher.batch(i).side_a.values == again.batch(i).side_a.values);
    CHECK(batcher.batch(i).labels.values == again.batch(i).labels.values);
  }

  // Epoch permutations differ somewhere across 100 epochs.
  int distinct = 0;
  std::vector<float> first_epoch = batcher.batch(0).labels.values;
  std::vector<std::vector<float>> sigs;
  for (int e = 0; e < 100; ++e) {
    batcher.begin_epoch(e);
    std::vector<float> sig;
    for (int64_t i = 0; i < 3; ++i) {
      const auto b = batcher.batch(i);
      sig.insert(sig.end(), b.side_a.values.begin(), b.side_a.values.end());
    }
    sigs.push_back(std::move(sig));
  }
  for (int e = 1; e < 100; ++e) {
    if (sigs[static_cast<size_t>(e)] != sigs[0]) ++distinct;
  }
  CHECK(distinct >= 95);
}

TEST_CASE("batcher rejects an empty pair set") {
  const Dataset ds = tiny_dataset({3, 3});
  PairSet empty;
  empty.source = ds.name;
  CHECK_THROWS_AS(PairBatcher(ds, empty, 4, 1), InputError);
  PairSet ok = generate_pairs(ds, std::nullopt, 1);
  CHECK_THROWS_AS(PairBatcher(ds, ok, 0, 1), ConfigError);
}
