#include "fsts/pairs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "fsts/errors.hpp"
#include "fsts/rng.hpp"

namespace fsts {

std::pair<int64_t, int64_t> unrank_combination(int64_t n, int64_t rank) {
  // Row i covers ranks [offset(i), offset(i) + n-1-i) with
  // offset(i) = i*(2n-i-1)/2. Solve for i, then adjust for rounding.
  auto offset = [n](int64_t i) { return i * (2 * n - i - 1) / 2; };
  const double disc = static_cast<double>(2 * n - 1) * static_cast<double>(2 * n - 1) -
                      8.0 * static_cast<double>(rank);
  int64_t i = static_cast<int64_t>((static_cast<double>(2 * n - 1) - std::sqrt(disc)) / 2.0);
  i = std::clamp<int64_t>(i, 0, n - 2);
  while (i + 1 <= n - 2 && offset(i + 1) <= rank) ++i;
  while (i > 0 && offset(i) > rank) --i;
  const int64_t j = i + 1 + (rank - offset(i));
  return {i, j};
}

namespace {

// Floyd's algorithm: uniform sample of `count` distinct values in [0, total).
std::vector<int64_t> sample_distinct(int64_t total, int64_t count, Rng& rng) {
  std::set<int64_t> chosen;
  for (int64_t j = total - count; j < total; ++j) {
    const int64_t t = static_cast<int64_t>(rng.below(static_cast<uint64_t>(j + 1)));
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

}  // namespace

PairSet generate_pairs(const Dataset& dataset, std::optional<int64_t> cap_per_class,
                       uint64_t seed) {
  if (cap_per_class && *cap_per_class <= 0) {
    throw ConfigError("pair cap must be positive when given");
  }
  const auto members = dataset.class_members();
  int64_t populated = 0;
  for (const auto& m : members) populated += m.empty() ? 0 : 1;
  if (populated < 2) {
    throw InputError("dataset '" + dataset.name +
                     "' has a single class; different-label pairs are impossible");
  }

  PairSet ps;
  ps.source = dataset.name;
  ps.seed = seed;

  const int64_t total = static_cast<int64_t>(dataset.series.size());
  for (size_t cls = 0; cls < members.size(); ++cls) {
    const auto& own = members[cls];
    const int64_t n = static_cast<int64_t>(own.size());
    if (n < 2) continue;
    const int64_t all_combos = n * (n - 1) / 2;
    const int64_t p = cap_per_class ? std::min(all_combos, *cap_per_class) : all_combos;

    Rng rng(hash_seed(seed, "pair-class", static_cast<uint64_t>(cls)));

    if (p == all_combos) {
      for (int64_t i = 0; i < n; ++i) {
        for (int64_t j = i + 1; j < n; ++j) {
          ps.pairs.push_back({own[static_cast<size_t>(i)], own[static_cast<size_t>(j)], 1});
        }
      }
    } else {
      for (int64_t rank : sample_distinct(all_combos, p, rng)) {
        const auto [i, j] = unrank_combination(n, rank);
        ps.pairs.push_back({own[static_cast<size_t>(i)], own[static_cast<size_t>(j)], 1});
      }
    }

    // Non-members of this class, in index order.
    std::vector<int64_t> others;
    others.reserve(static_cast<size_t>(total - n));
    for (int64_t idx = 0; idx < total; ++idx) {
      if (dataset.series[static_cast<size_t>(idx)].label != static_cast<int32_t>(cls)) {
        others.push_back(idx);
      }
    }
    for (int64_t d = 0; d < p; ++d) {
      const int64_t a = own[static_cast<size_t>(rng.below(static_cast<uint64_t>(n)))];
      const int64_t b =
          others[static_cast<size_t>(rng.below(static_cast<uint64_t>(others.size())))];
      ps.pairs.push_back({a, b, 0});
    }
  }
  return ps;
}

void dump_pairs_csv(const PairSet& ps, std::ostream& out) {
  out << "index_a,index_b,label\n";
  for (const Pair& p : ps.pairs) {
    out << p.index_a << ',' << p.index_b << ',' << static_cast<int>(p.label) << '\n';
  }
}

void dump_pairs_csv(const PairSet& ps, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  dump_pairs_csv(ps, out);
  if (!out.flush()) throw InputError("write to '" + path + "' failed");
}

PairBatcher::PairBatcher(const std::vector<const Dataset*>& datasets,
                         const std::vector<const PairSet*>& pair_sets, int64_t batch_size,
                         uint64_t seed)
    : batch_size_(batch_size), l_max_(0), seed_(seed) {
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (datasets.size() != pair_sets.size()) {
    throw ConfigError("need one pair set per dataset");
  }
  for (size_t s = 0; s < datasets.size(); ++s) {
    const Dataset* ds = datasets[s];
    if (ds->l_max <= 0) throw InputError("dataset '" + ds->name + "' is not preprocessed");
    if (l_max_ == 0) l_max_ = ds->l_max;
    if (ds->l_max != l_max_) {
      throw InputError("datasets disagree on padded length (" + std::to_string(l_max_) +
                       " vs " + std::to_string(ds->l_max) + " in '" + ds->name + "')");
    }
    if (pair_sets[s]->source != ds->name) {
      throw ConfigError("pair set for '" + pair_sets[s]->source +
                        "' paired with dataset '" + ds->name + "'");
    }
    for (const Pair& p : pair_sets[s]->pairs) entries_.push_back({ds, p});
  }
  if (entries_.empty()) throw InputError("no pairs to batch");
  order_.resize(entries_.size());
  begin_epoch(0);
}

PairBatcher::PairBatcher(const Dataset& dataset, const PairSet& pair_set, int64_t batch_size,
                         uint64_t seed)
    : PairBatcher(std::vector<const Dataset*>{&dataset},
                  std::vector<const PairSet*>{&pair_set}, batch_size, seed) {}

int64_t PairBatcher::batches_per_epoch() const {
  return (total_pairs() + batch_size_ - 1) / batch_size_;
}

void PairBatcher::begin_epoch(int64_t epoch) {
  for (size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int64_t>(i);
  Rng rng(hash_seed(seed_, "epoch", static_cast<uint64_t>(epoch)));
  rng.shuffle(order_);
}

PairBatch PairBatcher::batch(int64_t index) const {
  const int64_t lo = index * batch_size_;
  if (index < 0 || lo >= total_pairs()) throw Error("batch index out of range");
  const int64_t hi = std::min(lo + batch_size_, total_pairs());
  const int64_t b = hi - lo;

  PairBatch out;
  out.side_a = Tensor({b, l_max_});
  out.side_b = Tensor({b, l_max_});
  out.labels = Tensor({b});
  for (int64_t r = 0; r < b; ++r) {
    const Entry& e = entries_[static_cast<size_t>(order_[static_cast<size_t>(lo + r)])];
    const auto& sa = e.dataset->series[static_cast<size_t>(e.pair.index_a)].values;
    const auto& sb = e.dataset->series[static_cast<size_t>(e.pair.index_b)].values;
    std::copy(sa.begin(), sa.end(), out.side_a.values.begin() + r * l_max_);
    std::copy(sb.begin(), sb.end(), out.side_b.values.begin() + r * l_max_);
    out.labels.values[static_cast<size_t>(r)] = static_cast<float>(e.pair.label);
  }
  return out;
}

}  // namespace fsts
