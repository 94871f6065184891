#include "fsts/timeseries.hpp"

#include <algorithm>
#include <limits>

namespace fsts {

std::string role_name(DatasetRole role) {
  switch (role) {
    case DatasetRole::train: return "train";
    case DatasetRole::validation: return "validation";
    case DatasetRole::test: return "test";
  }
  return "unknown";
}

DatasetRole role_from_name(const std::string& name) {
  if (name == "train") return DatasetRole::train;
  if (name == "validation" || name == "val") return DatasetRole::validation;
  if (name == "test") return DatasetRole::test;
  throw ConfigError("unknown dataset role '" + name + "' (expected train|validation|test)");
}

std::vector<std::vector<int64_t>> Dataset::class_members() const {
  std::vector<std::vector<int64_t>> members(label_names.size());
  for (size_t i = 0; i < series.size(); ++i) {
    const int32_t label = series[i].label;
    if (label < 0 || static_cast<size_t>(label) >= label_names.size()) {
      throw InputError("dataset '" + name + "': series " + std::to_string(i) +
                       " has label " + std::to_string(label) + " outside the vocabulary");
    }
    members[static_cast<size_t>(label)].push_back(static_cast<int64_t>(i));
  }
  return members;
}

void Dataset::validate() const {
  if (series.empty()) throw InputError("dataset '" + name + "' is empty");
  if (l_max <= 0) throw InputError("dataset '" + name + "' has no padded length set");
  for (size_t i = 0; i < series.size(); ++i) {
    const TimeSeries& ts = series[i];
    if (static_cast<int64_t>(ts.values.size()) != l_max) {
      throw InputError("dataset '" + name + "': series " + std::to_string(i) +
                       " has length " + std::to_string(ts.values.size()) +
                       ", expected l_max " + std::to_string(l_max));
    }
    if (ts.original_length <= 0 || ts.original_length > l_max) {
      throw InputError("dataset '" + name + "': series " + std::to_string(i) +
                       " has bad original length " + std::to_string(ts.original_length));
    }
    for (int64_t t = ts.original_length; t < l_max; ++t) {
      if (ts.values[static_cast<size_t>(t)] != 0.0f) {
        throw InputError("dataset '" + name + "': series " + std::to_string(i) +
                         " has nonzero padding at position " + std::to_string(t));
      }
    }
    if (ts.label < 0 || static_cast<size_t>(ts.label) >= label_names.size()) {
      throw InputError("dataset '" + name + "': series " + std::to_string(i) +
                       " has label outside the vocabulary");
    }
  }
}

namespace {

void scale_prefix(TimeSeries& ts, float lo, float hi) {
  const int64_t n = ts.original_length;
  if (hi <= lo) {
    // Degenerate range: the only finite, deterministic choice.
    std::fill(ts.values.begin(), ts.values.begin() + n, 0.0f);
    return;
  }
  // Divide rather than multiply by a reciprocal: the extremes then map to
  // exactly 0 and 1, which makes re-scaling a no-op.
  const float range = hi - lo;
  for (int64_t t = 0; t < n; ++t) {
    ts.values[static_cast<size_t>(t)] = (ts.values[static_cast<size_t>(t)] - lo) / range;
  }
}

}  // namespace

void scale_minmax(TimeSeries& ts) {
  if (ts.original_length <= 0) ts.original_length = static_cast<int64_t>(ts.values.size());
  float lo = std::numeric_limits<float>::max();
  float hi = std::numeric_limits<float>::lowest();
  for (int64_t t = 0; t < ts.original_length; ++t) {
    lo = std::min(lo, ts.values[static_cast<size_t>(t)]);
    hi = std::max(hi, ts.values[static_cast<size_t>(t)]);
  }
  scale_prefix(ts, lo, hi);
}

void pad_to(TimeSeries& ts, int64_t l_max) {
  if (ts.original_length <= 0) ts.original_length = static_cast<int64_t>(ts.values.size());
  if (static_cast<int64_t>(ts.values.size()) > l_max) {
    throw InputError("series of length " + std::to_string(ts.values.size()) +
                     " cannot be padded to " + std::to_string(l_max));
  }
  ts.values.resize(static_cast<size_t>(l_max), 0.0f);
}

void preprocess(Dataset& ds, int64_t l_max, ScaleMode mode) {
  if (l_max <= 0) throw ConfigError("l_max must be positive");
  if (mode == ScaleMode::per_dataset) {
    float lo = std::numeric_limits<float>::max();
    float hi = std::numeric_limits<float>::lowest();
    for (const TimeSeries& ts : ds.series) {
      const int64_t n =
          ts.original_length > 0 ? ts.original_length : static_cast<int64_t>(ts.values.size());
      for (int64_t t = 0; t < n; ++t) {
        lo = std::min(lo, ts.values[static_cast<size_t>(t)]);
        hi = std::max(hi, ts.values[static_cast<size_t>(t)]);
      }
    }
    for (TimeSeries& ts : ds.series) {
      if (ts.original_length <= 0) ts.original_length = static_cast<int64_t>(ts.values.size());
      scale_prefix(ts, lo, hi);
      pad_to(ts, l_max);
    }
  } else {
    for (TimeSeries& ts : ds.series) {
      scale_minmax(ts);
      pad_to(ts, l_max);
    }
  }
  ds.l_max = l_max;
}

}  // namespace fsts
