#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsts/errors.hpp"

namespace fsts {

// One series. After the scale/pad pipeline, values has the dataset's common
// length, the first original_length samples lie in [0,1], and everything
// after them is exactly zero.
struct TimeSeries {
  std::vector<float> values;
  int64_t original_length = 0;
  int32_t label = 0;
};

enum class DatasetRole : uint8_t { train = 0, validation = 1, test = 2 };

std::string role_name(DatasetRole role);
DatasetRole role_from_name(const std::string& name);

struct Dataset {
  std::string name;
  DatasetRole role = DatasetRole::train;
  std::vector<TimeSeries> series;
  std::vector<std::string> label_names;  // class id -> display name
  int64_t l_max = 0;                     // 0 until the pad step has run

  size_t n_classes() const { return label_names.size(); }

  // Per-class index lists, in class-id order.
  std::vector<std::vector<int64_t>> class_members() const;

  // Checks the invariants required before serialization: non-empty, uniform
  // padded length, labels within the vocabulary, padded tails zero.
  void validate() const;
};

enum class ScaleMode { per_series, per_dataset };

// Min-max scaling of the unpadded prefix: x' = (x - min) / (max - min).
// Constant series map to all zeros.
void scale_minmax(TimeSeries& ts);

// Appends zeros up to l_max. Errors if the series is already longer.
void pad_to(TimeSeries& ts, int64_t l_max);

// scale + pad for a whole dataset; per_dataset mode shares one min/max
// across all prefixes instead of one per series.
void preprocess(Dataset& ds, int64_t l_max, ScaleMode mode = ScaleMode::per_series);

}  // namespace fsts
