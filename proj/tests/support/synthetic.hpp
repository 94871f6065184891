#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fsts/rng.hpp"
#include "fsts/timeseries.hpp"

// Synthetic waveform datasets for tests that need separable classes without
// shipping real recordings. Each class is a Gaussian bump at a class-specific
// position plus a class-specific ripple, with additive noise.

namespace testsupport {

struct SyntheticSpec {
  std::string name = "synthetic";
  fsts::DatasetRole role = fsts::DatasetRole::train;
  int n_classes = 3;
  int per_class = 20;
  int length = 32;          // raw length before the scale/pad pipeline
  bool ragged = false;      // vary raw lengths a little
  double noise = 0.05;
  uint64_t seed = 1;
};

inline fsts::Dataset make_synthetic_raw(const SyntheticSpec& spec) {
  fsts::Dataset ds;
  ds.name = spec.name;
  ds.role = spec.role;
  for (int c = 0; c < spec.n_classes; ++c) ds.label_names.push_back(std::to_string(c));
  fsts::Rng rng(fsts::hash_seed(spec.seed, "synthetic"));
  const double pi = 3.141592653589793;
  for (int c = 0; c < spec.n_classes; ++c) {
    const double center = (c + 1.0) / (spec.n_classes + 1.0);
    const double freq = 2.0 + c;
    for (int s = 0; s < spec.per_class; ++s) {
      int len = spec.length;
      if (spec.ragged) len -= static_cast<int>(rng.below(static_cast<uint64_t>(spec.length / 4)));
      fsts::TimeSeries ts;
      ts.label = c;
      ts.values.resize(static_cast<size_t>(len));
      const double jitter = rng.uniform(-0.03, 0.03);
      for (int t = 0; t < len; ++t) {
        const double x = static_cast<double>(t) / len;
        const double bump = std::exp(-std::pow((x - center - jitter) / 0.08, 2.0));
        const double ripple = 0.25 * std::sin(2.0 * pi * freq * x);
        ts.values[static_cast<size_t>(t)] =
            static_cast<float>(bump + ripple + spec.noise * rng.next_gaussian());
      }
      ts.original_length = len;
      ds.series.push_back(std::move(ts));
    }
  }
  return ds;
}

inline fsts::Dataset make_synthetic(const SyntheticSpec& spec, int64_t l_max) {
  fsts::Dataset ds = make_synthetic_raw(spec);
  fsts::preprocess(ds, l_max);
  return ds;
}

}  // namespace testsupport
