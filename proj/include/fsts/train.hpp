#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fsts/model.hpp"
#include "fsts/pairs.hpp"
#include "fsts/timeseries.hpp"

namespace fsts {

struct TrainHyperparams {
  double learning_rate = 1e-3;
  int64_t batch_size = 128;
  int64_t patience = 20;
  int64_t epoch_cap = 200;
};

struct EpochRecord {
  int64_t epoch = 0;  // 1-based
  double train_loss = 0;
  double val_loss = 0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int64_t best_epoch = 0;
  std::string stopping_reason;
  uint64_t seed = 0;
  double wall_time_sec = 0;  // reported on the console only, never serialized
};

// Patience bookkeeping: stop after `patience` consecutive epochs without a
// strict improvement of the validation loss.
class EarlyStopping {
 public:
  explicit EarlyStopping(int64_t patience) : patience_(patience) {}

  // Returns true when this epoch improved on the best seen so far.
  bool observe(int64_t epoch, double val_loss) {
    if (val_loss < best_) {
      best_ = val_loss;
      best_epoch_ = epoch;
      stale_ = 0;
      return true;
    }
    ++stale_;
    return false;
  }

  bool should_stop() const { return stale_ >= patience_; }
  int64_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }

 private:
  int64_t patience_;
  double best_ = std::numeric_limits<double>::infinity();
  int64_t best_epoch_ = 0;
  int64_t stale_ = 0;
};

// Pretrains the Siamese network on labeled pairs with Adam and binary
// cross-entropy, validating each epoch in inference mode, and returns the
// weights of the best validation epoch. Train and validation pairs must
// come from disjoint datasets.
std::pair<ModelParams, TrainReport> pretrain(
    const std::vector<const Dataset*>& train_datasets,
    const std::vector<const PairSet*>& train_pairs,
    const std::vector<const Dataset*>& val_datasets,
    const std::vector<const PairSet*>& val_pairs, const EmbeddingConfig& config,
    const TrainHyperparams& hp, uint64_t seed);

// Mean inference-mode BCE of a pair collection; also used for reporting.
double validation_loss(const ModelParams& params, const EmbeddingConfig& config,
                       const std::vector<const Dataset*>& datasets,
                       const std::vector<const PairSet*>& pair_sets, int64_t batch_size);

// Fraction of pairs whose score lands on the correct side of 0.5.
double pair_accuracy(const ModelParams& params, const EmbeddingConfig& config,
                     const std::vector<const Dataset*>& datasets,
                     const std::vector<const PairSet*>& pair_sets, int64_t batch_size);

void write_train_report(const TrainReport& report, std::ostream& out);
void write_train_report(const TrainReport& report, const std::string& path);

}  // namespace fsts
