#include "fsts/train.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>

#include "fsts/adam.hpp"
#include "fsts/errors.hpp"

namespace fsts {

namespace {

void check_disjoint(const std::vector<const Dataset*>& train,
                    const std::vector<const Dataset*>& val) {
  std::set<std::string> names;
  for (const Dataset* d : train) names.insert(d->name);
  for (const Dataset* d : val) {
    if (names.count(d->name)) {
      throw ConfigError("dataset '" + d->name +
                        "' appears in both train and validation sources");
    }
  }
}

double scored_loss_sum(const ModelParams& params, const EmbeddingConfig& config,
                       PairBatcher& batcher, int64_t* correct) {
  double sum = 0;
  const int64_t n_batches = batcher.batches_per_epoch();
  for (int64_t i = 0; i < n_batches; ++i) {
    const PairBatch pb = batcher.batch(i);
    const Tensor scores = score_pairs_infer(params, config, pb.side_a, pb.side_b);
    sum += static_cast<double>(nn::bce_loss(scores, pb.labels)) *
           static_cast<double>(scores.size());
    if (correct) {
      for (int64_t j = 0; j < scores.size(); ++j) {
        const bool predicted_same = scores.values[j] > 0.5f;
        const bool is_same = pb.labels.values[j] == 1.0f;
        if (predicted_same == is_same) ++*correct;
      }
    }
  }
  return sum;
}

}  // namespace

double validation_loss(const ModelParams& params, const EmbeddingConfig& config,
                       const std::vector<const Dataset*>& datasets,
                       const std::vector<const PairSet*>& pair_sets, int64_t batch_size) {
  PairBatcher batcher(datasets, pair_sets, batch_size, 0);
  return scored_loss_sum(params, config, batcher, nullptr) /
         static_cast<double>(batcher.total_pairs());
}

double pair_accuracy(const ModelParams& params, const EmbeddingConfig& config,
                     const std::vector<const Dataset*>& datasets,
                     const std::vector<const PairSet*>& pair_sets, int64_t batch_size) {
  PairBatcher batcher(datasets, pair_sets, batch_size, 0);
  int64_t correct = 0;
  scored_loss_sum(params, config, batcher, &correct);
  return static_cast<double>(correct) / static_cast<double>(batcher.total_pairs());
}

std::pair<ModelParams, TrainReport> pretrain(
    const std::vector<const Dataset*>& train_datasets,
    const std::vector<const PairSet*>& train_pairs,
    const std::vector<const Dataset*>& val_datasets,
    const std::vector<const PairSet*>& val_pairs, const EmbeddingConfig& config,
    const TrainHyperparams& hp, uint64_t seed) {
  config.validate();
  if (hp.patience < 1) throw ConfigError("patience must be >= 1");
  if (hp.epoch_cap < 1) throw ConfigError("epoch cap must be >= 1");
  check_disjoint(train_datasets, val_datasets);

  const auto t_start = std::chrono::steady_clock::now();

  PairBatcher train_batcher(train_datasets, train_pairs, hp.batch_size, hash_seed(seed, "train"));
  PairBatcher val_batcher(val_datasets, val_pairs, hp.batch_size, 0);

  ModelParams params = ModelParams::init(config, seed);
  auto trainables = params.trainable();
  AdamState adam = AdamState::init(trainables, static_cast<float>(hp.learning_rate));

  TrainReport report;
  report.seed = seed;
  EarlyStopping stopper(hp.patience);
  ModelParams best = params;
  uint64_t global_step = 0;

  for (int64_t epoch = 1; epoch <= hp.epoch_cap; ++epoch) {
    train_batcher.begin_epoch(epoch);
    double train_loss_sum = 0;
    const int64_t n_batches = train_batcher.batches_per_epoch();
    for (int64_t i = 0; i < n_batches; ++i) {
      const PairBatch pb = train_batcher.batch(i);
      params.zero_grads();
      const auto step = train_pair_batch(params, config, pb.side_a, pb.side_b, pb.labels,
                                         hash_seed(seed, "dropout", global_step));
      adam_step(trainables, adam);
      train_loss_sum +=
          static_cast<double>(step.loss) * static_cast<double>(pb.labels.size());
      ++global_step;
    }
    const double train_loss = train_loss_sum / static_cast<double>(train_batcher.total_pairs());
    const double val_loss = scored_loss_sum(params, config, val_batcher, nullptr) /
                            static_cast<double>(val_batcher.total_pairs());
    report.epochs.push_back({epoch, train_loss, val_loss});
    if (stopper.observe(epoch, val_loss)) best = params;
    if (stopper.should_stop()) {
      report.stopping_reason =
          "early_stopping(patience=" + std::to_string(hp.patience) + ")";
      break;
    }
  }
  if (report.stopping_reason.empty()) {
    report.stopping_reason = "epoch_cap(" + std::to_string(hp.epoch_cap) + ")";
  }
  report.best_epoch = stopper.best_epoch();
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(best), std::move(report)};
}

void write_train_report(const TrainReport& report, std::ostream& out) {
  out << "# seed=" << report.seed << "\n";
  out << "# best_epoch=" << report.best_epoch << "\n";
  out << "# stopping_reason=" << report.stopping_reason << "\n";
  out << "epoch,train_loss,val_loss\n";
  char buf[96];
  for (const EpochRecord& r : report.epochs) {
    std::snprintf(buf, sizeof buf, "%lld,%.9g,%.9g\n", static_cast<long long>(r.epoch),
                  r.train_loss, r.val_loss);
    out << buf;
  }
}

void write_train_report(const TrainReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_train_report(report, out);
  if (!out.flush()) throw InputError("write to '" + path + "' failed");
}

}  // namespace fsts
