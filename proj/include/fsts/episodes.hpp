#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fsts/model.hpp"
#include "fsts/timeseries.hpp"

namespace fsts {

// One sampled N-way K-shot episode. Support and query indices are grouped
// by task slot (slot s covers [s*k, (s+1)*k) and [s*q, (s+1)*q)); slots map
// to dataset class ids through `classes`.
struct FewShotTask {
  int64_t n_way = 0;
  int64_t k_shot = 0;
  int64_t q_queries = 0;
  uint64_t seed = 0;
  std::vector<int32_t> classes;   // slot -> dataset class id
  std::vector<int64_t> support;   // n_way * k_shot
  std::vector<int64_t> query;     // n_way * q_queries
};

struct TaskMetrics {
  double accuracy = 0;
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
  int64_t n_way = 0;
  std::vector<int64_t> confusion;  // n_way x n_way, row = true slot, col = predicted
};

// Uniform sampling without replacement within each class; support and query
// sets are disjoint by construction.
FewShotTask sample_task(const Dataset& dataset, int64_t n_way, int64_t k_shot,
                        int64_t q_queries, uint64_t seed);

// Class prototypes = mean support embeddings; every query goes to the slot
// with the highest relational score, ties to the lowest slot.
std::vector<int32_t> adapt_and_predict(const ModelParams& params, const EmbeddingConfig& config,
                                       const Dataset& dataset, const FewShotTask& task);

// Per-class precision/recall/F1 with the 0/0-as-0 rule; macro = unweighted
// mean over classes.
TaskMetrics macro_metrics(const std::vector<int64_t>& confusion, int64_t n_way);

TaskMetrics metrics_from_predictions(const FewShotTask& task,
                                     const std::vector<int32_t>& predicted_slots);

struct EvalResult {
  std::vector<TaskMetrics> per_task;
  TaskMetrics mean;  // metric-wise unweighted mean; confusion summed
};

EvalResult evaluate(const ModelParams& params, const EmbeddingConfig& config,
                    const Dataset& dataset, int64_t n_way, int64_t k_shot, int64_t q_queries,
                    int64_t n_tasks, uint64_t seed);

TaskMetrics mean_metrics(const std::vector<TaskMetrics>& per_task);

uint64_t derive_task_seed(uint64_t master_seed, int64_t task_index);

// Result files: one row per (model, K, task) plus a `mean` row per K, and a
// compact per-K summary.
struct KSweepEntry {
  int64_t k = 0;
  EvalResult result;
};

void write_results_csv(std::ostream& out, const std::string& model,
                       const std::vector<KSweepEntry>& sweep);
void write_results_csv(const std::string& path, const std::string& model,
                       const std::vector<KSweepEntry>& sweep);
void write_summary_csv(std::ostream& out, const std::string& model,
                       const std::vector<KSweepEntry>& sweep);
void write_summary_csv(const std::string& path, const std::string& model,
                       const std::vector<KSweepEntry>& sweep);
std::string render_summary_table(const std::string& model,
                                 const std::vector<KSweepEntry>& sweep);

}  // namespace fsts
