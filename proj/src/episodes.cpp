#include "fsts/episodes.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fsts/errors.hpp"
#include "fsts/rng.hpp"

namespace fsts {

uint64_t derive_task_seed(uint64_t master_seed, int64_t task_index) {
  return hash_seed(master_seed, "task", static_cast<uint64_t>(task_index));
}

FewShotTask sample_task(const Dataset& dataset, int64_t n_way, int64_t k_shot,
                        int64_t q_queries, uint64_t seed) {
  if (n_way < 2) throw ConfigError("task sampling: n_way must be >= 2");
  if (k_shot < 1 || q_queries < 1) {
    throw ConfigError("task sampling: k_shot and q_queries must be >= 1");
  }
  const auto members = dataset.class_members();
  if (static_cast<int64_t>(members.size()) < n_way) {
    throw InputError("dataset '" + dataset.name + "' has " +
                     std::to_string(members.size()) + " classes, task needs " +
                     std::to_string(n_way));
  }

  Rng rng(hash_seed(seed, "episode"));

  FewShotTask task;
  task.n_way = n_way;
  task.k_shot = k_shot;
  task.q_queries = q_queries;
  task.seed = seed;

  std::vector<int32_t> class_ids(members.size());
  for (size_t i = 0; i < members.size(); ++i) class_ids[i] = static_cast<int32_t>(i);
  if (n_way < static_cast<int64_t>(members.size())) {
    rng.shuffle(class_ids);
    class_ids.resize(static_cast<size_t>(n_way));
    std::sort(class_ids.begin(), class_ids.end());
  }
  task.classes = class_ids;

  for (int32_t cls : task.classes) {
    std::vector<int64_t> pool = members[static_cast<size_t>(cls)];
    if (static_cast<int64_t>(pool.size()) < k_shot + q_queries) {
      throw InputError("class '" + dataset.label_names[static_cast<size_t>(cls)] + "' has " +
                       std::to_string(pool.size()) + " members, task needs K=" +
                       std::to_string(k_shot) + " support plus " + std::to_string(q_queries) +
                       " queries");
    }
    rng.shuffle(pool);
    task.support.insert(task.support.end(), pool.begin(), pool.begin() + k_shot);
    task.query.insert(task.query.end(), pool.begin() + k_shot,
                      pool.begin() + k_shot + q_queries);
  }
  return task;
}

namespace {

Tensor gather_batch(const Dataset& dataset, const std::vector<int64_t>& indices) {
  Tensor out({static_cast<int64_t>(indices.size()), dataset.l_max});
  for (size_t r = 0; r < indices.size(); ++r) {
    const auto& v = dataset.series[static_cast<size_t>(indices[r])].values;
    std::copy(v.begin(), v.end(), out.values.begin() + static_cast<int64_t>(r) * dataset.l_max);
  }
  return out;
}

}  // namespace

std::vector<int32_t> adapt_and_predict(const ModelParams& params, const EmbeddingConfig& config,
                                       const Dataset& dataset, const FewShotTask& task) {
  if (dataset.l_max != config.input_length) {
    throw InputError("dataset '" + dataset.name + "' has padded length " +
                     std::to_string(dataset.l_max) + ", model expects " +
                     std::to_string(config.input_length));
  }
  const int64_t dim = config.embedding_dim();
  const Tensor support_emb = embed_infer(params, config, gather_batch(dataset, task.support));
  const Tensor query_emb = embed_infer(params, config, gather_batch(dataset, task.query));

  // Class prototypes: arithmetic mean of each slot's support embeddings.
  Tensor prototypes({task.n_way, dim});
  for (int64_t slot = 0; slot < task.n_way; ++slot) {
    for (int64_t s = 0; s < task.k_shot; ++s) {
      const float* e = support_emb.data() + (slot * task.k_shot + s) * dim;
      float* p = prototypes.data() + slot * dim;
      for (int64_t d = 0; d < dim; ++d) p[d] += e[d];
    }
    float* p = prototypes.data() + slot * dim;
    const float inv = 1.0f / static_cast<float>(task.k_shot);
    for (int64_t d = 0; d < dim; ++d) p[d] *= inv;
  }

  const int64_t n_queries = task.n_way * task.q_queries;
  std::vector<int32_t> predicted(static_cast<size_t>(n_queries), 0);
#pragma omp parallel for schedule(static)
  for (int64_t qi = 0; qi < n_queries; ++qi) {
    const Tensor q({dim}, std::vector<float>(query_emb.data() + qi * dim,
                                             query_emb.data() + (qi + 1) * dim));
    int32_t best_slot = 0;
    float best_score = -1.0f;
    for (int64_t slot = 0; slot < task.n_way; ++slot) {
      const Tensor p({dim}, std::vector<float>(prototypes.data() + slot * dim,
                                               prototypes.data() + (slot + 1) * dim));
      const float score = similarity(params, p, q);
      if (score > best_score) {  // ties keep the lowest slot
        best_score = score;
        best_slot = static_cast<int32_t>(slot);
      }
    }
    predicted[static_cast<size_t>(qi)] = best_slot;
  }
  return predicted;
}

TaskMetrics macro_metrics(const std::vector<int64_t>& confusion, int64_t n_way) {
  if (n_way < 1 || static_cast<int64_t>(confusion.size()) != n_way * n_way) {
    throw ShapeError("macro_metrics: confusion matrix must be square, got " +
                     std::to_string(confusion.size()) + " entries for n_way " +
                     std::to_string(n_way));
  }
  TaskMetrics m;
  m.n_way = n_way;
  m.confusion = confusion;
  int64_t total = 0, diag = 0;
  double psum = 0, rsum = 0, fsum = 0;
  for (int64_t c = 0; c < n_way; ++c) {
    const int64_t tp = confusion[static_cast<size_t>(c * n_way + c)];
    int64_t row = 0, col = 0;
    for (int64_t j = 0; j < n_way; ++j) {
      row += confusion[static_cast<size_t>(c * n_way + j)];
      col += confusion[static_cast<size_t>(j * n_way + c)];
    }
    diag += tp;
    total += row;
    const double prec = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    const double rec = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    const double f1 = (prec + rec) > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    psum += prec;
    rsum += rec;
    fsum += f1;
  }
  m.accuracy = total > 0 ? static_cast<double>(diag) / static_cast<double>(total) : 0.0;
  m.macro_precision = psum / static_cast<double>(n_way);
  m.macro_recall = rsum / static_cast<double>(n_way);
  m.macro_f1 = fsum / static_cast<double>(n_way);
  return m;
}

TaskMetrics metrics_from_predictions(const FewShotTask& task,
                                     const std::vector<int32_t>& predicted_slots) {
  if (static_cast<int64_t>(predicted_slots.size()) != task.n_way * task.q_queries) {
    throw ShapeError("metrics_from_predictions: prediction count mismatch");
  }
  std::vector<int64_t> confusion(static_cast<size_t>(task.n_way * task.n_way), 0);
  for (int64_t qi = 0; qi < static_cast<int64_t>(predicted_slots.size()); ++qi) {
    const int64_t true_slot = qi / task.q_queries;
    const int64_t pred_slot = predicted_slots[static_cast<size_t>(qi)];
    ++confusion[static_cast<size_t>(true_slot * task.n_way + pred_slot)];
  }
  return macro_metrics(confusion, task.n_way);
}

TaskMetrics mean_metrics(const std::vector<TaskMetrics>& per_task) {
  if (per_task.empty()) throw Error("mean_metrics: no tasks");
  TaskMetrics m;
  m.n_way = per_task.front().n_way;
  m.confusion.assign(per_task.front().confusion.size(), 0);
  for (const TaskMetrics& t : per_task) {
    m.accuracy += t.accuracy;
    m.macro_precision += t.macro_precision;
    m.macro_recall += t.macro_recall;
    m.macro_f1 += t.macro_f1;
    for (size_t i = 0; i < m.confusion.size(); ++i) m.confusion[i] += t.confusion[i];
  }
  const double inv = 1.0 / static_cast<double>(per_task.size());
  m.accuracy *= inv;
  m.macro_precision *= inv;
  m.macro_recall *= inv;
  m.macro_f1 *= inv;
  return m;
}

EvalResult evaluate(const ModelParams& params, const EmbeddingConfig& config,
                    const Dataset& dataset, int64_t n_way, int64_t k_shot, int64_t q_queries,
                    int64_t n_tasks, uint64_t seed) {
  if (n_tasks < 1) throw ConfigError("evaluate: n_tasks must be >= 1");
  EvalResult result;
  result.per_task.resize(static_cast<size_t>(n_tasks));
  for (int64_t i = 0; i < n_tasks; ++i) {
    const FewShotTask task =
        sample_task(dataset, n_way, k_shot, q_queries, derive_task_seed(seed, i));
    const auto predicted = adapt_and_predict(params, config, dataset, task);
    result.per_task[static_cast<size_t>(i)] = metrics_from_predictions(task, predicted);
  }
  result.mean = mean_metrics(result.per_task);
  return result;
}

// --------------------------------------------------------------------------
// result files

namespace {

std::string metric_row(double accuracy, double precision, double recall, double f1) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f", accuracy, precision, recall, f1);
  return buf;
}

}  // namespace

void write_results_csv(std::ostream& out, const std::string& model,
                       const std::vector<KSweepEntry>& sweep) {
  out << "model,k,task,accuracy,macro_precision,macro_recall,macro_f1\n";
  for (const KSweepEntry& e : sweep) {
    for (size_t t = 0; t < e.result.per_task.size(); ++t) {
      const TaskMetrics& m = e.result.per_task[t];
      out << model << ',' << e.k << ',' << t << ','
          << metric_row(m.accuracy, m.macro_precision, m.macro_recall, m.macro_f1) << '\n';
    }
  }
  for (const KSweepEntry& e : sweep) {
    const TaskMetrics& m = e.result.mean;
    out << model << ',' << e.k << ",mean,"
        << metric_row(m.accuracy, m.macro_precision, m.macro_recall, m.macro_f1) << '\n';
  }
}

void write_results_csv(const std::string& path, const std::string& model,
                       const std::vector<KSweepEntry>& sweep) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_results_csv(out, model, sweep);
  if (!out.flush()) throw InputError("write to '" + path + "' failed");
}

void write_summary_csv(std::ostream& out, const std::string& model,
                       const std::vector<KSweepEntry>& sweep) {
  out << "model,k,accuracy,macro_precision,macro_recall,macro_f1\n";
  for (const KSweepEntry& e : sweep) {
    const TaskMetrics& m = e.result.mean;
    out << model << ',' << e.k << ','
        << metric_row(m.accuracy, m.macro_precision, m.macro_recall, m.macro_f1) << '\n';
  }
}

void write_summary_csv(const std::string& path, const std::string& model,
                       const std::vector<KSweepEntry>& sweep) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_summary_csv(out, model, sweep);
  if (!out.flush()) throw InputError("write to '" + path + "' failed");
}

std::string render_summary_table(const std::string& model,
                                 const std::vector<KSweepEntry>& sweep) {
  std::ostringstream os;
  os << "  K    accuracy  precision  recall    f1        (" << model << ")\n";
  char buf[160];
  for (const KSweepEntry& e : sweep) {
    const TaskMetrics& m = e.result.mean;
    std::snprintf(buf, sizeof buf, "  %-4lld %-9.4f %-10.4f %-9.4f %-9.4f\n",
                  static_cast<long long>(e.k), m.accuracy, m.macro_precision, m.macro_recall,
                  m.macro_f1);
    os << buf;
  }
  return os.str();
}

}  // namespace fsts
