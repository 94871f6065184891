// fsts: few-shot time-series classification toolkit.
//
// Subcommands: prep (raw -> canonical datasets), pairs (audit dump), train
// (Siamese pretraining), eval (episodic N-way K-shot evaluation), baseline
// (1-NN under ED or DTW on the same episodes), verify (self checks).
//
// Exit codes: 0 success, 1 internal error, 2 input error, 3 config error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fsts/baselines.hpp"
#include "fsts/checkpoint.hpp"
#include "fsts/dataset_io.hpp"
#include "fsts/episodes.hpp"
#include "fsts/errors.hpp"
#include "fsts/pairs.hpp"
#include "fsts/train.hpp"
#include "verify_checks.hpp"

namespace {

namespace fs = std::filesystem;

std::string data_dir() {
  const char* env = std::getenv("FSTS_DATA_DIR");
  return env ? std::string(env) : std::string();
}

// Resolves a dataset path: as given first, then under FSTS_DATA_DIR.
std::string resolve_input(const std::string& path) {
  if (fs::exists(path)) return path;
  const std::string root = data_dir();
  if (!root.empty() && fs::path(path).is_relative()) {
    const fs::path candidate = fs::path(root) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  throw fsts::InputError("cannot find '" + path + "'" +
                         (root.empty() ? "" : " (also looked under " + root + ")"));
}

std::vector<int64_t> parse_k_list(const std::string& csv) {
  std::vector<int64_t> ks;
  std::string token;
  std::istringstream in(csv);
  while (std::getline(in, token, ',')) {
    if (token.empty()) continue;
    try {
      ks.push_back(std::stoll(token));
    } catch (const std::exception&) {
      throw fsts::ConfigError("bad K value '" + token + "'");
    }
    if (ks.back() < 1) throw fsts::ConfigError("K values must be positive");
  }
  if (ks.empty()) throw fsts::ConfigError("empty K list");
  return ks;
}

struct PrepOptions {
  std::vector<std::string> inputs;
  std::string format = "tsv";  // tsv | csv | auto
  bool mitbih = false;
  std::string name;
  std::string role = "train";
  int64_t l_max = 187;
  std::string scale = "per-series";
  std::string out_dir = ".";
};

int cmd_prep(const PrepOptions& opt) {
  using namespace fsts;
  Delimiter delim = Delimiter::auto_detect;
  if (opt.format == "tsv") delim = Delimiter::tab;
  else if (opt.format == "csv") delim = Delimiter::comma;
  else if (opt.format != "auto") throw ConfigError("--format must be tsv, csv or auto");
  const ScaleMode mode =
      opt.scale == "per-dataset" ? ScaleMode::per_dataset : ScaleMode::per_series;
  if (opt.scale != "per-series" && opt.scale != "per-dataset") {
    throw ConfigError("--scale must be per-series or per-dataset");
  }

  Dataset ds;
  bool first = true;
  for (const std::string& raw : opt.inputs) {
    const std::string path = resolve_input(raw);
    if (opt.mitbih) {
      if (first) ds = parse_mitbih(path);
      else parse_mitbih_into(ds, path);
    } else {
      if (first) ds = parse_ucr(path, delim);
      else parse_ucr_into(ds, path, delim);
    }
    first = false;
  }
  if (!opt.name.empty()) ds.name = opt.name;
  ds.role = role_from_name(opt.role);

  int64_t raw_min = ds.l_max;
  int64_t raw_max = 0;
  raw_min = std::numeric_limits<int64_t>::max();
  for (const TimeSeries& ts : ds.series) {
    raw_min = std::min(raw_min, ts.original_length > 0
                                    ? ts.original_length
                                    : static_cast<int64_t>(ts.values.size()));
    raw_max = std::max(raw_max, static_cast<int64_t>(ts.values.size()));
  }

  preprocess(ds, opt.l_max, mode);
  fs::create_directories(opt.out_dir);
  const std::string out_path = (fs::path(opt.out_dir) / (ds.name + ".fsts")).string();
  save_canonical(ds, out_path);

  std::ostringstream lengths;
  if (raw_min == raw_max) lengths << raw_min;
  else lengths << raw_min << ".." << raw_max;
  std::cout << ds.name << ": " << ds.series.size() << " series, " << lengths.str() << "→"
            << ds.l_max << ", " << ds.n_classes() << " classes\n";
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

struct PairsOptions {
  std::string data;
  int64_t cap = fsts::kDefaultPairCap;
  uint64_t seed = 0;
  std::string out = "pairs.csv";
};

int cmd_pairs(const PairsOptions& opt) {
  using namespace fsts;
  const Dataset ds = load_canonical(resolve_input(opt.data));
  const PairSet ps = generate_pairs(ds, opt.cap, hash_seed(opt.seed, "pairs", 0));
  dump_pairs_csv(ps, opt.out);
  int64_t same = 0;
  for (const Pair& p : ps.pairs) same += p.label;
  std::cout << ds.name << ": " << ps.pairs.size() << " pairs (" << same << " same / "
            << ps.pairs.size() - same << " different) -> " << opt.out << "\n";
  return 0;
}

struct TrainOptions {
  std::vector<std::string> train_files;
  std::vector<std::string> val_files;
  uint64_t seed = 0;
  int64_t cap = fsts::kDefaultPairCap;
  int64_t batch_size = 128;
  double lr = 1e-3;
  int64_t patience = 20;
  int64_t epochs = 200;
  double dropout = 0.2;
  std::string checkpoint = "scnn.ckpt";
  std::string report;
};

int cmd_train(TrainOptions opt) {
  using namespace fsts;
  if (opt.train_files.empty()) opt.train_files = {"ECG200.fsts", "ECG5000.fsts"};
  if (opt.val_files.empty()) opt.val_files = {"ECGFiveDays.fsts", "TwoLeadECG.fsts"};

  std::vector<Dataset> train_sets, val_sets;
  for (const auto& f : opt.train_files) train_sets.push_back(load_canonical(resolve_input(f)));
  for (const auto& f : opt.val_files) val_sets.push_back(load_canonical(resolve_input(f)));

  std::vector<const Dataset*> train_ptrs, val_ptrs;
  for (const auto& d : train_sets) train_ptrs.push_back(&d);
  for (const auto& d : val_sets) val_ptrs.push_back(&d);

  const int64_t l_max = train_sets.front().l_max;
  EmbeddingConfig config;
  config.input_length = l_max;
  config.dropout_rate = opt.dropout;

  std::vector<PairSet> train_pairs, val_pairs;
  std::vector<const PairSet*> train_pair_ptrs, val_pair_ptrs;
  for (const auto& d : train_sets) {
    train_pairs.push_back(generate_pairs(d, opt.cap, hash_seed(opt.seed, "pairs-" + d.name)));
  }
  for (const auto& d : val_sets) {
    val_pairs.push_back(generate_pairs(d, opt.cap, hash_seed(opt.seed, "pairs-" + d.name)));
  }
  for (const auto& p : train_pairs) train_pair_ptrs.push_back(&p);
  for (const auto& p : val_pairs) val_pair_ptrs.push_back(&p);

  TrainHyperparams hp;
  hp.learning_rate = opt.lr;
  hp.batch_size = opt.batch_size;
  hp.patience = opt.patience;
  hp.epoch_cap = opt.epochs;

  int64_t total_train = 0, total_val = 0;
  for (const auto& p : train_pairs) total_train += static_cast<int64_t>(p.pairs.size());
  for (const auto& p : val_pairs) total_val += static_cast<int64_t>(p.pairs.size());
  std::cout << "pretraining on " << total_train << " pairs, validating on " << total_val
            << " pairs, input length " << l_max << "\n";

  auto [params, report] =
      pretrain(train_ptrs, train_pair_ptrs, val_ptrs, val_pair_ptrs, config, hp, opt.seed);

  save_checkpoint(params, config, opt.checkpoint);
  const std::string report_path =
      opt.report.empty() ? opt.checkpoint + ".report.csv" : opt.report;
  write_train_report(report, report_path);

  const double val_acc =
      pair_accuracy(params, config, val_ptrs, val_pair_ptrs, hp.batch_size);
  std::printf("best epoch %lld (val loss %.6f), stopped by %s\n",
              static_cast<long long>(report.best_epoch),
              report.epochs.empty()
                  ? 0.0
                  : report.epochs[static_cast<size_t>(report.best_epoch - 1)].val_loss,
              report.stopping_reason.c_str());
  std::printf("validation pair accuracy at 0.5: %.4f\n", val_acc);
  std::printf("wall time %.1fs; checkpoint -> %s, report -> %s\n", report.wall_time_sec,
              opt.checkpoint.c_str(), report_path.c_str());
  return 0;
}

struct EvalOptions {
  std::string checkpoint = "scnn.ckpt";
  std::string data;
  std::string k_csv = "1,2,3,4,5,10,20,30,40,50";
  int64_t n_way = 5;
  int64_t queries = 20;
  int64_t tasks = 20;
  uint64_t seed = 0;
  std::string out_dir = ".";
};

int cmd_eval(const EvalOptions& opt) {
  using namespace fsts;
  auto [params, config] = load_checkpoint(resolve_input(opt.checkpoint));
  const Dataset ds = load_canonical(resolve_input(opt.data));
  const std::vector<int64_t> ks = parse_k_list(opt.k_csv);

  std::vector<KSweepEntry> sweep;
  for (int64_t k : ks) {
    KSweepEntry entry;
    entry.k = k;
    entry.result = evaluate(params, config, ds, opt.n_way, k, opt.queries, opt.tasks,
                            hash_seed(opt.seed, "episode", static_cast<uint64_t>(k)));
    sweep.push_back(std::move(entry));
  }
  fs::create_directories(opt.out_dir);
  const std::string results = (fs::path(opt.out_dir) / "results_scnn.csv").string();
  const std::string summary = (fs::path(opt.out_dir) / "summary_scnn.csv").string();
  write_results_csv(results, "SCNN", sweep);
  write_summary_csv(summary, "SCNN", sweep);
  std::cout << render_summary_table("SCNN", sweep);
  std::cout << "wrote " << results << " and " << summary << "\n";
  return 0;
}

struct BaselineOptions {
  std::string kind;
  std::optional<int64_t> window;
  std::string data;
  std::string k_csv = "1,2,3,4,5,10,20,30,40,50";
  int64_t n_way = 5;
  int64_t queries = 20;
  int64_t tasks = 20;
  uint64_t seed = 0;
  std::string out_dir = ".";
};

int cmd_baseline(const BaselineOptions& opt) {
  using namespace fsts;
  DistanceKind distance;
  if (opt.kind == "ed") distance = DistanceKind::euclidean();
  else if (opt.kind == "dtw") distance = DistanceKind::dtw(opt.window);
  else throw ConfigError("--kind must be ed or dtw");

  const Dataset ds = load_canonical(resolve_input(opt.data));
  const std::vector<int64_t> ks = parse_k_list(opt.k_csv);

  std::vector<KSweepEntry> sweep;
  for (int64_t k : ks) {
    KSweepEntry entry;
    entry.k = k;
    entry.result =
        evaluate_baseline(ds, distance, opt.n_way, k, opt.queries, opt.tasks,
                          hash_seed(opt.seed, "episode", static_cast<uint64_t>(k)));
    sweep.push_back(std::move(entry));
  }
  const std::string model = distance.name();
  std::string lower = model;
  for (char& c : lower) c = static_cast<char>(std::tolower(c));
  fs::create_directories(opt.out_dir);
  const std::string results = (fs::path(opt.out_dir) / ("results_" + lower + ".csv")).string();
  const std::string summary = (fs::path(opt.out_dir) / ("summary_" + lower + ".csv")).string();
  write_results_csv(results, model, sweep);
  write_summary_csv(summary, model, sweep);
  std::cout << render_summary_table(model, sweep);
  std::cout << "wrote " << results << " and " << summary << "\n";
  return 0;
}

int cmd_verify(bool inject_dtw_fault) {
  const auto results = verify_checks::run_all(inject_dtw_fault);
  bool all_ok = true;
  for (const auto& r : results) {
    std::printf("%-52s %s  max error %.3g%s\n", r.name.c_str(),
                r.passed ? "PASS" : "FAIL", r.max_error, r.detail.c_str());
    all_ok = all_ok && r.passed;
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"few-shot time-series classification toolkit"};
  app.require_subcommand(1);

  PrepOptions prep;
  auto* prep_cmd = app.add_subcommand("prep", "parse, scale, pad and store datasets");
  prep_cmd->add_option("inputs", prep.inputs, "raw dataset files (merged in order)")
      ->required();
  prep_cmd->add_option("--format", prep.format, "input delimiter: tsv|csv|auto");
  prep_cmd->add_flag("--mitbih", prep.mitbih, "heartbeat CSV layout (samples then label 0..4)");
  prep_cmd->add_option("--name", prep.name, "dataset name (default: first file stem)");
  prep_cmd->add_option("--role", prep.role, "train|validation|test");
  prep_cmd->add_option("--lmax", prep.l_max, "padded length");
  prep_cmd->add_option("--scale", prep.scale, "per-series|per-dataset");
  prep_cmd->add_option("--out", prep.out_dir, "output directory");

  PairsOptions pairs;
  auto* pairs_cmd = app.add_subcommand("pairs", "dump generated pairs as CSV for audit");
  pairs_cmd->add_option("--data", pairs.data, "canonical dataset file")->required();
  pairs_cmd->add_option("--cap-pairs", pairs.cap, "per-class same-label pair cap");
  pairs_cmd->add_option("--seed", pairs.seed, "master seed");
  pairs_cmd->add_option("--out", pairs.out, "output CSV path");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "pretrain the Siamese network on pairs");
  train_cmd->add_option("--train", train.train_files, "training dataset files");
  train_cmd->add_option("--val", train.val_files, "validation dataset files");
  train_cmd->add_option("--seed", train.seed, "master seed");
  train_cmd->add_option("--cap-pairs", train.cap, "per-class same-label pair cap");
  train_cmd->add_option("--batch-size", train.batch_size, "pairs per batch");
  train_cmd->add_option("--lr", train.lr, "Adam learning rate");
  train_cmd->add_option("--patience", train.patience, "early-stopping patience in epochs");
  train_cmd->add_option("--epochs", train.epochs, "epoch cap");
  train_cmd->add_option("--dropout", train.dropout, "dropout rate in [0,1)");
  train_cmd->add_option("--checkpoint", train.checkpoint, "checkpoint output path");
  train_cmd->add_option("--report", train.report, "training report CSV path");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "episodic N-way K-shot evaluation");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "checkpoint manifest");
  eval_cmd->add_option("--data", eval.data, "canonical test dataset")->required();
  eval_cmd->add_option("--k", eval.k_csv, "comma-separated K values");
  eval_cmd->add_option("--n-way", eval.n_way, "classes per task");
  eval_cmd->add_option("--queries", eval.queries, "queries per class");
  eval_cmd->add_option("--tasks", eval.tasks, "tasks per K");
  eval_cmd->add_option("--seed", eval.seed, "master seed");
  eval_cmd->add_option("--out", eval.out_dir, "output directory");

  BaselineOptions baseline;
  auto* baseline_cmd = app.add_subcommand("baseline", "1-NN baseline on the same episodes");
  baseline_cmd->add_option("--kind", baseline.kind, "ed|dtw")->required();
  int64_t window_flag = -1;
  baseline_cmd->add_option("--window", window_flag, "Sakoe-Chiba band (dtw only)");
  baseline_cmd->add_option("--data", baseline.data, "canonical test dataset")->required();
  baseline_cmd->add_option("--k", baseline.k_csv, "comma-separated K values");
  baseline_cmd->add_option("--n-way", baseline.n_way, "classes per task");
  baseline_cmd->add_option("--queries", baseline.queries, "queries per class");
  baseline_cmd->add_option("--tasks", baseline.tasks, "tasks per K");
  baseline_cmd->add_option("--seed", baseline.seed, "master seed");
  baseline_cmd->add_option("--out", baseline.out_dir, "output directory");

  bool inject_dtw_fault = false;
  auto* verify_cmd = app.add_subcommand("verify", "run self checks and report max errors");
  verify_cmd->add_flag("--inject-dtw-fault", inject_dtw_fault,
                       "corrupt the DTW step set to prove the check catches it")
      ->group("");  // test hook, hidden from help

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  try {
    if (prep_cmd->parsed()) return cmd_prep(prep);
    if (pairs_cmd->parsed()) return cmd_pairs(pairs);
    if (train_cmd->parsed()) return cmd_train(train);
    if (eval_cmd->parsed()) return cmd_eval(eval);
    if (baseline_cmd->parsed()) {
      if (window_flag >= 0) baseline.window = window_flag;
      return cmd_baseline(baseline);
    }
    if (verify_cmd->parsed()) return cmd_verify(inject_dtw_fault);
  } catch (const fsts::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const fsts::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 3;
}
