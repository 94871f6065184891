#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "support/synthetic.hpp"

// Drives the installed binary end to end on synthetic data: prep -> pairs ->
// train -> eval -> baseline -> verify, plus the exit-code contract and the
// byte-identical determinism guarantee.

namespace fs = std::filesystem;

namespace {

const std::string kCli = FSTS_CLI_PATH;
const fs::path kWork = fs::path("cli_work");

int run(const std::string& args, const std::string& log_name = "log.txt") {
  const std::string cmd = kCli + " " + args + " > " + (kWork / log_name).string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

size_t count_lines(const std::string& text) {
  size_t n = 0;
  for (char c : text) n += c == '\n' ? 1 : 0;
  return n;
}

void write_ucr_tsv(const fs::path& path, const testsupport::SyntheticSpec& spec) {
  const fsts::Dataset ds = testsupport::make_synthetic_raw(spec);
  std::ofstream out(path);
  for (const auto& ts : ds.series) {
    out << ts.label;
    for (int64_t t = 0; t < ts.original_length; ++t) {
      out << '\t' << ts.values[static_cast<size_t>(t)];
    }
    out << '\n';
  }
}

void write_mitbih_csv(const fs::path& path, int per_class, int length, uint64_t seed) {
  testsupport::SyntheticSpec spec;
  spec.n_classes = 5;
  spec.per_class = per_class;
  spec.length = length;
  spec.seed = seed;
  const fsts::Dataset ds = testsupport::make_synthetic_raw(spec);
  std::ofstream out(path);
  for (const auto& ts : ds.series) {
    for (int64_t t = 0; t < length; ++t) {
      const float v = t < ts.original_length ? ts.values[static_cast<size_t>(t)] : 0.0f;
      out << v << ',';
    }
    out << ts.label << '\n';
  }
}

struct Fixture {
  Fixture() {
    fs::remove_all(kWork);
    fs::create_directories(kWork / "data");
    fs::create_directories(kWork / "out");

    testsupport::SyntheticSpec train_a;
    train_a.n_classes = 3;
    train_a.per_class = 8;
    train_a.length = 48;
    train_a.seed = 41;
    write_ucr_tsv(kWork / "train_a.tsv", train_a);

    testsupport::SyntheticSpec val_a = train_a;
    val_a.seed = 42;
    val_a.per_class = 6;
    write_ucr_tsv(kWork / "val_a.tsv", val_a);

    write_mitbih_csv(kWork / "test.csv", 12, 48, 43);
  }
};

}  // namespace

TEST_CASE("cli end-to-end on synthetic data") {
  Fixture fx;

  SUBCASE("prep is idempotent and prints the dataset summary") {
    const std::string prep_args = "prep " + (kWork / "train_a.tsv").string() +
                                  " --name TrainA --role train --lmax 48 --out " +
                                  (kWork / "data").string();
    CHECK(run(prep_args, "prep.txt") == 0);
    const std::string log = slurp(kWork / "prep.txt");
    CHECK(log.find("TrainA: 24 series") != std::string::npos);
    CHECK(log.find("3 classes") != std::string::npos);
    const std::string bytes1 = slurp(kWork / "data" / "TrainA.fsts");
    CHECK(run(prep_args, "prep2.txt") == 0);
    CHECK(slurp(kWork / "data" / "TrainA.fsts") == bytes1);

    CHECK(run("prep " + (kWork / "missing.tsv").string() + " --out " +
              (kWork / "data").string(),
              "prep_missing.txt") == 2);
  }

  SUBCASE("full pipeline: train, eval, baselines, with thread-count-independent outputs") {
    REQUIRE(run("prep " + (kWork / "train_a.tsv").string() + " --name TrainA --role train" +
                " --lmax 48 --out " + (kWork / "data").string()) == 0);
    REQUIRE(run("prep " + (kWork / "val_a.tsv").string() + " --name ValA --role validation" +
                " --lmax 48 --out " + (kWork / "data").string()) == 0);
    REQUIRE(run("prep " + (kWork / "test.csv").string() +
                " --mitbih --name TestSet --role test --lmax 48 --out " +
                (kWork / "data").string()) == 0);

    const std::string train_args =
        "train --train " + (kWork / "data" / "TrainA.fsts").string() + " --val " +
        (kWork / "data" / "ValA.fsts").string() +
        " --seed 7 --cap-pairs 40 --batch-size 32 --lr 0.002 --patience 3 --epochs 3" +
        " --dropout 0.1 --checkpoint " + (kWork / "out" / "model.ckpt").string();
    REQUIRE(run(train_args, "train1.txt") == 0);
    const std::string payload1 = slurp(kWork / "out" / "model.ckpt.bin");
    const std::string report1 = slurp(kWork / "out" / "model.ckpt.report.csv");

    // identical bytes with a different thread count
    const std::string env_cmd = "OMP_NUM_THREADS=1 " + kCli + " " + train_args + " > " +
                                (kWork / "train2.txt").string() + " 2>&1";
    REQUIRE(std::system(env_cmd.c_str()) == 0);
    CHECK(slurp(kWork / "out" / "model.ckpt.bin") == payload1);
    CHECK(slurp(kWork / "out" / "model.ckpt.report.csv") == report1);

    // overlapping train/val names -> config error
    CHECK(run("train --train " + (kWork / "data" / "TrainA.fsts").string() + " --val " +
              (kWork / "data" / "TrainA.fsts").string(),
              "overlap.txt") == 3);

    const std::string eval_args = "eval --checkpoint " +
                                  (kWork / "out" / "model.ckpt").string() + " --data " +
                                  (kWork / "data" / "TestSet.fsts").string() +
                                  " --k 1,2 --queries 4 --tasks 3 --seed 11 --out " +
                                  (kWork / "out" / "eval").string();
    REQUIRE(run(eval_args, "eval.txt") == 0);
    const std::string results = slurp(kWork / "out" / "eval" / "results_scnn.csv");
    // header + |k|*tasks + |k| mean rows
    CHECK(count_lines(results) == 1 + 2 * 3 + 2);
    CHECK(results.rfind("model,k,task,accuracy", 0) == 0);
    CHECK(results.find("SCNN,1,mean,") != std::string::npos);

    // byte-identical eval reruns
    REQUIRE(run(eval_args, "eval2.txt") == 0);
    CHECK(slurp(kWork / "out" / "eval" / "results_scnn.csv") == results);

    for (const std::string kind : {"ed", "dtw"}) {
      const std::string base_args = "baseline --kind " + kind + " --data " +
                                    (kWork / "data" / "TestSet.fsts").string() +
                                    " --k 1,2 --queries 4 --tasks 3 --seed 11 --out " +
                                    (kWork / "out" / ("base_" + kind)).string();
      REQUIRE(run(base_args, "base_" + kind + ".txt") == 0);
    }
    const std::string dtw_rows = slurp(kWork / "out" / "base_dtw" / "results_dtw.csv");
    CHECK(dtw_rows.find("DTW,1,0,") != std::string::npos);
    CHECK(run("baseline --kind bogus --data " + (kWork / "data" / "TestSet.fsts").string(),
              "bogus.txt") == 3);

    const std::string pairs_args = "pairs --data " +
                                   (kWork / "data" / "TrainA.fsts").string() + " --seed 3" +
                                   " --out " + (kWork / "out" / "pairs.csv").string();
    REQUIRE(run(pairs_args, "pairs.txt") == 0);
    const std::string pairs_csv = slurp(kWork / "out" / "pairs.csv");
    CHECK(pairs_csv.rfind("index_a,index_b,label", 0) == 0);

    fs::remove_all(kWork);
  }
}
