// Benchmark comparing the OpenMP kernels against their serial reference
// twins on training-sized workloads. Results must be bitwise identical; the
// table reports timings, speedup and the max absolute deviation (expected 0).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fsts/baselines.hpp"
#include "fsts/kernels.hpp"
#include "fsts/reference.hpp"
#include "fsts/rng.hpp"

using namespace fsts;

namespace {

Tensor random_tensor(std::vector<int64_t> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.values) v = static_cast<float>(rng.uniform(-1, 1));
  return t;
}

double time_ms(const std::function<void()>& fn, int repeats) {
  fn();  // warm up
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / repeats;
}

void row(const std::string& name, double serial_ms, double parallel_ms, double max_dev) {
  std::printf("%-28s %10.2f %10.2f %9.2fx %10.3g\n", name.c_str(), serial_ms, parallel_ms,
              serial_ms / parallel_ms, max_dev);
}

double max_abs_dev(const std::vector<float>& a, const std::vector<float>& b) {
  double worst = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return worst;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (compiled without OpenMP)\n");
#endif
  std::printf("%-28s %10s %10s %10s %10s\n", "kernel", "serial ms", "omp ms", "speedup",
              "max |dev|");

  Rng rng(1);

  {  // first conv block of the training forward pass
    const Tensor x = random_tensor({128, 187, 1}, rng);
    const Tensor f = random_tensor({7, 1, 128}, rng);
    const Tensor b = random_tensor({128}, rng);
    Tensor out_s, out_p;
    const double ts = time_ms([&] { out_s = ref::conv1d_forward(x, f, b); }, 5);
    const double tp = time_ms([&] { out_p = nn::conv1d_forward(x, f, b); }, 5);
    row("conv1d fwd 128x187x1->128", ts, tp, max_abs_dev(out_s.values, out_p.values));
  }
  {  // second conv block, the training hot spot
    const Tensor x = random_tensor({128, 62, 128}, rng);
    const Tensor f = random_tensor({5, 128, 64}, rng);
    const Tensor b = random_tensor({64}, rng);
    Tensor out_s, out_p;
    const double ts = time_ms([&] { out_s = ref::conv1d_forward(x, f, b); }, 3);
    const double tp = time_ms([&] { out_p = nn::conv1d_forward(x, f, b); }, 3);
    row("conv1d fwd 128x62x128->64", ts, tp, max_abs_dev(out_s.values, out_p.values));

    const Tensor gy = random_tensor({128, 62, 64}, rng);
    nn::Conv1dGrads<float> gs, gp;
    const double bs = time_ms([&] { gs = ref::conv1d_backward(gy, x, f); }, 3);
    const double bp = time_ms([&] { gp = nn::conv1d_backward(gy, x, f); }, 3);
    row("conv1d bwd 128x62x128->64", bs, bp,
        std::max({max_abs_dev(gs.input.values, gp.input.values),
                  max_abs_dev(gs.filters.values, gp.filters.values),
                  max_abs_dev(gs.bias.values, gp.bias.values)}));
  }
  {  // relational head
    const Tensor x = random_tensor({256, 640}, rng);
    const Tensor w = random_tensor({640, 1}, rng);
    const Tensor b = random_tensor({1}, rng);
    Tensor out_s, out_p;
    const double ts = time_ms([&] { out_s = ref::dense_forward(x, w, b); }, 20);
    const double tp = time_ms([&] { out_p = nn::dense_forward(x, w, b); }, 20);
    row("dense fwd 256x640->1", ts, tp, max_abs_dev(out_s.values, out_p.values));
  }
  {  // batch norm over a conv activation
    const Tensor x = random_tensor({128, 187, 128}, rng);
    const Tensor gamma = random_tensor({128}, rng);
    const Tensor beta = random_tensor({128}, rng);
    Tensor rm_s({128}, 0.0f), rv_s({128}, 1.0f), rm_p({128}, 0.0f), rv_p({128}, 1.0f);
    Tensor out_s, out_p;
    const double ts = time_ms(
        [&] {
          out_s = ref::batchnorm1d_forward(x, gamma, beta, rm_s, rv_s, Mode::train, 0.9f,
                                           1e-5f);
        },
        5);
    const double tp = time_ms(
        [&] {
          out_p = nn::batchnorm1d_forward(x, gamma, beta, rm_p, rv_p, Mode::train, 0.9f,
                                          1e-5f);
        },
        5);
    row("batchnorm fwd 128x187x128", ts, tp, max_abs_dev(out_s.values, out_p.values));
  }
  {  // a 1-NN query batch under DTW, parallel across queries
    const int n_support = 50, n_query = 40, len = 187;
    std::vector<std::vector<float>> support(n_support), query(n_query);
    for (auto& s : support) {
      s.resize(len);
      for (auto& v : s) v = static_cast<float>(rng.uniform(0, 1));
    }
    for (auto& q : query) {
      q.resize(len);
      for (auto& v : q) v = static_cast<float>(rng.uniform(0, 1));
    }
    std::vector<float> out_s(n_query), out_p(n_query);
    const double ts = time_ms(
        [&] {
          for (int q = 0; q < n_query; ++q) {
            double best = 1e300;
            for (int s = 0; s < n_support; ++s) {
              best = std::min(best, ref::dtw_full_matrix(support[s].data(), len,
                                                         query[q].data(), len));
            }
            out_s[q] = static_cast<float>(best);
          }
        },
        2);
    const double tp = time_ms(
        [&] {
#pragma omp parallel for schedule(dynamic)
          for (int q = 0; q < n_query; ++q) {
            double best = 1e300;
            for (int s = 0; s < n_support; ++s) {
              best = std::min(best, dtw_distance(support[s], query[q]));
            }
            out_p[q] = static_cast<float>(best);
          }
        },
        2);
    row("dtw 1-NN 40q x 50s x 187", ts, tp, max_abs_dev(out_s, out_p));
  }
  return 0;
}
