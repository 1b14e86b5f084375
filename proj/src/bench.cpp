// Copyright 2026 The linrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "linrec/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <new>

#include "linrec/alloc_counter.hpp"

namespace linrec {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::uint64_t point_seed(std::uint64_t seed, std::size_t batch, std::size_t seqlen, std::size_t d_model) {
  return Rng::mix(Rng::mix(Rng::mix(seed ^ batch) ^ seqlen) ^ d_model);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void require_positive_list(const std::vector<std::size_t>& xs, const char* name) {
  require(!xs.empty(), ErrorCode::kConfigError, std::string(name) + " must not be empty");
  for (std::size_t x : xs) require(x > 0, ErrorCode::kConfigError, std::string(name) + " entries must be positive");
}

template <typename T>
void reset_state(LayerState<T>& s) {
  std::fill(s.scan.x.re.begin(), s.scan.x.re.end(), T(0));
  std::fill(s.scan.x.im.begin(), s.scan.x.im.end(), T(0));
  s.scan.k = 0;
}

template <typename T>
BenchRecord run_point(const BenchConfig& cfg, std::size_t batch, std::size_t seqlen, std::size_t d_model) {
  BenchRecord rec;
  rec.layer = cfg.layer;
  rec.phase = cfg.phase;
  rec.batch = batch;
  rec.seqlen = seqlen;
  rec.d_model = d_model;
  rec.d_state = cfg.d_state;
  rec.dtype = cfg.dtype;
  rec.threads = cfg.threads;

  LayerConfig lc;
  lc.d_model = d_model;
  lc.d_state = cfg.d_state;
  Rng rng(point_seed(cfg.seed, batch, seqlen, d_model));
  const auto layer = make_layer<T>(cfg.layer, lc, rng);
  const Tensor<T> u = bench_input<T>(cfg, batch, seqlen, d_model);
  ForwardOptions<T> fo;
  fo.mode = cfg.threads > 1 ? ExecMode::kParallel : ExecMode::kSequential;
  fo.workers = cfg.threads;

  std::function<void()> pass;
  std::size_t steps_per_pass = 1;
  Tensor<T> grad_y;
  std::vector<LayerState<T>> states;
  std::vector<T> y_k(d_model);
  if (cfg.phase == BenchPhase::kTrain) {
    grad_y = Tensor<T>(u.shape());
    rng.split(1).fill_normal(grad_y.data());
    pass = [&] {
      Tape<T> tape;
      layer->forward(u, fo, &tape);
      layer->backward(tape, grad_y);
    };
  } else {
    for (std::size_t b = 0; b < batch; ++b) states.push_back(layer->make_state());
    steps_per_pass = seqlen * batch;
    pass = [&] {
      for (auto& s : states) reset_state(s);
      for (std::size_t k = 0; k < seqlen; ++k)
        for (std::size_t b = 0; b < batch; ++b)
          layer->step(states[b], std::span<const T>(u.ptr() + (b * seqlen + k) * d_model, d_model), y_k);
    };
  }

  for (std::size_t i = 0; i < cfg.warmup; ++i) pass();
  std::vector<double> means;
  std::uint64_t allocs = 0;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    AllocationProbe probe;
    const auto start = Clock::now();
    for (std::size_t i = 0; i < cfg.iters; ++i) pass();
    const double ms = elapsed_ms(start);
    allocs += probe.count();
    means.push_back(ms / static_cast<double>(cfg.iters));
    rec.iters_completed += cfg.iters;
  }
  std::tie(rec.mean_ms, rec.std_ms) = mean_std(means);
  rec.repeat_means = std::move(means);
  rec.allocs_per_step = static_cast<double>(allocs) / static_cast<double>(rec.iters_completed * steps_per_pass);
  return rec;
}

template <typename T>
ScalingRecord scaling_point(const ScalingConfig& cfg, const Layer<T>& layer, const Tensor<T>& u, std::size_t threads) {
  ScalingRecord rec;
  rec.layer = cfg.layer;
  rec.length = u.extent(1);
  rec.threads = threads;
  const ScanPlan plan = plan_parallel_scan(rec.length, threads);
  rec.chunks = plan.fallback ? 1 : plan.chunks;
  rec.fallback = plan.fallback;

  auto median_ms = [&](const ForwardOptions<T>& fo) {
    layer.forward(u, fo);
    std::vector<double> ts;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      const auto start = Clock::now();
      layer.forward(u, fo);
      ts.push_back(elapsed_ms(start));
    }
    std::sort(ts.begin(), ts.end());
    return ts[ts.size() / 2];
  };
  ForwardOptions<T> seq;
  rec.sequential_ms = median_ms(seq);
  if (plan.fallback) {
    rec.parallel_ms = rec.sequential_ms;
    rec.speedup = 1.0;
    return rec;
  }
  ForwardOptions<T> par;
  par.mode = ExecMode::kParallel;
  par.workers = threads;
  rec.parallel_ms = median_ms(par);
  rec.speedup = rec.sequential_ms / rec.parallel_ms;
  return rec;
}

template <typename T>
std::vector<ScalingRecord> scaling_typed(const ScalingConfig& cfg,
                                         const std::function<void(const ScalingRecord&)>& on_record) {
  LayerConfig lc;
  lc.d_model = cfg.d_model;
  lc.d_state = cfg.d_state;
  Rng rng(cfg.seed);
  const auto layer = make_layer<T>(cfg.layer, lc, rng);
  std::vector<ScalingRecord> out;
  for (std::size_t length : cfg.lengths) {
    Tensor<T> u(Shape{cfg.batch, length, cfg.d_model});
    rng.split(length).fill_normal(u.data());
    for (std::size_t threads : cfg.threads) {
      out.push_back(scaling_point(cfg, *layer, u, threads));
      if (on_record) on_record(out.back());
    }
  }
  return out;
}

}  // namespace

std::string_view bench_phase_name(BenchPhase p) { return p == BenchPhase::kTrain ? "train" : "infer"; }

BenchPhase parse_bench_phase(std::string_view name) {
  if (name == "train") return BenchPhase::kTrain;
  if (name == "infer") return BenchPhase::kInfer;
  fail(ErrorCode::kConfigError, "phase must be train or infer, got '" + std::string(name) + "'");
}

void BenchConfig::validate() const {
  require_positive_list(batch_sizes, "batch_sizes");
  require_positive_list(seq_lens, "seq_lens");
  require_positive_list(d_models, "d_models");
  require(d_state > 0, ErrorCode::kConfigError, "d_state must be positive");
  require(warmup >= 1 && iters >= 1 && repeats >= 1, ErrorCode::kConfigError,
          "warmup, iters and repeats must be at least 1");
  require(threads >= 1, ErrorCode::kConfigError, "threads must be at least 1");
}

void ScalingConfig::validate() const {
  require_positive_list(lengths, "lengths");
  require_positive_list(threads, "threads");
  require(std::is_sorted(lengths.begin(), lengths.end()), ErrorCode::kConfigError, "lengths must be ascending");
  require(batch > 0 && d_model > 0 && d_state > 0 && repeats > 0, ErrorCode::kConfigError,
          "batch, d_model, d_state and repeats must be positive");
}

std::pair<double, double> mean_std(std::span<const double> xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

std::string bench_csv_header() {
  return "layer,phase,batch,seqlen,d_model,d_state,dtype,threads,mean_ms,std_ms,allocs_per_step,status";
}

std::string bench_csv_row(const BenchRecord& r) {
  return std::string(layer_kind_name(r.layer)) + "," + std::string(bench_phase_name(r.phase)) + "," +
         std::to_string(r.batch) + "," + std::to_string(r.seqlen) + "," + std::to_string(r.d_model) + "," +
         std::to_string(r.d_state) + "," + std::string(dtype_name(r.dtype)) + "," + std::to_string(r.threads) + "," +
         format_double(r.mean_ms) + "," + format_double(r.std_ms) + "," + format_double(r.allocs_per_step) + "," +
         r.status;
}

template <typename T>
Tensor<T> bench_input(const BenchConfig& cfg, std::size_t batch, std::size_t seqlen, std::size_t d_model) {
  Tensor<T> u(Shape{batch, seqlen, d_model});
  Rng(point_seed(cfg.seed, batch, seqlen, d_model)).split(0).fill_normal(u.data());
  return u;
}

std::vector<BenchRecord> run_bench(const BenchConfig& cfg, const std::function<void(const BenchRecord&)>& on_record) {
  cfg.validate();
  std::vector<BenchRecord> out;
  for (std::size_t batch : cfg.batch_sizes)
    for (std::size_t seqlen : cfg.seq_lens)
      for (std::size_t d_model : cfg.d_models) {
        BenchRecord rec;
        try {
          rec = cfg.dtype == DType::kF32 ? run_point<float>(cfg, batch, seqlen, d_model)
                                         : run_point<double>(cfg, batch, seqlen, d_model);
        } catch (const std::bad_alloc&) {
          rec = BenchRecord{};
          rec.layer = cfg.layer;
          rec.phase = cfg.phase;
          rec.batch = batch;
          rec.seqlen = seqlen;
          rec.d_model = d_model;
          rec.d_state = cfg.d_state;
          rec.dtype = cfg.dtype;
          rec.threads = cfg.threads;
          rec.status = "skipped";
        }
        out.push_back(rec);
        if (on_record) on_record(rec);
      }
  return out;
}

std::string scaling_csv_header() { return "layer,length,threads,chunks,sequential_ms,parallel_ms,speedup,fallback"; }

std::string scaling_csv_row(const ScalingRecord& r) {
  return std::string(layer_kind_name(r.layer)) + "," + std::to_string(r.length) + "," + std::to_string(r.threads) +
         "," + std::to_string(r.chunks) + "," + format_double(r.sequential_ms) + "," + format_double(r.parallel_ms) +
         "," + format_double(r.speedup) + "," + (r.fallback ? "1" : "0");
}

std::vector<ScalingRecord> scaling_report(const ScalingConfig& cfg,
                                          const std::function<void(const ScalingRecord&)>& on_record) {
  cfg.validate();
  return cfg.dtype == DType::kF32 ? scaling_typed<float>(cfg, on_record) : scaling_typed<double>(cfg, on_record);
}

template Tensor<float> bench_input<float>(const BenchConfig&, std::size_t, std::size_t, std::size_t);
template Tensor<double> bench_input<double>(const BenchConfig&, std::size_t, std::size_t, std::size_t);

}  // namespace linrec
