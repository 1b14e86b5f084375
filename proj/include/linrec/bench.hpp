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


// Timing harness. Each sweep point builds a layer with a fixed seed, draws
// a standard normal input once, runs `warmup` untimed passes and then
// `repeats` experiments of `iters` timed passes each.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "linrec/layer.hpp"
#include "linrec/numerics.hpp"

namespace linrec {

enum class BenchPhase { kTrain, kInfer };
std::string_view bench_phase_name(BenchPhase p);
BenchPhase parse_bench_phase(std::string_view name);

struct BenchConfig {
  LayerKind layer = LayerKind::kS5;
  /// kTrain times forward + backward; kInfer times a loop of seqlen steps.
  BenchPhase phase = BenchPhase::kTrain;
  std::vector<std::size_t> batch_sizes{1};
  std::vector<std::size_t> seq_lens{1024};
  std::vector<std::size_t> d_models{64};
  std::size_t d_state = 16;
  std::size_t warmup = 10;
  std::size_t iters = 90;
  std::size_t repeats = 5;
  std::size_t threads = 1;
  DType dtype = DType::kF32;
  std::uint64_t seed = 0;

  /// Throws ConfigError for empty sweeps or zero counts.
  void validate() const;
  std::size_t points() const { return batch_sizes.size() * seq_lens.size() * d_models.size(); }
};

struct BenchRecord {
  LayerKind layer = LayerKind::kS5;
  BenchPhase phase = BenchPhase::kTrain;
  std::size_t batch = 0, seqlen = 0, d_model = 0, d_state = 0;
  DType dtype = DType::kF32;
  std::size_t threads = 1;
  double mean_ms = 0;  // mean over repeats of the per-pass mean
  double std_ms = 0;   // population std of the per-repeat means
  /// Heap allocations per step (infer) or per pass (train).
  double allocs_per_step = 0;
  std::string status = "ok";
  std::size_t iters_completed = 0;
  /// Per-repeat mean pass time (ms); mean_ms and std_ms summarize these.
  std::vector<double> repeat_means;
};

/// Population mean and standard deviation.
std::pair<double, double> mean_std(std::span<const double> xs);

std::string bench_csv_header();
std::string bench_csv_row(const BenchRecord& r);

/// Standard normal input of one sweep point; a pure function of the
/// config seed and the point's extents.
template <typename T>
Tensor<T> bench_input(const BenchConfig& cfg, std::size_t batch, std::size_t seqlen, std::size_t d_model);

/// Runs the full cross product, batch-major. Points that run out of memory
/// are reported with status "skipped".
std::vector<BenchRecord> run_bench(const BenchConfig& cfg,
                                   const std::function<void(const BenchRecord&)>& on_record = {});

struct ScalingConfig {
  LayerKind layer = LayerKind::kLRU;
  std::vector<std::size_t> lengths{256, 4096, 65536};
  std::vector<std::size_t> threads{1, 2, 4, 8};
  std::size_t batch = 1;
  std::size_t d_model = 16;
  std::size_t d_state = 64;
  std::size_t repeats = 5;
  DType dtype = DType::kF32;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ScalingRecord {
  LayerKind layer = LayerKind::kLRU;
  std::size_t length = 0, threads = 1, chunks = 1;
  double sequential_ms = 0, parallel_ms = 0, speedup = 1;
  /// The parallel plan degenerated to the sequential path; no separate
  /// parallel timing is taken and speedup is exactly 1.
  bool fallback = false;
};

std::string scaling_csv_header();
std::string scaling_csv_row(const ScalingRecord& r);

/// Median wall time of the untaped forward in each mode, on identical input.
std::vector<ScalingRecord> scaling_report(const ScalingConfig& cfg,
                                          const std::function<void(const ScalingRecord&)>& on_record = {});

}  // namespace linrec
