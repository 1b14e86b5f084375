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


#include "linrec/linrec.h"

#include <cstring>
#include <new>
#include <string>

#include "linrec/bench.hpp"
#include "linrec/checkpoint.hpp"
#include "linrec/generate.hpp"
#include "linrec/layer.hpp"
#include "linrec/model.hpp"
#include "linrec/validate.hpp"

using namespace linrec;

struct linrec_layer {
  DType dtype;
  std::unique_ptr<Layer<float>> f32;
  std::unique_ptr<Layer<double>> f64;
};

struct linrec_layer_state {
  const linrec_layer* owner;
  LayerState<float> f32;
  LayerState<double> f64;
};

struct linrec_model {
  DType dtype;
  std::unique_ptr<LMHeadModel<float>> f32;
  std::unique_ptr<LMHeadModel<double>> f64;
};

namespace {

thread_local std::string g_last_error;

linrec_status set_error(linrec_status s, const char* what) {
  g_last_error = what;
  return s;
}

template <typename Fn>
linrec_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return LINREC_OK;
  } catch (const Error& e) {
    return set_error(static_cast<linrec_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(LINREC_OUT_OF_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return set_error(LINREC_INTERNAL_ERROR, e.what());
  }
}

#define LINREC_REQUIRE_ARG(cond) \
  if (!(cond)) return set_error(LINREC_INVALID_ARGUMENT, "invalid argument: " #cond)

DType to_dtype(linrec_dtype d) {
  if (d == LINREC_F32) return DType::kF32;
  if (d == LINREC_F64) return DType::kF64;
  fail(ErrorCode::kConfigError, "unknown dtype value " + std::to_string(static_cast<int>(d)));
}

ExecMode to_mode(linrec_mode m) { return m == LINREC_PARALLEL ? ExecMode::kParallel : ExecMode::kSequential; }

template <typename T>
void forward_typed(const Layer<T>& layer, const void* u, std::size_t batch, std::size_t length, const void* deltas,
                   linrec_mode mode, std::size_t workers, void* y) {
  const std::size_t d = layer.config().d_model, n = batch * length * d;
  const T* up = static_cast<const T*>(u);
  Tensor<T> in(Shape{batch, length, d}, std::vector<T>(up, up + n));
  ForwardOptions<T> fo;
  fo.mode = to_mode(mode);
  fo.workers = workers == 0 ? 1 : workers;
  if (deltas) fo.deltas = std::span<const T>(static_cast<const T*>(deltas), length);
  const Tensor<T> out = layer.forward(in, fo);
  std::memcpy(y, out.ptr(), n * sizeof(T));
}

std::vector<std::size_t> list_or(const size_t* xs, size_t n, std::vector<std::size_t> fallback) {
  if (xs == nullptr || n == 0) return fallback;
  return std::vector<std::size_t>(xs, xs + n);
}

template <typename Fn>
auto with_model(const linrec_model& m, Fn&& fn) {
  if (m.dtype == DType::kF32) return fn(*m.f32);
  return fn(*m.f64);
}

}  // namespace

extern "C" {

const char* linrec_version(void) { return "0.1.0"; }

const char* linrec_status_name(linrec_status s) {
  switch (s) {
    case LINREC_OK: return "OK";
    case LINREC_INVALID_ARGUMENT: return "InvalidArgument";
    case LINREC_OUT_OF_MEMORY: return "OutOfMemory";
    case LINREC_INTERNAL_ERROR: return "InternalError";
    default: break;
  }
  if (s >= LINREC_SHAPE_ERROR && s <= LINREC_IO_ERROR) return error_code_name(static_cast<ErrorCode>(s)).data();
  return "Unknown";
}

const char* linrec_last_error(void) { return g_last_error.c_str(); }

void linrec_set_warning_handler(linrec_line_fn fn, void* user) {
  if (fn == nullptr) {
    set_warning_handler(nullptr);
    return;
  }
  set_warning_handler([fn, user](std::string_view msg) { fn(std::string(msg).c_str(), user); });
}

// ---- layers ----

void linrec_layer_config_init(linrec_layer_config* cfg) {
  if (cfg == nullptr) return;
  *cfg = linrec_layer_config{};
  cfg->kind = "s5";
  cfg->d_model = 1;
  cfg->d_state = 16;
  cfg->dtype = LINREC_F32;
}

linrec_status linrec_layer_create(const linrec_layer_config* cfg, linrec_layer** out) {
  LINREC_REQUIRE_ARG(cfg != nullptr && out != nullptr && cfg->kind != nullptr);
  *out = nullptr;
  return guarded([&] {
    LayerConfig lc;
    lc.d_model = cfg->d_model;
    lc.d_state = cfg->d_state;
    if (cfg->discretization) lc.discretization = parse_discretization(cfg->discretization);
    lc.async = cfg->async != 0;
    lc.d_rank = cfg->d_rank;
    const LayerKind kind = parse_layer_kind(cfg->kind);
    Rng rng(cfg->seed);
    auto h = std::make_unique<linrec_layer>();
    h->dtype = to_dtype(cfg->dtype);
    if (h->dtype == DType::kF32)
      h->f32 = make_layer<float>(kind, lc, rng);
    else
      h->f64 = make_layer<double>(kind, lc, rng);
    *out = h.release();
  });
}

void linrec_layer_destroy(linrec_layer* layer) { delete layer; }

linrec_dtype linrec_layer_dtype(const linrec_layer* layer) {
  return layer && layer->dtype == DType::kF64 ? LINREC_F64 : LINREC_F32;
}

linrec_status linrec_layer_forward(const linrec_layer* layer, const void* u, size_t batch, size_t length,
                                   const void* deltas, linrec_mode mode, size_t workers, void* y) {
  LINREC_REQUIRE_ARG(layer != nullptr && (u != nullptr || batch * length == 0) && (y != nullptr || batch * length == 0));
  return guarded([&] {
    if (layer->dtype == DType::kF32)
      forward_typed(*layer->f32, u, batch, length, deltas, mode, workers, y);
    else
      forward_typed(*layer->f64, u, batch, length, deltas, mode, workers, y);
  });
}

size_t linrec_layer_param_count(const linrec_layer* layer) {
  if (layer == nullptr) return 0;
  return layer->dtype == DType::kF32 ? layer->f32->params().size() : layer->f64->params().size();
}

linrec_status linrec_layer_param_info(const linrec_layer* layer, size_t i, const char** name, size_t* numel) {
  LINREC_REQUIRE_ARG(layer != nullptr && i < linrec_layer_param_count(layer));
  return guarded([&] {
    auto info = [&](const auto& params) {
      if (name) *name = params[i].first.c_str();
      if (numel) *numel = params[i].second.size();
    };
    if (layer->dtype == DType::kF32) info(layer->f32->params()); else info(layer->f64->params());
  });
}

linrec_status linrec_layer_param_read(const linrec_layer* layer, size_t i, void* dst) {
  LINREC_REQUIRE_ARG(layer != nullptr && dst != nullptr && i < linrec_layer_param_count(layer));
  return guarded([&] {
    auto copy = [&](const auto& params) {
      const auto& t = params[i].second;
      std::memcpy(dst, t.ptr(), t.size() * sizeof(t[0]));
    };
    if (layer->dtype == DType::kF32) copy(layer->f32->params()); else copy(layer->f64->params());
  });
}

linrec_status linrec_layer_param_write(linrec_layer* layer, size_t i, const void* src) {
  LINREC_REQUIRE_ARG(layer != nullptr && src != nullptr && i < linrec_layer_param_count(layer));
  return guarded([&] {
    auto copy = [&](auto& params) {
      auto& t = params[i].second;
      std::memcpy(t.ptr(), src, t.size() * sizeof(t[0]));
    };
    if (layer->dtype == DType::kF32) copy(layer->f32->params()); else copy(layer->f64->params());
  });
}

linrec_status linrec_layer_state_create(const linrec_layer* layer, linrec_layer_state** out) {
  LINREC_REQUIRE_ARG(layer != nullptr && out != nullptr);
  *out = nullptr;
  return guarded([&] {
    auto s = std::make_unique<linrec_layer_state>();
    s->owner = layer;
    if (layer->dtype == DType::kF32)
      s->f32 = layer->f32->make_state();
    else
      s->f64 = layer->f64->make_state();
    *out = s.release();
  });
}

void linrec_layer_state_destroy(linrec_layer_state* state) { delete state; }

linrec_status linrec_layer_step(const linrec_layer* layer, linrec_layer_state* state, const void* u_k, double delta,
                                void* y_k) {
  LINREC_REQUIRE_ARG(layer != nullptr && state != nullptr && u_k != nullptr && y_k != nullptr);
  LINREC_REQUIRE_ARG(state->owner == layer);
  return guarded([&] {
    if (layer->dtype == DType::kF32) {
      const std::size_t d = layer->f32->config().d_model;
      layer->f32->step(state->f32, std::span<const float>(static_cast<const float*>(u_k), d),
                       std::span<float>(static_cast<float*>(y_k), d), static_cast<float>(delta));
    } else {
      const std::size_t d = layer->f64->config().d_model;
      layer->f64->step(state->f64, std::span<const double>(static_cast<const double*>(u_k), d),
                       std::span<double>(static_cast<double*>(y_k), d), delta);
    }
  });
}

// ---- model ----

linrec_status linrec_model_create(const char* config_json, linrec_dtype dtype, uint64_t seed, linrec_model** out) {
  LINREC_REQUIRE_ARG(config_json != nullptr && out != nullptr);
  *out = nullptr;
  return guarded([&] {
    const ModelConfig cfg = ModelConfig::from_json(config_json);
    Rng rng(seed);
    auto m = std::make_unique<linrec_model>();
    m->dtype = to_dtype(dtype);
    if (m->dtype == DType::kF32)
      m->f32 = build_model<float>(cfg, rng);
    else
      m->f64 = build_model<double>(cfg, rng);
    *out = m.release();
  });
}

linrec_status linrec_model_load(const char* path, linrec_dtype dtype, linrec_model** out) {
  LINREC_REQUIRE_ARG(path != nullptr && out != nullptr);
  *out = nullptr;
  return guarded([&] {
    auto m = std::make_unique<linrec_model>();
    m->dtype = to_dtype(dtype);
    if (m->dtype == DType::kF32)
      m->f32 = load_checkpoint<float>(path);
    else
      m->f64 = load_checkpoint<double>(path);
    *out = m.release();
  });
}

linrec_status linrec_model_save(const linrec_model* model, const char* path) {
  LINREC_REQUIRE_ARG(model != nullptr && path != nullptr);
  return guarded([&] { with_model(*model, [&](const auto& m) { save_checkpoint(m, path); }); });
}

void linrec_model_destroy(linrec_model* model) { delete model; }

linrec_status linrec_model_config(const linrec_model* model, char* buf, size_t capacity, size_t* needed) {
  LINREC_REQUIRE_ARG(model != nullptr);
  return guarded([&] {
    const std::string json = with_model(*model, [](const auto& m) { return m.config().to_json(); });
    if (needed) *needed = json.size() + 1;
    if (buf && capacity >= json.size() + 1) std::memcpy(buf, json.c_str(), json.size() + 1);
  });
}

size_t linrec_model_param_count(const linrec_model* model) {
  if (model == nullptr) return 0;
  return with_model(*model, [](const auto& m) { return m.num_params(); });
}

linrec_status linrec_model_forward(const linrec_model* model, const int32_t* tokens, size_t batch, size_t length,
                                   void* logits) {
  LINREC_REQUIRE_ARG(model != nullptr && tokens != nullptr && logits != nullptr);
  return guarded([&] {
    const Tensor<Token> t(Shape{batch, length}, std::vector<Token>(tokens, tokens + batch * length));
    with_model(*model, [&](const auto& m) {
      const auto out = m.forward(t);
      std::memcpy(logits, out.ptr(), out.size() * sizeof(out[0]));
    });
  });
}

linrec_status linrec_model_generate(const linrec_model* model, const int32_t* prompt, size_t prompt_len,
                                    size_t max_new, double temperature, uint64_t seed, int32_t* out,
                                    uint64_t* max_step_allocs) {
  LINREC_REQUIRE_ARG(model != nullptr && prompt != nullptr && out != nullptr);
  return guarded([&] {
    GenerateOptions opt;
    opt.max_new = max_new;
    opt.temperature = temperature;
    opt.seed = seed;
    const GenerateResult r =
        with_model(*model, [&](const auto& m) { return generate(m, std::span<const Token>(prompt, prompt_len), opt); });
    std::copy(r.tokens.begin(), r.tokens.end(), out);
    if (max_step_allocs) {
      std::uint64_t mx = 0;
      for (std::size_t k = 1; k < r.allocs_per_step.size(); ++k) mx = std::max<std::uint64_t>(mx, r.allocs_per_step[k]);
      *max_step_allocs = mx;
    }
  });
}

// ---- bench / validate / scaling ----

void linrec_bench_config_init(linrec_bench_config* cfg) {
  if (cfg == nullptr) return;
  const BenchConfig d;
  *cfg = linrec_bench_config{};
  cfg->layer = "s5";
  cfg->phase = "train";
  cfg->d_state = d.d_state;
  cfg->warmup = d.warmup;
  cfg->iters = d.iters;
  cfg->repeats = d.repeats;
  cfg->threads = d.threads;
  cfg->dtype = d.dtype == DType::kF32 ? LINREC_F32 : LINREC_F64;
  cfg->seed = d.seed;
}

linrec_status linrec_bench_run(const linrec_bench_config* cfg, linrec_line_fn on_line, void* user) {
  LINREC_REQUIRE_ARG(cfg != nullptr && cfg->layer != nullptr && cfg->phase != nullptr);
  return guarded([&] {
    BenchConfig bc;
    bc.layer = parse_layer_kind(cfg->layer);
    bc.phase = parse_bench_phase(cfg->phase);
    bc.batch_sizes = list_or(cfg->batch_sizes, cfg->n_batch_sizes, bc.batch_sizes);
    bc.seq_lens = list_or(cfg->seq_lens, cfg->n_seq_lens, bc.seq_lens);
    bc.d_models = list_or(cfg->d_models, cfg->n_d_models, bc.d_models);
    bc.d_state = cfg->d_state;
    bc.warmup = cfg->warmup;
    bc.iters = cfg->iters;
    bc.repeats = cfg->repeats;
    bc.threads = cfg->threads;
    bc.dtype = to_dtype(cfg->dtype);
    bc.seed = cfg->seed;
    bc.validate();
    if (on_line) on_line(bench_csv_header().c_str(), user);
    run_bench(bc, [&](const BenchRecord& r) {
      if (on_line) on_line(bench_csv_row(r).c_str(), user);
    });
  });
}

linrec_status linrec_validate(const char* layer, linrec_line_fn on_line, void* user, int* passed) {
  return guarded([&] {
    ValidationOptions opt;
    if (layer != nullptr && *layer != '\0') opt.layer = parse_layer_kind(layer);
    const auto report = run_validation(opt, [&](const ValidationCell& c) {
      if (on_line) on_line(format_cell(c).c_str(), user);
    });
    if (passed) *passed = report.passed() ? 1 : 0;
  });
}

void linrec_scaling_config_init(linrec_scaling_config* cfg) {
  if (cfg == nullptr) return;
  const ScalingConfig d;
  *cfg = linrec_scaling_config{};
  cfg->layer = "lru";
  cfg->batch = d.batch;
  cfg->d_model = d.d_model;
  cfg->d_state = d.d_state;
  cfg->repeats = d.repeats;
  cfg->dtype = d.dtype == DType::kF32 ? LINREC_F32 : LINREC_F64;
  cfg->seed = d.seed;
}

linrec_status linrec_scaling_run(const linrec_scaling_config* cfg, linrec_line_fn on_line, void* user) {
  LINREC_REQUIRE_ARG(cfg != nullptr && cfg->layer != nullptr);
  return guarded([&] {
    ScalingConfig sc;
    sc.layer = parse_layer_kind(cfg->layer);
    sc.lengths = list_or(cfg->lengths, cfg->n_lengths, sc.lengths);
    sc.threads = list_or(cfg->threads, cfg->n_threads, sc.threads);
    sc.batch = cfg->batch;
    sc.d_model = cfg->d_model;
    sc.d_state = cfg->d_state;
    sc.repeats = cfg->repeats;
    sc.dtype = to_dtype(cfg->dtype);
    sc.seed = cfg->seed;
    sc.validate();
    if (on_line) on_line(scaling_csv_header().c_str(), user);
    scaling_report(sc, [&](const ScalingRecord& r) {
      if (on_line) on_line(scaling_csv_row(r).c_str(), user);
    });
  });
}

}  // extern "C"
