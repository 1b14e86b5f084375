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


/* C interface to linrec. All functions return a linrec_status; on failure
 * linrec_last_error() holds a message for the calling thread. Objects are
 * opaque handles released with the matching _destroy function. Numeric
 * buffers hold float or double according to the handle's dtype. */

#ifndef LINREC_LINREC_H_
#define LINREC_LINREC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(LINREC_BUILDING_DLL)
#define LINREC_API __declspec(dllexport)
#else
#define LINREC_API __declspec(dllimport)
#endif
#else
#define LINREC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum linrec_status {
  LINREC_OK = 0,
  LINREC_SHAPE_ERROR = 1,
  LINREC_SINGULAR_BILINEAR = 2,
  LINREC_NON_MONOTONE_TIMESTAMPS = 3,
  LINREC_UNKNOWN_LAYER = 4,
  LINREC_TAPE_CONSUMED = 5,
  LINREC_UNKNOWN_MIXER = 6,
  LINREC_UNSUPPORTED = 7,
  LINREC_TOKEN_OUT_OF_RANGE = 8,
  LINREC_BAD_MAGIC = 9,
  LINREC_CORRUPT_HEADER = 10,
  LINREC_SHAPE_MISMATCH = 11,
  LINREC_CONFIG_ERROR = 12,
  LINREC_IO_ERROR = 13,
  LINREC_INVALID_ARGUMENT = 100,
  LINREC_OUT_OF_MEMORY = 101,
  LINREC_INTERNAL_ERROR = 102
} linrec_status;

typedef enum linrec_dtype { LINREC_F32 = 0, LINREC_F64 = 1 } linrec_dtype;

typedef enum linrec_mode { LINREC_SEQUENTIAL = 0, LINREC_PARALLEL = 1 } linrec_mode;

/* Receives one line of text (no trailing newline). */
typedef void (*linrec_line_fn)(const char* line, void* user);

LINREC_API const char* linrec_version(void);
LINREC_API const char* linrec_status_name(linrec_status status);
/* Message of the last failed call on this thread; "" if none. */
LINREC_API const char* linrec_last_error(void);
/* Routes configuration warnings; NULL restores printing to stderr. */
LINREC_API void linrec_set_warning_handler(linrec_line_fn fn, void* user);

/* ---- layers ---- */

typedef struct linrec_layer linrec_layer;
typedef struct linrec_layer_state linrec_layer_state;

typedef struct linrec_layer_config {
  const char* kind;           /* "s4d", "s5", "lru", "s6", "rglru" */
  size_t d_model;
  size_t d_state;
  const char* discretization; /* "zoh", "bilinear", "dirac" or NULL for the default */
  int async;                  /* nonzero: per-step intervals passed to forward/step */
  size_t d_rank;              /* S6 only; 0 selects the default */
  linrec_dtype dtype;
  uint64_t seed;
} linrec_layer_config;

LINREC_API void linrec_layer_config_init(linrec_layer_config* cfg);
LINREC_API linrec_status linrec_layer_create(const linrec_layer_config* cfg, linrec_layer** out);
LINREC_API void linrec_layer_destroy(linrec_layer* layer);
LINREC_API linrec_dtype linrec_layer_dtype(const linrec_layer* layer);

/* u, y: [batch, length, d_model]; deltas: [length] for async layers, else NULL. */
LINREC_API linrec_status linrec_layer_forward(const linrec_layer* layer, const void* u, size_t batch, size_t length,
                                              const void* deltas, linrec_mode mode, size_t workers, void* y);

LINREC_API size_t linrec_layer_param_count(const linrec_layer* layer);
/* Name and element count of parameter i. */
LINREC_API linrec_status linrec_layer_param_info(const linrec_layer* layer, size_t i, const char** name, size_t* numel);
LINREC_API linrec_status linrec_layer_param_read(const linrec_layer* layer, size_t i, void* dst);
LINREC_API linrec_status linrec_layer_param_write(linrec_layer* layer, size_t i, const void* src);

LINREC_API linrec_status linrec_layer_state_create(const linrec_layer* layer, linrec_layer_state** out);
LINREC_API void linrec_layer_state_destroy(linrec_layer_state* state);
/* One recurrence step; u_k, y_k: [d_model]. delta is ignored unless async. */
LINREC_API linrec_status linrec_layer_step(const linrec_layer* layer, linrec_layer_state* state, const void* u_k,
                                           double delta, void* y_k);

/* ---- language model ---- */

typedef struct linrec_model linrec_model;

/* config_json uses the field names d_model, d_state, n_layer, vocab_size,
 * d_intermediate, mixer_types, mixer_kwargs, tie_embeddings. */
LINREC_API linrec_status linrec_model_create(const char* config_json, linrec_dtype dtype, uint64_t seed,
                                             linrec_model** out);
LINREC_API linrec_status linrec_model_load(const char* path, linrec_dtype dtype, linrec_model** out);
LINREC_API linrec_status linrec_model_save(const linrec_model* model, const char* path);
LINREC_API void linrec_model_destroy(linrec_model* model);

/* Copies the config JSON (NUL-terminated) into buf when it fits; *needed
 * receives the required size including the terminator. */
LINREC_API linrec_status linrec_model_config(const linrec_model* model, char* buf, size_t capacity, size_t* needed);
LINREC_API size_t linrec_model_param_count(const linrec_model* model);

/* tokens: [batch, length]; logits: [batch, length, vocab_size]. */
LINREC_API linrec_status linrec_model_forward(const linrec_model* model, const int32_t* tokens, size_t batch,
                                              size_t length, void* logits);

/* Writes prompt_len + max_new tokens to out. temperature 0 is greedy.
 * max_step_allocs (optional) receives the largest heap allocation count
 * of any generated token after the first. */
LINREC_API linrec_status linrec_model_generate(const linrec_model* model, const int32_t* prompt, size_t prompt_len,
                                               size_t max_new, double temperature, uint64_t seed, int32_t* out,
                                               uint64_t* max_step_allocs);

/* ---- benchmarks and validation ---- */

typedef struct linrec_bench_config {
  const char* layer;
  const char* phase; /* "train" or "infer" */
  const size_t* batch_sizes;
  size_t n_batch_sizes;
  const size_t* seq_lens;
  size_t n_seq_lens;
  const size_t* d_models;
  size_t n_d_models;
  size_t d_state;
  size_t warmup;
  size_t iters;
  size_t repeats;
  size_t threads;
  linrec_dtype dtype;
  uint64_t seed;
} linrec_bench_config;

/* Fills the protocol defaults; list pointers are left NULL, which selects
 * the library's default sweep. */
LINREC_API void linrec_bench_config_init(linrec_bench_config* cfg);
/* Emits the CSV header, then one CSV row per sweep point as it finishes. */
LINREC_API linrec_status linrec_bench_run(const linrec_bench_config* cfg, linrec_line_fn on_line, void* user);

/* layer NULL runs every kind plus the full-model gradient check. Emits one
 * line per matrix cell; *passed is 1 when every cell passed. */
LINREC_API linrec_status linrec_validate(const char* layer, linrec_line_fn on_line, void* user, int* passed);

typedef struct linrec_scaling_config {
  const char* layer;
  const size_t* lengths;
  size_t n_lengths;
  const size_t* threads;
  size_t n_threads;
  size_t batch;
  size_t d_model;
  size_t d_state;
  size_t repeats;
  linrec_dtype dtype;
  uint64_t seed;
} linrec_scaling_config;

LINREC_API void linrec_scaling_config_init(linrec_scaling_config* cfg);
/* Emits a CSV header and one row per (length, threads) cell. */
LINREC_API linrec_status linrec_scaling_run(const linrec_scaling_config* cfg, linrec_line_fn on_line, void* user);

#ifdef __cplusplus
}
#endif

#endif /* LINREC_LINREC_H_ */
