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


// Command-line front end over the C API.
//
//   linrec-cli bench train|infer --layer s5 --batch-sizes 1,2 --seq-lens 64 ...
//   linrec-cli validate [--layer lru]
//   linrec-cli scaling --layer lru --lengths 256,65536 --threads 1,8
//
// Exit status: 0 success, 1 validation failure, 2 configuration error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "linrec/linrec.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitConfig = 2;

struct Sink {
  std::ofstream file;
  std::ostream* out = &std::cout;

  static void emit(const char* line, void* user) {
    auto* s = static_cast<Sink*>(user);
    *s->out << line << '\n';
    s->out->flush();
  }
};

int report(linrec_status s) {
  if (s == LINREC_OK) return kExitOk;
  std::cerr << "error: " << linrec_last_error() << '\n';
  return kExitConfig;
}

bool open_sink(Sink& sink, const std::string& path) {
  if (path.empty() || path == "-") return true;
  sink.file.open(path);
  if (!sink.file) {
    std::cerr << "error: cannot write " << path << '\n';
    return false;
  }
  sink.out = &sink.file;
  return true;
}

linrec_dtype parse_dtype(const std::string& s) { return s == "f64" ? LINREC_F64 : LINREC_F32; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linrec: linear recurrent layers, benchmarks and self-checks"};
  app.require_subcommand(1);

  linrec_bench_config bench;
  linrec_bench_config_init(&bench);
  std::string phase, bench_layer = bench.layer, bench_dtype = "f32", bench_out;
  std::vector<std::size_t> batch_sizes{1}, seq_lens{1024}, d_models{64};
  auto* bench_cmd = app.add_subcommand("bench", "time training or inference steps and write CSV");
  bench_cmd->add_option("phase", phase, "train (forward + backward) or infer (step loop)")
      ->required()
      ->check(CLI::IsMember({"train", "infer"}));
  bench_cmd->add_option("--layer", bench_layer, "layer kind")->capture_default_str();
  bench_cmd->add_option("--batch-sizes", batch_sizes)->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--seq-lens", seq_lens)->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--d-models", d_models)->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--d-state", bench.d_state)->capture_default_str();
  bench_cmd->add_option("--warmup", bench.warmup)->capture_default_str();
  bench_cmd->add_option("--iters", bench.iters)->capture_default_str();
  bench_cmd->add_option("--repeats", bench.repeats)->capture_default_str();
  bench_cmd->add_option("--threads", bench.threads)->capture_default_str();
  bench_cmd->add_option("--dtype", bench_dtype)->check(CLI::IsMember({"f32", "f64"}))->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed)->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "CSV path (default: stdout)");

  std::string validate_layer;
  auto* validate_cmd = app.add_subcommand("validate", "run the mode-equivalence and gradient checks");
  validate_cmd->add_option("--layer", validate_layer, "restrict to one layer kind");

  linrec_scaling_config scaling;
  linrec_scaling_config_init(&scaling);
  std::string scaling_layer = scaling.layer, scaling_dtype = "f32", scaling_out;
  std::vector<std::size_t> lengths{256, 4096, 65536}, threads{1, 2, 4, 8};
  auto* scaling_cmd = app.add_subcommand("scaling", "parallel vs sequential forward timings");
  scaling_cmd->add_option("--layer", scaling_layer)->capture_default_str();
  scaling_cmd->add_option("--lengths", lengths, "ascending sequence lengths")->delimiter(',')->capture_default_str();
  scaling_cmd->add_option("--threads", threads)->delimiter(',')->capture_default_str();
  scaling_cmd->add_option("--batch", scaling.batch)->capture_default_str();
  scaling_cmd->add_option("--d-model", scaling.d_model)->capture_default_str();
  scaling_cmd->add_option("--d-state", scaling.d_state)->capture_default_str();
  scaling_cmd->add_option("--repeats", scaling.repeats)->capture_default_str();
  scaling_cmd->add_option("--dtype", scaling_dtype)->check(CLI::IsMember({"f32", "f64"}))->capture_default_str();
  scaling_cmd->add_option("--seed", scaling.seed)->capture_default_str();
  scaling_cmd->add_option("--out", scaling_out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  Sink sink;
  if (*bench_cmd) {
    if (!open_sink(sink, bench_out)) return kExitConfig;
    bench.layer = bench_layer.c_str();
    bench.phase = phase.c_str();
    bench.batch_sizes = batch_sizes.data();
    bench.n_batch_sizes = batch_sizes.size();
    bench.seq_lens = seq_lens.data();
    bench.n_seq_lens = seq_lens.size();
    bench.d_models = d_models.data();
    bench.n_d_models = d_models.size();
    bench.dtype = parse_dtype(bench_dtype);
    return report(linrec_bench_run(&bench, &Sink::emit, &sink));
  }
  if (*validate_cmd) {
    int passed = 0;
    const linrec_status s =
        linrec_validate(validate_layer.empty() ? nullptr : validate_layer.c_str(), &Sink::emit, &sink, &passed);
    if (s != LINREC_OK) return report(s);
    std::cout << (passed ? "validation passed" : "validation FAILED") << '\n';
    return passed ? kExitOk : kExitValidation;
  }
  if (!open_sink(sink, scaling_out)) return kExitConfig;
  scaling.layer = scaling_layer.c_str();
  scaling.lengths = lengths.data();
  scaling.n_lengths = lengths.size();
  scaling.threads = threads.data();
  scaling.n_threads = threads.size();
  scaling.dtype = parse_dtype(scaling_dtype);
  return report(linrec_scaling_run(&scaling, &Sink::emit, &sink));
}
