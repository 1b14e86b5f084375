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

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "linrec/bench.hpp"
#include "linrec/validate.hpp"
#include "support.hpp"

using namespace linrec;

namespace {

BenchConfig quick(BenchPhase phase = BenchPhase::kTrain) {
  BenchConfig c;
  c.phase = phase;
  c.batch_sizes = {1, 2};
  c.seq_lens = {64};
  c.d_models = {32};
  c.warmup = 1;
  c.iters = 3;
  c.repeats = 4;
  return c;
}

std::size_t count_fields(const std::string& row) { return static_cast<std::size_t>(std::count(row.begin(), row.end(), ',')) + 1; }

}  // namespace

TEST_SUITE("bench") {
  TEST_CASE("defaults follow the measurement protocol") {
    BenchConfig c;
    CHECK(c.warmup == 10);
    CHECK(c.iters == 90);
    CHECK(c.repeats == 5);
    CHECK(c.d_state == 16);
    CHECK(c.dtype == DType::kF32);
    CHECK_NOTHROW(c.validate());
  }

  TEST_CASE("config validation") {
    auto c = quick();
    c.warmup = 0;
    CHECK_ERROR_CODE(c.validate(), ErrorCode::kConfigError);
    c = quick();
    c.seq_lens.clear();
    CHECK_ERROR_CODE(c.validate(), ErrorCode::kConfigError);
    CHECK(parse_bench_phase("infer") == BenchPhase::kInfer);
    CHECK_THROWS_AS(parse_bench_phase("eval"), Error);
  }

  TEST_CASE("one row per sweep point") {
    auto c = quick();
    std::vector<std::string> rows;
    const auto recs = run_bench(c, [&](const BenchRecord& r) { rows.push_back(bench_csv_row(r)); });
    REQUIRE(recs.size() == 2);
    CHECK(rows.size() == 2);
    CHECK(recs[0].batch == 1);
    CHECK(recs[1].batch == 2);
    for (const auto& row : rows) CHECK(count_fields(row) == count_fields(bench_csv_header()));
    c.seq_lens = {16, 32, 48};
    c.d_models = {4, 8};
    CHECK(c.points() == 12);
    CHECK(run_bench(c).size() == 12);
  }

  TEST_CASE("std is taken over repeat means") {
    const auto recs = run_bench(quick());
    for (const auto& r : recs) {
      REQUIRE(r.repeat_means.size() == 4);
      double m = 0;
      for (double x : r.repeat_means) m += x;
      m /= 4;
      double v = 0;
      for (double x : r.repeat_means) v += (x - m) * (x - m);
      CHECK(r.mean_ms == doctest::Approx(m).epsilon(1e-12));
      CHECK(r.std_ms == doctest::Approx(std::sqrt(v / 4)).epsilon(1e-9));
      CHECK(r.iters_completed == 12);
      CHECK(r.status == "ok");
      CHECK(r.mean_ms > 0);
    }
  }

  TEST_CASE("mean and population std") {
    const std::vector<double> xs{1, 2, 3, 4};
    const auto [m, s] = mean_std(xs);
    CHECK(m == 2.5);
    CHECK(s == doctest::Approx(std::sqrt(1.25)));
  }

  TEST_CASE("infer phase does not allocate") {
    for (auto kind : kAllLayerKinds) {
      auto c = quick(BenchPhase::kInfer);
      c.layer = kind;
      c.seq_lens = {32};
      for (const auto& r : run_bench(c)) CHECK_MESSAGE(r.allocs_per_step == 0.0, layer_kind_name(kind));
    }
  }

  TEST_CASE("input is a pure function of the config") {
    const auto c = quick();
    const auto a = bench_input<float>(c, 2, 64, 32), b = bench_input<float>(c, 2, 64, 32);
    CHECK(a == b);
    CHECK(a.shape() == Shape{2, 64, 32});
    auto other = c;
    other.seed = 1;
    CHECK_FALSE(bench_input<float>(other, 2, 64, 32) == a);
    double s2 = 0;
    for (float v : a.data()) s2 += v * v;
    CHECK(std::abs(s2 / a.size() - 1.0) < 0.1);
  }

  TEST_CASE("csv schema") {
    CHECK(bench_csv_header() == "layer,phase,batch,seqlen,d_model,d_state,dtype,threads,mean_ms,std_ms,allocs_per_step,status");
    BenchRecord r;
    r.layer = LayerKind::kLRU;
    r.phase = BenchPhase::kInfer;
    r.batch = 2;
    r.seqlen = 64;
    r.d_model = 32;
    r.d_state = 16;
    r.mean_ms = 1.5;
    const auto row = bench_csv_row(r);
    CHECK(row.rfind("lru,infer,2,64,32,16,f32,1,1.5,", 0) == 0);
    CHECK(row.substr(row.size() - 3) == ",ok");
  }

  TEST_CASE("scaling fallback") {
    ScalingConfig c;
    c.lengths = {128, 4096};
    c.threads = {1, 4};
    c.repeats = 1;
    c.d_model = 4;
    c.d_state = 8;
    const auto recs = scaling_report(c);
    REQUIRE(recs.size() == 4);
    for (const auto& r : recs) {
      if (r.length == 128 || r.threads == 1) {
        CHECK(r.fallback);
        CHECK(r.speedup == 1.0);
        CHECK(r.chunks == 1);
      } else {
        CHECK_FALSE(r.fallback);
        CHECK(r.chunks == 4);
        CHECK(r.parallel_ms > 0);
      }
    }
    CHECK(count_fields(scaling_csv_row(recs[0])) == count_fields(scaling_csv_header()));
  }
}

TEST_SUITE("validate") {
  ValidationOptions small() {
    ValidationOptions o;
    o.lengths = {1, 300};
    o.batches = {2};
    o.d_models = {2};
    o.d_states = {2};
    o.workers = 2;
    o.grad_seeds = 2;
    return o;
  }

  TEST_CASE("reduced sweep passes") {
    auto o = small();
    std::size_t seen = 0;
    const auto rep = run_validation(o, [&](const ValidationCell&) { ++seen; });
    CHECK(rep.passed());
    CHECK(seen == rep.cells.size());
    std::set<std::string> layers, checks;
    for (const auto& c : rep.cells) {
      layers.insert(c.layer);
      checks.insert(c.check);
      CHECK_MESSAGE(c.passed, format_cell(c));
    }
    CHECK(layers == std::set<std::string>{"s4d", "s5", "lru", "s6", "rglru", "lm"});
    CHECK(checks == std::set<std::string>{"parallel", "step", "gradient"});
    CHECK(!rep.table().empty());
  }

  TEST_CASE("scope filters layers") {
    auto o = small();
    o.layer = LayerKind::kLRU;
    const auto rep = run_validation(o);
    REQUIRE(!rep.cells.empty());
    for (const auto& c : rep.cells) CHECK(c.layer == "lru");
  }

  TEST_CASE("injected fault fails the gradient cell") {
    auto o = small();
    o.layer = LayerKind::kS6;
    testing::inject_backward_fault(LayerKind::kS6, "w_c");
    const auto rep = run_validation(o);
    testing::clear_backward_fault();
    CHECK_FALSE(rep.passed());
    for (const auto& c : rep.cells) {
      if (c.check == "gradient")
        CHECK_FALSE(c.passed);
      else
        CHECK(c.passed);
    }
  }
}
