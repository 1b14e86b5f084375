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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "linrec/checkpoint.hpp"
#include "linrec/generate.hpp"
#include "linrec/model.hpp"
#include "linrec/train.hpp"
#include "support.hpp"

using namespace linrec;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny(std::vector<std::string> mixers, std::size_t d_model = 8, std::size_t vocab = 11,
                 std::size_t d_int = 0) {
  ModelConfig c;
  c.d_model = d_model;
  c.d_state = 4;
  c.n_layer = mixers.size();
  c.vocab_size = vocab;
  c.d_intermediate = d_int;
  c.mixer_types = std::move(mixers);
  return c;
}

Tensor<Token> tokens_of(std::vector<Token> v, std::size_t batch = 1) {
  const std::size_t L = v.size() / batch;
  return Tensor<Token>(Shape{batch, L}, std::move(v));
}

std::vector<Token> random_tokens(std::size_t n, std::size_t vocab, std::uint64_t seed) {
  Rng r(seed);
  std::vector<Token> t(n);
  for (auto& x : t) x = static_cast<Token>(r.next_bits() % vocab);
  return t;
}

std::vector<char> read_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

void write_bytes(const fs::path& p, const std::vector<char>& b) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f.write(b.data(), static_cast<std::streamsize>(b.size()));
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("linrec_test_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

const std::vector<std::string> kMixers{"s4d", "s5", "lru", "s6", "rglru"};

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("construction") {
    Rng rng(0);
    auto m = build_model<double>(tiny({"s5", "s6"}), rng);
    CHECK(m->n_layer() == 2);
    CHECK(is_time_invariant(m->mixer(0).kind()));
    CHECK_FALSE(is_time_invariant(m->mixer(1).kind()));

    auto bad = tiny({"s5", "s6", "lru"});
    bad.n_layer = 2;
    CHECK_ERROR_CODE(build_model<double>(bad, rng), ErrorCode::kConfigError);
    CHECK_ERROR_CODE(build_model<double>(tiny({"s5", "S7"}), rng), ErrorCode::kUnknownMixer);
    try {
      build_model<double>(tiny({"S7"}), rng);
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("S7") != std::string::npos);
    }
    CHECK_ERROR_CODE(build_model<double>(tiny({"attn"}), rng), ErrorCode::kUnsupported);
    auto mixed = tiny({"S5", "S6", "LRU", "Mamba", "s4"});
    CHECK_NOTHROW(build_model<float>(mixed, rng));
  }

  TEST_CASE("defaults echo the reference configuration") {
    ModelConfig c;
    CHECK(c.d_model == 768);
    CHECK(c.d_state == 16);
    CHECK(c.n_layer == 12);
    CHECK(c.vocab_size == 50257);
  }

  TEST_CASE("reference-size model forward shapes") {
    ModelConfig c;  // 768 / 16 / 12 / 50257
    Rng rng(0);
    auto m = build_model<float>(c, rng);
    const auto toks = tokens_of(random_tokens(8, c.vocab_size, 1));
    const auto logits = m->forward(toks);
    CHECK(logits.shape() == Shape{1, 8, 50257});
    bool finite = true;
    for (float v : logits.data()) finite = finite && std::isfinite(v);
    CHECK(finite);
  }

  TEST_CASE("same seed builds the same model") {
    Rng r1(4), r2(4);
    auto a = build_model<double>(tiny({"s6", "lru"}), r1), b = build_model<double>(tiny({"s6", "lru"}), r2);
    const auto pa = a->param_list(), pb = b->param_list();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
      CHECK(pa[i].first == pb[i].first);
      CHECK(*pa[i].second == *pb[i].second);
    }
  }

  TEST_CASE("parameter paths") {
    Rng rng(0);
    auto cfg = tiny({"s5", "s6"}, 8, 11, 16);
    cfg.tie_embeddings = false;
    auto m = build_model<double>(cfg, rng);
    std::set<std::string> names;
    for (const auto& [n, t] : m->param_list()) names.insert(n);
    for (const char* n : {"embedding", "blocks.0.norm.weight", "blocks.0.mixer.b_re", "blocks.1.mixer.w_delta",
                          "blocks.1.mlp_norm.weight", "blocks.1.mlp.w_gate", "blocks.0.mlp.w_up",
                          "blocks.0.mlp.w_down", "norm_f.weight", "lm_head"})
      CHECK_MESSAGE(names.count(n) == 1, n);
    std::size_t total = 0;
    for (const auto& [n, t] : m->param_list()) total += t->size();
    CHECK(total == m->num_params());
  }

  TEST_CASE("config json round trip") {
    auto c = tiny({"s5", "rglru"}, 8, 11, 32);
    c.tie_embeddings = false;
    c.mixer_kwargs["s5"]["discretization"] = "bilinear";
    const auto text = c.to_json();
    CHECK(ModelConfig::from_json(text) == c);
    const auto j = nlohmann::json::parse(text);
    std::set<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.insert(it.key());
    CHECK(keys == std::set<std::string>{"d_model", "d_state", "n_layer", "vocab_size", "d_intermediate",
                                         "mixer_types", "mixer_kwargs", "tie_embeddings"});
    CHECK_ERROR_CODE(ModelConfig::from_json("{\"d_model\": "), ErrorCode::kConfigError);
    CHECK_ERROR_CODE(ModelConfig::from_json("{\"bogus\": 1}"), ErrorCode::kConfigError);
  }

  TEST_CASE("mixer kwargs reach the layers") {
    auto c = tiny({"s5", "s6"});
    c.mixer_kwargs["S5"]["discretization"] = "dirac";
    c.mixer_kwargs["s6"]["d_rank"] = "3";
    Rng rng(0);
    auto m = build_model<double>(c, rng);
    CHECK(m->mixer(0).config().scheme() == Discretization::kDirac);
    CHECK(m->mixer(1).config().d_rank == 3);
    c.mixer_kwargs["s6"]["nonsense"] = "1";
    CHECK_ERROR_CODE(build_model<double>(c, rng), ErrorCode::kConfigError);
  }

  TEST_CASE("token range") {
    Rng rng(0);
    auto m = build_model<float>(tiny({"s5"}), rng);
    CHECK_ERROR_CODE(m->forward(tokens_of({1, 2, 11})), ErrorCode::kTokenOutOfRange);
    CHECK_ERROR_CODE(m->forward(tokens_of({1, -1})), ErrorCode::kTokenOutOfRange);
  }

  TEST_CASE("causality for every mixer") {
    for (const auto& mixer : kMixers) {
      Rng rng(2);
      auto m = build_model<double>(tiny({mixer, mixer}, 8, 11, 16), rng);
      auto t = random_tokens(12, 11, 3);
      const auto base = m->forward(tokens_of(t));
      for (std::size_t k : {0, 5, 11}) {
        auto t2 = t;
        t2[k] = (t2[k] + 1) % 11;
        const auto changed = m->forward(tokens_of(t2));
        CHECK_MESSAGE(std::memcmp(base.ptr(), changed.ptr(), k * 11 * sizeof(double)) == 0, mixer, " k=", k);
        CHECK(std::memcmp(base.ptr() + k * 11, changed.ptr() + k * 11, 11 * sizeof(double)) != 0);
      }
    }
  }

  TEST_CASE("batch permutation equivariance") {
    Rng rng(5);
    auto m = build_model<double>(tiny({"s5", "s6"}), rng);
    const std::size_t L = 9;
    auto t = random_tokens(3 * L, 11, 7);
    std::vector<Token> perm;
    for (std::size_t b : {2, 0, 1}) perm.insert(perm.end(), t.begin() + b * L, t.begin() + (b + 1) * L);
    const auto y = m->forward(tokens_of(t, 3)), yp = m->forward(tokens_of(perm, 3));
    const std::size_t row = L * 11;
    const std::size_t order[] = {2, 0, 1};
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(std::memcmp(yp.ptr() + i * row, y.ptr() + order[i] * row, row * sizeof(double)) == 0);
  }

  TEST_CASE("parallel forward matches sequential") {
    Rng rng(6);
    auto m = build_model<double>(tiny({"lru", "s6", "s4d"}, 8, 11, 16), rng);
    const auto t = tokens_of(random_tokens(2 * 700, 11, 8), 2);
    RunOptions par{ExecMode::kParallel, 3};
    CHECK(testsupport::rel_err(m->forward(t, par), m->forward(t)) <= 1e-10);
  }

  TEST_CASE("step replay matches the batched forward") {
    for (const auto& mixer : kMixers) {
      Rng rng(9);
      auto m = build_model<float>(tiny({mixer, "s5"}, 8, 11, 0), rng);
      const auto t = random_tokens(16, 11, 10);
      const auto logits = m->forward(tokens_of(t));
      DecodeSession<float> s(*m);
      s.prefill(std::span<const Token>(t.data(), 1));
      for (std::size_t k = 0; k < t.size(); ++k) {
        if (k > 0) s.step(t[k]);
        const auto row = logits.data().subspan(k * 11, 11);
        CHECK_MESSAGE(testsupport::rel_err<float>(s.logits(), row) <= 1e-4, mixer, " k=", k);
      }
    }
  }

  TEST_CASE("cross entropy") {
    Tensor<double> logits(Shape{1, 2, 3}, std::vector<double>{0, 0, 0, 1, 2, 3});
    const auto targets = tokens_of({1, 2});
    Tensor<double> grad;
    const double loss = cross_entropy(logits, targets, &grad);
    const double l2 = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0)) - 3.0;
    CHECK(loss == doctest::Approx((std::log(3.0) + l2) / 2).epsilon(1e-14));
    CHECK(grad(0, 0, 1) == doctest::Approx((1.0 / 3 - 1) / 2));
  }

  TEST_CASE("full model gradient") {
    const std::vector<std::vector<std::string>> stacks{{"s5", "s6"}, {"s4d", "lru"}, {"rglru", "s5"}};
    for (const auto& stack : stacks)
      for (bool tied : {true, false})
        for (std::size_t d_int : {0, 8}) {
          auto cfg = tiny(stack, 4, 7, d_int);
          cfg.tie_embeddings = tied;
          Rng rng(12);
          auto m = build_model<double>(cfg, rng);
          const auto toks = tokens_of(random_tokens(6, 7, 13));
          const auto targets = tokens_of(random_tokens(6, 7, 14));
          ModelTape<double> tape;
          Tensor<double> gl;
          cross_entropy(m->forward(toks, {}, &tape), targets, &gl);
          const auto grads = m->backward(tape, gl);
          const auto loss = [&] { return cross_entropy(m->forward(toks), targets); };
          double worst = 0;
          std::string where;
          for (auto& ref : m->param_refs()) {
            const auto& an = grads.get(ref.path);
            for (std::size_t i = 0; i < ref.tensor->size(); ++i) {
              // h = 1e-6: the small embedding feeds RMSNorm, whose curvature
              // makes h = 1e-5 truncation-limited.
              const double fd = testsupport::central_diff(loss, (*ref.tensor)[i], 1e-6);
              const double e = std::abs(an[i] - fd) / std::max(std::abs(fd), 1e-3);
              if (e > worst) {
                worst = e;
                where = ref.path;
              }
            }
          }
          CHECK_MESSAGE(worst <= 1e-5, stack[0], "+", stack[1], " tied=", tied, " mlp=", d_int, " worst=", worst,
                        " at ", where);
          CHECK_ERROR_CODE(m->backward(tape, gl), ErrorCode::kTapeConsumed);
        }
  }

  TEST_CASE("registry is open") {
    register_mixer("my_lru", MixerEntry{[](const LayerConfig& c, const MixerKwargs&, Rng& r) {
                                          return make_layer<float>(LayerKind::kLRU, c, r);
                                        },
                                        [](const LayerConfig& c, const MixerKwargs&, Rng& r) {
                                          return make_layer<double>(LayerKind::kLRU, c, r);
                                        },
                                        {}});
    CHECK(find_mixer("My-LRU") != nullptr);
    Rng rng(0);
    auto m = build_model<double>(tiny({"my_lru"}), rng);
    CHECK(m->mixer(0).kind() == LayerKind::kLRU);
  }
}

TEST_SUITE("generate") {
  TEST_CASE("argmax ties and sampling") {
    const std::vector<float> l{1, 3, 3, 2};
    CHECK(argmax_token<float>(l) == 1);
    CHECK(sample_token<float>(l, 1e-3, 0.3) == 1);
    CHECK(sample_token<float>(l, 1e-3, 0.7) == 2);
    const std::vector<double> flat{0, 0, 0, 0};
    CHECK(sample_token<double>(flat, 1.0, 0.1) == 0);
    CHECK(sample_token<double>(flat, 1.0, 0.9) == 3);
  }

  TEST_CASE("greedy generation is deterministic and matches full recompute") {
    for (const auto& mixer : kMixers) {
      Rng rng(21);
      auto m = build_model<float>(tiny({mixer, "s6"}, 16, 13, 32), rng);
      const std::vector<Token> prompt{3, 1, 4};
      GenerateOptions opt;
      opt.max_new = 20;
      const auto a = generate(*m, prompt, opt), b = generate(*m, prompt, opt);
      CHECK(a.tokens == b.tokens);
      CHECK(a.tokens.size() == 23);
      CHECK(std::equal(prompt.begin(), prompt.end(), a.tokens.begin()));
      CHECK_MESSAGE(a.tokens == generate_full_recompute(*m, prompt, opt), mixer);
      REQUIRE(a.allocs_per_step.size() == 20);
      for (std::size_t k = 1; k < 20; ++k) CHECK_MESSAGE(a.allocs_per_step[k] == 0, mixer, " step ", k);
    }
  }

  TEST_CASE("sampled generation matches full recompute") {
    Rng rng(22);
    auto m = build_model<double>(tiny({"s5", "rglru"}, 8, 11, 0), rng);
    const std::vector<Token> prompt{2};
    GenerateOptions opt;
    opt.max_new = 20;
    opt.temperature = 0.8;
    opt.seed = 5;
    const auto a = generate(*m, prompt, opt);
    CHECK(a.tokens == generate_full_recompute(*m, prompt, opt));
    opt.seed = 6;
    CHECK(generate(*m, prompt, opt).tokens.size() == 21);
  }

  TEST_CASE("max_new zero returns the prompt") {
    Rng rng(0);
    auto m = build_model<float>(tiny({"s5"}), rng);
    const std::vector<Token> prompt{1, 2, 3};
    CHECK(generate(*m, prompt, {}).tokens == prompt);
  }

  TEST_CASE("generation errors") {
    Rng rng(0);
    auto m = build_model<float>(tiny({"s5"}), rng);
    GenerateOptions opt;
    opt.max_new = 2;
    CHECK_ERROR_CODE(generate(*m, std::vector<Token>{12}, opt), ErrorCode::kTokenOutOfRange);
    CHECK_THROWS_AS(generate(*m, std::vector<Token>{}, opt), Error);
  }

  TEST_CASE("sessions over a shared model are independent") {
    Rng rng(3);
    auto m = build_model<double>(tiny({"s6", "lru"}), rng);
    DecodeSession<double> a(*m), b(*m);
    const std::vector<Token> pa{1, 2}, pb{7, 7, 7};
    a.prefill(pa);
    b.prefill(pb);
    a.step(4);
    b.step(5);
    const auto ya = m->forward(tokens_of({1, 2, 4}));
    CHECK(testsupport::rel_err<double>(a.logits(), ya.data().subspan(2 * 11, 11)) <= 1e-12);
    const auto yb = m->forward(tokens_of({7, 7, 7, 5}));
    CHECK(testsupport::rel_err<double>(b.logits(), yb.data().subspan(3 * 11, 11)) <= 1e-12);
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE("save load save is byte identical") {
    TempDir dir;
    for (bool tied : {true, false}) {
      auto cfg = tiny({"s5", "s6", "rglru"}, 8, 11, 16);
      cfg.tie_embeddings = tied;
      cfg.mixer_kwargs["s5"]["discretization"] = "bilinear";
      Rng rng(1);
      auto m = build_model<float>(cfg, rng);
      save_checkpoint(*m, dir.file("a.lrnn"));
      auto loaded = load_checkpoint<float>(dir.file("a.lrnn"));
      CHECK(loaded->config() == cfg);
      save_checkpoint(*loaded, dir.file("b.lrnn"));
      CHECK(read_bytes(dir.file("a.lrnn")) == read_bytes(dir.file("b.lrnn")));
      const auto t = tokens_of({1, 2, 3, 4});
      CHECK(m->forward(t) == loaded->forward(t));
      const auto bytes = read_bytes(dir.file("a.lrnn"));
      CHECK(std::memcmp(bytes.data(), "LRNNX001", 8) == 0);
    }
  }

  TEST_CASE("inspect reads the header") {
    TempDir dir;
    Rng rng(1);
    auto m = build_model<double>(tiny({"lru"}), rng);
    save_checkpoint(*m, dir.file("m.lrnn"));
    const auto info = inspect_checkpoint(dir.file("m.lrnn"));
    CHECK(info.dtype == DType::kF64);
    CHECK(info.config == m->config());
  }

  TEST_CASE("corruption is reported") {
    TempDir dir;
    Rng rng(1);
    auto m = build_model<float>(tiny({"s5", "s6"}), rng);
    save_checkpoint(*m, dir.file("m.lrnn"));
    const auto good = read_bytes(dir.file("m.lrnn"));

    auto trunc = good;
    trunc.resize(good.size() - 5);
    write_bytes(dir.file("t.lrnn"), trunc);
    CHECK_ERROR_CODE(load_checkpoint<float>(dir.file("t.lrnn")), ErrorCode::kCorruptHeader);

    auto magic = good;
    magic[0] = 'X';
    write_bytes(dir.file("x.lrnn"), magic);
    CHECK_ERROR_CODE(load_checkpoint<float>(dir.file("x.lrnn")), ErrorCode::kBadMagic);
    CHECK_ERROR_CODE(inspect_checkpoint(dir.file("x.lrnn")), ErrorCode::kBadMagic);

    write_bytes(dir.file("short.lrnn"), std::vector<char>(good.begin(), good.begin() + 12));
    CHECK_THROWS_AS(load_checkpoint<float>(dir.file("short.lrnn")), Error);

    std::uint64_t hlen = 0;
    std::memcpy(&hlen, good.data() + 8, 8);
    auto badjson = good;
    badjson[16] = '#';
    write_bytes(dir.file("j.lrnn"), badjson);
    CHECK_ERROR_CODE(load_checkpoint<float>(dir.file("j.lrnn")), ErrorCode::kCorruptHeader);

    auto huge = good;
    const std::uint64_t big = 1ull << 40;
    std::memcpy(huge.data() + 8, &big, 8);
    write_bytes(dir.file("h.lrnn"), huge);
    CHECK_ERROR_CODE(load_checkpoint<float>(dir.file("h.lrnn")), ErrorCode::kCorruptHeader);

    // Two entries pointing at the same bytes.
    auto header = nlohmann::json::parse(std::string(good.data() + 16, hlen));
    header["norm_f.weight"]["offset"] = header["embedding"]["offset"];
    const std::string text = header.dump();
    std::vector<char> overlap(good.begin(), good.begin() + 8);
    const std::uint64_t n = text.size();
    overlap.insert(overlap.end(), reinterpret_cast<const char*>(&n), reinterpret_cast<const char*>(&n) + 8);
    overlap.insert(overlap.end(), text.begin(), text.end());
    overlap.insert(overlap.end(), good.begin() + 16 + static_cast<std::ptrdiff_t>(hlen), good.end());
    write_bytes(dir.file("o.lrnn"), overlap);
    CHECK_ERROR_CODE(load_checkpoint<float>(dir.file("o.lrnn")), ErrorCode::kCorruptHeader);

    CHECK_ERROR_CODE(load_checkpoint<float>(dir.file("missing.lrnn")), ErrorCode::kIoError);
  }

  TEST_CASE("extent mismatch") {
    TempDir dir;
    Rng rng(1);
    auto m = build_model<float>(tiny({"s5", "s6"}), rng);
    save_checkpoint(*m, dir.file("m.lrnn"));
    auto other = build_model<float>(tiny({"s5", "s6"}, 8, 12), rng);
    CHECK_ERROR_CODE(load_checkpoint_into(*other, dir.file("m.lrnn")), ErrorCode::kShapeMismatch);
    auto same = build_model<float>(tiny({"s5", "s6"}), rng);
    load_checkpoint_into(*same, dir.file("m.lrnn"));
    const auto t = tokens_of({3, 4});
    CHECK(same->forward(t) == m->forward(t));
  }

  TEST_CASE("dtype conversion") {
    TempDir dir;
    Rng rng(1);
    auto m = build_model<float>(tiny({"s5", "lru"}), rng);
    save_checkpoint(*m, dir.file("f.lrnn"));
    auto up = load_checkpoint<double>(dir.file("f.lrnn"));
    const auto a = m->param_list();
    const auto b = up->param_list();
    REQUIRE(a.size() == b.size());
    bool exact = true;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a[i].second->size(); ++j)
        exact = exact && static_cast<double>((*a[i].second)[j]) == (*b[i].second)[j];
    CHECK(exact);
    save_checkpoint(*up, dir.file("d.lrnn"));
    CHECK_ERROR_CODE(load_checkpoint<float>(dir.file("d.lrnn")), ErrorCode::kUnsupported);
  }
}

TEST_SUITE("train") {
  TEST_CASE("adam moves parameters downhill") {
    Tensor<double> p(Shape{2}, std::vector<double>{1.0, -2.0});
    Adam<double> opt({{"p", &p}}, AdamOptions{0.1});
    for (int i = 0; i < 200; ++i) {
      NamedTensors<double> g;
      g.add("p", Tensor<double>(Shape{2}, std::vector<double>{2 * p[0], 2 * p[1]}));
      opt.step(g);
    }
    CHECK(std::abs(p[0]) < 0.05);
    CHECK(std::abs(p[1]) < 0.05);
    CHECK(opt.steps() == 200);
  }

  TEST_CASE("next token loss gradient") {
    Rng rng(2);
    auto m = build_model<double>(tiny({"s6"}, 4, 7, 8), rng);
    const auto t = tokens_of(random_tokens(7, 7, 1));
    NamedTensors<double> g;
    next_token_loss(*m, t, &g);
    auto refs = m->param_refs();
    auto& emb = *refs[0].tensor;
    const auto loss = [&] { return next_token_loss(*m, t); };
    for (std::size_t i = 0; i < 8; ++i)
      CHECK(g.get("embedding")[i] ==
            doctest::Approx(testsupport::central_diff(loss, emb[i], 1e-6)).epsilon(1e-5).scale(1e-3));
  }

  TEST_CASE("repeating pattern") {
    const auto p = repeating_pattern(3, 16, 32, 3);
    REQUIRE(p.size() == 96);
    for (std::size_t i = 32; i < 96; ++i) CHECK(p[i] == p[i - 32]);
    CHECK(p == repeating_pattern(3, 16, 32, 3));
  }

  TEST_CASE("training smoke") {
    const auto a = train_smoke({});
    CHECK(a.reached);
    CHECK(a.final_loss < 0.1);
    CHECK(a.steps <= 500);
    CHECK(a.seconds < 60);
    const auto b = train_smoke({});
    CHECK(a.losses == b.losses);
  }
}
