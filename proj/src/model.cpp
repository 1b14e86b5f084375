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


#include "linrec/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>

#include "dense.hpp"
#include "json.hpp"

namespace linrec {

using nlohmann::json;

// ---- mixer registry ------------------------------------------------------

std::string normalize_mixer_key(std::string_view name) {
  std::string out;
  for (char ch : name)
    if (ch != '-' && ch != '_') out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

namespace {

template <typename T>
std::unique_ptr<Layer<T>> build_builtin(LayerKind kind, const LayerConfig& base, const MixerKwargs& kwargs, Rng& rng) {
  LayerConfig cfg = base;
  for (const auto& [key, value] : kwargs) {
    if (key == "discretization") {
      cfg.discretization = parse_discretization(value);
    } else if (key == "d_rank" || key == "d_state") {
      std::size_t v = 0;
      try {
        v = std::stoul(value);
      } catch (const std::exception&) {
        fail(ErrorCode::kConfigError, "mixer keyword " + key + " expects an integer, got '" + value + "'");
      }
      (key == "d_rank" ? cfg.d_rank : cfg.d_state) = v;
    } else {
      fail(ErrorCode::kConfigError,
           "unknown keyword '" + key + "' for mixer " + std::string(layer_kind_name(kind)));
    }
  }
  return make_layer<T>(kind, cfg, rng);
}

MixerEntry builtin_entry(LayerKind kind) {
  MixerEntry e;
  e.make_f32 = [kind](const LayerConfig& c, const MixerKwargs& kw, Rng& r) { return build_builtin<float>(kind, c, kw, r); };
  e.make_f64 = [kind](const LayerConfig& c, const MixerKwargs& kw, Rng& r) { return build_builtin<double>(kind, c, kw, r); };
  return e;
}

struct Registry {
  std::mutex mu;
  std::map<std::string, MixerEntry> entries;

  Registry() {
    for (LayerKind k : kAllLayerKinds) entries.emplace(std::string(layer_kind_name(k)), builtin_entry(k));
    entries.emplace("s4", builtin_entry(LayerKind::kS4D));
    entries.emplace("mamba", builtin_entry(LayerKind::kS6));
    MixerEntry attn;
    attn.unsupported = "attention mixers are not implemented";
    entries.emplace("attn", std::move(attn));
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

void register_mixer(std::string_view name, MixerEntry entry) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  r.entries.insert_or_assign(normalize_mixer_key(name), std::move(entry));
}

const MixerEntry* find_mixer(std::string_view name) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  auto it = r.entries.find(normalize_mixer_key(name));
  return it == r.entries.end() ? nullptr : &it->second;
}

std::vector<std::string> registered_mixers() {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  std::vector<std::string> out;
  for (const auto& [k, e] : r.entries) out.push_back(k);
  return out;
}

// ---- config --------------------------------------------------------------

std::string ModelConfig::mixer_type(std::size_t layer) const {
  return mixer_types.empty() ? std::string("s5") : mixer_types.at(layer);
}

const MixerKwargs* ModelConfig::kwargs_for(std::string_view mixer) const {
  const std::string key = normalize_mixer_key(mixer);
  for (const auto& [k, v] : mixer_kwargs)
    if (normalize_mixer_key(k) == key) return &v;
  return nullptr;
}

void ModelConfig::validate() const {
  require(d_model > 0 && d_state > 0 && n_layer > 0 && vocab_size > 0, ErrorCode::kConfigError,
          "d_model, d_state, n_layer and vocab_size must be positive");
  require(mixer_types.empty() || mixer_types.size() == n_layer, ErrorCode::kConfigError,
          "mixer_types has " + std::to_string(mixer_types.size()) + " entries for n_layer=" + std::to_string(n_layer));
  for (std::size_t i = 0; i < n_layer; ++i) {
    const std::string type = mixer_type(i);
    const MixerEntry* e = find_mixer(type);
    if (e == nullptr) {
      std::string known;
      for (const auto& k : registered_mixers()) known += (known.empty() ? "" : ", ") + k;
      fail(ErrorCode::kUnknownMixer, "mixer '" + type + "' is not registered (known: " + known + ")");
    }
    if (!e->unsupported.empty()) fail(ErrorCode::kUnsupported, "mixer '" + type + "': " + e->unsupported);
  }
}

std::string ModelConfig::to_json() const {
  json j;
  j["d_model"] = d_model;
  j["d_state"] = d_state;
  j["n_layer"] = n_layer;
  j["vocab_size"] = vocab_size;
  j["d_intermediate"] = d_intermediate;
  j["mixer_types"] = mixer_types;
  j["mixer_kwargs"] = json::object();
  for (const auto& [k, kw] : mixer_kwargs) j["mixer_kwargs"][k] = kw;
  j["tie_embeddings"] = tie_embeddings;
  return j.dump();
}

ModelConfig ModelConfig::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigError, std::string("model config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), ErrorCode::kConfigError, "model config must be a JSON object");
  ModelConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "d_model") c.d_model = value.get<std::size_t>();
      else if (key == "d_state") c.d_state = value.get<std::size_t>();
      else if (key == "n_layer") c.n_layer = value.get<std::size_t>();
      else if (key == "vocab_size") c.vocab_size = value.get<std::size_t>();
      else if (key == "d_intermediate") c.d_intermediate = value.get<std::size_t>();
      else if (key == "mixer_types") c.mixer_types = value.get<std::vector<std::string>>();
      else if (key == "tie_embeddings") c.tie_embeddings = value.get<bool>();
      else if (key == "mixer_kwargs") {
        for (const auto& [kind, kw] : value.items()) {
          MixerKwargs m;
          for (const auto& [k, v] : kw.items()) m[k] = v.is_string() ? v.get<std::string>() : v.dump();
          c.mixer_kwargs[kind] = std::move(m);
        }
      } else {
        fail(ErrorCode::kConfigError, "unknown model config field '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigError, std::string("model config: ") + e.what());
  }
  return c;
}

// ---- norms and loss ------------------------------------------------------

template <typename T>
void rms_norm(const T* x, const T* w, std::size_t d, T* y) {
  T ss = T(0);
  for (std::size_t i = 0; i < d; ++i) ss += x[i] * x[i];
  const T r = T(1) / std::sqrt(ss / static_cast<T>(d) + static_cast<T>(kNormEps));
  for (std::size_t i = 0; i < d; ++i) y[i] = x[i] * r * w[i];
}

template <typename T>
void rms_norm_backward(const T* x, const T* w, std::size_t d, const T* gy, T* gx, T* gw) {
  T ss = T(0), dot = T(0);
  for (std::size_t i = 0; i < d; ++i) {
    ss += x[i] * x[i];
    dot += gy[i] * w[i] * x[i];
  }
  const T r = T(1) / std::sqrt(ss / static_cast<T>(d) + static_cast<T>(kNormEps));
  const T c = r * r * r * dot / static_cast<T>(d);
  for (std::size_t i = 0; i < d; ++i) {
    gw[i] += gy[i] * x[i] * r;
    gx[i] += gy[i] * w[i] * r - x[i] * c;
  }
}

template <typename T>
double cross_entropy(const Tensor<T>& logits, const Tensor<Token>& targets, Tensor<T>* grad) {
  require(logits.rank() == 3 && targets.rank() == 2 && logits.extent(0) == targets.extent(0) &&
              logits.extent(1) == targets.extent(1),
          ErrorCode::kShapeError,
          "cross_entropy: logits " + shape_string(logits.shape()) + " vs targets " + shape_string(targets.shape()));
  const std::size_t rows = targets.size(), v = logits.extent(2);
  if (grad) *grad = Tensor<T>(logits.shape());
  double total = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const Token t = targets[r];
    require(t >= 0 && static_cast<std::size_t>(t) < v, ErrorCode::kTokenOutOfRange,
            "target " + std::to_string(t) + " outside vocabulary of " + std::to_string(v));
    const T* l = logits.ptr() + r * v;
    const double m = *std::max_element(l, l + v);
    double z = 0;
    for (std::size_t i = 0; i < v; ++i) z += std::exp(static_cast<double>(l[i]) - m);
    total += m + std::log(z) - static_cast<double>(l[t]);
    if (grad) {
      T* g = grad->ptr() + r * v;
      for (std::size_t i = 0; i < v; ++i)
        g[i] = static_cast<T>(std::exp(static_cast<double>(l[i]) - m) / z / static_cast<double>(rows));
      g[t] -= static_cast<T>(1.0 / static_cast<double>(rows));
    }
  }
  return total / static_cast<double>(rows);
}

// ---- model ---------------------------------------------------------------

namespace {

std::string block_path(std::size_t i, std::string_view leaf) {
  return "blocks." + std::to_string(i) + "." + std::string(leaf);
}

template <typename T>
T silu(T x) {
  return x * sigmoid(x);
}

}  // namespace

template <typename T>
LMHeadModel<T>::LMHeadModel(const ModelConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t d = cfg_.d_model, v = cfg_.vocab_size, m = cfg_.d_intermediate;
  Rng dense_rng = rng.split(0);
  dense_rng.fill_normal(dense_.add("embedding", Tensor<T>(Shape{v, d})).data(), 0.02);
  const double in_scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < cfg_.n_layer; ++i) {
    dense_.add(block_path(i, "norm.weight"), Tensor<T>(Shape{d}, T(1)));
    const std::string type = cfg_.mixer_type(i);
    const MixerEntry* e = find_mixer(type);
    static const MixerKwargs kNoKwargs;
    const MixerKwargs* kw = cfg_.kwargs_for(type);
    LayerConfig lc;
    lc.d_model = d;
    lc.d_state = cfg_.d_state;
    Rng mixer_rng = rng.split(i + 1);
    if constexpr (std::is_same_v<T, float>) {
      require(static_cast<bool>(e->make_f32), ErrorCode::kUnsupported, "mixer '" + type + "' has no f32 builder");
      mixers_.push_back(e->make_f32(lc, kw ? *kw : kNoKwargs, mixer_rng));
    } else {
      require(static_cast<bool>(e->make_f64), ErrorCode::kUnsupported, "mixer '" + type + "' has no f64 builder");
      mixers_.push_back(e->make_f64(lc, kw ? *kw : kNoKwargs, mixer_rng));
    }
    if (m > 0) {
      dense_.add(block_path(i, "mlp_norm.weight"), Tensor<T>(Shape{d}, T(1)));
      dense_rng.fill_normal(dense_.add(block_path(i, "mlp.w_gate"), Tensor<T>(Shape{m, d})).data(), in_scale);
      dense_rng.fill_normal(dense_.add(block_path(i, "mlp.w_up"), Tensor<T>(Shape{m, d})).data(), in_scale);
      dense_rng.fill_normal(dense_.add(block_path(i, "mlp.w_down"), Tensor<T>(Shape{d, m})).data(),
                            1.0 / std::sqrt(static_cast<double>(m)));
    }
  }
  dense_.add("norm_f.weight", Tensor<T>(Shape{d}, T(1)));
  if (!cfg_.tie_embeddings) dense_rng.fill_normal(dense_.add("lm_head", Tensor<T>(Shape{d, v})).data(), in_scale);
}

template <typename T>
std::vector<ParamRef<T>> LMHeadModel<T>::param_refs() {
  std::vector<ParamRef<T>> out;
  for (const auto& [path, t] : param_list()) out.push_back({path, const_cast<Tensor<T>*>(t)});
  return out;
}

template <typename T>
std::vector<std::pair<std::string, const Tensor<T>*>> LMHeadModel<T>::param_list() const {
  std::vector<std::pair<std::string, const Tensor<T>*>> out;
  auto dense = [&](const std::string& path) {
    if (const auto* t = dense_.find(path)) out.emplace_back(path, t);
  };
  dense("embedding");
  for (std::size_t i = 0; i < mixers_.size(); ++i) {
    dense(block_path(i, "norm.weight"));
    for (const auto& [name, t] : mixers_[i]->params()) out.emplace_back(block_path(i, "mixer." + name), &t);
    for (const char* leaf : {"mlp_norm.weight", "mlp.w_gate", "mlp.w_up", "mlp.w_down"}) dense(block_path(i, leaf));
  }
  dense("norm_f.weight");
  dense("lm_head");
  return out;
}

template <typename T>
std::size_t LMHeadModel<T>::num_params() const {
  std::size_t n = 0;
  for (const auto& [path, t] : param_list()) n += t->size();
  return n;
}

template <typename T>
void LMHeadModel<T>::check_tokens(std::span<const Token> tokens) const {
  for (Token t : tokens)
    if (t < 0 || static_cast<std::size_t>(t) >= cfg_.vocab_size)
      fail(ErrorCode::kTokenOutOfRange,
           "token " + std::to_string(t) + " outside vocabulary of " + std::to_string(cfg_.vocab_size));
}

template <typename T>
void LMHeadModel<T>::head(const T* nf, T* logits) const {
  const std::size_t d = cfg_.d_model, v = cfg_.vocab_size;
  if (cfg_.tie_embeddings) {
    detail::matvec(dense_.get("embedding").ptr(), v, d, nf, logits);
  } else {
    std::fill(logits, logits + v, T(0));
    detail::matvec_t_acc(dense_.get("lm_head").ptr(), d, v, nf, logits);
  }
}

template <typename T>
Tensor<T> LMHeadModel<T>::forward(const Tensor<Token>& tokens, const RunOptions& opt, ModelTape<T>* tape,
                                  std::vector<LayerState<T>>* final_states) const {
  require(tokens.rank() == 2, ErrorCode::kShapeError,
          "tokens must be [batch, length], got " + shape_string(tokens.shape()));
  check_tokens(tokens.data());
  const std::size_t batch = tokens.extent(0), length = tokens.extent(1), rows = batch * length;
  const std::size_t d = cfg_.d_model, m = cfg_.d_intermediate, v = cfg_.vocab_size;

  Tensor<T> h(Shape{batch, length, d});
  const auto& emb = dense_.get("embedding");
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(emb.ptr() + tokens[r] * d, d, h.ptr() + r * d);

  if (tape) {
    tape->tokens = tokens;
    tape->blocks.clear();
    tape->blocks.resize(mixers_.size());
    tape->consumed = false;
  }
  if (final_states) final_states->clear();

  ForwardOptions<T> fo;
  fo.mode = opt.mode;
  fo.workers = opt.workers;
  for (std::size_t i = 0; i < mixers_.size(); ++i) {
    BlockTape<T>* bt = tape ? &tape->blocks[i] : nullptr;
    Tensor<T> n1(h.shape());
    const T* w1 = dense_.get(block_path(i, "norm.weight")).ptr();
    for (std::size_t r = 0; r < rows; ++r) rms_norm(h.ptr() + r * d, w1, d, n1.ptr() + r * d);
    std::vector<LayerState<T>> fs;
    const Tensor<T> y = mixers_[i]->forward(n1, fo, bt ? &bt->mixer : nullptr, final_states ? &fs : nullptr);
    if (final_states) final_states->push_back(std::move(fs.at(0)));
    if (bt) {
      bt->h_in = h;
      bt->n1 = std::move(n1);
    }
    for (std::size_t j = 0; j < h.size(); ++j) h[j] += y[j];
    if (m == 0) continue;

    const T* w2 = dense_.get(block_path(i, "mlp_norm.weight")).ptr();
    const T* wg = dense_.get(block_path(i, "mlp.w_gate")).ptr();
    const T* wu = dense_.get(block_path(i, "mlp.w_up")).ptr();
    const T* wd = dense_.get(block_path(i, "mlp.w_down")).ptr();
    Tensor<T> n2(h.shape()), gate(Shape{rows, m}), up(Shape{rows, m});
    std::vector<T> act(m), out(d);
    if (bt) bt->h_mid = h;
    for (std::size_t r = 0; r < rows; ++r) {
      T* hr = h.ptr() + r * d;
      rms_norm(hr, w2, d, n2.ptr() + r * d);
      detail::matvec(wg, m, d, n2.ptr() + r * d, gate.ptr() + r * m);
      detail::matvec(wu, m, d, n2.ptr() + r * d, up.ptr() + r * m);
      for (std::size_t k = 0; k < m; ++k) act[k] = silu(gate[r * m + k]) * up[r * m + k];
      detail::matvec(wd, d, m, act.data(), out.data());
      for (std::size_t k = 0; k < d; ++k) hr[k] += out[k];
    }
    if (bt) {
      bt->n2 = std::move(n2);
      bt->gate = std::move(gate);
      bt->up = std::move(up);
    }
  }

  Tensor<T> nf(h.shape());
  const T* wf = dense_.get("norm_f.weight").ptr();
  Tensor<T> logits(Shape{batch, length, v});
  for (std::size_t r = 0; r < rows; ++r) {
    rms_norm(h.ptr() + r * d, wf, d, nf.ptr() + r * d);
    head(nf.ptr() + r * d, logits.ptr() + r * v);
  }
  if (tape) {
    tape->h_out = std::move(h);
    tape->nf = std::move(nf);
  }
  return logits;
}

template void rms_norm<float>(const float*, const float*, std::size_t, float*);
template void rms_norm<double>(const double*, const double*, std::size_t, double*);
template void rms_norm_backward<float>(const float*, const float*, std::size_t, const float*, float*, float*);
template void rms_norm_backward<double>(const double*, const double*, std::size_t, const double*, double*, double*);
template double cross_entropy<float>(const Tensor<float>&, const Tensor<Token>&, Tensor<float>*);
template double cross_entropy<double>(const Tensor<double>&, const Tensor<Token>&, Tensor<double>*);
template class LMHeadModel<float>;
template class LMHeadModel<double>;

}  // namespace linrec
