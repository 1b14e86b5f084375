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


#include "linrec/validate.hpp"

#include <algorithm>
#include <cstdio>

#include "linrec/autograd.hpp"
#include "linrec/model.hpp"
#include "linrec/train.hpp"

namespace linrec {

namespace {

struct Variant {
  LayerKind kind;
  std::optional<Discretization> disc;
  bool async = false;

  std::string disc_label() const {
    std::string s = disc ? std::string(discretization_name(*disc)) : std::string("-");
    return async ? s + "+async" : s;
  }
};

std::vector<Variant> variants(const ValidationOptions& opt) {
  std::vector<Variant> out;
  for (LayerKind k : kAllLayerKinds) {
    if (opt.layer && *opt.layer != k) continue;
    if (!uses_discretization(k)) {
      out.push_back({k, std::nullopt, false});
      continue;
    }
    for (Discretization d : legal_discretizations(k)) out.push_back({k, d, false});
    if (supports_async(k))
      for (Discretization d : legal_discretizations(k)) out.push_back({k, d, true});
  }
  return out;
}

LayerConfig layer_config(const Variant& v, std::size_t d_model, std::size_t d_state) {
  LayerConfig c;
  c.d_model = d_model;
  c.d_state = d_state;
  c.discretization = v.disc;
  c.async = v.async;
  return c;
}

template <typename T>
std::vector<T> event_intervals(Rng& rng, std::size_t length) {
  std::vector<T> dts(length);
  for (auto& d : dts) d = static_cast<T>(0.25 + 1.5 * rng.uniform());
  return dts;
}

template <typename T>
void equivalence(const Variant& v, const ValidationOptions& opt, ValidationCell& par, ValidationCell& step) {
  std::uint64_t seed = 0;
  for (std::size_t d_state : opt.d_states)
    for (std::size_t d_model : opt.d_models)
      for (std::size_t batch : opt.batches)
        for (std::size_t length : opt.lengths) {
          Rng rng(++seed);
          const auto layer = make_layer<T>(v.kind, layer_config(v, d_model, d_state), rng);
          Tensor<T> u(Shape{batch, length, d_model});
          rng.fill_normal(u.data());
          const auto dts = event_intervals<T>(rng, length);
          ForwardOptions<T> fo;
          if (v.async) fo.deltas = dts;

          const Tensor<T> ref = layer->forward(u, fo);
          auto record = [](ValidationCell& cell, double err) {
            cell.max_error = std::max(cell.max_error, err);
            ++cell.cases;
          };

          Tape<T> seq_tape;
          record(par, max_rel_error<T>(layer->forward(u, fo, &seq_tape).data(), ref.data()));
          ForwardOptions<T> po = fo;
          po.mode = ExecMode::kParallel;
          po.workers = opt.workers;
          record(par, max_rel_error<T>(layer->forward(u, po).data(), ref.data()));
          Tape<T> par_tape;
          record(par, max_rel_error<T>(layer->forward(u, po, &par_tape).data(), ref.data()));

          std::vector<T> folded(u.size()), y_k(d_model);
          for (std::size_t b = 0; b < batch; ++b) {
            auto state = layer->make_state();
            for (std::size_t k = 0; k < length; ++k) {
              const std::size_t row = (b * length + k) * d_model;
              layer->step(state, std::span<const T>(u.ptr() + row, d_model), y_k, v.async ? dts[k] : T(1));
              std::copy(y_k.begin(), y_k.end(), folded.begin() + static_cast<std::ptrdiff_t>(row));
            }
          }
          record(step, max_rel_error<T>(std::span<const T>(folded), ref.data()));
        }
}

// 0.5 * sum(w * y^2) over a tiny configuration, parameters and input.
void gradient(const Variant& v, std::size_t seeds, ValidationCell& cell) {
  for (std::size_t s = 0; s < seeds; ++s) {
    Rng rng(1000 + s);
    const std::size_t d_model = 2, d_state = 2, length = 4;
    auto layer = make_layer<double>(v.kind, layer_config(v, d_model, d_state), rng);
    Tensor<double> u(Shape{1, length, d_model}), w(Shape{1, length, d_model});
    rng.fill_normal(u.data());
    rng.fill_normal(w.data());
    const auto dts = event_intervals<double>(rng, length);
    ForwardOptions<double> fo;
    if (v.async) fo.deltas = dts;

    auto loss = [&] {
      const auto y = layer->forward(u, fo);
      double l = 0;
      for (std::size_t i = 0; i < y.size(); ++i) l += 0.5 * w[i] * y[i] * y[i];
      return l;
    };
    Tape<double> tape;
    const auto y = layer->forward(u, fo, &tape);
    Tensor<double> gy(y.shape());
    for (std::size_t i = 0; i < y.size(); ++i) gy[i] = w[i] * y[i];
    auto grads = layer->backward(tape, gy);
    grads.params.add("u", grads.u);

    std::vector<ParamRef<double>> refs;
    for (auto& [name, t] : layer->params()) refs.push_back({name, &t});
    refs.push_back({"u", &u});
    const auto rep = finite_diff_check<double>(loss, std::span<const ParamRef<double>>(refs), grads.params);
    cell.max_error = std::max(cell.max_error, rep.max_error);
    ++cell.cases;
  }
}

// Two-block model, d_model 4, vocab 7, 6 tokens. Mixer pairs rotate over
// the registry's built-in kinds with the seed.
void model_gradient(std::size_t seeds, ValidationCell& cell) {
  for (std::size_t s = 0; s < seeds; ++s) {
    ModelConfig cfg;
    cfg.d_model = 4;
    cfg.d_state = 2;
    cfg.n_layer = 2;
    cfg.vocab_size = 7;
    cfg.d_intermediate = s % 2 ? 6 : 0;
    cfg.tie_embeddings = s % 2 == 0;
    cfg.mixer_types = {std::string(layer_kind_name(kAllLayerKinds[s % 5])),
                       std::string(layer_kind_name(kAllLayerKinds[(s + 1) % 5]))};
    Rng rng(2000 + s);
    auto model = build_model<double>(cfg, rng);
    Tensor<Token> tokens(Shape{1, 7});
    for (auto& t : tokens.data()) t = static_cast<Token>(rng.next_bits() % cfg.vocab_size);
    NamedTensors<double> grads;
    next_token_loss(*model, tokens, &grads);
    const auto refs = model->param_refs();
    FiniteDiffOptions fd;
    // Embedding rows are O(0.02) and feed a norm, so the third derivative
    // is large; a smaller step keeps truncation error below tolerance.
    fd.h = 1e-6;
    const auto rep = finite_diff_check<double>([&] { return next_token_loss(*model, tokens); },
                                               std::span<const ParamRef<double>>(refs), grads, fd);
    cell.max_error = std::max(cell.max_error, rep.max_error);
    ++cell.cases;
  }
}

}  // namespace

bool ValidationReport::passed() const {
  return std::all_of(cells.begin(), cells.end(), [](const ValidationCell& c) { return c.passed; });
}

std::string format_cell(const ValidationCell& c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s %-15s %-9s %-4s max_err=%-10.3e tol=%-8.1e cases=%-4zu %s", c.layer.c_str(),
                c.discretization.c_str(), c.check.c_str(), c.dtype.c_str(), c.max_error, c.tolerance, c.cases,
                c.passed ? "PASS" : "FAIL");
  return buf;
}

std::string ValidationReport::table() const {
  std::string out;
  for (const auto& c : cells) out += format_cell(c) + "\n";
  return out;
}

ValidationReport run_validation(const ValidationOptions& opt, const std::function<void(const ValidationCell&)>& on_cell) {
  ValidationReport report;
  auto emit = [&](ValidationCell c) {
    c.passed = c.max_error <= c.tolerance;  // false for NaN
    report.cells.push_back(c);
    if (on_cell) on_cell(c);
  };
  for (const Variant& v : variants(opt)) {
    const std::string kind(layer_kind_name(v.kind));
    for (DType dt : {DType::kF64, DType::kF32}) {
      if (dt == DType::kF32 && !opt.include_f32) continue;
      const double tol = dt == DType::kF64 ? kEquivalenceTolF64 : kEquivalenceTolF32;
      ValidationCell par{kind, v.disc_label(), "parallel", std::string(dtype_name(dt)), 0, tol};
      ValidationCell step{kind, v.disc_label(), "step", std::string(dtype_name(dt)), 0, tol};
      if (dt == DType::kF64)
        equivalence<double>(v, opt, par, step);
      else
        equivalence<float>(v, opt, par, step);
      emit(par);
      emit(step);
    }
    ValidationCell grad{kind, v.disc_label(), "gradient", "f64", 0, kGradientTol};
    gradient(v, opt.grad_seeds, grad);
    emit(grad);
  }
  if (!opt.layer) {
    ValidationCell lm{"lm", "-", "gradient", "f64", 0, kGradientTol};
    model_gradient(opt.grad_seeds, lm);
    emit(lm);
  }
  return report;
}

}  // namespace linrec
