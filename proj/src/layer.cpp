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

#include "linrec/layer.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <mutex>

#include "layer_factories.hpp"
#include "parallel.hpp"

namespace linrec {

std::string_view layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kS4D: return "s4d";
    case LayerKind::kS5: return "s5";
    case LayerKind::kLRU: return "lru";
    case LayerKind::kS6: return "s6";
    case LayerKind::kRGLRU: return "rglru";
  }
  return "?";
}

LayerKind parse_layer_kind(std::string_view name) {
  std::string s;
  for (char ch : name)
    if (ch != '-' && ch != '_') s += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (s == "s4d" || s == "s4") return LayerKind::kS4D;
  if (s == "s5") return LayerKind::kS5;
  if (s == "lru") return LayerKind::kLRU;
  if (s == "s6" || s == "mamba") return LayerKind::kS6;
  if (s == "rglru") return LayerKind::kRGLRU;
  fail(ErrorCode::kUnknownLayer, "unknown layer kind '" + std::string(name) + "'");
}

bool is_time_invariant(LayerKind kind) {
  return kind == LayerKind::kS4D || kind == LayerKind::kS5 || kind == LayerKind::kLRU;
}

bool uses_discretization(LayerKind kind) {
  return kind == LayerKind::kS4D || kind == LayerKind::kS5 || kind == LayerKind::kS6;
}

bool supports_async(LayerKind kind) { return kind == LayerKind::kS4D || kind == LayerKind::kS5; }

std::vector<Discretization> legal_discretizations(LayerKind kind) {
  if (uses_discretization(kind)) return {Discretization::kZoh, Discretization::kBilinear, Discretization::kDirac};
  return {Discretization::kZoh};
}

std::string_view exec_mode_name(ExecMode m) { return m == ExecMode::kSequential ? "sequential" : "parallel"; }

namespace {
std::mutex g_warn_mu;
WarningHandler g_warn_handler;

struct Fault {
  bool active = false;
  LayerKind kind = LayerKind::kS4D;
  std::string param;
};
std::mutex g_fault_mu;
Fault g_fault;
}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(g_warn_mu);
  g_warn_handler = std::move(handler);
}

void warn(std::string_view message) {
  std::lock_guard lock(g_warn_mu);
  if (g_warn_handler)
    g_warn_handler(message);
  else
    std::cerr << "linrec warning: " << message << '\n';
}

namespace testing {
void inject_backward_fault(LayerKind kind, std::string param) {
  std::lock_guard lock(g_fault_mu);
  g_fault = Fault{true, kind, std::move(param)};
}
void clear_backward_fault() {
  std::lock_guard lock(g_fault_mu);
  g_fault = Fault{};
}
}  // namespace testing

template <typename T>
void Tape<T>::consume() {
  require(!consumed_, ErrorCode::kTapeConsumed, "backward already ran on this tape");
  consumed_ = true;
}

template <typename T>
void Layer<T>::check_input(const Tensor<T>& u, const ForwardOptions<T>& opt) const {
  require(u.rank() == 3 && u.extent(2) == cfg_.d_model, ErrorCode::kShapeError,
          std::string(layer_kind_name(kind_)) + ": input " + shape_string(u.shape()) + ", expected [batch, length, " +
              std::to_string(cfg_.d_model) + "]");
  if (cfg_.async)
    require(opt.deltas.size() == u.extent(1), ErrorCode::kShapeError,
            "async layer needs one delta per step: got " + std::to_string(opt.deltas.size()) + " for length " +
                std::to_string(u.extent(1)));
}

namespace {

// p <- p * a over rows [0, n) of a (or n times the constant a).
template <typename T>
void multiply_rows(std::size_t n, std::size_t w, bool invariant, const T* ar, const T* ai, T* pr, T* pi) {
  for (std::size_t k = 0; k < n; ++k) {
    const T* r = ar + (invariant ? 0 : k * w);
    if (ai) {
      const T* i = ai + (invariant ? 0 : k * w);
      for (std::size_t j = 0; j < w; ++j) {
        const T t = r[j] * pr[j] - i[j] * pi[j];
        pi[j] = r[j] * pi[j] + i[j] * pr[j];
        pr[j] = t;
      }
    } else {
      for (std::size_t j = 0; j < w; ++j) pr[j] *= r[j];
    }
  }
}

template <typename T>
std::span<T> maybe(std::vector<T>& v) {
  return v.empty() ? std::span<T>{} : std::span<T>(v);
}

}  // namespace

template <typename T>
void Layer<T>::forward_taped(const Consts& c, const T* u, const T* dt, std::size_t length,
                             const ForwardOptions<T>& opt, CVec<T>& states, T* y) const {
  const std::size_t w = state_width();
  const bool cplx = complex_state();
  const bool inv = invariant_a();
  const std::size_t n = length * w;
  states = CVec<T>(n, cplx);
  std::vector<T> a_re(inv ? 0 : n), a_im(inv || !cplx ? 0 : n), b_re(n), b_im(cplx ? n : 0);
  std::vector<T> scratch(scratch_size());
  transitions(c, u, dt, length, a_re.data(), a_im.data(), b_re.data(), b_im.data(), scratch.data());

  ScanInput<T> in;
  in.length = length;
  in.width = w;
  in.time_invariant = inv;
  if (inv) {
    constant_a(c, in.a_re, in.a_im);
  } else {
    in.a_re = a_re;
    in.a_im = a_im;
  }
  in.b_re = b_re;
  in.b_im = b_im;
  ScanOutput<T> out{states.re, maybe(states.im)};
  if (opt.mode == ExecMode::kParallel)
    scan_parallel(in, out, opt.workers);
  else
    scan_sequential(in, out);
  readout(c, u, length, states.re.data(), cplx ? states.im.data() : nullptr, y, scratch.data());
}

// Forward without materializing states beyond one chunk. The parallel
// variant first reduces each chunk to its affine aggregate, scans the
// aggregates, then re-runs every chunk from its true incoming state.
template <typename T>
void Layer<T>::forward_streaming(const Consts& c, const T* u, const T* dt, std::size_t length,
                                 const ForwardOptions<T>& opt, CVec<T>& last, T* y) const {
  const std::size_t w = state_width(), d = cfg_.d_model;
  const bool cplx = complex_state();
  const bool inv = invariant_a();
  std::span<const T> ca_re, ca_im;
  if (inv) constant_a(c, ca_re, ca_im);
  last = CVec<T>(w, cplx);
  if (length == 0) return;

  struct Buffers {
    std::vector<T> a_re, a_im, b_re, b_im, x_re, x_im, scratch;
  };
  auto make_buffers = [&](std::size_t rows) {
    Buffers buf;
    const std::size_t n = rows * w;
    buf.a_re.resize(inv ? 0 : n);
    buf.a_im.resize(inv || !cplx ? 0 : n);
    buf.b_re.resize(n);
    buf.b_im.resize(cplx ? n : 0);
    buf.x_re.resize(n);
    buf.x_im.resize(cplx ? n : 0);
    buf.scratch.resize(scratch_size());
    return buf;
  };
  // Scans rows [k0, k0+n) from x0 (empty = zero), optionally reading out.
  auto run_chunk = [&](Buffers& buf, std::size_t k0, std::size_t n, const CVec<T>* x0, bool emit) {
    transitions(c, u + k0 * d, dt ? dt + k0 : nullptr, n, buf.a_re.data(), buf.a_im.data(), buf.b_re.data(),
                buf.b_im.data(), buf.scratch.data());
    ScanInput<T> in;
    in.length = n;
    in.width = w;
    in.time_invariant = inv;
    in.a_re = inv ? ca_re : std::span<const T>(buf.a_re.data(), n * w);
    in.a_im = inv ? ca_im : std::span<const T>(buf.a_im.data(), cplx ? n * w : 0);
    in.b_re = std::span<const T>(buf.b_re.data(), n * w);
    in.b_im = std::span<const T>(buf.b_im.data(), cplx ? n * w : 0);
    if (x0) {
      in.x0_re = x0->re;
      in.x0_im = x0->im;
    }
    scan_sequential(in, ScanOutput<T>{std::span<T>(buf.x_re.data(), n * w),
                                      std::span<T>(buf.x_im.data(), cplx ? n * w : 0)});
    if (emit)
      readout(c, u + k0 * d, n, buf.x_re.data(), cplx ? buf.x_im.data() : nullptr, y + k0 * d, buf.scratch.data());
  };
  auto last_row = [&](const Buffers& buf, std::size_t n, CVec<T>& out) {
    std::copy_n(buf.x_re.begin() + (n - 1) * w, w, out.re.begin());
    if (cplx) std::copy_n(buf.x_im.begin() + (n - 1) * w, w, out.im.begin());
  };

  const ScanPlan plan = opt.mode == ExecMode::kParallel ? plan_parallel_scan(length, opt.workers) : ScanPlan{};
  if (plan.fallback) {
    const std::size_t rows = std::min(length, kMinScanChunk);
    Buffers buf = make_buffers(rows);
    bool first = true;
    for (std::size_t k0 = 0; k0 < length; k0 += rows) {
      const std::size_t n = std::min(rows, length - k0);
      run_chunk(buf, k0, n, first ? nullptr : &last, true);
      last_row(buf, n, last);
      first = false;
    }
    return;
  }

  const std::size_t nc = plan.chunks;
  std::vector<ScanElement<T>> agg(nc);
  detail::fork_join(nc, [&](std::size_t ci) {
    const std::size_t k0 = ci * plan.chunk, n = std::min(plan.chunk, length - k0);
    Buffers buf = make_buffers(n);
    run_chunk(buf, k0, n, nullptr, false);
    ScanElement<T> e = ScanElement<T>::identity(w, cplx);
    multiply_rows(n, w, inv, inv ? ca_re.data() : buf.a_re.data(),
                  cplx ? (inv ? ca_im.data() : buf.a_im.data()) : nullptr, e.a.re.data(),
                  cplx ? e.a.im.data() : nullptr);
    last_row(buf, n, e.b);
    agg[ci] = std::move(e);
  });
  std::vector<ScanElement<T>> carry(nc);
  carry[0] = agg[0];
  for (std::size_t ci = 1; ci < nc; ++ci) carry[ci] = combine(carry[ci - 1], agg[ci]);
  detail::fork_join(nc, [&](std::size_t ci) {
    const std::size_t k0 = ci * plan.chunk, n = std::min(plan.chunk, length - k0);
    Buffers buf = make_buffers(n);
    run_chunk(buf, k0, n, ci == 0 ? nullptr : &carry[ci - 1].b, true);
  });
  last = carry[nc - 1].b;
}

template <typename T>
Tensor<T> Layer<T>::forward(const Tensor<T>& u, const ForwardOptions<T>& opt, Tape<T>* tape,
                            std::vector<LayerState<T>>* final_states) const {
  check_input(u, opt);
  const std::size_t batch = u.extent(0), length = u.extent(1), d = cfg_.d_model;
  const Consts c = prepare();
  const T* dt = cfg_.async ? opt.deltas.data() : nullptr;
  Tensor<T> y(Shape{batch, length, d});

  if (tape) {
    *tape = Tape<T>{};
    tape->owner = this;
    tape->u = u;
    if (cfg_.async) tape->deltas.assign(opt.deltas.begin(), opt.deltas.end());
    tape->workers = opt.workers;
    tape->states.resize(batch);
  }
  if (final_states) {
    final_states->clear();
    for (std::size_t b = 0; b < batch; ++b) final_states->push_back(make_state());
  }

  const std::size_t w = state_width();
  for (std::size_t b = 0; b < batch; ++b) {
    const T* ub = u.ptr() + b * length * d;
    T* yb = y.ptr() + b * length * d;
    CVec<T> last;
    if (tape) {
      forward_taped(c, ub, dt, length, opt, tape->states[b], yb);
      if (final_states && length > 0) {
        const auto& st = tape->states[b];
        last = CVec<T>(w, complex_state());
        std::copy_n(st.re.begin() + (length - 1) * w, w, last.re.begin());
        if (complex_state()) std::copy_n(st.im.begin() + (length - 1) * w, w, last.im.begin());
      }
    } else {
      forward_streaming(c, ub, dt, length, opt, last, yb);
    }
    if (final_states && length > 0) {
      auto& s = (*final_states)[b].scan;
      std::copy(last.re.begin(), last.re.end(), s.x.re.begin());
      std::copy(last.im.begin(), last.im.end(), s.x.im.begin());
      s.k = length;
    }
  }
  return y;
}

template <typename T>
LayerGrads<T> Layer<T>::backward(Tape<T>& tape, const Tensor<T>& grad_y) const {
  require(tape.owner == this, ErrorCode::kConfigError, "tape was recorded by a different layer");
  tape.consume();
  require(grad_y.shape() == tape.u.shape(), ErrorCode::kShapeError,
          "grad_y " + shape_string(grad_y.shape()) + " vs input " + shape_string(tape.u.shape()));
  const std::size_t batch = tape.u.extent(0), length = tape.u.extent(1), d = cfg_.d_model;
  const Consts c = prepare();
  LayerGrads<T> out{params_.zeros_like(), Tensor<T>(tape.u.shape())};

  // Per-element bundles reduced in batch order, so the result does not
  // depend on the worker count.
  std::vector<GradBundle<T>> partial(batch);
  const std::size_t workers = std::max<std::size_t>(1, std::min(tape.workers, batch));
  detail::fork_join(workers, [&](std::size_t t) {
    for (std::size_t b = t; b < batch; b += workers) {
      partial[b] = params_.zeros_like();
      const std::size_t off = b * length * d;
      backward_sequence(c, tape.u.data().subspan(off, length * d), tape.deltas, tape.states[b],
                        grad_y.data().subspan(off, length * d), partial[b], out.u.data().subspan(off, length * d));
    }
  });
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < out.params.size(); ++i) {
      auto dst = out.params[i].second.data();
      auto src = partial[b][i].second.data();
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }

  std::lock_guard lock(g_fault_mu);
  if (g_fault.active && g_fault.kind == kind_)
    if (auto* g = out.params.find(g_fault.param))
      for (auto& v : g->data()) v = -v;
  return out;
}

template <typename T>
LayerState<T> Layer<T>::make_state() const {
  LayerState<T> s;
  const std::size_t w = state_width();
  const bool cplx = complex_state();
  s.scan = StepState<T>(w, cplx);
  s.consts = prepare();
  if (!invariant_a()) {
    s.a_re.resize(w);
    if (cplx) s.a_im.resize(w);
  }
  s.b_re.resize(w);
  if (cplx) s.b_im.resize(w);
  s.scratch.resize(scratch_size());
  return s;
}

template <typename T>
void Layer<T>::step(LayerState<T>& state, std::span<const T> u_k, std::span<T> y_k, T delta) const {
  if (u_k.size() != cfg_.d_model || y_k.size() != cfg_.d_model || state.scan.x.size() != state_width())
    fail(ErrorCode::kShapeError, std::string(layer_kind_name(kind_)) + ": step extents");
  transitions(state.consts, u_k.data(), cfg_.async ? &delta : nullptr, 1, state.a_re.data(), state.a_im.data(),
              state.b_re.data(), state.b_im.data(), state.scratch.data());
  std::span<const T> a_re = state.a_re, a_im = state.a_im;
  if (invariant_a()) constant_a(state.consts, a_re, a_im);
  linrec::step<T>(state.scan, a_re, a_im, state.b_re, state.b_im);
  readout(state.consts, u_k.data(), 1, state.scan.x.re.data(),
          complex_state() ? state.scan.x.im.data() : nullptr, y_k.data(), state.scratch.data());
}

template <typename T>
std::unique_ptr<Layer<T>> make_layer(LayerKind kind, const LayerConfig& cfg, Rng& rng) {
  require(cfg.d_model > 0 && cfg.d_state > 0, ErrorCode::kConfigError, "d_model and d_state must be positive");
  if (!uses_discretization(kind) && cfg.discretization)
    warn(std::string(layer_kind_name(kind)) + " is parameterized in discrete time; discretization '" +
         std::string(discretization_name(*cfg.discretization)) + "' is ignored");
  if (cfg.async && !supports_async(kind))
    warn(std::string(layer_kind_name(kind)) + " has no continuous step size; async intervals are ignored");
  LayerConfig c = cfg;
  if (!supports_async(kind)) c.async = false;
  switch (kind) {
    case LayerKind::kS4D: return detail::make_s4d<T>(c, rng);
    case LayerKind::kS5: return detail::make_s5<T>(c, rng);
    case LayerKind::kLRU: return detail::make_lru<T>(c, rng);
    case LayerKind::kS6: return detail::make_s6<T>(c, rng);
    case LayerKind::kRGLRU: return detail::make_rglru<T>(c, rng);
  }
  fail(ErrorCode::kUnknownLayer, "unknown layer kind");
}

template class Tape<float>;
template class Tape<double>;
template class Layer<float>;
template class Layer<double>;
template std::unique_ptr<Layer<float>> make_layer<float>(LayerKind, const LayerConfig&, Rng&);
template std::unique_ptr<Layer<double>> make_layer<double>(LayerKind, const LayerConfig&, Rng&);

}  // namespace linrec
