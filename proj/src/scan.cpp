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

#include "linrec/scan.hpp"

#include <algorithm>
#include <string>
#include <thread>

namespace linrec {

template <typename T>
ScanElement<T> ScanElement<T>::identity(std::size_t n, bool complex) {
  ScanElement e{CVec<T>(n, complex), CVec<T>(n, complex)};
  std::fill(e.a.re.begin(), e.a.re.end(), T(1));
  return e;
}

template <typename T>
ScanElement<T> combine(const ScanElement<T>& first, const ScanElement<T>& second) {
  const std::size_t n = first.size();
  require(second.size() == n && first.b.size() == n && second.b.size() == n, ErrorCode::kShapeError,
          "combine: extents " + std::to_string(n) + " and " + std::to_string(second.size()));
  const bool cplx = first.a.is_complex() || second.a.is_complex() || first.b.is_complex() || second.b.is_complex();
  ScanElement<T> out{CVec<T>(n, cplx), CVec<T>(n, cplx)};
  for (std::size_t j = 0; j < n; ++j) {
    const auto a1 = first.a.at(j), b1 = first.b.at(j), a2 = second.a.at(j), b2 = second.b.at(j);
    // Written out so that real inputs do not pick up signed-zero noise.
    const T ar = a2.real() * a1.real() - a2.imag() * a1.imag();
    const T ai = a2.real() * a1.imag() + a2.imag() * a1.real();
    const T br = a2.real() * b1.real() - a2.imag() * b1.imag() + b2.real();
    const T bi = a2.real() * b1.imag() + a2.imag() * b1.real() + b2.imag();
    out.a.re[j] = ar;
    out.b.re[j] = br;
    if (cplx) {
      out.a.im[j] = ai;
      out.b.im[j] = bi;
    }
  }
  return out;
}

template <typename T>
void ScanInput<T>::validate() const {
  const std::size_t n = length * width;
  const std::size_t na = time_invariant ? width : n;
  require(a_re.size() == na && b_re.size() == n, ErrorCode::kShapeError,
          "scan: a has " + std::to_string(a_re.size()) + " entries, b has " + std::to_string(b_re.size()) +
              " for length " + std::to_string(length) + " width " + std::to_string(width));
  if (is_complex()) {
    require(a_im.size() == na && b_im.size() == n, ErrorCode::kShapeError, "scan: imaginary plane extents");
  } else {
    require(b_im.empty(), ErrorCode::kShapeError, "scan: complex b with real a");
  }
  require(x0_re.empty() || x0_re.size() == width, ErrorCode::kShapeError, "scan: x0 extent");
  require(x0_im.empty() || (is_complex() && x0_im.size() == width), ErrorCode::kShapeError, "scan: x0 imaginary extent");
}

ScanPlan plan_parallel_scan(std::size_t length, std::size_t workers) {
  ScanPlan p;
  workers = std::max<std::size_t>(1, workers);
  p.chunk = std::max(kMinScanChunk, (length + workers - 1) / workers);
  p.chunks = length == 0 ? 0 : (length + p.chunk - 1) / p.chunk;
  p.fallback = workers == 1 || p.chunks <= 1;
  return p;
}

namespace {

// Runs steps [k0, k1) from the state (xr, xi), updating it in place and
// writing each state into the output rows.
template <typename T, bool Complex, bool Invariant>
void run_range(const ScanInput<T>& in, std::size_t k0, std::size_t k1, T* xr, T* xi, T* out_re, T* out_im) {
  const std::size_t w = in.width;
  for (std::size_t k = k0; k < k1; ++k) {
    const std::size_t arow = Invariant ? 0 : k * w;
    const T* ar = in.a_re.data() + arow;
    const T* br = in.b_re.data() + k * w;
    T* orr = out_re + k * w;
    if constexpr (Complex) {
      const T* ai = in.a_im.data() + arow;
      const T* bi = in.b_im.data() + k * w;
      T* oi = out_im + k * w;
      for (std::size_t j = 0; j < w; ++j) {
        const T nr = ar[j] * xr[j] - ai[j] * xi[j] + br[j];
        const T ni = ar[j] * xi[j] + ai[j] * xr[j] + bi[j];
        xr[j] = nr;
        xi[j] = ni;
        orr[j] = nr;
        oi[j] = ni;
      }
    } else {
      for (std::size_t j = 0; j < w; ++j) {
        xr[j] = ar[j] * xr[j] + br[j];
        orr[j] = xr[j];
      }
    }
  }
}

// Running product of a over [k0, k1) multiplied into (pr, pi).
template <typename T, bool Complex, bool Invariant>
void multiply_a(const ScanInput<T>& in, std::size_t k, T* pr, T* pi) {
  const std::size_t w = in.width;
  const std::size_t arow = Invariant ? 0 : k * w;
  const T* ar = in.a_re.data() + arow;
  if constexpr (Complex) {
    const T* ai = in.a_im.data() + arow;
    for (std::size_t j = 0; j < w; ++j) {
      const T r = ar[j] * pr[j] - ai[j] * pi[j];
      pi[j] = ar[j] * pi[j] + ai[j] * pr[j];
      pr[j] = r;
    }
  } else {
    for (std::size_t j = 0; j < w; ++j) pr[j] *= ar[j];
  }
}

template <typename Fn>
void fork_join(std::size_t tasks, Fn&& fn) {
  std::vector<std::jthread> pool;
  pool.reserve(tasks > 0 ? tasks - 1 : 0);
  for (std::size_t t = 1; t < tasks; ++t) pool.emplace_back([&fn, t] { fn(t); });
  if (tasks > 0) fn(0);
}

template <typename T, bool Complex, bool Invariant>
void sequential_impl(const ScanInput<T>& in, ScanOutput<T> out) {
  const std::size_t w = in.width;
  std::vector<T> xr(w, T(0)), xi(Complex ? w : 0, T(0));
  if (!in.x0_re.empty()) std::copy(in.x0_re.begin(), in.x0_re.end(), xr.begin());
  if (Complex && !in.x0_im.empty()) std::copy(in.x0_im.begin(), in.x0_im.end(), xi.begin());
  run_range<T, Complex, Invariant>(in, 0, in.length, xr.data(), xi.data(), out.re.data(),
                                   Complex ? out.im.data() : nullptr);
}

template <typename T, bool Complex, bool Invariant>
void parallel_impl(const ScanInput<T>& in, ScanOutput<T> out, const ScanPlan& plan) {
  const std::size_t w = in.width, nc = plan.chunks;
  const std::size_t wi = Complex ? w : 0;
  T* ore = out.re.data();
  T* oim = Complex ? out.im.data() : nullptr;

  // Per-chunk aggregate (prod a, local final state) as scan elements.
  std::vector<ScanElement<T>> agg(nc);
  for (auto& e : agg) e = ScanElement<T>::identity(w, Complex);

  fork_join(nc, [&](std::size_t c) {
    const std::size_t k0 = c * plan.chunk, k1 = std::min(in.length, k0 + plan.chunk);
    std::vector<T> xr(w, T(0)), xi(wi, T(0));
    if (c == 0) {
      if (!in.x0_re.empty()) std::copy(in.x0_re.begin(), in.x0_re.end(), xr.begin());
      if (Complex && !in.x0_im.empty()) std::copy(in.x0_im.begin(), in.x0_im.end(), xi.begin());
    }
    run_range<T, Complex, Invariant>(in, k0, k1, xr.data(), xi.data(), ore, oim);
    auto& e = agg[c];
    for (std::size_t k = k0; k < k1; ++k)
      multiply_a<T, Complex, Invariant>(in, k, e.a.re.data(), Complex ? e.a.im.data() : nullptr);
    e.b.re = std::move(xr);
    if constexpr (Complex) e.b.im = std::move(xi);
  });

  // Exclusive scan over chunk aggregates; the b of prefix c is the true
  // state entering chunk c + 1.
  std::vector<ScanElement<T>> carry(nc);
  carry[0] = agg[0];
  for (std::size_t c = 1; c < nc; ++c) carry[c] = combine(carry[c - 1], agg[c]);

  fork_join(nc - 1, [&](std::size_t t) {
    const std::size_t c = t + 1;
    const std::size_t k0 = c * plan.chunk, k1 = std::min(in.length, k0 + plan.chunk);
    const auto& x = carry[c - 1].b;
    std::vector<T> pr(w, T(1)), pi(wi, T(0));
    for (std::size_t k = k0; k < k1; ++k) {
      multiply_a<T, Complex, Invariant>(in, k, pr.data(), pi.data());
      T* orr = ore + k * w;
      if constexpr (Complex) {
        T* oi = oim + k * w;
        for (std::size_t j = 0; j < w; ++j) {
          orr[j] += pr[j] * x.re[j] - pi[j] * x.im[j];
          oi[j] += pr[j] * x.im[j] + pi[j] * x.re[j];
        }
      } else {
        for (std::size_t j = 0; j < w; ++j) orr[j] += pr[j] * x.re[j];
      }
    }
  });
}

template <typename T, template <typename, bool, bool> class Impl, typename... Args>
void dispatch(const ScanInput<T>& in, ScanOutput<T> out, Args&&... args) {
  if (in.is_complex()) {
    if (in.time_invariant)
      Impl<T, true, true>::run(in, out, args...);
    else
      Impl<T, true, false>::run(in, out, args...);
  } else {
    if (in.time_invariant)
      Impl<T, false, true>::run(in, out, args...);
    else
      Impl<T, false, false>::run(in, out, args...);
  }
}

template <typename T, bool C, bool I>
struct Sequential {
  static void run(const ScanInput<T>& in, ScanOutput<T> out) { sequential_impl<T, C, I>(in, out); }
};
template <typename T, bool C, bool I>
struct Parallel {
  static void run(const ScanInput<T>& in, ScanOutput<T> out, const ScanPlan& plan) {
    parallel_impl<T, C, I>(in, out, plan);
  }
};

template <typename T>
void check_output(const ScanInput<T>& in, const ScanOutput<T>& out) {
  const std::size_t n = in.length * in.width;
  require(out.re.size() == n && (in.is_complex() ? out.im.size() == n : true), ErrorCode::kShapeError,
          "scan: output extent");
}

}  // namespace

template <typename T>
void scan_sequential(const ScanInput<T>& in, ScanOutput<T> out) {
  in.validate();
  check_output(in, out);
  if (in.length == 0) return;
  dispatch<T, Sequential>(in, out);
}

template <typename T>
void scan_parallel(const ScanInput<T>& in, ScanOutput<T> out, std::size_t workers) {
  in.validate();
  check_output(in, out);
  if (in.length == 0) return;
  const ScanPlan plan = plan_parallel_scan(in.length, workers);
  if (plan.fallback) {
    dispatch<T, Sequential>(in, out);
    return;
  }
  dispatch<T, Parallel>(in, out, plan);
}

namespace {

template <typename T>
struct Packed {
  std::vector<T> a_re, a_im, b_re, b_im;
  ScanInput<T> in;
};

template <typename T>
Packed<T> pack(std::span<const ScanElement<T>> elems, const CVec<T>& x0) {
  Packed<T> p;
  const std::size_t w = x0.size(), n = elems.size();
  bool cplx = x0.is_complex();
  for (const auto& e : elems) {
    require(e.a.size() == w && e.b.size() == w, ErrorCode::kShapeError, "scan: element extent differs from x0");
    cplx = cplx || e.a.is_complex() || e.b.is_complex();
  }
  p.a_re.resize(n * w);
  p.b_re.resize(n * w);
  if (cplx) {
    p.a_im.resize(n * w);
    p.b_im.resize(n * w);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < w; ++j) {
      const auto a = elems[k].a.at(j), b = elems[k].b.at(j);
      p.a_re[k * w + j] = a.real();
      p.b_re[k * w + j] = b.real();
      if (cplx) {
        p.a_im[k * w + j] = a.imag();
        p.b_im[k * w + j] = b.imag();
      }
    }
  p.in.length = n;
  p.in.width = w;
  p.in.a_re = p.a_re;
  p.in.a_im = p.a_im;
  p.in.b_re = p.b_re;
  p.in.b_im = p.b_im;
  p.in.x0_re = x0.re;
  if (cplx) p.in.x0_im = x0.im;
  return p;
}

}  // namespace

template <typename T>
CTensor<T> scan_sequential(std::span<const ScanElement<T>> elems, const CVec<T>& x0) {
  const auto p = pack(elems, x0);
  CTensor<T> out(Shape{elems.size(), x0.size()});
  scan_sequential(p.in, ScanOutput<T>{out.re.data(), p.in.is_complex() ? out.im.data() : std::span<T>{}});
  return out;
}

template <typename T>
CTensor<T> scan_parallel(std::span<const ScanElement<T>> elems, const CVec<T>& x0, std::size_t workers) {
  const auto p = pack(elems, x0);
  CTensor<T> out(Shape{elems.size(), x0.size()});
  scan_parallel(p.in, ScanOutput<T>{out.re.data(), p.in.is_complex() ? out.im.data() : std::span<T>{}}, workers);
  return out;
}

template <typename T>
const CVec<T>& step(StepState<T>& state, std::span<const T> a_re, std::span<const T> a_im, std::span<const T> b_re,
                    std::span<const T> b_im) {
  const std::size_t w = state.x.size();
  if (a_re.size() != w || b_re.size() != w)
    fail(ErrorCode::kShapeError, "step: state width " + std::to_string(w) + ", a " + std::to_string(a_re.size()) +
                                     ", b " + std::to_string(b_re.size()));
  T* xr = state.x.re.data();
  if (state.x.is_complex()) {
    require(a_im.size() == w && b_im.size() == w, ErrorCode::kShapeError, "step: complex state needs complex a, b");
    T* xi = state.x.im.data();
    for (std::size_t j = 0; j < w; ++j) {
      const T nr = a_re[j] * xr[j] - a_im[j] * xi[j] + b_re[j];
      const T ni = a_re[j] * xi[j] + a_im[j] * xr[j] + b_im[j];
      xr[j] = nr;
      xi[j] = ni;
    }
  } else {
    require(a_im.empty() && b_im.empty(), ErrorCode::kShapeError, "step: real state given complex a or b");
    for (std::size_t j = 0; j < w; ++j) xr[j] = a_re[j] * xr[j] + b_re[j];
  }
  ++state.k;
  return state.x;
}

#define LINREC_INSTANTIATE_SCAN(T)                                                                           \
  template struct ScanElement<T>;                                                                            \
  template ScanElement<T> combine<T>(const ScanElement<T>&, const ScanElement<T>&);                          \
  template struct ScanInput<T>;                                                                              \
  template void scan_sequential<T>(const ScanInput<T>&, ScanOutput<T>);                                      \
  template void scan_parallel<T>(const ScanInput<T>&, ScanOutput<T>, std::size_t);                           \
  template CTensor<T> scan_sequential<T>(std::span<const ScanElement<T>>, const CVec<T>&);                    \
  template CTensor<T> scan_parallel<T>(std::span<const ScanElement<T>>, const CVec<T>&, std::size_t);        \
  template const CVec<T>& step<T>(StepState<T>&, std::span<const T>, std::span<const T>, std::span<const T>, \
                                  std::span<const T>);

LINREC_INSTANTIATE_SCAN(float)
LINREC_INSTANTIATE_SCAN(double)

}  // namespace linrec
