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

// First-order diagonal linear recurrence x_k = a_k * x_{k-1} + b_k, executed
// sequentially, as a chunked parallel scan, or one step at a time.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "linrec/numerics.hpp"

namespace linrec {

/// Below this many steps per chunk the parallel scan runs sequentially.
inline constexpr std::size_t kMinScanChunk = 256;

/// Complex vector in split-plane form. An empty `im` plane means real.
template <typename T>
struct CVec {
  std::vector<T> re, im;

  CVec() = default;
  explicit CVec(std::size_t n, bool complex = true) : re(n, T(0)), im(complex ? n : 0, T(0)) {}
  CVec(std::vector<T> r, std::vector<T> i) : re(std::move(r)), im(std::move(i)) {}

  std::size_t size() const noexcept { return re.size(); }
  bool is_complex() const noexcept { return !im.empty(); }
  std::complex<T> at(std::size_t i) const { return {re[i], im.empty() ? T(0) : im[i]}; }
};

/// The affine map x -> a*x + b (elementwise over d_state).
template <typename T>
struct ScanElement {
  CVec<T> a, b;

  static ScanElement identity(std::size_t n, bool complex = true);
  std::size_t size() const noexcept { return a.size(); }
};

/// Composition of affine maps in temporal order: `first` is applied, then
/// `second`. Result is (second.a * first.a, second.a * first.b + second.b).
template <typename T>
ScanElement<T> combine(const ScanElement<T>& first, const ScanElement<T>& second);

/// Non-owning description of one recurrence problem. Arrays are row-major
/// [length, width]; a time-invariant `a` has only `width` entries.
template <typename T>
struct ScanInput {
  std::size_t length = 0;
  std::size_t width = 0;
  bool time_invariant = false;
  std::span<const T> a_re, a_im;    // a_im empty => real recurrence
  std::span<const T> b_re, b_im;    // b_im empty iff a_im empty
  std::span<const T> x0_re, x0_im;  // empty => zero initial state

  bool is_complex() const noexcept { return !a_im.empty(); }
  void validate() const;
};

template <typename T>
struct ScanOutput {
  std::span<T> re, im;  // [length, width]
};

struct ScanPlan {
  std::size_t chunk = 0;
  std::size_t chunks = 0;
  bool fallback = true;  // true => sequential path
};

/// Chunk size is ceil(length / workers) but never below kMinScanChunk.
ScanPlan plan_parallel_scan(std::size_t length, std::size_t workers);

template <typename T>
void scan_sequential(const ScanInput<T>& in, ScanOutput<T> out);

/// Chunked two-pass scan: local scans per chunk, an exclusive scan over the
/// chunk aggregates, then a fix-up of each chunk with its carried prefix.
/// With one chunk it is exactly scan_sequential.
template <typename T>
void scan_parallel(const ScanInput<T>& in, ScanOutput<T> out, std::size_t workers);

/// Element-sequence forms; return states as a [length, d_state] tensor.
template <typename T>
CTensor<T> scan_sequential(std::span<const ScanElement<T>> elems, const CVec<T>& x0);
template <typename T>
CTensor<T> scan_parallel(std::span<const ScanElement<T>> elems, const CVec<T>& x0, std::size_t workers);

/// Cached recurrence state of one sequence for step-wise inference.
template <typename T>
struct StepState {
  CVec<T> x;
  std::size_t k = 0;

  StepState() = default;
  explicit StepState(std::size_t width, bool complex = true) : x(width, complex) {}
};

/// x <- a*x + b, k <- k+1. Never allocates.
template <typename T>
const CVec<T>& step(StepState<T>& state, std::span<const T> a_re, std::span<const T> a_im,
                    std::span<const T> b_re, std::span<const T> b_im);

}  // namespace linrec
