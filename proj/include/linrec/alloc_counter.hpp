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

#pragma once

#include <cstdint>

namespace linrec {

/// Number of global operator new calls made by the calling thread. The core
/// library replaces operator new to maintain this counter; it is how the
/// zero-allocation guarantees of the step paths are checked.
std::uint64_t thread_allocation_count() noexcept;

/// Counts allocations made on this thread between construction and `count()`.
class AllocationProbe {
 public:
  AllocationProbe() noexcept : start_(thread_allocation_count()) {}
  std::uint64_t count() const noexcept { return thread_allocation_count() - start_; }
  void reset() noexcept { start_ = thread_allocation_count(); }

 private:
  std::uint64_t start_;
};

}  // namespace linrec
