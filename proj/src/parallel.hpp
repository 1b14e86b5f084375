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

#include <cstddef>
#include <thread>
#include <vector>

namespace linrec::detail {

/// Runs fn(0..tasks-1), task 0 on the calling thread, and joins.
template <typename Fn>
void fork_join(std::size_t tasks, Fn&& fn) {
  std::vector<std::jthread> pool;
  if (tasks > 1) pool.reserve(tasks - 1);
  for (std::size_t t = 1; t < tasks; ++t) pool.emplace_back([&fn, t] { fn(t); });
  if (tasks > 0) fn(0);
}

}  // namespace linrec::detail
