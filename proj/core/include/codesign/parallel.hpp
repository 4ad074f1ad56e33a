// Copyright 2026 The codesign Authors
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

#ifndef CODESIGN_PARALLEL_HPP_
#define CODESIGN_PARALLEL_HPP_

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace codesign {

// Runs f(i) for i in [0, n) on up to `workers` threads. Each task writes into
// its own output slot, so the result of the fan-out does not depend on the
// worker count. If any task throws, the exception of the lowest task index is
// rethrown after all tasks have finished.
template <typename F>
void parallel_for(int n, int workers, F&& f) {
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  workers = std::min(workers, n);

  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<size_t>(n), nullptr);
  auto body = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Hardware thread count with a sane floor.
inline int default_workers() {
  const unsigned int hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace codesign

#endif  // CODESIGN_PARALLEL_HPP_
