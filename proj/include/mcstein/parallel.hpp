// Copyright 2026 The mcstein Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "mcstein/numeric.hpp"

namespace mcstein {

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> threads{1};
  return threads;
}
}  // namespace detail

/// Worker threads used by outcome reductions. Results never depend on it: the
/// work is split into fixed-size chunks and partials are merged in chunk order.
inline unsigned thread_count() { return detail::thread_setting().load(); }

inline void set_thread_count(unsigned n) {
  detail::thread_setting().store(n == 0 ? 1u : n);
}

inline constexpr std::size_t kChunkSize = std::size_t{1} << 12;

/// Runs `fn(chunk_index, begin, end)` over [0, count) split into kChunkSize
/// pieces. Chunks are independent; `fn` must only write chunk-local state.
template <class Fn>
void for_each_chunk(std::size_t count, Fn&& fn) {
  const std::size_t chunks = (count + kChunkSize - 1) / kChunkSize;
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(thread_count(), chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      fn(c, c * kChunkSize, std::min(count, (c + 1) * kChunkSize));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  // The lowest failing chunk wins so the reported error is thread-count independent.
  std::exception_ptr error;
  std::size_t error_chunk = chunks;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= chunks) return;
        try {
          fn(c, c * kChunkSize, std::min(count, (c + 1) * kChunkSize));
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (c < error_chunk) {
            error = std::current_exception();
            error_chunk = c;
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Compensated sum of `term(i)` for i in [0, count), bit-identical for any
/// thread count.
template <class Term>
double sum_over(std::size_t count, Term&& term) {
  const std::size_t chunks = (count + kChunkSize - 1) / kChunkSize;
  std::vector<CompensatedSum> partial(chunks);
  for_each_chunk(count, [&](std::size_t c, std::size_t begin, std::size_t end) {
    CompensatedSum s;
    for (std::size_t i = begin; i < end; ++i) s.add(term(i));
    partial[c] = s;
  });
  CompensatedSum total;
  for (const auto& s : partial) total.add(s);
  return total.value();
}

}  // namespace mcstein
