// Copyright 2026 The errfuzz Authors.
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

#include "errfuzz/bitmap.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif
#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace errfuzz::bitmap {

namespace scalar {

std::size_t merge_new(std::uint8_t* global, const std::uint8_t* local, std::size_t n) {
  std::size_t fresh = 0;
  for (std::size_t i = 0; i < n; ++i) {
    fresh += (global[i] == 0 && local[i] != 0) ? 1 : 0;
    global[i] |= local[i];
  }
  return fresh;
}

std::size_t count_nonzero(const std::uint8_t* data, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += data[i] != 0 ? 1 : 0;
  return count;
}

}  // namespace scalar

#if defined(__x86_64__) || defined(__i386__)
namespace avx2 {

bool supported() { return __builtin_cpu_supports("avx2"); }

__attribute__((target("avx2"))) std::size_t merge_new(std::uint8_t* global,
                                                      const std::uint8_t* local, std::size_t n) {
  std::size_t fresh = 0;
  std::size_t i = 0;
  const __m256i zero = _mm256_setzero_si256();
  for (; i + 32 <= n; i += 32) {
    const __m256i g = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(global + i));
    const __m256i l = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(local + i));
    if (_mm256_testz_si256(l, l)) continue;
    const auto g_zero = static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(g, zero)));
    const auto l_zero = static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(l, zero)));
    fresh += static_cast<std::size_t>(__builtin_popcount(g_zero & ~l_zero));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(global + i), _mm256_or_si256(g, l));
  }
  return fresh + scalar::merge_new(global + i, local + i, n - i);
}

__attribute__((target("avx2"))) std::size_t count_nonzero(const std::uint8_t* data,
                                                          std::size_t n) {
  std::size_t count = 0;
  std::size_t i = 0;
  const __m256i zero = _mm256_setzero_si256();
  for (; i + 32 <= n; i += 32) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i));
    const auto z = static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(v, zero)));
    count += 32 - static_cast<std::size_t>(__builtin_popcount(z));
  }
  return count + scalar::count_nonzero(data + i, n - i);
}

}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {

std::size_t merge_new(std::uint8_t* global, const std::uint8_t* local, std::size_t n) {
  std::size_t fresh = 0;
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const uint8x16_t g = vld1q_u8(global + i);
    const uint8x16_t l = vld1q_u8(local + i);
    // Lanes are 0xFF where global is zero and local is not; shift to 1s.
    const uint8x16_t hit = vandq_u8(vceqzq_u8(g), vmvnq_u8(vceqzq_u8(l)));
    fresh += vaddvq_u8(vshrq_n_u8(hit, 7));
    vst1q_u8(global + i, vorrq_u8(g, l));
  }
  return fresh + scalar::merge_new(global + i, local + i, n - i);
}

std::size_t count_nonzero(const std::uint8_t* data, std::size_t n) {
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const uint8x16_t nz = vmvnq_u8(vceqzq_u8(vld1q_u8(data + i)));
    count += vaddvq_u8(vshrq_n_u8(nz, 7));
  }
  return count + scalar::count_nonzero(data + i, n - i);
}

}  // namespace neon
#endif

namespace {

struct Kernels {
  std::size_t (*merge)(std::uint8_t*, const std::uint8_t*, std::size_t);
  std::size_t (*count)(const std::uint8_t*, std::size_t);
  std::string_view name;
};

Kernels pick() {
#if defined(__x86_64__) || defined(__i386__)
  if (avx2::supported()) return {avx2::merge_new, avx2::count_nonzero, "avx2"};
#endif
#if defined(__aarch64__)
  return {neon::merge_new, neon::count_nonzero, "neon"};
#else
  return {scalar::merge_new, scalar::count_nonzero, "scalar"};
#endif
}

const Kernels& kernels() {
  static const Kernels k = pick();
  return k;
}

}  // namespace

std::size_t merge_new(std::uint8_t* global, const std::uint8_t* local, std::size_t n) {
  return kernels().merge(global, local, n);
}

std::size_t count_nonzero(const std::uint8_t* data, std::size_t n) {
  return kernels().count(data, n);
}

std::string_view active_kernel() { return kernels().name; }

}  // namespace errfuzz::bitmap
