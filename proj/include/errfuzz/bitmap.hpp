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

#pragma once

// Coverage byte-map kernels. The dispatching entry points pick AVX2 or NEON
// when the CPU has it; the per-ISA variants stay callable for tests.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace errfuzz::bitmap {

// global[i] |= local[i]; returns how many i had global[i] == 0 and
// local[i] != 0 beforehand.
std::size_t merge_new(std::uint8_t* global, const std::uint8_t* local, std::size_t n);

std::size_t count_nonzero(const std::uint8_t* data, std::size_t n);

// "avx2", "neon" or "scalar".
std::string_view active_kernel();

namespace scalar {
std::size_t merge_new(std::uint8_t* global, const std::uint8_t* local, std::size_t n);
std::size_t count_nonzero(const std::uint8_t* data, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(__i386__)
namespace avx2 {
bool supported();
std::size_t merge_new(std::uint8_t* global, const std::uint8_t* local, std::size_t n);
std::size_t count_nonzero(const std::uint8_t* data, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
std::size_t merge_new(std::uint8_t* global, const std::uint8_t* local, std::size_t n);
std::size_t count_nonzero(const std::uint8_t* data, std::size_t n);
}  // namespace neon
#endif

}  // namespace errfuzz::bitmap
