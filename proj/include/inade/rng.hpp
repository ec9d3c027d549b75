// Copyright 2026 The INADE Authors. All Rights Reserved.
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

#include <ATen/core/Generator.h>
#include <torch/types.h>

namespace inade {

/// splitmix64 finaliser; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Seeded random stream backed by a torch CPU generator.
///
/// Child streams are derived with split(), which depends only on the
/// construction seed and the stream index, never on how much of the parent
/// has been consumed. That keeps per-image / per-group streams stable when the
/// evaluation order changes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  // Copies clone the generator state; at::Generator alone is a shared handle.
  Rng(const Rng& other);
  Rng& operator=(const Rng& other);
  Rng(Rng&&) noexcept = default;
  Rng& operator=(Rng&&) noexcept = default;

  std::uint64_t seed() const noexcept { return seed_; }
  at::Generator& generator() noexcept { return gen_; }

  Rng split(std::uint64_t stream) const;

  /// Fresh 64-bit value drawn from the stream (advances it).
  std::uint64_t next_u64();

  torch::Tensor normal(at::IntArrayRef sizes, torch::Dtype dtype = torch::kFloat32);

  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  torch::Tensor get_state() const;
  void set_state(const torch::Tensor& state);

 private:
  std::uint64_t seed_;
  at::Generator gen_;
};

}  // namespace inade
