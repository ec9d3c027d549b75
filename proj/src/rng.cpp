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

#include "inade/rng.hpp"

#include <ATen/CPUGeneratorImpl.h>
#include <torch/torch.h>

namespace inade {

std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), gen_(at::make_generator<at::CPUGeneratorImpl>(mix_seed(seed))) {}

Rng::Rng(const Rng& other) : seed_(other.seed_), gen_(other.gen_.clone()) {}

Rng& Rng::operator=(const Rng& other) {
  if (this != &other) {
    seed_ = other.seed_;
    gen_ = other.gen_.clone();
  }
  return *this;
}

Rng Rng::split(std::uint64_t stream) const { return Rng(mix_seed(seed_ ^ mix_seed(stream + 0x51ED27ull))); }

std::uint64_t Rng::next_u64() {
  std::lock_guard<std::mutex> lock(gen_.mutex());
  return gen_.get<at::CPUGeneratorImpl>()->random64();
}

torch::Tensor Rng::normal(at::IntArrayRef sizes, torch::Dtype dtype) {
  return torch::randn(sizes, gen_, torch::TensorOptions().dtype(dtype));
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<std::int64_t>(next_u64() % span);
}

torch::Tensor Rng::get_state() const { return gen_.get_state(); }

void Rng::set_state(const torch::Tensor& state) { gen_.set_state(state); }

}  // namespace inade
