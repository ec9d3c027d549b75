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

#include "inade/engine.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <torch/torch.h>

#include "inade/error.hpp"
#include "inade/noise_remapping.hpp"

namespace inade {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr std::uint64_t kNoiseStream = 0x6E6F697365ULL;
constexpr char kMagic[8] = {'I', 'N', 'A', 'D', 'E', 'C', 'K', 'P'};

std::vector<torch::Tensor> all_parameters(const std::vector<const torch::nn::Module*>& modules) {
  std::vector<torch::Tensor> out;
  for (auto* m : modules)
    for (auto& p : m->parameters()) out.push_back(p);
  return out;
}

void check_finite(const StepLosses& l) {
  const double values[] = {l.d_loss, l.g_gan, l.g_fm, l.g_perc, l.g_kl, l.g_total};
  for (double v : values)
    if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteLoss, "non-finite loss at step " + std::to_string(l.step) + ": " + l.to_json().dump());
}

void add_module_tensors(const torch::nn::Module& module, const std::string& prefix,
                        std::map<std::string, torch::Tensor>& out) {
  for (const auto& p : module.named_parameters()) out[prefix + "/" + p.key()] = p.value().detach();
  for (const auto& b : module.named_buffers()) out[prefix + "/" + b.key()] = b.value();
}

void add_adam_state(const torch::optim::Adam& opt, const std::string& prefix, std::map<std::string, torch::Tensor>& out) {
  std::size_t index = 0;
  for (const auto& group : opt.param_groups())
    for (const auto& p : group.params()) {
      auto it = opt.state().find(p.unsafeGetTensorImpl());
      if (it != opt.state().end()) {
        const auto& s = static_cast<const torch::optim::AdamParamState&>(*it->second);
        const auto key = prefix + "/" + std::to_string(index);
        out[key + "/step"] = torch::tensor({s.step()}, torch::kInt64);
        out[key + "/exp_avg"] = s.exp_avg();
        out[key + "/exp_avg_sq"] = s.exp_avg_sq();
      }
      ++index;
    }
}

void load_adam_state(torch::optim::Adam& opt, const std::string& prefix,
                     const std::map<std::string, torch::Tensor>& tensors) {
  std::size_t index = 0;
  opt.state().clear();
  for (auto& group : opt.param_groups())
    for (auto& p : group.params()) {
      const auto key = prefix + "/" + std::to_string(index++);
      auto it = tensors.find(key + "/step");
      if (it == tensors.end()) continue;
      auto s = std::make_unique<torch::optim::AdamParamState>();
      s->step(it->second.item<std::int64_t>());
      auto avg = tensors.find(key + "/exp_avg");
      auto avg_sq = tensors.find(key + "/exp_avg_sq");
      require(avg != tensors.end() && avg_sq != tensors.end(), ErrorCode::kSchemaMismatch,
              "incomplete optimizer state " + key);
      require(avg->second.sizes() == p.sizes() && avg_sq->second.sizes() == p.sizes(), ErrorCode::kSchemaMismatch,
              "optimizer state " + key + " has the wrong shape");
      s->exp_avg(avg->second.clone());
      s->exp_avg_sq(avg_sq->second.clone());
      opt.state()[p.unsafeGetTensorImpl()] = std::move(s);
    }
}

}  // namespace

LearningRates lr_at_epoch(const TrainConfig& cfg, int epoch) {
  require(epoch >= 1 && epoch <= cfg.epochs, ErrorCode::kEpochOutOfRange,
          "epoch " + std::to_string(epoch) + " outside 1.." + std::to_string(cfg.epochs));
  if (epoch <= cfg.decay_start) return {cfg.lr_g, cfg.lr_d};
  const double f = static_cast<double>(cfg.epochs - epoch) / static_cast<double>(cfg.epochs - cfg.decay_start);
  return {cfg.lr_g * f, cfg.lr_d * f};
}

json StepLosses::to_json() const {
  return {{"step", step},     {"epoch", epoch}, {"d_loss", d_loss}, {"g_gan", g_gan}, {"g_fm", g_fm},
          {"g_perc", g_perc}, {"g_kl", g_kl},   {"g_total", g_total}, {"lr_g", lr_g},   {"lr_d", lr_d}};
}

Trainer::Trainer(TrainConfig cfg, std::shared_ptr<const Dataset> data)
    : cfg_(std::move(cfg)),
      data_(std::move(data)),
      extractor_(cfg_.extractor_seed),
      noise_rng_(Rng(cfg_.seed).split(kNoiseStream)) {
  cfg_.validate();
  require(data_ && !data_->samples.empty(), ErrorCode::kConfigInvalid, "training needs a non-empty dataset");
  require(data_->height == cfg_.model.height && data_->width == cfg_.model.width &&
              data_->num_classes == cfg_.model.num_classes,
          ErrorCode::kConfigInvalid, "dataset layout differs from the model config");
  require(cfg_.loss.perc_start <= extractor_.depth(), ErrorCode::kConfigInvalid,
          "perc_start exceeds the feature extractor depth");
  models_ = build_default_models(cfg_.model);
  const auto betas = std::make_tuple(cfg_.adam_beta1, cfg_.adam_beta2);
  opt_g_ = std::make_unique<torch::optim::Adam>(
      all_parameters({models_.generator.get(), models_.encoder.get()}),
      torch::optim::AdamOptions(cfg_.lr_g).betas(betas));
  opt_d_ = std::make_unique<torch::optim::Adam>(models_.discriminator->parameters(),
                                                torch::optim::AdamOptions(cfg_.lr_d).betas(betas));
  current_lr_ = {cfg_.lr_g, cfg_.lr_d};
}

std::int64_t Trainer::batches_per_epoch() const noexcept {
  const auto n = static_cast<std::int64_t>(data_->samples.size());
  return std::max<std::int64_t>(1, n / cfg_.batch_size);
}

std::int64_t Trainer::total_steps() const noexcept {
  const auto all = batches_per_epoch() * cfg_.epochs;
  return cfg_.max_steps > 0 ? std::min(all, cfg_.max_steps) : all;
}

int Trainer::current_epoch() const noexcept {
  return static_cast<int>(std::min<std::int64_t>(global_step_ / batches_per_epoch() + 1, cfg_.epochs));
}

void Trainer::set_learning_rates(const LearningRates& lr) {
  for (auto& g : opt_g_->param_groups()) static_cast<torch::optim::AdamOptions&>(g.options()).lr(lr.g);
  for (auto& g : opt_d_->param_groups()) static_cast<torch::optim::AdamOptions&>(g.options()).lr(lr.d);
  current_lr_ = lr;
}

std::vector<std::size_t> Trainer::epoch_order(int epoch) const {
  Rng rng = Rng(cfg_.seed).split(static_cast<std::uint64_t>(epoch));
  auto perm = torch::randperm(static_cast<std::int64_t>(data_->samples.size()), rng.generator(),
                              torch::TensorOptions().dtype(torch::kInt64));
  std::vector<std::size_t> out;
  for (std::int64_t i = 0; i < perm.numel(); ++i) out.push_back(static_cast<std::size_t>(perm[i].item<std::int64_t>()));
  return out;
}

StepLosses Trainer::train_step(const Batch& batch) {
  auto& gen = models_.generator;
  auto& disc = models_.discriminator;
  auto& enc = models_.encoder;
  gen->train();
  disc->train();
  enc->train();
  const auto& real = batch.images;
  const auto& pairs = batch.pairs;
  const auto b = static_cast<std::int64_t>(pairs.size());

  auto banks = batch.sample_banks(cfg_.model.noise_channels, noise_rng_);
  auto z = noise_rng_.normal({b, cfg_.model.latent_dim});

  // The reference is the ground-truth image itself.
  const auto maps = enc->forward(real, stack_instance_maps(pairs));
  const auto sets = build_perturbation_sets(maps, pairs);
  std::vector<NoiseBank> remapped;
  torch::Tensor kl;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    remapped.push_back(remap_noise(banks[i], sets[i]));
    auto term = kl_loss(sets[i]);
    kl = kl.defined() ? kl + term : term;
  }
  kl = kl / static_cast<double>(b);
  Conditioning cond(pairs, std::move(remapped));
  auto fake = gen->forward(z, cond);

  const auto planes = discriminator_input(real, pairs).slice(1, 3);
  auto split = [b](const ScaleFeatures& both, bool first) {
    ScaleFeatures out;
    for (const auto& scale : both) {
      std::vector<torch::Tensor> feats;
      for (const auto& f : scale) feats.push_back(first ? f.slice(0, 0, b) : f.slice(0, b));
      out.push_back(std::move(feats));
    }
    return out;
  };
  const auto real_in = torch::cat({real, planes}, 1);

  StepLosses out;
  {
    auto both = disc->forward(torch::cat({torch::cat({fake.detach(), planes}, 1), real_in}, 0));
    auto d_loss = hinge_d_loss(logits_of(split(both, false)), logits_of(split(both, true)));
    out.d_loss = d_loss.item<double>();
    if (std::isfinite(out.d_loss)) {
      opt_d_->zero_grad();
      d_loss.backward();
      opt_d_->step();
    }
  }

  for (auto& p : disc->parameters()) p.set_requires_grad(false);
  GeneratorLossParts parts;
  {
    auto both = disc->forward(torch::cat({torch::cat({fake, planes}, 1), real_in}, 0));
    const auto fake_feats = split(both, true);
    const auto real_feats = split(both, false);
    parts.gan = hinge_g_loss(logits_of(fake_feats));
    parts.feature_matching = feature_matching_loss(real_feats, fake_feats, cfg_.loss.fm_start);
    parts.perceptual = perceptual_loss(extractor_, real, fake, cfg_.loss.perc_start);
    parts.kl = kl;
  }
  auto total = total_generator_objective(parts, cfg_.loss);
  out.g_gan = parts.gan.item<double>();
  out.g_fm = parts.feature_matching.item<double>();
  out.g_perc = parts.perceptual.item<double>();
  out.g_kl = parts.kl.item<double>();
  out.g_total = total.item<double>();
  out.step = global_step_ + 1;
  out.epoch = current_epoch();
  out.lr_g = current_lr_.g;
  out.lr_d = current_lr_.d;
  try {
    check_finite(out);
  } catch (...) {
    for (auto& p : disc->parameters()) p.set_requires_grad(true);
    throw;
  }
  opt_g_->zero_grad();
  total.backward();
  opt_g_->step();
  for (auto& p : disc->parameters()) p.set_requires_grad(true);
  ++global_step_;
  return out;
}

StepLosses Trainer::step() {
  require(!finished(), ErrorCode::kIndexOutOfRange, "training schedule already complete");
  const auto bpe = batches_per_epoch();
  const int epoch = static_cast<int>(global_step_ / bpe + 1);
  const auto pos = static_cast<std::size_t>(global_step_ % bpe);
  const auto order = epoch_order(epoch);
  const auto bs = static_cast<std::size_t>(cfg_.batch_size);
  const auto begin = std::min(order.size(), pos * bs);
  const auto end = std::min(order.size(), begin + bs);
  set_learning_rates(lr_at_epoch(cfg_, epoch));
  return train_step(collate(*data_, std::span<const std::size_t>(order.data() + begin, end - begin)));
}

std::vector<StepLosses> Trainer::run(std::int64_t steps, const std::function<void(const StepLosses&)>& on_step) {
  std::vector<StepLosses> out;
  for (std::int64_t i = 0; i < steps && !finished(); ++i) {
    out.push_back(step());
    if (on_step) on_step(out.back());
  }
  return out;
}

void Trainer::save(const fs::path& path) const {
  CheckpointContents c;
  c.metadata = {{"format", "inade-checkpoint"},
                {"step", global_step_},
                {"epoch", current_epoch()},
                {"lr_g", current_lr_.g},
                {"lr_d", current_lr_.d},
                {"config", to_json(cfg_)}};
  add_module_tensors(*models_.generator, "generator", c.tensors);
  add_module_tensors(*models_.discriminator, "discriminator", c.tensors);
  add_module_tensors(*models_.encoder, "encoder", c.tensors);
  add_adam_state(*opt_g_, "opt_g", c.tensors);
  add_adam_state(*opt_d_, "opt_d", c.tensors);
  c.tensors["rng/noise"] = noise_rng_.get_state();
  write_checkpoint(path, c);
}

void Trainer::load(const fs::path& path) {
  const auto c = read_checkpoint(path);
  try {
    TrainConfig stored;
    merge_json(c.metadata.at("config"), stored);
    require(to_json(stored.model) == to_json(cfg_.model), ErrorCode::kSchemaMismatch,
            "checkpoint model config differs from the trainer's");
    global_step_ = c.metadata.at("step").get<std::int64_t>();
    current_lr_ = {c.metadata.at("lr_g").get<double>(), c.metadata.at("lr_d").get<double>()};
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchemaMismatch, std::string("checkpoint metadata: ") + e.what());
  }
  load_module_tensors(*models_.generator, "generator", c.tensors);
  load_module_tensors(*models_.discriminator, "discriminator", c.tensors);
  load_module_tensors(*models_.encoder, "encoder", c.tensors);
  load_adam_state(*opt_g_, "opt_g", c.tensors);
  load_adam_state(*opt_d_, "opt_d", c.tensors);
  auto rng = c.tensors.find("rng/noise");
  require(rng != c.tensors.end(), ErrorCode::kSchemaMismatch, "checkpoint lacks the noise RNG state");
  noise_rng_.set_state(rng->second);
  set_learning_rates(current_lr_);
}

namespace {

enum DtypeCode : std::uint8_t { kF32 = 0, kF64 = 1, kI64 = 2, kU8 = 3, kI32 = 4, kBool = 5 };

std::uint8_t dtype_code(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat32: return kF32;
    case torch::kFloat64: return kF64;
    case torch::kInt64: return kI64;
    case torch::kUInt8: return kU8;
    case torch::kInt32: return kI32;
    case torch::kBool: return kBool;
    default: fail(ErrorCode::kSchemaMismatch, "unsupported tensor dtype in checkpoint");
  }
}

torch::ScalarType code_dtype(std::uint8_t c) {
  switch (c) {
    case kF32: return torch::kFloat32;
    case kF64: return torch::kFloat64;
    case kI64: return torch::kInt64;
    case kU8: return torch::kUInt8;
    case kI32: return torch::kInt32;
    case kBool: return torch::kBool;
    default: fail(ErrorCode::kCorruptFile, "unknown dtype code " + std::to_string(c));
  }
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

class Cursor {
 public:
  explicit Cursor(std::string bytes) : bytes_(std::move(bytes)) {}
  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof v), sizeof v);
    return v;
  }
  const char* take(std::size_t n) {
    require(n <= bytes_.size() - pos_, ErrorCode::kCorruptFile, "checkpoint is truncated");
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_checkpoint(const fs::path& path, const CheckpointContents& contents) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kFileNotFound, "cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  const auto meta = contents.metadata.dump();
  put<std::uint64_t>(out, meta.size());
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  put<std::uint64_t>(out, contents.tensors.size());
  for (const auto& [name, tensor] : contents.tensors) {
    const auto t = tensor.detach().cpu().contiguous();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint8_t>(out, dtype_code(t.scalar_type()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dim()));
    for (auto d : t.sizes()) put<std::int64_t>(out, d);
    const auto nbytes = static_cast<std::uint64_t>(t.numel()) * t.element_size();
    put<std::uint64_t>(out, nbytes);
    out.write(static_cast<const char*>(t.data_ptr()), static_cast<std::streamsize>(nbytes));
  }
  require(static_cast<bool>(out), ErrorCode::kFileNotFound, "failed writing " + path.string());
}

CheckpointContents read_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kFileNotFound, "cannot open checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Cursor cur(ss.str());
  require(std::memcmp(cur.take(sizeof kMagic), kMagic, sizeof kMagic) == 0, ErrorCode::kCorruptFile,
          path.string() + " is not a checkpoint");
  const auto version = cur.get<std::uint32_t>();
  require(version == kCheckpointVersion, ErrorCode::kSchemaMismatch,
          "checkpoint version " + std::to_string(version) + " is not supported");
  CheckpointContents c;
  const auto meta_len = cur.get<std::uint64_t>();
  try {
    c.metadata = json::parse(std::string(cur.take(meta_len), meta_len));
  } catch (const json::exception& e) {
    fail(ErrorCode::kCorruptFile, std::string("checkpoint metadata: ") + e.what());
  }
  require(c.metadata.value("format", "") == "inade-checkpoint", ErrorCode::kSchemaMismatch,
          "unexpected checkpoint format tag");
  const auto count = cur.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = cur.get<std::uint32_t>();
    std::string name(cur.take(name_len), name_len);
    const auto dtype = code_dtype(cur.get<std::uint8_t>());
    const auto ndim = cur.get<std::uint32_t>();
    require(ndim <= 16, ErrorCode::kCorruptFile, "implausible tensor rank in checkpoint");
    std::vector<std::int64_t> dims;
    std::int64_t numel = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      dims.push_back(cur.get<std::int64_t>());
      require(dims.back() >= 0, ErrorCode::kCorruptFile, "negative tensor dimension in checkpoint");
      numel *= dims.back();
    }
    const auto nbytes = cur.get<std::uint64_t>();
    auto t = torch::empty(dims, torch::TensorOptions().dtype(dtype));
    require(nbytes == static_cast<std::uint64_t>(numel) * t.element_size(), ErrorCode::kCorruptFile,
            "tensor " + name + " byte count disagrees with its shape");
    std::memcpy(t.data_ptr(), cur.take(nbytes), nbytes);
    c.tensors.emplace(std::move(name), std::move(t));
  }
  require(cur.done(), ErrorCode::kCorruptFile, "trailing bytes after the last tensor");
  return c;
}

void load_module_tensors(torch::nn::Module& module, const std::string& prefix,
                         const std::map<std::string, torch::Tensor>& tensors) {
  torch::NoGradGuard no_grad;
  auto copy = [&](const std::string& key, torch::Tensor& dst) {
    auto it = tensors.find(prefix + "/" + key);
    require(it != tensors.end(), ErrorCode::kSchemaMismatch, "checkpoint lacks " + prefix + "/" + key);
    require(it->second.sizes() == dst.sizes() && it->second.scalar_type() == dst.scalar_type(),
            ErrorCode::kSchemaMismatch, "checkpoint tensor " + prefix + "/" + key + " has the wrong shape");
    dst.copy_(it->second);
  };
  for (auto& p : module.named_parameters()) copy(p.key(), p.value());
  for (auto& b : module.named_buffers()) copy(b.key(), b.value());
}

LoadedModels load_models(const fs::path& path) {
  const auto c = read_checkpoint(path);
  LoadedModels out;
  try {
    merge_json(c.metadata.at("config"), out.config);
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchemaMismatch, std::string("checkpoint metadata: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::kSchemaMismatch, std::string("checkpoint config: ") + e.what());
  }
  out.models = build_default_models(out.config.model);
  load_module_tensors(*out.models.generator, "generator", c.tensors);
  load_module_tensors(*out.models.discriminator, "discriminator", c.tensors);
  load_module_tensors(*out.models.encoder, "encoder", c.tensors);
  out.models.generator->eval();
  out.models.discriminator->eval();
  out.models.encoder->eval();
  return out;
}

PriorNoise prior_noise(const ModelConfig& cfg, const LabelPair& pair, std::uint64_t seed) {
  Rng rng(seed);
  auto bank = sample_noise_bank(pair.num_instances(), cfg.noise_channels, rng);
  auto z = rng.normal({1, cfg.latent_dim});
  return {std::move(bank), std::move(z)};
}

torch::Tensor generate_image(Generator& gen, const LabelPair& pair, const NoiseBank& bank, const torch::Tensor& z) {
  EvalModeGuard guard(*gen);
  torch::NoGradGuard no_grad;
  Conditioning cond({pair}, {bank});
  return gen->forward(z, cond)[0];
}

torch::Tensor sample_prior(Generator& gen, const LabelPair& pair, std::uint64_t seed) {
  const auto noise = prior_noise(gen->config(), pair, seed);
  return generate_image(gen, pair, noise.bank, noise.z);
}

PerturbationSet encode_perturbations(RemappingEncoder& enc, const LabelPair& pair, const Sample& reference) {
  require(reference.pair == pair, ErrorCode::kPairMismatch, "reference label pair differs from the target");
  EvalModeGuard guard(*enc);
  torch::NoGradGuard no_grad;
  const auto maps = enc->forward(reference.image.unsqueeze(0), pair.inst().grid().to_tensor().unsqueeze(0));
  return build_perturbation_set(maps, 0, pair.inst());
}

NoiseBank mixed_bank(const NoiseBank& prior, const PerturbationSet& ps, std::span<const std::int32_t> guided) {
  const auto remapped = remap_noise(prior, ps);
  NoiseBank out = prior;
  out.gamma = prior.gamma.clone();
  out.beta = prior.beta.clone();
  torch::NoGradGuard no_grad;
  for (auto l : guided) {
    require(l >= 1 && l <= prior.num_instances(), ErrorCode::kLabelOutOfRange,
            "guided instance " + std::to_string(l) + " does not exist");
    out.gamma[l - 1].copy_(remapped.gamma[l - 1]);
    out.beta[l - 1].copy_(remapped.beta[l - 1]);
  }
  out.remapped = !guided.empty();
  return out;
}

torch::Tensor sample_reference(Generator& gen, RemappingEncoder& enc, const LabelPair& pair, const Sample& reference,
                               std::uint64_t seed) {
  const auto ps = encode_perturbations(enc, pair, reference);
  const auto noise = prior_noise(gen->config(), pair, seed);
  return generate_image(gen, pair, remap_noise(noise.bank, ps), noise.z);
}

torch::Tensor sample_mixed_with(Generator& gen, const LabelPair& pair, const PerturbationSet& ps,
                                std::span<const std::int32_t> guided, std::uint64_t seed) {
  const auto noise = prior_noise(gen->config(), pair, seed);
  return generate_image(gen, pair, mixed_bank(noise.bank, ps, guided), noise.z);
}

torch::Tensor sample_mixed(Generator& gen, RemappingEncoder& enc, const LabelPair& pair, const Sample& reference,
                           std::span<const std::int32_t> guided, std::uint64_t seed) {
  return sample_mixed_with(gen, pair, encode_perturbations(enc, pair, reference), guided, seed);
}

PriorNoise resampled_noise(const ModelConfig& cfg, const LabelPair& pair, std::uint64_t base_seed,
                           std::int32_t instance, std::uint64_t new_row_seed) {
  auto noise = prior_noise(cfg, pair, base_seed);
  Rng rng(new_row_seed);
  const std::int32_t rows[] = {instance};
  redraw_rows(noise.bank, rows, rng);
  return noise;
}

torch::Tensor resample_instance(Generator& gen, const LabelPair& pair, std::uint64_t base_seed, std::int32_t instance,
                                std::uint64_t new_row_seed) {
  const auto noise = resampled_noise(gen->config(), pair, base_seed, instance, new_row_seed);
  return generate_image(gen, pair, noise.bank, noise.z);
}

}  // namespace inade
