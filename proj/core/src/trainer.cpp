// Copyright 2026 The Lipsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lipsynth/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstring>

#include "json.hpp"
#include "lipsynth/grid.hpp"
#include "lipsynth/metrics.hpp"

namespace lipsynth {

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void check_finite(double v, const char* what, int64_t step) {
  check(std::isfinite(v), ErrorCategory::kTrain,
        std::string("non-finite ") + what + " at step " + std::to_string(step) +
            "; aborting training");
}

uint64_t mix_seed(uint64_t seed, uint64_t epoch) {
  uint64_t h = seed + 0x9e3779b97f4a7c15ull * (epoch + 1);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ull;
  h ^= h >> 27;
  return h;
}

}  // namespace

void TrainConfig::validate() const {
  check(critic_updates_per_gen >= 1, ErrorCategory::kConfig,
        "critic_updates_per_gen must be >= 1");
  check(patience_epochs >= 1, ErrorCategory::kConfig, "patience_epochs must be >= 1");
  check(batch_size >= 1, ErrorCategory::kConfig, "batch_size must be >= 1");
  check(learning_rate > 0, ErrorCategory::kConfig, "learning_rate must be positive");
  check(max_epochs >= 1, ErrorCategory::kConfig, "max_epochs must be >= 1");
  weights.validate();
}

Trainer::Trainer(Generator& generator, Critic& critic, const SpeechEncoder& speech_encoder,
                 TrainConfig config)
    : generator_(generator),
      critic_(critic),
      phi_(speech_encoder),
      config_(std::move(config)),
      opt_generator_(config_.learning_rate, config_.adam_beta1, config_.adam_beta2),
      opt_critic_(config_.learning_rate, config_.adam_beta1, config_.adam_beta2),
      rng_(config_.seed) {
  config_.validate();
  check(generator_.config().sample_rate == critic_.config().sample_rate, ErrorCategory::kConfig,
        "generator and critic sample rates differ");
  check(phi_.config().sample_rate == generator_.config().sample_rate, ErrorCategory::kConfig,
        "speech encoder sample rate differs from generator");
}

PreparedBatch Trainer::prepare_batch(const std::vector<const VideoSample*>& samples) const {
  check(!samples.empty(), ErrorCategory::kTrain, "prepare_batch: empty batch");
  const GeneratorConfig& gc = generator_.config();
  const int64_t B = static_cast<int64_t>(samples.size());
  const Shape fs = samples[0]->frames.shape();
  const int64_t T = fs[0];
  const int64_t H = gc.samples_per_frame();
  for (const auto* s : samples) {
    check(s->frames.shape() == fs, ErrorCategory::kShape,
          "prepare_batch: all clips in a batch must share the frame shape");
    check(s->audio.sample_rate == gc.sample_rate, ErrorCategory::kConfig,
          "prepare_batch: clip " + s->clip_id + " sample rate mismatch");
  }

  PreparedBatch out;
  out.batch = B;
  out.frames = T;
  out.windows = Tensor({B * T, fs[1], gc.window_n, fs[2], fs[3]});
  const int64_t per_clip = T * fs[1] * gc.window_n * fs[2] * fs[3];
  for (int64_t b = 0; b < B; ++b) {
    const Tensor w = sliding_windows(samples[static_cast<size_t>(b)]->frames, gc.window_n);
    std::memcpy(out.windows.data() + b * per_clip, w.data(),
                static_cast<size_t>(per_clip) * sizeof(double));
  }

  // Trim or zero-pad audio to exactly T*H samples so batch rows align.
  out.real_waves = Tensor({B, T * H});
  for (int64_t b = 0; b < B; ++b) {
    const auto& a = samples[static_cast<size_t>(b)]->audio.samples;
    const int64_t n = std::min<int64_t>(static_cast<int64_t>(a.size()), T * H);
    for (int64_t i = 0; i < n; ++i) out.real_waves[b * T * H + i] = a[static_cast<size_t>(i)];
  }
  return out;
}

Tensor Trainer::sample_clip_rows(const Tensor& waves) {
  const int64_t B = waves.dim(0);
  const int64_t L = waves.dim(1);
  const int64_t clip = critic_.config().clip_samples();
  check(L >= clip, ErrorCategory::kShape,
        "waveform shorter than critic clip; pad before sampling");
  Tensor out({B, 1, clip});
  for (int64_t b = 0; b < B; ++b) {
    const int64_t start = rng_.uniform_int(0, L - clip);
    std::memcpy(out.data() + b * clip, waves.data() + b * L + start,
                static_cast<size_t>(clip) * sizeof(double));
  }
  return out;
}

namespace {

// Reflection-pads each row of (B, L) to at least min_len.
Tensor pad_rows_to(const Tensor& waves, int64_t min_len) {
  const int64_t B = waves.dim(0), L = waves.dim(1);
  if (L >= min_len) return waves;
  Graph g;
  Var padded = ops::reflect_pad_last(g.constant(waves), 0, min_len - L);
  return padded.value();
}

}  // namespace

LossBundle Trainer::critic_update_with(const Tensor& fake_waves, const PreparedBatch& batch) {
  const int64_t clip = critic_.config().clip_samples();
  const Tensor fake_padded = pad_rows_to(fake_waves, clip);
  const Tensor real_clips = sample_clip_rows(batch.real_waves);
  const Tensor fake_clips = sample_clip_rows(fake_padded);

  Graph g;
  Binding bind(g, /*trainable=*/true);
  Var s_real = critic_.score(bind, g.constant(real_clips));
  Var s_fake = critic_.score(bind, g.constant(fake_clips));
  auto [critic_obj, gen_obj] = adversarial_terms(s_real, s_fake);
  (void)gen_obj;
  Var gp = gradient_penalty(
      g, [this, &bind](Graph& gg, Var clips) { return critic_.score(bind, clips); }, real_clips,
      fake_clips, rng_);
  Var total = ops::add(critic_obj, ops::scale(gp, config_.weights.gp));

  const auto params = critic_.parameters();
  Binding* bp = &bind;
  std::vector<Var> param_vars = bp->vars_for(params);
  auto grad_vars = g.gradients(total, param_vars);
  std::vector<Tensor> grads;
  grads.reserve(grad_vars.size());
  for (const auto& v : grad_vars) grads.push_back(v.value());

  LossBundle stats = total_critic_loss(critic_obj.value()[0], gp.value()[0], config_.weights);
  check_finite(stats.total, "critic loss", critic_steps_);
  opt_critic_.step(params, grads);
  ++critic_steps_;
  return stats;
}

LossBundle Trainer::train_step_critic(const PreparedBatch& batch) {
  // Fake waveforms via a plain (constant-bound) generator evaluation.
  Graph g0;
  Binding no_grad(g0, /*trainable=*/false);
  Var fake = generator_.forward(no_grad, g0.constant(batch.windows), batch.batch, batch.frames,
                                /*training=*/true);
  return critic_update_with(fake.value(), batch);
}

LossBundle Trainer::train_step_generator(const PreparedBatch& batch) {
  const int64_t clip = critic_.config().clip_samples();
  Graph g;
  Binding gen_bind(g, /*trainable=*/true);
  Binding critic_bind(g, /*trainable=*/false);
  Binding phi_bind(g, /*trainable=*/false);

  Var fake = generator_.forward(gen_bind, g.constant(batch.windows), batch.batch, batch.frames,
                                /*training=*/true);
  Var real = g.constant(batch.real_waves);

  // Adversarial term on uniformly sampled clips of the generated waveform.
  const Shape ws = fake.shape();
  Var fake_padded = ws[1] >= clip ? fake : ops::reflect_pad_last(fake, 0, clip - ws[1]);
  const int64_t L = fake_padded.shape()[1];
  std::vector<Var> rows;
  rows.reserve(static_cast<size_t>(ws[0]));
  for (int64_t b = 0; b < ws[0]; ++b) {
    const int64_t start = rng_.uniform_int(0, L - clip);
    rows.push_back(ops::slice_last(ops::select0(fake_padded, b), start, clip));
  }
  Var fake_clips = ops::reshape(ops::stack0(rows), {ws[0], 1, clip});
  Var scores = critic_.score(critic_bind, fake_clips);
  Var adv = ops::neg(ops::reduce_mean_all(scores));

  Var l1 = l1_loss(real, fake);
  Var tv = tv_loss(fake);
  Var perceptual = perceptual_loss(phi_bind, phi_, real, fake);

  Var total = ops::add(
      ops::add(adv, ops::scale(l1, config_.weights.l1)),
      ops::add(ops::scale(tv, config_.weights.tv),
               ops::scale(perceptual, config_.weights.perceptual)));

  const auto params = generator_.parameters();
  std::vector<Var> param_vars = gen_bind.vars_for(params);
  auto grad_vars = g.gradients(total, param_vars);
  std::vector<Tensor> grads;
  grads.reserve(grad_vars.size());
  for (const auto& v : grad_vars) grads.push_back(v.value());

  LossBundle stats = total_generator_loss(adv.value()[0], l1.value()[0], tv.value()[0],
                                          perceptual.value()[0], config_.weights);
  check_finite(stats.total, "generator loss", generator_steps_);
  opt_generator_.step(params, grads);
  ++generator_steps_;
  return stats;
}

void Trainer::record(StepRecord r, const StepCallback& cb, double wall_ms) {
  if (config_.log_wall_time) r.wall_ms = wall_ms;
  if (cb) cb(r);
}

LossBundle Trainer::train_cycle(const PreparedBatch& batch, const StepCallback& on_record) {
  // One generator forward supplies the fake waveforms scored by all critic
  // updates of this cycle; the clip sampler S still draws fresh clips per
  // update.
  Graph g0;
  Binding no_grad(g0, /*trainable=*/false);
  Var fake = generator_.forward(no_grad, g0.constant(batch.windows), batch.batch, batch.frames,
                                /*training=*/true);
  const Tensor fake_waves = fake.value();

  for (int i = 0; i < config_.critic_updates_per_gen; ++i) {
    const double t0 = now_ms();
    LossBundle stats = critic_update_with(fake_waves, batch);
    record({critic_steps_ + generator_steps_, "critic", stats}, on_record, now_ms() - t0);
  }
  const double t0 = now_ms();
  LossBundle stats = train_step_generator(batch);
  record({critic_steps_ + generator_steps_, "generator", stats}, on_record, now_ms() - t0);
  return stats;
}

double Trainer::validation_mcd(const std::vector<VideoSample>& val_set) {
  check(!val_set.empty(), ErrorCategory::kTrain, "validation split is empty");
  double acc = 0.0;
  for (const auto& sample : val_set) {
    WaveformClip gen = generator_.generate(sample.frames);
    WaveformClip ref = sample.audio;
    const size_t n = std::min(ref.samples.size(), gen.samples.size());
    ref.samples.resize(n);
    gen.samples.resize(n);
    acc += mcd_db(ref, gen);
  }
  return acc / static_cast<double>(val_set.size());
}

Checkpoint Trainer::train(const std::vector<VideoSample>& train_set,
                          const std::vector<VideoSample>& val_set,
                          const StepCallback& on_record, const ValMetricFn& val_metric) {
  check(!train_set.empty(), ErrorCategory::kTrain, "training split is empty");
  check(!val_set.empty(), ErrorCategory::kTrain, "validation split is empty");

  const uint64_t phi_checksum = phi_.parameter_checksum();
  while (epoch_ < config_.max_epochs) {
    // Deterministic per-epoch order derived from (seed, epoch) only, so a
    // resumed run shuffles identically.
    std::vector<size_t> order(train_set.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng epoch_rng(mix_seed(config_.seed, static_cast<uint64_t>(epoch_)));
    epoch_rng.shuffle(order);

    bool step_cap_hit = false;
    size_t pos = 0;
    while (pos < order.size()) {
      // Batch together consecutive clips with identical shapes.
      std::vector<const VideoSample*> group;
      group.push_back(&train_set[order[pos]]);
      size_t next = pos + 1;
      while (next < order.size() &&
             static_cast<int>(group.size()) < config_.batch_size &&
             train_set[order[next]].frames.shape() == group[0]->frames.shape()) {
        group.push_back(&train_set[order[next]]);
        ++next;
      }
      pos = next;
      PreparedBatch batch = prepare_batch(group);
      train_cycle(batch, on_record);
      if (config_.max_generator_steps > 0 && generator_steps_ >= config_.max_generator_steps) {
        step_cap_hit = true;
        break;
      }
    }
    ++epoch_;

    const double val = val_metric ? val_metric(generator_, val_set) : validation_mcd(val_set);
    check_finite(val, "validation metric", generator_steps_);
    StepRecord er;
    er.step = critic_steps_ + generator_steps_;
    er.kind = "epoch";
    er.val_mcd = val;
    record(er, on_record, 0.0);

    if (val < best_val_ - config_.improvement_delta) {
      best_val_ = val;
      epochs_since_improvement_ = 0;
      best_state_ = snapshot();
      has_best_ = true;
    } else {
      ++epochs_since_improvement_;
    }
    if (epochs_since_improvement_ >= config_.patience_epochs) break;
    if (step_cap_hit) break;
  }

  check(phi_.parameter_checksum() == phi_checksum, ErrorCategory::kInternal,
        "speech encoder parameters changed during training");
  if (!has_best_) {
    best_state_ = snapshot();
    has_best_ = true;
  }
  return best_state_;
}

Checkpoint Trainer::snapshot(const std::string& config_json) const {
  Checkpoint ck;
  ck.config_json = config_json;
  auto add_group = [&ck](const std::string& prefix, const std::vector<Tensor*>& ts) {
    for (size_t i = 0; i < ts.size(); ++i)
      ck.blobs.emplace_back(prefix + std::to_string(i), *ts[i]);
  };
  add_group("gen/p", generator_.parameters());
  add_group("gen/buf", generator_.buffers());
  add_group("critic/p", critic_.parameters());
  {
    // Frozen, but stored so a swapped-in encoder travels with the run.
    auto& phi = const_cast<SpeechEncoder&>(phi_);
    add_group("phi/p", phi.parameters());
  }
  auto add_moments = [&ck](const std::string& prefix, const AdamOptimizer& opt) {
    auto& m = const_cast<AdamOptimizer&>(opt).moment1();
    auto& v = const_cast<AdamOptimizer&>(opt).moment2();
    for (size_t i = 0; i < m.size(); ++i) ck.blobs.emplace_back(prefix + "/m" + std::to_string(i), m[i]);
    for (size_t i = 0; i < v.size(); ++i) ck.blobs.emplace_back(prefix + "/v" + std::to_string(i), v[i]);
  };
  add_moments("adam_gen", opt_generator_);
  add_moments("adam_critic", opt_critic_);

  nlohmann::json aux;
  aux["epoch"] = epoch_;
  aux["critic_steps"] = critic_steps_;
  aux["generator_steps"] = generator_steps_;
  aux["best_val"] = best_val_;
  aux["epochs_since_improvement"] = epochs_since_improvement_;
  aux["rng"] = rng_.serialize();
  aux["adam_gen_t"] = opt_generator_.t();
  aux["adam_critic_t"] = opt_critic_.t();
  ck.aux_json = aux.dump();
  return ck;
}

void Trainer::restore(const Checkpoint& ck) {
  auto load_group = [&ck](const std::string& prefix, const std::vector<Tensor*>& ts) {
    for (size_t i = 0; i < ts.size(); ++i) {
      const Tensor& src = ck.blob(prefix + std::to_string(i));
      check(src.same_shape(*ts[i]), ErrorCategory::kCheckpoint,
            "checkpoint blob shape mismatch for " + prefix + std::to_string(i) +
                "; was the model built from the same config?");
      *ts[i] = src;
    }
  };
  load_group("gen/p", generator_.parameters());
  load_group("gen/buf", generator_.buffers());
  load_group("critic/p", critic_.parameters());
  {
    auto& phi = const_cast<SpeechEncoder&>(phi_);
    load_group("phi/p", phi.parameters());
  }

  nlohmann::json aux = nlohmann::json::parse(ck.aux_json);
  epoch_ = aux.at("epoch").get<int>();
  critic_steps_ = aux.at("critic_steps").get<int64_t>();
  generator_steps_ = aux.at("generator_steps").get<int64_t>();
  best_val_ = aux.at("best_val").get<double>();
  epochs_since_improvement_ = aux.at("epochs_since_improvement").get<int>();
  rng_.deserialize(aux.at("rng").get<std::string>());

  auto load_moments = [&ck](const std::string& prefix, AdamOptimizer& opt, size_t count,
                            const std::vector<Tensor*>& params, int64_t t) {
    std::vector<Tensor> m, v;
    for (size_t i = 0; i < count; ++i) {
      m.push_back(ck.blob(prefix + "/m" + std::to_string(i)));
      v.push_back(ck.blob(prefix + "/v" + std::to_string(i)));
      check(m.back().same_shape(*params[i]) && v.back().same_shape(*params[i]),
            ErrorCategory::kCheckpoint, "optimizer moment shape mismatch");
    }
    opt.restore(t, std::move(m), std::move(v));
  };
  const auto gen_params = generator_.parameters();
  const auto critic_params = critic_.parameters();
  if (ck.has_blob("adam_gen/m0")) {
    load_moments("adam_gen", opt_generator_, gen_params.size(), gen_params,
                 aux.at("adam_gen_t").get<int64_t>());
  }
  if (ck.has_blob("adam_critic/m0")) {
    load_moments("adam_critic", opt_critic_, critic_params.size(), critic_params,
                 aux.at("adam_critic_t").get<int64_t>());
  }
}

}  // namespace lipsynth
