// Copyright 2026 The burmese-aec Authors
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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "aec/common.h"
#include "aec/errorsim.h"
#include "aec/seq2seq.h"

namespace aec::s2s {

namespace {

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

OptimizerConfig OptimizerConfig::FromKeyValues(const config::KeyValues& kv) {
  OptimizerConfig o;
  o.learning_rate = kv.GetDouble("train.learning_rate", o.learning_rate);
  o.warmup_steps = static_cast<int>(kv.GetInt("train.warmup_steps", o.warmup_steps));
  o.beta1 = kv.GetDouble("train.beta1", o.beta1);
  o.beta2 = kv.GetDouble("train.beta2", o.beta2);
  o.epsilon = kv.GetDouble("train.epsilon", o.epsilon);
  o.accumulation = static_cast<int>(kv.GetInt("train.accumulation", o.accumulation));
  o.batch_tokens = static_cast<int>(kv.GetInt("train.batch_tokens", o.batch_tokens));
  o.max_steps = static_cast<int>(kv.GetInt("train.max_steps", o.max_steps));
  o.valid_every = static_cast<int>(kv.GetInt("train.valid_every", o.valid_every));
  o.patience = static_cast<int>(kv.GetInt("train.patience", o.patience));
  o.seed = static_cast<uint64_t>(kv.GetInt("train.seed", static_cast<long>(o.seed)));
  o.stop_below_ce = kv.GetDouble("train.stop_below_ce", o.stop_below_ce);
  if (o.learning_rate <= 0 || o.warmup_steps < 1 || o.accumulation < 1 ||
      o.batch_tokens < 1 || o.max_steps < 0 || o.valid_every < 1 ||
      o.patience < 1 || o.beta1 < 0 || o.beta1 >= 1 || o.beta2 < 0 ||
      o.beta2 >= 1 || o.epsilon <= 0) {
    throw Error(ErrorKind::kFormat, "optimizer config out of range");
  }
  return o;
}

void OptimizerConfig::ToKeyValues(config::KeyValues* kv) const {
  kv->Set("train.learning_rate", Num(learning_rate));
  kv->Set("train.warmup_steps", std::to_string(warmup_steps));
  kv->Set("train.beta1", Num(beta1));
  kv->Set("train.beta2", Num(beta2));
  kv->Set("train.epsilon", Num(epsilon));
  kv->Set("train.accumulation", std::to_string(accumulation));
  kv->Set("train.batch_tokens", std::to_string(batch_tokens));
  kv->Set("train.max_steps", std::to_string(max_steps));
  kv->Set("train.valid_every", std::to_string(valid_every));
  kv->Set("train.patience", std::to_string(patience));
  kv->Set("train.seed", std::to_string(seed));
  kv->Set("train.stop_below_ce", Num(stop_below_ce));
}

double NoamRate(double base, int hidden, int warmup, long step) {
  const double s = static_cast<double>(std::max(1L, step));
  return base * std::pow(static_cast<double>(hidden), -0.5) *
         std::min(std::pow(s, -0.5), s * std::pow(static_cast<double>(warmup), -1.5));
}

std::vector<std::vector<size_t>> MakeBatches(
    const std::vector<TrainingExample>& data, const std::vector<size_t>& order,
    int batch_tokens) {
  std::vector<std::vector<size_t>> batches;
  std::vector<size_t> current;
  long tokens = 0;
  for (size_t idx : order) {
    const long cost =
        static_cast<long>(data[idx].source.size() + data[idx].target.size()) + 1;
    if (!current.empty() && tokens + cost > batch_tokens) {
      batches.push_back(std::move(current));
      current.clear();
      tokens = 0;
    }
    current.push_back(idx);
    tokens += cost;
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

namespace {

std::vector<TrainingExample> Select(const std::vector<TrainingExample>& data,
                                    const std::vector<size_t>& idx) {
  std::vector<TrainingExample> out;
  out.reserve(idx.size());
  for (size_t i : idx) out.push_back(data[i]);
  return out;
}

double CorpusCrossEntropy(const Seq2SeqModel& model,
                          const std::vector<TrainingExample>& data,
                          int batch_tokens) {
  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  double sum = 0.0;
  long tokens = 0;
  for (const auto& b : MakeBatches(data, order, batch_tokens)) {
    const LossBreakdown l = ValidationLoss(model, Select(data, b));
    sum += l.cross_entropy * static_cast<double>(l.tokens);
    tokens += l.tokens;
  }
  return sum / static_cast<double>(tokens);
}

// Feeds batches from a reshuffled pass over the data, one epoch at a time.
class BatchStream {
 public:
  BatchStream(const std::vector<TrainingExample>& data, int batch_tokens,
              uint64_t seed)
      : data_(data), batch_tokens_(batch_tokens), seed_(seed) {}

  std::vector<TrainingExample> Next() {
    if (cursor_ >= batches_.size()) Refill();
    return Select(data_, batches_[cursor_++]);
  }

 private:
  void Refill() {
    noise::Rng rng(seed_, 0x5107 + epoch_++);
    std::vector<size_t> order(data_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.Below(i)]);
    }
    batches_ = MakeBatches(data_, order, batch_tokens_);
    cursor_ = 0;
  }

  const std::vector<TrainingExample>& data_;
  int batch_tokens_;
  uint64_t seed_;
  uint64_t epoch_ = 0;
  std::vector<std::vector<size_t>> batches_;
  size_t cursor_ = 0;
};

void AdamStep(Seq2SeqModel& model, const OptimizerConfig& o, double lr) {
  const long t = model.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(t));
  for (Parameter* p : model.Parameters()) {
    p->adam_m = o.beta1 * p->adam_m + (1.0 - o.beta1) * p->grad;
    p->adam_v = o.beta2 * p->adam_v + (1.0 - o.beta2) * p->grad.cwiseAbs2();
    p->value.array() -= lr * (p->adam_m.array() / c1) /
                        ((p->adam_v.array() / c2).sqrt() + o.epsilon);
  }
}

}  // namespace

TrainReport Train(Seq2SeqModel& model, const std::vector<TrainingExample>& train,
                  const std::vector<TrainingExample>& valid,
                  const OptimizerConfig& options) {
  if (train.empty()) {
    throw Error(ErrorKind::kEmptyCorpus, "no training examples");
  }
  for (const TrainingExample& ex : train) ex.Validate(model);
  for (const TrainingExample& ex : valid) ex.Validate(model);

  TrainReport report;
  BatchStream stream(train, options.batch_tokens, options.seed);
  noise::Rng dropout_rng(options.seed, 0xd209);
  std::vector<Matrix> best;
  double best_ce = std::numeric_limits<double>::infinity();
  int bad_checks = 0;

  auto validate = [&]() {
    const double ce = CorpusCrossEntropy(model, valid, options.batch_tokens);
    report.valid_ce.push_back(ce);
    if (ce < best_ce) {
      best_ce = ce;
      report.best_step = model.step;
      best.clear();
      for (const Parameter* p : model.Parameters()) best.push_back(p->value);
      bad_checks = 0;
    } else {
      ++bad_checks;
    }
  };

  model.ZeroGrad();
  for (int s = 0; s < options.max_steps; ++s) {
    double loss = 0.0;
    double ce = 0.0;
    for (int a = 0; a < options.accumulation; ++a) {
      const LossBreakdown l =
          TrainingLoss(model, stream.Next(), Mode::kTrain, &dropout_rng, true,
                       1.0 / options.accumulation);
      loss += l.total / options.accumulation;
      ce += l.cross_entropy / options.accumulation;
    }
    ++model.step;
    AdamStep(model, options,
             NoamRate(options.learning_rate, model.config().hidden,
                      options.warmup_steps, model.step));
    model.ZeroGrad();
    report.train_loss.push_back(loss);
    report.train_ce.push_back(ce);
    ++report.steps;
    if (ce < options.stop_below_ce) break;
    if (!valid.empty() && model.step % options.valid_every == 0) {
      validate();
      if (bad_checks >= options.patience) {
        report.early_stopped = true;
        break;
      }
    }
  }
  if (!valid.empty()) {
    if (report.valid_ce.empty() ||
        report.steps % options.valid_every != 0) {
      validate();
    }
    const long last = model.step;
    auto params = model.Parameters();
    for (size_t i = 0; i < params.size(); ++i) params[i]->value = best[i];
    model.step = last;
    report.best_valid_ce = best_ce;
  }
  return report;
}

}  // namespace aec::s2s
