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

#ifndef AEC_SEQ2SEQ_H_
#define AEC_SEQ2SEQ_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "aec/aligner.h"
#include "aec/autograd.h"
#include "aec/config.h"

namespace aec::noise {
class Rng;
}

namespace aec::s2s {

using nn::Matrix;
using nn::Parameter;

struct ModelConfig {
  int layers = 2;
  int hidden = 64;
  int ff = 256;
  int heads = 4;
  int word_emb_dim = 64;
  int ipa_emb_dim = 16;
  double dropout = 0.1;
  double attn_dropout = 0.1;
  double label_smoothing = 0.1;
  int max_len = 200;
  int guided_layer = 0;  // decoder layer whose cross-attention is supervised
  double guidance_weight = 0.3;
  // When false the encoder sees the unk id at every IPA position.
  bool use_ipa = true;

  // Throws ErrorKind::kFormat on a violated invariant.
  void Validate() const;

  // Keys are the field names prefixed with "model.". A missing
  // model.guided_layer selects the penultimate decoder layer.
  static ModelConfig FromKeyValues(const config::KeyValues& kv);
  void ToKeyValues(config::KeyValues* kv) const;
};

// Token <-> id map with four reserved ids.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;

  Vocab();

  int Add(const std::string& token);
  int Id(const std::string& token) const;  // kUnk when absent
  bool Contains(const std::string& token) const;
  const std::string& Token(int id) const { return tokens_.at(id); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<int> Encode(const std::vector<std::string>& tokens) const;
  // From sorted, de-duplicated tokens, so ids do not depend on data order.
  static Vocab FromTokens(const std::vector<std::string>& tokens);
  // Stops at the first eos; pad and bos are skipped.
  std::vector<std::string> DecodeIds(const std::vector<int>& ids) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct FusionMlp {
  Parameter w1;  // (word_emb_dim + ipa_emb_dim) x hidden
  Parameter b1;  // 1 x hidden
  Parameter w2;  // hidden x hidden
  Parameter b2;  // 1 x hidden
};

struct AttentionParams {
  Parameter wq, bq, wk, bk, wv, bv, wo, bo;
};

struct NormParams {
  Parameter gain, bias;
};

struct FeedForwardParams {
  Parameter w1, b1, w2, b2;
};

struct EncoderLayer {
  NormParams norm1;
  AttentionParams self_attn;
  NormParams norm2;
  FeedForwardParams ffn;
};

struct DecoderLayer {
  NormParams norm1;
  AttentionParams self_attn;
  NormParams norm2;
  AttentionParams cross_attn;
  NormParams norm3;
  FeedForwardParams ffn;
};

class Seq2SeqModel {
 public:
  Seq2SeqModel() = default;
  // Builds and randomly initializes every parameter.
  Seq2SeqModel(const ModelConfig& config, Vocab source, Vocab target,
               Vocab ipa, uint64_t seed);

  const ModelConfig& config() const { return config_; }
  // Only the guidance and regularization knobs may change after
  // construction; shapes are fixed.
  ModelConfig& mutable_config() { return config_; }

  const Vocab& source_vocab() const { return source_vocab_; }
  const Vocab& target_vocab() const { return target_vocab_; }
  const Vocab& ipa_vocab() const { return ipa_vocab_; }

  // Every parameter in declaration order.
  std::vector<Parameter*> Parameters();
  std::vector<const Parameter*> Parameters() const;

  void ZeroGrad();
  bool AllFinite() const;

  // Versioned text checkpoint: config, vocabularies, step, parameters.
  void Save(const std::string& path) const;
  static Seq2SeqModel Load(const std::string& path);

  long step = 0;

  Parameter word_embedding;  // |source| x word_emb_dim
  Parameter ipa_embedding;   // |ipa| x ipa_emb_dim
  FusionMlp fusion;
  Parameter target_embedding;  // |target| x hidden
  std::vector<EncoderLayer> encoder;
  NormParams encoder_norm;
  std::vector<DecoderLayer> decoder;
  NormParams decoder_norm;
  Parameter output_w;  // hidden x |target|
  Parameter output_b;

 private:
  void Allocate();

  ModelConfig config_;
  Vocab source_vocab_;
  Vocab target_vocab_;
  Vocab ipa_vocab_;
};

struct TrainingExample {
  std::vector<int> source;
  std::vector<int> source_ipa;
  std::vector<int> target;
  align::AlignmentLinkSet alignment;  // (source, target) positions

  // Throws ErrorKind::kLengthMismatch / kDimMismatch.
  void Validate(const Seq2SeqModel& model) const;
};

// IPA ids for a source sentence: the encoded labels, or all unk when the
// model does not use IPA features. labels may be empty in the latter case.
std::vector<int> IpaIds(const Seq2SeqModel& model,
                        const std::vector<std::string>& labels,
                        size_t source_length);

// Head-averaged cross-attention of the guided decoder layer; one row per
// decoder input position (target length + 1), one column per source token.
struct AttentionRecord {
  Matrix weights;
};

enum class Mode { kTrain, kEval };

struct ForwardResult {
  std::vector<Matrix> logits;  // per example, (|target| + 1) x |target vocab|
  std::vector<AttentionRecord> attention;
};

// Fuses word and IPA embedding rows (one row per position). With
// ipa_emb_dim == 0 the ipa argument must have zero columns.
Matrix FuseEmbeddings(const Matrix& word, const Matrix& ipa,
                      const FusionMlp& mlp);

// Sequences in the batch are padded to a common length; padding is masked
// out. Train mode needs an rng for dropout; eval mode ignores it.
ForwardResult Forward(const Seq2SeqModel& model,
                      const std::vector<TrainingExample>& batch, Mode mode,
                      noise::Rng* rng = nullptr);

// Uniform reference over the linked source positions of each target row,
// rows without links zero. rows may exceed the alignment's target length.
Matrix AlignmentReference(const align::AlignmentLinkSet& alignment, int rows,
                          int cols);

// Mean over supervised rows of the cross-entropy between the reference and
// the attention row. attn has n or n + 1 rows and m columns.
double GuidedAttentionLoss(const AttentionRecord& attn,
                           const align::AlignmentLinkSet& alignment);

struct LossBreakdown {
  double total = 0.0;
  double cross_entropy = 0.0;  // per target token
  double guidance = 0.0;       // per supervised row
  long tokens = 0;
  long supervised_rows = 0;
};

// Label-smoothed token cross-entropy plus guidance_weight times the guided
// attention loss. When accumulate is set, d(total)/d(param) * grad_scale is
// added into every Parameter::grad.
LossBreakdown TrainingLoss(Seq2SeqModel& model,
                           const std::vector<TrainingExample>& batch,
                           Mode mode, noise::Rng* rng, bool accumulate,
                           double grad_scale = 1.0);

// Token cross-entropy only (no smoothing, no guidance), eval mode.
LossBreakdown ValidationLoss(const Seq2SeqModel& model,
                             const std::vector<TrainingExample>& batch);

struct DecodeOptions {
  enum class Strategy { kGreedy, kBeam };
  Strategy strategy = Strategy::kGreedy;
  int beam = 4;
  int max_len = 0;  // 0 means config().max_len
};

// Output ids exclude eos. Throws ErrorKind::kSequenceTooLong.
std::vector<int> Decode(const Seq2SeqModel& model,
                        const std::vector<int>& source,
                        const std::vector<int>& source_ipa,
                        const DecodeOptions& options = {});

// --- Training -------------------------------------------------------------

struct OptimizerConfig {
  double learning_rate = 1.0;  // Noam base multiplier
  int warmup_steps = 400;
  double beta1 = 0.9;
  double beta2 = 0.998;
  double epsilon = 1e-9;
  int accumulation = 1;
  int batch_tokens = 512;
  int max_steps = 4000;
  int valid_every = 200;
  int patience = 4;
  uint64_t seed = 1;
  // Stop once an optimizer step's training cross-entropy falls below this;
  // 0 disables.
  double stop_below_ce = 0.0;

  static OptimizerConfig FromKeyValues(const config::KeyValues& kv);
  void ToKeyValues(config::KeyValues* kv) const;
};

double NoamRate(double base, int hidden, int warmup, long step);

// Groups example indices into batches of at most batch_tokens tokens
// (source + target + 1 each); an over-long example forms its own batch.
std::vector<std::vector<size_t>> MakeBatches(
    const std::vector<TrainingExample>& data, const std::vector<size_t>& order,
    int batch_tokens);

struct TrainReport {
  std::vector<double> train_loss;  // per optimizer step
  std::vector<double> train_ce;    // per optimizer step
  std::vector<double> valid_ce;    // per validation check
  long best_step = 0;
  double best_valid_ce = 0.0;
  long steps = 0;
  bool early_stopped = false;
};

// Adam with the Noam schedule. When valid is non-empty the parameters with
// the lowest validation cross-entropy are restored at the end.
TrainReport Train(Seq2SeqModel& model, const std::vector<TrainingExample>& train,
                  const std::vector<TrainingExample>& valid,
                  const OptimizerConfig& options);

}  // namespace aec::s2s

#endif  // AEC_SEQ2SEQ_H_
