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

#ifndef AEC_PIPELINE_H_
#define AEC_PIPELINE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aec/aligner.h"
#include "aec/common.h"
#include "aec/config.h"
#include "aec/errorsim.h"
#include "aec/g2ipa.h"
#include "aec/metrics.h"
#include "aec/seq2seq.h"

namespace aec::cli {

inline constexpr const char* kVersion = "0.1.0";

// Runs fn and re-throws any Error with "stage <name>: " prepended.
template <typename Fn>
auto Stage(const std::string& name, Fn&& fn) -> decltype(fn());

// The four corrector variants.
enum class FeatureSetting { kAec, kAecIpa, kAecAlign, kAecIpaAlign };

const char* SettingLabel(FeatureSetting s);  // "+ AEC + IPA", ...
const char* SettingSlug(FeatureSetting s);   // "aec_ipa", ...
FeatureSetting ParseSetting(const std::string& slug);
bool UsesIpa(FeatureSetting s);
bool UsesAlign(FeatureSetting s);

// Hex SHA-256 of a file's bytes.
std::string Sha256File(const std::string& path);

// --- Single-step commands ---------------------------------------------------

void CmdSegment(const std::string& in, const std::string& out,
                const std::string& cleaning_table);

void CmdTagIpa(const std::string& model, const std::string& in,
               const std::string& out);

struct AlignArgs {
  std::string src, tgt, out;
  std::string model_out;              // optional
  std::string heuristic = "forward";  // forward|intersection|union|grow-diag-final-and
  align::AlignerConfig config;
};
void CmdAlign(const AlignArgs& args);

void CmdSimulate(const std::string& gt, const std::string& profile,
                 const std::string& out_err, const std::string& stats_out,
                 const std::string& crf_model);

void CmdTrainCrf(const std::string& train, const std::string& out_model,
                 const g2p::CrfHyper& hyper);

// Config keys: data.train_src, data.train_tgt, data.train_ipa,
// data.train_align, data.valid_src, data.valid_tgt, data.valid_ipa,
// data.valid_align (segmented-line files), plus model.* and train.*.
void CmdTrainAec(const config::KeyValues& config, FeatureSetting setting,
                 const std::string& out_checkpoint,
                 const std::string& curve_out);

// Input lines may carry IPA annotations (tok|ipa); when a model using IPA
// gets bare lines, crf_model transcribes them.
void CmdCorrect(const std::string& checkpoint, const std::string& in,
                const std::string& out, const std::string& crf_model,
                int beam, int threads);

void CmdEvaluate(const std::string& ref, const std::string& hyp,
                 const std::string& report);

// --- Pipeline -------------------------------------------------------------

struct PipelineConfig {
  uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = "run";

  std::string gt_corpus;  // raw text, one sentence per line; empty: grammar
  size_t grammar_sentences = 2000;
  double valid_fraction = 0.1;
  double test_fraction = 0.1;
  std::string g2p_seed;  // tagged syllables for the transcriber
  std::string cleaning_table;

  noise::NoiseProfile noise;
  int noise_copies = 1;  // corrupted copies of every training sentence
  g2p::CrfHyper crf;
  align::AlignerConfig aligner;
  s2s::ModelConfig model;
  s2s::OptimizerConfig optimizer;
  double guidance_weight = 0.3;  // used by the Align settings
  int beam = 1;
  std::vector<FeatureSetting> settings;
  metrics::ChrfParams chrf;

  static PipelineConfig FromKeyValues(const config::KeyValues& kv);
  // Everything except out_dir and threads, which do not affect results.
  config::KeyValues ToKeyValues() const;
};

struct SettingResult {
  std::string label;
  double wer = 0.0;
  double chrf = 0.0;
  double relative_wer_reduction = 0.0;  // against the baseline
  s2s::TrainReport training;
};

struct PipelineResult {
  SettingResult baseline;
  std::vector<SettingResult> settings;
  noise::ChannelStats channel;
  size_t gt_sentences = 0;
  size_t train_pairs = 0;
  size_t valid_pairs = 0;
  size_t test_pairs = 0;
  std::string table_path;
  std::string manifest_path;
};

std::string FormatTable(const PipelineResult& result);

// Writes every artifact under config.out_dir, then table.tsv and
// manifest.json.
PipelineResult RunPipeline(const PipelineConfig& config);

// ---------------------------------------------------------------------------

template <typename Fn>
auto Stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), "stage " + name + ": " + e.message());
  }
}

}  // namespace aec::cli

#endif  // AEC_PIPELINE_H_
