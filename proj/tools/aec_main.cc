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

// aec: command-line front end for the error-correction toolkit.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "aec/common.h"
#include "aec/config.h"
#include "aec/pipeline.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

int ExitCodeFor(aec::ErrorKind kind) {
  switch (kind) {
    case aec::ErrorKind::kUsage:
      return kExitUsage;
    case aec::ErrorKind::kInternal:
      return kExitInternal;
    default:
      return kExitData;
  }
}

// --config, else $AEC_CONFIG, else nothing.
aec::config::KeyValues LoadConfig(const std::string& path) {
  std::string p = path;
  if (p.empty()) {
    if (const char* env = std::getenv("AEC_CONFIG")) p = env;
  }
  return p.empty() ? aec::config::KeyValues{} : aec::config::KeyValues::FromFile(p);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ASR error correction toolkit for syllable-segmented Burmese"};
  app.set_version_flag("--version", std::string("aec ") + aec::cli::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  long seed = -1;
  int threads = 0;
  std::string out_dir;
  app.add_option("--config", config_path,
                 "Key-value config file (default: $AEC_CONFIG)");
  app.add_option("--seed", seed, "Root seed; overrides the config");
  app.add_option("--threads", threads, "Worker threads for decoding")
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", out_dir, "Run directory for pipeline artifacts");

  std::string in, out, model, src, tgt, extra, report;
  int beam = 1;

  auto* segment = app.add_subcommand("segment", "Normalize and syllable-segment raw text");
  segment->add_option("--in", in, "Raw text, one sentence per line")->required();
  segment->add_option("--out", out, "Segmented output")->required();
  segment->add_option("--table", extra, "Cleaning table (default: shipped table)");

  auto* tag = app.add_subcommand("tag-ipa", "Annotate segmented lines with IPA");
  tag->add_option("--model", model, "Transcriber model")->required();
  tag->add_option("--in", in, "Segmented input")->required();
  tag->add_option("--out", out, "tok|ipa output")->required();

  aec::cli::AlignArgs align_args;
  auto* align = app.add_subcommand("align", "Word-align two segmented files");
  align->add_option("--src", align_args.src, "Source side (erroneous)")->required();
  align->add_option("--tgt", align_args.tgt, "Target side (ground truth)")->required();
  align->add_option("--out", align_args.out, "Pharaoh-format links")->required();
  align->add_option("--model-out", align_args.model_out, "Save the forward model");
  align->add_option("--heuristic", align_args.heuristic,
                    "forward, intersection, union or grow-diag-final-and");
  align->add_option("--iterations", align_args.config.iterations, "EM iterations");
  align->add_option("--lambda", align_args.config.lambda, "Initial diagonal tension");
  align->add_option("--p0", align_args.config.p0, "Null alignment probability");

  std::string profile, stats, crf;
  auto* simulate = app.add_subcommand("simulate", "Corrupt a ground-truth corpus");
  simulate->add_option("--gt", in, "Segmented ground truth")->required();
  simulate->add_option("--profile", profile, "Noise profile")->required();
  simulate->add_option("--out-err", out, "Corrupted output")->required();
  simulate->add_option("--stats", stats, "Channel statistics output");
  simulate->add_option("--crf", crf, "Transcriber for phonetic confusions");

  aec::g2p::CrfHyper crf_hyper;
  auto* train_crf = app.add_subcommand("train-crf", "Train the IPA transcriber");
  train_crf->add_option("--train", in, "syllable|ipa lines")->required();
  train_crf->add_option("--out-model", out, "Model output")->required();
  train_crf->add_option("--l2", crf_hyper.l2_lambda, "L2 strength");
  train_crf->add_option("--max-iter", crf_hyper.max_iter, "Optimizer iterations");

  std::string setting = "aec", curve;
  auto* train_aec = app.add_subcommand("train-aec", "Train a corrector");
  train_aec->add_option("--setting", setting,
                        "aec, aec_ipa, aec_align or aec_ipa_align");
  train_aec->add_option("--out-checkpoint", out, "Checkpoint output")->required();
  train_aec->add_option("--curve", curve, "Loss curve output");

  auto* correct = app.add_subcommand("correct", "Correct segmented lines");
  correct->add_option("--checkpoint", model, "Trained corrector")->required();
  correct->add_option("--in", in, "Segmented input, optionally tok|ipa")->required();
  correct->add_option("--out", out, "Corrected output")->required();
  correct->add_option("--crf", crf, "Transcriber for bare input lines");
  correct->add_option("--beam", beam, "Beam size (1 = greedy)")->check(CLI::PositiveNumber);

  auto* evaluate = app.add_subcommand("evaluate", "Score hypotheses against references");
  evaluate->add_option("--ref", src, "Reference lines")->required();
  evaluate->add_option("--hyp", tgt, "Hypothesis lines")->required();
  evaluate->add_option("--report", report, "Per-sentence TSV report");

  auto* pipeline = app.add_subcommand("pipeline", "Run the end-to-end experiment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const char* stage = "setup";
  try {
    const aec::config::KeyValues kv = LoadConfig(config_path);
    const int nthreads = threads > 0 ? threads : static_cast<int>(kv.GetInt("run.threads", 1));
    if (*segment) {
      stage = "segment";
      aec::cli::CmdSegment(in, out, extra);
    } else if (*tag) {
      stage = "tag-ipa";
      aec::cli::CmdTagIpa(model, in, out);
    } else if (*align) {
      stage = "align";
      aec::cli::CmdAlign(align_args);
    } else if (*simulate) {
      stage = "simulate";
      aec::cli::CmdSimulate(in, profile, out, stats, crf);
    } else if (*train_crf) {
      stage = "train-crf";
      aec::cli::CmdTrainCrf(in, out, crf_hyper);
    } else if (*train_aec) {
      stage = "train-aec";
      aec::config::KeyValues merged = kv;
      if (seed >= 0) {
        merged.Set("model.seed", std::to_string(seed));
        merged.Set("train.seed", std::to_string(seed));
      }
      aec::cli::CmdTrainAec(merged, aec::cli::ParseSetting(setting), out, curve);
    } else if (*correct) {
      stage = "correct";
      aec::cli::CmdCorrect(model, in, out, crf, beam, nthreads);
    } else if (*evaluate) {
      stage = "evaluate";
      aec::cli::CmdEvaluate(src, tgt, report);
    } else if (*pipeline) {
      stage = "pipeline";
      aec::config::KeyValues merged = kv;
      if (seed >= 0) merged.Set("run.seed", std::to_string(seed));
      if (!out_dir.empty()) merged.Set("run.out_dir", out_dir);
      if (threads > 0) merged.Set("run.threads", std::to_string(threads));
      const aec::cli::PipelineResult r =
          aec::cli::RunPipeline(aec::cli::PipelineConfig::FromKeyValues(merged));
      std::cout << aec::cli::FormatTable(r);
    }
  } catch (const aec::Error& e) {
    std::fprintf(stderr, "aec %s: %s\n", stage, e.what());
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "aec %s: internal error: %s\n", stage, e.what());
    return kExitInternal;
  }
  return kExitOk;
}
