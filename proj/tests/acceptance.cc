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
//
// Acceptance suite. Prints one line per criterion:
//   PASS|FAIL|N/A  <id>  <title>: <measurements>
// and exits nonzero if any criterion fails.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aec/aligner.h"
#include "aec/errorsim.h"
#include "aec/g2ipa.h"
#include "aec/metrics.h"
#include "aec/seq2seq.h"
#include "aec/textcore.h"
#include "test_support.h"

namespace aec {
namespace {

namespace fs = std::filesystem;

// Tolerances and budgets.
constexpr int kWerMaxLen = 6;
constexpr double kWerSeconds = 10.0;
constexpr int kChrfPairs = 200;
constexpr double kChrfTolerance = 1e-9;
constexpr double kCrfBruteTolerance = 1e-8;
constexpr double kCrfFdTolerance = 1e-5;
constexpr double kCrfSeconds = 60.0;
constexpr double kRecoveryPrecision = 0.9;
constexpr double kRecoverySeconds = 30.0;
constexpr double kPriorTolerance = 1e-12;
constexpr double kTransformerFdTolerance = 1e-4;
constexpr double kOverfitCe = 0.1;
constexpr int kOverfitSteps = 2000;
constexpr double kOverfitSeconds = 300.0;
constexpr double kGuidedAgreement = 0.9;
constexpr int kGuidancePairs = 200;
constexpr int kGuidanceHeldOut = 50;
constexpr int kGuidanceLayers = 1;
constexpr int kGuidanceHidden = 32;
constexpr int kGuidanceSteps = 1500;
constexpr double kRelativeReduction = 0.25;
constexpr double kPipelineSeconds = 1800.0;

struct Verdict {
  enum Status { kPass, kFail, kNotApplicable } status = kPass;
  std::string detail;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string Fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

Verdict Combine(const std::vector<std::pair<bool, std::string>>& parts) {
  Verdict v;
  for (const auto& [ok, text] : parts) {
    if (!ok) v.status = Verdict::kFail;
    if (!v.detail.empty()) v.detail += "; ";
    v.detail += text;
  }
  return v;
}

// --- C1 --------------------------------------------------------------------

Verdict PublishedFigures() {
  return {Verdict::kNotApplicable,
          "published WER/chrF++ figures need speech corpora and ASR models "
          "that are not part of this artifact; C2-C8 substitute"};
}

// --- C2 --------------------------------------------------------------------

Verdict MetricOracles() {
  const Stopwatch clock;
  const auto lists = testing::AllTokenLists({"a", "b", "c"}, kWerMaxLen);
  long pairs = 0, mismatches = 0;
  for (const auto& ref : lists) {
    if (ref.empty()) continue;
    for (const auto& hyp : lists) {
      ++pairs;
      const metrics::WerResult r = metrics::Wer(ref, hyp);
      const int d = testing::RecursiveEditDistance(ref, hyp);
      if (r.breakdown.edits() != d ||
          r.rate != static_cast<double>(d) / ref.size()) {
        ++mismatches;
      }
    }
  }
  const double wer_seconds = clock.Seconds();

  noise::Rng rng(101, 1);
  double worst = 0.0;
  for (int i = 0; i < kChrfPairs; ++i) {
    const std::string ref = testing::RandomAsciiText(rng, 24);
    const std::string hyp = testing::RandomAsciiText(rng, 24);
    worst = std::max(worst, std::abs(metrics::ChrfPlusPlus(ref, hyp) -
                                     testing::BruteChrf(ref, hyp)));
  }
  return Combine(
      {{mismatches == 0 && wer_seconds < kWerSeconds,
        Fmt("WER vs recursive edit distance on %ld pairs (len <= %d): %ld "
            "mismatches in %.1f s (< %.0f s)",
            pairs, kWerMaxLen, mismatches, wer_seconds, kWerSeconds)},
       {worst <= kChrfTolerance,
        Fmt("chrF++ vs brute force on %d pairs: max |diff| %.1e (<= %.0e)",
            kChrfPairs, worst, kChrfTolerance)}});
}

// --- C3 --------------------------------------------------------------------

Verdict CrfCorrectness() {
  noise::Rng rng(102, 1);
  double brute_worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int labels = 2 + static_cast<int>(rng.Below(3));
    const auto data = testing::RandomTaggedData(3, 4, 5, labels, rng);
    const g2p::CrfModel m =
        testing::RandomCrf(data, labels, 0.1 * rng.Uniform(), rng);
    const g2p::Objective got = g2p::CrfLogLikelihood(m, data);
    const g2p::Objective want = testing::BruteCrfObjective(m, data);
    brute_worst = std::max(
        {brute_worst, std::abs(got.value - want.value),
         (got.gradient - want.gradient).lpNorm<Eigen::Infinity>()});
  }

  double fd_worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto data = testing::RandomTaggedData(4, 5, 6, 3, rng);
    const g2p::CrfModel m = testing::RandomCrf(data, 3, 0.05, rng);
    g2p::CrfModel probe = m;
    const Eigen::VectorXd numeric = testing::CentralDifference(
        [&](const Eigen::VectorXd& w) {
          probe.SetWeights(w);
          return g2p::CrfLogLikelihood(probe, data).value;
        },
        m.Weights(), 1e-5);
    fd_worst = std::max(
        fd_worst, testing::RelativeError(
                      g2p::CrfLogLikelihood(m, data).gradient, numeric));
  }

  const Stopwatch clock;
  std::vector<g2p::TaggedSequence> corpus;
  for (int s = 0; s < 100; ++s) {
    std::vector<std::string> toks;
    std::vector<int> labels;
    const size_t len = 3 + rng.Below(6);
    for (size_t t = 0; t < len; ++t) {
      const int id = static_cast<int>(rng.Below(12));
      toks.push_back("w" + std::to_string(id));
      labels.push_back(id % 4);
    }
    corpus.push_back({text::SyllableSequence(toks), labels});
  }
  g2p::CrfHyper hyper;
  hyper.l2_lambda = 0.0;
  hyper.max_iter = 200;
  const g2p::CrfModel m =
      g2p::TrainCrf(corpus, g2p::TagSet({"A", "B", "C", "D"}),
                    g2p::FeatureTemplate::IdentityWindow(1), hyper);
  long correct = 0, total = 0;
  for (const g2p::TaggedSequence& s : corpus) {
    const std::vector<int> pred = g2p::CrfDecode(m, s.tokens).labels;
    for (size_t t = 0; t < pred.size(); ++t) correct += pred[t] == s.labels[t];
    total += static_cast<long>(s.labels.size());
  }
  const double seconds = clock.Seconds();
  return Combine(
      {{brute_worst <= kCrfBruteTolerance,
        Fmt("NLL and gradient vs path enumeration: max |diff| %.1e (<= %.0e)",
            brute_worst, kCrfBruteTolerance)},
       {fd_worst <= kCrfFdTolerance,
        Fmt("central differences: max relative error %.1e (<= %.0e)",
            fd_worst, kCrfFdTolerance)},
       {correct == total && seconds < kCrfSeconds,
        Fmt("separable corpus: %ld/%ld tokens decoded correctly in %.2f s "
            "(< %.0f s)",
            correct, total, seconds, kCrfSeconds)}});
}

// --- C4 --------------------------------------------------------------------

std::vector<text::ParallelPair> RandomParallel(int count, int vocab,
                                               bool diagonal,
                                               noise::Rng& rng) {
  std::vector<text::ParallelPair> out;
  for (int c = 0; c < count; ++c) {
    std::vector<std::string> s, t;
    const size_t m = 2 + rng.Below(8);
    const size_t n = diagonal ? m : 2 + rng.Below(8);
    for (size_t i = 0; i < m; ++i) s.push_back("s" + std::to_string(rng.Below(vocab)));
    for (size_t j = 0; j < n; ++j) {
      t.push_back(diagonal ? "t" + s[j].substr(1)
                           : "t" + std::to_string(rng.Below(vocab)));
    }
    out.push_back({text::SyllableSequence(s), text::SyllableSequence(t), ""});
  }
  return out;
}

Verdict AlignerCorrectness() {
  noise::Rng rng(103, 1);
  std::vector<std::vector<text::ParallelPair>> fixtures = {
      RandomParallel(200, 15, false, rng), RandomParallel(200, 30, true, rng),
      {{text::SyllableSequence({"a", "b"}), text::SyllableSequence({"A", "B"}), ""},
       {text::SyllableSequence({"b", "a"}), text::SyllableSequence({"B", "A"}), ""}}};
  {
    const auto synth = testing::MakeSyntheticAligner(12, 12, 4.0, 0.08, 0.02, rng);
    std::vector<text::ParallelPair> sampled;
    for (const auto& sp : testing::SampleAlignedCorpus(synth, 200, 3, 9, rng)) {
      sampled.push_back(sp.pair);
    }
    fixtures.push_back(sampled);
  }
  int monotone = 0;
  double worst_drop = 0.0;
  for (const auto& corpus : fixtures) {
    align::AlignerConfig cfg;
    cfg.iterations = 10;
    align::AlignerTrainReport report;
    align::TrainAligner(corpus, cfg, &report);
    bool ok = report.log_likelihoods.size() == 10;
    for (size_t i = 1; i < report.log_likelihoods.size(); ++i) {
      const double drop = report.log_likelihoods[i - 1] - report.log_likelihoods[i];
      worst_drop = std::max(worst_drop, drop);
      if (drop > 1e-9 * std::abs(report.log_likelihoods[i - 1])) ok = false;
    }
    monotone += ok;
  }

  const Stopwatch clock;
  noise::Rng srng(36, 1);
  const auto synth = testing::MakeSyntheticAligner(20, 20, 8.0, 0.02, 0.005, srng);
  const auto sampled = testing::SampleAlignedCorpus(synth, 500, 4, 10, srng);
  std::vector<text::ParallelPair> corpus;
  for (const auto& sp : sampled) corpus.push_back(sp.pair);
  const align::AlignmentModel learned =
      align::TrainAligner(corpus, align::AlignerConfig{});
  const double precision = testing::RecoveryPrecision(learned, sampled);
  const double seconds = clock.Seconds();
  const double bound = testing::RecoveryPrecision(
      testing::GeneratingModel(synth, sampled), sampled);

  double prior_worst = 0.0;
  for (int trial = 0; trial < 20000; ++trial) {
    const int m = 1 + static_cast<int>(rng.Below(40));
    const int n = 1 + static_cast<int>(rng.Below(40));
    const int j = 1 + static_cast<int>(rng.Below(n));
    const auto p = align::AlignmentPrior(j, m, n, 16.0 * rng.Uniform(), rng.Uniform());
    prior_worst = std::max(prior_worst,
                           std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
  }
  return Combine(
      {{monotone == static_cast<int>(fixtures.size()),
        Fmt("EM log-likelihood nondecreasing over 10 iterations on %d/%zu "
            "fixtures (largest drop %.1e)",
            monotone, fixtures.size(), worst_drop)},
       {precision >= kRecoveryPrecision && seconds < kRecoverySeconds,
        Fmt("synthetic recovery precision %.3f (>= %.2f; generating model "
            "reaches %.3f) in %.2f s (< %.0f s)",
            precision, kRecoveryPrecision, bound, seconds, kRecoverySeconds)},
       {prior_worst <= kPriorTolerance,
        Fmt("prior |sum - 1| max %.1e over 20000 draws (<= %.0e)", prior_worst,
            kPriorTolerance)}});
}

// --- C5 --------------------------------------------------------------------

noise::NoiseProfile ToyNoise() {
  noise::NoiseProfile p;
  p.p_sub = 0.15;
  p.p_del = 0.1;
  p.p_ins = 0.1;
  p.confusion_mode = noise::ConfusionMode::kUniform;
  return p;
}

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Verdict TransformerCorrectness() {
  s2s::ModelConfig tiny;
  tiny.layers = 1;
  tiny.hidden = 8;
  tiny.ff = 16;
  tiny.heads = 2;
  tiny.word_emb_dim = 8;
  tiny.ipa_emb_dim = 4;
  tiny.dropout = 0.0;
  tiny.attn_dropout = 0.0;
  tiny.guidance_weight = 0.5;
  tiny.max_len = 40;
  testing::ToyTask t =
      testing::MakeToyTask(testing::ToyCorruptedCorpus(3, 3, ToyNoise()), tiny, 3);
  const auto checks = testing::CheckGradients(t.model, t.examples, 1e-5);
  double worst = 0.0;
  std::string worst_group;
  int fusion_groups = 0, zero_groups = 0;
  bool zero_ok = true;
  for (const auto& c : checks) {
    if (c.group.find("fusion") != std::string::npos) ++fusion_groups;
    // Key biases cancel inside the softmax; their gradient must vanish.
    if (EndsWith(c.group, ".bk")) {
      ++zero_groups;
      zero_ok = zero_ok && c.max_abs_gradient < 1e-12 && c.max_abs_numeric < 1e-8;
      continue;
    }
    if (c.relative_error > worst) {
      worst = c.relative_error;
      worst_group = c.group;
    }
  }

  // Guidance path: the supervised query projection sees the extra loss.
  t.model.mutable_config().guidance_weight = 0.0;
  t.model.ZeroGrad();
  s2s::TrainingLoss(t.model, t.examples, s2s::Mode::kEval, nullptr, true);
  const s2s::Matrix without = t.model.decoder[0].cross_attn.wq.grad;
  t.model.mutable_config().guidance_weight = 0.5;
  t.model.ZeroGrad();
  s2s::TrainingLoss(t.model, t.examples, s2s::Mode::kEval, nullptr, true);
  const double guidance_delta =
      (t.model.decoder[0].cross_attn.wq.grad - without).lpNorm<Eigen::Infinity>();

  testing::ToyTask probe_task =
      testing::MakeToyTask(testing::ToyCorruptedCorpus(6, 3, ToyNoise()), tiny, 3);
  double before = 0.0;
  long probes = 0, silent_after = 0;
  for (const s2s::TrainingExample& e : probe_task.examples) {
    for (size_t k = 0; k < e.target.size(); ++k) {
      const int other = e.target[k] == s2s::Vocab::kUnk + 1 ? s2s::Vocab::kUnk + 2
                                                            : s2s::Vocab::kUnk + 1;
      const auto r = testing::CausalityProbe(probe_task.model, e, k, other);
      before = std::max(before, r.max_change_before);
      silent_after += r.max_change_after == 0.0;
      ++probes;
    }
  }

  s2s::ModelConfig desk;
  desk.dropout = 0.0;
  desk.attn_dropout = 0.0;
  desk.label_smoothing = 0.0;
  desk.guidance_weight = 0.0;
  testing::ToyTask overfit =
      testing::MakeToyTask(testing::ToyCorruptedCorpus(16, 7, ToyNoise()), desk, 7);
  s2s::OptimizerConfig o;
  o.max_steps = kOverfitSteps;
  o.warmup_steps = 200;
  o.stop_below_ce = 0.01;
  const Stopwatch clock;
  const s2s::TrainReport report = s2s::Train(overfit.model, overfit.examples, {}, o);
  const double seconds = clock.Seconds();
  const double ce = s2s::ValidationLoss(overfit.model, overfit.examples).cross_entropy;

  return Combine(
      {{worst <= kTransformerFdTolerance && fusion_groups > 0 && zero_ok,
        Fmt("central differences on %zu parameter groups (%d fusion MLP): "
            "max relative error %.1e in %s (<= %.0e); %d key-bias groups "
            "vanish as required",
            checks.size(), fusion_groups, worst, worst_group.c_str(),
            kTransformerFdTolerance, zero_groups)},
       {guidance_delta > 0.0,
        Fmt("guidance loss reaches the supervised cross-attention (grad "
            "change %.1e)",
            guidance_delta)},
       {before == 0.0 && silent_after == 0,
        Fmt("causality: %ld probes, max change at or before the edit %.1e, "
            "%ld probes with no later change",
            probes, before, silent_after)},
       {ce < kOverfitCe && report.steps <= kOverfitSteps &&
            seconds < kOverfitSeconds,
        Fmt("%zu-pair overfit: CE %.4f (< %.1f) after %ld steps (<= %d) in "
            "%.1f s (< %.0f s)",
            overfit.examples.size(), ce, kOverfitCe, report.steps,
            kOverfitSteps, seconds, kOverfitSeconds)}});
}

// --- C6 --------------------------------------------------------------------

Verdict GuidanceEfficacy() {
  const auto toy = testing::ToyCorruptedCorpus(kGuidancePairs + kGuidanceHeldOut,
                                               11, ToyNoise());
  const double weights[2] = {10.0, 0.0};
  testing::AttentionAgreement trained[2], held[2];
  for (int i = 0; i < 2; ++i) {
    s2s::ModelConfig c;
    c.layers = kGuidanceLayers;
    c.hidden = kGuidanceHidden;
    c.ff = 2 * kGuidanceHidden;
    c.heads = 2;
    c.word_emb_dim = kGuidanceHidden;
    c.ipa_emb_dim = 8;
    c.dropout = 0.0;
    c.attn_dropout = 0.0;
    c.label_smoothing = 0.0;
    c.guided_layer = kGuidanceLayers - 1;
    c.guidance_weight = weights[i];
    c.max_len = 60;
    testing::ToyTask t = testing::MakeToyTask(toy, c, 11);
    const std::vector<s2s::TrainingExample> held_out(
        t.examples.begin() + kGuidancePairs, t.examples.end());
    t.examples.resize(kGuidancePairs);
    s2s::OptimizerConfig o;
    o.max_steps = kGuidanceSteps;
    o.warmup_steps = 200;
    o.batch_tokens = 400;
    s2s::Train(t.model, t.examples, {}, o);
    trained[i] = testing::MeasureAttentionAgreement(t.model, t.examples);
    held[i] = testing::MeasureAttentionAgreement(t.model, held_out);
  }
  return Combine(
      {{trained[0].rate() >= kGuidedAgreement,
        Fmt("guidance_weight 10: %.1f%% of %ld supervised rows peak on an "
            "aligned position (>= %.0f%%)",
            100 * trained[0].rate(), trained[0].supervised,
            100 * kGuidedAgreement)},
       {trained[1].rate() < trained[0].rate(),
        Fmt("guidance_weight 0, same seed: %.1f%% (must be lower)",
            100 * trained[1].rate())},
       {true, Fmt("held-out pairs: %.1f%% vs %.1f%%", 100 * held[0].rate(),
                  100 * held[1].rate())}});
}

// --- C7 / C8 ---------------------------------------------------------------

struct PipelineRun {
  int status = -1;
  double seconds = 0.0;
  std::string output;
  std::string dir;
};

PipelineRun RunPipeline(const std::string& config, const std::string& dir) {
  PipelineRun run;
  run.dir = dir;
  fs::remove_all(dir);
  const Stopwatch clock;
  run.status = testing::RunCommand(std::string(AEC_BINARY) + " --config " +
                                       config + " --out-dir " + dir + " pipeline",
                                   &run.output);
  run.seconds = clock.Seconds();
  return run;
}

// Rows of table.tsv after the header: label -> (wer percent, reduction).
std::vector<std::vector<std::string>> ReadTable(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(testing::ReadFile(path));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream cols(line);
    std::string cell;
    while (std::getline(cols, cell, '\t')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

Verdict EndToEnd(const PipelineRun& run) {
  if (run.status != 0) {
    return {Verdict::kFail, Fmt("pipeline exited with status %d: ", run.status) +
                                run.output.substr(run.output.size() > 400
                                                      ? run.output.size() - 400
                                                      : 0)};
  }
  const auto rows = ReadTable(run.dir + "/table.tsv");
  std::vector<std::pair<bool, std::string>> parts;
  if (rows.size() != 5 || rows[0].size() < 4) {
    return {Verdict::kFail, Fmt("table.tsv has %zu rows, expected 5", rows.size())};
  }
  const double baseline = std::stod(rows[0][1]);
  for (size_t i = 1; i < rows.size(); ++i) {
    const double wer = std::stod(rows[i][1]);
    const double reduction = baseline > 0 ? (baseline - wer) / baseline : 0.0;
    parts.push_back({reduction >= kRelativeReduction,
                     Fmt("%s WER %.2f%% vs baseline %.2f%%, -%.1f%% relative",
                         rows[i][0].c_str(), wer, baseline, 100 * reduction)});
  }
  parts.push_back({run.seconds <= kPipelineSeconds,
                   Fmt("wall time %.0f s (<= %.0f s; reductions must be >= "
                       "%.0f%%)",
                       run.seconds, kPipelineSeconds, 100 * kRelativeReduction)});
  return Combine(parts);
}

Verdict Determinism(const PipelineRun& first, const PipelineRun& second) {
  if (first.status != 0 || second.status != 0) {
    return {Verdict::kFail, Fmt("pipeline statuses %d and %d", first.status,
                                second.status)};
  }
  std::vector<std::pair<bool, std::string>> parts;
  for (const char* name : {"table.tsv", "manifest.json"}) {
    const bool same = testing::ReadFile(first.dir + "/" + name) ==
                      testing::ReadFile(second.dir + "/" + name);
    parts.push_back({same, Fmt("%s %s", name, same ? "byte-identical" : "differs")});
  }
  return Combine(parts);
}

void Report(const std::string& id, const std::string& title, const Verdict& v,
            int* failures, std::string* log) {
  const char* status = v.status == Verdict::kPass   ? "PASS"
                       : v.status == Verdict::kFail ? "FAIL"
                                                    : "N/A ";
  if (v.status == Verdict::kFail) ++*failures;
  const std::string line =
      std::string(status) + "  " + id + "  " + title + ": " + v.detail + "\n";
  std::fputs(line.c_str(), stdout);
  *log += line;
  std::fflush(stdout);
}

}  // namespace
}  // namespace aec

int main(int argc, char** argv) {
  using namespace aec;
  CLI::App app{"Acceptance checks"};
  std::string work_dir = (fs::temp_directory_path() / "aec_acceptance").string();
  std::string config = std::string(AEC_SOURCE_DIR) + "/configs/desk.cfg";
  std::set<std::string> only;
  app.add_option("--work-dir", work_dir, "Directory for pipeline runs");
  app.add_option("--config", config, "Pipeline config for C7 and C8");
  app.add_option("--only", only, "Run only these criteria (e.g. C2 C5)");
  CLI11_PARSE(app, argc, argv);

  auto wanted = [&](const std::string& id) {
    return only.empty() || only.count(id) > 0;
  };
  int failures = 0;
  std::string log;
  fs::create_directories(work_dir);
  try {
    if (wanted("C1")) {
      Report("C1", "published figures", PublishedFigures(), &failures, &log);
    }
    if (wanted("C2")) {
      Report("C2", "metric oracles", MetricOracles(), &failures, &log);
    }
    if (wanted("C3")) {
      Report("C3", "CRF correctness", CrfCorrectness(), &failures, &log);
    }
    if (wanted("C4")) {
      Report("C4", "aligner correctness", AlignerCorrectness(), &failures, &log);
    }
    if (wanted("C5")) {
      Report("C5", "transformer correctness", TransformerCorrectness(),
             &failures, &log);
    }
    if (wanted("C6")) {
      Report("C6", "attention supervision", GuidanceEfficacy(), &failures, &log);
    }
    if (wanted("C7") || wanted("C8")) {
      const PipelineRun first = RunPipeline(config, work_dir + "/run1");
      if (wanted("C7")) {
        Report("C7", "end-to-end direction", EndToEnd(first), &failures, &log);
      }
      if (wanted("C8")) {
        const PipelineRun second = RunPipeline(config, work_dir + "/run2");
        Report("C8", "determinism", Determinism(first, second), &failures,
               &log);
      }
    }
  } catch (const std::exception& e) {
    std::printf("FAIL  acceptance aborted: %s\n", e.what());
    return 1;
  }
  const std::string summary = std::to_string(failures) + " criteria failed\n";
  std::fputs(summary.c_str(), stdout);
  log += summary;
  testing::WriteFile(work_dir + "/acceptance_report.txt", log);
  return failures == 0 ? 0 : 1;
}
