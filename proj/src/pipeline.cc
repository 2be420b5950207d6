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

#include "aec/pipeline.h"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "aec/common.h"
#include "aec/grammar.h"
#include "aec/textcore.h"

namespace aec::cli {

namespace fs = std::filesystem;

namespace {

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string Exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string JoinTokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<text::SegmentedLine> ReadSegmentedFile(const std::string& path) {
  std::vector<text::SegmentedLine> out;
  const std::vector<std::string> lines = text::ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(text::ReadSegmented(lines[i]));
    } catch (const Error& e) {
      throw Error(e.kind(), path + ":" + std::to_string(i + 1) + ": " +
                                e.message());
    }
  }
  return out;
}

const text::CleaningTable& TableFor(const std::string& path,
                                    text::CleaningTable* storage) {
  if (path.empty()) return text::CleaningTable::Default();
  *storage = text::CleaningTable::FromFile(path);
  return *storage;
}

std::vector<std::string> Transcribe(const g2p::CrfModel& crf,
                                    const text::SyllableSequence& tokens) {
  if (tokens.empty()) return {};
  return g2p::LabelStrings(crf, g2p::CrfDecode(crf, tokens));
}

g2p::CrfModel TrainTranscriber(const std::string& seed_path,
                               const g2p::CrfHyper& hyper) {
  g2p::TagSet tags;
  const auto corpus = g2p::ParseTaggedLines(text::ReadLines(seed_path), &tags);
  return g2p::TrainCrf(corpus, tags, g2p::FeatureTemplate::Default(), hyper);
}

std::string DefaultG2pSeed() { return AEC_DATA_DIR "/g2p_seed.txt"; }

uint64_t DeriveSeed(uint64_t root, uint64_t stream) {
  return noise::Rng(root, stream).Next() >> 1;  // fits a signed config value
}

// Decodes every source, splitting sentences across threads by index.
std::vector<std::vector<std::string>> CorrectAll(
    const s2s::Seq2SeqModel& model,
    const std::vector<text::SyllableSequence>& sources,
    const std::vector<std::vector<std::string>>& ipa, int beam, int threads) {
  std::vector<std::vector<std::string>> out(sources.size());
  s2s::DecodeOptions options;
  if (beam > 1) {
    options.strategy = s2s::DecodeOptions::Strategy::kBeam;
    options.beam = beam;
  }
  auto work = [&](size_t first, size_t stride) {
    for (size_t i = first; i < sources.size(); i += stride) {
      const auto& toks = sources[i].tokens();
      const std::vector<int> src = model.source_vocab().Encode(toks);
      const std::vector<int> ipa_ids = s2s::IpaIds(model, ipa[i], toks.size());
      out[i] = model.target_vocab().DecodeIds(
          s2s::Decode(model, src, ipa_ids, options));
    }
  };
  const size_t n = static_cast<size_t>(std::max(1, threads));
  if (n == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n);
    for (size_t t = 0; t < n; ++t) {
      pool.emplace_back([&, t] {
        try {
          work(t, n);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return out;
}

struct Corpus {
  std::vector<text::SyllableSequence> source;
  std::vector<std::vector<std::string>> ipa;
  std::vector<text::SyllableSequence> target;
  std::vector<align::AlignmentLinkSet> alignment;
};

std::vector<s2s::TrainingExample> MakeExamples(const s2s::Seq2SeqModel& model,
                                               const Corpus& c,
                                               bool with_alignment) {
  std::vector<s2s::TrainingExample> out;
  for (size_t i = 0; i < c.source.size(); ++i) {
    s2s::TrainingExample ex;
    ex.source = model.source_vocab().Encode(c.source[i].tokens());
    ex.source_ipa = s2s::IpaIds(model, c.ipa[i], c.source[i].size());
    ex.target = model.target_vocab().Encode(c.target[i].tokens());
    if (with_alignment && i < c.alignment.size()) ex.alignment = c.alignment[i];
    out.push_back(std::move(ex));
  }
  return out;
}

Corpus LoadCorpus(const config::KeyValues& kv, const std::string& split,
                  bool need_ipa, bool need_align) {
  Corpus c;
  const std::string src = kv.GetString("data." + split + "_src", "");
  const std::string tgt = kv.GetString("data." + split + "_tgt", "");
  if (src.empty() || tgt.empty()) return c;
  const auto s = ReadSegmentedFile(src);
  const auto t = ReadSegmentedFile(tgt);
  if (s.size() != t.size()) {
    throw Error(ErrorKind::kLineCountMismatch,
                src + " and " + tgt + " differ in line count");
  }
  std::vector<text::SegmentedLine> ipa;
  if (need_ipa) {
    const std::string path = kv.GetString("data." + split + "_ipa", "");
    if (path.empty()) {
      throw Error(ErrorKind::kUsage, "data." + split + "_ipa is required");
    }
    ipa = ReadSegmentedFile(path);
    if (ipa.size() != s.size()) {
      throw Error(ErrorKind::kLineCountMismatch, path + " line count");
    }
  }
  std::vector<std::string> links;
  if (need_align) {
    const std::string path = kv.GetString("data." + split + "_align", "");
    if (!path.empty()) {
      links = text::ReadLines(path);
      if (links.size() != s.size()) {
        throw Error(ErrorKind::kLineCountMismatch, path + " line count");
      }
    }
  }
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i].tokens.empty() || t[i].tokens.empty()) continue;
    c.source.push_back(s[i].tokens);
    c.target.push_back(t[i].tokens);
    c.ipa.push_back(need_ipa ? ipa[i].annotations : std::vector<std::string>{});
    if (!links.empty()) {
      c.alignment.push_back(align::AlignmentLinkSet::FromPharaoh(
          links[i], static_cast<int>(s[i].tokens.size()),
          static_cast<int>(t[i].tokens.size())));
    }
  }
  return c;
}

std::vector<std::string> CollectTokens(
    const std::vector<text::SyllableSequence>& seqs) {
  std::vector<std::string> out;
  for (const auto& s : seqs) out.insert(out.end(), s.tokens().begin(), s.tokens().end());
  return out;
}

std::vector<std::string> CollectLabels(
    const std::vector<std::vector<std::string>>& labels) {
  std::vector<std::string> out;
  for (const auto& l : labels) out.insert(out.end(), l.begin(), l.end());
  return out;
}

std::string CurveTsv(const s2s::TrainReport& r, long valid_every) {
  std::ostringstream out;
  out << "step\ttrain_loss\ttrain_ce\n";
  for (size_t i = 0; i < r.train_loss.size(); ++i) {
    out << i + 1 << '\t' << Exact(r.train_loss[i]) << '\t'
        << Exact(r.train_ce[i]) << '\n';
  }
  out << "# validation checks every " << valid_every << " steps\n";
  for (size_t i = 0; i < r.valid_ce.size(); ++i) {
    out << "# valid\t" << i + 1 << '\t' << Exact(r.valid_ce[i]) << '\n';
  }
  out << "# best_step\t" << r.best_step << '\n';
  return out.str();
}

void WriteText(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoFailure, "cannot write " + path);
  out << contents;
  if (!out) throw Error(ErrorKind::kIoFailure, "write failed: " + path);
}

s2s::TrainReport TrainCorrector(s2s::Seq2SeqModel* model, const Corpus& train,
                                const Corpus& valid, bool with_alignment,
                                const s2s::OptimizerConfig& options) {
  const auto train_ex = MakeExamples(*model, train, with_alignment);
  const auto valid_ex = MakeExamples(*model, valid, false);
  return s2s::Train(*model, train_ex, valid_ex, options);
}

}  // namespace

// --- Settings ---------------------------------------------------------------

const char* SettingLabel(FeatureSetting s) {
  switch (s) {
    case FeatureSetting::kAec: return "+ AEC";
    case FeatureSetting::kAecIpa: return "+ AEC + IPA";
    case FeatureSetting::kAecAlign: return "+ AEC + Align";
    case FeatureSetting::kAecIpaAlign: return "+ AEC + IPA + Align";
  }
  return "?";
}

const char* SettingSlug(FeatureSetting s) {
  switch (s) {
    case FeatureSetting::kAec: return "aec";
    case FeatureSetting::kAecIpa: return "aec_ipa";
    case FeatureSetting::kAecAlign: return "aec_align";
    case FeatureSetting::kAecIpaAlign: return "aec_ipa_align";
  }
  return "?";
}

FeatureSetting ParseSetting(const std::string& slug) {
  for (FeatureSetting s : {FeatureSetting::kAec, FeatureSetting::kAecIpa,
                           FeatureSetting::kAecAlign,
                           FeatureSetting::kAecIpaAlign}) {
    if (slug == SettingSlug(s)) return s;
  }
  throw Error(ErrorKind::kUsage, "unknown feature setting '" + slug +
                                     "' (aec, aec_ipa, aec_align, aec_ipa_align)");
}

bool UsesIpa(FeatureSetting s) {
  return s == FeatureSetting::kAecIpa || s == FeatureSetting::kAecIpaAlign;
}

bool UsesAlign(FeatureSetting s) {
  return s == FeatureSetting::kAecAlign || s == FeatureSetting::kAecIpaAlign;
}

std::string Sha256File(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot read " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof(byte), "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

// --- Commands ---------------------------------------------------------------

void CmdSegment(const std::string& in, const std::string& out,
                const std::string& cleaning_table) {
  text::CleaningTable storage;
  const text::CleaningTable& table = TableFor(cleaning_table, &storage);
  const std::vector<std::string> lines = text::ReadLines(in);
  std::vector<std::string> result;
  result.reserve(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    try {
      result.push_back(text::WriteSegmented(
          text::SegmentSyllables(text::Normalize(lines[i], table))));
    } catch (const Error& e) {
      throw Error(e.kind(),
                  in + ":" + std::to_string(i + 1) + ": " + e.message());
    }
  }
  text::WriteLines(out, result);
}

void CmdTagIpa(const std::string& model, const std::string& in,
               const std::string& out) {
  const g2p::CrfModel crf = g2p::CrfModel::Load(model);
  std::vector<std::string> result;
  for (const text::SegmentedLine& line : ReadSegmentedFile(in)) {
    const std::vector<std::string> labels = Transcribe(crf, line.tokens);
    result.push_back(text::WriteSegmented(line.tokens, &labels));
  }
  text::WriteLines(out, result);
}

void CmdAlign(const AlignArgs& args) {
  const auto src = ReadSegmentedFile(args.src);
  const auto tgt = ReadSegmentedFile(args.tgt);
  if (src.size() != tgt.size()) {
    throw Error(ErrorKind::kLineCountMismatch,
                args.src + " and " + args.tgt + " differ in line count");
  }
  std::vector<text::ParallelPair> forward, reverse;
  for (size_t i = 0; i < src.size(); ++i) {
    if (src[i].tokens.empty() || tgt[i].tokens.empty()) continue;
    const std::string id = std::to_string(i + 1);
    forward.push_back({src[i].tokens, tgt[i].tokens, id});
    reverse.push_back({tgt[i].tokens, src[i].tokens, id});
  }
  const align::AlignmentModel fwd = align::TrainAligner(forward, args.config);
  if (!args.model_out.empty()) fwd.Save(args.model_out);
  const bool symmetric = args.heuristic != "forward";
  align::Heuristic heuristic = align::Heuristic::kGrowDiagFinalAnd;
  if (args.heuristic == "intersection") {
    heuristic = align::Heuristic::kIntersection;
  } else if (args.heuristic == "union") {
    heuristic = align::Heuristic::kUnion;
  } else if (symmetric && args.heuristic != "grow-diag-final-and") {
    throw Error(ErrorKind::kUsage, "unknown heuristic " + args.heuristic);
  }
  align::AlignmentModel rev;
  if (symmetric) rev = align::TrainAligner(reverse, args.config);
  std::vector<std::string> lines;
  size_t k = 0;
  for (size_t i = 0; i < src.size(); ++i) {
    if (src[i].tokens.empty() || tgt[i].tokens.empty()) {
      lines.emplace_back();
      continue;
    }
    align::AlignmentLinkSet links = align::ViterbiAlign(fwd, forward[k]);
    if (symmetric) {
      links = align::Symmetrize(
          links, align::ViterbiAlign(rev, reverse[k]).Transposed(), heuristic);
    }
    lines.push_back(links.ToPharaoh());
    ++k;
  }
  text::WriteLines(args.out, lines);
}

void CmdSimulate(const std::string& gt, const std::string& profile_path,
                 const std::string& out_err, const std::string& stats_out,
                 const std::string& crf_model) {
  const noise::NoiseProfile profile = noise::NoiseProfile::FromFile(profile_path);
  std::vector<text::SyllableSequence> sentences;
  for (const auto& line : ReadSegmentedFile(gt)) sentences.push_back(line.tokens);
  std::vector<std::string> vocab = CollectTokens(sentences);
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  noise::ConfusionTable confusions;
  if (profile.confusion_mode == noise::ConfusionMode::kUniform) {
    confusions = noise::BuildUniformConfusions(vocab);
  } else {
    const g2p::CrfModel crf = crf_model.empty()
                                  ? TrainTranscriber(DefaultG2pSeed(), {})
                                  : g2p::CrfModel::Load(crf_model);
    confusions =
        noise::BuildPhoneticConfusions(vocab, crf, profile.phonetic_temperature);
  }
  const noise::GeneratedCorpus corpus =
      noise::GenerateCorpus(sentences, profile, confusions);
  // Lines stay aligned with the input; emptied sentences become blank lines.
  std::vector<std::string> lines(sentences.size());
  for (const text::ParallelPair& p : corpus.pairs) {
    lines[std::stoul(p.id) - 1] = text::WriteSegmented(p.source);
  }
  text::WriteLines(out_err, lines);
  if (!stats_out.empty()) WriteText(stats_out, corpus.stats.ToText());
}

void CmdTrainCrf(const std::string& train, const std::string& out_model,
                 const g2p::CrfHyper& hyper) {
  TrainTranscriber(train, hyper).Save(out_model);
}

void CmdTrainAec(const config::KeyValues& kv, FeatureSetting setting,
                 const std::string& out_checkpoint,
                 const std::string& curve_out) {
  const bool ipa = UsesIpa(setting);
  const bool aligned = UsesAlign(setting);
  const Corpus train = LoadCorpus(kv, "train", ipa, aligned);
  const Corpus valid = LoadCorpus(kv, "valid", ipa, false);
  if (train.source.empty()) {
    throw Error(ErrorKind::kEmptyCorpus, "no usable training pairs");
  }
  if (aligned && train.alignment.empty()) {
    throw Error(ErrorKind::kUsage, "data.train_align is required for " +
                                       std::string(SettingSlug(setting)));
  }
  s2s::ModelConfig mc = s2s::ModelConfig::FromKeyValues(kv);
  mc.use_ipa = ipa;
  if (!aligned) mc.guidance_weight = 0.0;
  const s2s::OptimizerConfig oc = s2s::OptimizerConfig::FromKeyValues(kv);
  s2s::Seq2SeqModel model(
      mc, s2s::Vocab::FromTokens(CollectTokens(train.source)),
      s2s::Vocab::FromTokens(CollectTokens(train.target)),
      s2s::Vocab::FromTokens(CollectLabels(train.ipa)),
      static_cast<uint64_t>(kv.GetInt("model.seed", 1)));
  const s2s::TrainReport report =
      TrainCorrector(&model, train, valid, aligned, oc);
  model.Save(out_checkpoint);
  if (!curve_out.empty()) WriteText(curve_out, CurveTsv(report, oc.valid_every));
}

void CmdCorrect(const std::string& checkpoint, const std::string& in,
                const std::string& out, const std::string& crf_model,
                int beam, int threads) {
  const s2s::Seq2SeqModel model = s2s::Seq2SeqModel::Load(checkpoint);
  const auto lines = ReadSegmentedFile(in);
  std::optional<g2p::CrfModel> crf;
  std::vector<text::SyllableSequence> sources;
  std::vector<std::vector<std::string>> ipa;
  for (const auto& line : lines) {
    sources.push_back(line.tokens);
    std::vector<std::string> labels = line.annotations;
    if (model.config().use_ipa && labels.empty() && !line.tokens.empty()) {
      if (crf_model.empty()) {
        throw Error(ErrorKind::kUsage,
                    "model uses IPA features: annotate the input or pass --crf");
      }
      if (!crf) crf = g2p::CrfModel::Load(crf_model);
      labels = Transcribe(*crf, line.tokens);
    }
    ipa.push_back(std::move(labels));
  }
  std::vector<std::string> result;
  for (const auto& toks : CorrectAll(model, sources, ipa, beam, threads)) {
    result.push_back(JoinTokens(toks));
  }
  text::WriteLines(out, result);
}

void CmdEvaluate(const std::string& ref, const std::string& hyp,
                 const std::string& report) {
  const std::vector<std::string> r = text::ReadLines(ref);
  const std::vector<std::string> h = text::ReadLines(hyp);
  if (r.size() != h.size()) {
    throw Error(ErrorKind::kLineCountMismatch,
                ref + " and " + hyp + " differ in line count");
  }
  std::vector<metrics::EvalPair> pairs;
  for (size_t i = 0; i < r.size(); ++i) {
    pairs.push_back({std::to_string(i + 1),
                     JoinTokens(text::ReadSegmented(r[i]).tokens.tokens()),
                     JoinTokens(text::ReadSegmented(h[i]).tokens.tokens())});
  }
  const metrics::EvalReport rep = metrics::EvaluateCorpus(pairs);
  if (!report.empty()) WriteText(report, rep.ToTsv());
  std::cout << rep.Summary();
}

// --- Pipeline -------------------------------------------------------------

PipelineConfig PipelineConfig::FromKeyValues(const config::KeyValues& kv) {
  PipelineConfig c;
  c.seed = static_cast<uint64_t>(kv.GetInt("run.seed", static_cast<long>(c.seed)));
  c.threads = static_cast<int>(kv.GetInt("run.threads", c.threads));
  c.out_dir = kv.GetString("run.out_dir", c.out_dir);
  c.gt_corpus = kv.GetString("gt.corpus", "");
  c.grammar_sentences = static_cast<size_t>(
      kv.GetInt("gt.sentences", static_cast<long>(c.grammar_sentences)));
  c.valid_fraction = kv.GetDouble("split.valid_fraction", c.valid_fraction);
  c.test_fraction = kv.GetDouble("split.test_fraction", c.test_fraction);
  c.g2p_seed = kv.GetString("data.g2p_seed", DefaultG2pSeed());
  c.cleaning_table = kv.GetString("data.cleaning_table", "");
  c.noise = noise::NoiseProfile::FromKeyValues(kv, "noise.");
  c.noise_copies = static_cast<int>(kv.GetInt("noise.copies", c.noise_copies));
  c.crf.l2_lambda = kv.GetDouble("crf.l2_lambda", c.crf.l2_lambda);
  c.crf.max_iter = static_cast<int>(kv.GetInt("crf.max_iter", c.crf.max_iter));
  c.crf.tol = kv.GetDouble("crf.tol", c.crf.tol);
  c.aligner.iterations =
      static_cast<int>(kv.GetInt("align.iterations", c.aligner.iterations));
  c.aligner.lambda = kv.GetDouble("align.lambda", c.aligner.lambda);
  c.aligner.p0 = kv.GetDouble("align.p0", c.aligner.p0);
  c.aligner.optimize_lambda =
      kv.GetBool("align.optimize_lambda", c.aligner.optimize_lambda);
  c.model = s2s::ModelConfig::FromKeyValues(kv);
  c.guidance_weight = c.model.guidance_weight;
  c.optimizer = s2s::OptimizerConfig::FromKeyValues(kv);
  c.beam = static_cast<int>(kv.GetInt("decode.beam", c.beam));
  const std::string settings =
      kv.GetString("settings", "aec,aec_ipa,aec_align,aec_ipa_align");
  std::stringstream ss(settings);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (!item.empty()) c.settings.push_back(ParseSetting(item));
  }
  c.chrf.char_order = static_cast<int>(kv.GetInt("metrics.char_order", c.chrf.char_order));
  c.chrf.word_order = static_cast<int>(kv.GetInt("metrics.word_order", c.chrf.word_order));
  c.chrf.beta = kv.GetDouble("metrics.beta", c.chrf.beta);
  if (c.valid_fraction <= 0 || c.test_fraction <= 0 ||
      c.valid_fraction + c.test_fraction >= 1) {
    throw Error(ErrorKind::kFormat, "split fractions must be positive and sum below 1");
  }
  if (c.noise_copies < 1 || c.threads < 1 || c.beam < 1 || c.settings.empty()) {
    throw Error(ErrorKind::kFormat,
                "noise.copies, run.threads and decode.beam must be >= 1; "
                "settings must be non-empty");
  }
  return c;
}

config::KeyValues PipelineConfig::ToKeyValues() const {
  config::KeyValues kv;
  kv.Set("run.seed", std::to_string(seed));
  kv.Set("gt.corpus", gt_corpus);
  kv.Set("gt.sentences", std::to_string(grammar_sentences));
  kv.Set("split.valid_fraction", Exact(valid_fraction));
  kv.Set("split.test_fraction", Exact(test_fraction));
  kv.Set("data.g2p_seed", fs::path(g2p_seed).filename().string());
  kv.Set("data.cleaning_table",
         cleaning_table.empty() ? "" : fs::path(cleaning_table).filename().string());
  kv.Set("noise.p_sub", Exact(noise.p_sub));
  kv.Set("noise.p_del", Exact(noise.p_del));
  kv.Set("noise.p_ins", Exact(noise.p_ins));
  kv.Set("noise.confusion_mode",
         noise.confusion_mode == noise::ConfusionMode::kPhonetic ? "phonetic"
                                                                 : "uniform");
  kv.Set("noise.phonetic_temperature", Exact(noise.phonetic_temperature));
  kv.Set("noise.copies", std::to_string(noise_copies));
  kv.Set("crf.l2_lambda", Exact(crf.l2_lambda));
  kv.Set("crf.max_iter", std::to_string(crf.max_iter));
  kv.Set("crf.tol", Exact(crf.tol));
  kv.Set("align.iterations", std::to_string(aligner.iterations));
  kv.Set("align.lambda", Exact(aligner.lambda));
  kv.Set("align.p0", Exact(aligner.p0));
  kv.Set("align.optimize_lambda", aligner.optimize_lambda ? "true" : "false");
  model.ToKeyValues(&kv);
  kv.Set("model.guidance_weight", Exact(guidance_weight));
  optimizer.ToKeyValues(&kv);
  kv.Set("decode.beam", std::to_string(beam));
  std::string names;
  for (FeatureSetting s : settings) {
    if (!names.empty()) names += ',';
    names += SettingSlug(s);
  }
  kv.Set("settings", names);
  kv.Set("metrics.char_order", std::to_string(chrf.char_order));
  kv.Set("metrics.word_order", std::to_string(chrf.word_order));
  kv.Set("metrics.beta", Exact(chrf.beta));
  return kv;
}

std::string FormatTable(const PipelineResult& result) {
  std::ostringstream out;
  out << "setting\twer_percent\tchrf++\trelative_wer_reduction_percent\n";
  auto row = [&out](const SettingResult& r) {
    out << r.label << '\t' << Fixed(100.0 * r.wer, 2) << '\t'
        << Fixed(r.chrf, 4) << '\t'
        << Fixed(100.0 * r.relative_wer_reduction, 2) << '\n';
  };
  row(result.baseline);
  for (const SettingResult& r : result.settings) row(r);
  return out.str();
}

PipelineResult RunPipeline(const PipelineConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  auto log = [&started](const std::string& msg) {
    const double secs =
        std::chrono::duration<double>(Clock::now() - started).count();
    std::fprintf(stderr, "[%7.1fs] %s\n", secs, msg.c_str());
  };
  const fs::path dir(cfg.out_dir);
  Stage("setup", [&] {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::kIoFailure, "cannot create " + cfg.out_dir);
    WriteText((dir / "config.txt").string(), cfg.ToKeyValues().ToText());
  });
  auto path = [&dir](const std::string& name) { return (dir / name).string(); };

  const uint64_t gt_seed = DeriveSeed(cfg.seed, 1);
  const uint64_t split_seed = DeriveSeed(cfg.seed, 2);
  noise::NoiseProfile profile = cfg.noise;
  profile.seed = DeriveSeed(cfg.seed, 3);
  const uint64_t init_seed = DeriveSeed(cfg.seed, 4);
  s2s::OptimizerConfig optimizer = cfg.optimizer;
  optimizer.seed = DeriveSeed(cfg.seed, 5);

  PipelineResult result;

  // Ground truth.
  std::vector<text::SyllableSequence> gt = Stage("generate", [&] {
    std::vector<text::SyllableSequence> out;
    if (!cfg.gt_corpus.empty()) {
      text::CleaningTable storage;
      const text::CleaningTable& table = TableFor(cfg.cleaning_table, &storage);
      for (const std::string& line : text::ReadLines(cfg.gt_corpus)) {
        text::SyllableSequence s =
            text::SegmentSyllables(text::Normalize(line, table));
        if (!s.empty()) out.push_back(std::move(s));
      }
    } else {
      std::set<std::string> seen;
      for (auto& s : noise::GenerateGrammarSentences(
               cfg.grammar_sentences * 4, gt_seed)) {
        if (out.size() == cfg.grammar_sentences) break;
        if (seen.insert(JoinTokens(s.tokens())).second) out.push_back(std::move(s));
      }
      if (out.size() < cfg.grammar_sentences) {
        throw Error(ErrorKind::kEmptyCorpus,
                    "grammar yields too few distinct sentences");
      }
    }
    if (out.size() < 3) {
      throw Error(ErrorKind::kEmptyCorpus, "need at least 3 GT sentences");
    }
    std::vector<std::string> lines;
    for (const auto& s : out) lines.push_back(text::WriteSegmented(s));
    text::WriteLines(path("gt.txt"), lines);
    return out;
  });
  result.gt_sentences = gt.size();
  log("ground truth: " + std::to_string(gt.size()) + " sentences");

  // Deterministic split: test, then valid, then train, over a shuffled order.
  std::vector<size_t> order(gt.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  {
    noise::Rng rng(split_seed, 0);
    for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.Below(i)]);
  }
  const size_t n_test = std::max<size_t>(1, static_cast<size_t>(cfg.test_fraction * gt.size()));
  const size_t n_valid = std::max<size_t>(1, static_cast<size_t>(cfg.valid_fraction * gt.size()));
  auto slice = [&](size_t from, size_t to) {
    std::vector<text::SyllableSequence> out;
    for (size_t i = from; i < to; ++i) out.push_back(gt[order[i]]);
    return out;
  };
  const auto test_gt = slice(0, n_test);
  const auto valid_gt = slice(n_test, n_test + n_valid);
  const auto train_gt = slice(n_test + n_valid, gt.size());

  // Transcriber.
  const g2p::CrfModel crf = Stage("train-crf", [&] {
    g2p::CrfModel m = TrainTranscriber(cfg.g2p_seed, cfg.crf);
    m.Save(path("g2p.crf"));
    return m;
  });
  log("transcriber trained");

  // Error channel.
  Corpus train, valid, test;
  Stage("simulate", [&] {
    std::vector<std::string> vocab = CollectTokens(gt);
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    const noise::ConfusionTable confusions =
        profile.confusion_mode == noise::ConfusionMode::kPhonetic
            ? noise::BuildPhoneticConfusions(vocab, crf,
                                             profile.phonetic_temperature)
            : noise::BuildUniformConfusions(vocab);
    noise::ChannelStats total;
    auto run = [&](const std::vector<text::SyllableSequence>& split,
                   uint64_t first, Corpus* into) {
      const noise::GeneratedCorpus g =
          noise::GenerateCorpus(split, profile, confusions, first);
      for (const auto& p : g.pairs) {
        into->source.push_back(p.source);
        into->target.push_back(p.target);
      }
      total.gt_tokens += g.stats.gt_tokens;
      total.substitutions += g.stats.substitutions;
      total.deletions += g.stats.deletions;
      total.insertions += g.stats.insertions;
      total.empty_outputs += g.stats.empty_outputs;
    };
    run(test_gt, 0, &test);
    run(valid_gt, n_test, &valid);
    for (int c = 0; c < cfg.noise_copies; ++c) {
      run(train_gt, n_test + n_valid + static_cast<uint64_t>(c) * gt.size(), &train);
    }
    result.channel = total;
    WriteText(path("channel_stats.txt"), total.ToText());
    for (auto [name, corpus] : {std::pair{"train", &train}, std::pair{"valid", &valid},
                                std::pair{"test", &test}}) {
      std::vector<std::string> src, tgt;
      for (size_t i = 0; i < corpus->source.size(); ++i) {
        src.push_back(text::WriteSegmented(corpus->source[i]));
        tgt.push_back(text::WriteSegmented(corpus->target[i]));
      }
      text::WriteLines(path(std::string(name) + ".err.txt"), src);
      text::WriteLines(path(std::string(name) + ".gt.txt"), tgt);
    }
  });
  result.train_pairs = train.source.size();
  result.valid_pairs = valid.source.size();
  result.test_pairs = test.source.size();
  log("simulated " + std::to_string(result.train_pairs) + "/" +
      std::to_string(result.valid_pairs) + "/" +
      std::to_string(result.test_pairs) + " train/valid/test pairs");

  // IPA transcription of the erroneous side.
  Stage("tag", [&] {
    for (auto [name, corpus] : {std::pair{"train", &train}, std::pair{"valid", &valid},
                                std::pair{"test", &test}}) {
      std::vector<std::string> lines;
      for (const auto& s : corpus->source) {
        corpus->ipa.push_back(Transcribe(crf, s));
        lines.push_back(text::WriteSegmented(s, &corpus->ipa.back()));
      }
      text::WriteLines(path(std::string(name) + ".err.ipa.txt"), lines);
    }
  });
  log("transcribed");

  // Err -> GT alignment of the training pairs.
  Stage("align", [&] {
    std::vector<text::ParallelPair> pairs;
    for (size_t i = 0; i < train.source.size(); ++i) {
      pairs.push_back({train.source[i], train.target[i], std::to_string(i + 1)});
    }
    const align::AlignmentModel model = align::TrainAligner(pairs, cfg.aligner);
    model.Save(path("align.model"));
    std::vector<std::string> lines;
    for (const auto& p : pairs) {
      train.alignment.push_back(align::ViterbiAlign(model, p));
      lines.push_back(train.alignment.back().ToPharaoh());
    }
    text::WriteLines(path("train.align.txt"), lines);
  });
  log("aligned");

  // Baseline: the uncorrected test side.
  auto evaluate = [&](const std::vector<std::vector<std::string>>& hyps,
                      const std::string& report_name) {
    std::vector<metrics::EvalPair> pairs;
    for (size_t i = 0; i < test.source.size(); ++i) {
      pairs.push_back({std::to_string(i + 1), JoinTokens(test.target[i].tokens()),
                       JoinTokens(hyps[i])});
    }
    const metrics::EvalReport rep = metrics::EvaluateCorpus(pairs, cfg.chrf);
    WriteText(path(report_name), rep.ToTsv());
    return rep;
  };
  Stage("evaluate", [&] {
    std::vector<std::vector<std::string>> hyps;
    for (const auto& s : test.source) hyps.push_back(s.tokens());
    const metrics::EvalReport rep = evaluate(hyps, "eval.baseline.tsv");
    result.baseline = {"No AEC (Baseline)", rep.corpus_wer, rep.corpus_chrf, 0.0, {}};
  });
  log("baseline WER " + Fixed(100 * result.baseline.wer, 2));

  const s2s::Vocab source_vocab = s2s::Vocab::FromTokens(CollectTokens(train.source));
  const s2s::Vocab target_vocab = s2s::Vocab::FromTokens(CollectTokens(train.target));
  const s2s::Vocab ipa_vocab = s2s::Vocab::FromTokens(CollectLabels(train.ipa));

  for (FeatureSetting setting : cfg.settings) {
    const std::string slug = SettingSlug(setting);
    s2s::ModelConfig mc = cfg.model;
    mc.use_ipa = UsesIpa(setting);
    mc.guidance_weight = UsesAlign(setting) ? cfg.guidance_weight : 0.0;
    s2s::Seq2SeqModel model(mc, source_vocab, target_vocab, ipa_vocab, init_seed);
    SettingResult r;
    r.label = SettingLabel(setting);
    r.training = Stage("train:" + slug, [&] {
      s2s::TrainReport rep =
          TrainCorrector(&model, train, valid, UsesAlign(setting), optimizer);
      model.Save(path(slug + ".ckpt"));
      WriteText(path(slug + ".curve.tsv"), CurveTsv(rep, optimizer.valid_every));
      return rep;
    });
    log("trained " + slug + " (" + std::to_string(r.training.steps) +
        " steps, best valid CE " + Fixed(r.training.best_valid_ce, 4) + ")");
    const auto hyps = Stage("correct:" + slug, [&] {
      auto out = CorrectAll(model, test.source, test.ipa, cfg.beam, cfg.threads);
      std::vector<std::string> lines;
      for (const auto& h : out) lines.push_back(JoinTokens(h));
      text::WriteLines(path("test." + slug + ".hyp.txt"), lines);
      return out;
    });
    Stage("evaluate:" + slug, [&] {
      const metrics::EvalReport rep = evaluate(hyps, "eval." + slug + ".tsv");
      r.wer = rep.corpus_wer;
      r.chrf = rep.corpus_chrf;
      r.relative_wer_reduction =
          result.baseline.wer > 0 ? (result.baseline.wer - r.wer) / result.baseline.wer
                                  : 0.0;
    });
    log(slug + ": WER " + Fixed(100 * r.wer, 2) + " chrF++ " + Fixed(r.chrf, 4));
    result.settings.push_back(std::move(r));
  }

  Stage("report", [&] {
    result.table_path = path("table.tsv");
    WriteText(result.table_path, FormatTable(result));

    nlohmann::json manifest;
    manifest["tool"] = "aec";
    manifest["version"] = kVersion;
    manifest["seeds"] = {{"root", cfg.seed},
                         {"grammar", gt_seed},
                         {"split", split_seed},
                         {"noise", profile.seed},
                         {"model_init", init_seed},
                         {"training", optimizer.seed}};
    nlohmann::json inputs = nlohmann::json::array();
    auto add_input = [&inputs](const std::string& role, const std::string& p) {
      inputs.push_back({{"role", role},
                        {"file", fs::path(p).filename().string()},
                        {"sha256", Sha256File(p)}});
    };
    add_input("g2p_seed", cfg.g2p_seed);
    if (!cfg.gt_corpus.empty()) add_input("gt_corpus", cfg.gt_corpus);
    if (!cfg.cleaning_table.empty()) add_input("cleaning_table", cfg.cleaning_table);
    manifest["inputs"] = inputs;
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (entry.is_regular_file() && name != "manifest.json") files.push_back(name);
    }
    std::sort(files.begin(), files.end());
    nlohmann::json outputs = nlohmann::json::array();
    for (const std::string& name : files) {
      outputs.push_back({{"file", name},
                         {"bytes", fs::file_size(dir / name)},
                         {"sha256", Sha256File(path(name))}});
    }
    manifest["outputs"] = outputs;
    manifest["counts"] = {{"gt_sentences", result.gt_sentences},
                          {"train_pairs", result.train_pairs},
                          {"valid_pairs", result.valid_pairs},
                          {"test_pairs", result.test_pairs}};
    result.manifest_path = path("manifest.json");
    WriteText(result.manifest_path, manifest.dump(2) + "\n");
  });
  log("done");
  return result;
}

}  // namespace aec::cli
