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

#include "test_support.h"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>

#include "aec/grammar.h"
#include "aec/utf8.h"

namespace aec::testing {

// --- Metrics ---------------------------------------------------------------

int RecursiveEditDistance(const std::vector<std::string>& a,
                          const std::vector<std::string>& b) {
  std::vector<std::vector<int>> memo(a.size() + 1,
                                     std::vector<int>(b.size() + 1, -1));
  std::function<int(size_t, size_t)> d = [&](size_t i, size_t j) -> int {
    if (i == a.size()) return static_cast<int>(b.size() - j);
    if (j == b.size()) return static_cast<int>(a.size() - i);
    int& slot = memo[i][j];
    if (slot >= 0) return slot;
    const int sub = d(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    const int del = d(i + 1, j) + 1;
    const int ins = d(i, j + 1) + 1;
    slot = std::min({sub, del, ins});
    return slot;
  };
  return d(0, 0);
}

std::vector<std::vector<std::string>> AllTokenLists(
    const std::vector<std::string>& alphabet, int max_len) {
  std::vector<std::vector<std::string>> out = {{}};
  std::vector<std::vector<std::string>> frontier = {{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& prefix : frontier) {
      for (const std::string& sym : alphabet) {
        next.push_back(prefix);
        next.back().push_back(sym);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

namespace {

std::map<std::string, long> Substrings(const std::string& s, size_t n) {
  std::map<std::string, long> counts;
  for (size_t i = 0; i + n <= s.size(); ++i) ++counts[s.substr(i, n)];
  return counts;
}

std::map<std::vector<std::string>, long> WordGrams(
    const std::vector<std::string>& words, size_t n) {
  std::map<std::vector<std::string>, long> counts;
  for (size_t i = 0; i + n <= words.size(); ++i) {
    ++counts[std::vector<std::string>(words.begin() + i, words.begin() + i + n)];
  }
  return counts;
}

template <typename Map>
std::array<long, 3> Clipped(const Map& ref, const Map& hyp) {
  long r = 0, h = 0, m = 0;
  for (const auto& [k, c] : ref) r += c;
  for (const auto& [k, c] : hyp) {
    h += c;
    auto it = ref.find(k);
    if (it != ref.end()) m += std::min(c, it->second);
  }
  return {h, r, m};
}

std::vector<std::string> SplitOnSpace(std::string_view s) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) words.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) words.push_back(cur);
  return words;
}

}  // namespace

double BruteChrf(std::string_view reference, std::string_view hypothesis,
                 const metrics::ChrfParams& params) {
  std::string ref_chars, hyp_chars;
  for (char c : reference) if (c != ' ') ref_chars += c;
  for (char c : hypothesis) if (c != ' ') hyp_chars += c;
  const std::vector<std::string> ref_words = SplitOnSpace(reference);
  const std::vector<std::string> hyp_words = SplitOnSpace(hypothesis);

  std::vector<std::array<long, 3>> orders;
  for (int n = 1; n <= params.char_order; ++n) {
    orders.push_back(
        Clipped(Substrings(ref_chars, n), Substrings(hyp_chars, n)));
  }
  for (int n = 1; n <= params.word_order; ++n) {
    orders.push_back(Clipped(WordGrams(ref_words, n), WordGrams(hyp_words, n)));
  }
  const double b2 = params.beta * params.beta;
  double sum = 0.0;
  int counted = 0;
  for (const auto& [h, r, m] : orders) {
    if (h == 0 && r == 0) continue;
    ++counted;
    if (m == 0) continue;
    const double p = double(m) / h;
    const double rc = double(m) / r;
    sum += (1 + b2) * p * rc / (b2 * p + rc);
  }
  return counted == 0 ? 1.0 : sum / counted;
}

std::string RandomAsciiText(noise::Rng& rng, int max_len) {
  static const char kAlphabet[] = "abcab  d";
  const size_t len = rng.Below(static_cast<size_t>(max_len) + 1);
  std::string s;
  for (size_t i = 0; i < len; ++i) s += kAlphabet[rng.Below(sizeof(kAlphabet) - 1)];
  return s;
}

// --- CRF -------------------------------------------------------------------

std::vector<g2p::TaggedSequence> RandomTaggedData(int count, int max_len,
                                                  int vocab, int labels,
                                                  noise::Rng& rng) {
  std::vector<g2p::TaggedSequence> data;
  for (int c = 0; c < count; ++c) {
    const int len = 1 + static_cast<int>(rng.Below(max_len));
    std::vector<std::string> toks;
    g2p::TaggedSequence seq;
    for (int t = 0; t < len; ++t) {
      toks.push_back("t" + std::to_string(rng.Below(vocab)));
      seq.labels.push_back(static_cast<int>(rng.Below(labels)));
    }
    seq.tokens = text::SyllableSequence(std::move(toks));
    data.push_back(std::move(seq));
  }
  return data;
}

g2p::CrfModel RandomCrf(const std::vector<g2p::TaggedSequence>& data,
                        int num_labels, double l2, noise::Rng& rng) {
  std::vector<std::string> names;
  for (int y = 0; y < num_labels; ++y) names.push_back("L" + std::to_string(y));
  g2p::FeatureTemplate templates(
      {{g2p::FeatureKind::kBias, {}, 0},
       {g2p::FeatureKind::kIdentity, {-1, 0, 1}, 0}},
      1);
  g2p::CrfModel model(g2p::TagSet(names), templates);
  for (const g2p::TaggedSequence& s : data) {
    for (size_t t = 0; t < s.tokens.size(); ++t) {
      for (const std::string& k : g2p::ExtractFeatures(s.tokens, t, templates)) {
        model.AddFeature(k);
      }
    }
  }
  model.ResizeWeights();
  model.set_l2_lambda(l2);
  Eigen::VectorXd w(model.num_weights());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = 2.0 * rng.Uniform() - 1.0;
  model.SetWeights(w);
  return model;
}

namespace {

// Calls fn(path) for every label path of length len.
void ForEachPath(int len, int labels,
                 const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> path(len, 0);
  while (true) {
    fn(path);
    int t = len - 1;
    while (t >= 0 && path[t] == labels - 1) path[t--] = 0;
    if (t < 0) return;
    ++path[t];
  }
}

double PathScore(const g2p::CrfModel& model,
                 const std::vector<std::vector<int>>& feats,
                 const std::vector<int>& path) {
  double s = 0.0;
  for (size_t t = 0; t < path.size(); ++t) {
    for (int f : feats[t]) s += model.emission()(f, path[t]);
    if (t > 0) s += model.transition()(path[t - 1], path[t]);
  }
  return s;
}

}  // namespace

g2p::Objective BruteCrfObjective(const g2p::CrfModel& model,
                                 const std::vector<g2p::TaggedSequence>& data) {
  const int L = model.num_labels();
  const int F = model.num_features();
  Eigen::MatrixXd ge = Eigen::MatrixXd::Zero(F, L);
  Eigen::MatrixXd gt = Eigen::MatrixXd::Zero(L, L);
  double nll = 0.0;
  for (const g2p::TaggedSequence& s : data) {
    const auto feats = model.Featurize(s.tokens);
    const int len = static_cast<int>(s.tokens.size());
    std::vector<std::vector<int>> paths;
    std::vector<double> scores;
    ForEachPath(len, L, [&](const std::vector<int>& p) {
      paths.push_back(p);
      scores.push_back(PathScore(model, feats, p));
    });
    const double mx = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double sc : scores) z += std::exp(sc - mx);
    const double log_z = mx + std::log(z);
    nll += log_z - PathScore(model, feats, s.labels);
    for (size_t k = 0; k < paths.size(); ++k) {
      const double p = std::exp(scores[k] - log_z);
      for (int t = 0; t < len; ++t) {
        for (int f : feats[t]) ge(f, paths[k][t]) += p;
        if (t > 0) gt(paths[k][t - 1], paths[k][t]) += p;
      }
    }
    for (int t = 0; t < len; ++t) {
      for (int f : feats[t]) ge(f, s.labels[t]) -= 1.0;
      if (t > 0) gt(s.labels[t - 1], s.labels[t]) -= 1.0;
    }
  }
  const double inv = 1.0 / static_cast<double>(data.size());
  g2p::Objective obj;
  obj.gradient.resize(model.num_weights());
  Eigen::Index k = 0;
  for (int f = 0; f < F; ++f) {
    for (int y = 0; y < L; ++y) obj.gradient[k++] = ge(f, y) * inv;
  }
  for (int p = 0; p < L; ++p) {
    for (int y = 0; y < L; ++y) obj.gradient[k++] = gt(p, y) * inv;
  }
  const Eigen::VectorXd w = model.Weights();
  obj.value = nll * inv + 0.5 * model.l2_lambda() * w.squaredNorm();
  obj.gradient += model.l2_lambda() * w;
  return obj;
}

std::vector<int> BruteCrfArgmax(const g2p::CrfModel& model,
                                const text::SyllableSequence& tokens) {
  const auto feats = model.Featurize(tokens);
  std::vector<int> best;
  double best_score = -std::numeric_limits<double>::infinity();
  ForEachPath(static_cast<int>(tokens.size()), model.num_labels(),
              [&](const std::vector<int>& p) {
                const double s = PathScore(model, feats, p);
                if (s > best_score) {
                  best_score = s;
                  best = p;
                }
              });
  return best;
}

// --- Numerics --------------------------------------------------------------

Eigen::VectorXd CentralDifference(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double RelativeError(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double denom = std::max(a.norm() + b.norm(), 1e-300);
  return (a - b).norm() / denom;
}

// --- Aligner ---------------------------------------------------------------

SyntheticAligner MakeSyntheticAligner(int source_vocab, int target_vocab,
                                      double lambda, double p0, double spread,
                                      noise::Rng& rng) {
  SyntheticAligner m;
  m.source_vocab = source_vocab;
  m.target_vocab = target_vocab;
  m.lambda = lambda;
  m.p0 = p0;
  m.translation = Eigen::MatrixXd::Zero(source_vocab, target_vocab);
  for (int s = 0; s < source_vocab; ++s) {
    for (int t = 0; t < target_vocab; ++t) m.translation(s, t) = spread * rng.Uniform();
    m.translation(s, s % target_vocab) += 1.0;
    m.translation.row(s) /= m.translation.row(s).sum();
  }
  m.null_emission = Eigen::VectorXd::Constant(target_vocab, 1.0 / target_vocab);
  return m;
}

namespace {

int SampleIndex(const std::vector<double>& probs, noise::Rng& rng) {
  double u = rng.Uniform();
  for (size_t i = 0; i < probs.size(); ++i) {
    u -= probs[i];
    if (u < 0) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

std::vector<SampledPair> SampleAlignedCorpus(const SyntheticAligner& model,
                                             int count, int min_len,
                                             int max_len, noise::Rng& rng) {
  std::vector<SampledPair> out;
  for (int c = 0; c < count; ++c) {
    const int m = min_len + static_cast<int>(rng.Below(max_len - min_len + 1));
    const int n = m;
    std::vector<int> src(m);
    std::vector<std::string> src_tok, tgt_tok;
    for (int i = 0; i < m; ++i) {
      src[i] = static_cast<int>(rng.Below(model.source_vocab));
      src_tok.push_back("s" + std::to_string(src[i]));
    }
    SampledPair sp;
    for (int j = 1; j <= n; ++j) {
      // Independent prior: null with p0, else softmax of the diagonal tension.
      std::vector<double> prior(m + 1);
      prior[0] = model.p0;
      double z = 0.0;
      for (int i = 1; i <= m; ++i) {
        prior[i] = std::exp(-model.lambda *
                            std::fabs(double(i) / m - double(j) / n));
        z += prior[i];
      }
      for (int i = 1; i <= m; ++i) prior[i] *= (1.0 - model.p0) / z;
      const int a = SampleIndex(prior, rng);
      std::vector<double> emit(model.target_vocab);
      for (int t = 0; t < model.target_vocab; ++t) {
        emit[t] = a == 0 ? model.null_emission[t]
                         : model.translation(src[a - 1], t);
      }
      tgt_tok.push_back("t" + std::to_string(SampleIndex(emit, rng)));
      sp.generating.push_back(a - 1);
    }
    sp.pair.source = text::SyllableSequence(std::move(src_tok));
    sp.pair.target = text::SyllableSequence(std::move(tgt_tok));
    sp.pair.id = std::to_string(c);
    out.push_back(std::move(sp));
  }
  return out;
}

align::AlignmentModel GeneratingModel(const SyntheticAligner& model,
                                      const std::vector<SampledPair>& corpus) {
  std::vector<text::ParallelPair> pairs;
  for (const SampledPair& sp : corpus) pairs.push_back(sp.pair);
  align::AlignmentModel out;
  out.Initialize(pairs);
  out.lambda = model.lambda;
  out.p0 = model.p0;
  for (int s = align::AlignmentModel::kNull; s < out.num_sources(); ++s) {
    out.ClearRow(s);
  }
  for (int t = 0; t < model.target_vocab; ++t) {
    const int ti = out.target_vocab.Find("t" + std::to_string(t));
    if (ti < 0) continue;
    out.SetProb(align::AlignmentModel::kNull, ti, model.null_emission[t]);
    for (int s = 0; s < model.source_vocab; ++s) {
      const int si = out.source_vocab.Find("s" + std::to_string(s));
      if (si >= 0) out.SetProb(si, ti, model.translation(s, t));
    }
  }
  return out;
}

double RecoveryPrecision(const align::AlignmentModel& model,
                         const std::vector<SampledPair>& corpus) {
  long predicted = 0, correct = 0;
  for (const SampledPair& sp : corpus) {
    const align::AlignmentLinkSet links = align::ViterbiAlign(model, sp.pair);
    for (const align::Link& l : links.links()) {
      ++predicted;
      correct += sp.generating[l.target] == l.source;
    }
  }
  return predicted ? static_cast<double>(correct) / predicted : 0.0;
}

// --- Noise channel ---------------------------------------------------------

align::AlignmentLinkSet AlignmentFromOps(const std::vector<noise::EditOp>& ops,
                                         int err_length, int gt_length) {
  align::AlignmentLinkSet links(err_length, gt_length);
  int e = 0, g = 0;
  for (noise::EditOp op : ops) {
    switch (op) {
      case noise::EditOp::kKeep:
      case noise::EditOp::kSubstitute:
        links.Add(e++, g++);
        break;
      case noise::EditOp::kDelete:
        ++g;
        break;
      case noise::EditOp::kInsert:
        ++e;
        break;
    }
  }
  if (e != err_length || g != gt_length) {
    throw std::logic_error("edit operations do not cover both sides");
  }
  return links;
}

std::vector<ToyPair> ToyCorruptedCorpus(size_t count, uint64_t seed,
                                        const noise::NoiseProfile& profile) {
  const std::vector<text::SyllableSequence> gt =
      noise::GenerateGrammarSentences(count, seed);
  const noise::ConfusionTable confusions =
      noise::BuildUniformConfusions(noise::GrammarVocabulary());
  const noise::Unigram unigram(gt);
  noise::Rng rng(seed, 3);
  std::vector<ToyPair> out;
  for (const text::SyllableSequence& s : gt) {
    noise::CorruptResult r = noise::Corrupt(s, profile, confusions, unigram, rng);
    if (r.empty) continue;
    ToyPair p;
    p.truth = AlignmentFromOps(r.ops, static_cast<int>(r.tokens.size()),
                               static_cast<int>(s.size()));
    p.err = std::move(r.tokens);
    p.gt = s;
    out.push_back(std::move(p));
  }
  return out;
}

// --- Transformer -----------------------------------------------------------

namespace {

std::string FirstCodepoint(const std::string& syllable) {
  const std::u32string cps = utf8::Decode(syllable);
  return cps.empty() ? std::string() : utf8::Encode(cps.substr(0, 1));
}

}  // namespace

ToyTask MakeToyTask(const std::vector<ToyPair>& pairs,
                    const s2s::ModelConfig& config, uint64_t seed) {
  std::vector<std::string> src, tgt, ipa;
  for (const ToyPair& p : pairs) {
    for (const std::string& t : p.err.tokens()) {
      src.push_back(t);
      ipa.push_back(FirstCodepoint(t));
    }
    for (const std::string& t : p.gt.tokens()) tgt.push_back(t);
  }
  ToyTask task{s2s::Seq2SeqModel(config, s2s::Vocab::FromTokens(src),
                                 s2s::Vocab::FromTokens(tgt),
                                 s2s::Vocab::FromTokens(ipa), seed),
               {}};
  for (const ToyPair& p : pairs) {
    s2s::TrainingExample e;
    e.source = task.model.source_vocab().Encode(p.err.tokens());
    std::vector<std::string> labels;
    for (const std::string& t : p.err.tokens()) labels.push_back(FirstCodepoint(t));
    e.source_ipa = s2s::IpaIds(task.model, labels, p.err.size());
    e.target = task.model.target_vocab().Encode(p.gt.tokens());
    e.alignment = p.truth;
    task.examples.push_back(std::move(e));
  }
  return task;
}

std::vector<GradientCheck> CheckGradients(
    s2s::Seq2SeqModel& model, const std::vector<s2s::TrainingExample>& batch,
    double h) {
  model.ZeroGrad();
  s2s::TrainingLoss(model, batch, s2s::Mode::kEval, nullptr, true);
  std::vector<GradientCheck> out;
  for (nn::Parameter* p : model.Parameters()) {
    const Eigen::Map<const Eigen::VectorXd> analytic(p->grad.data(),
                                                     p->grad.size());
    const Eigen::VectorXd a = analytic;
    const Eigen::VectorXd x =
        Eigen::Map<const Eigen::VectorXd>(p->value.data(), p->value.size());
    auto loss_at = [&](const Eigen::VectorXd& v) {
      Eigen::Map<Eigen::VectorXd>(p->value.data(), p->value.size()) = v;
      const double l =
          s2s::TrainingLoss(model, batch, s2s::Mode::kEval, nullptr, false)
              .total;
      return l;
    };
    const Eigen::VectorXd numeric = CentralDifference(loss_at, x, h);
    Eigen::Map<Eigen::VectorXd>(p->value.data(), p->value.size()) = x;
    GradientCheck c;
    c.group = p->name;
    c.relative_error = RelativeError(a, numeric);
    c.max_abs_gradient = a.lpNorm<Eigen::Infinity>();
    c.max_abs_numeric = numeric.lpNorm<Eigen::Infinity>();
    out.push_back(c);
  }
  model.ZeroGrad();
  return out;
}

CausalityResult CausalityProbe(const s2s::Seq2SeqModel& model,
                               const s2s::TrainingExample& example, size_t k,
                               int replacement) {
  s2s::TrainingExample changed = example;
  changed.target.at(k) = replacement;
  const nn::Matrix a = s2s::Forward(model, {example}, s2s::Mode::kEval).logits[0];
  const nn::Matrix b = s2s::Forward(model, {changed}, s2s::Mode::kEval).logits[0];
  CausalityResult r;
  for (Eigen::Index row = 0; row < a.rows(); ++row) {
    const double d = (a.row(row) - b.row(row)).cwiseAbs().maxCoeff();
    if (row <= static_cast<Eigen::Index>(k)) {
      r.max_change_before = std::max(r.max_change_before, d);
    } else {
      r.max_change_after = std::max(r.max_change_after, d);
    }
  }
  return r;
}

AttentionAgreement MeasureAttentionAgreement(
    const s2s::Seq2SeqModel& model,
    const std::vector<s2s::TrainingExample>& examples) {
  AttentionAgreement out;
  const size_t kChunk = 32;
  for (size_t start = 0; start < examples.size(); start += kChunk) {
    const std::vector<s2s::TrainingExample> batch(
        examples.begin() + start,
        examples.begin() + std::min(examples.size(), start + kChunk));
    const s2s::ForwardResult fr = s2s::Forward(model, batch, s2s::Mode::kEval);
    for (size_t b = 0; b < batch.size(); ++b) {
      const nn::Matrix& w = fr.attention[b].weights;
      const align::AlignmentLinkSet& links = batch[b].alignment;
      for (int j = 0; j < links.target_length(); ++j) {
        bool supervised = false;
        for (const align::Link& l : links.links()) supervised |= l.target == j;
        if (!supervised) continue;
        Eigen::Index arg = 0;
        w.row(j).maxCoeff(&arg);
        ++out.supervised;
        if (links.Contains(static_cast<int>(arg), j)) ++out.agree;
      }
    }
  }
  return out;
}

// --- Files -----------------------------------------------------------------

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << contents;
}

std::string MakeTempDir(const std::string& tag) {
  std::string templ =
      (std::filesystem::temp_directory_path() / ("aec_" + tag + "_XXXXXX"))
          .string();
  if (mkdtemp(templ.data()) == nullptr) {
    throw std::runtime_error("mkdtemp failed for " + templ);
  }
  return templ;
}

int RunCommand(const std::string& command, std::string* output) {
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed");
  std::string text;
  std::array<char, 4096> buf;
  size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    text.append(buf.data(), got);
  }
  const int status = pclose(pipe);
  if (output != nullptr) *output = std::move(text);
  return WIFEXITED(status) ? WEXITSTATUS(status) : 128;
}

}  // namespace aec::testing
