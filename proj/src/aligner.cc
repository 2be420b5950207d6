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

#include "aec/aligner.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "aec/common.h"
#include "aec/utf8.h"

namespace aec::align {

namespace {

struct IndexedPair {
  std::vector<int> source;
  std::vector<int> target;
};

IndexedPair Index(const AlignmentModel& model, const text::ParallelPair& p) {
  IndexedPair ip;
  for (const std::string& s : p.source.tokens()) {
    ip.source.push_back(model.source_vocab.Find(s));
  }
  for (const std::string& t : p.target.tokens()) {
    ip.target.push_back(model.target_vocab.Find(t));
  }
  return ip;
}

// Unnormalized posterior weights for target position j (1-based); returns
// their sum.
double ColumnWeights(const AlignmentModel& model, const IndexedPair& ip,
                     int j, std::vector<double>* weights) {
  const int m = static_cast<int>(ip.source.size());
  const int n = static_cast<int>(ip.target.size());
  const std::vector<double> prior =
      AlignmentPrior(j, m, n, model.lambda, model.p0);
  const int t = ip.target[j - 1];
  weights->assign(m + 1, 0.0);
  double sum = 0.0;
  if (t >= 0) {
    (*weights)[0] = prior[0] * model.Prob(AlignmentModel::kNull, t);
    sum += (*weights)[0];
    for (int i = 1; i <= m; ++i) {
      const int s = ip.source[i - 1];
      (*weights)[i] = s >= 0 ? prior[i] * model.Prob(s, t) : 0.0;
      sum += (*weights)[i];
    }
  }
  return sum;
}

struct LambdaStats {
  // Per target position: posterior mass on real source words, and the
  // feature values of each source position.
  std::vector<double> mass;
  std::vector<std::vector<double>> features;
  double empirical = 0.0;  // sum of posterior * feature
  double tokens = 0.0;
};

LambdaStats CollectLambdaStats(const AlignmentModel& model,
                               const std::vector<text::ParallelPair>& corpus) {
  LambdaStats st;
  std::vector<double> w;
  for (const text::ParallelPair& p : corpus) {
    const IndexedPair ip = Index(model, p);
    const int m = static_cast<int>(ip.source.size());
    const int n = static_cast<int>(ip.target.size());
    for (int j = 1; j <= n; ++j) {
      const double sum = ColumnWeights(model, ip, j, &w);
      st.tokens += 1.0;
      if (sum <= 0.0) continue;
      double mass = 0.0;
      std::vector<double> h(m);
      for (int i = 1; i <= m; ++i) {
        h[i - 1] = DiagonalFeature(i, j, m, n);
        const double post = w[i] / sum;
        mass += post;
        st.empirical += post * h[i - 1];
      }
      st.mass.push_back(mass);
      st.features.push_back(std::move(h));
    }
  }
  return st;
}

// Returns the lambda-dependent part of the expected complete-data
// log-likelihood and stores its derivative in grad.
double LambdaObjective(const LambdaStats& st, double lambda, double* grad) {
  double value = lambda * st.empirical;
  double expected = 0.0;
  for (size_t k = 0; k < st.mass.size(); ++k) {
    const std::vector<double>& h = st.features[k];
    double z = 0.0;
    double zh = 0.0;
    // h <= 0 and the maximum is close to 0, so exp does not overflow.
    double mx = -1e300;
    for (double v : h) mx = std::max(mx, lambda * v);
    for (double v : h) {
      const double e = std::exp(lambda * v - mx);
      z += e;
      zh += e * v;
    }
    value -= st.mass[k] * (mx + std::log(z));
    expected += st.mass[k] * zh / z;
  }
  if (grad != nullptr) *grad = st.empirical - expected;
  return value;
}

}  // namespace

AlignmentLinkSet::AlignmentLinkSet(int source_length, int target_length)
    : m_(source_length), n_(target_length) {}

void AlignmentLinkSet::Add(int source, int target) {
  if (source < 0 || source >= m_ || target < 0 || target >= n_) {
    throw Error(ErrorKind::kDimMismatch,
                "link " + std::to_string(source) + "-" +
                    std::to_string(target) + " outside " + std::to_string(m_) +
                    "x" + std::to_string(n_));
  }
  const Link link{source, target};
  auto it = std::lower_bound(links_.begin(), links_.end(), link);
  if (it == links_.end() || *it != link) links_.insert(it, link);
}

bool AlignmentLinkSet::Contains(int source, int target) const {
  return std::binary_search(links_.begin(), links_.end(),
                            Link{source, target});
}

AlignmentLinkSet AlignmentLinkSet::Transposed() const {
  AlignmentLinkSet t(n_, m_);
  for (const Link& l : links_) t.Add(l.target, l.source);
  return t;
}

std::string AlignmentLinkSet::ToPharaoh() const {
  std::string out;
  for (const Link& l : links_) {
    if (!out.empty()) out += ' ';
    out += std::to_string(l.source) + "-" + std::to_string(l.target);
  }
  return out;
}

AlignmentLinkSet AlignmentLinkSet::FromPharaoh(std::string_view line,
                                               int source_length,
                                               int target_length) {
  AlignmentLinkSet set(source_length, target_length);
  for (const std::string& field : utf8::SplitSpaces(line)) {
    const size_t dash = field.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == field.size()) {
      throw Error(ErrorKind::kFormat, "bad Pharaoh link '" + field + "'");
    }
    try {
      set.Add(std::stoi(field.substr(0, dash)), std::stoi(field.substr(dash + 1)));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::kFormat, "bad Pharaoh link '" + field + "'");
    }
  }
  return set;
}

int Vocabulary::Add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

int Vocabulary::Find(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

void AlignmentModel::Initialize(const std::vector<text::ParallelPair>& corpus) {
  for (const text::ParallelPair& p : corpus) {
    for (const std::string& s : p.source.tokens()) source_vocab.Add(s);
    for (const std::string& t : p.target.tokens()) target_vocab.Add(t);
  }
  table_.assign(source_vocab.size() + 1, {});
  for (const text::ParallelPair& p : corpus) {
    const IndexedPair ip = Index(*this, p);
    for (int t : ip.target) {
      table_[0][t] = 1.0;
      for (int s : ip.source) table_[s + 1][t] = 1.0;
    }
  }
  for (auto& row : table_) {
    const double u = row.empty() ? 0.0 : 1.0 / static_cast<double>(row.size());
    for (auto& [t, p] : row) p = u;
  }
}

double AlignmentModel::Prob(int source, int target) const {
  const size_t row = static_cast<size_t>(source + 1);
  if (row >= table_.size() || target < 0) return 0.0;
  auto it = table_[row].find(target);
  return it == table_[row].end() ? 0.0 : it->second;
}

void AlignmentModel::SetProb(int source, int target, double p) {
  const size_t row = static_cast<size_t>(source + 1);
  if (row >= table_.size()) table_.resize(row + 1);
  table_[row][target] = p;
}

void AlignmentModel::ClearRow(int source) {
  const size_t row = static_cast<size_t>(source + 1);
  if (row < table_.size()) table_[row].clear();
}

double AlignmentModel::RowSum(int source) const {
  double s = 0.0;
  for (const auto& [t, p] : table_.at(source + 1)) s += p;
  return s;
}

void AlignmentModel::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIoFailure, "cannot write " + path);
  char buf[64];
  out << "aec-align 1\n";
  std::snprintf(buf, sizeof(buf), "%.17g", lambda);
  out << "lambda " << buf << '\n';
  std::snprintf(buf, sizeof(buf), "%.17g", p0);
  out << "p0 " << buf << '\n';
  out << "source_vocab " << source_vocab.size() << '\n';
  for (int i = 0; i < source_vocab.size(); ++i) out << source_vocab.Token(i) << '\n';
  out << "target_vocab " << target_vocab.size() << '\n';
  for (int i = 0; i < target_vocab.size(); ++i) out << target_vocab.Token(i) << '\n';
  size_t entries = 0;
  for (const auto& row : table_) entries += row.size();
  out << "ttable " << entries << '\n';
  for (size_t r = 0; r < table_.size(); ++r) {
    const std::map<int, double> sorted(table_[r].begin(), table_[r].end());
    for (const auto& [t, p] : sorted) {
      std::snprintf(buf, sizeof(buf), "%.17g", p);
      out << static_cast<long>(r) - 1 << ' ' << t << ' ' << buf << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::kIoFailure, "write failed: " + path);
}

AlignmentModel AlignmentModel::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open " + path);
  auto fail = [&](const std::string& what) {
    return Error(ErrorKind::kFormat, path + ": " + what);
  };
  std::string line;
  if (!std::getline(in, line) || line != "aec-align 1") {
    throw fail("not a version-1 alignment model");
  }
  AlignmentModel model;
  auto keyed = [&](const char* key) {
    if (!std::getline(in, line)) throw fail(std::string("missing ") + key);
    std::istringstream row(line);
    std::string k, v;
    row >> k >> v;
    if (k != key) throw fail(std::string("expected ") + key);
    return v;
  };
  model.lambda = std::strtod(keyed("lambda").c_str(), nullptr);
  model.p0 = std::strtod(keyed("p0").c_str(), nullptr);
  for (long n = std::stol(keyed("source_vocab")); n > 0; --n) {
    std::getline(in, line);
    model.source_vocab.Add(line);
  }
  for (long n = std::stol(keyed("target_vocab")); n > 0; --n) {
    std::getline(in, line);
    model.target_vocab.Add(line);
  }
  model.table_.assign(model.source_vocab.size() + 1, {});
  for (long n = std::stol(keyed("ttable")); n > 0; --n) {
    std::getline(in, line);
    std::istringstream row(line);
    long s, t;
    std::string p;
    if (!(row >> s >> t >> p) || s < -1 || s >= model.source_vocab.size() ||
        t < 0 || t >= model.target_vocab.size()) {
      throw fail("bad ttable entry");
    }
    model.table_[s + 1][static_cast<int>(t)] = std::strtod(p.c_str(), nullptr);
  }
  return model;
}

double DiagonalFeature(int i, int j, int m, int n) {
  return -std::fabs(static_cast<double>(i) / m - static_cast<double>(j) / n);
}

std::vector<double> AlignmentPrior(int j, int m, int n, double lambda,
                                   double p0) {
  std::vector<double> prior(m + 1, 0.0);
  prior[0] = p0;
  double mx = -1e300;
  for (int i = 1; i <= m; ++i) {
    prior[i] = lambda * DiagonalFeature(i, j, m, n);
    mx = std::max(mx, prior[i]);
  }
  double z = 0.0;
  for (int i = 1; i <= m; ++i) {
    prior[i] = std::exp(prior[i] - mx);
    z += prior[i];
  }
  for (int i = 1; i <= m; ++i) prior[i] *= (1.0 - p0) / z;
  return prior;
}

PosteriorMatrix Posterior(const AlignmentModel& model,
                          const text::ParallelPair& pair) {
  const IndexedPair ip = Index(model, pair);
  const int m = static_cast<int>(ip.source.size());
  const int n = static_cast<int>(ip.target.size());
  PosteriorMatrix post = PosteriorMatrix::Zero(n, m + 1);
  std::vector<double> w;
  for (int j = 1; j <= n; ++j) {
    const double sum = ColumnWeights(model, ip, j, &w);
    if (sum <= 0.0) {
      // Nothing explains this target word but NULL.
      post(j - 1, 0) = 1.0;
      continue;
    }
    for (int i = 0; i <= m; ++i) post(j - 1, i) = w[i] / sum;
  }
  return post;
}

EmResult EmIteration(const AlignmentModel& model,
                     const std::vector<text::ParallelPair>& corpus) {
  if (corpus.empty()) {
    throw Error(ErrorKind::kEmptyCorpus, "alignment corpus is empty");
  }
  EmResult result{model, 0.0};
  AlignmentModel& next = result.model;
  if (!next.initialized()) next.Initialize(corpus);

  std::vector<std::unordered_map<int, double>> counts(next.num_sources() + 1);
  std::vector<double> w;
  for (const text::ParallelPair& p : corpus) {
    const IndexedPair ip = Index(next, p);
    const int m = static_cast<int>(ip.source.size());
    const int n = static_cast<int>(ip.target.size());
    for (int j = 1; j <= n; ++j) {
      const double sum = ColumnWeights(next, ip, j, &w);
      const int t = ip.target[j - 1];
      if (sum <= 0.0 || t < 0) continue;
      result.log_likelihood += std::log(sum);
      counts[0][t] += w[0] / sum;
      for (int i = 1; i <= m; ++i) {
        if (w[i] > 0.0) counts[ip.source[i - 1] + 1][t] += w[i] / sum;
      }
    }
  }
  for (size_t r = 0; r < counts.size(); ++r) {
    double total = 0.0;
    for (const auto& [t, c] : counts[r]) total += c;
    if (total <= 0.0) continue;
    const int source = static_cast<int>(r) - 1;
    next.ClearRow(source);
    for (const auto& [t, c] : counts[r]) next.SetProb(source, t, c / total);
  }
  return result;
}

AlignmentModel FitLambda(const AlignmentModel& model,
                         const std::vector<text::ParallelPair>& corpus,
                         const LambdaControl& control,
                         std::vector<double>* trajectory) {
  AlignmentModel out = model;
  const LambdaStats st = CollectLambdaStats(model, corpus);
  if (st.tokens <= 0.0) return out;
  double lambda = std::clamp(model.lambda, 0.0, control.lambda_max);
  double grad = 0.0;
  double value = LambdaObjective(st, lambda, &grad);
  for (int step = 0; step < control.steps; ++step) {
    double eta = control.step_size;
    double candidate = lambda;
    double cand_value = value;
    double cand_grad = grad;
    for (int tries = 0; tries < 30; ++tries) {
      candidate =
          std::clamp(lambda + eta * grad / st.tokens, 0.0, control.lambda_max);
      cand_value = LambdaObjective(st, candidate, &cand_grad);
      if (cand_value >= value) break;
      eta *= 0.5;
      candidate = lambda;
    }
    if (cand_value >= value) {
      lambda = candidate;
      value = cand_value;
      grad = cand_grad;
    }
    if (trajectory != nullptr) trajectory->push_back(lambda);
  }
  out.lambda = lambda;
  return out;
}

AlignmentLinkSet ViterbiAlign(const AlignmentModel& model,
                              const text::ParallelPair& pair) {
  const IndexedPair ip = Index(model, pair);
  const int m = static_cast<int>(ip.source.size());
  const int n = static_cast<int>(ip.target.size());
  AlignmentLinkSet links(m, n);
  std::vector<double> w;
  for (int j = 1; j <= n; ++j) {
    ColumnWeights(model, ip, j, &w);
    int best = 0;
    for (int i = 1; i <= m; ++i) {
      if (w[i] > w[best]) best = i;
    }
    if (best > 0) links.Add(best - 1, j - 1);
  }
  return links;
}

AlignmentLinkSet Symmetrize(const AlignmentLinkSet& forward,
                            const AlignmentLinkSet& reverse,
                            Heuristic heuristic) {
  if (forward.source_length() != reverse.source_length() ||
      forward.target_length() != reverse.target_length()) {
    throw Error(ErrorKind::kDimMismatch,
                "forward and reverse alignments cover different lengths");
  }
  const int m = forward.source_length();
  const int n = forward.target_length();
  AlignmentLinkSet result(m, n);
  if (heuristic == Heuristic::kUnion) {
    for (const Link& l : forward.links()) result.Add(l.source, l.target);
    for (const Link& l : reverse.links()) result.Add(l.source, l.target);
    return result;
  }
  for (const Link& l : forward.links()) {
    if (reverse.Contains(l.source, l.target)) result.Add(l.source, l.target);
  }
  if (heuristic == Heuristic::kIntersection) return result;

  std::vector<bool> source_aligned(m, false);
  std::vector<bool> target_aligned(n, false);
  for (const Link& l : result.links()) {
    source_aligned[l.source] = true;
    target_aligned[l.target] = true;
  }
  auto in_union = [&](int i, int j) {
    return forward.Contains(i, j) || reverse.Contains(i, j);
  };
  auto add = [&](int i, int j) {
    result.Add(i, j);
    source_aligned[i] = true;
    target_aligned[j] = true;
  };
  static constexpr int kNeighbors[8][2] = {{-1, 0}, {0, -1}, {1, 0}, {0, 1},
                                           {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  bool added = true;
  while (added) {
    added = false;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        if (!result.Contains(i, j)) continue;
        for (const auto& d : kNeighbors) {
          const int ni = i + d[0];
          const int nj = j + d[1];
          if (ni < 0 || ni >= m || nj < 0 || nj >= n) continue;
          if (result.Contains(ni, nj) || !in_union(ni, nj)) continue;
          if (!source_aligned[ni] || !target_aligned[nj]) {
            add(ni, nj);
            added = true;
          }
        }
      }
    }
  }
  for (const AlignmentLinkSet* side : {&forward, &reverse}) {
    for (const Link& l : side->links()) {
      if (!source_aligned[l.source] && !target_aligned[l.target]) {
        add(l.source, l.target);
      }
    }
  }
  return result;
}

AlignmentModel TrainAligner(const std::vector<text::ParallelPair>& corpus,
                            const AlignerConfig& config,
                            AlignerTrainReport* report) {
  AlignmentModel model;
  model.lambda = config.lambda;
  model.p0 = config.p0;
  for (int it = 0; it < config.iterations; ++it) {
    EmResult em = EmIteration(model, corpus);
    model = std::move(em.model);
    if (report != nullptr) report->log_likelihoods.push_back(em.log_likelihood);
    if (config.optimize_lambda) {
      model = FitLambda(model, corpus, config.lambda_control);
    }
    if (report != nullptr) report->lambdas.push_back(model.lambda);
  }
  return model;
}

}  // namespace aec::align
