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

#include "aec/g2ipa.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "aec/common.h"
#include "aec/utf8.h"

namespace aec::g2p {

namespace {

constexpr const char* kBos = "<s>";
constexpr const char* kEos = "</s>";

const char* KindName(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kBias: return "bias";
    case FeatureKind::kIdentity: return "identity";
    case FeatureKind::kPrefix: return "prefix";
    case FeatureKind::kSuffix: return "suffix";
    case FeatureKind::kClassSignature: return "class";
  }
  return "?";
}

FeatureKind KindFromName(const std::string& name) {
  for (FeatureKind k : {FeatureKind::kBias, FeatureKind::kIdentity,
                        FeatureKind::kPrefix, FeatureKind::kSuffix,
                        FeatureKind::kClassSignature}) {
    if (name == KindName(k)) return k;
  }
  throw Error(ErrorKind::kFormat, "unknown feature kind '" + name + "'");
}

std::string Key(const char* code, int len, int offset,
                const std::string& value) {
  std::string key = code;
  if (len > 0) key += std::to_string(len);
  key += '[';
  key += std::to_string(offset);
  key += "]=";
  key += value;
  return key;
}

double LogSumExp(const double* v, int n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) mx = std::max(mx, v[i]);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(v[i] - mx);
  return mx + std::log(s);
}

// Row t holds the emission score of every label at position t.
Eigen::MatrixXd EmissionScores(const CrfModel& model,
                               const std::vector<std::vector<int>>& feats) {
  const int n = static_cast<int>(feats.size());
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n, model.num_labels());
  for (int t = 0; t < n; ++t) {
    for (int f : feats[t]) scores.row(t) += model.emission().row(f);
  }
  return scores;
}

struct FeaturizedSequence {
  std::vector<std::vector<int>> feats;
  std::vector<int> labels;
};

// Adds the gradient of -log p(labels | tokens) into grad_emission and
// grad_transition; returns -log p.
double SequenceNll(const CrfModel& model, const FeaturizedSequence& seq,
                   Eigen::MatrixXd* grad_emission,
                   Eigen::MatrixXd* grad_transition) {
  const int n = static_cast<int>(seq.feats.size());
  const int L = model.num_labels();
  const Eigen::MatrixXd& trans = model.transition();
  const Eigen::MatrixXd emit = EmissionScores(model, seq.feats);

  Eigen::MatrixXd alpha(n, L);
  Eigen::MatrixXd beta(n, L);
  std::vector<double> buf(L);
  alpha.row(0) = emit.row(0);
  for (int t = 1; t < n; ++t) {
    for (int y = 0; y < L; ++y) {
      for (int p = 0; p < L; ++p) buf[p] = alpha(t - 1, p) + trans(p, y);
      alpha(t, y) = emit(t, y) + LogSumExp(buf.data(), L);
    }
  }
  beta.row(n - 1).setZero();
  for (int t = n - 2; t >= 0; --t) {
    for (int y = 0; y < L; ++y) {
      for (int q = 0; q < L; ++q) {
        buf[q] = trans(y, q) + emit(t + 1, q) + beta(t + 1, q);
      }
      beta(t, y) = LogSumExp(buf.data(), L);
    }
  }
  for (int y = 0; y < L; ++y) buf[y] = alpha(n - 1, y);
  const double log_z = LogSumExp(buf.data(), L);

  double gold = 0.0;
  for (int t = 0; t < n; ++t) {
    gold += emit(t, seq.labels[t]);
    if (t > 0) gold += trans(seq.labels[t - 1], seq.labels[t]);
  }

  // Expected minus observed counts.
  for (int t = 0; t < n; ++t) {
    for (int y = 0; y < L; ++y) {
      double marginal = std::exp(alpha(t, y) + beta(t, y) - log_z);
      if (y == seq.labels[t]) marginal -= 1.0;
      if (marginal == 0.0) continue;
      for (int f : seq.feats[t]) (*grad_emission)(f, y) += marginal;
    }
    if (t == 0) continue;
    for (int p = 0; p < L; ++p) {
      for (int y = 0; y < L; ++y) {
        (*grad_transition)(p, y) += std::exp(
            alpha(t - 1, p) + trans(p, y) + emit(t, y) + beta(t, y) - log_z);
      }
    }
    (*grad_transition)(seq.labels[t - 1], seq.labels[t]) -= 1.0;
  }
  return log_z - gold;
}

std::vector<FeaturizedSequence> FeaturizeCorpus(
    const CrfModel& model, const std::vector<TaggedSequence>& data) {
  std::vector<FeaturizedSequence> out;
  out.reserve(data.size());
  for (const TaggedSequence& s : data) {
    if (s.labels.size() != s.tokens.size()) {
      throw Error(ErrorKind::kLengthMismatch,
                  "tagged sequence has mismatched token/label counts");
    }
    for (int y : s.labels) {
      if (y < 0 || y >= model.num_labels()) {
        throw Error(ErrorKind::kFormat, "label index outside the tagset");
      }
    }
    if (s.tokens.empty()) continue;
    out.push_back({model.Featurize(s.tokens), s.labels});
  }
  return out;
}

Objective Evaluate(const CrfModel& model,
                   const std::vector<FeaturizedSequence>& data) {
  Eigen::MatrixXd ge =
      Eigen::MatrixXd::Zero(model.num_features(), model.num_labels());
  Eigen::MatrixXd gt =
      Eigen::MatrixXd::Zero(model.num_labels(), model.num_labels());
  double nll = 0.0;
  for (const FeaturizedSequence& s : data) nll += SequenceNll(model, s, &ge, &gt);
  const double inv = data.empty() ? 0.0 : 1.0 / static_cast<double>(data.size());

  Objective obj;
  obj.gradient.resize(model.num_weights());
  Eigen::Index k = 0;
  for (int f = 0; f < ge.rows(); ++f) {
    for (int y = 0; y < ge.cols(); ++y) obj.gradient[k++] = ge(f, y) * inv;
  }
  for (int p = 0; p < gt.rows(); ++p) {
    for (int y = 0; y < gt.cols(); ++y) obj.gradient[k++] = gt(p, y) * inv;
  }
  const Eigen::VectorXd w = model.Weights();
  obj.value = nll * inv + 0.5 * model.l2_lambda() * w.squaredNorm();
  obj.gradient += model.l2_lambda() * w;
  return obj;
}

}  // namespace

TagSet::TagSet(const std::vector<std::string>& labels) {
  for (const std::string& l : labels) {
    if (Find(l)) throw Error(ErrorKind::kFormat, "duplicate label " + l);
    Add(l);
  }
}

int TagSet::Add(const std::string& label) {
  auto it = index_.find(label);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(labels_.size());
  labels_.push_back(label);
  index_.emplace(label, id);
  return id;
}

std::optional<int> TagSet::Find(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FeatureTemplate::FeatureTemplate(std::vector<FeatureDescriptor> descriptors,
                                 int radius)
    : descriptors_(std::move(descriptors)), radius_(radius) {
  for (size_t i = 0; i < descriptors_.size(); ++i) {
    for (int off : descriptors_[i].offsets) {
      if (std::abs(off) > radius_) {
        throw Error(ErrorKind::kFormat, "feature offset " +
                                            std::to_string(off) +
                                            " outside window radius");
      }
    }
    for (size_t j = 0; j < i; ++j) {
      if (descriptors_[j] == descriptors_[i]) {
        throw Error(ErrorKind::kFormat, "duplicate feature descriptor");
      }
    }
  }
}

FeatureTemplate FeatureTemplate::Default() {
  const std::vector<int> window = {-2, -1, 0, 1, 2};
  return FeatureTemplate({{FeatureKind::kBias, {}, 0},
                          {FeatureKind::kIdentity, window, 0},
                          {FeatureKind::kPrefix, window, 3},
                          {FeatureKind::kSuffix, window, 3},
                          {FeatureKind::kClassSignature, window, 0}},
                         2);
}

FeatureTemplate FeatureTemplate::IdentityWindow(int radius) {
  std::vector<int> window;
  for (int o = -radius; o <= radius; ++o) window.push_back(o);
  return FeatureTemplate({{FeatureKind::kIdentity, window, 0}}, radius);
}

std::string FeatureTemplate::Serialize() const {
  std::ostringstream out;
  out << "radius " << radius_ << '\n';
  for (const FeatureDescriptor& d : descriptors_) {
    out << KindName(d.kind) << ' ' << d.max_len;
    for (int o : d.offsets) out << ' ' << o;
    out << '\n';
  }
  return out.str();
}

FeatureTemplate FeatureTemplate::Deserialize(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string word;
  int radius = 0;
  if (!(in >> word >> radius) || word != "radius") {
    throw Error(ErrorKind::kFormat, "feature template must start with radius");
  }
  std::vector<FeatureDescriptor> descriptors;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string kind;
    FeatureDescriptor d{};
    row >> kind >> d.max_len;
    d.kind = KindFromName(kind);
    int o;
    while (row >> o) d.offsets.push_back(o);
    descriptors.push_back(std::move(d));
  }
  return FeatureTemplate(std::move(descriptors), radius);
}

std::vector<std::string> ExtractFeatures(const text::SyllableSequence& tokens,
                                         size_t position,
                                         const FeatureTemplate& templates) {
  std::vector<std::string> feats;
  const long n = static_cast<long>(tokens.size());
  for (const FeatureDescriptor& d : templates.descriptors()) {
    if (d.kind == FeatureKind::kBias) {
      feats.emplace_back("b");
      continue;
    }
    for (int off : d.offsets) {
      const long at = static_cast<long>(position) + off;
      const char* code = "w";
      switch (d.kind) {
        case FeatureKind::kPrefix: code = "p"; break;
        case FeatureKind::kSuffix: code = "s"; break;
        case FeatureKind::kClassSignature: code = "c"; break;
        default: break;
      }
      if (at < 0 || at >= n) {
        feats.push_back(Key(code, 0, off, at < 0 ? kBos : kEos));
        continue;
      }
      const std::string& tok = tokens[static_cast<size_t>(at)];
      switch (d.kind) {
        case FeatureKind::kIdentity:
          feats.push_back(Key(code, 0, off, tok));
          break;
        case FeatureKind::kPrefix:
        case FeatureKind::kSuffix: {
          const std::u32string cps = utf8::Decode(tok);
          const int upto =
              std::min(d.max_len, static_cast<int>(cps.size()));
          for (int len = 1; len <= upto; ++len) {
            const std::u32string part =
                d.kind == FeatureKind::kPrefix
                    ? cps.substr(0, len)
                    : cps.substr(cps.size() - len);
            feats.push_back(Key(code, len, off, utf8::Encode(part)));
          }
          break;
        }
        case FeatureKind::kClassSignature: {
          std::string sig;
          for (char32_t cp : utf8::Decode(tok)) {
            sig += text::ClassLetter(text::Classify(cp));
          }
          feats.push_back(Key(code, 0, off, sig));
          break;
        }
        case FeatureKind::kBias:
          break;
      }
    }
  }
  std::sort(feats.begin(), feats.end());
  feats.erase(std::unique(feats.begin(), feats.end()), feats.end());
  return feats;
}

CrfModel::CrfModel(TagSet tagset, FeatureTemplate templates)
    : tagset_(std::move(tagset)), templates_(std::move(templates)) {
  ResizeWeights();
}

int CrfModel::AddFeature(const std::string& key) {
  auto it = feature_index_.find(key);
  if (it != feature_index_.end()) return it->second;
  const int id = static_cast<int>(feature_names_.size());
  feature_names_.push_back(key);
  feature_index_.emplace(key, id);
  return id;
}

int CrfModel::FeatureId(const std::string& key) const {
  auto it = feature_index_.find(key);
  return it == feature_index_.end() ? -1 : it->second;
}

std::vector<std::vector<int>> CrfModel::Featurize(
    const text::SyllableSequence& tokens) const {
  std::vector<std::vector<int>> out(tokens.size());
  for (size_t t = 0; t < tokens.size(); ++t) {
    for (const std::string& key : ExtractFeatures(tokens, t, templates_)) {
      const int id = FeatureId(key);
      if (id >= 0) out[t].push_back(id);
    }
  }
  return out;
}

int CrfModel::num_weights() const {
  return num_features() * num_labels() + num_labels() * num_labels();
}

Eigen::VectorXd CrfModel::Weights() const {
  Eigen::VectorXd w(num_weights());
  Eigen::Index k = 0;
  for (int f = 0; f < emission_.rows(); ++f) {
    for (int y = 0; y < emission_.cols(); ++y) w[k++] = emission_(f, y);
  }
  for (int p = 0; p < transition_.rows(); ++p) {
    for (int y = 0; y < transition_.cols(); ++y) w[k++] = transition_(p, y);
  }
  return w;
}

void CrfModel::SetWeights(const Eigen::VectorXd& w) {
  if (w.size() != num_weights()) {
    throw Error(ErrorKind::kDimMismatch, "CRF weight vector size mismatch");
  }
  Eigen::Index k = 0;
  for (int f = 0; f < emission_.rows(); ++f) {
    for (int y = 0; y < emission_.cols(); ++y) emission_(f, y) = w[k++];
  }
  for (int p = 0; p < transition_.rows(); ++p) {
    for (int y = 0; y < transition_.cols(); ++y) transition_(p, y) = w[k++];
  }
}

void CrfModel::ResizeWeights() {
  const int L = num_labels();
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(num_features(), L);
  const Eigen::Index keep = std::min<Eigen::Index>(emission_.rows(), e.rows());
  if (emission_.cols() == L && keep > 0) e.topRows(keep) = emission_.topRows(keep);
  emission_ = std::move(e);
  if (transition_.rows() != L || transition_.cols() != L) {
    transition_ = Eigen::MatrixXd::Zero(L, L);
  }
}

void CrfModel::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIoFailure, "cannot write " + path);
  char buf[64];
  out << "aec-crf 1\n";
  out << "labels " << num_labels() << '\n';
  for (const std::string& l : tagset_.labels()) out << l << '\n';
  const std::string tmpl = templates_.Serialize();
  out << "templates " << std::count(tmpl.begin(), tmpl.end(), '\n') << '\n'
      << tmpl;
  std::snprintf(buf, sizeof(buf), "%.17g", l2_lambda_);
  out << "l2 " << buf << '\n';
  out << "features " << num_features() << '\n';
  for (const std::string& f : feature_names_) out << f << '\n';
  long nonzero = 0;
  for (int f = 0; f < emission_.rows(); ++f) {
    for (int y = 0; y < emission_.cols(); ++y) nonzero += emission_(f, y) != 0.0;
  }
  out << "emission " << nonzero << '\n';
  for (int f = 0; f < emission_.rows(); ++f) {
    for (int y = 0; y < emission_.cols(); ++y) {
      if (emission_(f, y) == 0.0) continue;
      std::snprintf(buf, sizeof(buf), "%.17g", emission_(f, y));
      out << f << ' ' << y << ' ' << buf << '\n';
    }
  }
  out << "transition " << num_labels() << '\n';
  for (int p = 0; p < transition_.rows(); ++p) {
    for (int y = 0; y < transition_.cols(); ++y) {
      std::snprintf(buf, sizeof(buf), "%.17g", transition_(p, y));
      out << (y ? " " : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::kIoFailure, "write failed: " + path);
}

CrfModel CrfModel::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open " + path);
  auto fail = [&](const std::string& what) {
    return Error(ErrorKind::kFormat, path + ": " + what);
  };
  std::string line;
  auto header = [&](const char* name) {
    if (!std::getline(in, line)) throw fail(std::string("missing ") + name);
    std::istringstream row(line);
    std::string word;
    long count = -1;
    row >> word >> count;
    if (word != name || count < 0) throw fail(std::string("expected ") + name);
    return count;
  };
  if (!std::getline(in, line) || line != "aec-crf 1") {
    throw fail("not a version-1 CRF model");
  }
  TagSet tagset;
  for (long n = header("labels"); n > 0; --n) {
    std::getline(in, line);
    tagset.Add(line);
  }
  std::string tmpl;
  for (long n = header("templates"); n > 0; --n) {
    std::getline(in, line);
    tmpl += line + '\n';
  }
  CrfModel model(std::move(tagset), FeatureTemplate::Deserialize(tmpl));
  std::getline(in, line);
  if (line.rfind("l2 ", 0) != 0) throw fail("expected l2");
  model.l2_lambda_ = std::strtod(line.c_str() + 3, nullptr);
  for (long n = header("features"); n > 0; --n) {
    std::getline(in, line);
    model.AddFeature(line);
  }
  model.ResizeWeights();
  for (long n = header("emission"); n > 0; --n) {
    long f = -1, y = -1;
    std::string w;
    std::getline(in, line);
    std::istringstream row(line);
    if (!(row >> f >> y >> w) || f < 0 || f >= model.num_features() ||
        y < 0 || y >= model.num_labels()) {
      throw fail("bad emission triple");
    }
    model.emission_(f, y) = std::strtod(w.c_str(), nullptr);
  }
  if (header("transition") != model.num_labels()) {
    throw fail("transition size mismatch");
  }
  for (int p = 0; p < model.num_labels(); ++p) {
    for (int y = 0; y < model.num_labels(); ++y) {
      std::string w;
      if (!(in >> w)) throw fail("truncated transition matrix");
      model.transition_(p, y) = std::strtod(w.c_str(), nullptr);
    }
  }
  return model;
}

Objective CrfLogLikelihood(const CrfModel& model,
                           const std::vector<TaggedSequence>& data) {
  return Evaluate(model, FeaturizeCorpus(model, data));
}

CrfModel TrainCrf(const std::vector<TaggedSequence>& corpus,
                  const TagSet& tagset, const FeatureTemplate& templates,
                  const CrfHyper& hyper, CrfTrainReport* report) {
  if (corpus.empty()) {
    throw Error(ErrorKind::kEmptyCorpus, "CRF training corpus is empty");
  }
  CrfModel model(tagset, templates);
  for (const TaggedSequence& s : corpus) {
    for (size_t t = 0; t < s.tokens.size(); ++t) {
      for (const std::string& key : ExtractFeatures(s.tokens, t, templates)) {
        model.AddFeature(key);
      }
    }
  }
  model.ResizeWeights();
  model.set_l2_lambda(hyper.l2_lambda);
  const std::vector<FeaturizedSequence> data = FeaturizeCorpus(model, corpus);

  CrfTrainReport local;
  CrfTrainReport& rep = report ? *report : local;
  rep = {};

  Eigen::VectorXd w = model.Weights();
  Objective cur = Evaluate(model, data);
  rep.losses.push_back(cur.value);
  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;

  for (int iter = 0; iter < hyper.max_iter; ++iter) {
    if (cur.gradient.lpNorm<Eigen::Infinity>() < hyper.tol) {
      rep.converged = true;
      break;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = cur.gradient;
    std::vector<double> alphas(s_hist.size());
    for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
      const double rho = 1.0 / y_hist[k].dot(s_hist[k]);
      alphas[k] = rho * s_hist[k].dot(q);
      q -= alphas[k] * y_hist[k];
    }
    if (!s_hist.empty()) {
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      q /= std::max(1.0, cur.gradient.norm());
    }
    for (size_t k = 0; k < s_hist.size(); ++k) {
      const double rho = 1.0 / y_hist[k].dot(s_hist[k]);
      const double b = rho * y_hist[k].dot(q);
      q += s_hist[k] * (alphas[k] - b);
    }
    Eigen::VectorXd dir = -q;
    double slope = cur.gradient.dot(dir);
    if (!(slope < 0.0)) {
      dir = -cur.gradient;
      slope = -cur.gradient.squaredNorm();
      s_hist.clear();
      y_hist.clear();
    }

    double step = 1.0;
    bool accepted = false;
    Objective next;
    Eigen::VectorXd w_next;
    for (int tries = 0; tries < 40; ++tries) {
      w_next = w + step * dir;
      model.SetWeights(w_next);
      next = Evaluate(model, data);
      if (std::isfinite(next.value) &&
          next.value <= cur.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      model.SetWeights(w);
      break;
    }
    Eigen::VectorXd s = w_next - w;
    Eigen::VectorXd y = next.gradient - cur.gradient;
    if (s.dot(y) > 1e-12) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      if (static_cast<int>(s_hist.size()) > hyper.history) {
        s_hist.pop_front();
        y_hist.pop_front();
      }
    }
    w = std::move(w_next);
    cur = std::move(next);
    rep.losses.push_back(cur.value);
    rep.iterations = iter + 1;
  }
  if (!rep.converged &&
      cur.gradient.lpNorm<Eigen::Infinity>() < hyper.tol) {
    rep.converged = true;
  }
  model.SetWeights(w);
  return model;
}

TaggedSequence CrfDecode(const CrfModel& model,
                         const text::SyllableSequence& tokens) {
  TaggedSequence out;
  out.tokens = tokens;
  const int n = static_cast<int>(tokens.size());
  if (n == 0) return out;
  const int L = model.num_labels();
  const Eigen::MatrixXd emit = EmissionScores(model, model.Featurize(tokens));
  Eigen::MatrixXd best(n, L);
  Eigen::MatrixXi back = Eigen::MatrixXi::Zero(n, L);
  best.row(0) = emit.row(0);
  for (int t = 1; t < n; ++t) {
    for (int y = 0; y < L; ++y) {
      int arg = 0;
      double mx = best(t - 1, 0) + model.transition()(0, y);
      for (int p = 1; p < L; ++p) {
        const double v = best(t - 1, p) + model.transition()(p, y);
        if (v > mx) {
          mx = v;
          arg = p;
        }
      }
      best(t, y) = mx + emit(t, y);
      back(t, y) = arg;
    }
  }
  int y = 0;
  for (int k = 1; k < L; ++k) {
    if (best(n - 1, k) > best(n - 1, y)) y = k;
  }
  out.labels.assign(n, 0);
  for (int t = n - 1; t >= 0; --t) {
    out.labels[t] = y;
    y = back(t, y);
  }
  return out;
}

TaggingScores EvaluateTagging(const std::vector<TaggedSequence>& gold,
                              const std::vector<TaggedSequence>& pred) {
  if (gold.size() != pred.size()) {
    throw Error(ErrorKind::kLengthMismatch, "gold and predicted corpora differ in size");
  }
  long correct = 0;
  long n_gold = 0;
  long n_pred = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].labels.size() != pred[i].labels.size()) {
      throw Error(ErrorKind::kLengthMismatch,
                  "sequence " + std::to_string(i) + " differs in length");
    }
    n_gold += static_cast<long>(gold[i].labels.size());
    n_pred += static_cast<long>(pred[i].labels.size());
    for (size_t t = 0; t < gold[i].labels.size(); ++t) {
      correct += gold[i].labels[t] == pred[i].labels[t];
    }
  }
  TaggingScores s;
  s.precision = n_pred ? static_cast<double>(correct) / n_pred : 0.0;
  s.recall = n_gold ? static_cast<double>(correct) / n_gold : 0.0;
  s.f1 = s.precision + s.recall > 0
             ? 2 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

std::vector<TaggedSequence> ParseTaggedLines(
    const std::vector<std::string>& lines, TagSet* tagset) {
  std::vector<TaggedSequence> out;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(' ') == std::string::npos) continue;
    text::SegmentedLine seg = text::ReadSegmented(lines[i]);
    if (seg.annotations.size() != seg.tokens.size()) {
      throw Error(ErrorKind::kFormat, "training line " + std::to_string(i + 1) +
                                          " lacks syllable|label pairs");
    }
    TaggedSequence ts;
    std::vector<std::string> tokens;
    for (const std::string& tok : seg.tokens.tokens()) {
      std::string norm = text::Normalize(tok);
      if (norm.empty() || norm.find(' ') != std::string::npos) {
        throw Error(ErrorKind::kFormat, "training line " + std::to_string(i + 1) +
                                            ": token '" + tok +
                                            "' does not survive normalization");
      }
      tokens.push_back(std::move(norm));
    }
    ts.tokens = text::SyllableSequence(std::move(tokens));
    for (const std::string& label : seg.annotations) {
      ts.labels.push_back(tagset->Add(label));
    }
    out.push_back(std::move(ts));
  }
  return out;
}

std::vector<std::string> LabelStrings(const CrfModel& model,
                                      const TaggedSequence& seq) {
  std::vector<std::string> out;
  out.reserve(seq.labels.size());
  for (int y : seq.labels) out.push_back(model.tagset().Label(y));
  return out;
}

}  // namespace aec::g2p
