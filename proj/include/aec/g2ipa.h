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

#ifndef AEC_G2IPA_H_
#define AEC_G2IPA_H_

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "aec/textcore.h"

namespace aec::g2p {

class TagSet {
 public:
  TagSet() = default;
  explicit TagSet(const std::vector<std::string>& labels);

  // Returns the index of label, adding it if new.
  int Add(const std::string& label);
  std::optional<int> Find(const std::string& label) const;
  const std::string& Label(int index) const { return labels_.at(index); }
  const std::vector<std::string>& labels() const { return labels_; }
  int size() const { return static_cast<int>(labels_.size()); }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
};

enum class FeatureKind {
  kBias,
  kIdentity,
  kPrefix,          // codepoint prefixes of length 1..max_len
  kSuffix,
  kClassSignature,  // one class letter per codepoint, e.g. "CMVA"
};

struct FeatureDescriptor {
  FeatureKind kind;
  std::vector<int> offsets;
  int max_len = 0;

  friend bool operator==(const FeatureDescriptor&,
                         const FeatureDescriptor&) = default;
};

class FeatureTemplate {
 public:
  FeatureTemplate() = default;
  FeatureTemplate(std::vector<FeatureDescriptor> descriptors, int radius);

  // Bias; identity, prefix/suffix up to 3 and class signature over +-2.
  static FeatureTemplate Default();
  static FeatureTemplate IdentityWindow(int radius);

  const std::vector<FeatureDescriptor>& descriptors() const {
    return descriptors_;
  }
  int radius() const { return radius_; }

  std::string Serialize() const;
  static FeatureTemplate Deserialize(std::string_view text);

  friend bool operator==(const FeatureTemplate&,
                         const FeatureTemplate&) = default;

 private:
  std::vector<FeatureDescriptor> descriptors_;
  int radius_ = 0;
};

// Sorted, de-duplicated feature keys for one position. Offsets that fall
// outside the sequence yield "<s>"/"</s>" sentinel features.
std::vector<std::string> ExtractFeatures(const text::SyllableSequence& tokens,
                                         size_t position,
                                         const FeatureTemplate& templates);

struct TaggedSequence {
  text::SyllableSequence tokens;
  std::vector<int> labels;
};

class CrfModel {
 public:
  CrfModel() = default;
  CrfModel(TagSet tagset, FeatureTemplate templates);

  const TagSet& tagset() const { return tagset_; }
  const FeatureTemplate& templates() const { return templates_; }
  int num_labels() const { return tagset_.size(); }
  int num_features() const { return static_cast<int>(feature_names_.size()); }

  // Registers a feature key; returns its id.
  int AddFeature(const std::string& key);
  int FeatureId(const std::string& key) const;  // -1 when unknown
  const std::string& FeatureName(int id) const { return feature_names_[id]; }

  // Feature ids (known features only) for every position.
  std::vector<std::vector<int>> Featurize(
      const text::SyllableSequence& tokens) const;

  // num_features x num_labels.
  Eigen::MatrixXd& emission() { return emission_; }
  const Eigen::MatrixXd& emission() const { return emission_; }
  // transition(prev, next)
  Eigen::MatrixXd& transition() { return transition_; }
  const Eigen::MatrixXd& transition() const { return transition_; }

  double l2_lambda() const { return l2_lambda_; }
  void set_l2_lambda(double l2) { l2_lambda_ = l2; }

  // Flat layout: emission row-major, then transition row-major.
  int num_weights() const;
  Eigen::VectorXd Weights() const;
  void SetWeights(const Eigen::VectorXd& w);
  // Resizes weight storage to the current feature count, zero-filling.
  void ResizeWeights();

  void Save(const std::string& path) const;
  static CrfModel Load(const std::string& path);

 private:
  TagSet tagset_;
  FeatureTemplate templates_;
  std::vector<std::string> feature_names_;
  std::unordered_map<std::string, int> feature_index_;
  Eigen::MatrixXd emission_;
  Eigen::MatrixXd transition_;
  double l2_lambda_ = 0.0;
};

struct Objective {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

// Mean negative log-likelihood plus l2/2 * |w|^2, with its gradient, by
// log-space forward-backward.
Objective CrfLogLikelihood(const CrfModel& model,
                           const std::vector<TaggedSequence>& data);

struct CrfHyper {
  double l2_lambda = 0.01;
  int max_iter = 300;
  double tol = 1e-5;
  int history = 8;  // L-BFGS memory
};

struct CrfTrainReport {
  std::vector<double> losses;  // objective after every accepted step
  int iterations = 0;
  bool converged = false;
};

// Builds the feature dictionary from the corpus and minimizes the
// regularized NLL with L-BFGS and backtracking line search, starting from
// zero weights. Throws ErrorKind::kEmptyCorpus.
CrfModel TrainCrf(const std::vector<TaggedSequence>& corpus,
                  const TagSet& tagset, const FeatureTemplate& templates,
                  const CrfHyper& hyper, CrfTrainReport* report = nullptr);

// Viterbi; among equal-scoring paths the lowest label index wins at every
// decision.
TaggedSequence CrfDecode(const CrfModel& model,
                         const text::SyllableSequence& tokens);

struct TaggingScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Token-level micro average.
TaggingScores EvaluateTagging(const std::vector<TaggedSequence>& gold,
                              const std::vector<TaggedSequence>& pred);

// Parses "syllable|label" lines, growing tagset as labels appear.
std::vector<TaggedSequence> ParseTaggedLines(
    const std::vector<std::string>& lines, TagSet* tagset);

std::vector<std::string> LabelStrings(const CrfModel& model,
                                      const TaggedSequence& seq);

}  // namespace aec::g2p

#endif  // AEC_G2IPA_H_
