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

#ifndef AEC_ALIGNER_H_
#define AEC_ALIGNER_H_

#include <compare>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "aec/textcore.h"

namespace aec::align {

struct Link {
  int source;  // 0-based index into the source (Err) side
  int target;  // 0-based index into the target (GT) side

  friend auto operator<=>(const Link&, const Link&) = default;
};

// Sorted, duplicate-free set of links for one sentence pair of lengths
// (source_length, target_length).
class AlignmentLinkSet {
 public:
  AlignmentLinkSet() = default;
  AlignmentLinkSet(int source_length, int target_length);

  void Add(int source, int target);
  bool Contains(int source, int target) const;

  int source_length() const { return m_; }
  int target_length() const { return n_; }
  const std::vector<Link>& links() const { return links_; }
  size_t size() const { return links_.size(); }
  bool empty() const { return links_.empty(); }

  AlignmentLinkSet Transposed() const;

  // Space-separated "i-j", source index first.
  std::string ToPharaoh() const;
  static AlignmentLinkSet FromPharaoh(std::string_view line, int source_length,
                                      int target_length);

  friend bool operator==(const AlignmentLinkSet&,
                         const AlignmentLinkSet&) = default;

 private:
  int m_ = 0;
  int n_ = 0;
  std::vector<Link> links_;
};

class Vocabulary {
 public:
  int Add(const std::string& token);
  int Find(const std::string& token) const;  // -1 when absent
  const std::string& Token(int id) const { return tokens_.at(id); }
  int size() const { return static_cast<int>(tokens_.size()); }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Lexical table t(target | source) with a NULL source word, plus the
// diagonal tension and null probability of the distortion prior. Only pairs
// that co-occur in training are stored; everything else has probability 0.
class AlignmentModel {
 public:
  static constexpr int kNull = -1;

  double lambda = 4.0;
  double p0 = 0.08;
  Vocabulary source_vocab;
  Vocabulary target_vocab;

  bool initialized() const { return !table_.empty(); }
  // Sizes vocabularies and sets t(. | s) uniform over co-occurring targets.
  void Initialize(const std::vector<text::ParallelPair>& corpus);

  // Probability t(target | source); source may be kNull.
  double Prob(int source, int target) const;
  void SetProb(int source, int target, double p);
  void ClearRow(int source);
  // Sum over stored targets of t(. | source).
  double RowSum(int source) const;
  int num_sources() const { return static_cast<int>(table_.size()) - 1; }

  void Save(const std::string& path) const;
  static AlignmentModel Load(const std::string& path);

 private:
  // Row 0 is NULL; source id s lives in row s + 1.
  std::vector<std::unordered_map<int, double>> table_;
};

// h(i, j, m, n) = -|i/m - j/n| with 1-based i (source) and j (target).
double DiagonalFeature(int i, int j, int m, int n);

// Distribution over {null, 1..m} for target position j (1-based): entry 0
// is p0, entries 1..m are (1 - p0) softmax(lambda * h).
std::vector<double> AlignmentPrior(int j, int m, int n, double lambda,
                                   double p0);

// Rows are target positions, column 0 is null, column i is source i.
using PosteriorMatrix = Eigen::MatrixXd;

PosteriorMatrix Posterior(const AlignmentModel& model,
                          const text::ParallelPair& pair);

struct EmResult {
  AlignmentModel model;
  double log_likelihood;  // under the parameters before the update
};

// One EM sweep. Builds the vocabularies on first use. Throws
// ErrorKind::kEmptyCorpus.
EmResult EmIteration(const AlignmentModel& model,
                     const std::vector<text::ParallelPair>& corpus);

struct LambdaControl {
  int steps = 8;
  double step_size = 20.0;
  double lambda_max = 16.0;
};

// Gradient ascent on the expected complete-data log-likelihood in lambda,
// with backtracking so every accepted step increases it. trajectory, when
// given, receives lambda after every step.
AlignmentModel FitLambda(const AlignmentModel& model,
                         const std::vector<text::ParallelPair>& corpus,
                         const LambdaControl& control,
                         std::vector<double>* trajectory = nullptr);

AlignmentLinkSet ViterbiAlign(const AlignmentModel& model,
                              const text::ParallelPair& pair);

enum class Heuristic { kIntersection, kUnion, kGrowDiagFinalAnd };

// Both inputs in (source, target) orientation; transpose a reverse-direction
// alignment first. Throws ErrorKind::kDimMismatch.
AlignmentLinkSet Symmetrize(const AlignmentLinkSet& forward,
                            const AlignmentLinkSet& reverse,
                            Heuristic heuristic);

struct AlignerConfig {
  int iterations = 5;
  double lambda = 4.0;
  double p0 = 0.08;
  bool optimize_lambda = true;
  LambdaControl lambda_control;
};

struct AlignerTrainReport {
  std::vector<double> log_likelihoods;
  std::vector<double> lambdas;
};

AlignmentModel TrainAligner(const std::vector<text::ParallelPair>& corpus,
                            const AlignerConfig& config,
                            AlignerTrainReport* report = nullptr);

}  // namespace aec::align

#endif  // AEC_ALIGNER_H_
