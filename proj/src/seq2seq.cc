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

#include "aec/seq2seq.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "aec/common.h"
#include "aec/errorsim.h"

namespace aec::s2s {

using nn::Tape;
using nn::Var;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void Require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::kFormat, "model config: " + what);
}

Matrix PositionalEncoding(int length, int dim) {
  Matrix pe(length, dim);
  for (int pos = 0; pos < length; ++pos) {
    for (int i = 0; i < dim; i += 2) {
      const double angle = pos / std::pow(10000.0, static_cast<double>(i) / dim);
      pe(pos, i) = std::sin(angle);
      if (i + 1 < dim) pe(pos, i + 1) = std::cos(angle);
    }
  }
  return pe;
}

// 0 where allowed, -inf where blocked.
Matrix AttentionMask(int queries, const std::vector<bool>& key_is_pad,
                     bool causal) {
  const int keys = static_cast<int>(key_is_pad.size());
  Matrix mask = Matrix::Zero(queries, keys);
  for (int q = 0; q < queries; ++q) {
    for (int k = 0; k < keys; ++k) {
      if (key_is_pad[k] || (causal && k > q)) mask(q, k) = kNegInf;
    }
  }
  return mask;
}

std::vector<bool> PadFlags(const std::vector<int>& ids) {
  std::vector<bool> flags(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) flags[i] = ids[i] == Vocab::kPad;
  return flags;
}

struct Graph {
  Tape& tape;
  const Seq2SeqModel& model;
  bool train;
  noise::Rng* rng;

  Var P(const Parameter& p) { return tape.Param(p); }

  Var Linear(Var x, const Parameter& w, const Parameter& b) {
    return tape.AddRowBroadcast(tape.MatMul(x, P(w)), P(b));
  }

  Var Norm(Var x, const NormParams& p) {
    return tape.LayerNorm(x, P(p.gain), P(p.bias));
  }

  Var Drop(Var x, double p) {
    if (!train || p <= 0.0) return x;
    return tape.Dropout(x, p, *rng);
  }

  Var Attention(Var query_in, Var kv_in, const AttentionParams& p,
                const Matrix& mask, Var* averaged) {
    const int hidden = model.config().hidden;
    const int heads = model.config().heads;
    const int dh = hidden / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    Var q = Linear(query_in, p.wq, p.bq);
    Var k = Linear(kv_in, p.wk, p.bk);
    Var v = Linear(kv_in, p.wv, p.bv);
    std::vector<Var> outs;
    std::vector<Var> probs;
    for (int h = 0; h < heads; ++h) {
      Var qh = tape.SliceCols(q, h * dh, dh);
      Var kh = tape.SliceCols(k, h * dh, dh);
      Var vh = tape.SliceCols(v, h * dh, dh);
      Var a = tape.SoftmaxRows(tape.Scale(tape.MatMulTransposed(qh, kh), scale),
                               mask);
      probs.push_back(a);
      outs.push_back(tape.MatMul(Drop(a, model.config().attn_dropout), vh));
    }
    if (averaged != nullptr) *averaged = tape.Mean(probs);
    return Linear(heads == 1 ? outs[0] : tape.ConcatCols(outs), p.wo, p.bo);
  }

  Var FeedForward(Var x, const FeedForwardParams& p) {
    Var h = tape.Relu(Linear(x, p.w1, p.b1));
    return Linear(Drop(h, model.config().dropout), p.w2, p.b2);
  }

  Var Fuse(Var word, Var ipa) {
    const FusionMlp& f = model.fusion;
    Var x = word;
    if (model.config().ipa_emb_dim > 0) {
      const Var parts[] = {word, ipa};
      x = tape.ConcatCols(parts);
    }
    Var h = tape.Tanh(Linear(x, f.w1, f.b1));
    return Linear(h, f.w2, f.b2);
  }

  Var Encode(const std::vector<int>& source, const std::vector<int>& ipa) {
    const ModelConfig& c = model.config();
    const int m = static_cast<int>(source.size());
    Var word = tape.Gather(model.word_embedding, source);
    Var ipa_rows = tape.Gather(model.ipa_embedding, ipa);
    Var x = tape.Add(Fuse(word, ipa_rows),
                     tape.Constant(PositionalEncoding(m, c.hidden)));
    x = Drop(x, c.dropout);
    const Matrix mask = AttentionMask(m, PadFlags(source), false);
    for (const EncoderLayer& layer : model.encoder) {
      Var y = Norm(x, layer.norm1);
      y = Attention(y, y, layer.self_attn, mask, nullptr);
      x = tape.Add(x, Drop(y, c.dropout));
      y = FeedForward(Norm(x, layer.norm2), layer.ffn);
      x = tape.Add(x, Drop(y, c.dropout));
    }
    return Norm(x, model.encoder_norm);
  }

  // Returns logits, one row per decoder input position.
  Var Decode(Var memory, const std::vector<bool>& source_pad,
             const std::vector<int>& decoder_input, Var* guided) {
    const ModelConfig& c = model.config();
    const int n = static_cast<int>(decoder_input.size());
    Var y = tape.Scale(tape.Gather(model.target_embedding, decoder_input),
                       std::sqrt(static_cast<double>(c.hidden)));
    Var x = tape.Add(y, tape.Constant(PositionalEncoding(n, c.hidden)));
    x = Drop(x, c.dropout);
    const Matrix self_mask = AttentionMask(n, PadFlags(decoder_input), true);
    const Matrix cross_mask = AttentionMask(n, source_pad, false);
    for (int l = 0; l < c.layers; ++l) {
      const DecoderLayer& layer = model.decoder[l];
      Var h = Norm(x, layer.norm1);
      h = Attention(h, h, layer.self_attn, self_mask, nullptr);
      x = tape.Add(x, Drop(h, c.dropout));
      h = Norm(x, layer.norm2);
      h = Attention(h, memory, layer.cross_attn, cross_mask,
                    l == c.guided_layer ? guided : nullptr);
      x = tape.Add(x, Drop(h, c.dropout));
      h = FeedForward(Norm(x, layer.norm3), layer.ffn);
      x = tape.Add(x, Drop(h, c.dropout));
    }
    return Linear(Norm(x, model.decoder_norm), model.output_w, model.output_b);
  }
};

// A batch padded to common lengths.
struct PaddedBatch {
  std::vector<std::vector<int>> source, ipa, decoder_input, decoder_output;
  long tokens = 0;
};

PaddedBatch Pad(const Seq2SeqModel& model,
                const std::vector<TrainingExample>& batch) {
  size_t max_src = 0;
  size_t max_tgt = 0;
  for (const TrainingExample& ex : batch) {
    ex.Validate(model);
    if (static_cast<int>(ex.source.size()) > model.config().max_len ||
        static_cast<int>(ex.target.size()) > model.config().max_len) {
      throw Error(ErrorKind::kSequenceTooLong,
                  "sequence longer than max_len " +
                      std::to_string(model.config().max_len));
    }
    if (ex.source.empty()) {
      throw Error(ErrorKind::kLengthMismatch, "empty source sequence");
    }
    max_src = std::max(max_src, ex.source.size());
    max_tgt = std::max(max_tgt, ex.target.size());
  }
  PaddedBatch out;
  for (const TrainingExample& ex : batch) {
    std::vector<int> src = ex.source;
    std::vector<int> ipa = ex.source_ipa;
    src.resize(max_src, Vocab::kPad);
    ipa.resize(max_src, Vocab::kPad);
    std::vector<int> in{Vocab::kBos};
    in.insert(in.end(), ex.target.begin(), ex.target.end());
    std::vector<int> outp = ex.target;
    outp.push_back(Vocab::kEos);
    in.resize(max_tgt + 1, Vocab::kPad);
    outp.resize(max_tgt + 1, Vocab::kPad);
    out.source.push_back(std::move(src));
    out.ipa.push_back(std::move(ipa));
    out.decoder_input.push_back(std::move(in));
    out.decoder_output.push_back(std::move(outp));
    out.tokens += static_cast<long>(ex.target.size()) + 1;
  }
  return out;
}

void InitUniform(Parameter& p, noise::Rng& rng) {
  const double bound =
      std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
  for (Eigen::Index k = 0; k < p.value.size(); ++k) {
    p.value.data()[k] = (2.0 * rng.Uniform() - 1.0) * bound;
  }
}

Parameter Make(const std::string& name, int rows, int cols) {
  return Parameter(name, rows, cols);
}

void MakeAttention(AttentionParams& a, const std::string& prefix, int h) {
  a.wq = Make(prefix + ".wq", h, h);
  a.bq = Make(prefix + ".bq", 1, h);
  a.wk = Make(prefix + ".wk", h, h);
  a.bk = Make(prefix + ".bk", 1, h);
  a.wv = Make(prefix + ".wv", h, h);
  a.bv = Make(prefix + ".bv", 1, h);
  a.wo = Make(prefix + ".wo", h, h);
  a.bo = Make(prefix + ".bo", 1, h);
}

void MakeNorm(NormParams& n, const std::string& prefix, int h) {
  n.gain = Make(prefix + ".gain", 1, h);
  n.gain.value.setOnes();
  n.bias = Make(prefix + ".bias", 1, h);
}

void MakeFeedForward(FeedForwardParams& f, const std::string& prefix, int h,
                     int ff) {
  f.w1 = Make(prefix + ".w1", h, ff);
  f.b1 = Make(prefix + ".b1", 1, ff);
  f.w2 = Make(prefix + ".w2", ff, h);
  f.b2 = Make(prefix + ".b2", 1, h);
}

template <typename Model, typename Ptr>
std::vector<Ptr> CollectParameters(Model& m) {
  std::vector<Ptr> out{&m.word_embedding, &m.ipa_embedding, &m.fusion.w1,
                       &m.fusion.b1,      &m.fusion.w2,     &m.fusion.b2,
                       &m.target_embedding};
  auto attention = [&out](auto& a) {
    for (Ptr p : {&a.wq, &a.bq, &a.wk, &a.bk, &a.wv, &a.bv, &a.wo, &a.bo}) {
      out.push_back(p);
    }
  };
  auto norm = [&out](auto& n) {
    out.push_back(&n.gain);
    out.push_back(&n.bias);
  };
  auto ffn = [&out](auto& f) {
    for (Ptr p : {&f.w1, &f.b1, &f.w2, &f.b2}) out.push_back(p);
  };
  for (auto& layer : m.encoder) {
    norm(layer.norm1);
    attention(layer.self_attn);
    norm(layer.norm2);
    ffn(layer.ffn);
  }
  norm(m.encoder_norm);
  for (auto& layer : m.decoder) {
    norm(layer.norm1);
    attention(layer.self_attn);
    norm(layer.norm2);
    attention(layer.cross_attn);
    norm(layer.norm3);
    ffn(layer.ffn);
  }
  norm(m.decoder_norm);
  out.push_back(&m.output_w);
  out.push_back(&m.output_b);
  return out;
}

bool IsWeightMatrix(const std::string& name) {
  const std::string leaf = name.substr(name.rfind('.') + 1);
  return leaf[0] == 'w' || name.find("embedding") != std::string::npos;
}

std::string HexFloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

}  // namespace

// --- ModelConfig ------------------------------------------------------------

void ModelConfig::Validate() const {
  Require(layers >= 1, "layers must be >= 1");
  Require(hidden >= 1 && heads >= 1, "hidden and heads must be positive");
  Require(hidden % heads == 0, "hidden must be divisible by heads");
  Require(ff >= 1 && word_emb_dim >= 1, "ff and word_emb_dim must be positive");
  Require(ipa_emb_dim >= 0, "ipa_emb_dim must be >= 0");
  Require(dropout >= 0 && dropout < 1, "dropout must be in [0, 1)");
  Require(attn_dropout >= 0 && attn_dropout < 1,
          "attn_dropout must be in [0, 1)");
  Require(label_smoothing >= 0 && label_smoothing < 1,
          "label_smoothing must be in [0, 1)");
  Require(max_len >= 1, "max_len must be >= 1");
  Require(guided_layer >= 0 && guided_layer < layers,
          "guided_layer must be in [0, layers)");
  Require(guidance_weight >= 0, "guidance_weight must be >= 0");
}

ModelConfig ModelConfig::FromKeyValues(const config::KeyValues& kv) {
  ModelConfig c;
  c.layers = static_cast<int>(kv.GetInt("model.layers", c.layers));
  c.hidden = static_cast<int>(kv.GetInt("model.hidden", c.hidden));
  c.ff = static_cast<int>(kv.GetInt("model.ff", c.ff));
  c.heads = static_cast<int>(kv.GetInt("model.heads", c.heads));
  c.word_emb_dim =
      static_cast<int>(kv.GetInt("model.word_emb_dim", c.word_emb_dim));
  c.ipa_emb_dim = static_cast<int>(kv.GetInt("model.ipa_emb_dim", c.ipa_emb_dim));
  c.dropout = kv.GetDouble("model.dropout", c.dropout);
  c.attn_dropout = kv.GetDouble("model.attn_dropout", c.attn_dropout);
  c.label_smoothing = kv.GetDouble("model.label_smoothing", c.label_smoothing);
  c.max_len = static_cast<int>(kv.GetInt("model.max_len", c.max_len));
  c.guided_layer = static_cast<int>(
      kv.GetInt("model.guided_layer", std::max(0, c.layers - 2)));
  c.guidance_weight = kv.GetDouble("model.guidance_weight", c.guidance_weight);
  c.use_ipa = kv.GetBool("model.use_ipa", c.use_ipa);
  c.Validate();
  return c;
}

void ModelConfig::ToKeyValues(config::KeyValues* kv) const {
  auto num = [](double v) { return HexFloat(v); };
  kv->Set("model.layers", std::to_string(layers));
  kv->Set("model.hidden", std::to_string(hidden));
  kv->Set("model.ff", std::to_string(ff));
  kv->Set("model.heads", std::to_string(heads));
  kv->Set("model.word_emb_dim", std::to_string(word_emb_dim));
  kv->Set("model.ipa_emb_dim", std::to_string(ipa_emb_dim));
  kv->Set("model.dropout", num(dropout));
  kv->Set("model.attn_dropout", num(attn_dropout));
  kv->Set("model.label_smoothing", num(label_smoothing));
  kv->Set("model.max_len", std::to_string(max_len));
  kv->Set("model.guided_layer", std::to_string(guided_layer));
  kv->Set("model.guidance_weight", num(guidance_weight));
  kv->Set("model.use_ipa", use_ipa ? "true" : "false");
}

// --- Vocab ------------------------------------------------------------------

Vocab::Vocab() {
  for (const char* t : {"<pad>", "<s>", "</s>", "<unk>"}) Add(t);
}

int Vocab::Add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

int Vocab::Id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

bool Vocab::Contains(const std::string& token) const {
  return index_.count(token) > 0;
}

std::vector<int> Vocab::Encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(Id(t));
  return ids;
}

Vocab Vocab::FromTokens(const std::vector<std::string>& tokens) {
  std::vector<std::string> sorted = tokens;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  Vocab v;
  for (const std::string& t : sorted) v.Add(t);
  return v;
}

std::vector<std::string> Vocab::DecodeIds(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  for (int id : ids) {
    if (id == kEos) break;
    if (id == kPad || id == kBos) continue;
    out.push_back(Token(id));
  }
  return out;
}

// --- Seq2SeqModel -----------------------------------------------------------

Seq2SeqModel::Seq2SeqModel(const ModelConfig& config, Vocab source,
                           Vocab target, Vocab ipa, uint64_t seed)
    : config_(config),
      source_vocab_(std::move(source)),
      target_vocab_(std::move(target)),
      ipa_vocab_(std::move(ipa)) {
  config_.Validate();
  Allocate();
  noise::Rng rng(seed, 0x1417);
  for (Parameter* p : Parameters()) {
    if (IsWeightMatrix(p->name) && p->value.size() > 0) InitUniform(*p, rng);
  }
}

void Seq2SeqModel::Allocate() {
  const ModelConfig& c = config_;
  const int h = c.hidden;
  word_embedding = Make("word_embedding", source_vocab_.size(), c.word_emb_dim);
  ipa_embedding = Make("ipa_embedding", ipa_vocab_.size(), c.ipa_emb_dim);
  fusion.w1 = Make("fusion.w1", c.word_emb_dim + c.ipa_emb_dim, h);
  fusion.b1 = Make("fusion.b1", 1, h);
  fusion.w2 = Make("fusion.w2", h, h);
  fusion.b2 = Make("fusion.b2", 1, h);
  target_embedding = Make("target_embedding", target_vocab_.size(), h);
  encoder.assign(c.layers, EncoderLayer{});
  decoder.assign(c.layers, DecoderLayer{});
  for (int l = 0; l < c.layers; ++l) {
    const std::string e = "encoder." + std::to_string(l);
    MakeNorm(encoder[l].norm1, e + ".norm1", h);
    MakeAttention(encoder[l].self_attn, e + ".self_attn", h);
    MakeNorm(encoder[l].norm2, e + ".norm2", h);
    MakeFeedForward(encoder[l].ffn, e + ".ffn", h, c.ff);
    const std::string d = "decoder." + std::to_string(l);
    MakeNorm(decoder[l].norm1, d + ".norm1", h);
    MakeAttention(decoder[l].self_attn, d + ".self_attn", h);
    MakeNorm(decoder[l].norm2, d + ".norm2", h);
    MakeAttention(decoder[l].cross_attn, d + ".cross_attn", h);
    MakeNorm(decoder[l].norm3, d + ".norm3", h);
    MakeFeedForward(decoder[l].ffn, d + ".ffn", h, c.ff);
  }
  MakeNorm(encoder_norm, "encoder_norm", h);
  MakeNorm(decoder_norm, "decoder_norm", h);
  output_w = Make("output.w", h, target_vocab_.size());
  output_b = Make("output.b", 1, target_vocab_.size());
}

std::vector<Parameter*> Seq2SeqModel::Parameters() {
  return CollectParameters<Seq2SeqModel, Parameter*>(*this);
}

std::vector<const Parameter*> Seq2SeqModel::Parameters() const {
  return CollectParameters<const Seq2SeqModel, const Parameter*>(*this);
}

void Seq2SeqModel::ZeroGrad() {
  for (Parameter* p : Parameters()) p->grad.setZero();
}

bool Seq2SeqModel::AllFinite() const {
  for (const Parameter* p : Parameters()) {
    if (!p->value.allFinite()) return false;
  }
  return true;
}

void Seq2SeqModel::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoFailure, "cannot write " + path);
  config::KeyValues kv;
  config_.ToKeyValues(&kv);
  out << "aec-s2s 1\n";
  out << "config " << kv.entries().size() << "\n" << kv.ToText();
  auto vocab = [&out](const char* name, const Vocab& v) {
    out << "vocab " << name << " " << v.size() << "\n";
    for (const std::string& t : v.tokens()) out << t << "\n";
  };
  vocab("source", source_vocab_);
  vocab("target", target_vocab_);
  vocab("ipa", ipa_vocab_);
  out << "step " << step << "\n";
  for (const Parameter* p : Parameters()) {
    out << "param " << p->name << " " << p->value.rows() << " "
        << p->value.cols() << "\n";
    for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
        if (c > 0) out << ' ';
        out << HexFloat(p->value(r, c));
      }
      out << "\n";
    }
  }
  out << "end\n";
  if (!out) throw Error(ErrorKind::kIoFailure, "write failed: " + path);
}

Seq2SeqModel Seq2SeqModel::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot read " + path);
  auto bad = [&path](const std::string& what) {
    return Error(ErrorKind::kFormat, path + ": " + what);
  };
  std::string line;
  if (!std::getline(in, line) || line != "aec-s2s 1") {
    throw bad("not a version-1 seq2seq checkpoint");
  }
  auto header = [&](const std::string& word) {
    if (!std::getline(in, line)) throw bad("truncated before " + word);
    std::istringstream ss(line);
    std::string w;
    ss >> w;
    if (w != word) throw bad("expected '" + word + "', got '" + line + "'");
    return line.substr(word.size());
  };
  const long nconfig = std::stol(header("config"));
  std::string text;
  for (long i = 0; i < nconfig; ++i) {
    if (!std::getline(in, line)) throw bad("truncated config");
    text += line + "\n";
  }
  Seq2SeqModel model;
  model.config_ = ModelConfig::FromKeyValues(config::KeyValues::Parse(text));
  auto read_vocab = [&](const std::string& name, Vocab* v) {
    std::istringstream ss(header("vocab"));
    std::string got;
    long count = 0;
    ss >> got >> count;
    if (got != name) throw bad("expected vocab " + name);
    for (long i = 0; i < count; ++i) {
      if (!std::getline(in, line)) throw bad("truncated vocab " + name);
      if (v->Add(line) != i) throw bad("vocab " + name + " out of order");
    }
  };
  read_vocab("source", &model.source_vocab_);
  read_vocab("target", &model.target_vocab_);
  read_vocab("ipa", &model.ipa_vocab_);
  model.step = std::stol(header("step"));
  model.Allocate();
  for (Parameter* p : model.Parameters()) {
    std::istringstream ss(header("param"));
    std::string name;
    long rows = 0;
    long cols = 0;
    ss >> name >> rows >> cols;
    if (name != p->name || rows != p->value.rows() || cols != p->value.cols()) {
      throw bad("parameter " + p->name + " missing or misshapen");
    }
    for (long r = 0; r < rows; ++r) {
      if (!std::getline(in, line)) throw bad("truncated " + name);
      std::istringstream row(line);
      std::string tok;
      for (long c = 0; c < cols; ++c) {
        if (!(row >> tok)) throw bad("short row in " + name);
        p->value(r, c) = std::strtod(tok.c_str(), nullptr);
      }
    }
  }
  if (!std::getline(in, line) || line != "end") throw bad("missing end");
  return model;
}

// --- TrainingExample --------------------------------------------------------

void TrainingExample::Validate(const Seq2SeqModel& model) const {
  if (source.size() != source_ipa.size()) {
    throw Error(ErrorKind::kLengthMismatch,
                "source and IPA sequences differ in length");
  }
  auto check = [](const std::vector<int>& ids, int size, const char* what) {
    for (int id : ids) {
      if (id < 0 || id >= size) {
        throw Error(ErrorKind::kDimMismatch,
                    std::string(what) + " id " + std::to_string(id) +
                        " outside vocabulary");
      }
    }
  };
  check(source, model.source_vocab().size(), "source");
  check(source_ipa, model.ipa_vocab().size(), "ipa");
  check(target, model.target_vocab().size(), "target");
  if (!alignment.empty() &&
      (alignment.source_length() != static_cast<int>(source.size()) ||
       alignment.target_length() != static_cast<int>(target.size()))) {
    throw Error(ErrorKind::kDimMismatch,
                "alignment dimensions differ from the example");
  }
}

std::vector<int> IpaIds(const Seq2SeqModel& model,
                        const std::vector<std::string>& labels,
                        size_t source_length) {
  if (!model.config().use_ipa) return std::vector<int>(source_length, Vocab::kUnk);
  if (labels.size() != source_length) {
    throw Error(ErrorKind::kLengthMismatch,
                "IPA labels do not match the source length");
  }
  return model.ipa_vocab().Encode(labels);
}

// --- Operations -------------------------------------------------------------

Matrix FuseEmbeddings(const Matrix& word, const Matrix& ipa,
                      const FusionMlp& mlp) {
  if (word.rows() != ipa.rows() ||
      word.cols() + ipa.cols() != mlp.w1.value.rows() ||
      mlp.w2.value.rows() != mlp.w1.value.cols()) {
    throw Error(ErrorKind::kDimMismatch, "fusion input dimensions");
  }
  Tape tape(false);
  Var x = tape.Constant(word);
  if (ipa.cols() > 0) {
    const Var parts[] = {x, tape.Constant(ipa)};
    x = tape.ConcatCols(parts);
  }
  Var h = tape.Tanh(tape.AddRowBroadcast(tape.MatMul(x, tape.Param(mlp.w1)),
                                         tape.Param(mlp.b1)));
  return tape.value(tape.AddRowBroadcast(tape.MatMul(h, tape.Param(mlp.w2)),
                                         tape.Param(mlp.b2)));
}

ForwardResult Forward(const Seq2SeqModel& model,
                      const std::vector<TrainingExample>& batch, Mode mode,
                      noise::Rng* rng) {
  const bool train = mode == Mode::kTrain;
  if (train && rng == nullptr) {
    throw Error(ErrorKind::kInternal, "train mode needs an rng");
  }
  const PaddedBatch padded = Pad(model, batch);
  ForwardResult result;
  for (size_t e = 0; e < batch.size(); ++e) {
    Tape tape(false);
    Graph g{tape, model, train, rng};
    Var memory = g.Encode(padded.source[e], padded.ipa[e]);
    Var guided;
    Var logits = g.Decode(memory, PadFlags(padded.source[e]),
                          padded.decoder_input[e], &guided);
    const int rows = static_cast<int>(batch[e].target.size()) + 1;
    const int cols = static_cast<int>(batch[e].source.size());
    result.logits.push_back(tape.value(logits).topRows(rows));
    result.attention.push_back(
        AttentionRecord{tape.value(guided).topLeftCorner(rows, cols)});
  }
  return result;
}

Matrix AlignmentReference(const align::AlignmentLinkSet& alignment, int rows,
                          int cols) {
  if (alignment.source_length() > cols || alignment.target_length() > rows) {
    throw Error(ErrorKind::kDimMismatch, "alignment exceeds attention shape");
  }
  Matrix ref = Matrix::Zero(rows, cols);
  std::vector<int> count(rows, 0);
  for (const align::Link& l : alignment.links()) ++count[l.target];
  for (const align::Link& l : alignment.links()) {
    ref(l.target, l.source) = 1.0 / count[l.target];
  }
  return ref;
}

double GuidedAttentionLoss(const AttentionRecord& attn,
                           const align::AlignmentLinkSet& alignment) {
  const Matrix& a = attn.weights;
  const int n = alignment.target_length();
  if (a.cols() != alignment.source_length() ||
      (a.rows() != n && a.rows() != n + 1)) {
    throw Error(ErrorKind::kDimMismatch,
                "attention shape differs from the alignment");
  }
  const Matrix ref =
      AlignmentReference(alignment, static_cast<int>(a.rows()),
                         static_cast<int>(a.cols()));
  double loss = 0.0;
  int rows = 0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    if (ref.row(r).sum() == 0.0) continue;
    ++rows;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      if (ref(r, c) != 0.0) loss -= ref(r, c) * std::log(std::max(a(r, c), 1e-9));
    }
  }
  return rows == 0 ? 0.0 : loss / rows;
}

LossBreakdown TrainingLoss(Seq2SeqModel& model,
                           const std::vector<TrainingExample>& batch,
                           Mode mode, noise::Rng* rng, bool accumulate,
                           double grad_scale) {
  const bool train = mode == Mode::kTrain;
  if (train && rng == nullptr) {
    throw Error(ErrorKind::kInternal, "train mode needs an rng");
  }
  const ModelConfig& c = model.config();
  const PaddedBatch padded = Pad(model, batch);
  LossBreakdown out;
  out.tokens = padded.tokens;
  const bool guide = c.guidance_weight > 0.0;
  for (const TrainingExample& ex : batch) {
    std::vector<bool> linked(ex.target.size(), false);
    for (const align::Link& l : ex.alignment.links()) linked[l.target] = true;
    out.supervised_rows += std::count(linked.begin(), linked.end(), true);
  }
  double ce_sum = 0.0;
  double guide_sum = 0.0;
  for (size_t e = 0; e < batch.size(); ++e) {
    Tape tape(accumulate);
    Graph g{tape, model, train, rng};
    Var memory = g.Encode(padded.source[e], padded.ipa[e]);
    Var guided;
    Var logits = g.Decode(memory, PadFlags(padded.source[e]),
                          padded.decoder_input[e], &guided);
    Var ce = tape.SmoothedCrossEntropy(logits, padded.decoder_output[e],
                                       Vocab::kPad, c.label_smoothing);
    ce_sum += tape.value(ce)(0, 0);
    Var loss = tape.Scale(ce, 1.0 / static_cast<double>(out.tokens));
    if (guide && out.supervised_rows > 0 && !batch[e].alignment.empty()) {
      const Matrix& a = tape.value(guided);
      const Matrix ref = AlignmentReference(
          batch[e].alignment, static_cast<int>(a.rows()),
          static_cast<int>(a.cols()));
      Var gl = tape.ReferenceCrossEntropy(guided, ref);
      guide_sum += tape.value(gl)(0, 0);
      loss = tape.Add(
          loss, tape.Scale(gl, c.guidance_weight /
                                   static_cast<double>(out.supervised_rows)));
    }
    if (accumulate) tape.Backward(loss, grad_scale);
  }
  out.cross_entropy = ce_sum / static_cast<double>(out.tokens);
  out.guidance =
      out.supervised_rows > 0 ? guide_sum / out.supervised_rows : 0.0;
  out.total = out.cross_entropy + (guide ? c.guidance_weight * out.guidance : 0.0);
  return out;
}

LossBreakdown ValidationLoss(const Seq2SeqModel& model,
                             const std::vector<TrainingExample>& batch) {
  const PaddedBatch padded = Pad(model, batch);
  LossBreakdown out;
  out.tokens = padded.tokens;
  double ce_sum = 0.0;
  for (size_t e = 0; e < batch.size(); ++e) {
    Tape tape(false);
    Graph g{tape, model, false, nullptr};
    Var memory = g.Encode(padded.source[e], padded.ipa[e]);
    Var logits = g.Decode(memory, PadFlags(padded.source[e]),
                          padded.decoder_input[e], nullptr);
    ce_sum += tape.value(tape.SmoothedCrossEntropy(
        logits, padded.decoder_output[e], Vocab::kPad, 0.0))(0, 0);
  }
  out.cross_entropy = ce_sum / static_cast<double>(out.tokens);
  out.total = out.cross_entropy;
  return out;
}

// --- Decoding ---------------------------------------------------------------

namespace {

struct Hypothesis {
  std::vector<int> ids;  // generated tokens, eos included when finished
  double log_prob = 0.0;
  bool finished = false;

  double score() const {
    return ids.empty() ? 0.0 : log_prob / static_cast<double>(ids.size());
  }
};

// Better score first; equal scores prefer the lexicographically smaller
// token sequence.
bool Better(const Hypothesis& a, const Hypothesis& b) {
  if (a.score() != b.score()) return a.score() > b.score();
  return a.ids < b.ids;
}

Eigen::RowVectorXd NextLogProbs(const Seq2SeqModel& model,
                                const Matrix& memory,
                                const std::vector<bool>& source_pad,
                                const std::vector<int>& prefix) {
  Tape tape(false);
  Graph g{tape, model, false, nullptr};
  std::vector<int> input{Vocab::kBos};
  input.insert(input.end(), prefix.begin(), prefix.end());
  Var logits = g.Decode(tape.Constant(memory), source_pad, input, nullptr);
  Eigen::RowVectorXd row = tape.value(logits).bottomRows(1);
  row[Vocab::kPad] = kNegInf;
  row[Vocab::kBos] = kNegInf;
  const double mx = row.maxCoeff();
  const double lse = mx + std::log((row.array() - mx).exp().sum());
  return row.array() - lse;
}

int ArgMax(const Eigen::RowVectorXd& row) {
  int best = 0;
  for (int i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

}  // namespace

std::vector<int> Decode(const Seq2SeqModel& model,
                        const std::vector<int>& source,
                        const std::vector<int>& source_ipa,
                        const DecodeOptions& options) {
  const int max_len =
      options.max_len > 0 ? options.max_len : model.config().max_len;
  if (static_cast<int>(source.size()) > model.config().max_len) {
    throw Error(ErrorKind::kSequenceTooLong,
                "source of " + std::to_string(source.size()) +
                    " tokens exceeds max_len " +
                    std::to_string(model.config().max_len));
  }
  TrainingExample probe{source, source_ipa, {}, {}};
  probe.Validate(model);
  if (source.empty()) return {};

  Matrix memory;
  {
    Tape tape(false);
    Graph g{tape, model, false, nullptr};
    memory = tape.value(g.Encode(source, source_ipa));
  }
  const std::vector<bool> source_pad(source.size(), false);

  if (options.strategy == DecodeOptions::Strategy::kGreedy) {
    std::vector<int> out;
    while (static_cast<int>(out.size()) < max_len) {
      const int next = ArgMax(NextLogProbs(model, memory, source_pad, out));
      if (next == Vocab::kEos) break;
      out.push_back(next);
    }
    return out;
  }

  const int k = std::max(1, options.beam);
  std::vector<Hypothesis> beam(1);
  while (true) {
    std::vector<Hypothesis> pool;
    bool expanded = false;
    for (const Hypothesis& h : beam) {
      if (h.finished || static_cast<int>(h.ids.size()) >= max_len) {
        pool.push_back(h);
        continue;
      }
      expanded = true;
      const Eigen::RowVectorXd lp = NextLogProbs(model, memory, source_pad, h.ids);
      std::vector<int> order(lp.size());
      for (int i = 0; i < lp.size(); ++i) order[i] = i;
      const int take = std::min<int>(k, static_cast<int>(lp.size()));
      std::partial_sort(order.begin(), order.begin() + take, order.end(),
                        [&lp](int a, int b) {
                          return lp[a] != lp[b] ? lp[a] > lp[b] : a < b;
                        });
      for (int t = 0; t < take; ++t) {
        if (!std::isfinite(lp[order[t]])) continue;
        Hypothesis next = h;
        next.ids.push_back(order[t]);
        next.log_prob += lp[order[t]];
        next.finished = order[t] == Vocab::kEos;
        pool.push_back(std::move(next));
      }
    }
    std::sort(pool.begin(), pool.end(), Better);
    if (static_cast<int>(pool.size()) > k) pool.resize(k);
    beam = std::move(pool);
    const bool done = std::all_of(
        beam.begin(), beam.end(), [max_len](const Hypothesis& h) {
          return h.finished || static_cast<int>(h.ids.size()) >= max_len;
        });
    if (done || !expanded) break;
  }
  std::vector<int> out = beam.front().ids;
  if (!out.empty() && out.back() == Vocab::kEos) out.pop_back();
  return out;
}

}  // namespace aec::s2s
