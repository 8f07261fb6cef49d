// Copyright 2026 The errtrace Authors.
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

#include "errtrace/seq2seq.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "errtrace/rng.hpp"

namespace errtrace {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using CMat = Eigen::Map<const MatrixXd>;
using CVec = Eigen::Map<const VectorXd>;
using Mat = Eigen::Map<MatrixXd>;
using Vec = Eigen::Map<VectorXd>;

enum Block : std::size_t { kEmbed, kEncW, kEncB, kDecRec, kDecIn, kDecB, kOutS, kOutC, kOutB, kProjW, kProjB };

// Column-wise softmax in place; returns the log-probability of each
// column's `picks` entry.
std::vector<double> softmax_columns(MatrixXd& z, std::span<const TokenId> picks) {
  std::vector<double> logp(static_cast<std::size_t>(z.cols()));
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    auto col = z.col(j);
    const double mx = col.maxCoeff();
    col.array() -= mx;
    const double lse = std::log(col.array().exp().sum());
    logp[static_cast<std::size_t>(j)] = col(picks[static_cast<std::size_t>(j)]) - lse;
    col = (col.array() - lse).exp();
  }
  return logp;
}

}  // namespace

struct Seq2Seq::Forward {
  MatrixXd x;    // d x n source embeddings
  MatrixXd h;    // d x n encoder states
  MatrixXd yin;  // d x L decoder input embeddings
  MatrixXd s;    // d x (L + 1) decoder states, column 0 is s_0
  MatrixXd a;    // n x L attention weights
  MatrixXd c;    // d x L contexts
  MatrixXd o;    // d x L output features
  MatrixXd p;    // V x L output distributions
  TokenSeq in;
  TokenSeq out;
  std::vector<double> logp;
};

Seq2Seq::Seq2Seq(ModelConfig config) : config_(config) {
  if (config_.vocab_size < 5) throw std::invalid_argument("vocab too small");
  if (config_.dim < 1) throw std::invalid_argument("model dim must be >= 1");
  const std::size_t d = config_.dim;
  const std::size_t v = config_.vocab_size;
  const std::pair<const char*, std::pair<std::size_t, std::size_t>> shapes[] = {
      {"embed", {d, v}},   {"enc_w", {d, d}}, {"enc_b", {d, 1}}, {"dec_rec", {d, d}},
      {"dec_in", {d, d}},  {"dec_b", {d, 1}}, {"out_s", {d, d}}, {"out_c", {d, d}},
      {"out_b", {d, 1}},   {"proj_w", {v, d}}, {"proj_b", {v, 1}},
  };
  for (const auto& [name, shape] : shapes) {
    blocks_.push_back({name, shape.first, shape.second, total_});
    total_ += shape.first * shape.second;
  }
}

const ParamBlock& Seq2Seq::block(const std::string& name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return b;
  }
  throw std::out_of_range("unknown parameter block " + name);
}

std::vector<double> Seq2Seq::init_params(std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<double> params(total_, 0.0);
  for (const auto& b : blocks_) {
    if (b.cols == 1) continue;  // biases start at zero
    double range = std::sqrt(6.0 / static_cast<double>(b.rows + b.cols));
    if (b.name == "embed") range = std::sqrt(3.0 / static_cast<double>(b.rows));
    for (std::size_t i = 0; i < b.size(); ++i) params[b.offset + i] = rng.uniform(-range, range);
  }
  return params;
}

void Seq2Seq::check_tokens(std::span<const TokenId> seq) const {
  for (TokenId t : seq) {
    if (t < 0 || static_cast<std::size_t>(t) >= config_.vocab_size) {
      throw std::out_of_range("token id outside the model vocabulary");
    }
  }
}

void Seq2Seq::forward(std::span<const double> params, std::span<const TokenId> source,
                      std::span<const TokenId> target, Forward& f) const {
  if (source.empty() || target.empty()) throw std::invalid_argument("source and target must be non-empty");
  if (params.size() != total_) throw std::invalid_argument("parameter vector has the wrong length");
  check_tokens(source);
  check_tokens(target);

  const auto d = static_cast<Eigen::Index>(config_.dim);
  const auto n = static_cast<Eigen::Index>(source.size());
  const auto len = static_cast<Eigen::Index>(target.size() + 1);
  const double* base = params.data();
  auto mat = [&](Block k) {
    const auto& b = blocks_[k];
    return CMat(base + b.offset, static_cast<Eigen::Index>(b.rows), static_cast<Eigen::Index>(b.cols));
  };
  auto vec = [&](Block k) { return CVec(base + blocks_[k].offset, static_cast<Eigen::Index>(blocks_[k].size())); };
  const CMat embed = mat(kEmbed);

  f.in.assign(1, Vocab::kBos);
  f.in.insert(f.in.end(), target.begin(), target.end());
  f.out.assign(target.begin(), target.end());
  f.out.push_back(Vocab::kEos);

  f.x.resize(d, n);
  for (Eigen::Index i = 0; i < n; ++i) f.x.col(i) = embed.col(source[static_cast<std::size_t>(i)]);
  f.h = ((mat(kEncW) * f.x).colwise() + vec(kEncB)).array().tanh().matrix();

  f.yin.resize(d, len);
  for (Eigen::Index j = 0; j < len; ++j) f.yin.col(j) = embed.col(f.in[static_cast<std::size_t>(j)]);
  const MatrixXd in_proj = (mat(kDecIn) * f.yin).colwise() + vec(kDecB);
  const CMat rec = mat(kDecRec);
  f.s.setZero(d, len + 1);
  for (Eigen::Index j = 1; j <= len; ++j) {
    f.s.col(j) = (rec * f.s.col(j - 1) + in_proj.col(j - 1)).array().tanh().matrix();
  }
  const auto states = f.s.rightCols(len);

  f.a = f.h.transpose() * states;
  for (Eigen::Index j = 0; j < len; ++j) {
    auto col = f.a.col(j);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
  f.c = f.h * f.a;
  f.o = ((mat(kOutS) * states + mat(kOutC) * f.c).colwise() + vec(kOutB)).array().tanh().matrix();
  f.p = (mat(kProjW) * f.o).colwise() + vec(kProjB);
  f.logp = softmax_columns(f.p, f.out);
}

double Seq2Seq::loss(std::span<const double> params, std::span<const TokenId> source,
                     std::span<const TokenId> target) const {
  Forward f;
  forward(params, source, target, f);
  double total = 0.0;
  for (double lp : f.logp) total -= lp;
  return total / static_cast<double>(f.logp.size());
}

std::vector<double> Seq2Seq::token_probabilities(std::span<const double> params, std::span<const TokenId> source,
                                                 std::span<const TokenId> target) const {
  Forward f;
  forward(params, source, target, f);
  std::vector<double> probs;
  for (std::size_t j = 0; j < f.out.size(); ++j) probs.push_back(f.p(f.out[j], static_cast<Eigen::Index>(j)));
  return probs;
}

double Seq2Seq::accumulate_gradient(std::span<const double> params, std::span<const TokenId> source,
                                    std::span<const TokenId> target, double scale,
                                    std::span<double> grad) const {
  if (grad.size() != total_) throw std::invalid_argument("gradient buffer has the wrong length");
  Forward f;
  forward(params, source, target, f);
  const auto len = static_cast<Eigen::Index>(f.out.size());
  const auto n = static_cast<Eigen::Index>(source.size());
  const double* base = params.data();
  auto mat = [&](Block k) {
    const auto& b = blocks_[k];
    return CMat(base + b.offset, static_cast<Eigen::Index>(b.rows), static_cast<Eigen::Index>(b.cols));
  };
  auto gmat = [&](Block k) {
    const auto& b = blocks_[k];
    return Mat(grad.data() + b.offset, static_cast<Eigen::Index>(b.rows), static_cast<Eigen::Index>(b.cols));
  };
  auto gvec = [&](Block k) { return Vec(grad.data() + blocks_[k].offset, static_cast<Eigen::Index>(blocks_[k].size())); };

  double total = 0.0;
  for (double lp : f.logp) total -= lp;
  const double loss_value = total / static_cast<double>(len);

  // Output layer.
  MatrixXd dz = f.p;
  for (Eigen::Index j = 0; j < len; ++j) dz(f.out[static_cast<std::size_t>(j)], j) -= 1.0;
  dz *= scale / static_cast<double>(len);
  gmat(kProjW).noalias() += dz * f.o.transpose();
  gvec(kProjB).noalias() += dz.rowwise().sum();
  const MatrixXd du = ((mat(kProjW).transpose() * dz).array() * (1.0 - f.o.array().square())).matrix();

  const auto states = f.s.rightCols(len);
  gmat(kOutS).noalias() += du * states.transpose();
  gmat(kOutC).noalias() += du * f.c.transpose();
  gvec(kOutB).noalias() += du.rowwise().sum();
  MatrixXd ds = mat(kOutS).transpose() * du;
  const MatrixXd dc = mat(kOutC).transpose() * du;

  // Attention.
  MatrixXd dh = dc * f.a.transpose();
  MatrixXd de = f.h.transpose() * dc;
  for (Eigen::Index j = 0; j < len; ++j) {
    const double inner = f.a.col(j).dot(de.col(j));
    de.col(j) = (f.a.col(j).array() * (de.col(j).array() - inner)).matrix();
  }
  dh.noalias() += states * de.transpose();
  ds.noalias() += f.h * de;

  // Decoder recurrence, last step first.
  auto g_embed = gmat(kEmbed);
  const CMat rec = mat(kDecRec);
  const CMat din = mat(kDecIn);
  MatrixXd dr(ds.rows(), len);
  VectorXd carry = VectorXd::Zero(ds.rows());
  for (Eigen::Index j = len; j >= 1; --j) {
    const VectorXd total_ds = ds.col(j - 1) + carry;
    dr.col(j - 1) = (total_ds.array() * (1.0 - f.s.col(j).array().square())).matrix();
    carry.noalias() = rec.transpose() * dr.col(j - 1);
  }
  gmat(kDecRec).noalias() += dr * f.s.leftCols(len).transpose();
  gmat(kDecIn).noalias() += dr * f.yin.transpose();
  gvec(kDecB).noalias() += dr.rowwise().sum();
  const MatrixXd dyin = din.transpose() * dr;
  for (Eigen::Index j = 0; j < len; ++j) g_embed.col(f.in[static_cast<std::size_t>(j)]) += dyin.col(j);

  // Encoder.
  const MatrixXd dq = (dh.array() * (1.0 - f.h.array().square())).matrix();
  gmat(kEncW).noalias() += dq * f.x.transpose();
  gvec(kEncB).noalias() += dq.rowwise().sum();
  const MatrixXd dx = mat(kEncW).transpose() * dq;
  for (Eigen::Index i = 0; i < n; ++i) g_embed.col(source[static_cast<std::size_t>(i)]) += dx.col(i);

  return loss_value;
}

TokenSeq Seq2Seq::greedy_decode(std::span<const double> params, std::span<const TokenId> source,
                                std::size_t max_len) const {
  if (source.empty()) throw std::invalid_argument("source must be non-empty");
  check_tokens(source);
  const auto d = static_cast<Eigen::Index>(config_.dim);
  const auto n = static_cast<Eigen::Index>(source.size());
  const double* base = params.data();
  auto mat = [&](Block k) {
    const auto& b = blocks_[k];
    return CMat(base + b.offset, static_cast<Eigen::Index>(b.rows), static_cast<Eigen::Index>(b.cols));
  };
  auto vec = [&](Block k) { return CVec(base + blocks_[k].offset, static_cast<Eigen::Index>(blocks_[k].size())); };
  const CMat embed = mat(kEmbed);

  MatrixXd x(d, n);
  for (Eigen::Index i = 0; i < n; ++i) x.col(i) = embed.col(source[static_cast<std::size_t>(i)]);
  const MatrixXd h = ((mat(kEncW) * x).colwise() + vec(kEncB)).array().tanh().matrix();
  TokenSeq out;
  VectorXd s = VectorXd::Zero(d);
  TokenId prev = Vocab::kBos;
  while (out.size() < max_len) {
    s = (mat(kDecRec) * s + mat(kDecIn) * embed.col(prev) + vec(kDecB)).array().tanh().matrix();
    VectorXd a = h.transpose() * s;
    a.array() -= a.maxCoeff();
    a = a.array().exp().matrix();
    a /= a.sum();
    const VectorXd c = h * a;
    const VectorXd o = (mat(kOutS) * s + mat(kOutC) * c + vec(kOutB)).array().tanh().matrix();
    const VectorXd z = mat(kProjW) * o + vec(kProjB);
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < z.size(); ++k) {
      if (z(k) > z(best)) best = k;
    }
    prev = static_cast<TokenId>(best);
    if (prev == Vocab::kEos) break;
    out.push_back(prev);
  }
  return out;
}

std::vector<double> Seq2Seq::encode_repr(std::span<const double> params, std::span<const TokenId> source,
                                         std::span<const TokenId> target) const {
  if (source.empty() || target.empty()) throw std::invalid_argument("source and target must be non-empty");
  check_tokens(source);
  check_tokens(target);
  const auto d = static_cast<Eigen::Index>(config_.dim);
  const double* base = params.data();
  const auto& eb = blocks_[kEmbed];
  const CMat embed(base + eb.offset, static_cast<Eigen::Index>(eb.rows), static_cast<Eigen::Index>(eb.cols));
  const auto& wb = blocks_[kEncW];
  const CMat enc_w(base + wb.offset, d, d);
  const CVec enc_b(base + blocks_[kEncB].offset, d);

  VectorXd enc = VectorXd::Zero(d);
  for (TokenId t : source) enc += (enc_w * embed.col(t) + enc_b).array().tanh().matrix();
  enc /= static_cast<double>(source.size());
  VectorXd dec = VectorXd::Zero(d);
  for (TokenId t : target) dec += embed.col(t);
  dec /= static_cast<double>(target.size());

  std::vector<double> out(static_cast<std::size_t>(2 * d));
  for (Eigen::Index i = 0; i < d; ++i) {
    out[static_cast<std::size_t>(i)] = enc(i);
    out[static_cast<std::size_t>(d + i)] = dec(i);
  }
  const double norm = std::sqrt(dot(out, out));
  if (norm > 0.0) {
    for (double& v : out) v /= norm;
  }
  return out;
}

ParamSubset Seq2Seq::subset(const std::vector<std::string>& block_names) const {
  ParamSubset out;
  for (const auto& name : block_names) {
    const auto& b = block(name);
    out.push_back({b.offset, b.size()});
  }
  return out;
}

ParamSubset Seq2Seq::named_subset(const std::string& selector) const {
  if (selector == "all") return all_params();
  if (selector == "output") return subset({"proj_w", "proj_b"});
  if (selector == "output+embed") return subset({"embed", "proj_w", "proj_b"});
  throw std::invalid_argument("unknown parameter subset " + selector);
}

}  // namespace errtrace
