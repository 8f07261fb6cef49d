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

#include "errtrace/checkpoint_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "errtrace/error.hpp"

namespace errtrace {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'E', 'R', 'R', 'T', 'C', 'K', 'P', '1'};

}  // namespace

std::string checkpoint_filename(std::size_t epoch) { return "ckpt-" + std::to_string(epoch); }

void save_checkpoint(const std::string& path, const Checkpoint& ckpt, const Seq2Seq& model,
                     const nlohmann::json& meta) {
  nlohmann::json header;
  header["epoch"] = ckpt.epoch;
  header["eta"] = ckpt.eta;
  header["train_loss"] = ckpt.train_loss;
  header["model"] = {{"vocab_size", model.config().vocab_size}, {"dim", model.config().dim}};
  nlohmann::json layout = nlohmann::json::array();
  for (const auto& b : model.layout()) {
    layout.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}, {"offset", b.offset}});
  }
  header["layout"] = layout;
  header["num_params"] = ckpt.params.size();
  header["meta"] = meta;
  const std::string text = header.dump();

  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw PipelineError("io", "cannot write " + tmp);
    const std::uint64_t len = text.size();
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.write(reinterpret_cast<const char*>(ckpt.params.data()),
              static_cast<std::streamsize>(ckpt.params.size() * sizeof(double)));
  }
  std::filesystem::rename(tmp, p);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("stage-dependency", "missing checkpoint " + path);
  char magic[8];
  std::uint64_t len = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw PipelineError("io", "not a checkpoint file: " + path);
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  const auto header = nlohmann::json::parse(text);

  LoadedCheckpoint out;
  out.checkpoint.epoch = header.at("epoch");
  out.checkpoint.eta = header.at("eta");
  out.checkpoint.train_loss = header.at("train_loss");
  out.model.vocab_size = header.at("model").at("vocab_size");
  out.model.dim = header.at("model").at("dim");
  out.meta = header.value("meta", nlohmann::json::object());
  const std::size_t n = header.at("num_params");
  out.checkpoint.params.resize(n);
  in.read(reinterpret_cast<char*>(out.checkpoint.params.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw PipelineError("io", "truncated checkpoint " + path);

  const Seq2Seq check(out.model);
  if (check.num_params() != n) throw PipelineError("io", "checkpoint layout does not match its model config");
  return out;
}

}  // namespace errtrace
