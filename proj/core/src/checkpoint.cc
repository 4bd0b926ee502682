// Copyright 2026 The SGC Authors
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

#include "sgc/checkpoint.h"

#include <string>
#include <vector>

#include "json.hpp"
#include "sgc/dataio.h"
#include "sgc/errors.h"
#include "sgc/rng.h"

namespace sgc {

using nlohmann::json;

std::string SerializeCheckpoint(const ModelParams& params, const DecodeConfig& decode) {
  json root;
  root["version"] = 1;
  root["config"] = {{"embed_dim", params.config.embed_dim},
                    {"step_dims", params.config.step_dims},
                    {"mp_steps", params.config.num_steps()},
                    {"theta_hidden", params.config.theta_hidden},
                    {"normalize_steps", params.config.normalize_steps},
                    {"p_tau", decode.p_tau},
                    {"levels", decode.levels}};
  json tensors = json::object();
  params.ForEachTensor([&tensors](const std::string& name, const Tensor& t) {
    std::vector<double> data;
    data.reserve(t.size());
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) data.push_back(t(r, c));
    }
    tensors[name] = {{"shape", {t.rows(), t.cols()}}, {"data", std::move(data)}};
  });
  root["tensors"] = std::move(tensors);
  return root.dump() + "\n";
}

Checkpoint ParseCheckpoint(const std::string& json_text) {
  Checkpoint ck;
  try {
    const json root = json::parse(json_text);
    if (root.at("version").get<int>() != 1) {
      throw Error(ErrorCode::kSchemaError, "unsupported checkpoint version");
    }
    const json& cfg = root.at("config");
    ModelConfig mc;
    mc.embed_dim = cfg.at("embed_dim").get<int>();
    mc.step_dims = cfg.at("step_dims").get<std::vector<int>>();
    mc.theta_hidden = cfg.at("theta_hidden").get<int>();
    mc.normalize_steps = cfg.value("normalize_steps", true);
    mc.Validate();
    if (cfg.contains("p_tau")) ck.decode.p_tau = cfg.at("p_tau").get<double>();
    if (cfg.contains("levels")) ck.decode.levels = cfg.at("levels").get<int>();

    // Initialize to get the shapes, then overwrite every tensor.
    Rng rng(0);
    ck.params = InitParams(mc, rng);
    const json& tensors = root.at("tensors");
    ck.params.ForEachTensor([&tensors](const std::string& name, Tensor& t) {
      if (!tensors.contains(name)) {
        throw Error(ErrorCode::kSchemaError, "checkpoint lacks tensor '" + name + "'");
      }
      const json& jt = tensors.at(name);
      const auto shape = jt.at("shape").get<std::vector<Eigen::Index>>();
      const auto data = jt.at("data").get<std::vector<double>>();
      if (shape.size() != 2 || shape[0] != t.rows() || shape[1] != t.cols() ||
          static_cast<Eigen::Index>(data.size()) != t.size()) {
        throw Error(ErrorCode::kDimMismatch,
                    "tensor '" + name + "' does not match the configured shape");
      }
      std::size_t k = 0;
      for (Eigen::Index r = 0; r < t.rows(); ++r) {
        for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = data[k++];
      }
    });
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("checkpoint: ") + e.what());
  }
  if (!ck.params.AllFinite()) {
    throw Error(ErrorCode::kNonFinite, "checkpoint holds non-finite values");
  }
  return ck;
}

void SaveCheckpoint(const std::string& path, const ModelParams& params,
                    const DecodeConfig& decode) {
  WriteTextFile(path, SerializeCheckpoint(params, decode));
}

Checkpoint LoadCheckpoint(const std::string& path) {
  return ParseCheckpoint(ReadTextFile(path));
}

}  // namespace sgc
