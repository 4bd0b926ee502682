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

#include "sgc/dataio.h"

#include <cmath>
#include <limits>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "sgc/errors.h"

namespace sgc {

using nlohmann::json;

bool Scene::FullyLabeled() const {
  for (const Detection& d : detections) {
    if (!d.identity) return false;
  }
  return true;
}

bool Dataset::FullyLabeled() const {
  for (const Scene& s : scenes) {
    if (!s.FullyLabeled()) return false;
  }
  return true;
}

Eigen::VectorXd NormalizeEmbedding(const Eigen::VectorXd& v) {
  if (!v.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "embedding has non-finite entries");
  }
  const double norm = v.norm();
  if (norm < 1e-12) {
    throw Error(ErrorCode::kZeroVector, "embedding norm is below 1e-12");
  }
  // Already unit length up to rounding: dividing again would only perturb the
  // last bits, so loading a saved dataset would not reproduce it.
  const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(v.size() + 1);
  if (std::abs(norm - 1.0) <= tol) return v;
  return v / norm;
}

void ValidateScene(const Scene& scene, int embed_dim) {
  if (scene.num_cameras < 2) {
    throw Error(ErrorCode::kSchemaError,
                "scene '" + scene.scene_id + "' needs at least two cameras");
  }
  for (const Detection& d : scene.detections) {
    if (d.camera_id < 0 || d.camera_id >= scene.num_cameras) {
      throw Error(ErrorCode::kUnknownCamera,
                  "camera " + std::to_string(d.camera_id) + " in scene '" +
                      scene.scene_id + "'");
    }
    if (d.embedding.size() != embed_dim) {
      throw Error(ErrorCode::kDimMismatch,
                  "embedding of width " + std::to_string(d.embedding.size()) +
                      " in a dataset of width " + std::to_string(embed_dim));
    }
    if (!d.embedding.allFinite() || !std::isfinite(d.ground.gx) ||
        !std::isfinite(d.ground.gy)) {
      throw Error(ErrorCode::kNonFinite,
                  "non-finite detection in scene '" + scene.scene_id + "'");
    }
  }
}

namespace {

double Number(const json& j, const char* what) {
  if (!j.is_number()) {
    throw Error(ErrorCode::kSchemaError, std::string(what) + " must be a number");
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kNonFinite, std::string(what) + " is not finite");
  }
  return v;
}

const json& Field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kSchemaError, std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

int Integer(const json& j, const char* what) {
  if (!j.is_number_integer()) {
    throw Error(ErrorCode::kSchemaError, std::string(what) + " must be an integer");
  }
  return j.get<int>();
}

bool Present(const json& j, const char* key) {
  return j.contains(key) && !j.at(key).is_null();
}

Detection ParseDetection(const json& jd, const Dataset& dataset,
                         const LoadOptions& options) {
  Detection d;
  d.camera_id = Integer(Field(jd, "camera"), "camera");
  if (d.camera_id < 0 || d.camera_id >= dataset.num_cameras) {
    throw Error(ErrorCode::kUnknownCamera,
                "camera " + std::to_string(d.camera_id) + " >= num_cameras");
  }

  const json& je = Field(jd, "embedding");
  if (!je.is_array()) {
    throw Error(ErrorCode::kSchemaError, "embedding must be an array");
  }
  if (static_cast<int>(je.size()) != dataset.embed_dim) {
    throw Error(ErrorCode::kDimMismatch,
                "embedding of width " + std::to_string(je.size()) +
                    " in a dataset of width " + std::to_string(dataset.embed_dim));
  }
  d.embedding.resize(dataset.embed_dim);
  for (int k = 0; k < dataset.embed_dim; ++k) {
    d.embedding[k] = Number(je[k], "embedding");
  }
  d.embedding = NormalizeEmbedding(d.embedding);

  if (Present(jd, "bbox")) {
    const json& jb = jd["bbox"];
    if (!jb.is_array() || jb.size() != 4) {
      throw Error(ErrorCode::kSchemaError, "bbox must be [x, y, w, h]");
    }
    BBox b{Number(jb[0], "bbox"), Number(jb[1], "bbox"), Number(jb[2], "bbox"),
           Number(jb[3], "bbox")};
    ValidateBBox(b);
    d.bbox = b;
  }

  if (Present(jd, "ground")) {
    const json& jg = jd["ground"];
    if (!jg.is_array() || jg.size() != 2) {
      throw Error(ErrorCode::kSchemaError, "ground must be [gx, gy]");
    }
    d.ground = {Number(jg[0], "ground"), Number(jg[1], "ground")};
  } else if (d.bbox) {
    auto it = dataset.homographies.find(d.camera_id);
    if (it == dataset.homographies.end()) {
      throw Error(ErrorCode::kSchemaError,
                  "detection has a bbox but camera " + std::to_string(d.camera_id) +
                      " has no homography");
    }
    d.ground = ProjectToGround(it->second,
                               StandingPoint(*d.bbox, options.standing_point));
  } else {
    throw Error(ErrorCode::kSchemaError,
                "detection needs a bbox or a ground position");
  }

  if (Present(jd, "identity")) {
    d.identity = Integer(jd["identity"], "identity");
  }
  return d;
}

}  // namespace

Dataset ParseDataset(const std::string& json_text, const LoadOptions& options) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError, std::string("malformed JSON: ") + e.what());
  } catch (const json::out_of_range& e) {
    // Numbers beyond the double range, e.g. 1e400.
    throw Error(ErrorCode::kNonFinite, std::string("number out of range: ") + e.what());
  }

  Dataset dataset;
  dataset.version = Integer(Field(root, "version"), "version");
  if (dataset.version != 1) {
    throw Error(ErrorCode::kSchemaError,
                "unsupported dataset version " + std::to_string(dataset.version));
  }
  dataset.num_cameras = Integer(Field(root, "num_cameras"), "num_cameras");
  dataset.embed_dim = Integer(Field(root, "embed_dim"), "embed_dim");
  if (dataset.num_cameras < 2) {
    throw Error(ErrorCode::kSchemaError, "num_cameras must be at least 2");
  }
  if (dataset.embed_dim < 1) {
    throw Error(ErrorCode::kSchemaError, "embed_dim must be positive");
  }

  if (Present(root, "homographies")) {
    const json& jh = root["homographies"];
    if (!jh.is_object()) {
      throw Error(ErrorCode::kSchemaError,
                  "homographies must map camera id to 9 numbers");
    }
    for (const auto& [key, value] : jh.items()) {
      int cam = 0;
      try {
        std::size_t used = 0;
        cam = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kSchemaError,
                    "homography key '" + key + "' is not a camera id");
      }
      if (cam < 0 || cam >= dataset.num_cameras) {
        throw Error(ErrorCode::kUnknownCamera, "homography for camera " + key);
      }
      if (!value.is_array() || value.size() != 9) {
        throw Error(ErrorCode::kSchemaError, "homography must have 9 numbers");
      }
      std::array<double, 9> m{};
      for (int k = 0; k < 9; ++k) m[k] = Number(value[k], "homography");
      dataset.homographies.emplace(cam, Homography(m));
    }
  }

  const json& js = Field(root, "scenes");
  if (!js.is_array()) throw Error(ErrorCode::kSchemaError, "scenes must be an array");
  dataset.scenes.reserve(js.size());
  for (const json& jscene : js) {
    Scene scene;
    const json& jid = Field(jscene, "scene_id");
    if (!jid.is_string()) {
      throw Error(ErrorCode::kSchemaError, "scene_id must be a string");
    }
    scene.scene_id = jid.get<std::string>();
    scene.num_cameras = dataset.num_cameras;
    const json& jdets = Field(jscene, "detections");
    if (!jdets.is_array()) {
      throw Error(ErrorCode::kSchemaError, "detections must be an array");
    }
    scene.detections.reserve(jdets.size());
    for (const json& jd : jdets) {
      scene.detections.push_back(ParseDetection(jd, dataset, options));
    }
    ValidateScene(scene, dataset.embed_dim);
    dataset.scenes.push_back(std::move(scene));
  }
  return dataset;
}

Dataset LoadDataset(const std::string& path, const LoadOptions& options) {
  return ParseDataset(ReadTextFile(path), options);
}

std::string SerializeDataset(const Dataset& dataset) {
  json root;
  root["version"] = dataset.version;
  root["num_cameras"] = dataset.num_cameras;
  root["embed_dim"] = dataset.embed_dim;
  if (!dataset.homographies.empty()) {
    json jh = json::object();
    for (const auto& [cam, h] : dataset.homographies) {
      jh[std::to_string(cam)] = h.row_major();
    }
    root["homographies"] = jh;
  }
  json scenes = json::array();
  for (const Scene& scene : dataset.scenes) {
    json jdets = json::array();
    for (const Detection& d : scene.detections) {
      json jd;
      jd["camera"] = d.camera_id;
      if (d.bbox) jd["bbox"] = {d.bbox->x, d.bbox->y, d.bbox->w, d.bbox->h};
      jd["ground"] = {d.ground.gx, d.ground.gy};
      jd["embedding"] = std::vector<double>(
          d.embedding.data(), d.embedding.data() + d.embedding.size());
      if (d.identity) jd["identity"] = *d.identity;
      jdets.push_back(std::move(jd));
    }
    scenes.push_back({{"scene_id", scene.scene_id}, {"detections", std::move(jdets)}});
  }
  root["scenes"] = std::move(scenes);
  return root.dump() + "\n";
}

void SaveDataset(const Dataset& dataset, const std::string& path) {
  WriteTextFile(path, SerializeDataset(dataset));
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteTextFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw Error(ErrorCode::kIoError, "failed writing '" + path + "'");
}

}  // namespace sgc
