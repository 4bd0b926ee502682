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


#include "cli.h"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "sgc/checkpoint.h"
#include "sgc/dataio.h"
#include "sgc/decode.h"
#include "sgc/errors.h"
#include "sgc/metrics.h"
#include "sgc/synth.h"
#include "sgc/training.h"

namespace sgc::cli {
namespace {

using nlohmann::json;

// Everything a run can be configured with. File paths come from flags only.
struct RunConfig {
  std::uint64_t seed = 0;
  SynthConfig synth;
  TrainConfig train;
  std::optional<DecodeConfig> decode;  // unset: take it from the checkpoint
  LoadOptions load;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> levels;
  std::optional<double> p_tau;
  std::optional<int> mp_steps;
};

[[noreturn]] void ConfigError(const std::string& msg) {
  throw Error(ErrorCode::kInvalidArgument, msg);
}

// Copies `key` from `obj` into `dst` when present; rejects wrong types.
template <typename T>
void Read(const json& obj, const char* section, const char* key, T& dst) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const json::exception&) {
    ConfigError(std::string("config: '") + section + "." + key + "' has the wrong type");
  }
}

void RejectUnknown(const json& obj, const char* section, const std::set<std::string>& known) {
  if (!obj.is_object()) ConfigError(std::string("config: '") + section + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) {
      ConfigError(std::string("config: unknown key '") + section + "." + key + "'");
    }
  }
}

RunConfig ParseRunConfig(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig rc;
  RejectUnknown(root, "<root>", {"seed", "synth", "train", "decode", "standing_point"});
  Read(root, "<root>", "seed", rc.seed);

  if (root.contains("synth")) {
    const json& s = root.at("synth");
    RejectUnknown(s, "synth",
                  {"num_cameras", "identities_min", "identities_max", "visibility_prob",
                   "appearance_noise", "position_noise", "arena_width", "arena_height",
                   "embed_dim", "num_scenes"});
    SynthConfig& c = rc.synth;
    Read(s, "synth", "num_cameras", c.num_cameras);
    Read(s, "synth", "identities_min", c.identities_min);
    Read(s, "synth", "identities_max", c.identities_max);
    Read(s, "synth", "visibility_prob", c.visibility_prob);
    Read(s, "synth", "appearance_noise", c.appearance_noise);
    Read(s, "synth", "position_noise", c.position_noise);
    Read(s, "synth", "arena_width", c.arena_width);
    Read(s, "synth", "arena_height", c.arena_height);
    Read(s, "synth", "embed_dim", c.embed_dim);
    Read(s, "synth", "num_scenes", c.num_scenes);
  }

  if (root.contains("train")) {
    const json& t = root.at("train");
    RejectUnknown(t, "train",
                  {"epochs", "batch_size", "lr", "dropout", "warmup_fraction", "mp_steps",
                   "gcn_width", "final_dim", "theta_hidden", "normalize_steps", "adam_beta1",
                   "adam_beta2", "adam_eps"});
    TrainConfig& c = rc.train;
    Read(t, "train", "epochs", c.epochs);
    Read(t, "train", "batch_size", c.batch_size);
    Read(t, "train", "lr", c.base_lr);
    Read(t, "train", "dropout", c.dropout);
    Read(t, "train", "warmup_fraction", c.warmup_fraction);
    Read(t, "train", "mp_steps", c.mp_steps);
    Read(t, "train", "gcn_width", c.gcn_width);
    Read(t, "train", "final_dim", c.final_dim);
    Read(t, "train", "theta_hidden", c.theta_hidden);
    Read(t, "train", "normalize_steps", c.normalize_steps);
    Read(t, "train", "adam_beta1", c.adam.beta1);
    Read(t, "train", "adam_beta2", c.adam.beta2);
    Read(t, "train", "adam_eps", c.adam.eps);
  }

  if (root.contains("decode")) {
    const json& d = root.at("decode");
    RejectUnknown(d, "decode", {"p_tau", "levels"});
    DecodeConfig c;
    Read(d, "decode", "p_tau", c.p_tau);
    Read(d, "decode", "levels", c.levels);
    rc.decode = c;
  }

  if (root.contains("standing_point")) {
    std::string mode;
    Read(root, "<root>", "standing_point", mode);
    if (mode == "image") {
      rc.load.standing_point = LowerEdgeMode::kImageConvention;
    } else if (mode == "paper") {
      rc.load.standing_point = LowerEdgeMode::kPaperLiteral;
    } else {
      ConfigError("config: standing_point must be 'image' or 'paper'");
    }
  }
  return rc;
}

RunConfig LoadRunConfig(const std::string& path, const Overrides& ov) {
  RunConfig rc;
  if (!path.empty()) {
    std::string text;
    try {
      text = ReadTextFile(path);
    } catch (const Error&) {
      ConfigError("cannot read config file '" + path + "'");
    }
    rc = ParseRunConfig(text);
  }
  if (ov.seed) rc.seed = *ov.seed;
  rc.synth.seed = rc.seed;
  rc.train.seed = rc.seed;
  if (ov.mp_steps) rc.train.mp_steps = *ov.mp_steps;
  if (rc.decode) {
    rc.train.p_tau = rc.decode->p_tau;
    rc.train.levels = rc.decode->levels;
  }
  if (ov.p_tau) rc.train.p_tau = *ov.p_tau;
  if (ov.levels) rc.train.levels = *ov.levels;
  return rc;
}

// Decode settings for clustering: checkpoint values unless the config or
// a flag says otherwise.
DecodeConfig ResolveDecode(const RunConfig& rc, const Overrides& ov, DecodeConfig base) {
  if (rc.decode) base = *rc.decode;
  if (ov.p_tau) base.p_tau = *ov.p_tau;
  if (ov.levels) base.levels = *ov.levels;
  base.Validate();
  return base;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoError:
      return kExitIo;
    case ErrorCode::kNonFiniteGradient:
      return kExitNumeric;
    default:
      return kExitConfig;
  }
}

spdlog::level::level_enum LevelFromEnv(bool* recognized) {
  *recognized = true;
  const char* raw = std::getenv("SGC_LOG");
  if (raw == nullptr) return spdlog::level::info;
  const std::string v(raw);
  if (v == "error") return spdlog::level::err;
  if (v == "info") return spdlog::level::info;
  if (v == "debug") return spdlog::level::debug;
  *recognized = false;
  return spdlog::level::info;
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

int CmdGenerate(const RunConfig& rc, const std::string& out_path, std::ostream& out,
                spdlog::logger& log) {
  rc.synth.Validate();
  log.info("generating {} scenes with seed {}", rc.synth.num_scenes, rc.synth.seed);
  const Dataset ds = GenerateDataset(rc.synth);
  SaveDataset(ds, out_path);
  std::size_t detections = 0;
  for (const Scene& s : ds.scenes) detections += s.detections.size();
  out << "scenes " << ds.scenes.size() << " detections " << detections << "\n";
  return kExitOk;
}

int CmdTrain(const RunConfig& rc, const std::string& train_path, const std::string& val_path,
             const std::string& out_dir, std::ostream& out, spdlog::logger& log) {
  rc.train.Validate();
  const Dataset train = LoadDataset(train_path, rc.load);
  Dataset val;
  if (!val_path.empty()) {
    val = LoadDataset(val_path, rc.load);
    if (val.embed_dim != train.embed_dim) {
      throw Error(ErrorCode::kDimMismatch, "validation and training embedding widths differ");
    }
  }
  if (!train.FullyLabeled() || (!val_path.empty() && !val.FullyLabeled())) {
    throw Error(ErrorCode::kMissingLabel, "training requires identity labels");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create directory '" + out_dir + "'");

  log.info("training on {} scenes, validating on {}, {} epochs, {} message-passing steps",
           train.scenes.size(), val.scenes.size(), rc.train.epochs, rc.train.mp_steps);
  const TrainResult result =
      Train(train.scenes, val.scenes, rc.train, [&](const EpochRecord& r) {
        out << "epoch " << r.epoch << " loss " << Fixed(r.loss, 6);
        if (r.val) out << " val_v_measure " << Fixed(r.val->v_measure, 2);
        out << "\n";
        log.debug("epoch {} lr {}", r.epoch, r.lr);
      });

  const DecodeConfig decode = rc.train.MakeDecodeConfig();
  const std::filesystem::path dir(out_dir);
  SaveCheckpoint((dir / "checkpoint_best.json").string(), result.best, decode);
  SaveCheckpoint((dir / "checkpoint_final.json").string(), result.final, decode);
  WriteTextFile((dir / "history.json").string(), SerializeHistory(result.history));
  nlohmann::json pointer{{"checkpoint", "checkpoint_best.json"}, {"epoch", result.best_epoch}};
  if (result.best_v_measure >= 0.0) pointer["val_v_measure"] = result.best_v_measure;
  WriteTextFile((dir / "best.json").string(), pointer.dump(2) + "\n");
  out << "best_epoch " << result.best_epoch << "\n";
  return kExitOk;
}

int CmdCluster(const RunConfig& rc, const Overrides& ov, const std::string& ckpt_path,
               const std::string& data_path, const std::string& out_path, std::ostream& out,
               spdlog::logger& log) {
  const Checkpoint ck = LoadCheckpoint(ckpt_path);
  const DecodeConfig decode = ResolveDecode(rc, ov, ck.decode);
  const Dataset data = LoadDataset(data_path, rc.load);
  if (data.embed_dim != ck.params.config.embed_dim) {
    throw Error(ErrorCode::kDimMismatch,
                "checkpoint expects embeddings of width " +
                    std::to_string(ck.params.config.embed_dim) + ", data has " +
                    std::to_string(data.embed_dim));
  }
  log.info("clustering {} scenes (p_tau {}, levels {})", data.scenes.size(), decode.p_tau,
           decode.levels);
  std::vector<ClusterResult> results;
  results.reserve(data.scenes.size());
  for (const Scene& s : data.scenes) results.push_back(Cluster(s, ck.params, decode));
  WriteTextFile(out_path, SerializeClusterResults(results));
  out << "clustered " << results.size() << " scenes\n";
  return kExitOk;
}

int CmdEval(const RunConfig& rc, const std::string& data_path, const std::string& labels_path,
            const std::string& out_path, std::ostream& out) {
  const Dataset data = LoadDataset(data_path, rc.load);
  const std::vector<ClusterResult> results = ParseClusterResults(ReadTextFile(labels_path));
  const std::string report = FormatReportJson(Evaluate(data.scenes, results)) + "\n";
  if (!out_path.empty()) WriteTextFile(out_path, report);
  out << report;
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  spdlog::logger log("sgc", sink);
  log.set_pattern("[%l] %v");
  bool env_ok = true;
  log.set_level(LevelFromEnv(&env_ok));
  if (!env_ok) log.warn("SGC_LOG must be one of error, info, debug; using info");

  CLI::App app{"Hierarchical multi-camera clustering", "sgc"};
  app.require_subcommand(1);

  std::string config_path, out_path, train_path, val_path, ckpt_path, data_path, labels_path;
  Overrides ov;
  std::uint64_t seed = 0;
  int levels = 0, mp_steps = 0;
  double p_tau = 0.0;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration");
  };
  auto add_seed = [&](CLI::App* cmd) {
    return cmd->add_option("--seed", seed, "Master seed");
  };
  auto add_decode = [&](CLI::App* cmd) {
    return std::pair{cmd->add_option("--levels", levels, "Hierarchy levels L"),
                     cmd->add_option("--p-tau", p_tau, "Edge candidate threshold")};
  };

  CLI::App* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  add_config(gen);
  gen->add_option("--out", out_path, "Dataset file to write")->required();
  CLI::Option* gen_seed = add_seed(gen);

  CLI::App* train = app.add_subcommand("train", "Train on labeled scenes");
  add_config(train);
  train->add_option("--train", train_path, "Training dataset")->required();
  train->add_option("--val", val_path, "Validation dataset");
  train->add_option("--out", out_path, "Output directory")->required();
  CLI::Option* train_seed = add_seed(train);
  auto [train_levels, train_ptau] = add_decode(train);
  CLI::Option* train_mp =
      train->add_option("--mp-steps", mp_steps, "Message-passing steps S");

  CLI::App* cluster = app.add_subcommand("cluster", "Cluster scenes with a checkpoint");
  add_config(cluster);
  cluster->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
  cluster->add_option("--data", data_path, "Dataset to cluster")->required();
  cluster->add_option("--out", out_path, "Cluster labels file to write")->required();
  auto [cluster_levels, cluster_ptau] = add_decode(cluster);

  CLI::App* eval = app.add_subcommand("eval", "Score cluster labels against identities");
  add_config(eval);
  eval->add_option("--data", data_path, "Labeled dataset")->required();
  eval->add_option("--labels", labels_path, "Cluster labels file")->required();
  eval->add_option("--out", out_path, "Also write the report here");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();  // program name
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    for (CLI::Option* o : {gen_seed, train_seed}) {
      if (o->count() > 0) ov.seed = seed;
    }
    for (CLI::Option* o : {train_levels, cluster_levels}) {
      if (o->count() > 0) ov.levels = levels;
    }
    for (CLI::Option* o : {train_ptau, cluster_ptau}) {
      if (o->count() > 0) ov.p_tau = p_tau;
    }
    if (train_mp->count() > 0) ov.mp_steps = mp_steps;

    const RunConfig rc = LoadRunConfig(config_path, ov);
    if (gen->parsed()) return CmdGenerate(rc, out_path, out, log);
    if (train->parsed()) return CmdTrain(rc, train_path, val_path, out_path, out, log);
    if (cluster->parsed()) {
      return CmdCluster(rc, ov, ckpt_path, data_path, out_path, out, log);
    }
    return CmdEval(rc, data_path, labels_path, out_path, out);
  } catch (const Error& e) {
    log.error("{}", e.what());
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    log.error("{}", e.what());
    return kExitConfig;
  }
}

}  // namespace sgc::cli
