#include "vibgsl/config.hpp"

#include <cstdio>

#include "vibgsl/errors.hpp"

namespace vibgsl {

std::string to_string(ModelKind kind) { return kind == ModelKind::vib_gsl ? "vib_gsl" : "raw_gnn"; }

ModelKind parse_model_kind(const std::string& s) {
  if (s == "vib_gsl" || s == "vib-gsl") return ModelKind::vib_gsl;
  if (s == "raw_gnn" || s == "raw-gnn") return ModelKind::raw_gnn;
  throw ParameterError("unknown model '" + s + "' (expected vib_gsl|raw_gnn)");
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ParameterError(what);
  };
  require(epochs >= 1, "epochs must be >= 1");
  require(lr > 0.0, "learning rate must be positive");
  require(beta >= 0.0, "beta must be non-negative");
  require(bottleneck >= 1, "bottleneck K must be >= 1");
  require(temperature > 0.0, "temperature must be positive");
  require(threshold >= 0.0, "threshold a0 must be non-negative");
  require(mask_temperature > 0.0, "mask temperature must be positive");
  require(hidden >= 1 && classifier_hidden >= 1 && structure_hidden >= 1 && structure_embed >= 1,
          "hidden widths must be >= 1");
  require(layers >= 1, "layers must be >= 1");
  require(batch_size >= 1, "batch size must be >= 1");
  require(gin_eps > -1.0, "gin epsilon must exceed -1");
}

nlohmann::ordered_json config_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["model"] = to_string(c.model);
  j["backbone"] = to_string(c.backbone);
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["beta"] = c.beta;
  j["bottleneck"] = c.bottleneck;
  j["temperature"] = c.temperature;
  j["threshold"] = c.threshold;
  j["mask_temperature"] = c.mask_temperature;
  j["hidden"] = c.hidden;
  j["layers"] = c.layers;
  j["classifier_hidden"] = c.classifier_hidden;
  j["structure_hidden"] = c.structure_hidden;
  j["structure_embed"] = c.structure_embed;
  j["gin_eps"] = c.gin_eps;
  j["batch_size"] = c.batch_size;
  j["folds"] = c.folds;
  j["runs"] = c.runs;
  j["seed"] = c.seed;
  j["eval_adjacency"] = to_string(c.eval_adjacency);
  return j;
}

TrainConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParameterError("config must be a JSON object");
  TrainConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "model") c.model = parse_model_kind(v.get<std::string>());
    else if (key == "backbone") c.backbone = parse_backbone(v.get<std::string>());
    else if (key == "epochs") c.epochs = v.get<std::size_t>();
    else if (key == "lr") c.lr = v.get<double>();
    else if (key == "beta") c.beta = v.get<double>();
    else if (key == "bottleneck") c.bottleneck = v.get<std::size_t>();
    else if (key == "temperature") c.temperature = v.get<double>();
    else if (key == "threshold") c.threshold = v.get<double>();
    else if (key == "mask_temperature") c.mask_temperature = v.get<double>();
    else if (key == "hidden") c.hidden = v.get<std::size_t>();
    else if (key == "layers") c.layers = v.get<std::size_t>();
    else if (key == "classifier_hidden") c.classifier_hidden = v.get<std::size_t>();
    else if (key == "structure_hidden") c.structure_hidden = v.get<std::size_t>();
    else if (key == "structure_embed") c.structure_embed = v.get<std::size_t>();
    else if (key == "gin_eps") c.gin_eps = v.get<double>();
    else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
    else if (key == "folds") c.folds = v.get<std::size_t>();
    else if (key == "runs") c.runs = v.get<std::size_t>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "eval_adjacency") c.eval_adjacency = parse_eval_adjacency(v.get<std::string>());
    else throw ParameterError("unknown config key '" + key + "'");
  }
  return c;
}

std::string config_hash(const nlohmann::ordered_json& resolved) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : resolved.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vibgsl
