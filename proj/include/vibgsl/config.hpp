#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"
#include "vibgsl/encoder.hpp"
#include "vibgsl/generator.hpp"

namespace vibgsl {

/// vib_gsl: learned IB-Graph + variational bottleneck. raw_gnn: the same
/// backbone run on the input graph with a deterministic K-dim readout.
enum class ModelKind { vib_gsl, raw_gnn };

[[nodiscard]] std::string to_string(ModelKind kind);
[[nodiscard]] ModelKind parse_model_kind(const std::string& s);

struct TrainConfig {
  ModelKind model = ModelKind::vib_gsl;
  Backbone backbone = Backbone::gcn;
  std::size_t epochs = 100;
  double lr = 1e-3;
  double beta = 1e-3;
  std::size_t bottleneck = 16;  // K
  double temperature = 0.1;     // t
  double threshold = 0.1;       // a0
  double mask_temperature = 1.0;
  std::size_t hidden = 32;
  std::size_t layers = 2;
  std::size_t classifier_hidden = 32;
  std::size_t structure_hidden = 32;
  std::size_t structure_embed = 16;
  double gin_eps = 0.0;
  std::size_t batch_size = 1;
  std::size_t folds = 10;
  std::size_t runs = 5;
  std::uint64_t seed = 0;
  EvalAdjacency eval_adjacency = EvalAdjacency::expected;

  /// Throws ParameterError on out-of-range fields.
  void validate() const;
};

[[nodiscard]] nlohmann::ordered_json config_json(const TrainConfig& c);
/// Missing keys keep their defaults; unknown keys throw ParameterError.
[[nodiscard]] TrainConfig config_from_json(const nlohmann::json& j);
/// FNV-1a 64 over the canonical config JSON, as 16 hex digits.
[[nodiscard]] std::string config_hash(const nlohmann::ordered_json& resolved);

}  // namespace vibgsl
