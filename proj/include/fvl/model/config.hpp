#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "fvl/data/sample.hpp"

namespace fvl::model {

// Input streams: X boxes, E future ego-motion, O pooled flow.
enum class Variant { x, xe, xo, xoe };

bool uses_flow(Variant v);
bool uses_ego(Variant v);
// "X", "XE", "XO", "XOE".
std::string name_of(Variant v);
// Case-insensitive; throws ConfigError on an unknown name.
Variant parse_variant(const std::string& name);

struct ModelConfig {
  Variant variant = Variant::xoe;
  int hidden = 64;
  int embed = 64;
  int tau = data::kDefaultTau;
  int delta = data::kDefaultDelta;
  int pooled_dim = 2 * flow::kDefaultPoolSize * flow::kDefaultPoolSize;

  // Fixed input and target scaling on top of image-size normalization. Past
  // boxes enter the encoder relative to the anchor box.
  double box_scale = 10.0;
  double flow_scale = 30.0;
  double ego_yaw_scale = 1.0;
  double ego_translation_scale = 0.1;
  double residual_scale = 10.0;

  // Throws ConfigError on sizes outside their domain.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

std::map<std::string, std::string> to_key_values(const ModelConfig& config);
// Missing keys keep their defaults; unknown keys are a FormatError.
ModelConfig from_key_values(const std::map<std::string, std::string>& kv, const std::string& source);

void save_config(const std::filesystem::path& path, const ModelConfig& config);
ModelConfig load_config(const std::filesystem::path& path);

}  // namespace fvl::model
