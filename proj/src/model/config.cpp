#include "fvl/model/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "fvl/common/error.hpp"
#include "fvl/common/text.hpp"

namespace fvl::model {

bool uses_flow(Variant v) { return v == Variant::xo || v == Variant::xoe; }
bool uses_ego(Variant v) { return v == Variant::xe || v == Variant::xoe; }

std::string name_of(Variant v) {
  switch (v) {
    case Variant::x: return "X";
    case Variant::xe: return "XE";
    case Variant::xo: return "XO";
    case Variant::xoe: return "XOE";
  }
  return "X";
}

Variant parse_variant(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "x") return Variant::x;
  if (lower == "xe") return Variant::xe;
  if (lower == "xo") return Variant::xo;
  if (lower == "xoe") return Variant::xoe;
  throw ConfigError("unknown variant \"" + name + "\" (expected x, xe, xo or xoe)");
}

void ModelConfig::validate() const {
  if (hidden < 1 || embed < 1) throw ConfigError("hidden and embed sizes must be positive");
  if (tau < 2) throw ConfigError("tau must be at least 2");
  if (delta < 1) throw ConfigError("delta must be at least 1");
  if (pooled_dim < 2 || pooled_dim % 2 != 0) throw ConfigError("pooled_dim must be a positive even number");
  for (double s : {box_scale, flow_scale, ego_yaw_scale, ego_translation_scale, residual_scale}) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("feature scales must be positive and finite");
  }
}

std::map<std::string, std::string> to_key_values(const ModelConfig& c) {
  const auto d = [](double v) { return text::format_double(v); };
  return {
      {"variant", name_of(c.variant)},
      {"hidden", std::to_string(c.hidden)},
      {"embed", std::to_string(c.embed)},
      {"tau", std::to_string(c.tau)},
      {"delta", std::to_string(c.delta)},
      {"pooled_dim", std::to_string(c.pooled_dim)},
      {"box_scale", d(c.box_scale)},
      {"flow_scale", d(c.flow_scale)},
      {"ego_yaw_scale", d(c.ego_yaw_scale)},
      {"ego_translation_scale", d(c.ego_translation_scale)},
      {"residual_scale", d(c.residual_scale)},
  };
}

ModelConfig from_key_values(const std::map<std::string, std::string>& kv, const std::string& source) {
  ModelConfig c;
  for (const auto& [key, value] : kv) {
    const std::string where = source + ": " + key;
    if (key == "variant") {
      try {
        c.variant = parse_variant(value);
      } catch (const ConfigError& e) {
        throw FormatError(source + ": " + e.what());
      }
    } else if (key == "hidden") {
      c.hidden = text::parse_int(value, where);
    } else if (key == "embed") {
      c.embed = text::parse_int(value, where);
    } else if (key == "tau") {
      c.tau = text::parse_int(value, where);
    } else if (key == "delta") {
      c.delta = text::parse_int(value, where);
    } else if (key == "pooled_dim") {
      c.pooled_dim = text::parse_int(value, where);
    } else if (key == "box_scale") {
      c.box_scale = text::parse_double(value, where);
    } else if (key == "flow_scale") {
      c.flow_scale = text::parse_double(value, where);
    } else if (key == "ego_yaw_scale") {
      c.ego_yaw_scale = text::parse_double(value, where);
    } else if (key == "ego_translation_scale") {
      c.ego_translation_scale = text::parse_double(value, where);
    } else if (key == "residual_scale") {
      c.residual_scale = text::parse_double(value, where);
    } else {
      throw FormatError(source + ": unknown key " + key);
    }
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw FormatError(source + ": " + e.what());
  }
  return c;
}

void save_config(const std::filesystem::path& path, const ModelConfig& config) {
  text::write_key_values(path, to_key_values(config));
}

ModelConfig load_config(const std::filesystem::path& path) {
  return from_key_values(text::read_key_values(path), path.string());
}

}  // namespace fvl::model
