#pragma once

#include "movo/pipeline.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace movo {

/// Flat `section.key = value` configuration text. `#` starts a comment.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::filesystem::path& path);

/// Overlay `overrides` onto `base` (overrides win).
ConfigMap merge_config(const ConfigMap& base, const ConfigMap& overrides);

/// Apply known keys onto a PipelineConfig; unknown keys throw ParseError.
PipelineConfig config_from_map(const ConfigMap& map);

/// Every key at its value in `cfg` (defaults when untouched), canonical order.
ConfigMap config_to_map(const PipelineConfig& cfg);

std::string dump_config(const ConfigMap& map);

}  // namespace movo
