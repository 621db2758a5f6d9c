#pragma once

#include <string>

#include <json.hpp>

namespace sindex {

// Loads a run configuration from JSON (.json) or a TOML subset (anything
// else). The TOML reader covers what configs need: "#" comments, bare
// key = value pairs, [section] tables (keys merge into the top level),
// strings, integers, floats, booleans, and flat arrays of those.
nlohmann::json load_config_file(const std::string& path);

nlohmann::json parse_toml_subset(const std::string& text);

}  // namespace sindex
