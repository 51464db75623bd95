#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace symvar::cli {

inline constexpr const char* kSchemaVersion = "symvar-config/1";

// Schema violation or unreadable config. `where` is a JSON pointer into the
// config, or "line L, column C" for syntax errors.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

std::vector<std::string> subcommand_names();

// A validated experiment. Sections hold every field the subcommand reads, with
// defaults filled in, in schema order; to_json(config_from_json(j)) is the
// canonical form and re-parsing it reproduces the same bytes.
struct ExperimentConfig {
  std::string subcommand;
  std::uint64_t seed = 0;
  int samples = 10000;
  nlohmann::ordered_json grid, functional, start, params, integrand, nonlinearity, map, geometry,
      constraint, polarize, verify;
  std::string output_dir;
  // directory of the config file, for relative paths inside it
  std::filesystem::path base_dir;

  double param(const std::string& key) const { return params.at(key).get<double>(); }
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ExperimentConfig& c);
// the config file text, with syntax errors and key lines reported by line
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
std::string canonical_text(const ExperimentConfig& c);

// JSON Schema (draft 2020-12) generated from the same field tables.
nlohmann::ordered_json config_schema();

}  // namespace symvar::cli
