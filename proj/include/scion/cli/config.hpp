// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace scion::cli {

using json = nlohmann::json;

/// Bad config file, unknown key or invalid value. Maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KeyType { Int, UInt, Double, Bool, String, UIntList, DoubleList, StringList };

struct KeyDef {
  std::string path;  // dotted, e.g. "optimizer.gamma"
  KeyType type;
  json def;
  std::string help;
  /// Allowed values for String keys (and each StringList entry); empty = any.
  std::vector<std::string> choices;
  /// Inclusive lower bound for numeric keys and list entries.
  double min = -1e308;
  bool exclusive_min = false;
};

struct Schema {
  std::string command;
  std::vector<KeyDef> keys;

  const KeyDef* find(std::string_view path) const;
};

const std::vector<std::string>& command_names();
/// Throws ConfigError for an unknown command.
const Schema& schema_for(std::string_view command);

/// Key listing used by --help: one line per key with type, default and help.
std::string help_text(const Schema& schema);
std::string_view key_type_name(KeyType t);

/// Resolved, fully validated config: every schema key present with a value
/// of the declared type.
class Config {
 public:
  Config(const Schema& schema, json values) : schema_(&schema), values_(std::move(values)) {}

  const Schema& schema() const { return *schema_; }
  const json& values() const { return values_; }

  long long get_int(std::string_view path) const;
  std::size_t get_uint(std::string_view path) const;
  double get_double(std::string_view path) const;
  bool get_bool(std::string_view path) const;
  std::string get_string(std::string_view path) const;
  std::vector<std::size_t> get_uint_list(std::string_view path) const;
  std::vector<double> get_double_list(std::string_view path) const;
  std::vector<std::string> get_string_list(std::string_view path) const;

  /// Nested JSON of the resolved values, keys sorted.
  json tree() const;
  /// FNV-1a over the canonical tree without `seed` and `out`, 16 hex digits.
  std::string hash() const;

 private:
  const json& at(std::string_view path, KeyType t) const;

  const Schema* schema_;
  json values_;  // flat: path -> value
};

/// Merges defaults, the config file text (a JSON object, may be empty) and
/// `path=value` overrides, in that order of increasing priority, and checks
/// every key and value.
Config resolve_config(const Schema& schema, const std::string& file_text,
                      const std::vector<std::string>& overrides);

/// Flattens a nested JSON object into dotted paths.
void flatten(const json& tree, const std::string& prefix, json& out);

}  // namespace scion::cli
