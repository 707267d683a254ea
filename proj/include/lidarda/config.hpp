// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace lidarda {

// Key-value run configuration: "key = value" lines, '#' comments. Every key
// must appear in the schema; unknown keys are rejected by name before any
// work starts.
class Config {
public:
  static Config parse_file(const std::filesystem::path& path);
  static Config parse_text(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

enum class KeyType { integer, real, boolean, text, seed };

struct SchemaKey {
  std::string name;
  KeyType type = KeyType::text;
  std::string default_value;
  std::string help;
};

// Published key set for one subcommand. Resolution validates every provided
// key (name and type) and fills defaults.
class Schema {
public:
  Schema& add(std::string name, KeyType type, std::string default_value,
              std::string help = "");
  const std::vector<SchemaKey>& keys() const { return keys_; }

  // Throws ValidationError naming the offending key.
  std::map<std::string, std::string> resolve(const Config& config) const;

private:
  std::vector<SchemaKey> keys_;
};

// Typed accessors over a resolved key set.
struct Resolved {
  std::map<std::string, std::string> kv;

  long long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::uint64_t get_seed(const std::string& key) const;
  const std::string& get_text(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;  // comma-split
};

// "key = value" lines, sorted by key, preceded by a version header. Written
// into every output directory so a run is reproducible from its artifacts.
void write_run_manifest(const Resolved& resolved,
                        const std::filesystem::path& path);

}  // namespace lidarda
