// SPDX-License-Identifier: Apache-2.0
#include "lidarda/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "lidarda/error.hpp"
#include "lidarda/version.hpp"

namespace lidarda {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

Config Config::parse_text(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config: line " + std::to_string(line_no) +
                            " is not a key = value pair");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ValidationError("config: empty key on line " + std::to_string(line_no));
    config.set(key, value);
  }
  return config;
}

Config Config::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str());
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

Schema& Schema::add(std::string name, KeyType type, std::string default_value,
                    std::string help) {
  keys_.push_back({std::move(name), type, std::move(default_value), std::move(help)});
  return *this;
}

namespace {

void check_type(const std::string& key, KeyType type, const std::string& value) {
  std::istringstream in(value);
  switch (type) {
    case KeyType::integer: {
      long long v;
      if (!(in >> v) || !(in >> std::ws).eof())
        throw ValidationError("config: key \"" + key + "\" expects an integer, got \"" +
                              value + "\"");
      break;
    }
    case KeyType::real: {
      double v;
      if (!(in >> v) || !(in >> std::ws).eof())
        throw ValidationError("config: key \"" + key + "\" expects a number, got \"" +
                              value + "\"");
      break;
    }
    case KeyType::seed: {
      unsigned long long v;
      if (!(in >> v) || !(in >> std::ws).eof())
        throw ValidationError("config: key \"" + key +
                              "\" expects an unsigned integer, got \"" + value + "\"");
      break;
    }
    case KeyType::boolean:
      if (value != "true" && value != "false")
        throw ValidationError("config: key \"" + key +
                              "\" expects true or false, got \"" + value + "\"");
      break;
    case KeyType::text:
      break;
  }
}

}  // namespace

std::map<std::string, std::string> Schema::resolve(const Config& config) const {
  std::map<std::string, std::string> out;
  for (const auto& key : keys_) out[key.name] = key.default_value;
  for (const auto& [name, value] : config.entries()) {
    const auto it = std::find_if(keys_.begin(), keys_.end(),
                                 [&](const SchemaKey& k) { return k.name == name; });
    if (it == keys_.end())
      throw ValidationError("config: unknown key \"" + name + "\"");
    check_type(name, it->type, value);
    out[name] = value;
  }
  return out;
}

long long Resolved::get_int(const std::string& key) const {
  return std::stoll(kv.at(key));
}

double Resolved::get_double(const std::string& key) const {
  return std::stod(kv.at(key));
}

bool Resolved::get_bool(const std::string& key) const {
  return kv.at(key) == "true";
}

std::uint64_t Resolved::get_seed(const std::string& key) const {
  return std::stoull(kv.at(key));
}

const std::string& Resolved::get_text(const std::string& key) const {
  return kv.at(key);
}

std::vector<std::string> Resolved::get_list(const std::string& key) const {
  std::vector<std::string> parts;
  std::istringstream in(kv.at(key));
  std::string part;
  while (std::getline(in, part, ',')) {
    std::size_t b = 0, e = part.size();
    while (b < e && std::isspace(static_cast<unsigned char>(part[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(part[e - 1]))) --e;
    if (e > b) parts.push_back(part.substr(b, e - b));
  }
  return parts;
}

void write_run_manifest(const Resolved& resolved, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "# lidarda " << kVersion << "\n";
  for (const auto& [key, value] : resolved.kv) out << key << " = " << value << "\n";
  if (!out) throw IoError("write failed on " + path.string());
}

}  // namespace lidarda
