#ifndef IMMP_IO_CONFIG_HPP
#define IMMP_IO_CONFIG_HPP

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace immp::io {

enum class KeyType { Real, Integer, Seed, Bool, String, RealList, StringList };

struct KeySpec {
  std::string name;
  KeyType type;
  /// Null marks a required key.
  nlohmann::json default_value;
  std::string help;
};

/// Flat key/value configuration with a fixed schema. Values come from the
/// defaults, then an optional JSON object file, then --key value overrides.
/// Unknown keys and ill-typed values raise ConfigError.
class Config {
 public:
  explicit Config(std::vector<KeySpec> schema);

  void load_file(const std::string& path);
  void load_json(const nlohmann::json& obj);
  /// Parses a textual override; lists are comma separated.
  void set(const std::string& key, const std::string& text);
  /// Applies "--key value" pairs (also "--key=value").
  void apply_args(const std::vector<std::string>& args);
  /// Throws ConfigError when a required key is missing.
  void validate() const;

  double real(const std::string& key) const;
  long integer(const std::string& key) const;
  std::uint64_t seed(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::string str(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::string> strings(const std::string& key) const;
  bool has(const std::string& key) const;

  const nlohmann::json& values() const { return values_; }
  const std::vector<KeySpec>& schema() const { return schema_; }
  std::string usage() const;

 private:
  const KeySpec& spec(const std::string& key) const;
  nlohmann::json coerce(const KeySpec& s, const nlohmann::json& v) const;
  const nlohmann::json& get(const std::string& key, KeyType type) const;

  std::vector<KeySpec> schema_;
  nlohmann::json values_;
};

}  // namespace immp::io

#endif  // IMMP_IO_CONFIG_HPP
