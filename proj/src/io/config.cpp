#include "immp/io/config.hpp"

#include "immp/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace immp::io {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return out;
}

double parse_real(const std::string& key, const std::string& t) {
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used == t.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': expected a number, got '" + t + "'");
}

const char* type_name(KeyType t) {
  switch (t) {
    case KeyType::Real: return "real";
    case KeyType::Integer: return "integer";
    case KeyType::Seed: return "seed";
    case KeyType::Bool: return "bool";
    case KeyType::String: return "string";
    case KeyType::RealList: return "real list";
    case KeyType::StringList: return "string list";
  }
  return "?";
}

}  // namespace

Config::Config(std::vector<KeySpec> schema) : schema_(std::move(schema)), values_(nlohmann::json::object()) {
  for (const auto& s : schema_) {
    if (!s.default_value.is_null()) values_[s.name] = coerce(s, s.default_value);
  }
}

const KeySpec& Config::spec(const std::string& key) const {
  for (const auto& s : schema_) {
    if (s.name == key) return s;
  }
  throw ConfigError("unknown key '" + key + "'");
}

nlohmann::json Config::coerce(const KeySpec& s, const nlohmann::json& v) const {
  auto bad = [&] {
    return ConfigError("key '" + s.name + "': expected " + type_name(s.type) + ", got " + v.dump());
  };
  switch (s.type) {
    case KeyType::Real:
      if (!v.is_number()) throw bad();
      return v.get<double>();
    case KeyType::Integer:
      if (v.is_number_integer()) return v.get<long>();
      if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>() &&
          std::abs(v.get<double>()) < 9e15) {
        return static_cast<long>(v.get<double>());
      }
      throw bad();
    case KeyType::Seed:
      if (v.is_number_unsigned()) return v.get<std::uint64_t>();
      if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
      throw bad();
    case KeyType::Bool:
      if (!v.is_boolean()) throw bad();
      return v;
    case KeyType::String:
      if (!v.is_string()) throw bad();
      return v;
    case KeyType::RealList: {
      if (v.is_number()) return nlohmann::json::array({v.get<double>()});
      if (!v.is_array()) throw bad();
      nlohmann::json out = nlohmann::json::array();
      for (const auto& x : v) {
        if (!x.is_number()) throw bad();
        out.push_back(x.get<double>());
      }
      return out;
    }
    case KeyType::StringList: {
      if (v.is_string()) return nlohmann::json::array({v});
      if (!v.is_array()) throw bad();
      for (const auto& x : v) {
        if (!x.is_string()) throw bad();
      }
      return v;
    }
  }
  throw bad();
}

void Config::load_json(const nlohmann::json& obj) {
  if (!obj.is_object()) throw ConfigError("configuration must be a flat JSON object");
  for (const auto& [k, v] : obj.items()) values_[k] = coerce(spec(k), v);
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  load_json(j);
}

void Config::set(const std::string& key, const std::string& text) {
  const KeySpec& s = spec(key);
  switch (s.type) {
    case KeyType::Real:
      values_[key] = parse_real(key, text);
      break;
    case KeyType::Integer: {
      const double v = parse_real(key, text);
      if (std::floor(v) != v || std::abs(v) > 9e15) throw ConfigError("key '" + key + "': expected an integer");
      values_[key] = static_cast<long>(v);
      break;
    }
    case KeyType::Seed:
      try {
        std::size_t used = 0;
        if (!text.empty() && text[0] != '-') {
          const unsigned long long v = std::stoull(text, &used, 0);
          if (used == text.size()) {
            values_[key] = static_cast<std::uint64_t>(v);
            break;
          }
        }
      } catch (const std::exception&) {
      }
      throw ConfigError("key '" + key + "': expected a non-negative 64-bit integer");
    case KeyType::Bool:
      if (text == "true" || text == "1") {
        values_[key] = true;
      } else if (text == "false" || text == "0") {
        values_[key] = false;
      } else {
        throw ConfigError("key '" + key + "': expected true or false");
      }
      break;
    case KeyType::String:
      values_[key] = text;
      break;
    case KeyType::RealList: {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& t : split_list(text)) a.push_back(parse_real(key, t));
      values_[key] = a;
      break;
    }
    case KeyType::StringList:
      values_[key] = split_list(text);
      break;
  }
}

void Config::apply_args(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0 || a.size() < 3) throw ConfigError("unexpected argument '" + a + "'");
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      set(a.substr(2, eq - 2), a.substr(eq + 1));
      continue;
    }
    const std::string key = a.substr(2);
    if (i + 1 >= args.size()) throw ConfigError("missing value for --" + key);
    set(key, args[++i]);
  }
}

void Config::validate() const {
  for (const auto& s : schema_) {
    if (!values_.contains(s.name)) throw ConfigError("missing required key '" + s.name + "'");
  }
}

bool Config::has(const std::string& key) const { return values_.contains(key); }

const nlohmann::json& Config::get(const std::string& key, KeyType type) const {
  const KeySpec& s = spec(key);
  if (s.type != type) throw std::logic_error("config key '" + key + "' read with the wrong type");
  if (!values_.contains(key)) throw ConfigError("missing required key '" + key + "'");
  return values_.at(key);
}

double Config::real(const std::string& key) const { return get(key, KeyType::Real).get<double>(); }
long Config::integer(const std::string& key) const { return get(key, KeyType::Integer).get<long>(); }
std::uint64_t Config::seed(const std::string& key) const {
  return get(key, KeyType::Seed).get<std::uint64_t>();
}
bool Config::flag(const std::string& key) const { return get(key, KeyType::Bool).get<bool>(); }
std::string Config::str(const std::string& key) const { return get(key, KeyType::String).get<std::string>(); }
std::vector<double> Config::reals(const std::string& key) const {
  return get(key, KeyType::RealList).get<std::vector<double>>();
}
std::vector<std::string> Config::strings(const std::string& key) const {
  return get(key, KeyType::StringList).get<std::vector<std::string>>();
}

std::string Config::usage() const {
  std::ostringstream os;
  for (const auto& s : schema_) {
    os << "  --" << s.name << " <" << type_name(s.type) << ">";
    if (s.default_value.is_null()) {
      os << " (required)";
    } else {
      os << " (default " << s.default_value.dump() << ")";
    }
    if (!s.help.empty()) os << "  " << s.help;
    os << '\n';
  }
  return os.str();
}

}  // namespace immp::io
