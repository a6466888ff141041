#include "bandtaper/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bandtaper {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string env_name(const std::string& key) {
  std::string out = "BANDTAPER_";
  for (const char c : key) {
    if (c == '.' || c == '-') {
      out += '_';
    } else {
      out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  std::stringstream ss(v);
  std::string cur;
  while (std::getline(ss, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) parts.push_back(cur);
  }
  return parts;
}

}  // namespace

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::stringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw InputError("config line " + std::to_string(lineno) +
                         ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(lineno) +
                       ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw InputError("config line " + std::to_string(lineno) + ": empty key");
    }
    cfg.set(section.empty() ? key : section + "." + key, value);
  }
  return cfg;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

void Config::apply_env_overrides() {
  for (auto& [key, value] : entries_) {
    const char* env = std::getenv(env_name(key).c_str());
    if (env) value = env;
  }
}

void Config::set(const std::string& key, const std::string& value) {
  if (std::string* v = find(key)) {
    *v = value;
  } else {
    entries_.emplace_back(key, value);
  }
}

std::string* Config::find(const std::string& key) {
  for (auto& [k, v] : entries_) {
    if (k == key) return &v;
  }
  return nullptr;
}

const std::string* Config::find(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return &v;
  }
  return nullptr;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

std::string Config::get_string(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw InputError("config: missing required key '" + key + "'");
  return *v;
}

std::string Config::get_string(const std::string& key,
                               const std::string& def) const {
  const std::string* v = find(key);
  return v ? *v : def;
}

std::int64_t Config::get_int(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    const std::int64_t r = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw InputError("config: key '" + key + "' is not an integer: '" + v + "'");
  }
}

std::int64_t Config::get_int(const std::string& key, std::int64_t def) const {
  return has(key) ? get_int(key) : def;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t def) const {
  if (!has(key)) return def;
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    const std::uint64_t r = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw InputError("config: key '" + key + "' is not an unsigned integer: '" +
                     v + "'");
  }
}

double Config::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  char* end = nullptr;
  const double r = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw InputError("config: key '" + key + "' is not a number: '" + v + "'");
  }
  return r;
}

double Config::get_double(const std::string& key, double def) const {
  return has(key) ? get_double(key) : def;
}

bool Config::get_bool(const std::string& key, bool def) const {
  if (!has(key)) return def;
  std::string v = get_string(key);
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InputError("config: key '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<std::int64_t> Config::get_int_list(const std::string& key) const {
  std::vector<std::int64_t> out;
  for (const std::string& part : split_list(get_string(key))) {
    const auto colon = part.find(':');
    if (colon != std::string::npos) {
      const std::int64_t lo = std::stoll(part.substr(0, colon));
      const std::int64_t hi = std::stoll(part.substr(colon + 1));
      if (hi < lo) {
        throw InputError("config: key '" + key + "': bad range '" + part + "'");
      }
      for (std::int64_t v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      out.push_back(std::stoll(part));
    }
  }
  if (out.empty()) throw InputError("config: key '" + key + "' is an empty list");
  return out;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& part : split_list(get_string(key))) {
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (end != part.c_str() + part.size()) {
      throw InputError("config: key '" + key + "': not a number: '" + part + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw InputError("config: key '" + key + "' is an empty list");
  return out;
}

std::vector<std::string> Config::get_string_list(const std::string& key) const {
  const auto out = split_list(get_string(key));
  if (out.empty()) throw InputError("config: key '" + key + "' is an empty list");
  return out;
}

}  // namespace bandtaper
