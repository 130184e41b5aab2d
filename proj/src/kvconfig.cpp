#include "chartfolio/kvconfig.hpp"

#include <fstream>
#include <sstream>

#include "chartfolio/csv.hpp"
#include "chartfolio/types.hpp"

namespace chartfolio {

KvConfig KvConfig::parse(const std::string& text) {
  KvConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw InputError("config line " + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    cfg.values_[key] = trim(t.substr(eq + 1));
  }
  return cfg;
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read config: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::string& KvConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw InputError("missing config key: " + key);
  return it->second;
}

std::optional<std::string> KvConfig::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

double KvConfig::get_double(const std::string& key) const {
  const auto v = parse_double(get(key));
  if (!v) throw InputError("config key " + key + ": not a number");
  return *v;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  return contains(key) ? get_double(key) : fallback;
}

long long KvConfig::get_int(const std::string& key) const {
  const auto v = parse_int(get(key));
  if (!v) throw InputError("config key " + key + ": not an integer");
  return *v;
}

long long KvConfig::get_int(const std::string& key, long long fallback) const {
  return contains(key) ? get_int(key) : fallback;
}

std::vector<double> KvConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& field : split(get(key), ',')) {
    const auto v = parse_double(trim(field));
    if (!v) throw InputError("config key " + key + ": not a number list");
    out.push_back(*v);
  }
  return out;
}

std::string KvConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

}  // namespace chartfolio
