#include "rfe/util/kv_config.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rfe::util {

std::string trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

KvConfig KvConfig::parse(std::string_view text) {
  KvConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    }
    cfg.values_[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return cfg;
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> KvConfig::lookup(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  used_[key] = true;
  return it->second;
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
  return lookup(key).value_or(fallback);
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  auto v = lookup(key);
  if (!v) return fallback;
  size_t pos = 0;
  double d = 0;
  try {
    d = std::stod(*v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v->size() || !std::isfinite(d)) {
    throw std::invalid_argument("config key '" + key + "': not a number: " + *v);
  }
  return d;
}

long long KvConfig::get_int(const std::string& key, long long fallback) const {
  auto v = lookup(key);
  if (!v) return fallback;
  size_t pos = 0;
  long long i = 0;
  try {
    i = std::stoll(*v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v->size()) {
    throw std::invalid_argument("config key '" + key + "': not an integer: " + *v);
  }
  return i;
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  auto v = lookup(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw std::invalid_argument("config key '" + key + "': not a boolean: " + *v);
}

std::vector<std::string> KvConfig::get_list(const std::string& key,
                                            const std::vector<std::string>& fallback) const {
  auto v = lookup(key);
  if (!v) return fallback;
  std::vector<std::string> out;
  for (auto& item : split(*v, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> KvConfig::get_doubles(const std::string& key,
                                          const std::vector<double>& fallback) const {
  auto v = lookup(key);
  if (!v) return fallback;
  auto to_d = [&](const std::string& s) {
    size_t pos = 0;
    double d = 0;
    try {
      d = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size()) throw std::invalid_argument("config key '" + key + "': bad number " + s);
    return d;
  };
  if (v->find(':') != std::string::npos) {
    auto parts = split(*v, ':');
    if (parts.size() != 3) {
      throw std::invalid_argument("config key '" + key + "': range must be lo:hi:step");
    }
    const double lo = to_d(parts[0]);
    const double hi = to_d(parts[1]);
    const double step = to_d(parts[2]);
    if (step <= 0 || hi < lo) throw std::invalid_argument("config key '" + key + "': bad range");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) {
      // Round to 1e-9 so 0.2 + 3*0.05 prints as 0.35 rather than 0.35000000000000003.
      out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9);
    }
    return out;
  }
  std::vector<double> out;
  for (auto& item : split(*v, ',')) {
    if (!item.empty()) out.push_back(to_d(item));
  }
  return out;
}

std::vector<std::string> KvConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (!used_.count(k)) out.push_back(k);
  }
  return out;
}

}  // namespace rfe::util
