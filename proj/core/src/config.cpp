#include "vpme/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "vpme/error.hpp"

namespace vpme {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double to_double(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument(where + ": expected a number, got '" + s + "'");
  }
  if (used != s.size()) throw InvalidArgument(where + ": expected a number, got '" + s + "'");
  return v;
}

long long to_int(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument(where + ": expected an integer, got '" + s + "'");
  }
  if (used != s.size()) throw InvalidArgument(where + ": expected an integer, got '" + s + "'");
  return v;
}

std::string where(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

}  // namespace

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    line = trim(line);
    if (line.empty()) continue;
    const std::string at = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw InvalidArgument(at + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw InvalidArgument(at + ": empty section name");
      cfg.entries_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument(at + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw InvalidArgument(at + ": empty key");
    auto& sec = cfg.entries_[section];
    if (sec.count(key)) throw InvalidArgument(at + ": duplicate key '" + where(section, key) + "'");
    sec[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::string* KeyValueConfig::find(const std::string& section, const std::string& key) const {
  const auto s = entries_.find(section);
  if (s == entries_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

bool KeyValueConfig::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string KeyValueConfig::get_string(const std::string& section, const std::string& key,
                                       const std::string& fallback) const {
  const auto* v = find(section, key);
  return v ? *v : fallback;
}

double KeyValueConfig::get_double(const std::string& section, const std::string& key, double fallback) const {
  const auto* v = find(section, key);
  return v ? to_double(*v, where(section, key)) : fallback;
}

long long KeyValueConfig::get_int(const std::string& section, const std::string& key, long long fallback) const {
  const auto* v = find(section, key);
  return v ? to_int(*v, where(section, key)) : fallback;
}

bool KeyValueConfig::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const auto* v = find(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw InvalidArgument(where(section, key) + ": expected a boolean, got '" + *v + "'");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& section, const std::string& key,
                                                const std::vector<double>& fallback) const {
  const auto* v = find(section, key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& tok : split_list(*v)) out.push_back(to_double(tok, where(section, key)));
  if (out.empty()) throw InvalidArgument(where(section, key) + ": empty list");
  return out;
}

std::vector<long long> KeyValueConfig::get_ints(const std::string& section, const std::string& key,
                                                const std::vector<long long>& fallback) const {
  const auto* v = find(section, key);
  if (!v) return fallback;
  std::vector<long long> out;
  for (const auto& tok : split_list(*v)) out.push_back(to_int(tok, where(section, key)));
  if (out.empty()) throw InvalidArgument(where(section, key) + ": empty list");
  return out;
}

void KeyValueConfig::require_known(const std::map<std::string, std::set<std::string>>& allowed) const {
  for (const auto& [section, keys] : entries_) {
    const auto s = allowed.find(section);
    if (s == allowed.end()) throw InvalidArgument("unknown config section '" + section + "'");
    for (const auto& [key, value] : keys)
      if (!s->second.count(key)) throw InvalidArgument("unknown config key '" + where(section, key) + "'");
  }
}

}  // namespace vpme
