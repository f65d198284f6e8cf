#include "wqed/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "wqed/errors.hpp"

namespace wqed {

ConfigDocument ConfigDocument::parse(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  ConfigDocument doc;
  for (const auto& [name, node] : tree) {
    if (node.empty() && !node.data().empty()) {
      throw ConfigError("config key '" + name + "' appears outside any [section]");
    }
    Entries entries;
    for (const auto& [key, leaf] : node) entries.emplace_back(key, leaf.get_value<std::string>());
    doc.sections_.emplace_back(name, std::move(entries));
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::string ConfigDocument::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < sections_.size(); ++i) {
    if (i > 0) out += '\n';
    out += '[' + sections_[i].first + "]\n";
    for (const auto& [key, value] : sections_[i].second) out += key + " = " + value + '\n';
  }
  return out;
}

bool ConfigDocument::has_section(std::string_view name) const { return section(name) != nullptr; }

const ConfigDocument::Entries* ConfigDocument::section(std::string_view name) const {
  for (const auto& [sec, entries] : sections_) {
    if (sec == name) return &entries;
  }
  return nullptr;
}

std::vector<std::string> ConfigDocument::section_names() const {
  std::vector<std::string> names;
  for (const auto& s : sections_) names.push_back(s.first);
  return names;
}

std::optional<std::string> ConfigDocument::get(std::string_view sec, std::string_view key) const {
  if (const Entries* entries = section(sec)) {
    for (const auto& [k, v] : *entries) {
      if (k == key) return v;
    }
  }
  return std::nullopt;
}

void ConfigDocument::set(std::string_view sec, std::string_view key, std::string value) {
  auto it = std::find_if(sections_.begin(), sections_.end(), [&](const auto& s) { return s.first == sec; });
  if (it == sections_.end()) {
    sections_.emplace_back(std::string(sec), Entries{});
    it = std::prev(sections_.end());
  }
  for (auto& [k, v] : it->second) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  it->second.emplace_back(std::string(key), std::move(value));
}

double parse_real(std::string_view text, std::string_view what) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || std::isnan(value)) {
    throw ConfigError(std::string(what) + ": '" + std::string(text) + "' is not a number");
  }
  return value;
}

namespace {

std::string where(std::string_view section, std::string_view key) {
  return "[" + std::string(section) + "] " + std::string(key);
}

}  // namespace

std::optional<double> get_double(const ConfigDocument& doc, std::string_view section, std::string_view key) {
  const auto raw = doc.get(section, key);
  if (!raw) return std::nullopt;
  return parse_real(*raw, where(section, key));
}

double require_double(const ConfigDocument& doc, std::string_view section, std::string_view key) {
  const auto v = get_double(doc, section, key);
  if (!v) throw ConfigError("missing required key '" + std::string(key) + "' in [" + std::string(section) + "]");
  return *v;
}

std::optional<std::string> get_string(const ConfigDocument& doc, std::string_view section, std::string_view key) {
  return doc.get(section, key);
}

std::string require_string(const ConfigDocument& doc, std::string_view section, std::string_view key) {
  auto v = doc.get(section, key);
  if (!v) throw ConfigError("missing required key '" + std::string(key) + "' in [" + std::string(section) + "]");
  return *v;
}

std::optional<bool> get_bool(const ConfigDocument& doc, std::string_view section, std::string_view key) {
  const auto raw = doc.get(section, key);
  if (!raw) return std::nullopt;
  if (*raw == "true" || *raw == "1" || *raw == "yes") return true;
  if (*raw == "false" || *raw == "0" || *raw == "no") return false;
  throw ConfigError(where(section, key) + ": expected true or false, got '" + *raw + "'");
}

}  // namespace wqed
