#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wqed {

/// Flat sectioned configuration: `[section]` headers followed by
/// `key = value` lines, `;` comments. Section and key order is preserved.
class ConfigDocument {
 public:
  using Entries = std::vector<std::pair<std::string, std::string>>;

  static ConfigDocument parse(std::string_view text);
  static ConfigDocument load(const std::filesystem::path& path);

  /// Canonical text; parse(serialize()) reproduces the document.
  std::string serialize() const;

  bool has_section(std::string_view section) const;
  const Entries* section(std::string_view section) const;
  std::vector<std::string> section_names() const;
  std::optional<std::string> get(std::string_view section, std::string_view key) const;
  void set(std::string_view section, std::string_view key, std::string value);

 private:
  std::vector<std::pair<std::string, Entries>> sections_;
};

/// Typed accessors. Every failure is a ConfigError naming section and key.
std::optional<double> get_double(const ConfigDocument& doc, std::string_view section, std::string_view key);
double require_double(const ConfigDocument& doc, std::string_view section, std::string_view key);
std::optional<std::string> get_string(const ConfigDocument& doc, std::string_view section, std::string_view key);
std::string require_string(const ConfigDocument& doc, std::string_view section, std::string_view key);
std::optional<bool> get_bool(const ConfigDocument& doc, std::string_view section, std::string_view key);

/// Parses a finite or infinite ("inf") real; throws ConfigError otherwise.
double parse_real(std::string_view text, std::string_view what);

}  // namespace wqed
