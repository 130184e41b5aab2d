#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace chartfolio {

std::string trim(std::string_view s);
/// Plain separator split; no quoting (none of our formats need it).
std::vector<std::string> split(std::string_view s, char sep);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// Shortest round-trippable decimal for a double.
std::string format_double(double v);
/// Fixed precision rendering for reports.
std::string format_fixed(double v, int decimals);

/// Header-addressed CSV reader. Rows keep their 1-based file line number.
class CsvTable {
 public:
  struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
  };

  static CsvTable load(const std::filesystem::path& path);
  static CsvTable parse(const std::string& text);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<Row>& rows() const { return rows_; }
  bool has_column(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t column(const std::string& name) const;
  /// Throws InputError naming each absent column.
  void require(const std::vector<std::string>& names) const;

 private:
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Row> rows_;
};

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace chartfolio
