#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gs {

// Locale-independent shortest round-trip formatting (std::to_chars).
// All emitted tables go through this so output is byte-identical across
// runs, locales and thread counts.
std::string format_double(double x);

// One CSV table: mandatory header row, '.' decimal separator, '\n' line
// endings. Cells are written verbatim; use format_double for numbers.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(std::vector<std::string> cells);
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace gs
