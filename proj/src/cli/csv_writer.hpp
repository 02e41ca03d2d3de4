#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace eelstm::cli {

/// Shortest round-trip decimal form, '.' separator.
std::string format_number(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(double v);
  CsvWriter& cell(std::size_t v);
  void end_row();
  void close();

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t columns_ = 0;
  std::size_t filled_ = 0;
};

/// Writes text through a temporary file and a rename.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace eelstm::cli
