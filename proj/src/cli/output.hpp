#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace dtopo::cli {

using ojson = nlohmann::ordered_json;

// Creates the directory if needed; throws Error(InvalidInput) when it cannot.
std::string output_path(const std::string& dir, const std::string& name);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(int v);
  CsvWriter& operator<<(const std::string& v);
  CsvWriter& operator<<(const std::optional<double>& v);  // empty cell when unset
  void end_row();

 private:
  void sep();
  std::ofstream out_;
  bool fresh_ = true;
};

void write_json(const std::string& path, const ojson& j);

// NaN and ±∞ are not JSON numbers.
ojson num(double v);

}  // namespace dtopo::cli
