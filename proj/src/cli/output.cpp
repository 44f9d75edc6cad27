#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "dtopo/cli.hpp"
#include "dtopo/errors.hpp"

namespace dtopo::cli {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string output_path(const std::string& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::InvalidInput, "cannot create output directory " + dir + ": " + ec.message());
  return (std::filesystem::path(dir) / name).string();
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
  if (!out_) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
  for (const auto& h : header) *this << h;
  end_row();
}

void CsvWriter::sep() {
  if (!fresh_) out_ << ',';
  fresh_ = false;
}

CsvWriter& CsvWriter::operator<<(double v) {
  sep();
  out_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(int v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
  sep();
  if (v.find_first_of(",\"\n") == std::string::npos) {
    out_ << v;
  } else {
    out_ << '"';
    for (char c : v) {
      if (c == '"') out_ << '"';
      out_ << c;
    }
    out_ << '"';
  }
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::optional<double>& v) {
  if (v) return *this << *v;
  sep();
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  fresh_ = true;
}

void write_json(const std::string& path, const ojson& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
  out << j.dump(2) << '\n';
}

ojson num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace dtopo::cli
