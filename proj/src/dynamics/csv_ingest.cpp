#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include "eelstm/dynamics.hpp"
#include "eelstm/errors.hpp"

namespace eelstm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

RawSeries parse_csv_series(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::optional<double>> values;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto comma = t.find(',');
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": expected two columns timestamp,value");
    }
    const std::string ts = trim(t.substr(0, comma));
    const std::string val = trim(t.substr(comma + 1));
    if (values.empty() && line_no == 1 && !parse_number(ts) && !parse_number(val) && !val.empty()) {
      continue;  // header
    }
    if (ts.empty()) throw ParseError(origin + ":" + std::to_string(line_no) + ": empty timestamp");
    if (val.empty()) {
      values.push_back(std::nullopt);
      continue;
    }
    const auto v = parse_number(val);
    if (!v) throw ParseError(origin + ":" + std::to_string(line_no) + ": malformed value '" + val + "'");
    values.push_back(*v);
  }
  if (values.size() < 2) throw IoError(origin + ": fewer than 2 rows");
  if (!values.front() || !values.back()) {
    throw IoError(origin + ": missing value at the start or end cannot be interpolated");
  }

  const std::size_t T = values.size();
  Tensor data(Shape{T, 1});
  std::size_t prev = 0;
  for (std::size_t i = 0; i < T; ++i) {
    if (!values[i]) continue;
    data(i, 0) = *values[i];
    for (std::size_t k = prev + 1; k < i; ++k) {
      const double a = static_cast<double>(k - prev) / static_cast<double>(i - prev);
      data(k, 0) = (1.0 - a) * *values[prev] + a * *values[i];
    }
    prev = i;
  }
  return {std::move(data), 1.0, origin};
}

RawSeries ingest_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_csv_series(buf.str(), path);
}

}  // namespace eelstm
