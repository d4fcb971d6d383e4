#include "qwalk/csv.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace qwalk {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

namespace {

std::ofstream open_for_write(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  auto out = open_for_write(path);
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_for_write(path);
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace qwalk
