#include "mixcaladin/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mixcaladin {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string to_csv(const std::vector<TraceRecord>& trace) {
  std::string out = kTraceCsvHeader;
  out += '\n';
  for (const auto& rec : trace) {
    out += to_string(rec.stage);
    out += ',';
    out += std::to_string(rec.iter);
    out += ',';
    out += format_double(rec.step_norm);
    out += ',';
    out += format_double(rec.objective);
    out += ',';
    out += format_double(rec.gamma);
    out += ',';
    out += format_double(rec.alpha);
    out += ',';
    if (rec.energy) {
      out += format_double(*rec.energy);
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  f << contents;
  if (!f) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace mixcaladin
