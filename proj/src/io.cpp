#include "steering/io.hpp"

#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

#include "steering/errors.hpp"
#include "steering/random.hpp"
#include "steering/version.hpp"

namespace steering {

int default_thread_count() {
  const char* env = std::getenv("STEERKIT_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (end == nullptr || *end != '\0' || v < 1) return 1;
  return static_cast<int>(v);
}

}  // namespace steering

namespace steering::io {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& s, const std::string& what) {
  if (s.empty()) throw InvalidArgument("empty " + what + " field");
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw InvalidArgument("bad " + what + " value '" + s + "'");
  return v;
}

long long parse_int(const std::string& s, const std::string& what) {
  if (s.empty()) throw InvalidArgument("empty " + what + " field");
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size())
    throw InvalidArgument("bad " + what + " value '" + s + "'");
  return v;
}

std::vector<std::string> read_data_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    lines.push_back(t);
  }
  return lines;
}

void write_output_header(
    std::ostream& out, const std::string& command,
    std::optional<std::uint64_t> seed,
    const std::vector<std::pair<std::string, std::string>>& config) {
  out << "# steerkit " << kVersion << "\n";
  out << "# command: " << command << "\n";
  if (seed) out << "# seed: " << *seed << "\n";
  for (const auto& [key, value] : config)
    out << "# " << key << ": " << value << "\n";
}

}  // namespace steering::io
