#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace steering::io {

// Split one CSV line on commas; fields are trimmed of surrounding spaces.
std::vector<std::string> split_csv(const std::string& line);

// Strict numeric parsing; `what` names the field in the InvalidArgument
// message.
double parse_double(const std::string& s, const std::string& what);
long long parse_int(const std::string& s, const std::string& what);

// Reads lines, dropping blank lines and '#' comment lines.
std::vector<std::string> read_data_lines(std::istream& in);

// Reproducibility header written at the top of every output file: tool
// version, the invoking command, the seed when one is in play, and the
// resolved configuration, all as '#' comments.
void write_output_header(
    std::ostream& out, const std::string& command,
    std::optional<std::uint64_t> seed,
    const std::vector<std::pair<std::string, std::string>>& config);

}  // namespace steering::io
