#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lexd::csv {

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
/// A trailing '\r' is ignored.
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

/// Strict numeric parse: the entire field must be consumed.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

/// Shortest text that round-trips to the same double.
std::string format_double(double value);

}  // namespace lexd::csv
