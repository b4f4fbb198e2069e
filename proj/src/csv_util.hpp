#pragma once

// Internal CSV helpers shared by the file readers/writers. All numeric
// formatting goes through to_chars/from_chars so values round-trip
// bit-exactly and never depend on locale.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace spikemon::detail {

/// Split on ',' without any quoting rules; empty fields are kept.
std::vector<std::string_view> split_fields(std::string_view line);

/// Remove one trailing '\r' (files written on other platforms).
void strip_cr(std::string& line);

bool parse_long(std::string_view field, long long& out);
bool parse_u64(std::string_view field, std::uint64_t& out);
bool parse_double(std::string_view field, double& out);

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

}  // namespace spikemon::detail
