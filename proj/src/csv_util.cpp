#include "csv_util.hpp"

#include <charconv>

namespace spikemon::detail {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

namespace {

template <typename T>
bool parse_via_from_chars(std::string_view field, T& out) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && first != last;
}

}  // namespace

bool parse_long(std::string_view field, long long& out) {
    return parse_via_from_chars(field, out);
}

bool parse_u64(std::string_view field, std::uint64_t& out) {
    return parse_via_from_chars(field, out);
}

bool parse_double(std::string_view field, double& out) {
    return parse_via_from_chars(field, out);
}

std::string format_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;  // 40 bytes always suffice for the shortest double form
    return std::string(buf, ptr);
}

}  // namespace spikemon::detail
