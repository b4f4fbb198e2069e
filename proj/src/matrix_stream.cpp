#include "spikemon/matrix_stream.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "csv_util.hpp"
#include "spikemon/errors.hpp"

namespace spikemon {

namespace {

constexpr long long kMaxT = 1 << 24;
constexpr long long kMaxIndex = 1 << 20;

struct Block {
    std::vector<double> tri;  // packed lower triangle, grows as cells arrive
    std::vector<char> seen;
    int n = 0;  // largest index observed so far
};

std::size_t packed_index(int row, int col) {
    return static_cast<std::size_t>(row) * (static_cast<std::size_t>(row) + 1) / 2 +
           static_cast<std::size_t>(col);
}

}  // namespace

std::vector<SymMatrix> read_matrix_stream(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty file, expected header t,i,j,value", 0);
    ++lineno;
    detail::strip_cr(line);
    if (line != "t,i,j,value")
        throw ParseError("bad header '" + line + "', expected t,i,j,value", lineno);

    std::vector<Block> blocks;  // blocks[t-1]
    while (std::getline(in, line)) {
        ++lineno;
        detail::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = detail::split_fields(line);
        if (fields.size() != 4) throw ParseError("expected 4 fields t,i,j,value", lineno);

        long long t = 0, i = 0, j = 0;
        double v = 0.0;
        if (!detail::parse_long(fields[0], t) || !detail::parse_long(fields[1], i) ||
            !detail::parse_long(fields[2], j) || !detail::parse_double(fields[3], v))
            throw ParseError("malformed row '" + line + "'", lineno);
        if (t < 1 || t > kMaxT) throw ParseError("t out of range", lineno);
        if (i < 1 || j < 1 || i > kMaxIndex || j > kMaxIndex)
            throw ParseError("matrix index out of range", lineno);
        if (i > j) throw ParseError("rows must satisfy i <= j", lineno);
        if (!std::isfinite(v)) throw ParseError("value must be finite", lineno);

        if (static_cast<std::size_t>(t) > blocks.size()) blocks.resize(static_cast<std::size_t>(t));
        Block& b = blocks[static_cast<std::size_t>(t) - 1];
        if (static_cast<int>(j) > b.n) {
            b.n = static_cast<int>(j);
            const std::size_t need = packed_index(b.n - 1, b.n - 1) + 1;
            b.tri.resize(need, 0.0);
            b.seen.resize(need, 0);
        }
        // Cell (i, j) with i <= j lands in the lower triangle as row j-1, col i-1.
        const std::size_t idx = packed_index(static_cast<int>(j) - 1, static_cast<int>(i) - 1);
        if (b.seen[idx])
            throw ParseError("duplicate cell t=" + std::to_string(t) + " i=" + std::to_string(i) +
                                 " j=" + std::to_string(j),
                             lineno);
        b.seen[idx] = 1;
        b.tri[idx] = v;
    }
    if (in.bad()) throw IoError("read failure on " + path.string());
    if (blocks.empty()) throw ParseError("no data rows", lineno);

    const int n = blocks.front().n;
    std::vector<SymMatrix> out;
    out.reserve(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        Block& blk = blocks[b];
        if (blk.n == 0)
            throw ParseError("missing matrix t=" + std::to_string(b + 1) +
                                 " (t must be contiguous from 1)",
                             lineno);
        if (blk.n != n)
            throw ParseError("inconsistent dimension at t=" + std::to_string(b + 1) + ": " +
                                 std::to_string(blk.n) + " vs " + std::to_string(n),
                             lineno);
        for (int row = 0; row < n; ++row)
            for (int col = 0; col <= row; ++col)
                if (!blk.seen[packed_index(row, col)])
                    throw ParseError("missing cell t=" + std::to_string(b + 1) +
                                         " i=" + std::to_string(col + 1) +
                                         " j=" + std::to_string(row + 1),
                                     lineno);
        out.push_back(SymMatrix::from_lower(n, std::move(blk.tri)));
    }
    return out;
}

void write_matrix_stream(std::span<const SymMatrix> stream,
                         const std::filesystem::path& path) {
    if (stream.empty()) throw std::invalid_argument("write_matrix_stream: empty stream");
    const int n = stream.front().dim();
    for (const SymMatrix& a : stream)
        if (a.dim() != n)
            throw std::invalid_argument("write_matrix_stream: matrices must share one dimension");

    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "t,i,j,value\n";
    std::string row;
    for (std::size_t t = 0; t < stream.size(); ++t) {
        const SymMatrix& a = stream[t];
        for (int i = 1; i <= n; ++i)
            for (int j = i; j <= n; ++j) {
                row.clear();
                row += std::to_string(t + 1);
                row += ',';
                row += std::to_string(i);
                row += ',';
                row += std::to_string(j);
                row += ',';
                row += detail::format_double(a(i - 1, j - 1));
                row += '\n';
                out << row;
            }
    }
    out.flush();
    if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace spikemon
