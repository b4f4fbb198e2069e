#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "spikemon/sym_matrix.hpp"

namespace spikemon {

/// Read a symmetric-matrix stream from CSV with header `t,i,j,value`.
/// One row per upper-triangle cell (i <= j, 1-based); every cell of every
/// matrix must appear exactly once, and t must be contiguous from 1. Rows
/// may arrive in any order. Matrices are returned in ascending t.
std::vector<SymMatrix> read_matrix_stream(const std::filesystem::path& path);

/// Write matrices (all the same dimension, t assigned 1..len in order) in
/// the format read_matrix_stream accepts. Values round-trip bit-exactly.
void write_matrix_stream(std::span<const SymMatrix> stream,
                         const std::filesystem::path& path);

}  // namespace spikemon
