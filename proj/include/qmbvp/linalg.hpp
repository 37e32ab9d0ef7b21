#pragma once

#include <vector>

namespace qmbvp {

/// Solves the n x n system A out = b (A row-major) by Gaussian elimination
/// with partial pivoting. Returns false when A is numerically singular.
bool solve_dense(std::vector<double> A, std::vector<double> b, int n,
                 std::vector<double>& out);

}  // namespace qmbvp
