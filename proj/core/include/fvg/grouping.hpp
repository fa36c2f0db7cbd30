#pragma once

#include "fvg/types.hpp"

namespace fvg {

/// Pearson correlation of the columns of `x` (two-pass, centered).
/// Throws ValidationError naming the first constant column.
Matrix correlation_from_data(const Matrix& x);

/// Rescales a covariance matrix to unit diagonal.
Matrix covariance_to_correlation(const Matrix& sigma);

/// Checks symmetry (1e-12), unit diagonal and |c_ij| <= 1.
void validate_correlation(const Matrix& c);

/// Agglomerative average-linkage clustering on d_ij = 1 - |c_ij|.
///
/// Every merge whose linkage distance is strictly below `cutoff` is applied;
/// among equal distances the pair with the smallest (i, j) representative
/// indices merges first. Groups come out ordered by smallest member.
GroupStructure cluster_average_linkage(const Matrix& corr, double cutoff);

} // namespace fvg
