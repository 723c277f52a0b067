#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace pcaqs {

/// Dense row-major real matrix; rows are observations, columns are features.
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Matrix = MatrixX<double>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

/// Throws std::invalid_argument naming `what` when the input holds NaN or infinity.
void require_finite(const Eigen::Ref<const Matrix>& x, const char* what);
void require_finite(const Eigen::Ref<const Vector>& v, const char* what);

/// The listed rows of `x`, stacked in the given order. Throws on an out-of-range row.
Matrix select_rows(const Eigen::Ref<const Matrix>& x, const IndexList& rows);

/// ceil(rate * n), guarded so that rates given as short decimals (0.05, 0.1, ...)
/// are not pushed past an integer boundary by binary rounding. Positive inputs
/// never round down to zero.
std::size_t scaled_ceil(std::size_t n, double rate);

}  // namespace pcaqs
