#include "pcaqs/types.hpp"

#include "pcaqs/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pcaqs {

void require_finite(const Eigen::Ref<const Matrix>& x, const char* what) {
  if (!x.allFinite()) {
    throw std::invalid_argument(std::string(what) + " contains a non-finite value");
  }
}

void require_finite(const Eigen::Ref<const Vector>& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + " contains a non-finite value");
  }
}

Matrix select_rows(const Eigen::Ref<const Matrix>& x, const IndexList& rows) {
  Matrix out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= x.rows()) {
      throw std::invalid_argument("select_rows: row " + std::to_string(rows[i]) +
                                  " out of range");
    }
    out.row(static_cast<Index>(i)) = x.row(rows[i]);
  }
  return out;
}

std::size_t scaled_ceil(std::size_t n, double rate) {
  double r = rate * static_cast<double>(n);
  const double nearest = std::round(r);
  if (std::abs(r - nearest) <= 1e-9 * std::max(1.0, std::abs(nearest))) r = nearest;
  double c = std::ceil(r);
  if (c < 0.0) c = 0.0;
  auto out = static_cast<std::size_t>(c);
  if (out == 0 && rate > 0.0 && n > 0) out = 1;
  return out;
}

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  }
  return out;
}

IndexList sample_without_replacement(Index n, Index count, Rng& rng) {
  if (count < 0 || count > n) {
    throw std::invalid_argument("sample_without_replacement: count out of range");
  }
  IndexList pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  IndexList out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    out.push_back(pool[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace pcaqs
