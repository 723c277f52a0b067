#pragma once

#include "pcaqs/rng.hpp"
#include "pcaqs/types.hpp"

#include <utility>
#include <vector>

namespace pcaqs {

/// Column centering/scaling fitted on one matrix and re-applied to others.
/// `stddevs` holds the scaling divisors (the fitted sample standard deviations,
/// or 1.0 everywhere when scaling is disabled); entries for dropped columns are
/// whatever was measured and are never used.
struct ScalingParams {
  Vector means;                        // length = fit-time column count
  Vector stddevs;                      // scaling divisors for retained columns
  std::vector<Index> dropped_columns;  // zero-variance columns, ascending

  Index input_cols() const { return means.size(); }
  Index retained_cols() const {
    return means.size() - static_cast<Index>(dropped_columns.size());
  }
  std::vector<Index> retained_columns() const;

  /// Centers/scales `x` and drops the recorded columns. `x` must have
  /// input_cols() columns.
  Matrix apply(const Eigen::Ref<const Matrix>& x) const;
};

/// Centers every column and scales it to unit sample standard deviation
/// (n - 1 denominator). Zero-variance columns are dropped and recorded.
/// Throws on non-finite input, fewer than two rows, or when every column is
/// constant ("degenerate input").
std::pair<Matrix, ScalingParams> standardize(const Eigen::Ref<const Matrix>& x);

struct Svd {
  Matrix u;  // left singular vectors, orthonormal columns
  Vector s;  // singular values, nonincreasing
  Matrix v;  // right singular vectors, orthonormal columns
};

/// Randomized truncated SVD: Gaussian range finder with QR re-orthogonalized
/// power iterations, then an exact SVD of the projected panel. Deterministic
/// for a fixed seed.
Svd truncated_svd(const Eigen::Ref<const Matrix>& x, Index rank, Index oversample = 10,
                  int power_iterations = 2, RngSeed seed = 42);

struct PcaModel {
  ScalingParams scaling;
  bool standardized = true;
  Matrix components;       // retained_cols x k, orthonormal columns
  Vector singular_values;  // length k, nonincreasing
  Vector explained_variance_ratio;  // per-component share of total variance
  Index fitted_rows = 0;

  Index rank() const { return singular_values.size(); }
};

/// PCA of the (optionally standardized) input; eigenvalues use the n - 1
/// convention. `rank` must lie in [1, min(rows, retained columns)].
PcaModel fit_pca(const Eigen::Ref<const Matrix>& x, Index rank,
                 bool standardize_input = true, RngSeed seed = 42);

/// Fits just enough components for the cumulative explained variance to reach
/// `threshold`, growing the truncation rank geometrically, and returns the
/// model cut at the selected rank (or at full rank when the threshold is
/// unreachable).
PcaModel fit_pca_to_variance(const Eigen::Ref<const Matrix>& x, double threshold,
                             bool standardize_input = true, RngSeed seed = 42);

/// Projects `x` (fit-time column count, pre-drop) onto the model's components.
Matrix transform(const PcaModel& model, const Eigen::Ref<const Matrix>& x);

/// Smallest k whose cumulative ratio reaches `threshold`; the vector length
/// when the threshold is never reached. Throws on an empty vector.
Index select_rank_by_variance(const Eigen::Ref<const Vector>& explained_variance_ratio,
                              double threshold);

struct OlsFit {
  Vector coefficients;
  double intercept = 0.0;
  double ridge_used = 0.0;
  double residual_mse = 0.0;  // mean squared residual on the fit data
  double r_squared = 0.0;
  bool degenerate = false;  // constant response: intercept-only model
};

/// Least squares with an intercept, fitted on centered variables. A singular
/// system at ridge = 0 falls back to ridge = 1e-8, recorded in ridge_used.
OlsFit ols_fit(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
               double ridge = 0.0);

Vector predict(const OlsFit& fit, const Eigen::Ref<const Matrix>& x);

/// Mean squared prediction error of `fit` on the given rows.
double mean_squared_error(const OlsFit& fit, const Eigen::Ref<const Matrix>& x,
                          const Eigen::Ref<const Vector>& y);

/// 1 - SSE/SST of `fit` evaluated on the given rows (SST about their mean).
double r_squared_on(const OlsFit& fit, const Eigen::Ref<const Matrix>& x,
                    const Eigen::Ref<const Vector>& y);

}  // namespace pcaqs
