#pragma once

#include "pcaqs/rng.hpp"
#include "pcaqs/types.hpp"

#include <cstddef>
#include <optional>

namespace pcaqs {

/// Szekely energy distance 2 E|a-b| - E|a-a'| - E|b-b'| between the row sets,
/// clamped at zero. Each expectation runs over all pairs when the pair count
/// fits under `pair_cap`, and over `pair_cap` seeded uniform pairs otherwise.
double energy_distance(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b,
                       std::size_t pair_cap = 100000, RngSeed seed = 42);

/// Mahalanobis distance between the mean rows under the second set's
/// covariance: sqrt((mu_a - mu_b)' (cov_b + ridge I)^-1 (mu_a - mu_b)).
/// A singular covariance at ridge = 0 falls back to ridge = 1e-8; the value
/// actually used is written to `ridge_used` when given.
double mahalanobis_mean_distance(const Eigen::Ref<const Matrix>& a,
                                 const Eigen::Ref<const Matrix>& b, double ridge = 1e-8,
                                 double* ridge_used = nullptr);

/// KL divergence between moment-matched Gaussians after projecting both sets
/// onto the top-`rank` principal components of `b` (requested rank is clamped
/// to the column count). Both sets need more rows than the effective rank.
double kl_divergence_gaussian(const Eigen::Ref<const Matrix>& a,
                              const Eigen::Ref<const Matrix>& b, Index rank = 10,
                              double ridge = 1e-8);

/// Biased RBF-kernel MMD^2 with kernel exp(-|x-y|^2 / (2 h^2)). Without an
/// explicit bandwidth, h is the median pairwise distance over a seeded pooled
/// subsample; an all-zero median is a degenerate-bandwidth error. Kernel sums
/// obey `pair_cap` like energy_distance. The bandwidth actually used is
/// written to `bandwidth_used` when given.
double mmd_rbf(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b,
               std::optional<double> bandwidth = std::nullopt,
               std::size_t pair_cap = 100000, RngSeed seed = 42,
               double* bandwidth_used = nullptr);

/// mse_subset / mse_full; mse_full must be positive.
double relative_mse(double mse_subset, double mse_full);

struct MetricParams {
  std::size_t pair_cap = 100000;
  std::optional<double> bandwidth;  // median heuristic when absent
  Index kl_rank = 10;
  double ridge = 1e-8;  // covariance ridge for the Mahalanobis and KL terms
  RngSeed seed = 42;
};

/// All four distributional metrics of `subset` against `source`, with the
/// parameters actually used (resolved bandwidth, ridges, seed) echoed back.
struct SimilarityReport {
  double energy = 0.0;
  double mahalanobis = 0.0;
  double kl = 0.0;
  double mmd = 0.0;
  std::size_t pair_cap = 0;
  double bandwidth = 0.0;
  Index kl_rank = 0;
  double mahalanobis_ridge = 0.0;
  double kl_ridge = 0.0;
  RngSeed seed = 0;
};

SimilarityReport compute_similarity(const Eigen::Ref<const Matrix>& subset,
                                    const Eigen::Ref<const Matrix>& source,
                                    const MetricParams& params = {});

}  // namespace pcaqs
