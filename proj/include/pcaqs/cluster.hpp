#pragma once

#include "pcaqs/rng.hpp"
#include "pcaqs/types.hpp"

#include <vector>

namespace pcaqs {

struct KMeansParams {
  int num_starts = 10;
  int max_iter = 300;
  double tol = 1e-4;  // relative centroid shift at which a start stops
};

struct KMeansResult {
  Matrix centroids;              // k x p
  std::vector<int> assignments;  // 0-based cluster id per row, vs. final centroids
  double inertia = 0.0;          // sum of squared distances to assigned centroids
  int iterations = 0;            // Lloyd iterations of the winning start
  int starts_run = 0;
};

/// Lloyd's algorithm with k-means++ seeding; the best inertia over
/// `num_starts` independent starts wins, ties to the earliest start.
/// Per-start seeds derive from `seed`, so a larger start count replays the
/// smaller one's runs. Empty clusters are re-seeded to the point farthest
/// from its assigned centroid.
KMeansResult kmeans(const Eigen::Ref<const Matrix>& x, int k,
                    const KMeansParams& params = {}, RngSeed seed = 42);

/// Nearest centroid per row of `x`; distance ties go to the lowest centroid index.
std::vector<int> assign_nearest(const Eigen::Ref<const Matrix>& centroids,
                                const Eigen::Ref<const Matrix>& x);

/// Mean silhouette score of the labeled rows, evaluated on a seeded uniform
/// subsample of at most `sample_cap` rows when `x` is larger (per-row scores
/// still use every row). Singleton clusters contribute 0. Throws when fewer
/// than two clusters are nonempty.
double silhouette(const Eigen::Ref<const Matrix>& x, const std::vector<int>& assignments,
                  Index sample_cap = 2000, RngSeed seed = 42);

}  // namespace pcaqs
