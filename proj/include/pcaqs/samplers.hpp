#pragma once

#include "pcaqs/cluster.hpp"
#include "pcaqs/matrixcore.hpp"
#include "pcaqs/rng.hpp"
#include "pcaqs/stratify.hpp"
#include "pcaqs/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace pcaqs {

enum class SelectorKind { random, a_optimal, d_optimal, g_optimal, uncertainty };

const char* to_string(SelectorKind kind);
SelectorKind selector_from_string(std::string_view name);

/// Within-group selection rule. Optimal-design criteria run greedily on the
/// group's score rows with the information matrix seeded at ridge_eps * I.
struct SelectorCriterion {
  SelectorKind kind = SelectorKind::random;
  double ridge_eps = 1e-6;
};

/// How many principal components to stratify on: a fixed count, or the
/// smallest rank whose cumulative explained variance reaches `threshold`.
struct RankChoice {
  bool dynamic = true;
  Index count = 0;
  double threshold = 0.70;

  static RankChoice fixed(Index k) { return {false, k, 0.0}; }
  static RankChoice by_variance(double threshold) { return {true, 0, threshold}; }
};

struct RetentiveSubset {
  IndexList indices;               // ascending, unique row ids into the source
  std::optional<Vector> weights;   // aligned with indices; informational only
  std::string method;              // e.g. "pcaqs-random", "srs"
  double retention_rate = 0.0;
  RngSeed seed = 0;
  std::optional<std::map<GroupKey, std::size_t>> group_counts;
  std::optional<Index> pca_rank;   // stratification components, when PCA ran
};

/// Method tag for a PCA-guided quantile sample under the given selector.
std::string pcaqs_method_tag(SelectorKind kind);

/// Greedy subset of `quota` candidate rows (score space) under `criterion`;
/// returns local candidate indices in selection order. Score ties resolve to
/// the lowest candidate index.
IndexList design_select(const Eigen::Ref<const Matrix>& candidates, std::size_t quota,
                        const SelectorCriterion& criterion, RngSeed seed);

/// PCA-guided quantile sampling: standardize, project onto the chosen
/// principal components, stratify every component into `num_groups` empirical
/// quantile bins, then fill each composite group's quota with the selector.
/// Per-group selection seeds derive from `seed` and the group key.
RetentiveSubset pcaqs_sample(const Eigen::Ref<const Matrix>& x, const RankChoice& rank,
                             int num_groups, double rate,
                             const SelectorCriterion& criterion, RngSeed seed);

/// Simple random sampling: ceil(rate * n) rows drawn uniformly without
/// replacement.
RetentiveSubset srs_sample(Index n, double rate, RngSeed seed);

/// Squared row norms of the top-`rank` left singular block of `x`; rank = 0
/// picks the smallest rank covering 70% of the spectral energy, capped at 50.
Vector leverage_scores(const Eigen::Ref<const Matrix>& x, Index rank, RngSeed seed);

/// Probability-proportional-to-leverage draws without replacement; importance
/// weights 1/(n * p_i) are stored, not applied.
RetentiveSubset leverage_sample(const Eigen::Ref<const Matrix>& x, Index rank,
                                double rate, RngSeed seed);

KMeansParams coreset_defaults();  // one start, 15 iterations, tol 1e-3

/// k-means coreset: ceil(rate * n) centers, each snapped to the nearest actual
/// row (ties to the lowest row), weighted by cluster size; coincident snaps
/// merge and pool their weights.
RetentiveSubset coreset_sample(const Eigen::Ref<const Matrix>& x, double rate,
                               RngSeed seed, const KMeansParams& params = coreset_defaults());

/// One sampler invocation described by data: the method tag plus every knob a
/// method might need. Used by the benchmark harness and the CLI.
struct SampleSpec {
  std::string method = "pcaqs-random";
  double rate = 0.1;
  int num_groups = 5;
  RankChoice rank = RankChoice::by_variance(0.70);
  double ridge_eps = 1e-6;
  Index leverage_rank = 0;  // 0 = automatic
  KMeansParams coreset_kmeans = coreset_defaults();
};

RetentiveSubset draw_sample(const SampleSpec& spec, const Eigen::Ref<const Matrix>& x,
                            RngSeed seed);

}  // namespace pcaqs
