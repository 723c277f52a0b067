#include "pcaqs/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace pcaqs {

const char* to_string(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::random: return "random";
    case SelectorKind::a_optimal: return "a_optimal";
    case SelectorKind::d_optimal: return "d_optimal";
    case SelectorKind::g_optimal: return "g_optimal";
    case SelectorKind::uncertainty: return "uncertainty";
  }
  throw std::logic_error("to_string: unknown selector");
}

SelectorKind selector_from_string(std::string_view name) {
  if (name == "random") return SelectorKind::random;
  if (name == "a_optimal") return SelectorKind::a_optimal;
  if (name == "d_optimal") return SelectorKind::d_optimal;
  if (name == "g_optimal") return SelectorKind::g_optimal;
  if (name == "uncertainty") return SelectorKind::uncertainty;
  throw std::invalid_argument(
      "unknown selector '" + std::string(name) +
      "' (expected random, a_optimal, d_optimal, g_optimal, or uncertainty)");
}

std::string pcaqs_method_tag(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::random: return "pcaqs-random";
    case SelectorKind::a_optimal: return "pcaqs-aopt";
    case SelectorKind::d_optimal: return "pcaqs-dopt";
    case SelectorKind::g_optimal: return "pcaqs-gopt";
    case SelectorKind::uncertainty: return "pcaqs-uncert";
  }
  throw std::logic_error("pcaqs_method_tag: unknown selector");
}

namespace {

// One greedy pass for the information-matrix criteria.  `inv` tracks the
// inverse of M = ridge * I + sum of z z^T over chosen rows via rank-one
// updates, so each step costs O(m k^2) — O(m^2 k) for the minimax rule, which
// must look at every remaining candidate's predictive variance.
IndexList greedy_design(const Eigen::Ref<const Matrix>& cand, std::size_t quota,
                        const SelectorCriterion& criterion) {
  const Index m = cand.rows();
  const Index k = cand.cols();
  Matrix inv = Matrix::Identity(k, k) / criterion.ridge_eps;

  std::vector<char> taken(static_cast<std::size_t>(m), 0);
  IndexList order;
  order.reserve(quota);

  Matrix w;            // cand * inv, refreshed every step
  Vector q(m);         // predictive variances z^T inv z
  Matrix gram_block;   // minimax rule: w-rows x candidates cross terms

  for (std::size_t step = 0; step < quota; ++step) {
    w.noalias() = cand * inv;
    for (Index i = 0; i < m; ++i) q(i) = w.row(i).dot(cand.row(i));

    Index chosen = -1;
    if (criterion.kind == SelectorKind::g_optimal) {
      // Pick the candidate whose addition minimizes the worst predictive
      // variance left anywhere else (the added row included).
      double best_score = std::numeric_limits<double>::infinity();
      constexpr Index kBlock = 128;
      for (Index start = 0; start < m; start += kBlock) {
        const Index width = std::min<Index>(kBlock, m - start);
        gram_block.noalias() = w.middleRows(start, width) * cand.transpose();
        for (Index t = 0; t < width; ++t) {
          const Index i = start + t;
          if (taken[static_cast<std::size_t>(i)]) continue;
          const double shrink = 1.0 + q(i);
          double worst = -std::numeric_limits<double>::infinity();
          for (Index c = 0; c < m; ++c) {
            if (taken[static_cast<std::size_t>(c)]) continue;
            const double g = gram_block(t, c);
            worst = std::max(worst, q(c) - g * g / shrink);
          }
          if (worst < best_score) {
            best_score = worst;
            chosen = i;
          }
        }
      }
    } else {
      double best_score = -std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        double score = 0.0;
        switch (criterion.kind) {
          case SelectorKind::a_optimal:
            score = w.row(i).squaredNorm() / (1.0 + q(i));
            break;
          case SelectorKind::d_optimal:
          case SelectorKind::uncertainty:
            score = q(i);
            break;
          default:
            throw std::logic_error("greedy_design: unexpected selector");
        }
        if (score > best_score) {
          best_score = score;
          chosen = i;
        }
      }
    }

    taken[static_cast<std::size_t>(chosen)] = 1;
    order.push_back(chosen);
    const Vector u = inv * cand.row(chosen).transpose();
    const double denom = 1.0 + cand.row(chosen).dot(u);
    inv.noalias() -= (u * u.transpose()) / denom;
  }
  return order;
}

void check_rate(double rate, const char* who) {
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw std::invalid_argument(std::string(who) + ": retention rate must lie in (0, 1]");
  }
}

}  // namespace

IndexList design_select(const Eigen::Ref<const Matrix>& candidates, std::size_t quota,
                        const SelectorCriterion& criterion, RngSeed seed) {
  const Index m = candidates.rows();
  if (quota > static_cast<std::size_t>(m)) {
    throw std::invalid_argument("design_select: quota exceeds candidate count");
  }
  if (quota == 0) return {};
  if (criterion.kind == SelectorKind::random) {
    Rng rng = make_rng(seed);
    return sample_without_replacement(m, quota, rng);
  }
  if (!(criterion.ridge_eps > 0.0)) {
    throw std::invalid_argument("design_select: ridge_eps must be positive");
  }
  require_finite(candidates, "design_select: candidates");
  return greedy_design(candidates, quota, criterion);
}

RetentiveSubset pcaqs_sample(const Eigen::Ref<const Matrix>& x, const RankChoice& rank,
                             int num_groups, double rate,
                             const SelectorCriterion& criterion, RngSeed seed) {
  check_rate(rate, "pcaqs_sample");
  if (num_groups < 2) {
    throw std::invalid_argument("pcaqs_sample: needs at least two quantile groups");
  }

  const RngSeed pca_seed = derive_seed(seed, "pca");
  PcaModel model = rank.dynamic
                       ? fit_pca_to_variance(x, rank.threshold, true, pca_seed)
                       : fit_pca(x, rank.count, true, pca_seed);
  const Matrix scores = transform(model, x);
  const GroupIndex groups = build_group_index(scores, num_groups);

  RetentiveSubset out;
  out.method = pcaqs_method_tag(criterion.kind);
  out.retention_rate = rate;
  out.seed = seed;
  out.pca_rank = model.rank();
  out.group_counts.emplace();

  for (const auto& [key, members] : groups.groups) {
    const std::size_t quota = group_quota(members.size(), rate);
    (*out.group_counts)[key] = quota;
    if (quota == members.size()) {
      out.indices.insert(out.indices.end(), members.begin(), members.end());
      continue;
    }
    Matrix cand(static_cast<Index>(members.size()), scores.cols());
    for (std::size_t r = 0; r < members.size(); ++r) {
      cand.row(static_cast<Index>(r)) = scores.row(members[r]);
    }
    const RngSeed group_seed = derive_seed(seed, "group:" + key.str());
    for (const Index local : design_select(cand, quota, criterion, group_seed)) {
      out.indices.push_back(members[static_cast<std::size_t>(local)]);
    }
  }
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

RetentiveSubset srs_sample(Index n, double rate, RngSeed seed) {
  check_rate(rate, "srs_sample");
  if (n < 1) throw std::invalid_argument("srs_sample: empty input");
  const std::size_t count = std::min(scaled_ceil(n, rate), static_cast<std::size_t>(n));
  Rng rng = make_rng(seed);
  RetentiveSubset out;
  out.indices = sample_without_replacement(n, count, rng);
  std::sort(out.indices.begin(), out.indices.end());
  out.method = "srs";
  out.retention_rate = rate;
  out.seed = seed;
  return out;
}

Vector leverage_scores(const Eigen::Ref<const Matrix>& x, Index rank, RngSeed seed) {
  const Index max_rank = std::min(x.rows(), x.cols());
  if (max_rank < 1) throw std::invalid_argument("leverage_scores: empty input");
  if (rank < 0 || rank > max_rank) {
    throw std::invalid_argument("leverage_scores: rank must lie in [0, min(rows, cols)]");
  }

  if (rank == 0) {
    const Index cap = std::min<Index>(50, max_rank);
    const Svd svd = truncated_svd(x, cap, 10, 2, seed);
    const double energy_target = 0.7 * x.squaredNorm();
    double cum = 0.0;
    rank = cap;
    for (Index j = 0; j < cap; ++j) {
      cum += svd.s(j) * svd.s(j);
      if (cum >= energy_target) {
        rank = j + 1;
        break;
      }
    }
    return svd.u.leftCols(rank).rowwise().squaredNorm();
  }
  const Svd svd = truncated_svd(x, rank, 10, 2, seed);
  return svd.u.rowwise().squaredNorm();
}

namespace {

// Fenwick tree over nonnegative weights; find() locates the item whose
// cumulative-weight interval contains the target.
class WeightTree {
 public:
  explicit WeightTree(const Vector& weights) : size_(weights.size()), tree_(weights.size() + 1, 0.0) {
    for (Index i = 0; i < size_; ++i) add(i, weights(i));
  }

  void add(Index i, double delta) {
    for (Index pos = i + 1; pos <= size_; pos += pos & -pos) {
      tree_[static_cast<std::size_t>(pos)] += delta;
    }
  }

  double total() const {
    double sum = 0.0;
    for (Index pos = size_; pos > 0; pos -= pos & -pos) {
      sum += tree_[static_cast<std::size_t>(pos)];
    }
    return sum;
  }

  Index find(double target) const {
    Index pos = 0;
    Index bit = 1;
    while ((bit << 1) <= size_) bit <<= 1;
    for (; bit > 0; bit >>= 1) {
      const Index next = pos + bit;
      if (next <= size_ && tree_[static_cast<std::size_t>(next)] <= target) {
        pos = next;
        target -= tree_[static_cast<std::size_t>(next)];
      }
    }
    return std::min(pos, size_ - 1);
  }

 private:
  Index size_;
  std::vector<double> tree_;
};

}  // namespace

RetentiveSubset leverage_sample(const Eigen::Ref<const Matrix>& x, Index rank, double rate,
                                RngSeed seed) {
  check_rate(rate, "leverage_sample");
  const Index n = x.rows();
  if (n < 1) throw std::invalid_argument("leverage_sample: empty input");
  const std::size_t count = std::min(scaled_ceil(n, rate), static_cast<std::size_t>(n));

  const Vector scores = leverage_scores(x, rank, derive_seed(seed, "svd"));
  const double score_sum = scores.sum();
  if (!(score_sum > 0.0)) {
    throw std::runtime_error("leverage_sample: all leverage scores are zero");
  }

  Vector live = scores.cwiseMax(0.0);
  WeightTree tree(live);
  Rng rng = make_rng(derive_seed(seed, "draw"));

  std::vector<std::pair<Index, double>> drawn;  // row, importance weight
  drawn.reserve(count);
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (std::size_t d = 0; d < count; ++d) {
    const double mass = tree.total();
    Index row;
    if (mass > 0.0) {
      std::uniform_real_distribution<double> unit(0.0, mass);
      row = tree.find(unit(rng));
      if (used[static_cast<std::size_t>(row)]) {
        // numerical spill landed on an exhausted slot; take the next free row
        Index probe = row;
        do { probe = (probe + 1) % n; } while (used[static_cast<std::size_t>(probe)]);
        row = probe;
      }
    } else {
      // every remaining score is zero: fall back to the lowest unused row
      row = 0;
      while (used[static_cast<std::size_t>(row)]) ++row;
    }
    used[static_cast<std::size_t>(row)] = 1;
    tree.add(row, -live(row));
    live(row) = 0.0;
    const double prob = scores(row) / score_sum;
    const double weight = prob > 0.0 ? 1.0 / (static_cast<double>(n) * prob) : 0.0;
    drawn.emplace_back(row, weight);
  }

  std::sort(drawn.begin(), drawn.end());
  RetentiveSubset out;
  out.indices.reserve(count);
  Vector weights(static_cast<Index>(count));
  for (std::size_t i = 0; i < drawn.size(); ++i) {
    out.indices.push_back(drawn[i].first);
    weights(static_cast<Index>(i)) = drawn[i].second;
  }
  out.weights = std::move(weights);
  out.method = "leverage";
  out.retention_rate = rate;
  out.seed = seed;
  return out;
}

KMeansParams coreset_defaults() { return KMeansParams{1, 15, 1e-3}; }

RetentiveSubset coreset_sample(const Eigen::Ref<const Matrix>& x, double rate, RngSeed seed,
                               const KMeansParams& params) {
  check_rate(rate, "coreset_sample");
  const Index n = x.rows();
  if (n < 1) throw std::invalid_argument("coreset_sample: empty input");
  const auto k = static_cast<Index>(std::min(scaled_ceil(n, rate), static_cast<std::size_t>(n)));

  RetentiveSubset out;
  out.method = "coreset";
  out.retention_rate = rate;
  out.seed = seed;

  if (k == n) {  // full retention: every row is its own center
    out.indices.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) out.indices[static_cast<std::size_t>(i)] = i;
    out.weights = Vector::Ones(n);
    return out;
  }

  const KMeansResult km = kmeans(x, static_cast<int>(k), params, seed);
  std::vector<Index> cluster_size(static_cast<std::size_t>(k), 0);
  for (const int label : km.assignments) ++cluster_size[static_cast<std::size_t>(label)];

  // snap each centroid to its nearest data row (ties to the lowest row)
  const Vector row_norms = x.rowwise().squaredNorm();
  const Vector centroid_norms = km.centroids.rowwise().squaredNorm();
  const Matrix cross = x * km.centroids.transpose();  // n x k
  std::map<Index, double> pooled;
  for (Index c = 0; c < k; ++c) {
    Index best_row = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      const double d = row_norms(i) + centroid_norms(c) - 2.0 * cross(i, c);
      if (d < best_d) {
        best_d = d;
        best_row = i;
      }
    }
    pooled[best_row] += static_cast<double>(cluster_size[static_cast<std::size_t>(c)]);
  }

  Vector weights(static_cast<Index>(pooled.size()));
  Index at = 0;
  for (const auto& [row, weight] : pooled) {
    out.indices.push_back(row);
    weights(at++) = weight;
  }
  out.weights = std::move(weights);
  return out;
}

RetentiveSubset draw_sample(const SampleSpec& spec, const Eigen::Ref<const Matrix>& x,
                            RngSeed seed) {
  if (spec.method == "srs") return srs_sample(x.rows(), spec.rate, seed);
  if (spec.method == "leverage") {
    return leverage_sample(x, spec.leverage_rank, spec.rate, seed);
  }
  if (spec.method == "coreset") return coreset_sample(x, spec.rate, seed, spec.coreset_kmeans);

  for (const SelectorKind kind :
       {SelectorKind::random, SelectorKind::a_optimal, SelectorKind::d_optimal,
        SelectorKind::g_optimal, SelectorKind::uncertainty}) {
    if (spec.method == pcaqs_method_tag(kind)) {
      return pcaqs_sample(x, spec.rank, spec.num_groups, spec.rate,
                          SelectorCriterion{kind, spec.ridge_eps}, seed);
    }
  }
  throw std::invalid_argument(
      "draw_sample: unknown method '" + spec.method +
      "' (expected pcaqs-random, pcaqs-aopt, pcaqs-dopt, pcaqs-gopt, pcaqs-uncert, "
      "srs, leverage, or coreset)");
}

}  // namespace pcaqs
