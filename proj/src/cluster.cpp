#include "pcaqs/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pcaqs {

namespace {

Vector row_squared_norms(const Eigen::Ref<const Matrix>& x) {
  return x.rowwise().squaredNorm();
}

// Nearest-centroid pass, blocked so the cross products run as GEMM.  Writes
// the best centroid id and the (clamped) squared distance for every row.
void nearest_pass(const Eigen::Ref<const Matrix>& x, const Vector& row_norms,
                  const Matrix& centroids, std::vector<int>& labels, Vector& dists) {
  const Index n = x.rows();
  const Index k = centroids.rows();
  const Vector centroid_norms = centroids.rowwise().squaredNorm();
  labels.resize(static_cast<std::size_t>(n));
  dists.resize(n);

  constexpr Index kBlock = 1024;
  Matrix cross;
  for (Index start = 0; start < n; start += kBlock) {
    const Index width = std::min<Index>(kBlock, n - start);
    cross.noalias() = x.middleRows(start, width) * centroids.transpose();
    for (Index r = 0; r < width; ++r) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Index c = 0; c < k; ++c) {
        const double d = row_norms(start + r) + centroid_norms(c) - 2.0 * cross(r, c);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      labels[static_cast<std::size_t>(start + r)] = best;
      dists(start + r) = std::max(0.0, best_d);
    }
  }
}

Matrix plusplus_init(const Eigen::Ref<const Matrix>& x, const Vector& row_norms, int k,
                     Rng& rng) {
  const Index n = x.rows();
  Matrix centroids(k, x.cols());

  std::uniform_int_distribution<Index> pick_row(0, n - 1);
  const Index first = pick_row(rng);
  centroids.row(0) = x.row(first);

  Vector d2 = (row_norms.array() - 2.0 * (x * x.row(first).transpose()).array() +
               row_norms(first))
                  .max(0.0);
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> unit(0.0, total);
      const double target = unit(rng);
      double cum = 0.0;
      chosen = n - 1;
      for (Index i = 0; i < n; ++i) {
        cum += d2(i);
        if (cum >= target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick_row(rng);  // all remaining distances are zero (duplicate rows)
    }
    centroids.row(c) = x.row(chosen);
    const Vector cand = (row_norms.array() -
                         2.0 * (x * x.row(chosen).transpose()).array() + row_norms(chosen))
                            .max(0.0);
    d2 = d2.cwiseMin(cand);
  }
  return centroids;
}

struct StartResult {
  Matrix centroids;
  std::vector<int> labels;
  Vector dists;
  double inertia = 0.0;
  int iterations = 0;
};

StartResult run_start(const Eigen::Ref<const Matrix>& x, const Vector& row_norms, int k,
                      const KMeansParams& params, double scale, RngSeed start_seed) {
  const Index n = x.rows();
  const Index p = x.cols();
  Rng rng = make_rng(start_seed);

  StartResult out;
  out.centroids = plusplus_init(x, row_norms, k, rng);

  Matrix sums(k, p);
  std::vector<Index> counts(static_cast<std::size_t>(k));
  const double shift_cap = params.tol * scale;

  for (int iter = 1; iter <= params.max_iter; ++iter) {
    out.iterations = iter;
    nearest_pass(x, row_norms, out.centroids, out.labels, out.dists);

    std::fill(counts.begin(), counts.end(), Index{0});
    for (Index i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(out.labels[i])];

    // A cluster that lost every member grabs the row currently worst served;
    // zeroing that row's distance keeps later empties from taking it again.
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Index farthest = 0;
      double best = -1.0;
      for (Index i = 0; i < n; ++i) {
        if (out.dists(i) > best) {
          best = out.dists(i);
          farthest = i;
        }
      }
      const int old = out.labels[static_cast<std::size_t>(farthest)];
      --counts[static_cast<std::size_t>(old)];
      ++counts[static_cast<std::size_t>(c)];
      out.labels[static_cast<std::size_t>(farthest)] = c;
      out.dists(farthest) = 0.0;
    }

    sums.setZero();
    for (Index i = 0; i < n; ++i) {
      sums.row(out.labels[static_cast<std::size_t>(i)]) += x.row(i);
    }
    double max_shift = 0.0;
    for (int c = 0; c < k; ++c) {
      const Vector fresh = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      max_shift = std::max(max_shift, (fresh.transpose() - out.centroids.row(c)).norm());
      out.centroids.row(c) = fresh;
    }
    if (max_shift <= shift_cap) break;
  }

  nearest_pass(x, row_norms, out.centroids, out.labels, out.dists);
  out.inertia = out.dists.sum();
  return out;
}

}  // namespace

KMeansResult kmeans(const Eigen::Ref<const Matrix>& x, int k, const KMeansParams& params,
                    RngSeed seed) {
  const Index n = x.rows();
  if (n < 1) throw std::invalid_argument("kmeans: empty input");
  if (k < 1) throw std::invalid_argument("kmeans: cluster count must be positive");
  if (k > n) {
    throw std::invalid_argument("kmeans: more clusters (" + std::to_string(k) +
                                ") than rows (" + std::to_string(n) + ")");
  }
  if (params.num_starts < 1 || params.max_iter < 1 || !(params.tol >= 0.0)) {
    throw std::invalid_argument("kmeans: bad parameters");
  }
  require_finite(x, "kmeans: input");

  const Vector row_norms = row_squared_norms(x);
  double scale = std::sqrt(row_norms.sum() / static_cast<double>(n));
  if (scale <= 0.0) scale = 1.0;

  StartResult best;
  int best_start = -1;
  for (int s = 0; s < params.num_starts; ++s) {
    const RngSeed start_seed = derive_seed(seed, "kmeans:" + std::to_string(s));
    StartResult trial = run_start(x, row_norms, k, params, scale, start_seed);
    if (best_start < 0 || trial.inertia < best.inertia) {
      best = std::move(trial);
      best_start = s;
    }
  }

  KMeansResult result;
  result.centroids = std::move(best.centroids);
  result.assignments = std::move(best.labels);
  result.inertia = best.inertia;
  result.iterations = best.iterations;
  result.starts_run = params.num_starts;
  return result;
}

std::vector<int> assign_nearest(const Eigen::Ref<const Matrix>& centroids,
                                const Eigen::Ref<const Matrix>& x) {
  if (centroids.rows() < 1) throw std::invalid_argument("assign_nearest: no centroids");
  if (centroids.cols() != x.cols()) {
    throw std::invalid_argument("assign_nearest: column count mismatch");
  }
  const Vector row_norms = row_squared_norms(x);
  std::vector<int> labels;
  Vector dists;
  nearest_pass(x, row_norms, centroids, labels, dists);
  return labels;
}

double silhouette(const Eigen::Ref<const Matrix>& x, const std::vector<int>& assignments,
                  Index sample_cap, RngSeed seed) {
  const Index n = x.rows();
  if (static_cast<std::size_t>(n) != assignments.size()) {
    throw std::invalid_argument("silhouette: label count does not match rows");
  }
  if (n < 2) throw std::invalid_argument("silhouette: needs at least two rows");

  int num_clusters = 0;
  for (const int label : assignments) {
    if (label < 0) throw std::invalid_argument("silhouette: negative cluster label");
    num_clusters = std::max(num_clusters, label + 1);
  }
  std::vector<Index> cluster_count(static_cast<std::size_t>(num_clusters), 0);
  for (const int label : assignments) ++cluster_count[static_cast<std::size_t>(label)];
  const auto nonempty = std::count_if(cluster_count.begin(), cluster_count.end(),
                                      [](Index c) { return c > 0; });
  if (nonempty < 2) {
    throw std::invalid_argument("silhouette: needs at least two nonempty clusters");
  }

  IndexList sampled;
  if (sample_cap > 0 && n > sample_cap) {
    Rng rng = make_rng(seed);
    sampled = sample_without_replacement(n, static_cast<std::size_t>(sample_cap), rng);
    std::sort(sampled.begin(), sampled.end());
  } else {
    sampled.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) sampled[static_cast<std::size_t>(i)] = i;
  }

  const Vector row_norms = row_squared_norms(x);
  const auto m = static_cast<Index>(sampled.size());
  std::vector<double> cluster_sum(static_cast<std::size_t>(num_clusters));

  double total = 0.0;
  constexpr Index kBlock = 256;
  Matrix block_rows;
  Matrix cross;
  for (Index start = 0; start < m; start += kBlock) {
    const Index width = std::min<Index>(kBlock, m - start);
    block_rows.resize(width, x.cols());
    for (Index t = 0; t < width; ++t) {
      block_rows.row(t) = x.row(sampled[static_cast<std::size_t>(start + t)]);
    }
    cross.noalias() = x * block_rows.transpose();  // n x width

    for (Index t = 0; t < width; ++t) {
      const Index i = sampled[static_cast<std::size_t>(start + t)];
      const int own = assignments[static_cast<std::size_t>(i)];
      if (cluster_count[static_cast<std::size_t>(own)] <= 1) continue;  // singleton scores 0

      std::fill(cluster_sum.begin(), cluster_sum.end(), 0.0);
      for (Index j = 0; j < n; ++j) {
        const double d2 = row_norms(j) + row_norms(i) - 2.0 * cross(j, t);
        cluster_sum[static_cast<std::size_t>(assignments[static_cast<std::size_t>(j)])] +=
            std::sqrt(std::max(0.0, d2));
      }

      const double a = cluster_sum[static_cast<std::size_t>(own)] /
                       static_cast<double>(cluster_count[static_cast<std::size_t>(own)] - 1);
      double b = std::numeric_limits<double>::infinity();
      for (int c = 0; c < num_clusters; ++c) {
        if (c == own || cluster_count[static_cast<std::size_t>(c)] == 0) continue;
        b = std::min(b, cluster_sum[static_cast<std::size_t>(c)] /
                            static_cast<double>(cluster_count[static_cast<std::size_t>(c)]));
      }
      const double denom = std::max(a, b);
      if (denom > 0.0) total += (b - a) / denom;
    }
  }
  return total / static_cast<double>(m);
}

}  // namespace pcaqs
