#include "pcaqs/metrics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcaqs {

namespace {

void check_pair_inputs(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b,
                       const char* who) {
  if (a.rows() < 1 || b.rows() < 1) {
    throw std::invalid_argument(std::string(who) + ": empty input");
  }
  if (a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(who) + ": column count mismatch (" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.cols()) +
                                ")");
  }
  require_finite(a, (std::string(who) + ": first input").c_str());
  require_finite(b, (std::string(who) + ": second input").c_str());
}

// Mean of f(squared distance) over row pairs of x and y: every pair when the
// count fits under the cap, `pair_cap` seeded uniform pairs otherwise.  The
// exact path runs identical arithmetic for (x, x) and for (x, y) with y == x,
// which keeps self-comparisons exactly balanced.
template <typename F>
double pair_mean(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y,
                 std::size_t pair_cap, RngSeed seed, F&& f) {
  const Index nx = x.rows();
  const Index ny = y.rows();
  const auto pair_count = static_cast<std::uint64_t>(nx) * static_cast<std::uint64_t>(ny);
  const Vector xn = x.rowwise().squaredNorm();
  const Vector yn = y.rowwise().squaredNorm();

  double sum = 0.0;
  if (pair_cap == 0 || pair_count <= pair_cap) {
    constexpr Index kBlock = 256;
    Matrix cross;
    for (Index start = 0; start < nx; start += kBlock) {
      const Index width = std::min<Index>(kBlock, nx - start);
      cross.noalias() = x.middleRows(start, width) * y.transpose();
      for (Index r = 0; r < width; ++r) {
        for (Index j = 0; j < ny; ++j) {
          sum += f(std::max(0.0, xn(start + r) + yn(j) - 2.0 * cross(r, j)));
        }
      }
    }
    return sum / static_cast<double>(pair_count);
  }

  Rng rng = make_rng(seed);
  std::uniform_int_distribution<Index> pick_x(0, nx - 1);
  std::uniform_int_distribution<Index> pick_y(0, ny - 1);
  for (std::size_t d = 0; d < pair_cap; ++d) {
    const Index i = pick_x(rng);
    const Index j = pick_y(rng);
    const double d2 = xn(i) + yn(j) - 2.0 * x.row(i).dot(y.row(j));
    sum += f(std::max(0.0, d2));
  }
  return sum / static_cast<double>(pair_cap);
}

double euclid(double d2) { return std::sqrt(d2); }

Vector column_means_of(const Eigen::Ref<const Matrix>& x) {
  return x.colwise().mean().transpose();
}

Matrix sample_covariance(const Eigen::Ref<const Matrix>& x) {
  const Vector mu = column_means_of(x);
  const Matrix centered = x.rowwise() - mu.transpose();
  return (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
}

}  // namespace

double energy_distance(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b,
                       std::size_t pair_cap, RngSeed seed) {
  check_pair_inputs(a, b, "energy_distance");
  const double cross = pair_mean(a, b, pair_cap, derive_seed(seed, "cross"), euclid);
  const double within_a = pair_mean(a, a, pair_cap, derive_seed(seed, "within_a"), euclid);
  const double within_b = pair_mean(b, b, pair_cap, derive_seed(seed, "within_b"), euclid);
  return std::max(0.0, 2.0 * cross - within_a - within_b);
}

double mahalanobis_mean_distance(const Eigen::Ref<const Matrix>& a,
                                 const Eigen::Ref<const Matrix>& b, double ridge,
                                 double* ridge_used) {
  check_pair_inputs(a, b, "mahalanobis_mean_distance");
  if (b.rows() < 2) {
    throw std::invalid_argument(
        "mahalanobis_mean_distance: reference set needs at least two rows");
  }
  if (ridge < 0.0) {
    throw std::invalid_argument("mahalanobis_mean_distance: ridge must be nonnegative");
  }

  const Vector diff = column_means_of(a) - column_means_of(b);
  if (ridge_used != nullptr) *ridge_used = ridge;
  const double diff_norm = diff.norm();
  if (diff_norm == 0.0) return 0.0;

  const Matrix cov = sample_covariance(b);

  auto try_solve = [&](double r, double& out) {
    Matrix m = cov;
    m.diagonal().array() += r;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
    if (ldlt.info() != Eigen::Success) return false;
    const Vector sol = ldlt.solve(diff);
    if ((m * sol - diff).norm() > 1e-6 * diff_norm) return false;
    out = diff.dot(sol);
    return true;
  };

  double quad = 0.0;
  if (!try_solve(ridge, quad)) {
    if (ridge > 0.0) {
      throw std::runtime_error(
          "mahalanobis_mean_distance: covariance is singular even with ridge " +
          std::to_string(ridge));
    }
    const double fallback = 1e-8;
    if (!try_solve(fallback, quad)) {
      throw std::runtime_error(
          "mahalanobis_mean_distance: covariance is singular even with ridge " +
          std::to_string(fallback));
    }
    if (ridge_used != nullptr) *ridge_used = fallback;
  }
  return std::sqrt(std::max(0.0, quad));
}

double kl_divergence_gaussian(const Eigen::Ref<const Matrix>& a,
                              const Eigen::Ref<const Matrix>& b, Index rank, double ridge) {
  check_pair_inputs(a, b, "kl_divergence_gaussian");
  if (rank < 1) throw std::invalid_argument("kl_divergence_gaussian: rank must be positive");
  if (ridge < 0.0) {
    throw std::invalid_argument("kl_divergence_gaussian: ridge must be nonnegative");
  }
  const Index k = std::min(rank, b.cols());
  if (a.rows() <= k || b.rows() <= k) {
    throw std::invalid_argument(
        "kl_divergence_gaussian: each set needs more rows than the projection rank " +
        std::to_string(k));
  }

  // principal axes of the reference set, by exact symmetric eigensolve
  const Matrix cov_b_full = sample_covariance(b);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_b_full);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("kl_divergence_gaussian: eigensolve failed");
  }
  const Index p = b.cols();
  Matrix axes(p, k);
  for (Index j = 0; j < k; ++j) {
    axes.col(j) = eig.eigenvectors().col(p - 1 - j);  // descending variance order
  }

  const Matrix za = a * axes;
  const Matrix zb = b * axes;

  Matrix cov_a = sample_covariance(za);
  Matrix cov_b = sample_covariance(zb);
  cov_a.diagonal().array() += ridge;
  cov_b.diagonal().array() += ridge;

  Eigen::LLT<Eigen::MatrixXd> llt_a(cov_a);
  Eigen::LLT<Eigen::MatrixXd> llt_b(cov_b);
  if (llt_a.info() != Eigen::Success || llt_b.info() != Eigen::Success) {
    throw std::runtime_error(
        "kl_divergence_gaussian: projected covariance is not positive definite");
  }

  auto log_det = [](const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  };

  const Vector mean_gap = column_means_of(zb) - column_means_of(za);
  const double trace_term = llt_b.solve(cov_a).trace();
  const double quad_term = mean_gap.dot(llt_b.solve(mean_gap));
  const double kl = 0.5 * (trace_term + quad_term - static_cast<double>(k) +
                           log_det(llt_b) - log_det(llt_a));
  return std::max(0.0, kl);
}

double mmd_rbf(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b,
               std::optional<double> bandwidth, std::size_t pair_cap, RngSeed seed,
               double* bandwidth_used) {
  check_pair_inputs(a, b, "mmd_rbf");

  double h = 0.0;
  if (bandwidth.has_value()) {
    if (!(*bandwidth > 0.0)) {
      throw std::invalid_argument("mmd_rbf: bandwidth must be positive");
    }
    h = *bandwidth;
  } else {
    // median pairwise distance over a pooled subsample sized so that its pair
    // count roughly matches the configured cap
    const Index pool = a.rows() + b.rows();
    const auto want = static_cast<Index>(std::ceil(
        std::sqrt(2.0 * static_cast<double>(std::max<std::size_t>(pair_cap, 2)))));
    IndexList rows;
    if (pool <= want) {
      rows.resize(static_cast<std::size_t>(pool));
      for (Index i = 0; i < pool; ++i) rows[static_cast<std::size_t>(i)] = i;
    } else {
      Rng rng = make_rng(derive_seed(seed, "bandwidth"));
      rows = sample_without_replacement(pool, static_cast<std::size_t>(want), rng);
      std::sort(rows.begin(), rows.end());
    }
    Matrix pooled(static_cast<Index>(rows.size()), a.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const Index id = rows[r];
      pooled.row(static_cast<Index>(r)) =
          id < a.rows() ? a.row(id) : b.row(id - a.rows());
    }
    std::vector<double> dists;
    dists.reserve(rows.size() * (rows.size() - 1) / 2);
    for (Index i = 0; i < pooled.rows(); ++i) {
      for (Index j = i + 1; j < pooled.rows(); ++j) {
        dists.push_back((pooled.row(i) - pooled.row(j)).norm());
      }
    }
    if (dists.empty()) {
      throw std::runtime_error("mmd_rbf: too few rows for the bandwidth heuristic");
    }
    const std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid),
                     dists.end());
    h = dists[mid];
    if (dists.size() % 2 == 0) {
      const double lower =
          *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
      h = 0.5 * (lower + h);
    }
    if (!(h > 0.0)) {
      throw std::runtime_error("mmd_rbf: degenerate bandwidth (zero median distance)");
    }
  }
  if (bandwidth_used != nullptr) *bandwidth_used = h;

  const double inv_two_h2 = 1.0 / (2.0 * h * h);
  auto kernel = [inv_two_h2](double d2) { return std::exp(-d2 * inv_two_h2); };
  const double cross = pair_mean(a, b, pair_cap, derive_seed(seed, "cross"), kernel);
  const double within_a = pair_mean(a, a, pair_cap, derive_seed(seed, "within_a"), kernel);
  const double within_b = pair_mean(b, b, pair_cap, derive_seed(seed, "within_b"), kernel);
  return std::max(0.0, within_a + within_b - 2.0 * cross);
}

double relative_mse(double mse_subset, double mse_full) {
  if (!(mse_full > 0.0)) {
    throw std::invalid_argument("relative_mse: full-data MSE must be positive");
  }
  if (mse_subset < 0.0) {
    throw std::invalid_argument("relative_mse: subset MSE must be nonnegative");
  }
  return mse_subset / mse_full;
}

SimilarityReport compute_similarity(const Eigen::Ref<const Matrix>& subset,
                                    const Eigen::Ref<const Matrix>& source,
                                    const MetricParams& params) {
  SimilarityReport report;
  report.pair_cap = params.pair_cap;
  report.kl_rank = std::min(params.kl_rank, source.cols());
  report.kl_ridge = params.ridge;
  report.seed = params.seed;

  report.energy =
      energy_distance(subset, source, params.pair_cap, derive_seed(params.seed, "energy"));
  report.mahalanobis =
      mahalanobis_mean_distance(subset, source, params.ridge, &report.mahalanobis_ridge);
  report.kl = kl_divergence_gaussian(subset, source, report.kl_rank, params.ridge);
  report.mmd = mmd_rbf(subset, source, params.bandwidth, params.pair_cap,
                       derive_seed(params.seed, "mmd"), &report.bandwidth);
  return report;
}

}  // namespace pcaqs
