#include "pcaqs/matrixcore.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pcaqs {

namespace {

// A column whose sample sd vanishes relative to its magnitude is constant.
bool is_constant(double sd, double mean) {
  return sd <= 1e-12 * std::max(1.0, std::abs(mean));
}

Vector column_means(const Eigen::Ref<const Matrix>& x) {
  return x.colwise().mean().transpose();
}

Vector column_sds(const Eigen::Ref<const Matrix>& x, const Vector& means) {
  const Index n = x.rows();
  Vector sd(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    sd(j) = std::sqrt((x.col(j).array() - means(j)).square().sum() /
                      static_cast<double>(n - 1));
  }
  return sd;
}

std::vector<Index> constant_columns(const Vector& sd, const Vector& means) {
  std::vector<Index> dropped;
  for (Index j = 0; j < sd.size(); ++j) {
    if (is_constant(sd(j), means(j))) dropped.push_back(j);
  }
  return dropped;
}

// Thin orthonormal basis for the range of y.
Matrix thin_q(const Matrix& y) {
  Eigen::MatrixXd yc = y;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(yc);
  const Index k = std::min(y.rows(), y.cols());
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), k);
  return q;
}

PcaModel truncate_model(PcaModel model, Index k) {
  model.components = Matrix(model.components.leftCols(k));
  model.singular_values = model.singular_values.head(k).eval();
  model.explained_variance_ratio = model.explained_variance_ratio.head(k).eval();
  return model;
}

}  // namespace

std::vector<Index> ScalingParams::retained_columns() const {
  std::vector<Index> kept;
  kept.reserve(static_cast<std::size_t>(retained_cols()));
  std::size_t d = 0;
  for (Index j = 0; j < input_cols(); ++j) {
    if (d < dropped_columns.size() && dropped_columns[d] == j) {
      ++d;
    } else {
      kept.push_back(j);
    }
  }
  return kept;
}

Matrix ScalingParams::apply(const Eigen::Ref<const Matrix>& x) const {
  if (x.cols() != input_cols()) {
    throw std::invalid_argument("scaling: column count differs from the fitted input");
  }
  const auto kept = retained_columns();
  Matrix out(x.rows(), static_cast<Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    const Index j = kept[c];
    out.col(static_cast<Index>(c)) = (x.col(j).array() - means(j)) / stddevs(j);
  }
  return out;
}

std::pair<Matrix, ScalingParams> standardize(const Eigen::Ref<const Matrix>& x) {
  if (x.rows() < 2) throw std::invalid_argument("standardize: needs at least two rows");
  require_finite(x, "standardize: input");

  ScalingParams params;
  params.means = column_means(x);
  params.stddevs = column_sds(x, params.means);
  params.dropped_columns = constant_columns(params.stddevs, params.means);
  if (params.retained_cols() == 0) {
    throw std::invalid_argument("standardize: degenerate input, every column is constant");
  }
  return {params.apply(x), params};
}

Svd truncated_svd(const Eigen::Ref<const Matrix>& x, Index rank, Index oversample,
                  int power_iterations, RngSeed seed) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (n < 1 || p < 1) throw std::invalid_argument("truncated_svd: empty input");
  if (rank < 1 || rank > std::min(n, p)) {
    throw std::invalid_argument("truncated_svd: rank must lie in [1, min(rows, cols)]");
  }
  if (oversample < 0) throw std::invalid_argument("truncated_svd: negative oversample");
  if (power_iterations < 0) {
    throw std::invalid_argument("truncated_svd: negative power iteration count");
  }
  require_finite(x, "truncated_svd: input");

  const Index l = std::min(rank + oversample, std::min(n, p));
  Rng rng = make_rng(seed);
  Matrix omega = gaussian_matrix(p, l, rng);

  Matrix q = thin_q(x * omega);
  for (int it = 0; it < power_iterations; ++it) {
    Matrix z = thin_q(x.transpose() * q);
    q = thin_q(x * z);
  }

  Eigen::MatrixXd panel = q.transpose() * x;  // l x p
  Eigen::BDCSVD<Eigen::MatrixXd> svd(panel, Eigen::ComputeThinU | Eigen::ComputeThinV);

  Svd out;
  out.u = (q * svd.matrixU()).leftCols(rank);
  out.s = svd.singularValues().head(rank);
  out.v = svd.matrixV().leftCols(rank);
  return out;
}

namespace {

struct PreparedInput {
  Matrix centered;  // retained columns, centered (and scaled when standardizing)
  ScalingParams params;
  double total_variance = 0.0;
};

PreparedInput prepare_pca_input(const Eigen::Ref<const Matrix>& x, bool standardize_input) {
  if (x.rows() < 2) throw std::invalid_argument("fit_pca: needs at least two rows");
  require_finite(x, "fit_pca: input");

  PreparedInput prep;
  if (standardize_input) {
    auto [xs, params] = standardize(x);
    prep.centered = std::move(xs);
    prep.params = std::move(params);
    prep.total_variance = static_cast<double>(prep.params.retained_cols());
    return prep;
  }

  ScalingParams params;
  params.means = column_means(x);
  const Vector sd = column_sds(x, params.means);
  params.dropped_columns = constant_columns(sd, params.means);
  params.stddevs = Vector::Ones(x.cols());
  for (Index j : params.dropped_columns) params.stddevs(j) = 0.0;
  if (params.retained_cols() == 0) {
    throw std::invalid_argument("fit_pca: degenerate input, every column is constant");
  }
  prep.centered = params.apply(x);
  prep.params = std::move(params);
  for (Index j = 0; j < sd.size(); ++j) prep.total_variance += sd(j) * sd(j);
  return prep;
}

PcaModel fit_prepared(const PreparedInput& prep, Index rank, bool standardized,
                      RngSeed seed) {
  const Index n = prep.centered.rows();
  const Index max_rank = std::min(n, prep.centered.cols());
  if (rank < 1 || rank > max_rank) {
    throw std::invalid_argument(
        "fit_pca: rank must lie in [1, min(rows, retained columns)]");
  }
  Svd svd = truncated_svd(prep.centered, rank, 10, 2, seed);

  PcaModel model;
  model.scaling = prep.params;
  model.standardized = standardized;
  model.components = std::move(svd.v);
  model.singular_values = std::move(svd.s);
  Vector lambda = model.singular_values.array().square() / static_cast<double>(n - 1);
  model.explained_variance_ratio =
      (lambda / prep.total_variance).cwiseMin(1.0).cwiseMax(0.0);
  model.fitted_rows = n;
  return model;
}

}  // namespace

PcaModel fit_pca(const Eigen::Ref<const Matrix>& x, Index rank, bool standardize_input,
                 RngSeed seed) {
  return fit_prepared(prepare_pca_input(x, standardize_input), rank, standardize_input,
                      seed);
}

PcaModel fit_pca_to_variance(const Eigen::Ref<const Matrix>& x, double threshold,
                             bool standardize_input, RngSeed seed) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("fit_pca_to_variance: threshold must lie in (0, 1]");
  }
  PreparedInput prep = prepare_pca_input(x, standardize_input);
  const Index max_rank = std::min(prep.centered.rows(), prep.centered.cols());

  Index rank = std::min<Index>(32, max_rank);
  for (;;) {
    PcaModel model = fit_prepared(prep, rank, standardize_input, seed);
    const double covered = model.explained_variance_ratio.sum();
    if (covered >= threshold - 1e-12 || rank == max_rank) {
      const Index k = select_rank_by_variance(model.explained_variance_ratio, threshold);
      return truncate_model(std::move(model), k);
    }
    rank = std::min(rank * 2, max_rank);
  }
}

Matrix transform(const PcaModel& model, const Eigen::Ref<const Matrix>& x) {
  if (x.cols() != model.scaling.input_cols()) {
    throw std::invalid_argument("transform: column count differs from the fitted input");
  }
  require_finite(x, "transform: input");
  return model.scaling.apply(x) * model.components;
}

Index select_rank_by_variance(const Eigen::Ref<const Vector>& explained_variance_ratio,
                              double threshold) {
  if (explained_variance_ratio.size() == 0) {
    throw std::invalid_argument("select_rank_by_variance: empty ratio vector");
  }
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("select_rank_by_variance: threshold must lie in (0, 1]");
  }
  double cum = 0.0;
  for (Index i = 0; i < explained_variance_ratio.size(); ++i) {
    cum += explained_variance_ratio(i);
    if (cum >= threshold - 1e-12) return i + 1;
  }
  return explained_variance_ratio.size();
}

OlsFit ols_fit(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
               double ridge) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (y.size() != n) throw std::invalid_argument("ols_fit: row count mismatch");
  if (n < 1) throw std::invalid_argument("ols_fit: empty input");
  if (ridge < 0.0) throw std::invalid_argument("ols_fit: negative ridge");
  require_finite(x, "ols_fit: design");
  require_finite(y, "ols_fit: response");

  OlsFit fit;
  const Vector xmean = column_means(x);
  const double ymean = y.mean();
  const Vector yc = y.array() - ymean;
  const double sst = yc.squaredNorm();
  const double ysd = n > 1 ? std::sqrt(sst / static_cast<double>(n - 1)) : 0.0;

  if (is_constant(ysd, ymean)) {
    fit.coefficients = Vector::Zero(p);
    fit.intercept = ymean;
    fit.ridge_used = ridge;
    fit.residual_mse = 0.0;
    fit.r_squared = 0.0;
    fit.degenerate = true;
    return fit;
  }

  Eigen::MatrixXd xc = x.rowwise() - xmean.transpose();
  Vector beta = Vector::Zero(p);
  double used = ridge;
  if (p > 0) {
    bool solved = false;
    if (ridge == 0.0) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xc);
      if (qr.rank() == p) {
        beta = qr.solve(yc);
        solved = true;
      } else {
        used = 1e-8;
      }
    }
    if (!solved) {
      Eigen::MatrixXd gram = xc.transpose() * xc;
      gram.diagonal().array() += used;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
      if (ldlt.info() != Eigen::Success) {
        throw std::runtime_error("ols_fit: normal equations are not solvable");
      }
      beta = ldlt.solve(xc.transpose() * yc);
    }
  }

  fit.coefficients = beta;
  fit.intercept = ymean - xmean.dot(beta);
  fit.ridge_used = used;
  const Vector resid = yc - xc * beta;
  fit.residual_mse = resid.squaredNorm() / static_cast<double>(n);
  fit.r_squared = std::clamp(1.0 - resid.squaredNorm() / sst, 0.0, 1.0);
  return fit;
}

Vector predict(const OlsFit& fit, const Eigen::Ref<const Matrix>& x) {
  if (x.cols() != fit.coefficients.size()) {
    throw std::invalid_argument("predict: column count differs from the fitted design");
  }
  return (x * fit.coefficients).array() + fit.intercept;
}

double mean_squared_error(const OlsFit& fit, const Eigen::Ref<const Matrix>& x,
                          const Eigen::Ref<const Vector>& y) {
  if (y.size() != x.rows()) throw std::invalid_argument("mean_squared_error: row mismatch");
  if (x.rows() == 0) throw std::invalid_argument("mean_squared_error: empty input");
  return (predict(fit, x) - y).squaredNorm() / static_cast<double>(x.rows());
}

double r_squared_on(const OlsFit& fit, const Eigen::Ref<const Matrix>& x,
                    const Eigen::Ref<const Vector>& y) {
  if (y.size() != x.rows()) throw std::invalid_argument("r_squared_on: row mismatch");
  if (x.rows() == 0) throw std::invalid_argument("r_squared_on: empty input");
  const double sst = (y.array() - y.mean()).square().sum();
  if (sst <= 0.0) return 0.0;
  const double sse = (predict(fit, x) - y).squaredNorm();
  return 1.0 - sse / sst;
}

}  // namespace pcaqs
