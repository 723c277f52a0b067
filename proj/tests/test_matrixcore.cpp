#include "doctest.h"

#include "pcaqs/matrixcore.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

using namespace pcaqs;

namespace {

Matrix random_matrix(Index rows, Index cols, RngSeed seed) {
  Rng rng = make_rng(seed);
  return gaussian_matrix(rows, cols, rng);
}

// exact singular values via the dense symmetric eigensolve of X^T X
Vector singular_values_oracle(const Matrix& x, Index rank) {
  const Eigen::MatrixXd gram = Eigen::MatrixXd(x.transpose() * x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  Vector out(rank);
  const Index p = gram.rows();
  for (Index j = 0; j < rank; ++j) {
    out(j) = std::sqrt(std::max(0.0, eig.eigenvalues()(p - 1 - j)));
  }
  return out;
}

}  // namespace

TEST_SUITE("matrixcore") {

TEST_CASE("standardize centers and scales a simple column") {
  Matrix x(3, 1);
  x << 1.0, 2.0, 3.0;
  const auto [z, params] = standardize(x);
  CHECK(z(0, 0) == doctest::Approx(-1.0));
  CHECK(z(1, 0) == doctest::Approx(0.0));
  CHECK(z(2, 0) == doctest::Approx(1.0));
  CHECK(params.means(0) == doctest::Approx(2.0));
  CHECK(params.stddevs(0) == doctest::Approx(1.0));
  CHECK(params.dropped_columns.empty());
}

TEST_CASE("standardize drops constant columns and records them") {
  Matrix x(4, 3);
  x << 1.0, 5.0, -2.0,
       2.0, 5.0, -1.0,
       3.0, 5.0,  0.0,
       4.0, 5.0,  1.0;
  const auto [z, params] = standardize(x);
  CHECK(z.cols() == 2);
  REQUIRE(params.dropped_columns.size() == 1);
  CHECK(params.dropped_columns[0] == 1);
  CHECK(params.retained_cols() == 2);
  CHECK(params.retained_columns() == std::vector<Index>{0, 2});
  // re-application reproduces the fitted standardization
  const Matrix again = params.apply(x);
  CHECK((again - z).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("standardize rejects all-constant and non-finite input") {
  Matrix constant = Matrix::Constant(5, 2, 3.0);
  CHECK_THROWS_WITH_AS(standardize(constant),
                       "standardize: degenerate input, every column is constant",
                       std::invalid_argument);
  Matrix bad = Matrix::Zero(3, 2);
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(standardize(bad), std::invalid_argument);
  CHECK_THROWS_AS(standardize(Matrix::Zero(1, 2)), std::invalid_argument);
}

TEST_CASE("standardized columns have mean zero and unit sample variance") {
  const Matrix x = random_matrix(200, 6, 11);
  const auto [z, params] = standardize(x);
  for (Index j = 0; j < z.cols(); ++j) {
    CHECK(std::abs(z.col(j).mean()) < 1e-12);
    const double var = z.col(j).squaredNorm() / static_cast<double>(z.rows() - 1);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("truncated svd of the identity") {
  const Matrix x = Matrix::Identity(5, 5);
  const Svd svd = truncated_svd(x, 3);
  for (Index j = 0; j < 3; ++j) CHECK(svd.s(j) == doctest::Approx(1.0));
  CHECK((svd.u.transpose() * svd.u - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("truncated svd of a diagonal matrix") {
  Matrix x = Matrix::Zero(4, 2);
  x(0, 0) = 3.0;
  x(1, 1) = 2.0;
  const Svd svd = truncated_svd(x, 2);
  CHECK(svd.s(0) == doctest::Approx(3.0));
  CHECK(svd.s(1) == doctest::Approx(2.0));
}

TEST_CASE("truncated svd matches the dense oracle on random matrices") {
  for (int trial = 0; trial < 20; ++trial) {
    const auto seed = static_cast<RngSeed>(100 + trial);
    Rng shape_rng = make_rng(seed);
    std::uniform_int_distribution<Index> rows_d(4, 40);
    std::uniform_int_distribution<Index> cols_d(2, 8);
    const Index rows = rows_d(shape_rng);
    const Index cols = cols_d(shape_rng);
    const Index rank = std::min<Index>(3, std::min(rows, cols));
    const Matrix x = random_matrix(rows, cols, seed * 7 + 1);

    const Svd svd = truncated_svd(x, rank, 10, 2, seed);
    const Vector oracle = singular_values_oracle(x, rank);
    for (Index j = 0; j < rank; ++j) {
      CHECK(svd.s(j) == doctest::Approx(oracle(j)).epsilon(1e-9));
    }
    // left/right vectors reproduce the matrix action on the top subspace
    const Matrix approx = svd.u * svd.s.asDiagonal() * svd.v.transpose();
    const Matrix residual = x - approx;
    // residual spectral mass is bounded by the discarded singular values
    const Vector full_oracle = singular_values_oracle(x, std::min(rows, cols));
    double tail = 0.0;
    for (Index j = rank; j < full_oracle.size(); ++j) tail += full_oracle(j) * full_oracle(j);
    CHECK(residual.squaredNorm() <= tail + 1e-6 * (1.0 + x.squaredNorm()));
  }
}

TEST_CASE("truncated svd is deterministic for a fixed seed") {
  const Matrix x = random_matrix(30, 6, 5);
  const Svd a = truncated_svd(x, 3, 10, 2, 77);
  const Svd b = truncated_svd(x, 3, 10, 2, 77);
  CHECK((a.u - b.u).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.s - b.s).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.v - b.v).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("truncated svd validates the rank") {
  const Matrix x = random_matrix(10, 4, 3);
  CHECK_THROWS_AS(truncated_svd(x, 0), std::invalid_argument);
  CHECK_THROWS_AS(truncated_svd(x, 5), std::invalid_argument);
}

TEST_CASE("fit_pca eigenvalues follow the n-1 convention") {
  const Matrix x = random_matrix(120, 5, 21);
  const PcaModel model = fit_pca(x, 5);
  // eigenvalues of the standardized covariance sum to the retained column count
  double total = 0.0;
  for (Index j = 0; j < 5; ++j) {
    total += model.singular_values(j) * model.singular_values(j) /
             static_cast<double>(model.fitted_rows - 1);
  }
  CHECK(total == doctest::Approx(5.0).epsilon(1e-8));
  CHECK(model.explained_variance_ratio.sum() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(model.rank() == 5);
}

TEST_CASE("transform projects standardized data onto the components") {
  const Matrix x = random_matrix(60, 4, 31);
  const PcaModel model = fit_pca(x, 2);
  const Matrix scores = transform(model, x);
  CHECK(scores.rows() == 60);
  CHECK(scores.cols() == 2);
  // score variance equals the component eigenvalue
  for (Index j = 0; j < 2; ++j) {
    const double var = (scores.col(j).array() - scores.col(j).mean()).square().sum() /
                       static_cast<double>(59);
    const double eig = model.singular_values(j) * model.singular_values(j) / 59.0;
    CHECK(var == doctest::Approx(eig).epsilon(1e-8));
  }
}

TEST_CASE("select_rank_by_variance picks the smallest covering rank") {
  Vector ratio(4);
  ratio << 0.5, 0.25, 0.15, 0.10;
  CHECK(select_rank_by_variance(ratio, 0.5) == 1);
  CHECK(select_rank_by_variance(ratio, 0.70) == 2);
  CHECK(select_rank_by_variance(ratio, 0.90) == 3);
  CHECK(select_rank_by_variance(ratio, 1.0) == 4);
  CHECK_THROWS_AS(select_rank_by_variance(Vector(), 0.5), std::invalid_argument);
}

TEST_CASE("fit_pca_to_variance stops at the threshold rank") {
  // one dominant direction: first column has much larger variance
  Rng rng = make_rng(9);
  Matrix x = gaussian_matrix(300, 6, rng);
  x.col(0) *= 30.0;
  const PcaModel model = fit_pca_to_variance(x, 0.70, /*standardize_input=*/false);
  const PcaModel full = fit_pca(x, 6, /*standardize_input=*/false);
  const Index expected = select_rank_by_variance(full.explained_variance_ratio, 0.70);
  CHECK(model.rank() == expected);
  double cum = model.explained_variance_ratio.sum();
  CHECK(cum >= 0.70 - 1e-9);
}

TEST_CASE("ols_fit recovers exact coefficients on noiseless data") {
  const Matrix x = random_matrix(50, 3, 17);
  Vector beta(3);
  beta << 2.0, -1.0, 0.5;
  const Vector y = x * beta + Vector::Constant(50, 4.0);
  const OlsFit fit = ols_fit(x, y);
  CHECK((fit.coefficients - beta).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(fit.intercept == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(fit.residual_mse < 1e-18);
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK(fit.ridge_used == 0.0);
  CHECK_FALSE(fit.degenerate);
}

TEST_CASE("ols_fit handles a constant response") {
  const Matrix x = random_matrix(20, 2, 23);
  const Vector y = Vector::Constant(20, 7.5);
  const OlsFit fit = ols_fit(x, y);
  CHECK(fit.degenerate);
  CHECK(fit.intercept == doctest::Approx(7.5));
  CHECK(fit.coefficients.cwiseAbs().maxCoeff() == 0.0);
  CHECK(fit.residual_mse == 0.0);
}

TEST_CASE("ols_fit falls back to a small ridge on rank-deficient designs") {
  Matrix x(30, 2);
  Rng rng = make_rng(41);
  x.col(0) = gaussian_matrix(30, 1, rng);
  x.col(1) = 2.0 * x.col(0);  // exact collinearity
  const Vector y = x.col(0);
  const OlsFit fit = ols_fit(x, y);
  CHECK(fit.ridge_used == doctest::Approx(1e-8));
  const Vector fitted = predict(fit, x);
  CHECK((fitted - y).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("prediction metrics on a holdout") {
  const Matrix x = random_matrix(80, 3, 51);
  Vector beta(3);
  beta << 1.0, 0.5, -2.0;
  Rng rng = make_rng(52);
  const Vector y = x * beta + 0.1 * gaussian_matrix(80, 1, rng).col(0);
  const OlsFit fit = ols_fit(x.topRows(60), y.head(60));
  const double mse = mean_squared_error(fit, x.bottomRows(20), y.tail(20));
  const double r2 = r_squared_on(fit, x.bottomRows(20), y.tail(20));
  CHECK(mse > 0.0);
  CHECK(mse < 0.1);
  CHECK(r2 > 0.9);
  CHECK(r2 <= 1.0);
}

}  // TEST_SUITE
