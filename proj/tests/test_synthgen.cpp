#include "doctest.h"

#include "pcaqs/synthgen.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace pcaqs;

TEST_SUITE("synthgen") {

TEST_CASE("gaussian mixture has the declared shapes and metadata") {
  const SyntheticDataset data = gaussian_mixture(500, 8, 4, 5.0, 1.0, 11);
  CHECK(data.x.rows() == 500);
  CHECK(data.x.cols() == 8);
  CHECK(data.y.size() == 500);
  CHECK(data.beta.size() == 8);
  CHECK(data.generator == "mixture");
  REQUIRE(data.component_labels.has_value());
  CHECK(data.component_labels->size() == 500);
  for (int label : *data.component_labels) {
    CHECK(label >= 0);
    CHECK(label < 4);
  }
  CHECK(data.params.at("components") == 4.0);
  CHECK(data.params.at("mean_scale") == 5.0);
  CHECK(data.params.at("noise_sigma") == 1.0);
  CHECK(data.params.at("seed") == 11.0);
}

TEST_CASE("gaussian mixture is reproducible and seed-sensitive") {
  const SyntheticDataset a = gaussian_mixture(100, 5, 3, 5.0, 1.0, 7);
  const SyntheticDataset b = gaussian_mixture(100, 5, 3, 5.0, 1.0, 7);
  const SyntheticDataset c = gaussian_mixture(100, 5, 3, 5.0, 1.0, 8);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.y - b.y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.beta - b.beta).cwiseAbs().maxCoeff() == 0.0);
  CHECK(*a.component_labels == *b.component_labels);
  CHECK((a.x - c.x).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("growing the mixture keeps the earlier rows and the coefficients") {
  // substreams isolate the row count from beta and the component geometry
  const SyntheticDataset small = gaussian_mixture(100, 5, 3, 5.0, 1.0, 13);
  const SyntheticDataset large = gaussian_mixture(250, 5, 3, 5.0, 1.0, 13);
  CHECK((large.beta - small.beta).cwiseAbs().maxCoeff() == 0.0);
  CHECK((large.x.topRows(100) - small.x).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK((*large.component_labels)[i] == (*small.component_labels)[i]);
  }
}

TEST_CASE("mixture responses are the linear model plus noise") {
  const SyntheticDataset data = gaussian_mixture(20000, 6, 3, 5.0, 0.7, 17);
  const Vector resid = data.y - data.x * data.beta;
  const double mean = resid.mean();
  const double sd = std::sqrt((resid.array() - mean).square().sum() / (resid.size() - 1.0));
  CHECK(std::abs(mean) < 0.02);
  CHECK(sd == doctest::Approx(0.7).epsilon(0.05));
}

TEST_CASE("mixture components have roughly unit within-component spread") {
  const SyntheticDataset data = gaussian_mixture(30000, 4, 3, 8.0, 1.0, 19);
  const auto& labels = *data.component_labels;
  for (int c = 0; c < 3; ++c) {
    std::vector<Index> rows;
    for (Index i = 0; i < data.x.rows(); ++i) {
      if (labels[static_cast<std::size_t>(i)] == c) rows.push_back(i);
    }
    if (rows.size() < 500) continue;  // tiny mixing weight: skip
    for (Index j = 0; j < 4; ++j) {
      double m = 0.0;
      for (Index r : rows) m += data.x(r, j);
      m /= static_cast<double>(rows.size());
      double var = 0.0;
      for (Index r : rows) var += (data.x(r, j) - m) * (data.x(r, j) - m);
      var /= static_cast<double>(rows.size() - 1);
      CHECK(var == doctest::Approx(1.0).epsilon(0.12));
    }
  }
}

TEST_CASE("equicorrelated design matches its declared second moments") {
  const Index n = 40000;
  const SyntheticDataset data = equicorr_linear(n, 6, 0.3, 0.1, 0.5, 23);
  CHECK(data.generator == "equicorr");
  CHECK_FALSE(data.component_labels.has_value());
  CHECK(data.params.at("rho") == 0.3);

  // unit column variances
  for (Index j = 0; j < 6; ++j) {
    const double m = data.x.col(j).mean();
    const double var = (data.x.col(j).array() - m).square().sum() / (n - 1.0);
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
  }
  // constant pairwise correlation rho
  double corr_sum = 0.0;
  int pairs = 0;
  for (Index j = 0; j < 6; ++j) {
    for (Index k = j + 1; k < 6; ++k) {
      const double mj = data.x.col(j).mean();
      const double mk = data.x.col(k).mean();
      const double cov = ((data.x.col(j).array() - mj) * (data.x.col(k).array() - mk)).sum() /
                         (n - 1.0);
      corr_sum += cov;
      ++pairs;
    }
  }
  CHECK(corr_sum / pairs == doctest::Approx(0.3).epsilon(0.1));
}

TEST_CASE("equicorrelated response variance follows the one-factor closed form") {
  const Index n = 50000;
  const double rho = 0.25;
  const double noise = 0.5;
  const SyntheticDataset data = equicorr_linear(n, 20, rho, 0.1, noise, 29);
  const double beta_norm2 = data.beta.squaredNorm();
  const double beta_sum = data.beta.sum();
  const double expected =
      (1.0 - rho) * beta_norm2 + rho * beta_sum * beta_sum + noise * noise;
  const double m = data.y.mean();
  const double var = (data.y.array() - m).square().sum() / (n - 1.0);
  CHECK(var == doctest::Approx(expected).epsilon(0.06));
}

TEST_CASE("equicorrelated rows keep a prefix property across sizes") {
  const SyntheticDataset small = equicorr_linear(50, 4, 0.2, 0.1, 0.5, 31);
  const SyntheticDataset large = equicorr_linear(120, 4, 0.2, 0.1, 0.5, 31);
  CHECK((large.beta - small.beta).cwiseAbs().maxCoeff() == 0.0);
  CHECK((large.x.topRows(50) - small.x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("generator argument validation") {
  CHECK_THROWS_AS(gaussian_mixture(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_mixture(10, 0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_mixture(10, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_mixture(10, 3, 2, 5.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(equicorr_linear(10, 3, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(equicorr_linear(10, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(equicorr_linear(0, 3), std::invalid_argument);
}

}  // TEST_SUITE
