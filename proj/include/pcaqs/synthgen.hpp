#pragma once

#include "pcaqs/rng.hpp"
#include "pcaqs/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pcaqs {

struct SyntheticDataset {
  Matrix x;
  Vector y;
  Vector beta;  // true regression coefficients
  std::string generator;
  std::map<std::string, double> params;
  std::optional<std::vector<int>> component_labels;  // mixture only
};

/// Gaussian mixture with a linear response: component means ~ N(0, mean_scale^2 I),
/// mixing weights ~ Dirichlet(1), unit within-component covariance,
/// y = X beta + eps with beta ~ N(0, I) and eps ~ N(0, noise_sigma^2).
/// Every random ingredient draws from its own substream of `seed`, so e.g.
/// changing n never perturbs beta or the component means.
SyntheticDataset gaussian_mixture(Index n, Index p, int components = 5,
                                  double mean_scale = 5.0, double noise_sigma = 1.0,
                                  RngSeed seed = 42);

/// Equi-correlated design via a one-factor model,
/// x = sqrt(1 - rho) e + sqrt(rho) z 1 with e ~ N(0, I) and scalar z ~ N(0, 1),
/// so Cov(x) has unit diagonal and constant off-diagonal rho. Response
/// y = X beta + eps with beta ~ N(0, beta_sigma^2 I), eps ~ N(0, noise_sigma^2).
SyntheticDataset equicorr_linear(Index n, Index p, double rho = 0.2,
                                 double beta_sigma = 0.1, double noise_sigma = 0.5,
                                 RngSeed seed = 42);

}  // namespace pcaqs
