#include "pcaqs/synthgen.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pcaqs {

namespace {

void check_shape(Index n, Index p, const char* who) {
  if (n < 1 || p < 1) {
    throw std::invalid_argument(std::string(who) + ": rows and columns must be positive");
  }
}

Vector gaussian_vector(Index size, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector out(size);
  for (Index i = 0; i < size; ++i) out(i) = normal(rng);
  return out;
}

// Dirichlet(1, ..., 1) by normalizing unit exponentials
Vector dirichlet_flat(Index size, Rng& rng) {
  std::exponential_distribution<double> exp1(1.0);
  Vector raw(size);
  for (Index i = 0; i < size; ++i) raw(i) = exp1(rng);
  double sum = raw.sum();
  if (!(sum > 0.0)) return Vector::Constant(size, 1.0 / static_cast<double>(size));
  return raw / sum;
}

}  // namespace

SyntheticDataset gaussian_mixture(Index n, Index p, int components, double mean_scale,
                                  double noise_sigma, RngSeed seed) {
  check_shape(n, p, "gaussian_mixture");
  if (components < 1) {
    throw std::invalid_argument("gaussian_mixture: needs at least one component");
  }
  if (mean_scale < 0.0 || noise_sigma < 0.0) {
    throw std::invalid_argument("gaussian_mixture: scales must be nonnegative");
  }

  SyntheticDataset out;
  out.generator = "mixture";
  out.params = {{"rows", static_cast<double>(n)},
                {"cols", static_cast<double>(p)},
                {"components", static_cast<double>(components)},
                {"mean_scale", mean_scale},
                {"noise_sigma", noise_sigma},
                {"seed", static_cast<double>(seed)}};

  Rng means_rng = make_rng(derive_seed(seed, "means"));
  Matrix means(components, p);
  for (int c = 0; c < components; ++c) {
    means.row(c) = mean_scale * gaussian_vector(p, means_rng).transpose();
  }

  Rng weights_rng = make_rng(derive_seed(seed, "weights"));
  const Vector weights = dirichlet_flat(components, weights_rng);

  Rng labels_rng = make_rng(derive_seed(seed, "labels"));
  std::discrete_distribution<int> pick_component(weights.data(), weights.data() + components);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = pick_component(labels_rng);

  Rng x_rng = make_rng(derive_seed(seed, "x"));
  std::normal_distribution<double> normal(0.0, 1.0);
  out.x.resize(n, p);
  for (Index i = 0; i < n; ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    for (Index j = 0; j < p; ++j) out.x(i, j) = means(c, j) + normal(x_rng);
  }

  Rng beta_rng = make_rng(derive_seed(seed, "beta"));
  out.beta = gaussian_vector(p, beta_rng);

  Rng noise_rng = make_rng(derive_seed(seed, "noise"));
  out.y = out.x * out.beta + noise_sigma * gaussian_vector(n, noise_rng);
  out.component_labels = std::move(labels);
  return out;
}

SyntheticDataset equicorr_linear(Index n, Index p, double rho, double beta_sigma,
                                 double noise_sigma, RngSeed seed) {
  check_shape(n, p, "equicorr_linear");
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw std::invalid_argument("equicorr_linear: rho must lie in [0, 1)");
  }
  if (beta_sigma < 0.0 || noise_sigma < 0.0) {
    throw std::invalid_argument("equicorr_linear: scales must be nonnegative");
  }

  SyntheticDataset out;
  out.generator = "equicorr";
  out.params = {{"rows", static_cast<double>(n)},
                {"cols", static_cast<double>(p)},
                {"rho", rho},
                {"beta_sigma", beta_sigma},
                {"noise_sigma", noise_sigma},
                {"seed", static_cast<double>(seed)}};

  const double idio = std::sqrt(1.0 - rho);
  const double shared = std::sqrt(rho);

  Rng e_rng = make_rng(derive_seed(seed, "e"));
  Rng z_rng = make_rng(derive_seed(seed, "z"));
  std::normal_distribution<double> normal(0.0, 1.0);
  out.x.resize(n, p);
  for (Index i = 0; i < n; ++i) {
    const double z = normal(z_rng);
    for (Index j = 0; j < p; ++j) out.x(i, j) = idio * normal(e_rng) + shared * z;
  }

  Rng beta_rng = make_rng(derive_seed(seed, "beta"));
  out.beta = beta_sigma * gaussian_vector(p, beta_rng);

  Rng noise_rng = make_rng(derive_seed(seed, "noise"));
  out.y = out.x * out.beta + noise_sigma * gaussian_vector(n, noise_rng);
  return out;
}

}  // namespace pcaqs
