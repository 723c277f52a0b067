#include "doctest.h"

#include "pcaqs/cluster.hpp"
#include "pcaqs/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

using namespace pcaqs;

namespace {

// four tight blobs in the plane, `per` points each
Matrix four_blobs(Index per, double spread, RngSeed seed) {
  const double cx[4] = {0.0, 10.0, 0.0, 10.0};
  const double cy[4] = {0.0, 0.0, 10.0, 10.0};
  Rng rng = make_rng(seed);
  Matrix x(4 * per, 2);
  const Matrix noise = gaussian_matrix(4 * per, 2, rng);
  for (Index b = 0; b < 4; ++b) {
    for (Index i = 0; i < per; ++i) {
      const Index r = b * per + i;
      x(r, 0) = cx[b] + spread * noise(r, 0);
      x(r, 1) = cy[b] + spread * noise(r, 1);
    }
  }
  return x;
}

}  // namespace

TEST_SUITE("cluster") {

TEST_CASE("kmeans recovers well-separated blobs") {
  const Matrix x = four_blobs(50, 0.3, 99);
  const KMeansResult res = kmeans(x, 4, {}, 7);
  CHECK(res.centroids.rows() == 4);
  CHECK(res.assignments.size() == 200);
  CHECK(res.starts_run == 10);
  CHECK(res.iterations >= 1);
  // every blob maps to a single cluster and the four clusters are distinct
  std::set<int> blob_labels;
  for (Index b = 0; b < 4; ++b) {
    const int label = res.assignments[static_cast<std::size_t>(b * 50)];
    for (Index i = 0; i < 50; ++i) {
      CHECK(res.assignments[static_cast<std::size_t>(b * 50 + i)] == label);
    }
    blob_labels.insert(label);
  }
  CHECK(blob_labels.size() == 4);
  // inertia ~ n * spread^2 * dims for tight blobs
  CHECK(res.inertia < 200 * 0.3 * 0.3 * 2 * 2.0);
  // centroids sit near the blob centers
  Vector best_dist(4);
  for (int c = 0; c < 4; ++c) {
    double best = 1e18;
    const double cx[4] = {0.0, 10.0, 0.0, 10.0};
    const double cy[4] = {0.0, 0.0, 10.0, 10.0};
    for (int b = 0; b < 4; ++b) {
      const double dx = res.centroids(c, 0) - cx[b];
      const double dy = res.centroids(c, 1) - cy[b];
      best = std::min(best, std::hypot(dx, dy));
    }
    CHECK(best < 0.5);
  }
}

TEST_CASE("more starts never worsen the winning inertia") {
  // harder instance: overlapping blobs make single starts fall into local optima
  const Matrix x = four_blobs(40, 2.5, 123);
  KMeansParams one;
  one.num_starts = 1;
  KMeansParams ten;
  ten.num_starts = 10;
  const double inertia_one = kmeans(x, 6, one, 31).inertia;
  const double inertia_ten = kmeans(x, 6, ten, 31).inertia;
  // start seeds nest: the ten-start run replays the single start among others
  CHECK(inertia_ten <= inertia_one + 1e-12);
}

TEST_CASE("kmeans is deterministic for a fixed seed") {
  const Matrix x = four_blobs(30, 1.0, 5);
  const KMeansResult a = kmeans(x, 3, {}, 42);
  const KMeansResult b = kmeans(x, 3, {}, 42);
  CHECK((a.centroids - b.centroids).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.assignments == b.assignments);
  CHECK(a.inertia == b.inertia);
}

TEST_CASE("k equal to n puts every row on its own centroid") {
  Rng rng = make_rng(8);
  const Matrix x = gaussian_matrix(6, 3, rng);
  const KMeansResult res = kmeans(x, 6, {}, 9);
  CHECK(res.inertia == doctest::Approx(0.0));
  std::set<int> labels(res.assignments.begin(), res.assignments.end());
  CHECK(labels.size() == 6);
}

TEST_CASE("duplicated points keep the empty-cluster reseed stable") {
  // only two distinct locations but three clusters requested
  Matrix x(20, 2);
  for (Index i = 0; i < 10; ++i) x.row(i) << 0.0, 0.0;
  for (Index i = 10; i < 20; ++i) x.row(i) << 5.0, 5.0;
  const KMeansResult res = kmeans(x, 3, {}, 17);
  CHECK(res.inertia == doctest::Approx(0.0));
  CHECK(res.assignments.size() == 20);
}

TEST_CASE("kmeans validates its arguments") {
  Rng rng = make_rng(3);
  const Matrix x = gaussian_matrix(3, 2, rng);
  CHECK_THROWS_AS(kmeans(x, 5), std::invalid_argument);
  CHECK_THROWS_AS(kmeans(x, 0), std::invalid_argument);
  CHECK_THROWS_AS(kmeans(Matrix(0, 2), 1), std::invalid_argument);
  KMeansParams bad;
  bad.max_iter = 0;
  CHECK_THROWS_AS(kmeans(x, 2, bad), std::invalid_argument);
}

TEST_CASE("assign_nearest breaks ties toward the lowest centroid index") {
  Matrix centroids(3, 1);
  centroids << 1.0, 1.0, 4.0;  // first two coincide
  Matrix x(3, 1);
  x << 0.9, 2.5, 4.1;  // 2.5 is equidistant from 1.0 and 4.0
  const std::vector<int> labels = assign_nearest(centroids, x);
  CHECK(labels == std::vector<int>{0, 0, 2});
}

TEST_CASE("silhouette separates far blobs and hovers near zero for random labels") {
  const Matrix x = four_blobs(50, 0.3, 77);
  const KMeansResult res = kmeans(x, 4, {}, 7);
  CHECK(silhouette(x, res.assignments) > 0.9);

  Rng rng = make_rng(55);
  std::vector<int> random_labels(200);
  std::uniform_int_distribution<int> pick(0, 3);
  for (auto& label : random_labels) label = pick(rng);
  const double s = silhouette(x, random_labels);
  CHECK(std::abs(s) < 0.06);
}

TEST_CASE("silhouette handles singleton clusters and tiny inputs") {
  Matrix x(3, 1);
  x << 0.0, 0.0, 10.0;
  const std::vector<int> labels{0, 0, 1};
  // singleton scores 0; the two coincident points score (10 - 0) / 10 = 1
  CHECK(silhouette(x, labels) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("silhouette subsampling is seeded and matches the exact value in expectation") {
  const Matrix x = four_blobs(100, 1.5, 31);
  const KMeansResult res = kmeans(x, 4, {}, 7);
  const double exact = silhouette(x, res.assignments, 0);
  const double capped_a = silhouette(x, res.assignments, 150, 11);
  const double capped_b = silhouette(x, res.assignments, 150, 11);
  CHECK(capped_a == capped_b);
  CHECK(capped_a == doctest::Approx(exact).epsilon(0.15));
  // a cap at or above n is the exact path
  CHECK(silhouette(x, res.assignments, 400, 11) == exact);
}

TEST_CASE("silhouette validates labels") {
  Rng rng = make_rng(4);
  const Matrix x = gaussian_matrix(10, 2, rng);
  std::vector<int> labels(10, 0);
  CHECK_THROWS_AS(silhouette(x, labels), std::invalid_argument);  // one cluster
  labels.resize(9);
  CHECK_THROWS_AS(silhouette(x, labels), std::invalid_argument);  // count mismatch
  std::vector<int> negative(10, 0);
  negative[3] = -1;
  CHECK_THROWS_AS(silhouette(x, negative), std::invalid_argument);
}

}  // TEST_SUITE
