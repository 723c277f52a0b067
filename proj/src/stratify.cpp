#include "pcaqs/stratify.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pcaqs {

std::string GroupKey::str() const {
  std::string out;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (i > 0) out += '-';
    out += std::to_string(bins[i]);
  }
  return out;
}

GroupKey GroupKey::parse(const std::string& text) {
  GroupKey key;
  if (text.empty()) throw std::invalid_argument("group key: empty text");
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t dash = std::min(text.find('-', pos), text.size());
    int bin = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + dash, bin);
    if (ec != std::errc{} || ptr != text.data() + dash || bin < 1) {
      throw std::invalid_argument("group key: malformed text '" + text + "'");
    }
    key.bins.push_back(bin);
    if (dash == text.size()) break;
    pos = dash + 1;
  }
  return key;
}

Vector compute_cuts(const Eigen::Ref<const Vector>& column, int num_groups) {
  if (num_groups < 2) {
    throw std::invalid_argument("compute_cuts: needs at least two groups");
  }
  const Index n = column.size();
  if (n < num_groups) {
    throw std::invalid_argument("compute_cuts: insufficient data for " +
                                std::to_string(num_groups) + " groups");
  }
  require_finite(column, "compute_cuts: input");

  std::vector<double> sorted(column.data(), column.data() + n);
  std::sort(sorted.begin(), sorted.end());

  Vector cuts(num_groups - 1);
  for (int i = 1; i < num_groups; ++i) {
    const double h = (static_cast<double>(i) / num_groups) * static_cast<double>(n - 1);
    auto lo = static_cast<Index>(std::floor(h));
    lo = std::clamp<Index>(lo, 0, n - 2);
    const double frac = h - static_cast<double>(lo);
    cuts(i - 1) = sorted[static_cast<std::size_t>(lo)] +
                  frac * (sorted[static_cast<std::size_t>(lo + 1)] -
                          sorted[static_cast<std::size_t>(lo)]);
  }
  return cuts;
}

int assign_group(double value, const Eigen::Ref<const Vector>& cuts) {
  const double* begin = cuts.data();
  const double* end = begin + cuts.size();
  const auto below_or_at = std::upper_bound(begin, end, value) - begin;
  return static_cast<int>(below_or_at) + 1;
}

GroupIndex build_group_index(const Eigen::Ref<const Matrix>& scores, int num_groups) {
  const Index n = scores.rows();
  const Index k = scores.cols();
  if (k < 1) throw std::invalid_argument("build_group_index: no score columns");
  require_finite(scores, "build_group_index: scores");

  GroupIndex index;
  index.grid.num_groups = num_groups;
  index.grid.cuts.reserve(static_cast<std::size_t>(k));
  for (Index j = 0; j < k; ++j) {
    index.grid.cuts.push_back(compute_cuts(scores.col(j), num_groups));
  }

  GroupKey key;
  key.bins.resize(static_cast<std::size_t>(k));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < k; ++j) {
      key.bins[static_cast<std::size_t>(j)] =
          assign_group(scores(i, j), index.grid.cuts[static_cast<std::size_t>(j)]);
    }
    index.groups[key].push_back(i);
  }
  index.total_rows = n;
  return index;
}

std::size_t group_quota(std::size_t group_size, double rate) {
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw std::invalid_argument("group_quota: retention rate must lie in (0, 1]");
  }
  if (group_size == 0) return 0;
  return std::min(scaled_ceil(group_size, rate), group_size);
}

}  // namespace pcaqs
