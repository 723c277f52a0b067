#pragma once

#include "pcaqs/types.hpp"

#include <compare>
#include <map>
#include <string>
#include <vector>

namespace pcaqs {

/// Composite per-component quantile-bin identifier; bins are 1-based, so a row
/// in bin 2 of component 1, bin 4 of component 2 and bin 1 of component 3 has
/// the key "2-4-1".
struct GroupKey {
  std::vector<int> bins;

  std::string str() const;
  static GroupKey parse(const std::string& text);

  auto operator<=>(const GroupKey&) const = default;
};

/// The g - 1 interior quantile cuts of one score column at probabilities
/// i/g, linearly interpolated between order statistics. Throws when the
/// column holds fewer than g values ("insufficient data").
Vector compute_cuts(const Eigen::Ref<const Vector>& column, int num_groups);

/// 1-based interval index of `value` against ascending cuts: intervals are
/// closed below and open above, a value equal to a cut moves up, and the last
/// interval is closed on the right. Total over all inputs.
int assign_group(double value, const Eigen::Ref<const Vector>& cuts);

struct QuantileGrid {
  int num_groups = 0;
  std::vector<Vector> cuts;  // one entry per score column
};

struct GroupIndex {
  QuantileGrid grid;
  std::map<GroupKey, IndexList> groups;  // ascending row ids per key
  Index total_rows = 0;
};

/// Per-column cuts plus the partition of rows into composite quantile groups.
GroupIndex build_group_index(const Eigen::Ref<const Matrix>& scores, int num_groups);

/// min(ceil(rate * group_size), group_size). `rate` must lie in (0, 1].
std::size_t group_quota(std::size_t group_size, double rate);

}  // namespace pcaqs
