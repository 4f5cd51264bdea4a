#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdc/region.hpp"

namespace cdc {

struct DistanceRelation {
  int bucket = 0;

  friend constexpr auto operator<=>(const DistanceRelation&, const DistanceRelation&) = default;
};

/// Qualitative distance scale of granularity g: g-1 strictly increasing
/// thresholds split the boundary distance into g named buckets.
class DistanceScale {
 public:
  /// g = 6 with thresholds [0,1,2,4,8] and names adjacent .. veryfar.
  DistanceScale();
  /// Default thresholds [0,1,2,4,...] and default names for granularity g.
  explicit DistanceScale(int granularity);
  /// Throws cdc::Error unless thresholds has g-1 strictly increasing non-negative entries.
  DistanceScale(int granularity, std::vector<int> thresholds);
  DistanceScale(int granularity, std::vector<int> thresholds, std::vector<std::string> names);

  static std::vector<int> default_thresholds(int granularity);
  static std::vector<std::string> default_names(int granularity);

  int granularity() const noexcept { return granularity_; }
  const std::vector<int>& thresholds() const noexcept { return thresholds_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  DistanceRelation classify(int boundary_distance) const noexcept;
  std::optional<DistanceRelation> find(std::string_view name) const noexcept;
  const std::string& name(DistanceRelation r) const { return names_.at(static_cast<std::size_t>(r.bucket)); }
  /// Smallest and largest boundary distance mapping to the bucket; the last bucket is unbounded (max = -1).
  int lower_bound(DistanceRelation r) const noexcept;
  int upper_bound(DistanceRelation r) const noexcept;

  friend bool operator==(const DistanceScale&, const DistanceScale&) = default;

 private:
  int granularity_;
  std::vector<int> thresholds_;
  std::vector<std::string> names_;
};

int chebyshev(Cell p, Cell q) noexcept;
/// min over cell pairs of max(0, chebyshev - 1); 0 when the regions overlap or touch.
int boundary_distance(const Region& a, const Region& b);
DistanceRelation distance_relation(const Region& a, const Region& b, const DistanceScale& scale);

}  // namespace cdc
