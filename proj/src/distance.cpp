#include "cdc/distance.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <set>

#include "cdc/error.hpp"

namespace cdc {

DistanceScale::DistanceScale() : DistanceScale(6) {}

DistanceScale::DistanceScale(int granularity)
    : DistanceScale(granularity, default_thresholds(granularity)) {}

DistanceScale::DistanceScale(int granularity, std::vector<int> thresholds)
    : DistanceScale(granularity, std::move(thresholds), default_names(granularity)) {}

DistanceScale::DistanceScale(int granularity, std::vector<int> thresholds, std::vector<std::string> names)
    : granularity_(granularity), thresholds_(std::move(thresholds)), names_(std::move(names)) {
  if (granularity_ < 2) throw Error("granularity must be at least 2");
  if (thresholds_.size() != static_cast<std::size_t>(granularity_ - 1))
    throw Error("expected " + std::to_string(granularity_ - 1) + " thresholds");
  for (std::size_t i = 0; i < thresholds_.size(); ++i) {
    if (thresholds_[i] < 0) throw Error("thresholds must be non-negative");
    if (i > 0 && thresholds_[i] <= thresholds_[i - 1]) throw Error("thresholds must be strictly increasing");
  }
  if (names_.size() != static_cast<std::size_t>(granularity_))
    throw Error("expected " + std::to_string(granularity_) + " distance names");
  if (std::set<std::string>(names_.begin(), names_.end()).size() != names_.size())
    throw Error("distance names must be distinct");
}

std::vector<int> DistanceScale::default_thresholds(int granularity) {
  if (granularity < 2) throw Error("granularity must be at least 2");
  std::vector<int> out{0};
  for (int i = 1; i < granularity - 1; ++i) out.push_back(1 << (i - 1));
  return out;
}

std::vector<std::string> DistanceScale::default_names(int granularity) {
  if (granularity == 6) return {"adjacent", "verynear", "near", "commensurate", "far", "veryfar"};
  std::vector<std::string> out;
  for (int i = 0; i < granularity; ++i) out.push_back("dist" + std::to_string(i));
  return out;
}

DistanceRelation DistanceScale::classify(int boundary_distance) const noexcept {
  const auto it = std::lower_bound(thresholds_.begin(), thresholds_.end(), boundary_distance);
  return {static_cast<int>(it - thresholds_.begin())};
}

std::optional<DistanceRelation> DistanceScale::find(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return DistanceRelation{static_cast<int>(i)};
  }
  return std::nullopt;
}

int DistanceScale::lower_bound(DistanceRelation r) const noexcept {
  return r.bucket == 0 ? 0 : thresholds_[static_cast<std::size_t>(r.bucket - 1)] + 1;
}

int DistanceScale::upper_bound(DistanceRelation r) const noexcept {
  return r.bucket >= granularity_ - 1 ? -1 : thresholds_[static_cast<std::size_t>(r.bucket)];
}

int chebyshev(Cell p, Cell q) noexcept { return std::max(std::abs(p.x - q.x), std::abs(p.y - q.y)); }

int boundary_distance(const Region& a, const Region& b) {
  int best = std::numeric_limits<int>::max();
  for (const Cell& p : a.cells()) {
    for (const Cell& q : b.cells()) {
      best = std::min(best, std::max(0, chebyshev(p, q) - 1));
      if (best == 0) return 0;
    }
  }
  return best;
}

DistanceRelation distance_relation(const Region& a, const Region& b, const DistanceScale& scale) {
  return scale.classify(boundary_distance(a, b));
}

}  // namespace cdc
