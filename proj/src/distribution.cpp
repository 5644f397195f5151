#include "framerank/distribution.hpp"

#include <cmath>
#include <set>

#include "framerank/error.hpp"

namespace framerank {

CategoricalDistribution CategoricalDistribution::from_masses(
    std::map<std::string, double> masses) {
  double total = 0.0;
  for (const auto& [label, m] : masses) {
    if (!std::isfinite(m) || m < 0.0) {
      throw InvalidArgument("invalid mass for label '" + label + "'");
    }
    total += m;
  }
  if (!(total > 0.0)) {
    throw InvalidArgument("distribution has no mass");
  }
  for (auto& [label, m] : masses) m /= total;
  CategoricalDistribution d;
  d.mass_ = std::move(masses);
  return d;
}

CategoricalDistribution CategoricalDistribution::from_probabilities(
    std::map<std::string, double> probabilities) {
  for (const auto& [label, m] : probabilities) {
    if (!std::isfinite(m) || m < 0.0) {
      throw InvalidArgument("invalid probability for label '" + label + "'");
    }
  }
  CategoricalDistribution d;
  d.mass_ = std::move(probabilities);
  return d;
}

double CategoricalDistribution::probability(const std::string& label) const {
  auto it = mass_.find(label);
  return it == mass_.end() ? 0.0 : it->second;
}

double CategoricalDistribution::total() const {
  double t = 0.0;
  for (const auto& [label, m] : mass_) t += m;
  return t;
}

bool CategoricalDistribution::is_normalized(double tolerance) const {
  for (const auto& [label, m] : mass_) {
    if (!(m >= 0.0)) return false;
  }
  return std::abs(total() - 1.0) <= tolerance;
}

std::vector<std::string> support_union(const CategoricalDistribution& p,
                                       const CategoricalDistribution& q) {
  std::set<std::string> labels;
  for (const auto& [label, m] : p.masses()) {
    if (m > 0.0) labels.insert(label);
  }
  for (const auto& [label, m] : q.masses()) {
    if (m > 0.0) labels.insert(label);
  }
  return {labels.begin(), labels.end()};
}

}  // namespace framerank
