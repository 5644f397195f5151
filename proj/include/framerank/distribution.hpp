#pragma once

#include <map>
#include <string>
#include <vector>

namespace framerank {

// Probability mass over a set of string labels (frame names, categories,
// sentiment bins). Labels absent from the map carry zero mass. Iteration
// order is the label order, so anything derived from a distribution is
// deterministic.
class CategoricalDistribution {
public:
  CategoricalDistribution() = default;

  // Takes non-negative masses and normalizes them to sum to one. Throws
  // InvalidArgument if a mass is negative or non-finite, or if all masses
  // are zero.
  static CategoricalDistribution from_masses(std::map<std::string, double> masses);

  // Wraps masses that are already normalized, without rescaling.
  static CategoricalDistribution from_probabilities(
      std::map<std::string, double> probabilities);

  double probability(const std::string& label) const;
  double total() const;
  bool empty() const { return mass_.empty(); }
  std::size_t size() const { return mass_.size(); }
  const std::map<std::string, double>& masses() const { return mass_; }

  // True if masses are non-negative and sum to 1 within `tolerance`.
  bool is_normalized(double tolerance = 1e-9) const;

private:
  std::map<std::string, double> mass_;
};

// Sorted union of the labels carrying mass in either distribution.
std::vector<std::string> support_union(const CategoricalDistribution& p,
                                       const CategoricalDistribution& q);

}  // namespace framerank
