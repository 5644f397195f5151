#pragma once

#include <string_view>
#include <vector>

#include "framerank/distribution.hpp"

namespace framerank {

// Smoothing mass for divergences that are unbounded on disjoint support.
inline constexpr double kSmoothingEpsilon = 1e-12;

// Generator f of the f-divergence sum over labels of Q(x) f(P(x) / Q(x)),
// with P the context and Q the recommendation.
enum class Generator {
  // f(t) = 1/2 [t log2(2t / (t + 1)) + log2(2 / (t + 1))]; yields JSD(P, Q).
  JensenShannon,
  // f(t) = -log2 t; yields KL(Q || P), the recommendation measured against
  // the context. Evaluated on epsilon-smoothed inputs.
  KullbackLeibler,
};

Generator parse_generator(std::string_view name);
std::string_view generator_name(Generator g);

// Jensen-Shannon divergence in bits, in [0, 1]. Throws InvalidArgument if
// either input deviates from unit mass by more than 1e-6.
double jsd(const CategoricalDistribution& p, const CategoricalDistribution& q);

// KL(p || q) in bits after adding `epsilon` to every label in the joint
// support of p and q and renormalizing.
double smoothed_kl(const CategoricalDistribution& p, const CategoricalDistribution& q,
                   double epsilon = kSmoothingEpsilon);

// Adds `epsilon` to every label of `support` and renormalizes.
CategoricalDistribution smooth(const CategoricalDistribution& d,
                               const std::vector<std::string>& support,
                               double epsilon = kSmoothingEpsilon);

double divergence_dstar(const CategoricalDistribution& context,
                        const CategoricalDistribution& recommendation,
                        Generator f = Generator::JensenShannon);

}  // namespace framerank
