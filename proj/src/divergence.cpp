#include "framerank/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "framerank/error.hpp"

namespace framerank {
namespace {

constexpr double kNormTolerance = 1e-6;

void require_normalized(const CategoricalDistribution& d, const char* which) {
  if (!d.is_normalized(kNormTolerance)) {
    throw InvalidArgument(std::string(which) + " distribution is not normalized");
  }
}

// a * log2(a / b) with 0 log 0 = 0.
double kl_term(double a, double b) {
  return a > 0.0 ? a * std::log2(a / b) : 0.0;
}

}  // namespace

Generator parse_generator(std::string_view name) {
  if (name == "jsd") return Generator::JensenShannon;
  if (name == "kl") return Generator::KullbackLeibler;
  throw InvalidArgument("unknown divergence '" + std::string(name) + "'");
}

std::string_view generator_name(Generator g) {
  return g == Generator::JensenShannon ? "jsd" : "kl";
}

double jsd(const CategoricalDistribution& p, const CategoricalDistribution& q) {
  require_normalized(p, "first");
  require_normalized(q, "second");
  double kl_p = 0.0;
  double kl_q = 0.0;
  for (const auto& label : support_union(p, q)) {
    const double pa = p.probability(label);
    const double qa = q.probability(label);
    const double m = 0.5 * (pa + qa);
    kl_p += kl_term(pa, m);
    kl_q += kl_term(qa, m);
  }
  const double d = 0.5 * kl_p + 0.5 * kl_q;
  // Rounding can push identical inputs a hair below zero.
  return std::clamp(d, 0.0, 1.0);
}

CategoricalDistribution smooth(const CategoricalDistribution& d,
                               const std::vector<std::string>& support,
                               double epsilon) {
  std::map<std::string, double> masses = d.masses();
  for (const auto& label : support) masses[label] += epsilon;
  return CategoricalDistribution::from_masses(std::move(masses));
}

double smoothed_kl(const CategoricalDistribution& p, const CategoricalDistribution& q,
                   double epsilon) {
  require_normalized(p, "first");
  require_normalized(q, "second");
  const auto support = support_union(p, q);
  const auto ps = smooth(p, support, epsilon);
  const auto qs = smooth(q, support, epsilon);
  double d = 0.0;
  for (const auto& label : support) {
    d += kl_term(ps.probability(label), qs.probability(label));
  }
  return std::max(d, 0.0);
}

double divergence_dstar(const CategoricalDistribution& context,
                        const CategoricalDistribution& recommendation,
                        Generator f) {
  require_normalized(context, "context");
  require_normalized(recommendation, "recommendation");
  const auto support = support_union(context, recommendation);

  if (f == Generator::KullbackLeibler) {
    const auto p = smooth(context, support, kSmoothingEpsilon);
    const auto q = smooth(recommendation, support, kSmoothingEpsilon);
    double d = 0.0;
    for (const auto& label : support) {
      const double pa = p.probability(label);
      const double qa = q.probability(label);
      d += qa * -std::log2(pa / qa);
    }
    return std::max(d, 0.0);
  }

  // JSD generator, with the limits Q -> 0 (slope 1/2 as t -> inf) and
  // P -> 0 (f(0) = 1/2) taken exactly.
  double d = 0.0;
  for (const auto& label : support) {
    const double pa = context.probability(label);
    const double qa = recommendation.probability(label);
    if (qa == 0.0) {
      d += 0.5 * pa;
    } else if (pa == 0.0) {
      d += 0.5 * qa;
    } else {
      const double t = pa / qa;
      d += qa * 0.5 * (t * std::log2(2.0 * t / (t + 1.0)) + std::log2(2.0 / (t + 1.0)));
    }
  }
  return std::clamp(d, 0.0, 1.0);
}

}  // namespace framerank
