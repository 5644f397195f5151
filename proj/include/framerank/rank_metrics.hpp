#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "framerank/corpus.hpp"
#include "framerank/scoring.hpp"

namespace framerank {

inline constexpr std::array<std::size_t, 2> kDefaultCutoffs = {5, 10};

// Probability that a random positive outscores a random negative, ties
// counting one half. Throws InvalidArgument unless both classes occur.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Reciprocal rank of the first positive, 0 when there is none.
double mrr(std::span<const std::uint8_t> ranked_labels);

// Binary-gain nDCG@k with a 1/log2(rank+1) discount, 0 when there is no
// positive. Throws InvalidArgument for k == 0.
double ndcg_at_k(std::span<const std::uint8_t> ranked_labels, std::size_t k);

// Click labels of a slate in ranked order.
std::vector<std::uint8_t> ranked_labels(const RankedSlate& slate,
                                        const Impression& impression);

struct ImpressionRankMetrics {
  std::string impression_id;
  double auc = 0.0;
  bool auc_defined = false;
  double mrr = 0.0;
  std::map<std::size_t, double> ndcg;
};

struct RankReport {
  double auc = 0.0;
  double mrr = 0.0;
  std::map<std::size_t, double> ndcg_at;
  std::size_t n_impressions = 0;
  std::size_t n_auc_excluded = 0;  // single-class slates
  std::vector<ImpressionRankMetrics> per_impression;
};

ImpressionRankMetrics evaluate_impression(const RankedSlate& slate,
                                          const Impression& impression,
                                          std::span<const std::size_t> ks);

// Macro-average over impressions. Slates and impressions are aligned by
// position. Throws InvalidArgument on an empty set or misalignment.
RankReport evaluate_descriptive(std::span<const RankedSlate> slates,
                                std::span<const Impression> impressions,
                                std::span<const std::size_t> ks = kDefaultCutoffs);

}  // namespace framerank
