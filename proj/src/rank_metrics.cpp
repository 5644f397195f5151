#include "framerank/rank_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "framerank/error.hpp"
#include "framerank/log.hpp"

namespace framerank {

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw InvalidArgument("auc: scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney: sum of positive ranks with tied groups sharing the
  // average rank. Ranks are kept doubled so every quantity stays integral.
  double positives = 0.0;
  double doubled_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1 .. j, doubled average = i + j + 1.
    const double doubled_avg = static_cast<double>(i + j + 1);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        positives += 1.0;
        doubled_rank_sum += doubled_avg;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0.0 || negatives == 0.0) {
    throw InvalidArgument("auc needs at least one positive and one negative");
  }
  const double doubled_u = doubled_rank_sum - positives * (positives + 1.0);
  return doubled_u / (2.0 * positives * negatives);
}

double mrr(std::span<const std::uint8_t> ranked_labels) {
  for (std::size_t i = 0; i < ranked_labels.size(); ++i) {
    if (ranked_labels[i]) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

double ndcg_at_k(std::span<const std::uint8_t> ranked_labels, std::size_t k) {
  if (k == 0) throw InvalidArgument("ndcg cutoff must be at least 1");
  const std::size_t cutoff = std::min(k, ranked_labels.size());
  double dcg = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < ranked_labels.size(); ++i) {
    if (!ranked_labels[i]) continue;
    ++positives;
    if (i < cutoff) dcg += 1.0 / std::log2(static_cast<double>(i + 2));
  }
  if (positives == 0) return 0.0;
  double ideal = 0.0;
  for (std::size_t i = 0; i < std::min(positives, cutoff); ++i) {
    ideal += 1.0 / std::log2(static_cast<double>(i + 2));
  }
  return dcg / ideal;
}

std::vector<std::uint8_t> ranked_labels(const RankedSlate& slate,
                                        const Impression& impression) {
  std::vector<std::uint8_t> labels;
  labels.reserve(slate.entries.size());
  for (const auto& e : slate.entries) {
    if (e.candidate_index >= impression.clicks.size()) {
      throw InvalidArgument("slate entry outside impression '" + impression.id + "'");
    }
    labels.push_back(impression.clicks[e.candidate_index]);
  }
  return labels;
}

ImpressionRankMetrics evaluate_impression(const RankedSlate& slate,
                                          const Impression& impression,
                                          std::span<const std::size_t> ks) {
  const auto labels = ranked_labels(slate, impression);
  const auto scores = slate.final_scores();
  ImpressionRankMetrics m;
  m.impression_id = impression.id;
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives > 0 && static_cast<std::size_t>(positives) < labels.size()) {
    m.auc = auc(scores, labels);
    m.auc_defined = true;
  }
  m.mrr = mrr(labels);
  for (std::size_t k : ks) m.ndcg[k] = ndcg_at_k(labels, k);
  return m;
}

RankReport evaluate_descriptive(std::span<const RankedSlate> slates,
                                std::span<const Impression> impressions,
                                std::span<const std::size_t> ks) {
  if (slates.empty()) throw InvalidArgument("empty evaluation set");
  if (slates.size() != impressions.size()) {
    throw InvalidArgument("slates and impressions are not aligned");
  }
  RankReport report;
  report.n_impressions = slates.size();
  double auc_sum = 0.0;
  std::size_t auc_count = 0;
  double mrr_sum = 0.0;
  std::map<std::size_t, double> ndcg_sum;
  for (std::size_t i = 0; i < slates.size(); ++i) {
    if (slates[i].impression_id != impressions[i].id) {
      throw InvalidArgument("slate '" + slates[i].impression_id +
                            "' aligned with impression '" + impressions[i].id + "'");
    }
    auto m = evaluate_impression(slates[i], impressions[i], ks);
    if (m.auc_defined) {
      auc_sum += m.auc;
      ++auc_count;
    }
    mrr_sum += m.mrr;
    for (const auto& [k, v] : m.ndcg) ndcg_sum[k] += v;
    report.per_impression.push_back(std::move(m));
  }
  const double n = static_cast<double>(slates.size());
  report.n_auc_excluded = slates.size() - auc_count;
  if (report.n_auc_excluded > 0) {
    warn(std::to_string(report.n_auc_excluded) +
         " single-class impressions excluded from AUC");
  }
  report.auc = auc_count ? auc_sum / static_cast<double>(auc_count) : 0.0;
  report.mrr = mrr_sum / n;
  for (const auto& [k, v] : ndcg_sum) report.ndcg_at[k] = v / n;
  return report;
}

}  // namespace framerank
