#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "framerank/corpus.hpp"
#include "framerank/distribution.hpp"
#include "framerank/divergence.hpp"
#include "framerank/scoring.hpp"

namespace framerank {

inline constexpr std::size_t kDefaultTopK = 10;
inline constexpr std::size_t kDefaultBins = 10;

enum class Discount {
  Log2,        // 1 / log2(rank + 1)
  Reciprocal,  // 1 / rank
  Uniform,
};

Discount parse_discount(std::string_view name);
std::string_view discount_name(Discount d);

// Positive, non-increasing per-rank weights that sum to one.
struct RankWeights {
  Discount discount = Discount::Log2;
  std::vector<double> weights;
};

RankWeights make_rank_weights(std::size_t n, Discount discount);

// Relative frequencies of `labels`, or the normalized sum of `weights` per
// label when weights are given. Throws InvalidArgument on an empty list or
// misaligned weights.
CategoricalDistribution categorical_distribution(
    std::span<const std::string> labels, const RankWeights* weights = nullptr);

enum class Feature { Category, Frame };

std::string feature_label(const Article& article, Feature feature);

// Label of the equal-width bin that |sentiment| falls in over [0, 1].
std::string sentiment_bin(double sentiment, std::size_t n_bins);

// Binned |sentiment| distribution of every corpus article.
CategoricalDistribution sentiment_distribution(const Corpus& corpus,
                                               std::size_t n_bins);

// JSD between the unweighted history distribution and the rank-weighted
// top-k slate distribution of one feature.
double calibration(const Impression& impression, const RankedSlate& slate,
                   const Corpus& corpus, Feature feature,
                   Discount discount = Discount::Log2,
                   std::size_t top_k = kDefaultTopK);

// JSD between a context distribution (the corpus frame shares) and the
// unweighted top-k slate frame distribution.
double representation(const CategoricalDistribution& corpus_frames,
                      const RankedSlate& slate, const Corpus& corpus,
                      std::size_t top_k = kDefaultTopK);
double representation(const Corpus& corpus, const RankedSlate& slate,
                      std::size_t top_k = kDefaultTopK);

// JSD between binned |sentiment| of the corpus and of the unweighted top-k.
double activation(const CategoricalDistribution& corpus_sentiment,
                  const RankedSlate& slate, const Corpus& corpus,
                  std::size_t n_bins = kDefaultBins,
                  std::size_t top_k = kDefaultTopK);
double activation(const Corpus& corpus, const RankedSlate& slate,
                  std::size_t n_bins = kDefaultBins,
                  std::size_t top_k = kDefaultTopK);

struct NormativeConfig {
  std::size_t top_k = kDefaultTopK;
  std::size_t n_bins = kDefaultBins;
  Discount discount = Discount::Log2;
};

struct ImpressionNormative {
  std::string impression_id;
  double cal_category = 0.0;
  double cal_frame = 0.0;
  double rep_frame = 0.0;
  double activation = 0.0;
};

struct NormativeReport {
  double cal_category = 0.0;
  double cal_frame = 0.0;
  double rep_frame = 0.0;
  double activation = 0.0;
  std::vector<ImpressionNormative> per_impression;
};

// Shared read-only context distributions for one corpus.
struct NormativeContext {
  CategoricalDistribution frames;
  CategoricalDistribution sentiment;

  static NormativeContext of(const Corpus& corpus, std::size_t n_bins);
};

ImpressionNormative evaluate_normative_impression(const Corpus& corpus,
                                                  const NormativeContext& context,
                                                  const Impression& impression,
                                                  const RankedSlate& slate,
                                                  const NormativeConfig& config);

// Macro-average over impressions aligned by position with `slates`.
NormativeReport evaluate_normative(const Corpus& corpus,
                                   std::span<const Impression> impressions,
                                   std::span<const RankedSlate> slates,
                                   const NormativeConfig& config = {});

NormativeReport summarize_normative(std::vector<ImpressionNormative> rows);

// impression_id  cal_c  cal_f  rep_f  act
void write_metric_dump(std::ostream& out, const NormativeReport& report);

}  // namespace framerank
