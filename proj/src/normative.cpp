#include "framerank/normative.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "framerank/error.hpp"
#include "framerank/text.hpp"

namespace framerank {
namespace {

std::vector<std::string> top_k_labels(const RankedSlate& slate, const Corpus& corpus,
                                      std::size_t top_k, Feature feature) {
  if (top_k == 0) throw InvalidArgument("top_k must be at least 1");
  const std::size_t n = std::min(top_k, slate.entries.size());
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels.push_back(feature_label(corpus.article(slate.entries[i].article_id), feature));
  }
  return labels;
}

std::vector<std::string> history_labels(const Impression& impression,
                                        const Corpus& corpus, Feature feature) {
  if (impression.history.empty()) {
    throw InvalidArgument("impression '" + impression.id + "' has an empty history");
  }
  std::vector<std::string> labels;
  labels.reserve(impression.history.size());
  for (const auto& id : impression.history) {
    labels.push_back(feature_label(corpus.article(id), feature));
  }
  return labels;
}

}  // namespace

Discount parse_discount(std::string_view name) {
  if (name == "log2") return Discount::Log2;
  if (name == "reciprocal") return Discount::Reciprocal;
  if (name == "uniform") return Discount::Uniform;
  throw InvalidArgument("unknown discount '" + std::string(name) + "'");
}

std::string_view discount_name(Discount d) {
  switch (d) {
    case Discount::Log2: return "log2";
    case Discount::Reciprocal: return "reciprocal";
    case Discount::Uniform: return "uniform";
  }
  return "?";
}

RankWeights make_rank_weights(std::size_t n, Discount discount) {
  RankWeights w;
  w.discount = discount;
  w.weights.resize(n);
  double total = 0.0;
  for (std::size_t r = 1; r <= n; ++r) {
    double v = 1.0;
    if (discount == Discount::Log2) v = 1.0 / std::log2(static_cast<double>(r) + 1.0);
    if (discount == Discount::Reciprocal) v = 1.0 / static_cast<double>(r);
    w.weights[r - 1] = v;
    total += v;
  }
  for (double& v : w.weights) v /= total;
  return w;
}

CategoricalDistribution categorical_distribution(std::span<const std::string> labels,
                                                 const RankWeights* weights) {
  if (labels.empty()) throw InvalidArgument("distribution of an empty list");
  if (weights && weights->weights.size() != labels.size()) {
    throw InvalidArgument("rank weights not aligned with labels");
  }
  std::map<std::string, double> masses;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    masses[labels[i]] += weights ? weights->weights[i] : 1.0;
  }
  return CategoricalDistribution::from_masses(std::move(masses));
}

std::string feature_label(const Article& article, Feature feature) {
  return feature == Feature::Category ? article.category
                                      : std::string(frame_name(article.frame));
}

std::string sentiment_bin(double sentiment, std::size_t n_bins) {
  if (n_bins < 2) throw InvalidArgument("activation needs at least 2 bins");
  const double a = std::min(std::abs(sentiment), 1.0);
  auto bin = static_cast<std::size_t>(std::floor(a * static_cast<double>(n_bins)));
  bin = std::min(bin, n_bins - 1);
  const std::size_t width = std::to_string(n_bins - 1).size();
  std::string digits = std::to_string(bin);
  return "bin" + std::string(width - digits.size(), '0') + digits;
}

CategoricalDistribution sentiment_distribution(const Corpus& corpus,
                                               std::size_t n_bins) {
  std::vector<std::string> labels;
  labels.reserve(corpus.size());
  for (const auto& a : corpus.articles()) labels.push_back(sentiment_bin(a.sentiment, n_bins));
  return categorical_distribution(labels);
}

double calibration(const Impression& impression, const RankedSlate& slate,
                   const Corpus& corpus, Feature feature, Discount discount,
                   std::size_t top_k) {
  const auto history = categorical_distribution(history_labels(impression, corpus, feature));
  const auto labels = top_k_labels(slate, corpus, top_k, feature);
  const auto weights = make_rank_weights(labels.size(), discount);
  return jsd(history, categorical_distribution(labels, &weights));
}

double representation(const CategoricalDistribution& corpus_frames,
                      const RankedSlate& slate, const Corpus& corpus,
                      std::size_t top_k) {
  return jsd(corpus_frames,
             categorical_distribution(top_k_labels(slate, corpus, top_k, Feature::Frame)));
}

double representation(const Corpus& corpus, const RankedSlate& slate,
                      std::size_t top_k) {
  return representation(frame_distribution(corpus), slate, corpus, top_k);
}

double activation(const CategoricalDistribution& corpus_sentiment,
                  const RankedSlate& slate, const Corpus& corpus, std::size_t n_bins,
                  std::size_t top_k) {
  if (top_k == 0) throw InvalidArgument("top_k must be at least 1");
  const std::size_t n = std::min(top_k, slate.entries.size());
  std::vector<std::string> bins;
  bins.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    bins.push_back(
        sentiment_bin(corpus.article(slate.entries[i].article_id).sentiment, n_bins));
  }
  return jsd(corpus_sentiment, categorical_distribution(bins));
}

double activation(const Corpus& corpus, const RankedSlate& slate, std::size_t n_bins,
                  std::size_t top_k) {
  return activation(sentiment_distribution(corpus, n_bins), slate, corpus, n_bins, top_k);
}

NormativeContext NormativeContext::of(const Corpus& corpus, std::size_t n_bins) {
  return {frame_distribution(corpus), sentiment_distribution(corpus, n_bins)};
}

ImpressionNormative evaluate_normative_impression(const Corpus& corpus,
                                                  const NormativeContext& context,
                                                  const Impression& impression,
                                                  const RankedSlate& slate,
                                                  const NormativeConfig& config) {
  ImpressionNormative row;
  row.impression_id = impression.id;
  row.cal_category = calibration(impression, slate, corpus, Feature::Category,
                                 config.discount, config.top_k);
  row.cal_frame = calibration(impression, slate, corpus, Feature::Frame,
                              config.discount, config.top_k);
  row.rep_frame = representation(context.frames, slate, corpus, config.top_k);
  row.activation =
      activation(context.sentiment, slate, corpus, config.n_bins, config.top_k);
  return row;
}

NormativeReport summarize_normative(std::vector<ImpressionNormative> rows) {
  if (rows.empty()) throw InvalidArgument("empty evaluation set");
  NormativeReport report;
  for (const auto& r : rows) {
    report.cal_category += r.cal_category;
    report.cal_frame += r.cal_frame;
    report.rep_frame += r.rep_frame;
    report.activation += r.activation;
  }
  const double n = static_cast<double>(rows.size());
  report.cal_category /= n;
  report.cal_frame /= n;
  report.rep_frame /= n;
  report.activation /= n;
  report.per_impression = std::move(rows);
  return report;
}

NormativeReport evaluate_normative(const Corpus& corpus,
                                   std::span<const Impression> impressions,
                                   std::span<const RankedSlate> slates,
                                   const NormativeConfig& config) {
  if (impressions.size() != slates.size()) {
    throw InvalidArgument("slates and impressions are not aligned");
  }
  if (impressions.empty()) throw InvalidArgument("empty evaluation set");
  const auto context = NormativeContext::of(corpus, config.n_bins);
  std::vector<ImpressionNormative> rows;
  rows.reserve(impressions.size());
  for (std::size_t i = 0; i < impressions.size(); ++i) {
    rows.push_back(
        evaluate_normative_impression(corpus, context, impressions[i], slates[i], config));
  }
  return summarize_normative(std::move(rows));
}

void write_metric_dump(std::ostream& out, const NormativeReport& report) {
  out << "impression_id\tcal_c\tcal_f\trep_f\tact\n";
  for (const auto& r : report.per_impression) {
    out << r.impression_id << '\t' << text::shortest(r.cal_category) << '\t'
        << text::shortest(r.cal_frame) << '\t' << text::shortest(r.rep_frame) << '\t'
        << text::shortest(r.activation) << '\n';
  }
}

}  // namespace framerank
