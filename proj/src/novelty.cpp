#include "framerank/novelty.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

#include "framerank/divergence.hpp"
#include "framerank/error.hpp"
#include "framerank/text.hpp"

namespace framerank {
namespace {

std::vector<FrameLabel> top_frames(const RankedSlate& slate, const Corpus& corpus,
                                   std::size_t k) {
  if (k == 0) throw InvalidArgument("k must be at least 1");
  const std::size_t n = std::min(k, slate.entries.size());
  std::vector<FrameLabel> frames;
  frames.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    frames.push_back(corpus.article(slate.entries[i].article_id).frame);
  }
  return frames;
}

std::vector<FrameLabel> history_frames(const Impression& impression,
                                       const Corpus& corpus) {
  if (impression.history.empty()) {
    throw InvalidArgument("impression '" + impression.id + "' has an empty history");
  }
  std::vector<FrameLabel> frames;
  frames.reserve(impression.history.size());
  for (const auto& id : impression.history) frames.push_back(corpus.article(id).frame);
  return frames;
}

CategoricalDistribution distribution_of(const std::vector<FrameLabel>& frames) {
  std::vector<std::string> labels;
  labels.reserve(frames.size());
  for (auto f : frames) labels.emplace_back(frame_name(f));
  return categorical_distribution(labels);
}

}  // namespace

std::size_t unique_frames(const RankedSlate& slate, const Corpus& corpus, std::size_t k) {
  const auto frames = top_frames(slate, corpus, k);
  return std::set<FrameLabel>(frames.begin(), frames.end()).size();
}

std::size_t novel_frames(const Impression& impression, const RankedSlate& slate,
                         const Corpus& corpus, std::size_t k) {
  const auto seen = history_frames(impression, corpus);
  const std::set<FrameLabel> history(seen.begin(), seen.end());
  const auto frames = top_frames(slate, corpus, k);
  std::set<FrameLabel> novel;
  for (auto f : frames) {
    if (!history.count(f)) novel.insert(f);
  }
  return novel.size();
}

double history_kl(const Impression& impression, const RankedSlate& slate,
                  const Corpus& corpus, std::size_t k) {
  const auto history = distribution_of(history_frames(impression, corpus));
  const auto recommended = distribution_of(top_frames(slate, corpus, k));
  return smoothed_kl(recommended, history);
}

ImpressionNovelty evaluate_novelty_impression(const Corpus& corpus,
                                              const Impression& impression,
                                              const RankedSlate& slate, std::size_t k) {
  return {impression.id, impression.user, unique_frames(slate, corpus, k),
          novel_frames(impression, slate, corpus, k),
          history_kl(impression, slate, corpus, k)};
}

NoveltyReport summarize_novelty(std::vector<ImpressionNovelty> rows) {
  if (rows.empty()) throw InvalidArgument("empty evaluation set");
  std::map<std::string, UserNovelty> users;
  for (const auto& r : rows) {
    auto& u = users[r.user_id];
    u.user_id = r.user_id;
    u.impressions += 1;
    u.unique += static_cast<double>(r.unique);
    u.novel += static_cast<double>(r.novel);
    u.kl += r.kl;
  }
  NoveltyReport report;
  for (auto& [id, u] : users) {
    const double n = static_cast<double>(u.impressions);
    u.unique /= n;
    u.novel /= n;
    u.kl /= n;
    report.avg_unique_frames += u.unique;
    report.avg_novel_frames += u.novel;
    report.avg_kl += u.kl;
    report.per_user.push_back(u);
  }
  const double n_users = static_cast<double>(report.per_user.size());
  report.avg_unique_frames /= n_users;
  report.avg_novel_frames /= n_users;
  report.avg_kl /= n_users;
  report.per_impression = std::move(rows);
  return report;
}

NoveltyReport evaluate_novelty(const Corpus& corpus,
                               std::span<const Impression> impressions,
                               std::span<const RankedSlate> slates, std::size_t k) {
  if (impressions.size() != slates.size()) {
    throw InvalidArgument("slates and impressions are not aligned");
  }
  std::vector<ImpressionNovelty> rows;
  rows.reserve(impressions.size());
  for (std::size_t i = 0; i < impressions.size(); ++i) {
    rows.push_back(evaluate_novelty_impression(corpus, impressions[i], slates[i], k));
  }
  return summarize_novelty(std::move(rows));
}

void write_user_dump(std::ostream& out, const NoveltyReport& report) {
  out << "user_id\tunique\tnovel\tkl\n";
  for (const auto& u : report.per_user) {
    out << u.user_id << '\t' << text::shortest(u.unique) << '\t'
        << text::shortest(u.novel) << '\t' << text::shortest(u.kl) << '\n';
  }
}

}  // namespace framerank
