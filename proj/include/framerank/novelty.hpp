#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "framerank/corpus.hpp"
#include "framerank/normative.hpp"
#include "framerank/scoring.hpp"

namespace framerank {

// Distinct frames among the top-k of a slate.
std::size_t unique_frames(const RankedSlate& slate, const Corpus& corpus,
                          std::size_t k = kDefaultTopK);

// Frames in the top-k that never occur in the impression's history.
std::size_t novel_frames(const Impression& impression, const RankedSlate& slate,
                         const Corpus& corpus, std::size_t k = kDefaultTopK);

// KL(top-k frame distribution || history frame distribution) in bits, both
// epsilon-smoothed over their joint support.
double history_kl(const Impression& impression, const RankedSlate& slate,
                  const Corpus& corpus, std::size_t k = kDefaultTopK);

struct ImpressionNovelty {
  std::string impression_id;
  std::string user_id;
  std::size_t unique = 0;
  std::size_t novel = 0;
  double kl = 0.0;
};

struct UserNovelty {
  std::string user_id;
  std::size_t impressions = 0;
  double unique = 0.0;
  double novel = 0.0;
  double kl = 0.0;
};

struct NoveltyReport {
  double avg_unique_frames = 0.0;
  double avg_novel_frames = 0.0;
  double avg_kl = 0.0;
  std::vector<ImpressionNovelty> per_impression;
  std::vector<UserNovelty> per_user;  // sorted by user id
};

ImpressionNovelty evaluate_novelty_impression(const Corpus& corpus,
                                              const Impression& impression,
                                              const RankedSlate& slate, std::size_t k);

// Averages impressions per user, then users.
NoveltyReport summarize_novelty(std::vector<ImpressionNovelty> rows);

NoveltyReport evaluate_novelty(const Corpus& corpus,
                               std::span<const Impression> impressions,
                               std::span<const RankedSlate> slates,
                               std::size_t k = kDefaultTopK);

// user_id  unique  novel  kl
void write_user_dump(std::ostream& out, const NoveltyReport& report);

}  // namespace framerank
