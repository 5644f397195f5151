#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "framerank/corpus.hpp"

namespace framerank {

struct ScoreBreakdown {
  double content_raw = 0.0;
  double frame_raw = 0.0;
  double content_z = 0.0;
  double frame_z = 0.0;
  double final_score = 0.0;  // content_z + lambda * frame_z
};

struct SlateEntry {
  std::string article_id;
  std::size_t candidate_index = 0;  // position in Impression::candidates
  ScoreBreakdown score;
};

// Candidates of one impression, best first.
struct RankedSlate {
  std::string impression_id;
  double lambda = 0.0;
  std::vector<SlateEntry> entries;

  std::vector<std::string> article_ids() const;
  std::vector<double> final_scores() const;
};

// Mean dot product between a candidate row and each history row.
// Throws InvalidArgument for an empty history or out-of-range rows.
double mean_dot_score(const EmbeddingMatrix& space, std::size_t candidate_row,
                      std::span<const std::size_t> history_rows);

// Content relevance in the content space (mean-pooled dot products).
double content_score(std::size_t candidate_row,
                     std::span<const std::size_t> history_rows,
                     const EmbeddingMatrix& space);

// Same contract as content_score, evaluated in the frame space.
double frame_score(std::size_t candidate_row,
                   std::span<const std::size_t> history_rows,
                   const EmbeddingMatrix& frame_space);

// Population z-scores. A list with zero spread (relative to its magnitude)
// maps to all zeros. Throws InvalidArgument on an empty list.
std::vector<double> zscore(std::span<const double> values);

// content_z + lambda * frame_z element-wise. Lambda outside [-1, 1] is
// accepted with a warning.
std::vector<double> aggregate(std::span<const double> content_z,
                              std::span<const double> frame_z, double lambda);

struct RankOptions {
  // When false the frame score is never computed and every frame field of
  // the breakdown stays zero (content-only baseline).
  bool use_frame = true;
};

RankedSlate rank_slate(const Impression& impression, const Corpus& corpus,
                       double lambda, const RankOptions& options = {});

// Audit dump, one line per slate position:
// impression_id  rank  article_id  content_z  frame_z  final
void write_slate_dump(std::ostream& out, std::span<const RankedSlate> slates);

// Reads a dump produced by write_slate_dump (or by an external ranker that
// follows the same columns). Only article order and final scores are
// recovered; candidate positions are resolved against `impressions`, and a
// slate is returned for each impression in that order.
std::vector<RankedSlate> read_slate_dump(std::istream& in,
                                         std::span<const Impression> impressions);

}  // namespace framerank
