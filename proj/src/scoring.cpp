#include "framerank/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "framerank/error.hpp"
#include "framerank/log.hpp"
#include "framerank/text.hpp"

namespace framerank {
namespace {

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

std::vector<std::size_t> rows_of(const std::vector<std::string>& ids,
                                 const Corpus& corpus) {
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (const auto& id : ids) rows.push_back(corpus.article(id).row);
  return rows;
}

}  // namespace

std::vector<std::string> RankedSlate::article_ids() const {
  std::vector<std::string> ids;
  ids.reserve(entries.size());
  for (const auto& e : entries) ids.push_back(e.article_id);
  return ids;
}

std::vector<double> RankedSlate::final_scores() const {
  std::vector<double> s;
  s.reserve(entries.size());
  for (const auto& e : entries) s.push_back(e.score.final_score);
  return s;
}

double mean_dot_score(const EmbeddingMatrix& space, std::size_t candidate_row,
                      std::span<const std::size_t> history_rows) {
  if (history_rows.empty()) throw InvalidArgument("empty history");
  const auto candidate = space.row(candidate_row);
  double total = 0.0;
  for (std::size_t r : history_rows) total += dot(candidate, space.row(r));
  return total / static_cast<double>(history_rows.size());
}

double content_score(std::size_t candidate_row,
                     std::span<const std::size_t> history_rows,
                     const EmbeddingMatrix& space) {
  return mean_dot_score(space, candidate_row, history_rows);
}

double frame_score(std::size_t candidate_row,
                   std::span<const std::size_t> history_rows,
                   const EmbeddingMatrix& frame_space) {
  return mean_dot_score(frame_space, candidate_row, history_rows);
}

std::vector<double> zscore(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("z-score of an empty list");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  double scale = 0.0;
  for (double v : values) {
    ss += (v - mean) * (v - mean);
    scale = std::max(scale, std::abs(v));
  }
  const double sd = std::sqrt(ss / n);
  std::vector<double> out(values.size(), 0.0);
  // Spread at rounding level is treated as no spread.
  if (!(sd > 1e-12 * scale)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

std::vector<double> aggregate(std::span<const double> content_z,
                              std::span<const double> frame_z, double lambda) {
  if (content_z.size() != frame_z.size()) {
    throw InvalidArgument("aggregate: " + std::to_string(content_z.size()) +
                          " content scores vs " + std::to_string(frame_z.size()) +
                          " frame scores");
  }
  if (!std::isfinite(lambda)) throw InvalidArgument("lambda is not finite");
  if (lambda < -1.0 || lambda > 1.0) {
    warn("lambda " + text::shortest(lambda) + " outside [-1, 1]");
  }
  std::vector<double> out(content_z.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = content_z[i] + lambda * frame_z[i];
  }
  return out;
}

RankedSlate rank_slate(const Impression& impression, const Corpus& corpus,
                       double lambda, const RankOptions& options) {
  if (impression.history.empty()) {
    throw InvalidArgument("impression '" + impression.id + "' has an empty history");
  }
  const auto history = rows_of(impression.history, corpus);
  const auto candidates = rows_of(impression.candidates, corpus);
  const std::size_t n = candidates.size();

  std::vector<double> content_raw(n), frame_raw(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    content_raw[i] = content_score(candidates[i], history, corpus.content());
    if (options.use_frame) {
      frame_raw[i] = frame_score(candidates[i], history, corpus.frame());
    }
  }
  const auto content_z = zscore(content_raw);
  const auto frame_z = options.use_frame ? zscore(frame_raw) : std::vector<double>(n, 0.0);
  const auto final_scores = options.use_frame ? aggregate(content_z, frame_z, lambda)
                                              : content_z;

  RankedSlate slate;
  slate.impression_id = impression.id;
  slate.lambda = lambda;
  slate.entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    slate.entries.push_back(
        {impression.candidates[i], i,
         {content_raw[i], frame_raw[i], content_z[i], frame_z[i], final_scores[i]}});
  }
  std::sort(slate.entries.begin(), slate.entries.end(),
            [](const SlateEntry& a, const SlateEntry& b) {
              if (a.score.final_score != b.score.final_score) {
                return a.score.final_score > b.score.final_score;
              }
              if (a.article_id != b.article_id) return a.article_id < b.article_id;
              return a.candidate_index < b.candidate_index;
            });
  return slate;
}

void write_slate_dump(std::ostream& out, std::span<const RankedSlate> slates) {
  out << "impression_id\trank\tarticle_id\tcontent_z\tframe_z\tfinal\n";
  for (const auto& slate : slates) {
    for (std::size_t r = 0; r < slate.entries.size(); ++r) {
      const auto& e = slate.entries[r];
      out << slate.impression_id << '\t' << (r + 1) << '\t' << e.article_id << '\t'
          << text::shortest(e.score.content_z) << '\t'
          << text::shortest(e.score.frame_z) << '\t'
          << text::shortest(e.score.final_score) << '\n';
    }
  }
}

std::vector<RankedSlate> read_slate_dump(std::istream& in,
                                         std::span<const Impression> impressions) {
  struct Row {
    std::size_t rank;
    SlateEntry entry;
  };
  std::map<std::string, std::vector<Row>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.rfind("impression_id\t", 0) == 0) continue;
    const auto f = text::split(line, '\t');
    Row row;
    if (f.size() != 6 || !text::parse_size(f[1], row.rank) ||
        !text::parse_double(f[3], row.entry.score.content_z) ||
        !text::parse_double(f[4], row.entry.score.frame_z) ||
        !text::parse_double(f[5], row.entry.score.final_score)) {
      throw CorpusError("slate dump line " + std::to_string(lineno) + ": malformed");
    }
    row.entry.article_id = std::string(f[2]);
    rows[std::string(f[0])].push_back(std::move(row));
  }

  std::vector<RankedSlate> slates;
  for (const auto& imp : impressions) {
    auto it = rows.find(imp.id);
    if (it == rows.end()) {
      throw CorpusError("slate dump has no rows for impression '" + imp.id + "'");
    }
    auto& entries = it->second;
    std::sort(entries.begin(), entries.end(),
              [](const Row& a, const Row& b) { return a.rank < b.rank; });
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < imp.candidates.size(); ++i) {
      position.emplace(imp.candidates[i], i);
    }
    RankedSlate slate;
    slate.impression_id = imp.id;
    for (auto& row : entries) {
      auto pos = position.find(row.entry.article_id);
      if (pos == position.end()) {
        throw CorpusError("slate for '" + imp.id + "' ranks non-candidate '" +
                          row.entry.article_id + "'");
      }
      row.entry.candidate_index = pos->second;
      slate.entries.push_back(row.entry);
    }
    slates.push_back(std::move(slate));
  }
  return slates;
}

}  // namespace framerank
