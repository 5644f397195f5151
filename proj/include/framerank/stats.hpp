#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "framerank/corpus.hpp"

namespace framerank {

// Counts of (row label, column label) pairs, stored row-major.
class ContingencyTable {
public:
  ContingencyTable(std::vector<std::string> row_labels,
                   std::vector<std::string> column_labels,
                   std::vector<std::uint64_t> counts);
  // Unlabeled table from nested rows; throws on ragged input.
  static ContingencyTable from_rows(const std::vector<std::vector<std::uint64_t>>& rows);

  std::size_t rows() const { return row_labels_.size(); }
  std::size_t columns() const { return column_labels_.size(); }
  std::uint64_t at(std::size_t r, std::size_t c) const { return counts_[r * columns() + c]; }
  std::uint64_t total() const;
  const std::vector<std::string>& row_labels() const { return row_labels_; }
  const std::vector<std::string>& column_labels() const { return column_labels_; }

private:
  std::vector<std::string> row_labels_;
  std::vector<std::string> column_labels_;
  std::vector<std::uint64_t> counts_;
};

// Category x frame counts over all articles. Rows are sorted categories,
// columns the frames that occur, in frame order.
ContingencyTable category_frame_table(const Corpus& corpus);

// Pearson chi-squared statistic against independence. Rows and columns with
// zero marginals are ignored.
double chi_squared(const ContingencyTable& table);

// sqrt(chi2 / (n (min(r, c) - 1))) without bias correction. Throws
// InvalidArgument unless at least two rows and two columns have nonzero
// marginals.
double cramers_v(const ContingencyTable& table);

struct AnovaResult {
  double eta_squared = 0.0;
  double p_value = 1.0;
  double f_statistic = 0.0;
  double df_between = 0.0;
  double df_within = 0.0;
  double ss_between = 0.0;
  double ss_total = 0.0;
};

// One-way ANOVA. Requires at least two groups, no empty group, and at least
// one group with two observations. Throws InvalidArgument when the total
// variance is zero.
AnovaResult anova_eta_squared(std::span<const std::vector<double>> groups);

// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

// P(F > f) for an F(d1, d2) variable.
double f_survival(double f, double d1, double d2);

struct CorpusStatistics {
  ContingencyTable table;
  double chi2 = 0.0;
  double cramers_v = 0.0;
  AnovaResult anova;
  bool absolute_sentiment = false;
  std::size_t anova_groups = 0;
};

// Cramer's V between category and frame, and ANOVA of sentiment grouped by
// frame (signed polarity unless `absolute_sentiment`).
CorpusStatistics corpus_statistics(const Corpus& corpus, bool absolute_sentiment = false);

}  // namespace framerank
