#include "framerank/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "framerank/error.hpp"

namespace framerank {

ContingencyTable::ContingencyTable(std::vector<std::string> row_labels,
                                   std::vector<std::string> column_labels,
                                   std::vector<std::uint64_t> counts)
    : row_labels_(std::move(row_labels)),
      column_labels_(std::move(column_labels)),
      counts_(std::move(counts)) {
  if (counts_.size() != row_labels_.size() * column_labels_.size()) {
    throw InvalidArgument("contingency table size does not match its labels");
  }
}

ContingencyTable ContingencyTable::from_rows(
    const std::vector<std::vector<std::uint64_t>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  std::vector<std::uint64_t> counts;
  std::vector<std::string> row_labels, col_labels;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw InvalidArgument("ragged contingency table");
    counts.insert(counts.end(), rows[r].begin(), rows[r].end());
    row_labels.push_back("r" + std::to_string(r));
  }
  for (std::size_t c = 0; c < cols; ++c) col_labels.push_back("c" + std::to_string(c));
  return {std::move(row_labels), std::move(col_labels), std::move(counts)};
}

std::uint64_t ContingencyTable::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

ContingencyTable category_frame_table(const Corpus& corpus) {
  std::set<std::string> categories;
  std::set<FrameLabel> frames;
  for (const auto& a : corpus.articles()) {
    categories.insert(a.category);
    frames.insert(a.frame);
  }
  std::vector<std::string> rows(categories.begin(), categories.end());
  std::vector<std::string> cols;
  std::map<FrameLabel, std::size_t> col_of;
  for (auto f : frames) {
    col_of[f] = cols.size();
    cols.emplace_back(frame_name(f));
  }
  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < rows.size(); ++i) row_of[rows[i]] = i;
  std::vector<std::uint64_t> counts(rows.size() * cols.size(), 0);
  for (const auto& a : corpus.articles()) {
    counts[row_of[a.category] * cols.size() + col_of[a.frame]] += 1;
  }
  return {std::move(rows), std::move(cols), std::move(counts)};
}

namespace {

struct Marginals {
  std::vector<double> rows;
  std::vector<double> cols;
  double total = 0.0;
  std::size_t nonzero_rows = 0;
  std::size_t nonzero_cols = 0;
};

Marginals marginals(const ContingencyTable& t) {
  Marginals m;
  m.rows.assign(t.rows(), 0.0);
  m.cols.assign(t.columns(), 0.0);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.columns(); ++c) {
      const double v = static_cast<double>(t.at(r, c));
      m.rows[r] += v;
      m.cols[c] += v;
      m.total += v;
    }
  }
  for (double v : m.rows) m.nonzero_rows += v > 0.0;
  for (double v : m.cols) m.nonzero_cols += v > 0.0;
  return m;
}

}  // namespace

double chi_squared(const ContingencyTable& table) {
  const auto m = marginals(table);
  if (!(m.total > 0.0)) throw InvalidArgument("contingency table is empty");
  double chi2 = 0.0;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (m.rows[r] == 0.0) continue;
    for (std::size_t c = 0; c < table.columns(); ++c) {
      if (m.cols[c] == 0.0) continue;
      const double expected = m.rows[r] * m.cols[c] / m.total;
      const double diff = static_cast<double>(table.at(r, c)) - expected;
      chi2 += diff * diff / expected;
    }
  }
  return chi2;
}

double cramers_v(const ContingencyTable& table) {
  const auto m = marginals(table);
  if (m.nonzero_rows < 2 || m.nonzero_cols < 2) {
    throw InvalidArgument("Cramer's V needs two nonzero rows and two nonzero columns");
  }
  const double k = static_cast<double>(std::min(m.nonzero_rows, m.nonzero_cols)) - 1.0;
  const double v = std::sqrt(chi_squared(table) / (m.total * k));
  return std::min(v, 1.0);
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("incomplete beta needs a, b > 0");
  if (x < 0.0 || x > 1.0) throw InvalidArgument("incomplete beta needs x in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  // The continued fraction converges fast only below the mean.
  if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - incomplete_beta(b, a, 1.0 - x);

  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 10000;

  // Modified Lentz evaluation.
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double md = m;
    const double even = md * (b - md) * x / ((a + 2.0 * md - 1.0) * (a + 2.0 * md));
    d = 1.0 + even * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + even / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    const double odd =
        -(a + md) * (a + b + md) * x / ((a + 2.0 * md) * (a + 2.0 * md + 1.0));
    d = 1.0 + odd * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + odd / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return std::exp(log_front) * h / a;
  }
  throw Error("incomplete beta continued fraction did not converge");
}

double f_survival(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw InvalidArgument("F distribution needs positive df");
  if (std::isinf(f)) return 0.0;
  if (!(f > 0.0)) return 1.0;
  return incomplete_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f));
}

AnovaResult anova_eta_squared(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw InvalidArgument("ANOVA needs at least two groups");
  std::size_t n = 0;
  bool has_pair = false;
  double sum = 0.0;
  for (const auto& g : groups) {
    if (g.empty()) throw InvalidArgument("ANOVA group without observations");
    has_pair = has_pair || g.size() >= 2;
    n += g.size();
    for (double v : g) sum += v;
  }
  if (!has_pair) throw InvalidArgument("ANOVA needs a group with two observations");
  const double grand = sum / static_cast<double>(n);

  AnovaResult r;
  double ss_within = 0.0;
  for (const auto& g : groups) {
    const double mean =
        std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    r.ss_between += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
    for (double v : g) {
      ss_within += (v - mean) * (v - mean);
      r.ss_total += (v - grand) * (v - grand);
    }
  }
  if (!(r.ss_total > 0.0)) throw InvalidArgument("zero total variance: eta squared undefined");

  r.eta_squared = std::clamp(r.ss_between / r.ss_total, 0.0, 1.0);
  r.df_between = static_cast<double>(groups.size() - 1);
  r.df_within = static_cast<double>(n - groups.size());
  const double ms_within = ss_within / r.df_within;
  const double ms_between = r.ss_between / r.df_between;
  if (ms_within > 0.0) {
    r.f_statistic = ms_between / ms_within;
  } else {
    r.f_statistic = std::numeric_limits<double>::infinity();
  }
  r.p_value = f_survival(r.f_statistic, r.df_between, r.df_within);
  return r;
}

CorpusStatistics corpus_statistics(const Corpus& corpus, bool absolute_sentiment) {
  CorpusStatistics s{category_frame_table(corpus), 0.0, 0.0, AnovaResult{}, false, 0};
  s.absolute_sentiment = absolute_sentiment;
  s.chi2 = chi_squared(s.table);
  s.cramers_v = cramers_v(s.table);

  std::map<FrameLabel, std::vector<double>> by_frame;
  for (const auto& a : corpus.articles()) {
    by_frame[a.frame].push_back(absolute_sentiment ? std::abs(a.sentiment) : a.sentiment);
  }
  std::vector<std::vector<double>> groups;
  for (auto& [frame, values] : by_frame) groups.push_back(std::move(values));
  s.anova_groups = groups.size();
  s.anova = anova_eta_squared(groups);
  return s;
}

}  // namespace framerank
