// Straight-line reference implementations used to cross-check the library.
// They share no code with src/ beyond the corpus data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "framerank/corpus.hpp"
#include "framerank/scoring.hpp"

namespace oracle {

using Dist = std::map<std::string, double>;

// Pairwise count; ties between a positive and a negative count half.
inline double auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  double doubled = 0.0, pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i]) pos += 1.0;
    else neg += 1.0;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      if (scores[i] > scores[j]) doubled += 2.0;
      else if (scores[i] == scores[j]) doubled += 1.0;
    }
  }
  return doubled / (2.0 * pos * neg);
}

inline double mrr(const std::vector<std::uint8_t>& ranked) {
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i]) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

inline double ndcg(const std::vector<std::uint8_t>& ranked, std::size_t k) {
  double dcg = 0.0;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
    if (ranked[i]) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  std::vector<std::uint8_t> ideal = ranked;
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t i = 0; i < ideal.size() && i < k; ++i) {
    if (ideal[i]) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return idcg == 0.0 ? 0.0 : dcg / idcg;
}

inline double prob(const Dist& d, const std::string& k) {
  auto it = d.find(k);
  return it == d.end() ? 0.0 : it->second;
}

inline std::set<std::string> keys(const Dist& p, const Dist& q) {
  std::set<std::string> s;
  for (const auto& [k, v] : p) s.insert(k);
  for (const auto& [k, v] : q) s.insert(k);
  return s;
}

inline double jsd(const Dist& p, const Dist& q) {
  double out = 0.0;
  for (const auto& k : keys(p, q)) {
    const double a = prob(p, k), b = prob(q, k), m = (a + b) / 2.0;
    if (a > 0.0) out += 0.5 * a * std::log2(a / m);
    if (b > 0.0) out += 0.5 * b * std::log2(b / m);
  }
  return out;
}

// Sum over the support of Q * f(P / Q) for the Jensen-Shannon generator
// f(t) = t/2 log2(2t/(t+1)) + 1/2 log2(2/(t+1)).
inline double dstar_jsd(const Dist& p, const Dist& q) {
  double out = 0.0;
  for (const auto& k : keys(p, q)) {
    const double a = prob(p, k), b = prob(q, k);
    if (b == 0.0) {
      out += a / 2.0;
    } else if (a == 0.0) {
      out += b / 2.0;
    } else {
      const double t = a / b;
      out += b * (t / 2.0 * std::log2(2.0 * t / (t + 1.0)) + 0.5 * std::log2(2.0 / (t + 1.0)));
    }
  }
  return out;
}

inline Dist frequencies(const std::vector<std::string>& labels,
                        const std::vector<double>* w = nullptr) {
  Dist d;
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double v = w ? (*w)[i] : 1.0;
    d[labels[i]] += v;
    total += v;
  }
  for (auto& [k, v] : d) v /= total;
  return d;
}

inline std::vector<std::string> top_labels(const framerank::RankedSlate& slate,
                                           const framerank::Corpus& corpus, std::size_t k,
                                           bool frame) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < slate.entries.size() && i < k; ++i) {
    const auto& a = corpus.article(slate.entries[i].article_id);
    out.push_back(frame ? std::string(framerank::frame_name(a.frame)) : a.category);
  }
  return out;
}

inline double calibration(const framerank::Impression& imp, const framerank::RankedSlate& slate,
                          const framerank::Corpus& corpus, bool frame, std::size_t k) {
  std::vector<std::string> hist;
  for (const auto& id : imp.history) {
    const auto& a = corpus.article(id);
    hist.push_back(frame ? std::string(framerank::frame_name(a.frame)) : a.category);
  }
  const auto top = top_labels(slate, corpus, k, frame);
  std::vector<double> w;
  for (std::size_t r = 1; r <= top.size(); ++r) w.push_back(1.0 / std::log2(r + 1.0));
  return jsd(frequencies(hist), frequencies(top, &w));
}

inline Dist corpus_frames(const framerank::Corpus& corpus) {
  std::vector<std::string> labels;
  for (const auto& a : corpus.articles()) labels.emplace_back(framerank::frame_name(a.frame));
  return frequencies(labels);
}

inline double representation(const framerank::RankedSlate& slate,
                             const framerank::Corpus& corpus, std::size_t k) {
  return jsd(corpus_frames(corpus), frequencies(top_labels(slate, corpus, k, true)));
}

inline std::string bin_of(double s, std::size_t bins) {
  std::size_t b = 0;
  const double a = std::fabs(s);
  while (b + 1 < bins && a >= static_cast<double>(b + 1) / static_cast<double>(bins)) ++b;
  return std::to_string(b);
}

inline double activation(const framerank::RankedSlate& slate, const framerank::Corpus& corpus,
                         std::size_t bins, std::size_t k) {
  std::vector<std::string> all, top;
  for (const auto& a : corpus.articles()) all.push_back(bin_of(a.sentiment, bins));
  for (std::size_t i = 0; i < slate.entries.size() && i < k; ++i) {
    top.push_back(bin_of(corpus.article(slate.entries[i].article_id).sentiment, bins));
  }
  return jsd(frequencies(all), frequencies(top));
}

// Mean dot product with the history rows, z-scored per impression, then
// content_z + lambda * frame_z.
inline std::vector<double> final_scores(const framerank::Impression& imp,
                                        const framerank::Corpus& corpus, double lambda) {
  auto raw = [&](const framerank::EmbeddingMatrix& m) {
    std::vector<double> out;
    for (const auto& c : imp.candidates) {
      const auto cr = m.row(corpus.article(c).row);
      double s = 0.0;
      for (const auto& h : imp.history) {
        const auto hr = m.row(corpus.article(h).row);
        for (std::size_t d = 0; d < m.dim(); ++d) s += double(cr[d]) * double(hr[d]);
      }
      out.push_back(s / static_cast<double>(imp.history.size()));
    }
    return out;
  };
  auto z = [](std::vector<double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(v.size()));
    for (double& x : v) x = sd < 1e-9 ? 0.0 : (x - mean) / sd;
    return v;
  };
  const auto c = z(raw(corpus.content()));
  const auto f = z(raw(corpus.frame()));
  std::vector<double> out;
  for (std::size_t i = 0; i < c.size(); ++i) out.push_back(c[i] + lambda * f[i]);
  return out;
}

// Literal double-loop chi-squared and Cramer's V.
inline double cramers_v(const std::vector<std::vector<double>>& t) {
  std::vector<double> rs(t.size(), 0.0), cs(t[0].size(), 0.0);
  double n = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t[i].size(); ++j) {
      rs[i] += t[i][j];
      cs[j] += t[i][j];
      n += t[i][j];
    }
  }
  double chi = 0.0;
  std::size_t r = 0, c = 0;
  for (double v : rs) r += v > 0.0;
  for (double v : cs) c += v > 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t[i].size(); ++j) {
      const double e = rs[i] * cs[j] / n;
      if (e > 0.0) chi += (t[i][j] - e) * (t[i][j] - e) / e;
    }
  }
  return std::sqrt(chi / (n * static_cast<double>(std::min(r, c) - 1)));
}

inline double eta_squared(const std::vector<std::vector<double>>& groups) {
  double n = 0.0, sum = 0.0;
  for (const auto& g : groups) {
    for (double x : g) {
      sum += x;
      n += 1.0;
    }
  }
  const double grand = sum / n;
  double between = 0.0, total = 0.0;
  for (const auto& g : groups) {
    double m = 0.0;
    for (double x : g) m += x;
    m /= static_cast<double>(g.size());
    between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double x : g) total += (x - grand) * (x - grand);
  }
  return between / total;
}

inline Dist random_dist(std::mt19937_64& rng, std::size_t max_labels, double zero_rate = 0.3) {
  std::uniform_int_distribution<std::size_t> n(1, max_labels);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t k = n(rng);
  Dist d;
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (u(rng) < zero_rate) continue;
    const double v = u(rng) + 1e-3;
    d["l" + std::to_string(i)] = v;
    total += v;
  }
  if (d.empty()) {
    d["l0"] = 1.0;
    total = 1.0;
  }
  for (auto& [key, v] : d) v /= total;
  return d;
}

}  // namespace oracle
