#include "framerank/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

#include "framerank/error.hpp"

namespace framerank {
namespace {

using Vec = std::vector<double>;

Vec gaussian(std::mt19937_64& rng, std::size_t dim, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(dim);
  for (double& x : v) x = normal(rng) * scale;
  return v;
}

void normalize(Vec& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
}

std::vector<Vec> centers_for(const std::vector<Vec>& given, std::size_t count,
                             std::size_t dim, std::mt19937_64& rng, const char* what) {
  if (!given.empty()) {
    if (given.size() != count) {
      throw InvalidArgument(std::string(what) + " centers: expected one per frame");
    }
    std::vector<Vec> out = given;
    for (auto& c : out) {
      if (c.size() != dim) throw InvalidArgument(std::string(what) + " center dimension");
      normalize(c);
    }
    return out;
  }
  std::vector<Vec> out;
  for (std::size_t i = 0; i < count; ++i) {
    auto c = gaussian(rng, dim, 1.0);
    normalize(c);
    out.push_back(std::move(c));
  }
  return out;
}

std::string make_id(char prefix, std::size_t i, std::size_t width) {
  std::string digits = std::to_string(i);
  return prefix + std::string(width > digits.size() ? width - digits.size() : 0, '0') +
         digits;
}

std::size_t width_for(std::size_t n) { return std::to_string(n).size(); }

std::size_t sample_index(std::mt19937_64& rng, const std::vector<double>& weights) {
  std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
  return dist(rng);
}

}  // namespace

std::vector<FrameLabel> SynthSpec::active_frames() const {
  if (!frames.empty()) return frames;
  const auto& all = all_frames();
  return {all.begin(), all.end()};
}

void SynthSpec::validate() const {
  if (n_articles == 0) throw InvalidArgument("synthetic corpus needs articles");
  if (dim == 0 || frame_dim == 0) throw InvalidArgument("embedding dimension must be positive");
  if (n_users == 0) throw InvalidArgument("synthetic corpus needs users");
  if (n_categories == 0) throw InvalidArgument("synthetic corpus needs categories");
  const auto f = active_frames();
  if (std::set<FrameLabel>(f.begin(), f.end()).size() != f.size()) {
    throw InvalidArgument("frame list repeats a frame");
  }
  if (!frame_weights.empty() && frame_weights.size() != f.size()) {
    throw InvalidArgument("frame_weights must have one entry per frame");
  }
  if (!frame_sentiment.empty() && frame_sentiment.size() != f.size()) {
    throw InvalidArgument("frame_sentiment must have one entry per frame");
  }
  if (history_min == 0 || history_min > history_max) {
    throw InvalidArgument("history length range is empty");
  }
  if (candidates < 2) throw InvalidArgument("impressions need at least two candidates");
  if (clicks == 0 || clicks >= candidates) {
    throw InvalidArgument("clicks must be in [1, candidates)");
  }
  if (!frame_weights.empty()) {
    double total = 0.0;
    for (double w : frame_weights) {
      if (!(w >= 0.0)) throw InvalidArgument("frame_weights must be non-negative");
      total += w;
    }
    if (!(total > 0.0)) throw InvalidArgument("frame_weights sum to zero");
  }
  if (frame_mainstream < 0.0) throw InvalidArgument("frame_mainstream must be non-negative");
  if (!(click_temperature > 0.0)) throw InvalidArgument("click temperature must be positive");
  if (affinity_concentration < 0.0 || affinity_concentration > 1.0) {
    throw InvalidArgument("affinity concentration must be in [0, 1]");
  }
  if (category_coupling < 0.0 || category_coupling > 1.0) {
    throw InvalidArgument("category coupling must be in [0, 1]");
  }
}

Corpus synthesize_corpus(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  const auto frames = spec.active_frames();
  const std::size_t n_frames = frames.size();

  std::vector<double> weights = spec.frame_weights;
  if (weights.empty()) {
    for (std::size_t i = 0; i < n_frames; ++i) {
      weights.push_back(1.0 / std::pow(static_cast<double>(i + 1), spec.frame_skew));
    }
  }
  std::vector<double> sentiment_means = spec.frame_sentiment;
  if (sentiment_means.empty()) {
    for (std::size_t i = 0; i < n_frames; ++i) {
      sentiment_means.push_back(
          n_frames == 1 ? 0.0 : -0.6 + 1.2 * static_cast<double>(i) / (n_frames - 1));
    }
  }

  const auto content_centers =
      centers_for(spec.content_centers, n_frames, spec.dim, rng, "content");
  auto frame_centers = centers_for(spec.frame_centers, n_frames, spec.frame_dim, rng, "frame");
  if (spec.frame_centers.empty() && spec.frame_mainstream > 0.0) {
    // Popular frames lean toward a shared direction, rare ones stay apart.
    auto axis = gaussian(rng, spec.frame_dim, 1.0);
    normalize(axis);
    const double top = *std::max_element(weights.begin(), weights.end());
    for (std::size_t f = 0; f < n_frames; ++f) {
      const double pull = spec.frame_mainstream * weights[f] / top;
      for (std::size_t d = 0; d < spec.frame_dim; ++d) frame_centers[f][d] += pull * axis[d];
      normalize(frame_centers[f]);
    }
  }
  std::vector<Vec> category_centers;
  for (std::size_t c = 0; c < spec.n_categories; ++c) {
    auto v = gaussian(rng, spec.dim, 1.0);
    normalize(v);
    category_centers.push_back(std::move(v));
  }

  // Articles.
  const std::size_t aw = width_for(spec.n_articles);
  std::vector<Article> articles;
  std::vector<float> content_values, frame_values;
  std::vector<std::size_t> frame_of(spec.n_articles);
  std::vector<std::vector<std::size_t>> by_frame(n_frames);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_category(0, spec.n_categories - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double content_scale = spec.content_noise / std::sqrt(static_cast<double>(spec.dim));
  const double frame_scale = spec.frame_noise / std::sqrt(static_cast<double>(spec.frame_dim));

  for (std::size_t i = 0; i < spec.n_articles; ++i) {
    const std::size_t f = sample_index(rng, weights);
    const std::size_t home = f % spec.n_categories;
    const std::size_t category = unit(rng) < spec.category_coupling ? home : pick_category(rng);

    Vec content = gaussian(rng, spec.dim, content_scale);
    for (std::size_t d = 0; d < spec.dim; ++d) {
      content[d] += content_centers[f][d] + spec.category_weight * category_centers[category][d];
    }
    normalize(content);
    Vec framev = gaussian(rng, spec.frame_dim, frame_scale);
    for (std::size_t d = 0; d < spec.frame_dim; ++d) framev[d] += frame_centers[f][d];
    normalize(framev);
    for (double x : content) content_values.push_back(static_cast<float>(x));
    for (double x : framev) frame_values.push_back(static_cast<float>(x));

    const double s = std::clamp(sentiment_means[f] + spec.sentiment_sd * normal(rng), -1.0, 1.0);
    articles.push_back({make_id('N', i + 1, aw), make_id('c', category, width_for(spec.n_categories)),
                        frames[f], s, i});
    frame_of[i] = f;
    by_frame[f].push_back(i);
  }

  // Users: a dominant frame (drawn like article frames, so popular frames
  // attract more users) and a history sampled from the resulting affinity.
  std::vector<double> available(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) available[f] = by_frame[f].empty() ? 0.0 : weights[f];
  const double available_total = std::accumulate(available.begin(), available.end(), 0.0);

  struct User {
    std::string id;
    std::vector<std::size_t> history;
    Vec history_mean;
  };
  std::vector<User> users;
  const std::size_t uw = width_for(spec.n_users);
  std::uniform_int_distribution<std::size_t> history_len(spec.history_min, spec.history_max);
  for (std::size_t u = 0; u < spec.n_users; ++u) {
    const std::size_t dominant = sample_index(rng, available);
    std::vector<double> affinity(n_frames, 0.0);
    const double rest = available_total - available[dominant];
    for (std::size_t f = 0; f < n_frames; ++f) {
      if (f == dominant) {
        affinity[f] = rest > 0.0 ? spec.affinity_concentration : 1.0;
      } else if (rest > 0.0) {
        affinity[f] = (1.0 - spec.affinity_concentration) * available[f] / rest;
      }
    }
    if (std::accumulate(affinity.begin(), affinity.end(), 0.0) <= 0.0) affinity[dominant] = 1.0;

    User user;
    user.id = make_id('U', u + 1, uw);
    const std::size_t len = history_len(rng);
    for (std::size_t h = 0; h < len; ++h) {
      const auto& pool = by_frame[sample_index(rng, affinity)];
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      user.history.push_back(pool[pick(rng)]);
    }
    // The click model sees what the ranker sees: the truncated history.
    const std::size_t keep = std::min(user.history.size(), spec.max_history);
    user.history_mean.assign(spec.dim, 0.0);
    for (std::size_t h = user.history.size() - keep; h < user.history.size(); ++h) {
      const std::size_t a = user.history[h];
      for (std::size_t d = 0; d < spec.dim; ++d) {
        user.history_mean[d] += content_values[a * spec.dim + d] / static_cast<double>(keep);
      }
    }
    users.push_back(std::move(user));
  }

  auto make_impressions = [&](std::size_t count, char prefix) {
    std::vector<Impression> out;
    const std::size_t iw = width_for(count);
    std::uniform_int_distribution<std::size_t> pick_user(0, spec.n_users - 1);
    for (std::size_t i = 0; i < count; ++i) {
      const User& user = users[pick_user(rng)];
      std::set<std::size_t> seen(user.history.begin(), user.history.end());
      std::vector<std::size_t> pool;
      for (std::size_t a = 0; a < spec.n_articles; ++a) {
        if (!seen.count(a)) pool.push_back(a);
      }
      std::shuffle(pool.begin(), pool.end(), rng);
      pool.resize(std::min(pool.size(), spec.candidates));
      std::sort(pool.begin(), pool.end());

      Impression imp;
      imp.id = make_id(prefix, i + 1, iw);
      imp.user = user.id;
      for (std::size_t a : user.history) imp.history.push_back(articles[a].id);
      std::vector<double> logits;
      for (std::size_t a : pool) {
        imp.candidates.push_back(articles[a].id);
        double s = 0.0;
        for (std::size_t d = 0; d < spec.dim; ++d) {
          s += content_values[a * spec.dim + d] * user.history_mean[d];
        }
        logits.push_back(s / spec.click_temperature);
      }
      imp.clicks.assign(pool.size(), 0);
      const std::size_t n_clicks = std::min(spec.clicks, pool.size() > 1 ? pool.size() - 1 : 0);
      const double top = *std::max_element(logits.begin(), logits.end());
      std::vector<double> probs;
      for (double l : logits) probs.push_back(std::exp(l - top));
      for (std::size_t c = 0; c < n_clicks; ++c) {
        const std::size_t hit = sample_index(rng, probs);
        imp.clicks[hit] = 1;
        probs[hit] = 0.0;
      }
      out.push_back(std::move(imp));
    }
    return out;
  };

  auto train = make_impressions(spec.train_impressions, 'T');
  auto validation = make_impressions(spec.validation_impressions, 'V');
  auto test = make_impressions(spec.test_impressions, 'E');

  return Corpus::build(
      std::move(articles),
      EmbeddingMatrix(spec.n_articles, spec.dim, std::move(content_values), SpaceTag::Content),
      EmbeddingMatrix(spec.n_articles, spec.frame_dim, std::move(frame_values), SpaceTag::Frame),
      std::move(train), std::move(validation), std::move(test), spec.max_history);
}

}  // namespace framerank
