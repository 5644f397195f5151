#pragma once

#include <cstdint>
#include <vector>

#include "framerank/corpus.hpp"
#include "framerank/frames.hpp"

namespace framerank {

// Parameters of the synthetic corpus generator.
//
// Articles are drawn per frame: a frame is picked by `frame_weights`, the
// content vector is the unit-normalized frame center (plus a category
// center) with isotropic noise, and the frame-space vector is the same
// construction over separate frame-space centers. Each user owns a history
// sampled from a frame affinity that puts `affinity_concentration` of its
// mass on one dominant frame. Clicks are sampled without replacement from a
// softmax over candidate content similarity to the history mean.
struct SynthSpec {
  std::size_t n_articles = 600;
  std::size_t n_users = 120;
  std::size_t train_impressions = 240;
  std::size_t validation_impressions = 60;
  std::size_t test_impressions = 240;

  std::size_t dim = 32;        // content space
  std::size_t frame_dim = 16;  // frame space

  std::vector<FrameLabel> frames;    // empty = all 15
  std::vector<double> frame_weights;  // empty = Zipf over `frames`
  double frame_skew = 0.8;            // Zipf exponent for the default weights

  // Optional explicit unit-normalized centers, one per frame. Empty means
  // random Gaussian directions drawn from the seed.
  std::vector<std::vector<double>> content_centers;
  std::vector<std::vector<double>> frame_centers;

  // Weight of a shared frame-space direction, scaled by frame popularity.
  // Ignored when frame_centers are given.
  double frame_mainstream = 2.0;

  double content_noise = 0.6;
  double frame_noise = 0.35;

  std::size_t n_categories = 8;
  double category_coupling = 0.7;  // P(category is the frame's home category)
  double category_weight = 0.5;    // category center weight in content space

  // Mean signed sentiment per frame; empty spreads means over [-0.6, 0.6].
  std::vector<double> frame_sentiment;
  double sentiment_sd = 0.2;

  double affinity_concentration = 0.9;
  std::size_t history_min = 10;
  std::size_t history_max = 60;
  std::size_t candidates = 30;
  std::size_t clicks = 1;
  double click_temperature = 0.1;

  std::size_t max_history = kDefaultMaxHistory;

  // Throws InvalidArgument for degenerate settings.
  void validate() const;
  std::vector<FrameLabel> active_frames() const;
};

Corpus synthesize_corpus(const SynthSpec& spec, std::uint64_t seed);

}  // namespace framerank
