#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "framerank/corpus.hpp"

namespace framerank {

inline constexpr double kDefaultTemperature = 0.9;

// Linear projection followed by L2 normalization; the desk-scale stand-in
// for a fine-tuned news encoder.
struct ProjectionModel {
  Eigen::MatrixXd weight;  // dim_out x dim_in
  double temperature = kDefaultTemperature;

  static ProjectionModel identity(std::size_t dim, double temperature = kDefaultTemperature);
  static ProjectionModel random(std::size_t dim_out, std::size_t dim_in, std::uint64_t seed,
                                double temperature = kDefaultTemperature);

  std::size_t dim_in() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t dim_out() const { return static_cast<std::size_t>(weight.rows()); }

  // Unit-norm projection of each row of `base` (zero rows stay zero).
  Eigen::MatrixXd project(const Eigen::MatrixXd& base) const;
};

// Rows of base vectors with a class per row. Only rows listed in `anchors`
// contribute loss terms; every row takes part as a contrast.
struct ContrastiveBatch {
  Eigen::MatrixXd base;  // n x dim_in
  std::vector<int> labels;
  std::vector<std::size_t> anchors;
};

struct LossResult {
  double loss = 0.0;        // summed over anchors that have a positive
  Eigen::MatrixXd gradient;  // d loss / d weight
  std::size_t active_anchors = 0;
};

// Supervised contrastive loss (positives averaged outside the log) with its
// exact gradient through the normalization. Anchors without a positive are
// skipped; throws InvalidArgument if none has one.
LossResult supcon_loss(const ContrastiveBatch& batch, const ProjectionModel& model);

// Loss only, for finite-difference checks and validation passes.
double supcon_value(const ContrastiveBatch& batch, const ProjectionModel& model);

// Anchor row 0 is the mean of the history's base vectors, labeled with the
// clicked candidates; `neg_ratio` non-clicked candidates per click are drawn
// without replacement (all of them if fewer exist). Throws InvalidArgument
// if the impression has no click or an empty history.
ContrastiveBatch click_contrastive_batch(const Impression& impression, const Corpus& corpus,
                                         const EmbeddingMatrix& base, std::size_t neg_ratio,
                                         std::mt19937_64& rng);

// `classes_per_batch` classes chosen uniformly among those with at least two
// members, `per_class` members each (all members if fewer).
ContrastiveBatch class_contrastive_batch(const EmbeddingMatrix& base,
                                         const std::vector<std::vector<std::size_t>>& members,
                                         std::size_t per_class, std::size_t classes_per_batch,
                                         std::mt19937_64& rng);

enum class Objective { Frame, Click };

Objective parse_objective(const std::string& name);
const char* objective_name(Objective objective);

struct ShaperConfig {
  std::size_t epochs = 100;
  double learning_rate = 0.05;
  double momentum = 0.0;
  std::size_t patience = 3;
  double temperature = kDefaultTemperature;
  std::size_t steps_per_epoch = 10;
  // Frame objective batching.
  std::size_t instances_per_class = 20;
  std::size_t classes_per_batch = 3;
  double validation_fraction = 0.2;
  // Click objective batching.
  std::size_t neg_ratio = 4;
  std::size_t batch_size = 8;
  std::size_t max_history = kDefaultMaxHistory;
  // Output dimension; 0 keeps the base dimension (identity start).
  std::size_t dim_out = 0;
  std::uint64_t seed = 1;
};

// Stops once `patience` consecutive epochs fail to improve on the best
// validation loss.
class EarlyStopping {
public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Records one epoch; returns true when training should stop.
  bool update(double validation_loss);
  bool improved() const { return improved_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }

private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t stale_ = 0;
  bool improved_ = false;
  double best_ = 0.0;
};

struct TraceRow {
  std::size_t epoch = 0;
  std::string split;  // "train" or "validation"
  double loss = 0.0;
};

struct TrainingTrace {
  std::vector<TraceRow> rows;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
};

struct TrainResult {
  ProjectionModel model;  // weights from the best validation epoch
  TrainingTrace trace;
};

// Fixed-step gradient descent (optional momentum) over the base content
// embeddings of `corpus`. Throws TrainingError on a non-finite loss.
TrainResult train(const ProjectionModel& initial, const Corpus& corpus, Objective objective,
                  const ShaperConfig& config);

// Initial model for a config: identity when the output dimension equals the
// input, seeded Gaussian otherwise.
ProjectionModel initial_model(std::size_t dim_in, const ShaperConfig& config);

// Projected, unit-normalized rows in the given space. Throws
// InvalidArgument on a dimension mismatch.
EmbeddingMatrix export_embeddings(const ProjectionModel& model, const EmbeddingMatrix& base,
                                  SpaceTag space);

Eigen::MatrixXd to_eigen(const EmbeddingMatrix& m);

// epoch  split  loss
void write_trace(std::ostream& out, const TrainingTrace& trace);

// Weight matrix in the embedding binary format (rows = dim_out) plus a
// `<path>.meta` text sidecar with dim_in, dim_out, temperature and seed.
void save_checkpoint(const std::filesystem::path& path, const ProjectionModel& model,
                     std::uint64_t seed);
ProjectionModel load_checkpoint(const std::filesystem::path& path);

}  // namespace framerank
