#include "framerank/shaper.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include "framerank/error.hpp"
#include "framerank/text.hpp"

namespace framerank {
namespace {

struct Projection {
  Eigen::MatrixXd unit;   // n x dim_out
  Eigen::VectorXd norms;  // pre-normalization row norms
};

Projection project_rows(const Eigen::MatrixXd& base, const Eigen::MatrixXd& weight) {
  Projection p;
  p.unit = base * weight.transpose();
  p.norms = p.unit.rowwise().norm();
  for (Eigen::Index i = 0; i < p.unit.rows(); ++i) {
    if (p.norms(i) > 0.0) p.unit.row(i) /= p.norms(i);
  }
  return p;
}

void check_batch(const ContrastiveBatch& batch, const ProjectionModel& model) {
  if (!(model.temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  if (static_cast<std::size_t>(batch.base.rows()) != batch.labels.size()) {
    throw InvalidArgument("batch labels do not match its rows");
  }
  if (static_cast<std::size_t>(batch.base.cols()) != model.dim_in()) {
    throw InvalidArgument("batch dimension " + std::to_string(batch.base.cols()) +
                          " does not match model input " + std::to_string(model.dim_in()));
  }
  for (std::size_t a : batch.anchors) {
    if (a >= batch.labels.size()) throw InvalidArgument("anchor index out of range");
  }
}

// Loss and, when `grad_z` is non-null, d loss / d unit vectors.
double loss_on_units(const ContrastiveBatch& batch, const Eigen::MatrixXd& z, double tau,
                     Eigen::MatrixXd* grad_z, std::size_t* active) {
  const Eigen::Index n = z.rows();
  const Eigen::MatrixXd sim = (z * z.transpose()) / tau;
  double loss = 0.0;
  std::size_t used = 0;
  std::vector<double> weights(static_cast<std::size_t>(n));
  for (std::size_t i : batch.anchors) {
    const auto ii = static_cast<Eigen::Index>(i);
    std::size_t positives = 0;
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a != ii && batch.labels[static_cast<std::size_t>(a)] == batch.labels[i]) ++positives;
    }
    if (positives == 0) continue;
    ++used;
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a != ii) top = std::max(top, sim(ii, a));
    }
    double denom = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
      weights[static_cast<std::size_t>(a)] = a == ii ? 0.0 : std::exp(sim(ii, a) - top);
      denom += weights[static_cast<std::size_t>(a)];
    }
    const double log_denom = top + std::log(denom);
    const double inv_pos = 1.0 / static_cast<double>(positives);
    double positive_sum = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a == ii) continue;
      const bool positive = batch.labels[static_cast<std::size_t>(a)] == batch.labels[i];
      if (positive) positive_sum += sim(ii, a);
      if (grad_z) {
        const double coef =
            (weights[static_cast<std::size_t>(a)] / denom - (positive ? inv_pos : 0.0)) / tau;
        grad_z->row(ii) += coef * z.row(a);
        grad_z->row(a) += coef * z.row(ii);
      }
    }
    loss += log_denom - inv_pos * positive_sum;
  }
  if (active) *active = used;
  return loss;
}

}  // namespace

ProjectionModel ProjectionModel::identity(std::size_t dim, double temperature) {
  return {Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                    static_cast<Eigen::Index>(dim)),
          temperature};
}

ProjectionModel ProjectionModel::random(std::size_t dim_out, std::size_t dim_in,
                                        std::uint64_t seed, double temperature) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim_in)));
  Eigen::MatrixXd w(static_cast<Eigen::Index>(dim_out), static_cast<Eigen::Index>(dim_in));
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = normal(rng);
  }
  return {std::move(w), temperature};
}

Eigen::MatrixXd ProjectionModel::project(const Eigen::MatrixXd& base) const {
  if (static_cast<std::size_t>(base.cols()) != dim_in()) {
    throw InvalidArgument("projection input has dimension " + std::to_string(base.cols()) +
                          ", model expects " + std::to_string(dim_in()));
  }
  return project_rows(base, weight).unit;
}

LossResult supcon_loss(const ContrastiveBatch& batch, const ProjectionModel& model) {
  check_batch(batch, model);
  const auto proj = project_rows(batch.base, model.weight);
  Eigen::MatrixXd grad_z = Eigen::MatrixXd::Zero(proj.unit.rows(), proj.unit.cols());
  LossResult result;
  result.loss = loss_on_units(batch, proj.unit, model.temperature, &grad_z, &result.active_anchors);
  if (result.active_anchors == 0) throw InvalidArgument("no anchor in the batch has a positive");

  // Back through z = u / |u|: du = (dz - (dz . z) z) / |u|.
  Eigen::MatrixXd grad_u(grad_z.rows(), grad_z.cols());
  for (Eigen::Index j = 0; j < grad_z.rows(); ++j) {
    if (proj.norms(j) > 0.0) {
      const double along = grad_z.row(j).dot(proj.unit.row(j));
      grad_u.row(j) = (grad_z.row(j) - along * proj.unit.row(j)) / proj.norms(j);
    } else {
      grad_u.row(j).setZero();
    }
  }
  result.gradient = grad_u.transpose() * batch.base;
  return result;
}

double supcon_value(const ContrastiveBatch& batch, const ProjectionModel& model) {
  check_batch(batch, model);
  const auto proj = project_rows(batch.base, model.weight);
  std::size_t active = 0;
  const double loss = loss_on_units(batch, proj.unit, model.temperature, nullptr, &active);
  if (active == 0) throw InvalidArgument("no anchor in the batch has a positive");
  return loss;
}

ContrastiveBatch click_contrastive_batch(const Impression& impression, const Corpus& corpus,
                                         const EmbeddingMatrix& base, std::size_t neg_ratio,
                                         std::mt19937_64& rng) {
  if (impression.history.empty()) {
    throw InvalidArgument("impression '" + impression.id + "' has an empty history");
  }
  std::vector<std::size_t> positives, negatives;
  for (std::size_t i = 0; i < impression.candidates.size(); ++i) {
    (impression.clicks[i] ? positives : negatives).push_back(i);
  }
  if (positives.empty()) {
    throw InvalidArgument("impression '" + impression.id + "' has no click");
  }
  std::shuffle(negatives.begin(), negatives.end(), rng);
  negatives.resize(std::min(negatives.size(), neg_ratio * positives.size()));

  const auto dim = static_cast<Eigen::Index>(base.dim());
  ContrastiveBatch batch;
  batch.base = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(1 + positives.size() + negatives.size()), dim);
  for (const auto& id : impression.history) {
    const auto row = base.row(corpus.article(id).row);
    for (Eigen::Index d = 0; d < dim; ++d) batch.base(0, d) += row[static_cast<std::size_t>(d)];
  }
  batch.base.row(0) /= static_cast<double>(impression.history.size());
  batch.labels.push_back(1);
  batch.anchors.push_back(0);
  Eigen::Index r = 1;
  auto add = [&](std::size_t candidate, int label) {
    const auto row = base.row(corpus.article(impression.candidates[candidate]).row);
    for (Eigen::Index d = 0; d < dim; ++d) batch.base(r, d) = row[static_cast<std::size_t>(d)];
    batch.labels.push_back(label);
    ++r;
  };
  for (std::size_t p : positives) add(p, 1);
  for (std::size_t n : negatives) add(n, 0);
  return batch;
}

ContrastiveBatch class_contrastive_batch(const EmbeddingMatrix& base,
                                         const std::vector<std::vector<std::size_t>>& members,
                                         std::size_t per_class, std::size_t classes_per_batch,
                                         std::mt19937_64& rng) {
  std::vector<std::size_t> eligible;
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].size() >= 2) eligible.push_back(c);
  }
  if (eligible.empty()) throw InvalidArgument("no class has two members");
  std::shuffle(eligible.begin(), eligible.end(), rng);
  eligible.resize(std::min(eligible.size(), std::max<std::size_t>(classes_per_batch, 1)));
  std::sort(eligible.begin(), eligible.end());

  std::vector<std::pair<std::size_t, int>> rows;
  for (std::size_t c : eligible) {
    auto pool = members[c];
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::min(pool.size(), per_class));
    for (std::size_t a : pool) rows.emplace_back(a, static_cast<int>(c));
  }
  const auto dim = static_cast<Eigen::Index>(base.dim());
  ContrastiveBatch batch;
  batch.base.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = base.row(rows[i].first);
    for (Eigen::Index d = 0; d < dim; ++d) {
      batch.base(static_cast<Eigen::Index>(i), d) = row[static_cast<std::size_t>(d)];
    }
    batch.labels.push_back(rows[i].second);
    batch.anchors.push_back(i);
  }
  return batch;
}

Objective parse_objective(const std::string& name) {
  if (name == "frame") return Objective::Frame;
  if (name == "click") return Objective::Click;
  throw InvalidArgument("unknown objective '" + name + "'");
}

const char* objective_name(Objective objective) {
  return objective == Objective::Frame ? "frame" : "click";
}

bool EarlyStopping::update(double validation_loss) {
  ++epoch_;
  improved_ = epoch_ == 1 || validation_loss < best_;
  if (improved_) {
    best_ = validation_loss;
    best_epoch_ = epoch_;
    stale_ = 0;
    return false;
  }
  ++stale_;
  return stale_ >= patience_;
}

Eigen::MatrixXd to_eigen(const EmbeddingMatrix& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.dim()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t d = 0; d < m.dim(); ++d) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) = row[d];
    }
  }
  return out;
}

ProjectionModel initial_model(std::size_t dim_in, const ShaperConfig& config) {
  const std::size_t dim_out = config.dim_out == 0 ? dim_in : config.dim_out;
  if (dim_out == dim_in) return ProjectionModel::identity(dim_in, config.temperature);
  return ProjectionModel::random(dim_out, dim_in, config.seed, config.temperature);
}

namespace {

// Batches for one objective, drawn from a fixed pool of training and
// validation material.
class BatchSource {
public:
  BatchSource(const Corpus& corpus, Objective objective, const ShaperConfig& config)
      : corpus_(corpus), objective_(objective), config_(config) {
    if (objective == Objective::Frame) {
      std::vector<std::size_t> order(corpus.size());
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 split_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
      std::shuffle(order.begin(), order.end(), split_rng);
      const auto n_valid = static_cast<std::size_t>(
          std::round(config.validation_fraction * static_cast<double>(order.size())));
      train_members_.assign(kFrameCount, {});
      valid_members_.assign(kFrameCount, {});
      for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& a = corpus.articles()[order[i]];
        auto& bucket = i < n_valid ? valid_members_ : train_members_;
        bucket[frame_index(a.frame)].push_back(a.row);
      }
      for (auto* m : {&train_members_, &valid_members_}) {
        for (auto& v : *m) std::sort(v.begin(), v.end());
      }
    } else {
      for (Split s : {Split::Train, Split::Validation}) {
        auto& dst = s == Split::Train ? train_impressions_ : valid_impressions_;
        for (const auto& imp : corpus.impressions(s)) {
          if (!imp.history.empty() && imp.click_count() > 0) dst.push_back(&imp);
        }
      }
      if (train_impressions_.empty()) {
        throw TrainingError("click objective needs training impressions with clicks");
      }
    }
  }

  ContrastiveBatch train_batch(std::mt19937_64& rng) const {
    return make(train_members_, train_impressions_, rng);
  }

  std::vector<ContrastiveBatch> validation_batches() const {
    std::mt19937_64 rng(config_.seed ^ 0x5851f42d4c957f2dULL);
    std::vector<ContrastiveBatch> out;
    const bool frame = objective_ == Objective::Frame;
    const bool has_valid = frame ? std::any_of(valid_members_.begin(), valid_members_.end(),
                                               [](const auto& v) { return v.size() >= 2; })
                                 : !valid_impressions_.empty();
    const auto& members = has_valid ? valid_members_ : train_members_;
    const auto& imps = has_valid ? valid_impressions_ : train_impressions_;
    if (frame) {
      for (std::size_t i = 0; i < 4; ++i) out.push_back(make(members, {}, rng));
    } else {
      for (const auto* imp : imps) {
        out.push_back(click_contrastive_batch(*imp, corpus_, corpus_.content(),
                                              config_.neg_ratio, rng));
      }
    }
    return out;
  }

private:
  ContrastiveBatch make(const std::vector<std::vector<std::size_t>>& members,
                        const std::vector<const Impression*>& imps,
                        std::mt19937_64& rng) const {
    if (objective_ == Objective::Frame) {
      return class_contrastive_batch(corpus_.content(), members, config_.instances_per_class,
                                     config_.classes_per_batch, rng);
    }
    // Concatenate several impression batches; each keeps its own anchor and
    // a label space disjoint from the others.
    std::uniform_int_distribution<std::size_t> pick(0, imps.size() - 1);
    std::vector<ContrastiveBatch> parts;
    Eigen::Index rows = 0;
    for (std::size_t b = 0; b < std::max<std::size_t>(config_.batch_size, 1); ++b) {
      parts.push_back(click_contrastive_batch(*imps[pick(rng)], corpus_, corpus_.content(),
                                              config_.neg_ratio, rng));
      rows += parts.back().base.rows();
    }
    ContrastiveBatch batch;
    batch.base.resize(rows, static_cast<Eigen::Index>(corpus_.content().dim()));
    Eigen::Index offset = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
      const auto& part = parts[p];
      batch.base.middleRows(offset, part.base.rows()) = part.base;
      for (int label : part.labels) batch.labels.push_back(static_cast<int>(2 * p) + label);
      for (std::size_t a : part.anchors) batch.anchors.push_back(static_cast<std::size_t>(offset) + a);
      offset += part.base.rows();
    }
    return batch;
  }

  const Corpus& corpus_;
  Objective objective_;
  const ShaperConfig& config_;
  std::vector<std::vector<std::size_t>> train_members_, valid_members_;
  std::vector<const Impression*> train_impressions_, valid_impressions_;
};

}  // namespace

TrainResult train(const ProjectionModel& initial, const Corpus& corpus, Objective objective,
                  const ShaperConfig& config) {
  if (initial.dim_in() != corpus.content().dim()) {
    throw InvalidArgument("model input dimension does not match the base embeddings");
  }
  if (config.epochs == 0 || config.steps_per_epoch == 0) {
    throw InvalidArgument("training needs at least one epoch and one step");
  }
  if (objective == Objective::Frame &&
      (config.instances_per_class < 2 || config.classes_per_batch == 0)) {
    throw InvalidArgument("frame batches need two instances per class and one class");
  }
  if (objective == Objective::Click && (config.batch_size == 0 || config.neg_ratio == 0)) {
    throw InvalidArgument("click batches need a batch size and a negative ratio");
  }
  if (!(config.validation_fraction >= 0.0 && config.validation_fraction < 1.0)) {
    throw InvalidArgument("validation_fraction must be in [0, 1)");
  }
  ProjectionModel model = initial;
  model.temperature = config.temperature;
  BatchSource source(corpus, objective, config);
  const auto validation = source.validation_batches();

  auto validation_loss = [&](const ProjectionModel& m) {
    double total = 0.0;
    std::size_t anchors = 0;
    for (const auto& b : validation) {
      const auto proj = project_rows(b.base, m.weight);
      std::size_t active = 0;
      total += loss_on_units(b, proj.unit, m.temperature, nullptr, &active);
      anchors += active;
    }
    return anchors ? total / static_cast<double>(anchors) : 0.0;
  };
  auto check_finite = [](double v, std::size_t epoch, const char* where) {
    if (!std::isfinite(v)) {
      throw TrainingError(std::string("non-finite ") + where + " loss at epoch " +
                          std::to_string(epoch));
    }
  };

  std::mt19937_64 rng(config.seed);
  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(model.weight.rows(), model.weight.cols());
  EarlyStopping stopper(config.patience);
  TrainResult result{model, {}};

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double train_total = 0.0;
    std::size_t train_anchors = 0;
    for (std::size_t step = 0; step < config.steps_per_epoch; ++step) {
      const auto batch = source.train_batch(rng);
      LossResult lr;
      try {
        lr = supcon_loss(batch, model);
      } catch (const InvalidArgument&) {
        continue;  // no anchor with a positive in this draw
      }
      check_finite(lr.loss, epoch, "training");
      train_total += lr.loss;
      train_anchors += lr.active_anchors;
      velocity = config.momentum * velocity + lr.gradient / static_cast<double>(lr.active_anchors);
      model.weight -= config.learning_rate * velocity;
    }
    const double train_loss = train_anchors ? train_total / static_cast<double>(train_anchors) : 0.0;
    const double valid_loss = validation_loss(model);
    check_finite(train_loss, epoch, "training");
    check_finite(valid_loss, epoch, "validation");
    result.trace.rows.push_back({epoch, "train", train_loss});
    result.trace.rows.push_back({epoch, "validation", valid_loss});
    result.trace.epochs_run = epoch;

    const bool stop = stopper.update(valid_loss);
    if (stopper.improved()) result.model = model;
    if (stop) break;
  }
  result.trace.best_epoch = stopper.best_epoch();
  return result;
}

EmbeddingMatrix export_embeddings(const ProjectionModel& model, const EmbeddingMatrix& base,
                                  SpaceTag space) {
  if (base.dim() != model.dim_in()) {
    throw InvalidArgument("base embeddings have dimension " + std::to_string(base.dim()) +
                          ", model expects " + std::to_string(model.dim_in()));
  }
  const auto projected = model.project(to_eigen(base));
  std::vector<float> values;
  values.reserve(base.rows() * model.dim_out());
  for (Eigen::Index r = 0; r < projected.rows(); ++r) {
    for (Eigen::Index c = 0; c < projected.cols(); ++c) {
      values.push_back(static_cast<float>(projected(r, c)));
    }
  }
  return {base.rows(), model.dim_out(), std::move(values), space};
}

void write_trace(std::ostream& out, const TrainingTrace& trace) {
  out << "epoch\tsplit\tloss\n";
  for (const auto& row : trace.rows) {
    out << row.epoch << '\t' << row.split << '\t' << text::shortest(row.loss) << '\n';
  }
}

void save_checkpoint(const std::filesystem::path& path, const ProjectionModel& model,
                     std::uint64_t seed) {
  std::vector<float> values;
  std::vector<std::string> ids;
  for (Eigen::Index r = 0; r < model.weight.rows(); ++r) {
    ids.push_back("w" + std::to_string(r));
    for (Eigen::Index c = 0; c < model.weight.cols(); ++c) {
      values.push_back(static_cast<float>(model.weight(r, c)));
    }
  }
  write_embeddings(path,
                   EmbeddingMatrix(model.dim_out(), model.dim_in(), std::move(values),
                                   SpaceTag::Content),
                   ids);
  auto meta_path = path;
  meta_path += ".meta";
  std::ofstream meta(meta_path);
  meta << "dim_in = " << model.dim_in() << "\ndim_out = " << model.dim_out()
       << "\ntemperature = " << text::shortest(model.temperature) << "\nseed = " << seed << '\n';
  if (!meta) throw Error("failed writing " + meta_path.string());
}

ProjectionModel load_checkpoint(const std::filesystem::path& path) {
  const auto file = read_embeddings(path, SpaceTag::Content);
  auto meta_path = path;
  meta_path += ".meta";
  std::ifstream meta(meta_path);
  if (!meta) throw Error("cannot open " + meta_path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[std::string(text::trim(std::string_view(line).substr(0, eq)))] =
        std::string(text::trim(std::string_view(line).substr(eq + 1)));
  }
  ProjectionModel model;
  if (!text::parse_double(kv["temperature"], model.temperature)) {
    throw Error(meta_path.string() + ": missing temperature");
  }
  model.weight = to_eigen(file.matrix);
  return model;
}

}  // namespace framerank
