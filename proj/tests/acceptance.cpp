// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "framerank/divergence.hpp"
#include "framerank/error.hpp"
#include "framerank/experiment.hpp"
#include "framerank/log.hpp"
#include "framerank/normative.hpp"
#include "framerank/rank_metrics.hpp"
#include "framerank/scoring.hpp"
#include "framerank/shaper.hpp"
#include "framerank/stats.hpp"
#include "framerank/synth.hpp"
#include "framerank/text.hpp"
#include "oracles.hpp"

namespace fr = framerank;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

fr::CategoricalDistribution to_dist(const oracle::Dist& d) {
  return fr::CategoricalDistribution::from_probabilities(d);
}

std::string num(double v, int decimals = 4) { return fr::text::fixed(v, decimals); }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() /
                   ("framerank-acceptance-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// 1 ------------------------------------------------------------------------
Outcome oracle_equivalence() {
  Outcome out;
  std::size_t impressions = 0, checks = 0;
  double worst = 0.0;
  auto fail = [&](const std::string& what) {
    if (out.pass) out.detail = what;
    out.pass = false;
  };

  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> lam(-1.0, 1.0);
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    fr::SynthSpec spec;
    spec.n_articles = 120;
    spec.n_users = 25;
    spec.train_impressions = 0;
    spec.validation_impressions = 0;
    spec.test_impressions = 30;
    spec.history_min = 1;
    spec.history_max = 8;
    spec.candidates = 2 + seed % 5;  // 2..6
    spec.clicks = 1 + seed % 2 < spec.candidates ? 1 + seed % 2 : 1;
    const auto corpus = fr::synthesize_corpus(spec, seed);
    const auto context = fr::NormativeContext::of(corpus, fr::kDefaultBins);
    for (const auto& imp : corpus.impressions(fr::Split::Test)) {
      const double lambda = lam(rng);
      const auto slate = fr::rank_slate(imp, corpus, lambda);
      ++impressions;

      // Scores and order against the straight-line scorer.
      const auto ref = oracle::final_scores(imp, corpus, lambda);
      for (const auto& e : slate.entries) {
        const double d = std::abs(e.score.final_score - ref[e.candidate_index]);
        worst = std::max(worst, d);
        if (d > 1e-9) fail("final score mismatch in " + imp.id);
      }

      // Rank metrics must match exactly.
      const auto labels = fr::ranked_labels(slate, imp);
      const auto scores = slate.final_scores();
      const auto m = fr::evaluate_impression(slate, imp, fr::kDefaultCutoffs);
      if (m.auc_defined) {
        ++checks;
        if (m.auc != oracle::auc(scores, labels)) fail("AUC differs on " + imp.id);
      }
      if (m.mrr != oracle::mrr(labels)) fail("MRR differs on " + imp.id);
      for (std::size_t k : {std::size_t{1}, std::size_t{3}, std::size_t{5}, std::size_t{10}}) {
        ++checks;
        if (fr::ndcg_at_k(labels, k) != oracle::ndcg(labels, k)) {
          fail("nDCG@" + std::to_string(k) + " differs on " + imp.id);
        }
      }

      // Normative metrics within 1e-9.
      for (std::size_t k : {std::size_t{3}, std::size_t{10}}) {
        const double pairs[][2] = {
            {fr::calibration(imp, slate, corpus, fr::Feature::Category, fr::Discount::Log2, k),
             oracle::calibration(imp, slate, corpus, false, k)},
            {fr::calibration(imp, slate, corpus, fr::Feature::Frame, fr::Discount::Log2, k),
             oracle::calibration(imp, slate, corpus, true, k)},
            {fr::representation(context.frames, slate, corpus, k),
             oracle::representation(slate, corpus, k)},
            {fr::activation(context.sentiment, slate, corpus, fr::kDefaultBins, k),
             oracle::activation(slate, corpus, fr::kDefaultBins, k)}};
        for (const auto& p : pairs) {
          ++checks;
          const double d = std::abs(p[0] - p[1]);
          worst = std::max(worst, d);
          if (d > 1e-9) fail("normative metric differs on " + imp.id);
        }
      }
    }
  }

  // Tie-heavy score vectors exercise the average-rank path.
  std::uniform_int_distribution<int> small(0, 3), len(2, 6);
  for (int t = 0; t < 500; ++t) {
    const int n = len(rng);
    std::vector<double> s;
    std::vector<std::uint8_t> l;
    for (int i = 0; i < n; ++i) {
      s.push_back(small(rng));
      l.push_back(static_cast<std::uint8_t>(small(rng) < 2));
    }
    if (std::count(l.begin(), l.end(), 1) == 0 || std::count(l.begin(), l.end(), 0) == 0) continue;
    ++checks;
    if (fr::auc(s, l) != oracle::auc(s, l)) fail("AUC differs on tied scores");
  }

  // Divergences on random pairs.
  for (int t = 0; t < 300; ++t) {
    const auto p = oracle::random_dist(rng, 6), q = oracle::random_dist(rng, 6);
    const double a = fr::jsd(to_dist(p), to_dist(q));
    const double b = fr::divergence_dstar(to_dist(p), to_dist(q), fr::Generator::JensenShannon);
    checks += 2;
    worst = std::max({worst, std::abs(a - oracle::jsd(p, q)), std::abs(b - oracle::dstar_jsd(p, q))});
    if (std::abs(a - oracle::jsd(p, q)) > 1e-9) fail("jsd differs from the oracle");
    if (std::abs(b - oracle::dstar_jsd(p, q)) > 1e-9) fail("D_f* differs from the oracle");
  }

  if (impressions < 100) fail("only " + std::to_string(impressions) + " impressions");
  if (out.pass) {
    out.detail = std::to_string(impressions) + " impressions, " + std::to_string(checks) +
                 " comparisons, max deviation " + fr::text::shortest(worst);
  }
  return out;
}

// 2 ------------------------------------------------------------------------
Outcome divergence_bounds() {
  Outcome out;
  std::mt19937_64 rng(7);
  double worst_identity = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto p = to_dist(oracle::random_dist(rng, 8));
    const auto q = to_dist(oracle::random_dist(rng, 8));
    const double pq = fr::jsd(p, q), qp = fr::jsd(q, p), pp = fr::jsd(p, p);
    const double ds = fr::divergence_dstar(p, q, fr::Generator::JensenShannon);
    worst_identity = std::max(worst_identity, std::abs(ds - pq));
    if (pp != 0.0) { out.pass = false; out.detail = "jsd(p,p) = " + fr::text::shortest(pp); }
    if (pq != qp) { out.pass = false; out.detail = "jsd not symmetric"; }
    if (pq < 0.0 || pq > 1.0) { out.pass = false; out.detail = "jsd out of [0,1]"; }
    if (std::abs(ds - pq) > 1e-9) { out.pass = false; out.detail = "D_f* != jsd"; }
  }
  if (out.pass) {
    out.detail = "1000 pairs, max |D_f* - jsd| " + fr::text::shortest(worst_identity);
  }
  return out;
}

// 3 ------------------------------------------------------------------------
Outcome gradient_check() {
  Outcome out;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> rows(4, 10), cls(0, 2), dims(2, 6);
  std::uniform_real_distribution<double> temp(0.2, 1.5);
  double worst = 0.0;
  int done = 0;
  while (done < 100) {
    const int n = rows(rng), din = dims(rng) + 1, dout = dims(rng);
    fr::ContrastiveBatch b;
    b.base.resize(n, din);
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < din; ++d) b.base(i, d) = normal(rng);
      b.labels.push_back(cls(rng));
      b.anchors.push_back(static_cast<std::size_t>(i));
    }
    auto model = fr::ProjectionModel::random(dout, din, rng(), temp(rng));
    fr::LossResult lr;
    try {
      lr = fr::supcon_loss(b, model);
    } catch (const fr::InvalidArgument&) {
      continue;  // no positive pair drawn
    }
    const double eps = 1e-5;
    Eigen::MatrixXd numeric(model.weight.rows(), model.weight.cols());
    for (Eigen::Index r = 0; r < numeric.rows(); ++r) {
      for (Eigen::Index c = 0; c < numeric.cols(); ++c) {
        auto plus = model, minus = model;
        plus.weight(r, c) += eps;
        minus.weight(r, c) -= eps;
        numeric(r, c) = (fr::supcon_value(b, plus) - fr::supcon_value(b, minus)) / (2 * eps);
      }
    }
    const double scale = std::max(numeric.cwiseAbs().maxCoeff(), lr.gradient.cwiseAbs().maxCoeff());
    const double rel = (lr.gradient - numeric).cwiseAbs().maxCoeff() / std::max(scale, 1e-12);
    worst = std::max(worst, rel);
    ++done;
  }
  out.pass = worst < 1e-4;
  out.detail = "100 batches, max relative error " + fr::text::shortest(worst);
  return out;
}

// 4 ------------------------------------------------------------------------
double cosine_gap(const fr::EmbeddingMatrix& m, const fr::Corpus& corpus) {
  double intra = 0.0, inter = 0.0;
  std::size_t ni = 0, nx = 0;
  const auto& arts = corpus.articles();
  for (std::size_t i = 0; i < arts.size(); ++i) {
    const auto a = m.row(arts[i].row);
    for (std::size_t j = i + 1; j < arts.size(); ++j) {
      const auto b = m.row(arts[j].row);
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (std::size_t d = 0; d < m.dim(); ++d) {
        dot += double(a[d]) * b[d];
        na += double(a[d]) * a[d];
        nb += double(b[d]) * b[d];
      }
      const double cos = dot / std::sqrt(na * nb);
      if (arts[i].frame == arts[j].frame) { intra += cos; ++ni; }
      else { inter += cos; ++nx; }
    }
  }
  return intra / ni - inter / nx;
}

Outcome shaping_efficacy() {
  Outcome out;
  fr::SynthSpec spec;
  spec.frames = {fr::FrameLabel::Economic, fr::FrameLabel::Morality,
                 fr::FrameLabel::HealthAndSafety, fr::FrameLabel::Political};
  spec.frame_weights = {1.0, 1.0, 1.0, 1.0};
  spec.n_articles = 200;
  spec.dim = 16;
  // Noisy base space: frames are separable but far from clustered before shaping.
  spec.content_noise = 2.5;
  spec.category_weight = 1.0;
  spec.n_users = 20;
  spec.train_impressions = 20;
  spec.validation_impressions = 5;
  spec.test_impressions = 5;
  const auto corpus = fr::synthesize_corpus(spec, 11);
  fr::ShaperConfig cfg;
  cfg.seed = 11;
  const auto result = fr::train(fr::initial_model(spec.dim, cfg), corpus, fr::Objective::Frame, cfg);
  const auto shaped = fr::export_embeddings(result.model, corpus.content(), fr::SpaceTag::Frame);
  const double before = cosine_gap(corpus.content(), corpus);
  const double after = cosine_gap(shaped, corpus);
  out.pass = after >= 0.2;
  out.detail = "intra-inter cosine gap " + num(before) + " -> " + num(after) + " after " +
               std::to_string(result.trace.epochs_run) + " epochs";
  return out;
}

// 5 and 6 share one sweep ----------------------------------------------------
const fr::SweepReport& default_sweep() {
  static const fr::SweepReport report = [] {
    fr::ExperimentConfig cfg;
    cfg.threads = 4;
    return fr::run_sweep(cfg);
  }();
  return report;
}

const fr::LambdaSummary& at(const fr::SweepReport& r, double lambda) {
  for (const auto& l : r.lambdas) {
    if (l.lambda == lambda) return l;
  }
  throw std::runtime_error("lambda missing from sweep");
}

Outcome lambda_direction() {
  Outcome out;
  const auto& r = default_sweep();
  if (!r.all_ok()) return {false, "sweep had failing cells"};
  const auto& lo = at(r, -1.0);
  const auto& hi = at(r, 1.0);
  const auto& mid = at(r, 0.1);
  std::ostringstream d;
  for (const char* m : {"cal_f", "cal_c", "rep_f"}) {
    const double a = lo.metrics.at(m).mean, b = hi.metrics.at(m).mean;
    d << m << ' ' << num(100 * a, 2) << '>' << num(100 * b, 2) << ' ';
    if (!(a > b)) out.pass = false;
  }
  const double n_mid = mid.metrics.at("ndcg10").mean, n_lo = lo.metrics.at("ndcg10").mean;
  d << "ndcg10@0.1 " << num(100 * n_mid, 2) << ">=" << num(100 * n_lo, 2);
  if (!(n_mid >= n_lo)) out.pass = false;
  out.detail = d.str();
  return out;
}

Outcome novelty_trend() {
  Outcome out;
  const auto& r = default_sweep();
  if (!r.all_ok()) return {false, "sweep had failing cells"};
  const auto& rows = r.lambdas;  // grid order, ascending
  const double top = at(r, -1.0).metrics.at("avg_novel").mean;
  std::ostringstream d;
  for (const auto& l : rows) {
    const auto& s = l.metrics.at("avg_novel");
    d << fr::format_lambda(l.lambda) << ':' << num(s.mean, 2) << ' ';
    if (s.mean > top) out.pass = false;
  }
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const auto& a = rows[i].metrics.at("avg_novel");
    const auto& b = rows[i + 1].metrics.at("avg_novel");
    if (b.mean > a.mean + std::max(a.std, b.std)) out.pass = false;
  }
  out.detail = d.str();
  return out;
}

// 7 ------------------------------------------------------------------------
Outcome statistics_fixtures() {
  Outcome out;
  auto fail = [&](const std::string& s) {
    if (out.pass) out.detail = s;
    out.pass = false;
  };
  const double v1 = fr::cramers_v(fr::ContingencyTable::from_rows({{10, 0}, {0, 10}}));
  const double v0 = fr::cramers_v(fr::ContingencyTable::from_rows({{5, 5}, {5, 5}}));
  const std::vector<std::vector<double>> g = {{1, 2}, {3, 4}};
  const double eta = fr::anova_eta_squared(g).eta_squared;
  if (v1 != 1.0) fail("V of the diagonal table is " + fr::text::shortest(v1));
  if (v0 != 0.0) fail("V of the flat table is " + fr::text::shortest(v0));
  if (eta != 0.8) fail("eta squared fixture is " + fr::text::shortest(eta));

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(2, 6), cnt(0, 30), gs(2, 8), gn(2, 5);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::vector<std::uint64_t>> rows(dim(rng));
    const int cols = dim(rng);
    for (auto& r : rows) {
      for (int c = 0; c < cols; ++c) r.push_back(cnt(rng));
    }
    try {
      const double v = fr::cramers_v(fr::ContingencyTable::from_rows(rows));
      std::vector<std::vector<double>> dt;
      for (const auto& r : rows) dt.emplace_back(r.begin(), r.end());
      worst = std::max(worst, std::abs(v - oracle::cramers_v(dt)));
      if (v < 0.0 || v > 1.0 + 1e-12) fail("V out of [0,1]");
    } catch (const fr::InvalidArgument&) {
      // degenerate draw (a single non-empty row or column)
    }
    std::vector<std::vector<double>> groups(gn(rng));
    for (auto& grp : groups) {
      const int n = gs(rng);
      const double shift = normal(rng);
      for (int i = 0; i < n; ++i) grp.push_back(shift + normal(rng));
    }
    const double e = fr::anova_eta_squared(groups).eta_squared;
    worst = std::max(worst, std::abs(e - oracle::eta_squared(groups)));
    if (e < 0.0 || e > 1.0) fail("eta squared out of [0,1]");
  }
  if (worst > 1e-9) fail("statistics differ from the oracle by " + fr::text::shortest(worst));
  if (out.pass) out.detail = "fixtures exact, 1000 random inputs in bounds";
  return out;
}

// 8 ------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
  }
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) count_b += e.is_regular_file();
  if (files.size() != count_b) {
    why = "file count differs";
    return false;
  }
  for (const auto& f : files) {
    if (slurp(a / f) != slurp(b / f)) {
      why = f.string() + " differs";
      return false;
    }
  }
  return true;
}

Outcome determinism() {
  Outcome out;
  fr::ExperimentConfig cfg;
  cfg.seeds = {1, 2};
  cfg.click_shaper = true;
  cfg.frame_shaper = true;
  cfg.frame_shaper_config.epochs = 5;
  std::vector<fs::path> dirs;
  for (std::size_t threads : {1, 1, 3, 8}) {
    cfg.threads = threads;
    const auto dir = scratch("determinism-" + std::to_string(dirs.size()));
    fr::emit_reports(fr::run_sweep(cfg), dir, true);
    dirs.push_back(dir);
  }
  for (std::size_t i = 1; i < dirs.size(); ++i) {
    std::string why;
    if (!same_tree(dirs[0], dirs[i], why)) return {false, "run " + std::to_string(i) + ": " + why};
  }
  out.detail = "4 runs (threads 1,1,3,8) byte-identical";
  return out;
}

// 9 ------------------------------------------------------------------------
Outcome format_fidelity() {
  Outcome out;
  auto fail = [&](const std::string& s) {
    if (out.pass) out.detail = s;
    out.pass = false;
  };
  const auto& report = default_sweep();
  const auto dir = scratch("format");
  fr::emit_reports(report, dir, false);
  std::ifstream in(dir / "sweep.csv");
  std::string header;
  std::getline(in, header);
  const std::string want =
      "lambda,auc,mrr,ndcg5,ndcg10,cal_c,cal_f,rep_f,act,auc_std,mrr_std,ndcg5_std,"
      "ndcg10_std,cal_c_std,cal_f_std,rep_f_std,act_std";
  if (header != want) fail("sweep.csv header: " + header);
  const std::regex cell(R"(-?\d+\.\d\d)");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto fields = fr::text::split(line, ',');
    if (fields.size() != 17) fail("row with " + std::to_string(fields.size()) + " fields");
    const auto& summary = report.lambdas[rows];
    if (fields[0] != fr::format_lambda(summary.lambda)) fail("lambda column out of order");
    for (std::size_t i = 1; i < fields.size() && i < 17; ++i) {
      const std::string f(fields[i]);
      if (!std::regex_match(f, cell)) fail("cell '" + f + "' is not 2-decimal");
      const auto& name = fr::kSweepMetrics[(i - 1) % 8];
      const auto& s = summary.metrics.at(name);
      const double v = i <= 8 ? s.mean : s.std;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
      std::string expect = buf;
      if (expect == "-0.00") expect = "0.00";
      if (f != expect) fail(name + " cell " + f + " != " + expect);
    }
    ++rows;
  }
  if (rows != 7) fail(std::to_string(rows) + " data rows");

  // Corpus round trip, including a shaped (non-synthetic) embedding space.
  fr::SynthSpec spec;
  spec.n_articles = 150;
  spec.test_impressions = 40;
  const auto corpus = fr::synthesize_corpus(spec, 3);
  const auto paths = fr::write_corpus(corpus, scratch("roundtrip"));
  const auto loaded = fr::load_corpus(paths, spec.max_history);
  if (!(loaded == corpus)) fail("corpus did not round-trip");
  if (out.pass) out.detail = "header and 7x16 cells match, corpus round-trips";
  return out;
}

}  // namespace

int main() {
  // Excluded-impression and lambda-range notices are expected here.
  fr::set_warning_handler({});

  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;  // 0 = none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "oracle equivalence", 10, oracle_equivalence},
      {2, "divergence bounds and identities", 0, divergence_bounds},
      {3, "gradient check", 30, gradient_check},
      {4, "shaping efficacy", 60, shaping_efficacy},
      {5, "lambda direction", 300, lambda_direction},
      {6, "novelty trend", 300, novelty_trend},
      {7, "statistics fixtures", 0, statistics_fixtures},
      {8, "determinism", 0, determinism},
      {9, "format fidelity", 0, format_fidelity},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && secs > c.limit_seconds) {
      o.pass = false;
      o.detail += " (over the " + fr::text::shortest(c.limit_seconds) + " s limit)";
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %d %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(fs::temp_directory_path() / ("framerank-acceptance-" + std::to_string(::getpid())));
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
