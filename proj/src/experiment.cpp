#include "framerank/experiment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "framerank/error.hpp"
#include "framerank/parallel.hpp"
#include "framerank/shaper.hpp"
#include "framerank/synth.hpp"
#include "framerank/text.hpp"

namespace framerank {
namespace {

std::ofstream open_report(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

std::map<std::string, double> Evaluation::metrics() const {
  auto ndcg = [&](std::size_t k) {
    auto it = rank.ndcg_at.find(k);
    return it == rank.ndcg_at.end() ? 0.0 : it->second;
  };
  return {{"auc", rank.auc},
          {"mrr", rank.mrr},
          {"ndcg5", ndcg(5)},
          {"ndcg10", ndcg(10)},
          {"cal_c", normative.cal_category},
          {"cal_f", normative.cal_frame},
          {"rep_f", normative.rep_frame},
          {"act", normative.activation},
          {"avg_unique", novelty.avg_unique_frames},
          {"avg_novel", novelty.avg_novel_frames},
          {"avg_kl", novelty.avg_kl}};
}

bool SweepReport::all_ok() const {
  for (const auto& c : cells) {
    if (!c.ok) return false;
  }
  for (const auto& s : stats) {
    if (!s.stats) return false;
  }
  return true;
}

Corpus prepare_corpus(const ExperimentConfig& config, std::uint64_t seed,
                      const Corpus* loaded) {
  Corpus base;
  if (config.synthetic) {
    base = synthesize_corpus(config.synth, seed);
  } else if (loaded) {
    base = *loaded;
  } else {
    base = load_corpus(config.paths, config.max_history);
  }
  Corpus shaped = base;
  if (config.frame_shaper) {
    auto cfg = config.frame_shaper_config;
    cfg.seed = seed;
    const auto result = train(initial_model(base.content().dim(), cfg), base, Objective::Frame, cfg);
    shaped = shaped.with_embeddings(
        export_embeddings(result.model, base.content(), SpaceTag::Frame));
  }
  if (config.click_shaper) {
    auto cfg = config.click_shaper_config;
    cfg.seed = seed;
    const auto result = train(initial_model(base.content().dim(), cfg), base, Objective::Click, cfg);
    shaped = shaped.with_embeddings(
        export_embeddings(result.model, base.content(), SpaceTag::Content));
  }
  return shaped;
}

std::vector<Impression> evaluable_impressions(const Corpus& corpus, Split split,
                                              std::size_t* skipped) {
  std::vector<Impression> out;
  std::size_t dropped = 0;
  for (const auto& imp : corpus.impressions(split)) {
    if (imp.history.empty()) {
      ++dropped;
      continue;
    }
    out.push_back(imp);
  }
  if (skipped) *skipped = dropped;
  return out;
}

std::vector<RankedSlate> rank_all(const Corpus& corpus,
                                  const std::vector<Impression>& impressions,
                                  const RankSettings& settings) {
  std::vector<RankedSlate> slates(impressions.size());
  RankOptions options;
  options.use_frame = settings.use_frame;
  parallel_for(impressions.size(), settings.threads, [&](std::size_t i) {
    slates[i] = rank_slate(impressions[i], corpus, settings.lambda, options);
  });
  return slates;
}

Evaluation evaluate_slates(const Corpus& corpus, const std::vector<Impression>& impressions,
                           std::vector<RankedSlate> slates, const NormativeConfig& normative,
                           std::size_t threads) {
  if (impressions.empty()) throw InvalidArgument("empty evaluation set");
  if (impressions.size() != slates.size()) {
    throw InvalidArgument("slates and impressions are not aligned");
  }
  const auto context = NormativeContext::of(corpus, normative.n_bins);
  std::vector<ImpressionNormative> normative_rows(impressions.size());
  std::vector<ImpressionNovelty> novelty_rows(impressions.size());
  parallel_for(impressions.size(), threads, [&](std::size_t i) {
    normative_rows[i] =
        evaluate_normative_impression(corpus, context, impressions[i], slates[i], normative);
    novelty_rows[i] = evaluate_novelty_impression(corpus, impressions[i], slates[i], normative.top_k);
  });
  Evaluation e;
  e.rank = evaluate_descriptive(slates, impressions, kDefaultCutoffs);
  e.normative = summarize_normative(std::move(normative_rows));
  e.novelty = summarize_novelty(std::move(novelty_rows));
  e.slates = std::move(slates);
  return e;
}

Evaluation run_cell(const Corpus& corpus, const ExperimentConfig& config, double lambda,
                    bool use_frame) {
  std::size_t skipped = 0;
  const auto impressions = evaluable_impressions(corpus, config.eval_split, &skipped);
  auto slates = rank_all(corpus, impressions, {lambda, use_frame, config.threads});
  auto e = evaluate_slates(corpus, impressions, std::move(slates), config.normative, config.threads);
  e.skipped_impressions = skipped;
  return e;
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

SweepReport run_sweep(const ExperimentConfig& config) {
  config.validate();
  std::optional<Corpus> loaded;
  if (!config.synthetic) loaded = load_corpus(config.paths, config.max_history);

  const std::size_t n_l = config.lambdas.size();
  const std::size_t n_s = config.seeds.size();
  std::vector<CellResult> grid(n_l * n_s);
  SweepReport report;

  for (std::size_t s = 0; s < n_s; ++s) {
    const auto seed = config.seeds[s];
    std::optional<Corpus> corpus;
    std::string prep_error;
    try {
      corpus = prepare_corpus(config, seed, loaded ? &*loaded : nullptr);
    } catch (const std::exception& e) {
      prep_error = std::string("corpus preparation failed: ") + e.what();
    }

    SeedStatistics st;
    st.seed = seed;
    if (corpus) {
      try {
        st.stats = corpus_statistics(*corpus, config.absolute_sentiment);
      } catch (const std::exception& e) {
        st.error = e.what();
      }
    } else {
      st.error = prep_error;
    }
    report.stats.push_back(std::move(st));

    for (std::size_t l = 0; l < n_l; ++l) {
      CellResult& cell = grid[l * n_s + s];
      cell.lambda = config.lambdas[l];
      cell.seed = seed;
      if (!corpus) {
        cell.error = prep_error;
        continue;
      }
      try {
        cell.evaluation = run_cell(*corpus, config, cell.lambda);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  }

  for (std::size_t l = 0; l < n_l; ++l) {
    LambdaSummary summary;
    summary.lambda = config.lambdas[l];
    std::map<std::string, std::vector<double>> values;
    for (std::size_t s = 0; s < n_s; ++s) {
      const auto& cell = grid[l * n_s + s];
      if (!cell.ok) continue;
      for (const auto& [name, v] : cell.evaluation.metrics()) values[name].push_back(v);
    }
    for (const auto& name : kSweepMetrics) summary.metrics[name] = summarize(values[name]);
    for (const auto& name : kNoveltyMetrics) summary.metrics[name] = summarize(values[name]);
    report.lambdas.push_back(std::move(summary));
  }
  report.cells = std::move(grid);
  return report;
}

std::string format_lambda(double lambda) {
  if (lambda == 0.0) lambda = 0.0;
  std::string s = text::shortest(lambda);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void write_descriptive_dump(std::ostream& out, const RankReport& report) {
  out << "impression_id\tauc\tmrr\tndcg5\tndcg10\n";
  for (const auto& m : report.per_impression) {
    auto ndcg = [&](std::size_t k) {
      auto it = m.ndcg.find(k);
      return it == m.ndcg.end() ? std::string("NA") : text::shortest(it->second);
    };
    out << m.impression_id << '\t' << (m.auc_defined ? text::shortest(m.auc) : "NA") << '\t'
        << text::shortest(m.mrr) << '\t' << ndcg(5) << '\t' << ndcg(10) << '\n';
  }
}

std::string stats_json(const std::vector<SeedStatistics>& stats) {
  nlohmann::ordered_json doc;
  doc["seeds"] = nlohmann::ordered_json::array();
  std::vector<double> v_values, eta_values;
  for (const auto& s : stats) {
    nlohmann::ordered_json entry;
    entry["seed"] = s.seed;
    if (!s.stats) {
      entry["error"] = s.error;
      doc["seeds"].push_back(entry);
      continue;
    }
    const auto& st = *s.stats;
    entry["cramers_v"] = std::round(st.cramers_v * 1000.0) / 1000.0;
    entry["cramers_v_raw"] = st.cramers_v;
    entry["chi_squared"] = st.chi2;
    entry["table_rows"] = st.table.rows();
    entry["table_columns"] = st.table.columns();
    entry["table_total"] = st.table.total();
    entry["eta_squared"] = st.anova.eta_squared;
    entry["anova_f"] = std::isfinite(st.anova.f_statistic)
                           ? nlohmann::ordered_json(st.anova.f_statistic)
                           : nlohmann::ordered_json("inf");
    entry["anova_p_value"] = st.anova.p_value;
    entry["anova_df_between"] = st.anova.df_between;
    entry["anova_df_within"] = st.anova.df_within;
    entry["anova_groups"] = st.anova_groups;
    entry["absolute_sentiment"] = st.absolute_sentiment;
    v_values.push_back(st.cramers_v);
    eta_values.push_back(st.anova.eta_squared);
    doc["seeds"].push_back(entry);
  }
  const auto v = summarize(v_values);
  const auto eta = summarize(eta_values);
  doc["cramers_v_mean"] = std::round(v.mean * 1000.0) / 1000.0;
  doc["cramers_v_std"] = v.std;
  doc["eta_squared_mean"] = eta.mean;
  doc["eta_squared_std"] = eta.std;
  return doc.dump(2) + "\n";
}

void emit_reports(const SweepReport& report, const std::filesystem::path& output_dir,
                  bool audit) {
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) throw Error("cannot create " + output_dir.string() + ": " + ec.message());

  {
    auto out = open_report(output_dir / "sweep.csv");
    out << "lambda";
    for (const auto& m : kSweepMetrics) out << ',' << m;
    for (const auto& m : kSweepMetrics) out << ',' << m << "_std";
    out << '\n';
    for (const auto& row : report.lambdas) {
      out << format_lambda(row.lambda);
      auto cell = [&](double v, std::size_t n) {
        out << ',' << (n ? text::fixed(100.0 * v, 2) : "NA");
      };
      for (const auto& m : kSweepMetrics) cell(row.metrics.at(m).mean, row.metrics.at(m).n);
      for (const auto& m : kSweepMetrics) cell(row.metrics.at(m).std, row.metrics.at(m).n);
      out << '\n';
    }
    if (!out) throw Error("failed writing sweep.csv");
  }
  {
    auto out = open_report(output_dir / "novelty.csv");
    out << "lambda";
    for (const auto& m : kNoveltyMetrics) out << ',' << m;
    for (const auto& m : kNoveltyMetrics) out << ',' << m << "_std";
    out << '\n';
    for (const auto& row : report.lambdas) {
      out << format_lambda(row.lambda);
      auto cell = [&](double v, std::size_t n) { out << ',' << (n ? text::fixed(v, 4) : "NA"); };
      for (const auto& m : kNoveltyMetrics) cell(row.metrics.at(m).mean, row.metrics.at(m).n);
      for (const auto& m : kNoveltyMetrics) cell(row.metrics.at(m).std, row.metrics.at(m).n);
      out << '\n';
    }
    if (!out) throw Error("failed writing novelty.csv");
  }
  {
    auto out = open_report(output_dir / "stats.json");
    out << stats_json(report.stats);
  }
  {
    auto cells = open_report(output_dir / "cells.csv");
    auto diag = open_report(output_dir / "diagnostics.txt");
    cells << "lambda,seed,status";
    for (const auto& m : kSweepMetrics) cells << ',' << m;
    for (const auto& m : kNoveltyMetrics) cells << ',' << m;
    cells << '\n';
    for (const auto& c : report.cells) {
      cells << format_lambda(c.lambda) << ',' << c.seed << ',' << (c.ok ? "ok" : "failed");
      const auto metrics = c.evaluation.metrics();
      for (const auto& m : kSweepMetrics) cells << ',' << (c.ok ? text::shortest(metrics.at(m)) : "NA");
      for (const auto& m : kNoveltyMetrics) cells << ',' << (c.ok ? text::shortest(metrics.at(m)) : "NA");
      cells << '\n';
      if (!c.ok) {
        diag << "lambda=" << format_lambda(c.lambda) << " seed=" << c.seed << ": " << c.error << '\n';
      } else if (c.evaluation.skipped_impressions) {
        diag << "lambda=" << format_lambda(c.lambda) << " seed=" << c.seed << ": skipped "
             << c.evaluation.skipped_impressions << " impressions with empty history\n";
      }
    }
    for (const auto& s : report.stats) {
      if (!s.stats) diag << "stats seed=" << s.seed << ": " << s.error << '\n';
    }
  }
  if (!audit) return;
  for (const auto& c : report.cells) {
    if (!c.ok) continue;
    const auto dir = output_dir / "cells" /
                     ("lambda_" + format_lambda(c.lambda) + "_seed_" + std::to_string(c.seed));
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
    auto slates = open_report(dir / "slates.tsv");
    write_slate_dump(slates, c.evaluation.slates);
    auto metrics = open_report(dir / "metrics.tsv");
    write_metric_dump(metrics, c.evaluation.normative);
    auto users = open_report(dir / "novelty_users.tsv");
    write_user_dump(users, c.evaluation.novelty);
    auto descriptive = open_report(dir / "descriptive.tsv");
    write_descriptive_dump(descriptive, c.evaluation.rank);
  }
}

}  // namespace framerank
