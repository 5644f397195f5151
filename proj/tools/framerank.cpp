// framerank command line: synth, train, rank, sweep, eval, stats.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "framerank/config.hpp"
#include "framerank/error.hpp"
#include "framerank/experiment.hpp"
#include "framerank/shaper.hpp"
#include "framerank/synth.hpp"
#include "framerank/text.hpp"

namespace fr = framerank;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string corpus_dir;
  std::optional<std::string> lambdas;
  std::optional<std::string> seeds;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> top_k;
  std::optional<std::string> discount;
  std::optional<std::string> split;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "INI config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.sets, "Override a config key, e.g. --set synth.n_users=50")
      ->type_name("KEY=VALUE");
  cmd->add_option("--corpus", c.corpus_dir,
                  "Directory written by `synth` (articles.tsv, content.frnk, ...)");
  cmd->add_option("--lambdas", c.lambdas, "Comma-separated lambda grid");
  cmd->add_option("--seeds", c.seeds, "Comma-separated seeds");
  cmd->add_option("--threads", c.threads, "Worker threads");
  cmd->add_option("--top-k", c.top_k, "Slate cutoff for normative and novelty metrics");
  cmd->add_option("--discount", c.discount, "log2, reciprocal or uniform");
  cmd->add_option("--split", c.split, "train, validation or test");
}

fr::ExperimentConfig resolve(const Common& c) {
  fr::ExperimentConfig cfg = c.config.empty() ? fr::ExperimentConfig{} : fr::load_config(c.config);
  if (!c.corpus_dir.empty()) {
    const std::filesystem::path dir = c.corpus_dir;
    cfg.synthetic = false;
    cfg.paths.articles = dir / "articles.tsv";
    cfg.paths.content_embeddings = dir / "content.frnk";
    cfg.paths.frame_embeddings = dir / "frame.frnk";
    cfg.paths.behaviors_train = dir / "behaviors_train.tsv";
    cfg.paths.behaviors_validation = dir / "behaviors_validation.tsv";
    cfg.paths.behaviors_test = dir / "behaviors_test.tsv";
  }
  if (c.lambdas) cfg.set("lambdas", *c.lambdas);
  if (c.seeds) cfg.set("seeds", *c.seeds);
  if (c.threads) cfg.set("threads", std::to_string(*c.threads));
  if (c.top_k) cfg.set("top_k", std::to_string(*c.top_k));
  if (c.discount) cfg.set("discount", *c.discount);
  if (c.split) cfg.set("split", *c.split);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw fr::ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw fr::Error("cannot write " + path.string());
  return out;
}

// One seed for single-run verbs: --seed wins, then the first configured seed.
std::uint64_t first_seed(const fr::ExperimentConfig& cfg, std::optional<std::uint64_t> seed) {
  return seed ? *seed : cfg.seeds.front();
}

void print_evaluation(const fr::Evaluation& e) {
  const auto m = e.metrics();
  std::cout << "impressions " << e.rank.n_impressions;
  if (e.rank.n_auc_excluded) std::cout << " (" << e.rank.n_auc_excluded << " without AUC)";
  std::cout << '\n';
  for (const auto& name : fr::kSweepMetrics) {
    std::cout << name << ' ' << fr::text::fixed(100.0 * m.at(name), 2) << '\n';
  }
  for (const auto& name : fr::kNoveltyMetrics) {
    std::cout << name << ' ' << fr::text::fixed(m.at(name), 4) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frame-aware news re-ranking and evaluation"};
  app.require_subcommand(1);

  // synth
  Common synth_c;
  std::string synth_out;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  add_common(synth, synth_c);
  synth->add_option("-o,--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Generator seed");

  // train
  Common train_c;
  std::string train_out, train_trace, train_export, objective = "frame";
  std::optional<std::uint64_t> train_seed;
  auto* train = app.add_subcommand("train", "Train a projection shaper");
  add_common(train, train_c);
  train->add_option("--objective", objective, "frame or click")
      ->check(CLI::IsMember({"frame", "click"}));
  train->add_option("-o,--out", train_out, "Checkpoint path")->required();
  train->add_option("--trace", train_trace, "Write the loss trace (TSV)");
  train->add_option("--export", train_export, "Write the shaped embedding space");
  train->add_option("--seed", train_seed, "Seed (also the synthesis seed)");

  // rank
  Common rank_c;
  std::string rank_out;
  double rank_lambda = 0.0;
  std::optional<std::uint64_t> rank_seed;
  auto* rank = app.add_subcommand("rank", "Rank the evaluation split at one lambda");
  add_common(rank, rank_c);
  rank->add_option("--lambda", rank_lambda, "Frame weight")->required();
  rank->add_option("-o,--out", rank_out, "Slate dump (TSV)")->required();
  rank->add_option("--seed", rank_seed, "Seed");

  // sweep
  Common sweep_c;
  std::optional<std::string> sweep_out;
  bool no_audit = false;
  auto* sweep = app.add_subcommand("sweep", "Run the full lambda x seed grid");
  add_common(sweep, sweep_c);
  sweep->add_option("-o,--out", sweep_out, "Report directory (overrides output_dir)");
  sweep->add_flag("--no-audit", no_audit, "Skip per-cell dumps");

  // eval
  Common eval_c;
  std::string eval_slates, eval_out;
  std::optional<std::uint64_t> eval_seed;
  auto* eval = app.add_subcommand("eval", "Evaluate an existing slate dump");
  add_common(eval, eval_c);
  eval->add_option("--slates", eval_slates, "Slate dump written by `rank`")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("-o,--out", eval_out, "Directory for per-impression dumps");
  eval->add_option("--seed", eval_seed, "Seed");

  // stats
  Common stats_c;
  std::string stats_out;
  auto* stats = app.add_subcommand("stats", "Cramer's V and ANOVA eta squared per seed");
  add_common(stats, stats_c);
  stats->add_option("-o,--out", stats_out, "Write stats.json here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      auto cfg = resolve(synth_c);
      const auto corpus = fr::synthesize_corpus(cfg.synth, first_seed(cfg, synth_seed));
      fr::write_corpus(corpus, synth_out);
      std::cout << "wrote " << corpus.size() << " articles to " << synth_out << '\n';
      return 0;
    }

    if (*train) {
      auto cfg = resolve(train_c);
      const auto seed = first_seed(cfg, train_seed);
      fr::Corpus corpus = cfg.synthetic ? fr::synthesize_corpus(cfg.synth, seed)
                                        : fr::load_corpus(cfg.paths, cfg.max_history);
      const auto obj = fr::parse_objective(objective);
      auto sc = obj == fr::Objective::Frame ? cfg.frame_shaper_config : cfg.click_shaper_config;
      sc.seed = seed;
      const auto result =
          fr::train(fr::initial_model(corpus.content().dim(), sc), corpus, obj, sc);
      fr::save_checkpoint(train_out, result.model, seed);
      if (!train_trace.empty()) {
        auto out = open_out(train_trace);
        fr::write_trace(out, result.trace);
      }
      if (!train_export.empty()) {
        const auto space = obj == fr::Objective::Frame ? fr::SpaceTag::Frame : fr::SpaceTag::Content;
        fr::write_embeddings(train_export,
                             fr::export_embeddings(result.model, corpus.content(), space),
                             fr::ids_in_row_order(corpus));
      }
      std::cout << "epochs " << result.trace.epochs_run << ", best " << result.trace.best_epoch
                << '\n';
      return 0;
    }

    if (*rank) {
      auto cfg = resolve(rank_c);
      const auto corpus = fr::prepare_corpus(cfg, first_seed(cfg, rank_seed));
      const auto imps = fr::evaluable_impressions(corpus, cfg.eval_split);
      const auto slates = fr::rank_all(corpus, imps, {rank_lambda, true, cfg.threads});
      auto out = open_out(rank_out);
      fr::write_slate_dump(out, slates);
      std::cout << "ranked " << slates.size() << " impressions\n";
      return 0;
    }

    if (*sweep) {
      auto cfg = resolve(sweep_c);
      if (sweep_out) cfg.output_dir = *sweep_out;
      if (no_audit) cfg.audit = false;
      const auto report = fr::run_sweep(cfg);
      fr::emit_reports(report, cfg.output_dir, cfg.audit);
      std::size_t failed = 0;
      for (const auto& c : report.cells) {
        if (!c.ok) {
          ++failed;
          std::cerr << "cell lambda=" << fr::format_lambda(c.lambda) << " seed=" << c.seed
                    << " failed: " << c.error << '\n';
        }
      }
      std::cout << report.cells.size() - failed << "/" << report.cells.size()
                << " cells ok, reports in " << cfg.output_dir.string() << '\n';
      return report.all_ok() ? 0 : 1;
    }

    if (*eval) {
      auto cfg = resolve(eval_c);
      const auto corpus = fr::prepare_corpus(cfg, first_seed(cfg, eval_seed));
      const auto& imps = corpus.impressions(cfg.eval_split);
      std::ifstream in(eval_slates);
      auto slates = fr::read_slate_dump(in, imps);
      std::vector<fr::Impression> aligned;
      aligned.reserve(slates.size());
      for (const auto& s : slates) {
        for (const auto& imp : imps) {
          if (imp.id == s.impression_id) {
            aligned.push_back(imp);
            break;
          }
        }
      }
      const auto e = fr::evaluate_slates(corpus, aligned, std::move(slates), cfg.normative,
                                         cfg.threads);
      print_evaluation(e);
      if (!eval_out.empty()) {
        std::filesystem::create_directories(eval_out);
        const std::filesystem::path dir = eval_out;
        auto m = open_out(dir / "metrics.tsv");
        fr::write_metric_dump(m, e.normative);
        auto u = open_out(dir / "novelty_users.tsv");
        fr::write_user_dump(u, e.novelty);
        auto d = open_out(dir / "descriptive.tsv");
        fr::write_descriptive_dump(d, e.rank);
      }
      return 0;
    }

    if (*stats) {
      auto cfg = resolve(stats_c);
      std::vector<fr::SeedStatistics> all;
      std::optional<fr::Corpus> loaded;
      if (!cfg.synthetic) loaded = fr::load_corpus(cfg.paths, cfg.max_history);
      bool ok = true;
      for (auto seed : cfg.seeds) {
        fr::SeedStatistics s;
        s.seed = seed;
        try {
          const auto corpus =
              loaded ? *loaded : fr::synthesize_corpus(cfg.synth, seed);
          s.stats = fr::corpus_statistics(corpus, cfg.absolute_sentiment);
        } catch (const std::exception& e) {
          s.error = e.what();
          ok = false;
        }
        all.push_back(std::move(s));
        if (loaded) break;
      }
      const auto doc = fr::stats_json(all);
      if (stats_out.empty()) {
        std::cout << doc;
      } else {
        auto out = open_out(stats_out);
        out << doc;
      }
      return ok ? 0 : 1;
    }
  } catch (const fr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
