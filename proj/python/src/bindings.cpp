#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "framerank/config.hpp"
#include "framerank/corpus.hpp"
#include "framerank/divergence.hpp"
#include "framerank/error.hpp"
#include "framerank/experiment.hpp"
#include "framerank/rank_metrics.hpp"
#include "framerank/scoring.hpp"
#include "framerank/shaper.hpp"
#include "framerank/stats.hpp"
#include "framerank/synth.hpp"

namespace py = pybind11;
using namespace framerank;

namespace {

Split split_of(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "validation") return Split::Validation;
  if (name == "test") return Split::Test;
  throw InvalidArgument("unknown split '" + name + "'");
}

CategoricalDistribution dist(const std::map<std::string, double>& p) {
  return CategoricalDistribution::from_probabilities(p);
}

py::dict metrics_dict(const std::map<std::string, double>& m) {
  py::dict d;
  for (const auto& [k, v] : m) d[py::str(k)] = v;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Frame-aware news re-ranking and evaluation";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<CorpusError>(m, "CorpusError", error.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
  py::register_exception<TrainingError>(m, "TrainingError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

  py::class_<Article>(m, "Article")
      .def_readonly("id", &Article::id)
      .def_readonly("category", &Article::category)
      .def_property_readonly("frame", [](const Article& a) { return std::string(frame_name(a.frame)); })
      .def_readonly("sentiment", &Article::sentiment)
      .def("__repr__", [](const Article& a) { return "<Article " + a.id + ">"; });

  py::class_<Impression>(m, "Impression")
      .def(py::init([](std::string id, std::string user, std::vector<std::string> history,
                       std::vector<std::string> candidates, std::vector<std::uint8_t> clicks) {
             return Impression{std::move(id), std::move(user), std::move(history),
                               std::move(candidates), std::move(clicks)};
           }),
           py::arg("id"), py::arg("user"), py::arg("history"), py::arg("candidates"),
           py::arg("clicks"))
      .def_readonly("id", &Impression::id)
      .def_readonly("user", &Impression::user)
      .def_readonly("history", &Impression::history)
      .def_readonly("candidates", &Impression::candidates)
      .def_readonly("clicks", &Impression::clicks);

  py::class_<Corpus>(m, "Corpus")
      .def_property_readonly("articles", &Corpus::articles)
      .def("__len__", &Corpus::size)
      .def("article", &Corpus::article, py::arg("id"))
      .def(
          "impressions",
          [](const Corpus& c, const std::string& split) { return c.impressions(split_of(split)); },
          py::arg("split") = "test")
      .def(
          "embeddings",
          [](const Corpus& c, const std::string& space) {
            const auto& e = c.embeddings(space == "frame" ? SpaceTag::Frame : SpaceTag::Content);
            Eigen::MatrixXf out(e.rows(), e.dim());
            for (std::size_t i = 0; i < e.rows(); ++i) {
              const auto r = e.row(i);
              for (std::size_t j = 0; j < e.dim(); ++j) out(i, j) = r[j];
            }
            return out;
          },
          py::arg("space") = "content")
      .def("__eq__", &Corpus::operator==);

  m.def(
      "synthesize",
      [](std::uint64_t seed, const std::map<std::string, std::string>& overrides) {
        ExperimentConfig cfg;
        for (const auto& [k, v] : overrides) cfg.set("synth." + k, v);
        cfg.validate();
        return synthesize_corpus(cfg.synth, seed);
      },
      py::arg("seed") = 1, py::arg("overrides") = std::map<std::string, std::string>{},
      "Synthetic corpus; overrides use [synth] key names, e.g. {'n_articles': '200'}.");
  m.def(
      "load_corpus",
      [](const std::filesystem::path& dir, std::size_t max_history) {
        CorpusPaths p{dir / "articles.tsv",         dir / "content.frnk",
                      dir / "frame.frnk",           dir / "behaviors_train.tsv",
                      dir / "behaviors_validation.tsv", dir / "behaviors_test.tsv"};
        return load_corpus(p, max_history);
      },
      py::arg("directory"), py::arg("max_history") = kDefaultMaxHistory);
  m.def(
      "write_corpus",
      [](const Corpus& c, const std::filesystem::path& dir) { write_corpus(c, dir); },
      py::arg("corpus"), py::arg("directory"));

  m.def(
      "rank",
      [](const Impression& imp, const Corpus& c, double lambda, bool use_frame) {
        RankOptions o;
        o.use_frame = use_frame;
        const auto slate = rank_slate(imp, c, lambda, o);
        py::list out;
        for (const auto& e : slate.entries) out.append(py::make_tuple(e.article_id, e.score.final_score));
        return out;
      },
      py::arg("impression"), py::arg("corpus"), py::arg("lambda_"), py::arg("use_frame") = true,
      "Candidates best first as (article_id, final_score).");
  m.def("zscore", [](const std::vector<double>& v) { return zscore(v); }, py::arg("values"));

  m.def(
      "auc",
      [](const std::vector<double>& s, const std::vector<std::uint8_t>& l) { return auc(s, l); },
      py::arg("scores"), py::arg("labels"));
  m.def("mrr", [](const std::vector<std::uint8_t>& l) { return mrr(l); }, py::arg("ranked_labels"));
  m.def(
      "ndcg",
      [](const std::vector<std::uint8_t>& l, std::size_t k) { return ndcg_at_k(l, k); },
      py::arg("ranked_labels"), py::arg("k"));

  m.def(
      "jsd", [](const std::map<std::string, double>& p, const std::map<std::string, double>& q) {
        return jsd(dist(p), dist(q));
      },
      py::arg("p"), py::arg("q"));
  m.def(
      "divergence",
      [](const std::map<std::string, double>& context, const std::map<std::string, double>& rec,
         const std::string& generator) {
        return divergence_dstar(dist(context), dist(rec), parse_generator(generator));
      },
      py::arg("context"), py::arg("recommendation"), py::arg("generator") = "jsd");

  m.def(
      "cramers_v",
      [](const std::vector<std::vector<std::uint64_t>>& rows) {
        return cramers_v(ContingencyTable::from_rows(rows));
      },
      py::arg("table"));
  m.def(
      "anova",
      [](const std::vector<std::vector<double>>& groups) {
        const auto r = anova_eta_squared(groups);
        py::dict d;
        d["eta_squared"] = r.eta_squared;
        d["f"] = r.f_statistic;
        d["p_value"] = r.p_value;
        d["df_between"] = r.df_between;
        d["df_within"] = r.df_within;
        return d;
      },
      py::arg("groups"));

  m.def(
      "supcon_loss",
      [](const Eigen::MatrixXd& base, const std::vector<int>& labels, const Eigen::MatrixXd& weight,
         double temperature) {
        ContrastiveBatch b;
        b.base = base;
        b.labels = labels;
        for (std::size_t i = 0; i < labels.size(); ++i) b.anchors.push_back(i);
        const auto r = supcon_loss(b, ProjectionModel{weight, temperature});
        return py::make_tuple(r.loss, r.gradient);
      },
      py::arg("base"), py::arg("labels"), py::arg("weight"),
      py::arg("temperature") = kDefaultTemperature, "Loss and gradient with every row an anchor.");

  py::class_<ExperimentConfig>(m, "Config")
      .def(py::init<>())
      .def("set", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.set(k, v); })
      .def("validate", &ExperimentConfig::validate)
      .def_readwrite("lambdas", &ExperimentConfig::lambdas)
      .def_readwrite("seeds", &ExperimentConfig::seeds)
      .def_readwrite("threads", &ExperimentConfig::threads);
  m.def("load_config", &load_config, py::arg("path"));
  m.def(
      "parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));

  py::class_<SweepReport>(m, "SweepReport")
      .def("all_ok", &SweepReport::all_ok)
      .def_property_readonly(
          "cells",
          [](const SweepReport& r) {
            py::list out;
            for (const auto& c : r.cells) {
              py::dict d;
              d["lambda"] = c.lambda;
              d["seed"] = c.seed;
              d["ok"] = c.ok;
              d["error"] = c.error;
              d["metrics"] = c.ok ? metrics_dict(c.evaluation.metrics()) : py::dict();
              out.append(d);
            }
            return out;
          })
      .def_property_readonly("summary", [](const SweepReport& r) {
        py::list out;
        for (const auto& l : r.lambdas) {
          py::dict d;
          d["lambda"] = l.lambda;
          for (const auto& [name, s] : l.metrics) {
            d[py::str(name)] = s.mean;
            d[py::str(name + "_std")] = s.std;
          }
          out.append(d);
        }
        return out;
      });
  m.def("run_sweep", &run_sweep, py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("emit_reports", &emit_reports, py::arg("report"), py::arg("directory"),
        py::arg("audit") = true);
  m.def(
      "evaluate",
      [](const Corpus& c, double lambda, const ExperimentConfig& cfg) {
        return metrics_dict(run_cell(c, cfg, lambda).metrics());
      },
      py::arg("corpus"), py::arg("lambda_"), py::arg("config") = ExperimentConfig{});
}
