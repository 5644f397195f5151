#include "framerank/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "framerank/error.hpp"
#include "framerank/text.hpp"

namespace framerank {
namespace {

using Setter = std::function<void(ExperimentConfig&, std::string_view)>;

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            std::string_view expected) {
  throw ConfigError("config key '" + std::string(key) + "': '" + std::string(value) +
                    "' is not " + std::string(expected));
}

std::vector<std::string> list_items(std::string_view value) {
  std::string s(value);
  for (char& c : s) {
    if (c == ',') c = ' ';
  }
  return text::split_words(s);
}

double as_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  if (!text::parse_double(text::trim(v), out)) bad_value(key, v, "a number");
  return out;
}

std::size_t as_size(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  if (!text::parse_size(text::trim(v), out)) bad_value(key, v, "a non-negative integer");
  return out;
}

bool as_bool(std::string_view key, std::string_view v) {
  const auto t = text::trim(v);
  if (t == "true" || t == "on" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "off" || t == "no" || t == "0") return false;
  bad_value(key, v, "a boolean");
}

void add_shaper_keys(std::map<std::string, Setter>& keys, const std::string& section,
                     bool ExperimentConfig::*enabled, ShaperConfig ExperimentConfig::*cfg) {
  keys[section + ".enabled"] = [=](ExperimentConfig& c, std::string_view v) {
    c.*enabled = as_bool(section + ".enabled", v);
  };
  auto sz = [&](const std::string& name, std::size_t ShaperConfig::*f) {
    const std::string key = section + "." + name;
    keys[key] = [=](ExperimentConfig& c, std::string_view v) { (c.*cfg).*f = as_size(key, v); };
  };
  auto dbl = [&](const std::string& name, double ShaperConfig::*f) {
    const std::string key = section + "." + name;
    keys[key] = [=](ExperimentConfig& c, std::string_view v) { (c.*cfg).*f = as_double(key, v); };
  };
  sz("epochs", &ShaperConfig::epochs);
  sz("patience", &ShaperConfig::patience);
  sz("steps_per_epoch", &ShaperConfig::steps_per_epoch);
  sz("instances_per_class", &ShaperConfig::instances_per_class);
  sz("classes_per_batch", &ShaperConfig::classes_per_batch);
  sz("neg_ratio", &ShaperConfig::neg_ratio);
  sz("batch_size", &ShaperConfig::batch_size);
  sz("dim_out", &ShaperConfig::dim_out);
  dbl("learning_rate", &ShaperConfig::learning_rate);
  dbl("momentum", &ShaperConfig::momentum);
  dbl("temperature", &ShaperConfig::temperature);
  dbl("validation_fraction", &ShaperConfig::validation_fraction);
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> keys = [] {
    std::map<std::string, Setter> k;
    // Top level.
    k["lambdas"] = [](ExperimentConfig& c, std::string_view v) {
      c.lambdas.clear();
      for (const auto& item : list_items(v)) c.lambdas.push_back(as_double("lambdas", item));
    };
    k["seeds"] = [](ExperimentConfig& c, std::string_view v) {
      c.seeds.clear();
      for (const auto& item : list_items(v)) c.seeds.push_back(as_size("seeds", item));
    };
    k["top_k"] = [](ExperimentConfig& c, std::string_view v) {
      c.normative.top_k = as_size("top_k", v);
    };
    k["n_bins"] = [](ExperimentConfig& c, std::string_view v) {
      c.normative.n_bins = as_size("n_bins", v);
    };
    k["discount"] = [](ExperimentConfig& c, std::string_view v) {
      try {
        c.normative.discount = parse_discount(text::trim(v));
      } catch (const InvalidArgument&) {
        bad_value("discount", v, "one of log2, reciprocal, uniform");
      }
    };
    k["split"] = [](ExperimentConfig& c, std::string_view v) {
      const auto t = text::trim(v);
      if (t == "train") c.eval_split = Split::Train;
      else if (t == "validation") c.eval_split = Split::Validation;
      else if (t == "test") c.eval_split = Split::Test;
      else bad_value("split", v, "one of train, validation, test");
    };
    k["threads"] = [](ExperimentConfig& c, std::string_view v) {
      c.threads = as_size("threads", v);
    };
    k["output_dir"] = [](ExperimentConfig& c, std::string_view v) {
      c.output_dir = std::string(text::trim(v));
    };
    k["audit"] = [](ExperimentConfig& c, std::string_view v) { c.audit = as_bool("audit", v); };

    // [corpus]
    k["corpus.source"] = [](ExperimentConfig& c, std::string_view v) {
      const auto t = text::trim(v);
      if (t == "synthetic") c.synthetic = true;
      else if (t == "files") c.synthetic = false;
      else bad_value("corpus.source", v, "synthetic or files");
    };
    auto path = [&k](const std::string& name, std::filesystem::path CorpusPaths::*f) {
      k["corpus." + name] = [f](ExperimentConfig& c, std::string_view v) {
        c.paths.*f = std::string(text::trim(v));
      };
    };
    path("articles", &CorpusPaths::articles);
    path("content_embeddings", &CorpusPaths::content_embeddings);
    path("frame_embeddings", &CorpusPaths::frame_embeddings);
    path("behaviors_train", &CorpusPaths::behaviors_train);
    path("behaviors_validation", &CorpusPaths::behaviors_validation);
    path("behaviors_test", &CorpusPaths::behaviors_test);
    k["corpus.max_history"] = [](ExperimentConfig& c, std::string_view v) {
      c.max_history = as_size("corpus.max_history", v);
      c.synth.max_history = c.max_history;
      c.frame_shaper_config.max_history = c.max_history;
      c.click_shaper_config.max_history = c.max_history;
    };

    // [synth]
    auto ssz = [&k](const std::string& name, std::size_t SynthSpec::*f) {
      const std::string key = "synth." + name;
      k[key] = [=](ExperimentConfig& c, std::string_view v) { c.synth.*f = as_size(key, v); };
    };
    auto sdbl = [&k](const std::string& name, double SynthSpec::*f) {
      const std::string key = "synth." + name;
      k[key] = [=](ExperimentConfig& c, std::string_view v) { c.synth.*f = as_double(key, v); };
    };
    ssz("n_articles", &SynthSpec::n_articles);
    ssz("n_users", &SynthSpec::n_users);
    ssz("train_impressions", &SynthSpec::train_impressions);
    ssz("validation_impressions", &SynthSpec::validation_impressions);
    ssz("test_impressions", &SynthSpec::test_impressions);
    ssz("dim", &SynthSpec::dim);
    ssz("frame_dim", &SynthSpec::frame_dim);
    ssz("n_categories", &SynthSpec::n_categories);
    ssz("history_min", &SynthSpec::history_min);
    ssz("history_max", &SynthSpec::history_max);
    ssz("candidates", &SynthSpec::candidates);
    ssz("clicks", &SynthSpec::clicks);
    sdbl("frame_skew", &SynthSpec::frame_skew);
    sdbl("frame_mainstream", &SynthSpec::frame_mainstream);
    sdbl("content_noise", &SynthSpec::content_noise);
    sdbl("frame_noise", &SynthSpec::frame_noise);
    sdbl("category_coupling", &SynthSpec::category_coupling);
    sdbl("category_weight", &SynthSpec::category_weight);
    sdbl("sentiment_sd", &SynthSpec::sentiment_sd);
    sdbl("affinity_concentration", &SynthSpec::affinity_concentration);
    sdbl("click_temperature", &SynthSpec::click_temperature);
    k["synth.frames"] = [](ExperimentConfig& c, std::string_view v) {
      // Frame names contain spaces and commas, so this list is `|`-separated.
      c.synth.frames.clear();
      for (auto item : text::split(v, '|')) {
        const auto t = text::trim(item);
        if (t.empty()) continue;
        try {
          c.synth.frames.push_back(parse_frame(t));
        } catch (const InvalidArgument& e) {
          throw ConfigError(std::string("synth.frames: ") + e.what());
        }
      }
    };
    k["synth.frame_weights"] = [](ExperimentConfig& c, std::string_view v) {
      c.synth.frame_weights.clear();
      for (const auto& item : list_items(v)) {
        c.synth.frame_weights.push_back(as_double("synth.frame_weights", item));
      }
    };
    k["synth.frame_sentiment"] = [](ExperimentConfig& c, std::string_view v) {
      c.synth.frame_sentiment.clear();
      for (const auto& item : list_items(v)) {
        c.synth.frame_sentiment.push_back(as_double("synth.frame_sentiment", item));
      }
    };

    add_shaper_keys(k, "frame_shaper", &ExperimentConfig::frame_shaper,
                    &ExperimentConfig::frame_shaper_config);
    add_shaper_keys(k, "click_shaper", &ExperimentConfig::click_shaper,
                    &ExperimentConfig::click_shaper_config);

    k["stats.absolute_sentiment"] = [](ExperimentConfig& c, std::string_view v) {
      c.absolute_sentiment = as_bool("stats.absolute_sentiment", v);
    };
    return k;
  }();
  return keys;
}

}  // namespace

ShaperConfig ExperimentConfig::default_click_shaper() {
  ShaperConfig c;
  c.epochs = 5;
  c.steps_per_epoch = 20;
  c.batch_size = 8;
  c.neg_ratio = 4;
  return c;
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  const auto& keys = setters();
  auto it = keys.find(std::string(text::trim(key)));
  if (it == keys.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second(*this, value);
}

void ExperimentConfig::validate() const {
  if (lambdas.empty()) throw ConfigError("lambda grid is empty");
  if (seeds.empty()) throw ConfigError("seed list is empty");
  if (normative.top_k == 0) throw ConfigError("top_k must be at least 1");
  if (normative.n_bins < 2) throw ConfigError("n_bins must be at least 2");
  if (!synthetic) {
    if (paths.articles.empty() || paths.content_embeddings.empty() ||
        paths.frame_embeddings.empty() || paths.behaviors_test.empty()) {
      throw ConfigError(
          "file corpus needs articles, content_embeddings, frame_embeddings and behaviors_test");
    }
  } else {
    try {
      synth.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("synth: ") + e.what());
    }
  }
}

ExperimentConfig parse_config(std::string_view text,
                              const std::filesystem::path& base_dir) {
  // The INI reader only knows whole-line comments; drop trailing ones too.
  std::string stripped;
  for (auto line : text::split(text, '\n')) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if ((line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line = line.substr(0, i);
        break;
      }
    }
    stripped.append(line).push_back('\n');
  }
  boost::property_tree::ptree tree;
  std::istringstream in{stripped};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig config;
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      config.set(key, node.data());
      continue;
    }
    for (const auto& [sub, leaf] : node) config.set(key + "." + sub, leaf.data());
  }
  if (!base_dir.empty()) {
    for (auto* p : {&config.paths.articles, &config.paths.content_embeddings,
                    &config.paths.frame_embeddings, &config.paths.behaviors_train,
                    &config.paths.behaviors_validation, &config.paths.behaviors_test}) {
      if (!p->empty() && p->is_relative()) *p = base_dir / *p;
    }
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

}  // namespace framerank
