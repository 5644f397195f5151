#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "framerank/corpus.hpp"
#include "framerank/normative.hpp"
#include "framerank/shaper.hpp"
#include "framerank/synth.hpp"

namespace framerank {

inline const std::vector<double> kDefaultLambdaGrid = {-1.0, -0.4, -0.1, 0.0, 0.1, 0.4, 1.0};

struct ExperimentConfig {
  // [corpus]
  bool synthetic = true;
  CorpusPaths paths;
  std::size_t max_history = kDefaultMaxHistory;
  // [synth]
  SynthSpec synth;

  // top level
  std::vector<double> lambdas = kDefaultLambdaGrid;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  NormativeConfig normative;
  Split eval_split = Split::Test;
  std::size_t threads = 1;
  std::filesystem::path output_dir = "framerank-out";
  bool audit = true;

  // [frame_shaper] / [click_shaper]
  bool frame_shaper = false;
  ShaperConfig frame_shaper_config;
  bool click_shaper = false;
  ShaperConfig click_shaper_config = default_click_shaper();

  // [stats]
  bool absolute_sentiment = false;

  static ShaperConfig default_click_shaper();

  // Sets one key, spelled `key` for top-level keys and `section.key`
  // otherwise. Throws ConfigError for unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);

  // Throws ConfigError when an invariant fails (empty grids, missing paths).
  void validate() const;
};

// Parses `key = value` lines with optional [section] blocks; `#` and `;`
// start comments. Relative corpus paths resolve against `base_dir`.
ExperimentConfig parse_config(std::string_view text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace framerank
