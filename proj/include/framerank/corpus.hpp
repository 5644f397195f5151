#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "framerank/distribution.hpp"
#include "framerank/frames.hpp"

namespace framerank {

inline constexpr std::size_t kDefaultMaxHistory = 50;

struct Article {
  std::string id;
  std::string category;
  FrameLabel frame = FrameLabel::Other;
  double sentiment = 0.0;  // signed polarity in [-1, 1]
  std::size_t row = 0;     // row in both embedding matrices

  bool operator==(const Article&) const = default;
};

enum class SpaceTag : std::uint8_t { Content, Frame };

const char* space_name(SpaceTag space);

// Dense row-major float matrix, one row per article.
class EmbeddingMatrix {
public:
  EmbeddingMatrix() = default;

  // Throws InvalidArgument on a size mismatch or non-finite value.
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> values,
                  SpaceTag space);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  SpaceTag space() const { return space_; }
  std::span<const float> row(std::size_t i) const;
  const std::vector<float>& values() const { return values_; }

  bool operator==(const EmbeddingMatrix&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> values_;
  SpaceTag space_ = SpaceTag::Content;
};

struct Impression {
  std::string id;
  std::string user;
  std::vector<std::string> history;  // most recent last
  std::vector<std::string> candidates;
  std::vector<std::uint8_t> clicks;  // 0/1, aligned with candidates

  std::size_t click_count() const;
  bool operator==(const Impression&) const = default;
};

enum class Split : std::uint8_t { Train, Validation, Test };

const char* split_name(Split split);

// Immutable, cross-validated article collection with its two embedding
// spaces and impression log.
class Corpus {
public:
  Corpus() = default;

  // Validates and assembles a corpus. Histories longer than `max_history`
  // keep only their most recent entries. Throws CorpusError on any
  // inconsistency (duplicate ids, dangling references, row mismatches).
  static Corpus build(std::vector<Article> articles, EmbeddingMatrix content,
                      EmbeddingMatrix frame, std::vector<Impression> train,
                      std::vector<Impression> validation,
                      std::vector<Impression> test,
                      std::size_t max_history = kDefaultMaxHistory);

  const std::vector<Article>& articles() const { return articles_; }
  std::size_t size() const { return articles_.size(); }

  const Article& article(const std::string& id) const;
  std::optional<std::size_t> find(const std::string& id) const;
  // Position of an article in articles(); throws CorpusError if absent.
  std::size_t index_of(const std::string& id) const;

  const EmbeddingMatrix& embeddings(SpaceTag space) const;
  const EmbeddingMatrix& content() const { return content_; }
  const EmbeddingMatrix& frame() const { return frame_; }

  const std::vector<Impression>& impressions(Split split) const;

  // Returns a copy with one embedding space swapped out. The replacement
  // must have the same row count.
  Corpus with_embeddings(EmbeddingMatrix replacement) const;

  bool operator==(const Corpus& other) const;

private:
  std::vector<Article> articles_;
  std::unordered_map<std::string, std::size_t> index_;
  EmbeddingMatrix content_;
  EmbeddingMatrix frame_;
  std::array<std::vector<Impression>, 3> impressions_;
};

struct CorpusPaths {
  std::filesystem::path articles;
  std::filesystem::path content_embeddings;
  std::filesystem::path frame_embeddings;
  std::filesystem::path behaviors_train;       // optional, may be empty
  std::filesystem::path behaviors_validation;  // optional, may be empty
  std::filesystem::path behaviors_test;
};

// Sidecar listing article ids in row order: `<embedding path>.ids`.
std::filesystem::path ids_sidecar(const std::filesystem::path& embedding_path);

Corpus load_corpus(const CorpusPaths& paths,
                   std::size_t max_history = kDefaultMaxHistory);

// Writes every corpus file into `dir` and returns the paths used.
CorpusPaths write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

struct EmbeddingFile {
  EmbeddingMatrix matrix;
  std::vector<std::string> ids;
};

EmbeddingFile read_embeddings(const std::filesystem::path& path, SpaceTag space);
void write_embeddings(const std::filesystem::path& path,
                      const EmbeddingMatrix& matrix,
                      const std::vector<std::string>& ids);

std::vector<Article> read_articles(const std::filesystem::path& path);
void write_articles(const std::filesystem::path& path,
                    const std::vector<Article>& articles);
std::vector<Impression> read_behaviors(const std::filesystem::path& path);
void write_behaviors(const std::filesystem::path& path,
                     const std::vector<Impression>& impressions);

// Share of each of the 15 frames over all articles. Frames that never occur
// are present with probability 0.
CategoricalDistribution frame_distribution(const Corpus& corpus);

// Article ids in embedding-row order.
std::vector<std::string> ids_in_row_order(const Corpus& corpus);

}  // namespace framerank
