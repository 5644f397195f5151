// Tiny hand-built corpora for unit tests.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "framerank/corpus.hpp"

namespace fixture {

struct Row {
  std::string id;
  framerank::FrameLabel frame = framerank::FrameLabel::Other;
  std::string category = "news";
  double sentiment = 0.0;
  std::vector<float> content;
  std::vector<float> frame_vec;
};

inline framerank::Corpus corpus(const std::vector<Row>& rows,
                                std::vector<framerank::Impression> test,
                                std::vector<framerank::Impression> train = {},
                                std::size_t max_history = framerank::kDefaultMaxHistory) {
  std::vector<framerank::Article> articles;
  std::vector<float> content, frame;
  const std::size_t cdim = rows.empty() ? 1 : std::max<std::size_t>(rows[0].content.size(), 1);
  const std::size_t fdim = rows.empty() ? 1 : std::max<std::size_t>(rows[0].frame_vec.size(), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    articles.push_back({r.id, r.category, r.frame, r.sentiment, i});
    for (std::size_t d = 0; d < cdim; ++d) content.push_back(d < r.content.size() ? r.content[d] : 0.f);
    for (std::size_t d = 0; d < fdim; ++d) frame.push_back(d < r.frame_vec.size() ? r.frame_vec[d] : 0.f);
  }
  return framerank::Corpus::build(
      std::move(articles),
      framerank::EmbeddingMatrix(rows.size(), cdim, std::move(content), framerank::SpaceTag::Content),
      framerank::EmbeddingMatrix(rows.size(), fdim, std::move(frame), framerank::SpaceTag::Frame),
      std::move(train), {}, std::move(test), max_history);
}

inline framerank::Impression impression(std::string id, std::vector<std::string> history,
                                        std::vector<std::string> candidates,
                                        std::vector<std::uint8_t> clicks,
                                        std::string user = "u1") {
  return {std::move(id), std::move(user), std::move(history), std::move(candidates),
          std::move(clicks)};
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("framerank-test-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

}  // namespace fixture
