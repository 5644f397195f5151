#include "framerank/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "framerank/error.hpp"
#include "framerank/text.hpp"

namespace framerank {
namespace {

constexpr char kMagic[4] = {'F', 'R', 'N', 'K'};
constexpr std::uint32_t kFormatVersion = 1;
// magic(4) version(4) rows(4) dim(4) reserved(4)
constexpr std::size_t kHeaderBytes = 20;

const char* const kArticlesHeader = "article_id\tcategory\tframe\tsentiment";
const char* const kBehaviorsHeader =
    "impression_id\tuser_id\thistory\tcandidates\tclicks";

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw CorpusError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc
                                 : std::ios::out | std::ios::trunc);
  if (!out) throw CorpusError("cannot write " + path.string());
  return out;
}

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.push_back(' ');
    out += items[i];
  }
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

const char* space_name(SpaceTag space) {
  return space == SpaceTag::Content ? "content" : "frame";
}

const char* split_name(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "?";
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim,
                                 std::vector<float> values, SpaceTag space)
    : rows_(rows), dim_(dim), values_(std::move(values)), space_(space) {
  if (values_.size() != rows_ * dim_) {
    throw InvalidArgument("embedding matrix expects " +
                          std::to_string(rows_ * dim_) + " values, got " +
                          std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InvalidArgument("non-finite embedding value at row " +
                            std::to_string(i / std::max<std::size_t>(dim_, 1)));
    }
  }
}

std::span<const float> EmbeddingMatrix::row(std::size_t i) const {
  if (i >= rows_) {
    throw InvalidArgument("embedding row " + std::to_string(i) + " out of range");
  }
  return {values_.data() + i * dim_, dim_};
}

std::size_t Impression::click_count() const {
  return static_cast<std::size_t>(std::count(clicks.begin(), clicks.end(), 1));
}

Corpus Corpus::build(std::vector<Article> articles, EmbeddingMatrix content,
                     EmbeddingMatrix frame, std::vector<Impression> train,
                     std::vector<Impression> validation,
                     std::vector<Impression> test, std::size_t max_history) {
  Corpus c;
  c.articles_ = std::move(articles);
  std::vector<bool> row_seen(c.articles_.size(), false);
  for (std::size_t i = 0; i < c.articles_.size(); ++i) {
    const Article& a = c.articles_[i];
    if (a.id.empty()) throw CorpusError("article with empty id");
    if (!c.index_.emplace(a.id, i).second) {
      throw CorpusError("duplicate article id '" + a.id + "'");
    }
    if (!(a.sentiment >= -1.0 && a.sentiment <= 1.0)) {
      throw CorpusError("article '" + a.id + "' sentiment outside [-1, 1]");
    }
    if (a.row >= c.articles_.size() || row_seen[a.row]) {
      throw CorpusError("article '" + a.id + "' has invalid row index");
    }
    row_seen[a.row] = true;
  }
  if (content.rows() != c.articles_.size() || frame.rows() != c.articles_.size()) {
    throw CorpusError("embedding row count mismatch: " +
                      std::to_string(content.rows()) + " content rows, " +
                      std::to_string(frame.rows()) + " frame rows, " +
                      std::to_string(c.articles_.size()) + " articles");
  }
  if (content.space() != SpaceTag::Content || frame.space() != SpaceTag::Frame) {
    throw CorpusError("embedding matrices passed in the wrong spaces");
  }
  c.content_ = std::move(content);
  c.frame_ = std::move(frame);

  std::array<std::vector<Impression>*, 3> parts = {&train, &validation, &test};
  for (std::size_t s = 0; s < parts.size(); ++s) {
    for (Impression& imp : *parts[s]) {
      if (imp.candidates.empty()) {
        throw CorpusError("impression '" + imp.id + "' has no candidates");
      }
      if (imp.clicks.size() != imp.candidates.size()) {
        throw CorpusError("impression '" + imp.id +
                          "' clicks not aligned with candidates");
      }
      for (auto flag : imp.clicks) {
        if (flag > 1) throw CorpusError("impression '" + imp.id + "' click flag not 0/1");
      }
      for (const auto* ids : {&imp.history, &imp.candidates}) {
        for (const auto& id : *ids) {
          if (!c.index_.count(id)) {
            throw CorpusError("impression '" + imp.id +
                              "' references unknown article '" + id + "'");
          }
        }
      }
      if (imp.history.size() > max_history) {
        imp.history.erase(imp.history.begin(),
                          imp.history.end() - static_cast<std::ptrdiff_t>(max_history));
      }
    }
    c.impressions_[s] = std::move(*parts[s]);
  }
  return c;
}

const Article& Corpus::article(const std::string& id) const {
  return articles_[index_of(id)];
}

std::optional<std::size_t> Corpus::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Corpus::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw CorpusError("unknown article '" + id + "'");
  return it->second;
}

const EmbeddingMatrix& Corpus::embeddings(SpaceTag space) const {
  return space == SpaceTag::Content ? content_ : frame_;
}

const std::vector<Impression>& Corpus::impressions(Split split) const {
  return impressions_[static_cast<std::size_t>(split)];
}

Corpus Corpus::with_embeddings(EmbeddingMatrix replacement) const {
  if (replacement.rows() != articles_.size()) {
    throw CorpusError("replacement embeddings have " +
                      std::to_string(replacement.rows()) + " rows, corpus has " +
                      std::to_string(articles_.size()) + " articles");
  }
  Corpus c = *this;
  if (replacement.space() == SpaceTag::Content) {
    c.content_ = std::move(replacement);
  } else {
    c.frame_ = std::move(replacement);
  }
  return c;
}

bool Corpus::operator==(const Corpus& other) const {
  return articles_ == other.articles_ && content_ == other.content_ &&
         frame_ == other.frame_ && impressions_ == other.impressions_;
}

std::filesystem::path ids_sidecar(const std::filesystem::path& embedding_path) {
  auto p = embedding_path;
  p += ".ids";
  return p;
}

std::vector<Article> read_articles(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw CorpusError(path.string() + ": empty file");
  ++lineno;
  strip_cr(line);
  if (line != kArticlesHeader) {
    throw CorpusError(where(path, lineno) + "unexpected header");
  }
  std::vector<Article> out;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() != 4) {
      throw CorpusError(where(path, lineno) + "expected 4 fields, got " +
                        std::to_string(fields.size()));
    }
    Article a;
    a.id = std::string(fields[0]);
    a.category = std::string(fields[1]);
    try {
      a.frame = parse_frame(fields[2]);
    } catch (const InvalidArgument& e) {
      throw CorpusError(where(path, lineno) + e.what());
    }
    if (!text::parse_double(fields[3], a.sentiment)) {
      throw CorpusError(where(path, lineno) + "bad sentiment '" +
                        std::string(fields[3]) + "'");
    }
    if (!(a.sentiment >= -1.0 && a.sentiment <= 1.0)) {
      throw CorpusError(where(path, lineno) + "sentiment outside [-1, 1]");
    }
    a.row = out.size();
    out.push_back(std::move(a));
  }
  return out;
}

void write_articles(const std::filesystem::path& path,
                    const std::vector<Article>& articles) {
  auto out = open_out(path);
  out << kArticlesHeader << '\n';
  for (const auto& a : articles) {
    out << a.id << '\t' << a.category << '\t' << frame_name(a.frame) << '\t'
        << text::shortest(a.sentiment) << '\n';
  }
  if (!out) throw CorpusError("failed writing " + path.string());
}

std::vector<Impression> read_behaviors(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw CorpusError(path.string() + ": empty file");
  ++lineno;
  strip_cr(line);
  if (line != kBehaviorsHeader) {
    throw CorpusError(where(path, lineno) + "unexpected header");
  }
  std::vector<Impression> out;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() != 5) {
      throw CorpusError(where(path, lineno) + "expected 5 fields, got " +
                        std::to_string(fields.size()));
    }
    Impression imp;
    imp.id = std::string(fields[0]);
    imp.user = std::string(fields[1]);
    imp.history = text::split_words(fields[2]);
    imp.candidates = text::split_words(fields[3]);
    for (const auto& flag : text::split_words(fields[4])) {
      if (flag != "0" && flag != "1") {
        throw CorpusError(where(path, lineno) + "click flag '" + flag + "' is not 0/1");
      }
      imp.clicks.push_back(flag == "1" ? 1 : 0);
    }
    if (imp.candidates.empty()) {
      throw CorpusError(where(path, lineno) + "no candidates");
    }
    if (imp.clicks.size() != imp.candidates.size()) {
      throw CorpusError(where(path, lineno) + "clicks not aligned with candidates");
    }
    out.push_back(std::move(imp));
  }
  return out;
}

void write_behaviors(const std::filesystem::path& path,
                     const std::vector<Impression>& impressions) {
  auto out = open_out(path);
  out << kBehaviorsHeader << '\n';
  for (const auto& imp : impressions) {
    std::string clicks;
    for (std::size_t i = 0; i < imp.clicks.size(); ++i) {
      if (i) clicks.push_back(' ');
      clicks.push_back(imp.clicks[i] ? '1' : '0');
    }
    out << imp.id << '\t' << imp.user << '\t' << join(imp.history) << '\t'
        << join(imp.candidates) << '\t' << clicks << '\n';
  }
  if (!out) throw CorpusError("failed writing " + path.string());
}

EmbeddingFile read_embeddings(const std::filesystem::path& path, SpaceTag space) {
  auto in = open_in(path, true);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CorpusError(path.string() + ": not an embedding file");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t version = get_u32(p + 4);
  const std::uint32_t rows = get_u32(p + 8);
  const std::uint32_t cols = get_u32(p + 12);
  const std::uint32_t reserved = get_u32(p + 16);
  if (version != kFormatVersion) {
    throw CorpusError(path.string() + ": unsupported version " + std::to_string(version));
  }
  if (reserved != 0) throw CorpusError(path.string() + ": reserved header bytes not zero");
  const std::size_t expected = kHeaderBytes + std::size_t{rows} * cols * 4;
  if (bytes.size() != expected) {
    throw CorpusError(path.string() + ": expected " + std::to_string(expected) +
                      " bytes, found " + std::to_string(bytes.size()));
  }
  std::vector<float> values(std::size_t{rows} * cols);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(get_u32(p + kHeaderBytes + 4 * i));
  }
  EmbeddingFile file;
  try {
    file.matrix = EmbeddingMatrix(rows, cols, std::move(values), space);
  } catch (const InvalidArgument& e) {
    throw CorpusError(path.string() + ": " + e.what());
  }

  auto ids_in = open_in(ids_sidecar(path));
  std::string line;
  while (std::getline(ids_in, line)) {
    strip_cr(line);
    if (!line.empty()) file.ids.push_back(line);
  }
  if (file.ids.size() != rows) {
    throw CorpusError(ids_sidecar(path).string() + ": lists " +
                      std::to_string(file.ids.size()) + " ids for " +
                      std::to_string(rows) + " rows");
  }
  return file;
}

void write_embeddings(const std::filesystem::path& path,
                      const EmbeddingMatrix& matrix,
                      const std::vector<std::string>& ids) {
  if (ids.size() != matrix.rows()) {
    throw InvalidArgument("id list does not match embedding rows");
  }
  std::string buf(kMagic, 4);
  put_u32(buf, kFormatVersion);
  put_u32(buf, static_cast<std::uint32_t>(matrix.rows()));
  put_u32(buf, static_cast<std::uint32_t>(matrix.dim()));
  put_u32(buf, 0);
  buf.reserve(buf.size() + matrix.values().size() * 4);
  for (float v : matrix.values()) put_u32(buf, std::bit_cast<std::uint32_t>(v));
  {
    auto out = open_out(path, true);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw CorpusError("failed writing " + path.string());
  }
  auto out = open_out(ids_sidecar(path));
  for (const auto& id : ids) out << id << '\n';
  if (!out) throw CorpusError("failed writing " + ids_sidecar(path).string());
}

Corpus load_corpus(const CorpusPaths& paths, std::size_t max_history) {
  auto articles = read_articles(paths.articles);
  auto content = read_embeddings(paths.content_embeddings, SpaceTag::Content);
  auto frame = read_embeddings(paths.frame_embeddings, SpaceTag::Frame);
  if (content.ids != frame.ids) {
    throw CorpusError("content and frame embeddings list different row orders");
  }
  if (content.ids.size() != articles.size()) {
    throw CorpusError("embedding row count mismatch: " +
                      std::to_string(content.ids.size()) + " rows for " +
                      std::to_string(articles.size()) + " articles");
  }
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < content.ids.size(); ++r) {
    if (!row_of.emplace(content.ids[r], r).second) {
      throw CorpusError("embedding sidecar repeats id '" + content.ids[r] + "'");
    }
  }
  for (auto& a : articles) {
    auto it = row_of.find(a.id);
    if (it == row_of.end()) {
      throw CorpusError("article '" + a.id + "' has no embedding row");
    }
    a.row = it->second;
  }
  auto read_opt = [](const std::filesystem::path& p) {
    return p.empty() ? std::vector<Impression>{} : read_behaviors(p);
  };
  return Corpus::build(std::move(articles), std::move(content.matrix),
                       std::move(frame.matrix), read_opt(paths.behaviors_train),
                       read_opt(paths.behaviors_validation),
                       read_behaviors(paths.behaviors_test), max_history);
}

std::vector<std::string> ids_in_row_order(const Corpus& corpus) {
  std::vector<std::string> ids(corpus.size());
  for (const auto& a : corpus.articles()) ids[a.row] = a.id;
  return ids;
}

CorpusPaths write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw CorpusError("cannot create " + dir.string() + ": " + ec.message());
  CorpusPaths paths;
  paths.articles = dir / "articles.tsv";
  paths.content_embeddings = dir / "content.frnk";
  paths.frame_embeddings = dir / "frame.frnk";
  paths.behaviors_train = dir / "behaviors_train.tsv";
  paths.behaviors_validation = dir / "behaviors_validation.tsv";
  paths.behaviors_test = dir / "behaviors_test.tsv";

  write_articles(paths.articles, corpus.articles());
  const auto ids = ids_in_row_order(corpus);
  write_embeddings(paths.content_embeddings, corpus.content(), ids);
  write_embeddings(paths.frame_embeddings, corpus.frame(), ids);
  write_behaviors(paths.behaviors_train, corpus.impressions(Split::Train));
  write_behaviors(paths.behaviors_validation, corpus.impressions(Split::Validation));
  write_behaviors(paths.behaviors_test, corpus.impressions(Split::Test));
  return paths;
}

CategoricalDistribution frame_distribution(const Corpus& corpus) {
  if (corpus.size() == 0) throw InvalidArgument("frame distribution of an empty corpus");
  std::array<double, kFrameCount> counts{};
  for (const auto& a : corpus.articles()) counts[frame_index(a.frame)] += 1.0;
  std::map<std::string, double> masses;
  for (auto f : all_frames()) {
    masses.emplace(std::string(frame_name(f)), counts[frame_index(f)]);
  }
  return CategoricalDistribution::from_masses(std::move(masses));
}

}  // namespace framerank
