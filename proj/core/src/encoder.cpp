#include "consum/encoder.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "consum/io_util.hpp"
#include "consum/text.hpp"

namespace consum {

namespace {

std::string option_or(const std::map<std::string, std::string>& options,
                      const std::string& key, const std::string& fallback) {
  auto it = options.find(key);
  return it == options.end() ? fallback : it->second;
}

// On-disk cache entry: dims then row-major doubles for one dialogue.
std::filesystem::path cache_file(const std::filesystem::path& dir,
                                 const EncoderBackend& backend,
                                 const Dialogue& dialogue) {
  std::string key = backend.name();
  key += '\x1f';
  key += std::to_string(backend.dimension());
  key += '\x1f';
  key += dialogue.dialogue_id;
  for (const Utterance& u : dialogue.utterances) {
    key += '\x1f';
    key += u.text;
  }
  std::ostringstream name;
  name << std::hex << io::fnv1a64(key) << ".emb";
  return dir / name.str();
}

bool load_cached(const std::filesystem::path& file, int n, int dim,
                 std::vector<Eigen::VectorXd>& out) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return false;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || rows != static_cast<std::uint32_t>(n) ||
      cols != static_cast<std::uint32_t>(dim)) {
    return false;
  }
  std::vector<Eigen::VectorXd> vectors(n, Eigen::VectorXd(dim));
  for (int i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(vectors[i].data()),
            static_cast<std::streamsize>(sizeof(double) * dim));
  }
  if (!in) return false;
  out = std::move(vectors);
  return true;
}

void store_cached(const std::filesystem::path& file,
                  std::span<const Eigen::VectorXd> vectors, int dim) {
  std::string bytes;
  const auto rows = static_cast<std::uint32_t>(vectors.size());
  const auto cols = static_cast<std::uint32_t>(dim);
  bytes.append(reinterpret_cast<const char*>(&rows), sizeof rows);
  bytes.append(reinterpret_cast<const char*>(&cols), sizeof cols);
  for (const Eigen::VectorXd& v : vectors) {
    bytes.append(reinterpret_cast<const char*>(v.data()),
                 sizeof(double) * static_cast<std::size_t>(dim));
  }
  io::atomic_write_file(file, bytes);
}

}  // namespace

HashedBowBackend::HashedBowBackend(int dimension, std::uint64_t seed)
    : name_("hashed-bow"), dimension_(dimension), seed_(seed) {
  if (dimension < 8) {
    throw ConfigError("hashed-bow dimension must be >= 8, got " +
                      std::to_string(dimension));
  }
}

int HashedBowBackend::token_bucket(std::string_view token) const {
  return static_cast<int>(io::fnv1a64(token, seed_) %
                          static_cast<std::uint64_t>(dimension_));
}

Eigen::VectorXd HashedBowBackend::encode(std::string_view input) const {
  Eigen::VectorXd vec = Eigen::VectorXd::Zero(dimension_);
  for (const std::string& token : text::tokenize(input)) {
    vec[token_bucket(token)] += 1.0;
  }
  const double norm = vec.norm();
  if (norm > 0) vec /= norm;
  return vec;
}

Eigen::MatrixXd HashedBowBackend::encode_tokens(
    std::span<const std::string> tokens) const {
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(tokens.size()), dimension_);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    rows(static_cast<Eigen::Index>(i), token_bucket(tokens[i])) = 1.0;
  }
  return rows;
}

std::unique_ptr<EncoderBackend> make_encoder(
    const std::string& name,
    const std::map<std::string, std::string>& options) {
  if (name == "hashed-bow") {
    // d defaults to 768 to line up with the 768 -> 100 classifier
    // projections.
    const int dimension = std::stoi(option_or(options, "dimension", "768"));
    const auto seed = static_cast<std::uint64_t>(
        std::stoull(option_or(options, "seed", "0")));
    return std::make_unique<HashedBowBackend>(dimension, seed);
  }
  throw ConfigError("unknown encoder backend '" + name + "'");
}

std::optional<std::filesystem::path> cache_dir_from_env() {
  const char* dir = std::getenv("CONSUM_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return std::filesystem::path(dir);
}

DialogueEncoder::DialogueEncoder(const EncoderBackend& backend,
                                 bool cache_enabled,
                                 std::optional<std::filesystem::path> cache_dir)
    : backend_(backend),
      cache_enabled_(cache_enabled),
      cache_dir_(std::move(cache_dir)) {}

std::vector<Eigen::VectorXd> DialogueEncoder::encode_dialogue(
    const Dialogue& dialogue) {
  const int n = dialogue.size();
  if (n == 0) throw Error("cannot encode empty dialogue");
  const int dim = backend_.dimension();

  std::filesystem::path disk_file;
  if (cache_dir_) {
    std::error_code ec;
    std::filesystem::create_directories(*cache_dir_, ec);
    disk_file = cache_file(*cache_dir_, backend_, dialogue);
    std::vector<Eigen::VectorXd> cached;
    if (load_cached(disk_file, n, dim, cached)) return cached;
  }

  std::vector<Eigen::VectorXd> vectors;
  vectors.reserve(n);
  bool any_backend_call = false;
  for (const Utterance& utt : dialogue.utterances) {
    const std::string key = dialogue.dialogue_id + '\x1f' +
                            std::to_string(utt.id) + '\x1f' +
                            std::to_string(io::fnv1a64(utt.text));
    if (cache_enabled_) {
      auto it = cache_.find(key);
      if (it != cache_.end()) {
        vectors.push_back(it->second);
        continue;
      }
    }
    Eigen::VectorXd vec;
    try {
      vec = backend_.encode(utt.text);
      ++backend_calls_;
      any_backend_call = true;
    } catch (const std::exception& e) {
      throw Error("encode failed for dialogue '" + dialogue.dialogue_id +
                  "' utterance " + std::to_string(utt.id) + ": " + e.what());
    }
    if (vec.size() != dim) {
      throw Error("backend '" + backend_.name() + "' returned dimension " +
                  std::to_string(vec.size()) + ", expected " +
                  std::to_string(dim));
    }
    if (cache_enabled_) cache_.emplace(key, vec);
    vectors.push_back(std::move(vec));
  }

  if (cache_dir_ && any_backend_call) {
    store_cached(disk_file, vectors, dim);
  }
  return vectors;
}

Eigen::MatrixXd stack_embeddings(std::span<const Eigen::VectorXd> vectors) {
  if (vectors.empty()) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(vectors.size()),
                      vectors.front().size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = vectors[i].transpose();
  }
  return out;
}

}  // namespace consum
