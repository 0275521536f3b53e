#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "consum/corpus.hpp"
#include "consum/types.hpp"

namespace consum {

// Pluggable utterance encoder. The pipeline treats the encoder as a frozen
// boundary: backends must be deterministic in inference mode (same text,
// identical vector within 1e-6 per entry).
class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;

  virtual const std::string& name() const = 0;
  virtual int dimension() const = 0;
  virtual bool thread_safe() const { return false; }

  // Utterance-level representation, length dimension(), all entries finite.
  virtual Eigen::VectorXd encode(std::string_view text) const = 0;

  // Token-level representations, one row per token. Used by the
  // token-alignment similarity.
  virtual Eigen::MatrixXd encode_tokens(
      std::span<const std::string> tokens) const = 0;
};

// Deterministic non-neural test double: lowercase, split on
// non-alphanumerics, hash each token to a bucket in [0, d), accumulate
// counts, L2-normalize (the zero vector stays zero). Token-level vectors
// are one-hot bucket indicators.
class HashedBowBackend final : public EncoderBackend {
 public:
  HashedBowBackend(int dimension, std::uint64_t seed);

  const std::string& name() const override { return name_; }
  int dimension() const override { return dimension_; }
  bool thread_safe() const override { return true; }
  Eigen::VectorXd encode(std::string_view text) const override;
  Eigen::MatrixXd encode_tokens(
      std::span<const std::string> tokens) const override;

  std::uint64_t seed() const { return seed_; }
  int token_bucket(std::string_view token) const;

 private:
  std::string name_;
  int dimension_;
  std::uint64_t seed_;
};

// Construct a backend by name ("hashed-bow") with backend-specific options
// passed through as an opaque key-value table ("dimension", "seed").
std::unique_ptr<EncoderBackend> make_encoder(
    const std::string& name,
    const std::map<std::string, std::string>& options = {});

// Per-run embedding cache keyed by (dialogue_id, utterance_id): with the
// cache enabled, each unique key costs exactly one backend call no matter
// how many times a dialogue is re-encoded. When a cache directory is given
// (CONSUM_CACHE_DIR), per-dialogue embedding matrices persist across runs.
class DialogueEncoder {
 public:
  explicit DialogueEncoder(
      const EncoderBackend& backend, bool cache_enabled = true,
      std::optional<std::filesystem::path> cache_dir = std::nullopt);

  // output[i] corresponds to utterances[i]; backend failures surface as an
  // encode error naming the dialogue and utterance id.
  std::vector<Eigen::VectorXd> encode_dialogue(const Dialogue& dialogue);

  const EncoderBackend& backend() const { return backend_; }
  std::size_t backend_calls() const { return backend_calls_; }

 private:
  const EncoderBackend& backend_;
  bool cache_enabled_;
  std::optional<std::filesystem::path> cache_dir_;
  // Key: dialogue_id, utterance_id, and a text digest; the digest guards
  // against id collisions when one encoder serves several corpora.
  std::map<std::string, Eigen::VectorXd> cache_;
  std::size_t backend_calls_ = 0;
};

// Reads CONSUM_CACHE_DIR from the environment; empty/unset disables the
// on-disk cache.
std::optional<std::filesystem::path> cache_dir_from_env();

Eigen::MatrixXd stack_embeddings(std::span<const Eigen::VectorXd> vectors);

}  // namespace consum
