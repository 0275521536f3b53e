#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "consum/corpus.hpp"

namespace fixtures {

// Separable four-way corpus: disjoint per-label vocabularies, roughly
// balanced labels.
inline consum::Corpus separable_corpus(int dialogues, int utterances,
                                       std::uint64_t seed) {
  consum::SyntheticSpec spec;
  spec.num_dialogues = dialogues;
  spec.utterances_per_dialogue = utterances;
  spec.label_distribution = {{consum::ComponentLabel::SH, 0.25},
                             {consum::ComponentLabel::PD, 0.25},
                             {consum::ComponentLabel::RT, 0.25},
                             {consum::ComponentLabel::DF, 0.25}};
  spec.vocabulary_seed = seed;
  return consum::generate_synthetic_corpus(spec, seed);
}

inline consum::Dialogue make_dialogue(
    const std::string& id,
    const std::vector<std::tuple<consum::Speaker, std::string,
                                 consum::ComponentLabel>>& rows,
    const std::string& reference = "") {
  consum::Dialogue dialogue;
  dialogue.dialogue_id = id;
  int next_id = 0;
  for (const auto& [speaker, text, label] : rows) {
    consum::Utterance utt;
    utt.id = next_id++;
    utt.speaker = speaker;
    utt.text = text;
    utt.gold_label = label;
    dialogue.utterances.push_back(std::move(utt));
  }
  if (!reference.empty()) dialogue.reference_summary = reference;
  return dialogue;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("consum-test-" + std::to_string(rd()) + "-" +
             std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

// Deterministic token-sequence generator for property tests.
inline std::string random_token_text(std::mt19937_64& rng, int max_tokens,
                                     int vocab_size = 12) {
  const int count = static_cast<int>(rng() % (max_tokens + 1));
  std::string out;
  for (int i = 0; i < count; ++i) {
    if (i > 0) out += ' ';
    out += "w" + std::to_string(rng() % vocab_size);
  }
  return out;
}

}  // namespace fixtures
