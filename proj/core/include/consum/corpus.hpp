#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "consum/types.hpp"

namespace consum {

struct Utterance {
  int id = 0;  // position in dialogue, 0..n-1
  Speaker speaker = Speaker::Therapist;
  std::string text;
  std::optional<ComponentLabel> gold_label;
  // Filled by pseudo-label runs; persisted separately from gold labels.
  std::optional<ComponentLabel> predicted_label;

  bool operator==(const Utterance&) const = default;
};

struct Dialogue {
  std::string dialogue_id;
  std::vector<Utterance> utterances;
  std::optional<std::string> reference_summary;

  int size() const { return static_cast<int>(utterances.size()); }
  bool operator==(const Dialogue&) const = default;
};

enum class SplitTag : std::uint8_t { Train, Test, Val };

std::string_view split_tag_name(SplitTag tag);

struct Corpus {
  std::vector<Dialogue> dialogues;
  std::optional<SplitTag> split_tag;

  int size() const { return static_cast<int>(dialogues.size()); }
  long total_utterances() const;
  bool fully_labeled() const;
  bool operator==(const Corpus&) const = default;
};

// JSONL, one dialogue per line:
//   {"dialogue_id": str, "reference_summary": str|null,
//    "utterances": [{"speaker": "T"|"P", "text": str,
//                    "label": "SH"|"PD"|"RT"|"DF"|null,
//                    "predicted_label": ...|null}]}
// Utterance ids are positional. Errors report the offending line number.
Corpus parse_corpus(std::istream& in);
Corpus parse_corpus_file(const std::filesystem::path& path);
std::string serialize_corpus(const Corpus& corpus);
void write_corpus_file(const Corpus& corpus, const std::filesystem::path& path);

struct SplitRatios {
  double train = 0.7;
  double test = 0.2;
  double val = 0.1;
};

struct SplitResult {
  Corpus train;
  Corpus test;
  Corpus val;
};

// Partition by shuffled dialogue index. Sizes are floor(ratio * #D) per
// split with the remainder assigned to train.
SplitResult split_corpus(const Corpus& corpus, SplitRatios ratios,
                         std::uint64_t seed);

struct CorpusStats {
  int num_dialogues = 0;
  long total_utterances = 0;
  double utterances_per_dialogue = 0.0;
  std::array<long, kNumSpeakers> per_speaker_total{};
  // Per-label fields are populated only when every utterance carries a gold
  // label; corpora without full labels degrade to totals-only.
  bool fully_labeled = false;
  std::array<std::array<long, kNumComponentLabels>, kNumSpeakers>
      per_speaker_label{};
  std::array<std::array<double, kNumComponentLabels>, kNumSpeakers>
      per_speaker_label_per_dialogue{};
};

CorpusStats corpus_stats(const Corpus& corpus);
std::string render_stats_table(const CorpusStats& stats);
std::string stats_to_json(const CorpusStats& stats);

struct SyntheticSpec {
  int num_dialogues = 20;
  int utterances_per_dialogue = 12;
  // Must sum to 1 across the four labels; missing labels mean probability 0.
  std::map<ComponentLabel, double> label_distribution = {
      {ComponentLabel::SH, 0.20},
      {ComponentLabel::PD, 0.48},
      {ComponentLabel::RT, 0.11},
      {ComponentLabel::DF, 0.21},
  };
  std::uint64_t vocabulary_seed = 0;
};

// Deterministic fixture corpus. Each label draws words from a disjoint
// label-specific vocabulary so downstream classifiers have learnable
// signal; reference summaries concatenate the SH/PD/RT utterance texts.
Corpus generate_synthetic_corpus(const SyntheticSpec& spec,
                                 std::uint64_t seed);

}  // namespace consum
