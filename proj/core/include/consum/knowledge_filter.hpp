#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "consum/corpus.hpp"
#include "consum/encoder.hpp"
#include "consum/types.hpp"

namespace consum {

inline constexpr int kNumPhqItems = 9;
inline constexpr double kDefaultPhi = 6.0;

struct PhqItem {
  int id = 0;  // 1..9
  std::string text;
  std::vector<std::string> phrases;
};

// The nine PHQ-9 screening items, each with an editable phrase list used
// for relevance scoring. Other nine-item questionnaires can be substituted
// via the JSON file format.
class PhqLexicon {
 public:
  explicit PhqLexicon(std::vector<PhqItem> items);

  static PhqLexicon default_phq9();
  // {"items": [{"id": 1..9, "text": str, "phrases": [str, ...]}]}
  static PhqLexicon from_json(std::istream& in);
  static PhqLexicon from_file(const std::filesystem::path& path);
  std::string to_json() const;

  std::span<const PhqItem> items() const { return items_; }

 private:
  std::vector<PhqItem> items_;
};

struct TokenAlignment {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // either side empty after tokenization
};

// Greedy token-alignment similarity: embed both token sequences with the
// backend, cosine-match each candidate token to its best reference token
// and vice versa, then F1 of the two greedy means, clamped to [0, 1].
TokenAlignment token_alignment_score(std::string_view candidate,
                                     std::string_view reference,
                                     const EncoderBackend& backend);

// Per-item similarity: maximum alignment F1 over the item's phrases.
double token_alignment_similarity(std::string_view utterance,
                                  const PhqItem& item,
                                  const EncoderBackend& backend);

struct KnowledgeScore {
  std::array<double, kNumPhqItems> per_item{};
  double psi = 0.0;  // sum of the nine per-item scores, in [0, 9]
};

KnowledgeScore knowledge_score(std::string_view utterance,
                               const PhqLexicon& phq,
                               const EncoderBackend& backend);

std::vector<KnowledgeScore> knowledge_scores(const Dialogue& dialogue,
                                             const PhqLexicon& phq,
                                             const EncoderBackend& backend);

// sigma[i] = 1 iff psi_i <= phi (boundary inclusive).
MaskArray knowledge_mask(const Dialogue& dialogue, const PhqLexicon& phq,
                         double phi, const EncoderBackend& backend);
MaskArray knowledge_mask_from_scores(std::span<const KnowledgeScore> scores,
                                     double phi);

}  // namespace consum
