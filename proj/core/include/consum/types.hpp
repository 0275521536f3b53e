#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace consum {

// Dyadic counseling dialogue: therapist and patient are the only speakers.
enum class Speaker : std::uint8_t { Therapist = 0, Patient = 1 };

// Psychotherapy elements. Enum order fixes the argmax tie-break
// (SH < PD < RT < DF) used throughout classification.
enum class ComponentLabel : std::uint8_t { SH = 0, PD = 1, RT = 2, DF = 3 };

inline constexpr int kNumSpeakers = 2;
inline constexpr int kNumComponentLabels = 4;

inline constexpr ComponentLabel kAllComponentLabels[kNumComponentLabels] = {
    ComponentLabel::SH, ComponentLabel::PD, ComponentLabel::RT,
    ComponentLabel::DF};

// The three labels that carry summary-relevant content; DF is peripheral talk.
inline constexpr ComponentLabel kCounselingComponents[3] = {
    ComponentLabel::SH, ComponentLabel::PD, ComponentLabel::RT};

// Wire codes used in the JSONL corpus format and in decoder-input tags.
std::string_view speaker_code(Speaker speaker);         // "T" / "P"
std::string_view label_code(ComponentLabel label);      // "SH" / "PD" / "RT" / "DF"
Speaker speaker_from_code(std::string_view code);
ComponentLabel label_from_code(std::string_view code);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or invalid input data (corpus lines, lexicon files).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration or operation arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Model artifact persistence failures (version, checksum, kind tag).
class ModelIoError : public Error {
 public:
  using Error::Error;
};

// Binary per-utterance mask, index-aligned with a dialogue's utterances.
// Holds the filler mask tau, the knowledge mask sigma, and the fused
// keep-mask F depending on context.
class MaskArray {
 public:
  MaskArray() = default;
  explicit MaskArray(std::size_t size, bool value = false)
      : bits_(size, value ? 1 : 0) {}

  static MaskArray from_bits(std::vector<std::uint8_t> bits);

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool value) { bits_[i] = value ? 1 : 0; }

  std::size_t popcount() const;
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  bool operator==(const MaskArray&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// Warning sink for non-fatal conditions (empty-token similarity inputs,
// single-class training corpora, over-long dialogues). Defaults to stderr.
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void reset_warning_sink();
void warn(const std::string& message);

}  // namespace consum
