#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "consum/component_classifier.hpp"
#include "consum/corpus.hpp"
#include "consum/encoder.hpp"
#include "consum/filler_classifier.hpp"
#include "consum/knowledge_filter.hpp"
#include "consum/types.hpp"

namespace consum {

// Fused keep-mask: F_i = NOT(sigma_i AND tau_i). An utterance is dropped
// only when MH-Know flags it low-relevance AND the DFC flags it filler.
MaskArray fuse_masks(const MaskArray& sigma, const MaskArray& tau);

struct GenerationConfig {
  int max_length = 150;
  double repetition_penalty = 5.0;
  int num_beams = 8;
};

void validate_generation_config(const GenerationConfig& config);

struct DecoderInput {
  std::string text;  // G: "[T|P] <utterance> [<label>]" joined by spaces
  std::vector<std::pair<int, ComponentLabel>> provenance;  // retained ids
  bool empty() const { return text.empty(); }
};

// G = (U_i concatenated with its predicted component tag) filtered by F.
// Retained utterances keep dialogue order; label tags can be omitted for
// the CCC-disabled ablation.
DecoderInput build_decoder_input(const Dialogue& dialogue,
                                 std::span<const ComponentPrediction> predictions,
                                 const MaskArray& keep,
                                 bool include_label_tags = true);

struct Summary {
  std::string dialogue_id;
  std::string text;
  bool empty_input = false;
  std::string decoder_name;
};

// Abstractive decoder boundary. Implementations must be deterministic for a
// fixed state and config (beam search, no sampling). Fine-tuning is an
// optional capability; the shipped extractive double is frozen.
class DecoderBackend {
 public:
  virtual ~DecoderBackend() = default;
  virtual const std::string& name() const = 0;
  virtual bool thread_safe() const { return false; }
  virtual std::string generate(const std::string& input,
                               const GenerationConfig& config) = 0;
  virtual bool trainable() const { return false; }
  // pairs are (decoder input G, reference summary).
  virtual void fine_tune(
      std::span<const std::pair<std::string, std::string>> pairs, int epochs);
};

// Test double: returns the first max_length whitespace tokens of the input.
class ExtractiveDecoder final : public DecoderBackend {
 public:
  const std::string& name() const override { return name_; }
  bool thread_safe() const override { return true; }
  std::string generate(const std::string& input,
                       const GenerationConfig& config) override;

 private:
  std::string name_ = "extractive";
};

std::unique_ptr<DecoderBackend> make_decoder(
    const std::string& name,
    const std::map<std::string, std::string>& options = {});

// Empty decoder input short-circuits to an empty summary without touching
// the backend.
Summary generate_summary(const DecoderInput& input, DecoderBackend& decoder,
                         const GenerationConfig& config,
                         const std::string& dialogue_id);

struct IntermediateTrace {
  std::vector<double> psi;
  MaskArray tau;
  MaskArray sigma;
  MaskArray keep;  // F
  std::vector<ComponentPrediction> predictions;
  std::string decoder_input;  // G
};

// Full pipeline: encode -> (tau, sigma, predictions) -> F -> G -> summary.
// Stage failures surface with the stage name and dialogue_id.
Summary summarize_dialogue(const Dialogue& dialogue, const DfcModel& dfc,
                           const CccModel& ccc, const PhqLexicon& phq,
                           double phi, DialogueEncoder& encoder,
                           DecoderBackend& decoder,
                           const GenerationConfig& config,
                           IntermediateTrace* trace = nullptr);

}  // namespace consum
