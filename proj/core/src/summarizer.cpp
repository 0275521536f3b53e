#include "consum/summarizer.hpp"

#include <algorithm>

#include "consum/text.hpp"

namespace consum {

namespace {

[[noreturn]] void stage_error(const std::string& stage,
                              const std::string& dialogue_id,
                              const std::exception& cause) {
  throw Error("pipeline stage '" + stage + "' failed for dialogue '" +
              dialogue_id + "': " + cause.what());
}

}  // namespace

MaskArray fuse_masks(const MaskArray& sigma, const MaskArray& tau) {
  if (sigma.size() != tau.size()) {
    throw Error("fuse_masks: length mismatch (" +
                std::to_string(sigma.size()) + " vs " +
                std::to_string(tau.size()) + ")");
  }
  MaskArray keep(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    keep.set(i, !(sigma[i] && tau[i]));
  }
  return keep;
}

void validate_generation_config(const GenerationConfig& config) {
  if (config.max_length < 1 || config.repetition_penalty <= 0.0 ||
      config.num_beams < 1) {
    throw ConfigError("generation config requires max_length >= 1, "
                      "repetition_penalty > 0, num_beams >= 1");
  }
}

DecoderInput build_decoder_input(
    const Dialogue& dialogue,
    std::span<const ComponentPrediction> predictions, const MaskArray& keep,
    bool include_label_tags) {
  const auto n = dialogue.utterances.size();
  if (predictions.size() != n || keep.size() != n) {
    throw Error("build_decoder_input: predictions and mask must match the "
                "dialogue length");
  }
  DecoderInput input;
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    const Utterance& utt = dialogue.utterances[i];
    const ComponentLabel label = predictions[i].predicted;
    if (!input.text.empty()) input.text += ' ';
    input.text += '[';
    input.text += speaker_code(utt.speaker);
    input.text += "] ";
    input.text += utt.text;
    if (include_label_tags) {
      input.text += " [";
      input.text += label_code(label);
      input.text += ']';
    }
    input.provenance.emplace_back(utt.id, label);
  }
  return input;
}

void DecoderBackend::fine_tune(
    std::span<const std::pair<std::string, std::string>>, int) {
  throw ConfigError("decoder backend '" + name() +
                    "' does not support fine-tuning");
}

std::string ExtractiveDecoder::generate(const std::string& input,
                                        const GenerationConfig& config) {
  validate_generation_config(config);
  auto tokens = text::whitespace_tokens(input);
  if (static_cast<int>(tokens.size()) > config.max_length) {
    tokens.resize(config.max_length);
  }
  return text::join(tokens, " ");
}

std::unique_ptr<DecoderBackend> make_decoder(
    const std::string& name, const std::map<std::string, std::string>&) {
  if (name == "extractive") return std::make_unique<ExtractiveDecoder>();
  throw ConfigError("unknown decoder backend '" + name + "'");
}

Summary generate_summary(const DecoderInput& input, DecoderBackend& decoder,
                         const GenerationConfig& config,
                         const std::string& dialogue_id) {
  validate_generation_config(config);
  Summary summary;
  summary.dialogue_id = dialogue_id;
  summary.decoder_name = decoder.name();
  if (input.empty()) {
    summary.empty_input = true;
    return summary;
  }
  try {
    summary.text = decoder.generate(input.text, config);
  } catch (const std::exception& e) {
    throw Error("decoder '" + decoder.name() + "' failed for dialogue '" +
                dialogue_id + "': " + e.what());
  }
  return summary;
}

Summary summarize_dialogue(const Dialogue& dialogue, const DfcModel& dfc,
                           const CccModel& ccc, const PhqLexicon& phq,
                           double phi, DialogueEncoder& encoder,
                           DecoderBackend& decoder,
                           const GenerationConfig& config,
                           IntermediateTrace* trace) {
  std::vector<Eigen::VectorXd> embeddings;
  try {
    embeddings = encoder.encode_dialogue(dialogue);
  } catch (const std::exception& e) {
    stage_error("encode", dialogue.dialogue_id, e);
  }

  MaskArray tau;
  try {
    tau = dfc.predict_filler_mask(embeddings);
  } catch (const std::exception& e) {
    stage_error("dfc", dialogue.dialogue_id, e);
  }

  std::vector<KnowledgeScore> scores;
  MaskArray sigma;
  try {
    scores = knowledge_scores(dialogue, phq, encoder.backend());
    sigma = knowledge_mask_from_scores(scores, phi);
  } catch (const std::exception& e) {
    stage_error("mh-know", dialogue.dialogue_id, e);
  }

  std::vector<ComponentPrediction> predictions;
  try {
    predictions = ccc.predict(embeddings);
  } catch (const std::exception& e) {
    stage_error("ccc", dialogue.dialogue_id, e);
  }

  const MaskArray keep = fuse_masks(sigma, tau);
  const DecoderInput input =
      build_decoder_input(dialogue, predictions, keep);
  Summary summary =
      generate_summary(input, decoder, config, dialogue.dialogue_id);

  if (trace != nullptr) {
    trace->psi.clear();
    for (const KnowledgeScore& s : scores) trace->psi.push_back(s.psi);
    trace->tau = tau;
    trace->sigma = sigma;
    trace->keep = keep;
    trace->predictions = predictions;
    trace->decoder_input = input.text;
  }
  return summary;
}

}  // namespace consum
