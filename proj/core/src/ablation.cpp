#include "consum/ablation.hpp"

#include <algorithm>
#include <cctype>
#include <istream>

#include <nlohmann/json.hpp>

namespace consum {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return s;
}

ordered_json mask_json(const MaskArray& mask) {
  ordered_json arr = ordered_json::array();
  for (std::size_t i = 0; i < mask.size(); ++i) arr.push_back(mask[i] ? 1 : 0);
  return arr;
}

}  // namespace

AblationSpec parse_ablation_spec(const std::string& spec_text) {
  AblationSpec spec;
  std::string token;
  auto consume = [&]() {
    if (token.empty()) return;
    const std::string key = upper(token);
    token.clear();
    if (key == "SH" || key == "PD" || key == "RT") {
      spec.masked_components.insert(label_from_code(key));
    } else if (key == "MH-KNOW" || key == "MHKNOW") {
      spec.disable_mh_know = true;
    } else if (key == "CCC") {
      spec.disable_ccc = true;
    } else if (key == "DF") {
      throw ConfigError("ablation spec: DF is not a counseling component "
                        "and cannot be masked");
    } else {
      throw ConfigError("ablation spec: unknown token '" + key +
                        "' (expected SH, PD, RT, MH-Know, or CCC)");
    }
  };
  for (char c : spec_text) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      consume();
    } else {
      token.push_back(c);
    }
  }
  consume();
  return spec;
}

Summary summarize_dialogue_ablated(const Dialogue& dialogue, RunContext& ctx,
                                   const AblationSpec& ablation,
                                   IntermediateTrace* trace) {
  const auto embeddings = ctx.encoder.encode_dialogue(dialogue);
  const MaskArray tau = ctx.dfc.predict_filler_mask(embeddings);

  std::vector<KnowledgeScore> scores;
  MaskArray sigma;
  if (ablation.disable_mh_know) {
    sigma = MaskArray(embeddings.size(), false);
  } else {
    scores = knowledge_scores(dialogue, ctx.phq, ctx.encoder.backend());
    sigma = knowledge_mask_from_scores(scores, ctx.phi);
  }

  const auto predictions = ctx.ccc.predict(embeddings);
  MaskArray keep = fuse_masks(sigma, tau);

  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i]) continue;
    ComponentLabel label;
    if (ablation.mask_on_gold) {
      const auto& gold = dialogue.utterances[i].gold_label;
      if (!gold) {
        throw Error("ablation on gold labels requires a fully labeled "
                    "corpus (dialogue '" + dialogue.dialogue_id +
                    "' utterance " + std::to_string(i) + " is unlabeled)");
      }
      label = *gold;
    } else {
      label = predictions[i].predicted;
    }
    if (ablation.masked_components.contains(label)) keep.set(i, false);
  }

  const DecoderInput input = build_decoder_input(
      dialogue, predictions, keep, /*include_label_tags=*/!ablation.disable_ccc);
  Summary summary = generate_summary(input, ctx.decoder, ctx.generation,
                                     dialogue.dialogue_id);

  if (trace != nullptr) {
    trace->psi.clear();
    if (!ablation.disable_mh_know) {
      for (const KnowledgeScore& s : scores) trace->psi.push_back(s.psi);
    }
    trace->tau = tau;
    trace->sigma = sigma;
    trace->keep = keep;
    trace->predictions = predictions;
    trace->decoder_input = input.text;
  }
  return summary;
}

SummarizeOutput summarize_corpus(const Corpus& corpus, RunContext& ctx,
                                 const AblationSpec& ablation) {
  SummarizeOutput output;
  output.summaries.reserve(corpus.dialogues.size());
  output.traces.resize(corpus.dialogues.size());
  for (std::size_t i = 0; i < corpus.dialogues.size(); ++i) {
    output.summaries.push_back(summarize_dialogue_ablated(
        corpus.dialogues[i], ctx, ablation, &output.traces[i]));
  }
  return output;
}

MetricReport run_ablation(const Corpus& corpus, RunContext& ctx,
                          const AblationSpec& ablation) {
  const SummarizeOutput output = summarize_corpus(corpus, ctx, ablation);
  std::map<std::string, std::string> summaries;
  std::map<std::string, std::vector<ComponentLabel>> labels;
  for (std::size_t i = 0; i < output.summaries.size(); ++i) {
    summaries[output.summaries[i].dialogue_id] = output.summaries[i].text;
    std::vector<ComponentLabel> predicted;
    for (const ComponentPrediction& p : output.traces[i].predictions) {
      predicted.push_back(p.predicted);
    }
    labels[output.summaries[i].dialogue_id] = std::move(predicted);
  }
  return evaluate_corpus(corpus, summaries, labels);
}

PseudoLabelResult run_pseudo_label(const Corpus& corpus, RunContext& ctx) {
  PseudoLabelResult result;
  result.corpus = corpus;
  for (Dialogue& dialogue : result.corpus.dialogues) {
    const auto embeddings = ctx.encoder.encode_dialogue(dialogue);
    const auto predictions = ctx.ccc.predict(embeddings);
    for (std::size_t i = 0; i < dialogue.utterances.size(); ++i) {
      dialogue.utterances[i].predicted_label = predictions[i].predicted;
    }
  }
  result.output = summarize_corpus(result.corpus, ctx);
  return result;
}

std::string serialize_summaries(const SummarizeOutput& output,
                                bool emit_trace) {
  std::string out;
  for (std::size_t i = 0; i < output.summaries.size(); ++i) {
    const Summary& summary = output.summaries[i];
    ordered_json record;
    record["dialogue_id"] = summary.dialogue_id;
    record["summary"] = summary.text;
    record["empty_input"] = summary.empty_input;
    if (emit_trace) {
      const IntermediateTrace& trace = output.traces[i];
      ordered_json tj;
      tj["psi"] = trace.psi;
      tj["tau"] = mask_json(trace.tau);
      tj["sigma"] = mask_json(trace.sigma);
      tj["keep"] = mask_json(trace.keep);
      ordered_json predicted = ordered_json::array();
      for (const ComponentPrediction& p : trace.predictions) {
        predicted.push_back(std::string(label_code(p.predicted)));
      }
      tj["predicted_labels"] = std::move(predicted);
      tj["decoder_input"] = trace.decoder_input;
      record["trace"] = std::move(tj);
    }
    out += record.dump();
    out += '\n';
  }
  return out;
}

std::vector<SummaryRecord> parse_summaries(std::istream& in) {
  std::vector<SummaryRecord> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ordered_json record;
    try {
      record = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("summaries line " + std::to_string(line_number) +
                       ": malformed JSON: " + e.what());
    }
    SummaryRecord parsed;
    if (!record.contains("dialogue_id") ||
        !record.at("dialogue_id").is_string() ||
        !record.contains("summary") || !record.at("summary").is_string()) {
      throw ParseError("summaries line " + std::to_string(line_number) +
                       ": requires string fields 'dialogue_id' and "
                       "'summary'");
    }
    parsed.dialogue_id = record.at("dialogue_id").get<std::string>();
    parsed.summary = record.at("summary").get<std::string>();
    parsed.empty_input = record.value("empty_input", false);
    if (record.contains("trace") && record.at("trace").is_object() &&
        record.at("trace").contains("predicted_labels")) {
      std::vector<ComponentLabel> labels;
      for (const auto& code : record.at("trace").at("predicted_labels")) {
        if (!code.is_string()) {
          throw ParseError("summaries line " + std::to_string(line_number) +
                           ": predicted_labels must be strings");
        }
        labels.push_back(label_from_code(code.get<std::string>()));
      }
      parsed.predicted_labels = std::move(labels);
    }
    records.push_back(std::move(parsed));
  }
  return records;
}

}  // namespace consum
