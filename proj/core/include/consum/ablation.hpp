#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "consum/metrics.hpp"
#include "consum/summarizer.hpp"

namespace consum {

struct AblationSpec {
  std::set<ComponentLabel> masked_components;  // subset of {SH, PD, RT}
  bool disable_mh_know = false;
  bool disable_ccc = false;
  bool mask_on_gold = false;  // mask by gold labels instead of predictions

  bool empty() const {
    return masked_components.empty() && !disable_mh_know && !disable_ccc;
  }
};

// "SH,PD", "MH-Know", "CCC" or combinations, case-insensitive. DF is not a
// counseling component and is rejected.
AblationSpec parse_ablation_spec(const std::string& spec_text);

struct RunContext {
  const DfcModel& dfc;
  const CccModel& ccc;
  const PhqLexicon& phq;
  double phi = kDefaultPhi;
  DialogueEncoder& encoder;
  DecoderBackend& decoder;
  GenerationConfig generation;
};

struct SummarizeOutput {
  std::vector<Summary> summaries;
  std::vector<IntermediateTrace> traces;  // index-aligned with summaries
};

// Summarizes every dialogue; the ablation spec (when non-empty) removes
// masked-component utterances from the keep-mask before G is built, forces
// sigma to all zeros when MH-Know is disabled, and drops label tags from G
// when the CCC is disabled. The empty spec is exactly the normal pipeline.
SummarizeOutput summarize_corpus(const Corpus& corpus, RunContext& ctx,
                                 const AblationSpec& ablation = {});

Summary summarize_dialogue_ablated(const Dialogue& dialogue, RunContext& ctx,
                                   const AblationSpec& ablation,
                                   IntermediateTrace* trace = nullptr);

MetricReport run_ablation(const Corpus& corpus, RunContext& ctx,
                          const AblationSpec& ablation);

struct PseudoLabelResult {
  Corpus corpus;  // copy with predicted_label filled on every utterance
  SummarizeOutput output;
};

// Pseudo-label mode for unlabeled corpora: predicted components are written
// into a copy of the corpus (gold labels, when present, stay untouched),
// then the standard pipeline runs.
PseudoLabelResult run_pseudo_label(const Corpus& corpus, RunContext& ctx);

// Summaries JSONL: {"dialogue_id", "summary", "empty_input", "trace": {...}}
// with the trace included when emit_trace is set.
std::string serialize_summaries(const SummarizeOutput& output,
                                bool emit_trace);
struct SummaryRecord {
  std::string dialogue_id;
  std::string summary;
  bool empty_input = false;
  std::optional<std::vector<ComponentLabel>> predicted_labels;
};
std::vector<SummaryRecord> parse_summaries(std::istream& in);

}  // namespace consum
