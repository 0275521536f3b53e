#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "consum/component_classifier.hpp"
#include "consum/corpus.hpp"
#include "consum/summarizer.hpp"
#include "consum/types.hpp"

namespace consum {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // empty n-gram / token set on either side
};

// N-gram overlap with clipped counts over lowercased, non-alphanumeric-split
// tokens; no stemming, no stopword removal.
RougeScore rouge_n(std::string_view candidate, std::string_view reference,
                   int n);

// Longest-common-subsequence variant over the same tokenization.
RougeScore rouge_l(std::string_view candidate, std::string_view reference);

// Mental Health Information Capture: ROUGE-1 of the generated summary
// against H, the dialogue-order concatenation of raw utterance texts whose
// label equals the component. Only SH/PD/RT are defined; DF is a contract
// error. Absent (no utterance with that label) is reported as nullopt.
std::optional<RougeScore> mhic(std::string_view summary_text,
                               const Dialogue& dialogue,
                               std::span<const ComponentLabel> labels,
                               ComponentLabel component);
std::optional<RougeScore> mhic(const Summary& summary,
                               const Dialogue& dialogue,
                               std::span<const ComponentPrediction> predictions,
                               ComponentLabel component);

// H as used by MHIC (exposed so reports can show the composed transcript).
std::optional<std::string> component_transcript(
    const Dialogue& dialogue, std::span<const ComponentLabel> labels,
    ComponentLabel component);

struct DialogueScores {
  std::string dialogue_id;
  RougeScore r1, r2, rl;
  std::optional<RougeScore> mhic_sh, mhic_pd, mhic_rt;
};

struct MetricReport {
  std::vector<DialogueScores> per_dialogue;
  RougeScore mean_r1, mean_r2, mean_rl;  // arithmetic means over scored
  std::optional<RougeScore> mean_mhic_sh, mean_mhic_pd, mean_mhic_rt;
  int scored_dialogues = 0;
  int skipped_dialogues = 0;  // dialogues lacking a reference summary
};

// Scores each summary against its dialogue's reference summary; dialogues
// without references are skipped and counted. MHIC is computed per
// component for dialogues whose labels are supplied.
MetricReport evaluate_corpus(
    const Corpus& corpus,
    const std::map<std::string, std::string>& summaries_by_dialogue,
    const std::map<std::string, std::vector<ComponentLabel>>& labels_by_dialogue);

// mhic_only drops the ROUGE-vs-reference section (used by MHIC-only runs,
// which need no reference summaries).
std::string report_to_json(const MetricReport& report,
                           bool include_per_dialogue = true,
                           bool mhic_only = false);
std::string render_report_table(const MetricReport& report,
                                bool mhic_only = false);

// Plugin boundary for external evaluators (learned metrics and the like):
// a name plus a candidate/reference scorer. No implementations ship here.
struct ExternalMetric {
  std::string name;
  std::function<double(std::string_view candidate, std::string_view reference)>
      score;
};

struct ExternalMetricReport {
  std::string name;
  std::vector<std::pair<std::string, double>> per_dialogue;  // id, score
  double mean = 0.0;
  int scored_dialogues = 0;
  int skipped_dialogues = 0;
};

ExternalMetricReport evaluate_with_plugin(
    const Corpus& corpus,
    const std::map<std::string, std::string>& summaries_by_dialogue,
    const ExternalMetric& metric);

}  // namespace consum
