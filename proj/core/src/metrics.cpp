#include "consum/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "consum/text.hpp"

namespace consum {

namespace {

using ordered_json = nlohmann::ordered_json;

RougeScore from_counts(double overlap, double candidate_total,
                       double reference_total) {
  RougeScore score;
  if (candidate_total <= 0 || reference_total <= 0) {
    score.degenerate = true;
    return score;
  }
  score.precision = overlap / candidate_total;
  score.recall = overlap / reference_total;
  if (score.precision + score.recall > 0) {
    score.f1 = 2.0 * score.precision * score.recall /
               (score.precision + score.recall);
  }
  return score;
}

std::unordered_map<std::string, long> ngram_counts(
    const std::vector<std::string>& tokens, int n) {
  std::unordered_map<std::string, long> counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string gram = tokens[i];
    for (int k = 1; k < n; ++k) {
      gram += '\x1f';
      gram += tokens[i + k];
    }
    ++counts[gram];
  }
  return counts;
}

std::optional<RougeScore> mean_of(
    const std::vector<RougeScore>& scores) {
  if (scores.empty()) return std::nullopt;
  RougeScore mean;
  for (const RougeScore& s : scores) {
    mean.precision += s.precision;
    mean.recall += s.recall;
    mean.f1 += s.f1;
  }
  const auto n = static_cast<double>(scores.size());
  mean.precision /= n;
  mean.recall /= n;
  mean.f1 /= n;
  return mean;
}

ordered_json score_json(const RougeScore& score) {
  return {{"precision", score.precision},
          {"recall", score.recall},
          {"f1", score.f1}};
}

ordered_json optional_score_json(const std::optional<RougeScore>& score) {
  if (!score) return "absent";
  return score_json(*score);
}

void table_row(std::ostringstream& out, const std::string& name,
               const std::optional<RougeScore>& score) {
  out << std::left << std::setw(10) << name;
  if (!score) {
    out << std::right << std::setw(11) << "absent" << std::setw(11) << "-"
        << std::setw(11) << "-" << "\n";
    return;
  }
  out << std::right << std::fixed << std::setprecision(4) << std::setw(11)
      << score->precision << std::setw(11) << score->recall << std::setw(11)
      << score->f1 << "\n";
}

}  // namespace

RougeScore rouge_n(std::string_view candidate, std::string_view reference,
                   int n) {
  if (n != 1 && n != 2) {
    throw ConfigError("rouge_n supports n in {1, 2}, got " +
                      std::to_string(n));
  }
  const auto cand_counts = ngram_counts(text::tokenize(candidate), n);
  const auto ref_counts = ngram_counts(text::tokenize(reference), n);

  long cand_total = 0;
  for (const auto& [gram, count] : cand_counts) cand_total += count;
  long ref_total = 0;
  for (const auto& [gram, count] : ref_counts) ref_total += count;

  // Clipped overlap: each n-gram counts at most min(candidate, reference).
  long overlap = 0;
  for (const auto& [gram, count] : cand_counts) {
    auto it = ref_counts.find(gram);
    if (it != ref_counts.end()) overlap += std::min(count, it->second);
  }
  return from_counts(static_cast<double>(overlap),
                     static_cast<double>(cand_total),
                     static_cast<double>(ref_total));
}

RougeScore rouge_l(std::string_view candidate, std::string_view reference) {
  const auto cand = text::tokenize(candidate);
  const auto ref = text::tokenize(reference);
  if (cand.empty() || ref.empty()) {
    RougeScore score;
    score.degenerate = true;
    return score;
  }
  // Two-row dynamic programming LCS.
  std::vector<long> prev(ref.size() + 1, 0);
  std::vector<long> curr(ref.size() + 1, 0);
  for (std::size_t i = 1; i <= cand.size(); ++i) {
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      if (cand[i - 1] == ref[j - 1]) {
        curr[j] = prev[j - 1] + 1;
      } else {
        curr[j] = std::max(prev[j], curr[j - 1]);
      }
    }
    std::swap(prev, curr);
  }
  const long lcs = prev[ref.size()];
  return from_counts(static_cast<double>(lcs),
                     static_cast<double>(cand.size()),
                     static_cast<double>(ref.size()));
}

std::optional<std::string> component_transcript(
    const Dialogue& dialogue, std::span<const ComponentLabel> labels,
    ComponentLabel component) {
  if (labels.size() != dialogue.utterances.size()) {
    throw Error("component_transcript: labels must match dialogue length");
  }
  std::string transcript;
  bool any = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != component) continue;
    if (any) transcript += ' ';
    transcript += dialogue.utterances[i].text;
    any = true;
  }
  if (!any) return std::nullopt;
  return transcript;
}

std::optional<RougeScore> mhic(std::string_view summary_text,
                               const Dialogue& dialogue,
                               std::span<const ComponentLabel> labels,
                               ComponentLabel component) {
  if (component == ComponentLabel::DF) {
    throw ConfigError("MHIC is defined only for SH, PD, and RT");
  }
  const auto transcript = component_transcript(dialogue, labels, component);
  if (!transcript) return std::nullopt;
  return rouge_n(summary_text, *transcript, 1);
}

std::optional<RougeScore> mhic(const Summary& summary,
                               const Dialogue& dialogue,
                               std::span<const ComponentPrediction> predictions,
                               ComponentLabel component) {
  std::vector<ComponentLabel> labels;
  labels.reserve(predictions.size());
  for (const ComponentPrediction& p : predictions) {
    labels.push_back(p.predicted);
  }
  return mhic(summary.text, dialogue, labels, component);
}

MetricReport evaluate_corpus(
    const Corpus& corpus,
    const std::map<std::string, std::string>& summaries_by_dialogue,
    const std::map<std::string, std::vector<ComponentLabel>>&
        labels_by_dialogue) {
  MetricReport report;
  std::vector<RougeScore> r1s, r2s, rls;
  std::vector<RougeScore> mhic_sh, mhic_pd, mhic_rt;

  for (const Dialogue& dialogue : corpus.dialogues) {
    if (!dialogue.reference_summary) {
      ++report.skipped_dialogues;
      continue;
    }
    auto it = summaries_by_dialogue.find(dialogue.dialogue_id);
    if (it == summaries_by_dialogue.end()) {
      throw Error("evaluate_corpus: no summary for dialogue '" +
                  dialogue.dialogue_id + "'");
    }
    const std::string& summary = it->second;
    DialogueScores scores;
    scores.dialogue_id = dialogue.dialogue_id;
    scores.r1 = rouge_n(summary, *dialogue.reference_summary, 1);
    scores.r2 = rouge_n(summary, *dialogue.reference_summary, 2);
    scores.rl = rouge_l(summary, *dialogue.reference_summary);
    r1s.push_back(scores.r1);
    r2s.push_back(scores.r2);
    rls.push_back(scores.rl);

    auto labels_it = labels_by_dialogue.find(dialogue.dialogue_id);
    if (labels_it != labels_by_dialogue.end()) {
      scores.mhic_sh =
          mhic(summary, dialogue, labels_it->second, ComponentLabel::SH);
      scores.mhic_pd =
          mhic(summary, dialogue, labels_it->second, ComponentLabel::PD);
      scores.mhic_rt =
          mhic(summary, dialogue, labels_it->second, ComponentLabel::RT);
      if (scores.mhic_sh) mhic_sh.push_back(*scores.mhic_sh);
      if (scores.mhic_pd) mhic_pd.push_back(*scores.mhic_pd);
      if (scores.mhic_rt) mhic_rt.push_back(*scores.mhic_rt);
    }
    report.per_dialogue.push_back(std::move(scores));
    ++report.scored_dialogues;
  }

  if (auto m = mean_of(r1s)) report.mean_r1 = *m;
  if (auto m = mean_of(r2s)) report.mean_r2 = *m;
  if (auto m = mean_of(rls)) report.mean_rl = *m;
  report.mean_mhic_sh = mean_of(mhic_sh);
  report.mean_mhic_pd = mean_of(mhic_pd);
  report.mean_mhic_rt = mean_of(mhic_rt);
  return report;
}

std::string report_to_json(const MetricReport& report,
                           bool include_per_dialogue, bool mhic_only) {
  ordered_json out;
  out["scored_dialogues"] = report.scored_dialogues;
  out["skipped_dialogues"] = report.skipped_dialogues;
  if (!mhic_only) {
    out["rouge"]["r1"] = score_json(report.mean_r1);
    out["rouge"]["r2"] = score_json(report.mean_r2);
    out["rouge"]["rl"] = score_json(report.mean_rl);
  }
  out["mhic"]["SH"] = optional_score_json(report.mean_mhic_sh);
  out["mhic"]["PD"] = optional_score_json(report.mean_mhic_pd);
  out["mhic"]["RT"] = optional_score_json(report.mean_mhic_rt);
  if (include_per_dialogue) {
    out["per_dialogue"] = ordered_json::array();
    for (const DialogueScores& d : report.per_dialogue) {
      ordered_json entry;
      entry["dialogue_id"] = d.dialogue_id;
      if (!mhic_only) {
        entry["r1"] = score_json(d.r1);
        entry["r2"] = score_json(d.r2);
        entry["rl"] = score_json(d.rl);
      }
      entry["mhic"]["SH"] = optional_score_json(d.mhic_sh);
      entry["mhic"]["PD"] = optional_score_json(d.mhic_pd);
      entry["mhic"]["RT"] = optional_score_json(d.mhic_rt);
      out["per_dialogue"].push_back(std::move(entry));
    }
  }
  return out.dump(2) + "\n";
}

ExternalMetricReport evaluate_with_plugin(
    const Corpus& corpus,
    const std::map<std::string, std::string>& summaries_by_dialogue,
    const ExternalMetric& metric) {
  if (!metric.score) {
    throw ConfigError("external metric '" + metric.name +
                      "' has no scorer callable");
  }
  ExternalMetricReport report;
  report.name = metric.name;
  double total = 0.0;
  for (const Dialogue& dialogue : corpus.dialogues) {
    if (!dialogue.reference_summary) {
      ++report.skipped_dialogues;
      continue;
    }
    auto it = summaries_by_dialogue.find(dialogue.dialogue_id);
    if (it == summaries_by_dialogue.end()) {
      throw Error("evaluate_with_plugin: no summary for dialogue '" +
                  dialogue.dialogue_id + "'");
    }
    const double value = metric.score(it->second, *dialogue.reference_summary);
    report.per_dialogue.emplace_back(dialogue.dialogue_id, value);
    total += value;
    ++report.scored_dialogues;
  }
  if (report.scored_dialogues > 0) {
    report.mean = total / report.scored_dialogues;
  }
  return report;
}

std::string render_report_table(const MetricReport& report, bool mhic_only) {
  std::ostringstream out;
  out << "scored dialogues:  " << report.scored_dialogues << "\n";
  out << "skipped dialogues: " << report.skipped_dialogues << "\n\n";
  out << std::left << std::setw(10) << "metric" << std::right << std::setw(11)
      << "precision" << std::setw(11) << "recall" << std::setw(11) << "f1"
      << "\n";
  if (!mhic_only) {
    table_row(out, "rouge-1", report.mean_r1);
    table_row(out, "rouge-2", report.mean_r2);
    table_row(out, "rouge-l", report.mean_rl);
  }
  table_row(out, "mhic-SH", report.mean_mhic_sh);
  table_row(out, "mhic-PD", report.mean_mhic_pd);
  table_row(out, "mhic-RT", report.mean_mhic_rt);
  return out.str();
}

}  // namespace consum
