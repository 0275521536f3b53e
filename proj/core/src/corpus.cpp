#include "consum/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "consum/io_util.hpp"
#include "consum/text.hpp"

namespace consum {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void line_error(std::size_t line, const std::string& what) {
  throw ParseError("corpus line " + std::to_string(line) + ": " + what);
}

std::optional<ComponentLabel> label_field(const ordered_json& utt,
                                          const char* field,
                                          std::size_t line) {
  if (!utt.contains(field) || utt.at(field).is_null()) return std::nullopt;
  if (!utt.at(field).is_string()) {
    line_error(line, std::string("field '") + field + "' must be a string or null");
  }
  try {
    return label_from_code(utt.at(field).get<std::string>());
  } catch (const ParseError& e) {
    line_error(line, std::string("field '") + field + "': " + e.what());
  }
}

Dialogue parse_dialogue_line(const std::string& line_text, std::size_t line) {
  ordered_json record;
  try {
    record = ordered_json::parse(line_text);
  } catch (const nlohmann::json::exception& e) {
    line_error(line, std::string("malformed JSON: ") + e.what());
  }
  if (!record.is_object()) line_error(line, "expected a JSON object");
  if (!record.contains("dialogue_id") || !record.at("dialogue_id").is_string()) {
    line_error(line, "field 'dialogue_id' must be a string");
  }
  if (!record.contains("utterances") || !record.at("utterances").is_array()) {
    line_error(line, "field 'utterances' must be an array");
  }

  Dialogue dialogue;
  dialogue.dialogue_id = record.at("dialogue_id").get<std::string>();
  if (record.contains("reference_summary") &&
      !record.at("reference_summary").is_null()) {
    if (!record.at("reference_summary").is_string()) {
      line_error(line, "field 'reference_summary' must be a string or null");
    }
    std::string summary = record.at("reference_summary").get<std::string>();
    if (text::trim(summary).empty()) {
      line_error(line, "field 'reference_summary' must be non-empty or null");
    }
    dialogue.reference_summary = std::move(summary);
  }

  const auto& utterances = record.at("utterances");
  if (utterances.empty()) {
    line_error(line, "dialogue '" + dialogue.dialogue_id +
                         "' has no utterances (at least 1 required)");
  }
  int next_id = 0;
  for (const auto& utt : utterances) {
    if (!utt.is_object()) line_error(line, "utterance entries must be objects");
    Utterance parsed;
    parsed.id = next_id++;
    if (!utt.contains("speaker") || !utt.at("speaker").is_string()) {
      line_error(line, "field 'speaker' must be a string");
    }
    try {
      parsed.speaker = speaker_from_code(utt.at("speaker").get<std::string>());
    } catch (const ParseError& e) {
      line_error(line, std::string("field 'speaker': ") + e.what());
    }
    if (!utt.contains("text") || !utt.at("text").is_string()) {
      line_error(line, "field 'text' must be a string");
    }
    parsed.text = utt.at("text").get<std::string>();
    if (text::trim(parsed.text).empty()) {
      line_error(line, "field 'text' must be non-empty (utterance " +
                           std::to_string(parsed.id) + " of dialogue '" +
                           dialogue.dialogue_id + "')");
    }
    parsed.gold_label = label_field(utt, "label", line);
    parsed.predicted_label = label_field(utt, "predicted_label", line);
    dialogue.utterances.push_back(std::move(parsed));
  }
  return dialogue;
}

ordered_json dialogue_to_json(const Dialogue& dialogue) {
  ordered_json record;
  record["dialogue_id"] = dialogue.dialogue_id;
  record["reference_summary"] =
      dialogue.reference_summary ? ordered_json(*dialogue.reference_summary)
                                 : ordered_json(nullptr);
  ordered_json utterances = ordered_json::array();
  for (const Utterance& utt : dialogue.utterances) {
    ordered_json entry;
    entry["speaker"] = std::string(speaker_code(utt.speaker));
    entry["text"] = utt.text;
    entry["label"] = utt.gold_label
                         ? ordered_json(std::string(label_code(*utt.gold_label)))
                         : ordered_json(nullptr);
    if (utt.predicted_label) {
      entry["predicted_label"] = std::string(label_code(*utt.predicted_label));
    }
    utterances.push_back(std::move(entry));
  }
  record["utterances"] = std::move(utterances);
  return record;
}

}  // namespace

std::string_view split_tag_name(SplitTag tag) {
  switch (tag) {
    case SplitTag::Train: return "train";
    case SplitTag::Test: return "test";
    case SplitTag::Val: return "val";
  }
  throw Error("invalid SplitTag value");
}

long Corpus::total_utterances() const {
  long total = 0;
  for (const Dialogue& d : dialogues) total += d.size();
  return total;
}

bool Corpus::fully_labeled() const {
  for (const Dialogue& d : dialogues) {
    for (const Utterance& u : d.utterances) {
      if (!u.gold_label) return false;
    }
  }
  return true;
}

Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    Dialogue dialogue = parse_dialogue_line(line, line_number);
    if (!seen_ids.insert(dialogue.dialogue_id).second) {
      line_error(line_number,
                 "duplicate dialogue_id '" + dialogue.dialogue_id + "'");
    }
    corpus.dialogues.push_back(std::move(dialogue));
  }
  return corpus;
}

Corpus parse_corpus_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open corpus file " + path.string());
  return parse_corpus(in);
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const Dialogue& dialogue : corpus.dialogues) {
    out += dialogue_to_json(dialogue).dump();
    out += '\n';
  }
  return out;
}

void write_corpus_file(const Corpus& corpus,
                       const std::filesystem::path& path) {
  io::atomic_write_file(path, serialize_corpus(corpus));
}

SplitResult split_corpus(const Corpus& corpus, SplitRatios ratios,
                         std::uint64_t seed) {
  const double sum = ratios.train + ratios.test + ratios.val;
  if (ratios.train < 0 || ratios.test < 0 || ratios.val < 0) {
    throw ConfigError("split ratios must be non-negative");
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1 (got " +
                      std::to_string(sum) + ")");
  }
  const int n = corpus.size();
  const bool all_nonzero = ratios.train > 0 && ratios.test > 0 && ratios.val > 0;
  if (all_nonzero && n < 3) {
    throw ConfigError("cannot split " + std::to_string(n) +
                      " dialogues three ways with nonzero ratios");
  }

  const int n_test = static_cast<int>(std::floor(ratios.test * n));
  const int n_val = static_cast<int>(std::floor(ratios.val * n));
  const int n_train = n - n_test - n_val;  // floor(train*n) plus remainder

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Hand-rolled Fisher-Yates: std::shuffle output is not pinned by the
  // standard, and split assignment must be reproducible across platforms.
  std::mt19937_64 rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }

  SplitResult result;
  result.train.split_tag = SplitTag::Train;
  result.test.split_tag = SplitTag::Test;
  result.val.split_tag = SplitTag::Val;
  for (int i = 0; i < n; ++i) {
    const Dialogue& d = corpus.dialogues[order[i]];
    if (i < n_train) {
      result.train.dialogues.push_back(d);
    } else if (i < n_train + n_test) {
      result.test.dialogues.push_back(d);
    } else {
      result.val.dialogues.push_back(d);
    }
  }
  return result;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.num_dialogues = corpus.size();
  stats.fully_labeled = corpus.fully_labeled();
  for (const Dialogue& d : corpus.dialogues) {
    for (const Utterance& u : d.utterances) {
      ++stats.total_utterances;
      ++stats.per_speaker_total[static_cast<int>(u.speaker)];
      if (stats.fully_labeled) {
        ++stats.per_speaker_label[static_cast<int>(u.speaker)]
                                 [static_cast<int>(*u.gold_label)];
      }
    }
  }
  if (stats.num_dialogues > 0) {
    stats.utterances_per_dialogue =
        static_cast<double>(stats.total_utterances) / stats.num_dialogues;
    for (int s = 0; s < kNumSpeakers; ++s) {
      for (int l = 0; l < kNumComponentLabels; ++l) {
        stats.per_speaker_label_per_dialogue[s][l] =
            static_cast<double>(stats.per_speaker_label[s][l]) /
            stats.num_dialogues;
      }
    }
  }
  return stats;
}

std::string render_stats_table(const CorpusStats& stats) {
  std::ostringstream out;
  out << "dialogues:               " << stats.num_dialogues << "\n";
  out << "utterances:              " << stats.total_utterances << "\n";
  out << std::fixed << std::setprecision(2);
  out << "utterances per dialogue: " << stats.utterances_per_dialogue << "\n";
  const char* speaker_names[kNumSpeakers] = {"therapist", "patient"};
  for (int s = 0; s < kNumSpeakers; ++s) {
    out << speaker_names[s] << " utterances:    "
        << (s == 0 ? "" : "  ") << stats.per_speaker_total[s] << "\n";
  }
  if (stats.fully_labeled) {
    out << "\n" << std::left << std::setw(10) << "speaker";
    for (ComponentLabel label : kAllComponentLabels) {
      out << std::right << std::setw(8) << label_code(label)
          << std::setw(8) << "U/D";
    }
    out << "\n";
    for (int s = 0; s < kNumSpeakers; ++s) {
      out << std::left << std::setw(10) << speaker_names[s];
      for (int l = 0; l < kNumComponentLabels; ++l) {
        out << std::right << std::setw(8) << stats.per_speaker_label[s][l]
            << std::setw(8) << std::setprecision(2)
            << stats.per_speaker_label_per_dialogue[s][l];
      }
      out << "\n";
    }
  }
  return out.str();
}

std::string stats_to_json(const CorpusStats& stats) {
  ordered_json out;
  out["num_dialogues"] = stats.num_dialogues;
  out["total_utterances"] = stats.total_utterances;
  out["utterances_per_dialogue"] = stats.utterances_per_dialogue;
  const char* speaker_names[kNumSpeakers] = {"therapist", "patient"};
  for (int s = 0; s < kNumSpeakers; ++s) {
    out["per_speaker"][speaker_names[s]]["total"] = stats.per_speaker_total[s];
  }
  out["fully_labeled"] = stats.fully_labeled;
  if (stats.fully_labeled) {
    for (int s = 0; s < kNumSpeakers; ++s) {
      for (int l = 0; l < kNumComponentLabels; ++l) {
        const std::string key(label_code(kAllComponentLabels[l]));
        out["per_speaker"][speaker_names[s]]["labels"][key] =
            stats.per_speaker_label[s][l];
        out["per_speaker"][speaker_names[s]]["labels_per_dialogue"][key] =
            stats.per_speaker_label_per_dialogue[s][l];
      }
    }
  }
  return out.dump(2) + "\n";
}

Corpus generate_synthetic_corpus(const SyntheticSpec& spec,
                                 std::uint64_t seed) {
  if (spec.num_dialogues < 1 || spec.utterances_per_dialogue < 1) {
    throw ConfigError("synthetic corpus requires at least 1 dialogue and "
                      "1 utterance per dialogue");
  }
  double dist_sum = 0.0;
  for (const auto& [label, p] : spec.label_distribution) {
    if (p < 0) throw ConfigError("label distribution entries must be >= 0");
    dist_sum += p;
  }
  if (std::abs(dist_sum - 1.0) > 1e-9) {
    throw ConfigError("label distribution must sum to 1 (got " +
                      std::to_string(dist_sum) + ")");
  }

  // Label-specific vocabularies. Distinct prefixes make the vocabularies
  // disjoint by construction.
  constexpr int kWordsPerLabel = 40;
  const char* prefixes[kNumComponentLabels] = {"sh", "pd", "rt", "df"};
  std::array<std::vector<std::string>, kNumComponentLabels> vocab;
  std::mt19937_64 vocab_rng(spec.vocabulary_seed);
  for (int l = 0; l < kNumComponentLabels; ++l) {
    std::set<std::string> seen;
    while (static_cast<int>(vocab[l].size()) < kWordsPerLabel) {
      std::string word = prefixes[l];
      for (int k = 0; k < 5; ++k) {
        word.push_back(static_cast<char>('a' + vocab_rng() % 26));
      }
      if (seen.insert(word).second) vocab[l].push_back(std::move(word));
    }
  }

  std::array<double, kNumComponentLabels> cumulative{};
  double acc = 0.0;
  for (int l = 0; l < kNumComponentLabels; ++l) {
    auto it = spec.label_distribution.find(kAllComponentLabels[l]);
    acc += it == spec.label_distribution.end() ? 0.0 : it->second;
    cumulative[l] = acc;
  }

  std::mt19937_64 rng(seed);
  auto draw_label = [&]() {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    for (int l = 0; l < kNumComponentLabels; ++l) {
      if (u < cumulative[l]) return kAllComponentLabels[l];
    }
    return ComponentLabel::DF;
  };

  Corpus corpus;
  for (int d = 0; d < spec.num_dialogues; ++d) {
    Dialogue dialogue;
    {
      std::ostringstream id;
      id << "synth-" << std::setw(4) << std::setfill('0') << d;
      dialogue.dialogue_id = id.str();
    }
    std::vector<std::string> summary_parts;
    for (int i = 0; i < spec.utterances_per_dialogue; ++i) {
      Utterance utt;
      utt.id = i;
      utt.speaker = ((i + d) % 2 == 0) ? Speaker::Therapist : Speaker::Patient;
      const ComponentLabel label = draw_label();
      utt.gold_label = label;
      const auto& words = vocab[static_cast<int>(label)];
      const int num_words = 4 + static_cast<int>(rng() % 5);
      std::vector<std::string> chosen;
      chosen.reserve(num_words);
      for (int w = 0; w < num_words; ++w) {
        chosen.push_back(words[rng() % words.size()]);
      }
      utt.text = text::join(chosen, " ");
      if (label != ComponentLabel::DF) summary_parts.push_back(utt.text);
      dialogue.utterances.push_back(std::move(utt));
    }
    if (!summary_parts.empty()) {
      dialogue.reference_summary = text::join(summary_parts, " ");
    }
    corpus.dialogues.push_back(std::move(dialogue));
  }
  return corpus;
}

}  // namespace consum
