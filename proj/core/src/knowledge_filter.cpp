#include "consum/knowledge_filter.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "consum/text.hpp"

namespace consum {

namespace {

using ordered_json = nlohmann::ordered_json;

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

void validate_phi(double phi) {
  if (phi < 0.0 || phi > static_cast<double>(kNumPhqItems)) {
    throw ConfigError("phi must be in [0, 9], got " + std::to_string(phi));
  }
}

}  // namespace

PhqLexicon::PhqLexicon(std::vector<PhqItem> items) : items_(std::move(items)) {
  if (items_.size() != kNumPhqItems) {
    throw ParseError("PHQ lexicon must contain exactly 9 items, got " +
                     std::to_string(items_.size()));
  }
  std::set<int> ids;
  for (const PhqItem& item : items_) {
    if (item.id < 1 || item.id > kNumPhqItems) {
      throw ParseError("PHQ item id must be in 1..9, got " +
                       std::to_string(item.id));
    }
    if (!ids.insert(item.id).second) {
      throw ParseError("duplicate PHQ item id " + std::to_string(item.id));
    }
    if (item.phrases.empty()) {
      throw ParseError("PHQ item " + std::to_string(item.id) +
                       " has an empty phrase list");
    }
  }
}

PhqLexicon PhqLexicon::default_phq9() {
  return PhqLexicon({
      {1,
       "Little interest or pleasure in doing things",
       {"little interest in doing things", "no pleasure in anything",
        "nothing is enjoyable anymore", "lost interest in hobbies"}},
      {2,
       "Feeling down, depressed, or hopeless",
       {"feeling down", "feeling depressed", "feeling hopeless",
        "everything feels pointless"}},
      {3,
       "Trouble falling or staying asleep, or sleeping too much",
       {"trouble falling asleep", "staying asleep at night",
        "sleeping too much", "cannot sleep"}},
      {4,
       "Feeling tired or having little energy",
       {"feeling tired", "little energy", "exhausted all the time",
        "no energy to do anything"}},
      {5,
       "Poor appetite or overeating",
       {"poor appetite", "overeating", "not eating much",
        "eating too much lately"}},
      {6,
       "Feeling bad about yourself or that you are a failure",
       {"feeling bad about myself", "feel like a failure",
        "let my family down", "feeling worthless"}},
      {7,
       "Trouble concentrating on things",
       {"trouble concentrating", "cannot focus on anything",
        "hard to pay attention", "mind keeps wandering"}},
      {8,
       "Moving or speaking slowly, or being fidgety or restless",
       {"moving very slowly", "speaking slowly", "fidgety and restless",
        "cannot sit still"}},
      {9,
       "Thoughts of being better off dead or of hurting yourself",
       {"better off dead", "thoughts of hurting myself",
        "thought about ending it", "self harm"}},
  });
}

PhqLexicon PhqLexicon::from_json(std::istream& in) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed lexicon JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("items") ||
      !doc.at("items").is_array()) {
    throw ParseError("lexicon JSON must be an object with an 'items' array");
  }
  std::vector<PhqItem> items;
  for (const auto& entry : doc.at("items")) {
    PhqItem item;
    if (!entry.contains("id") || !entry.at("id").is_number_integer()) {
      throw ParseError("lexicon item field 'id' must be an integer");
    }
    item.id = entry.at("id").get<int>();
    if (!entry.contains("text") || !entry.at("text").is_string()) {
      throw ParseError("lexicon item field 'text' must be a string");
    }
    item.text = entry.at("text").get<std::string>();
    if (!entry.contains("phrases") || !entry.at("phrases").is_array()) {
      throw ParseError("lexicon item field 'phrases' must be an array");
    }
    for (const auto& phrase : entry.at("phrases")) {
      if (!phrase.is_string()) {
        throw ParseError("lexicon phrases must be strings");
      }
      item.phrases.push_back(phrase.get<std::string>());
    }
    items.push_back(std::move(item));
  }
  return PhqLexicon(std::move(items));
}

PhqLexicon PhqLexicon::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open lexicon file " + path.string());
  return from_json(in);
}

std::string PhqLexicon::to_json() const {
  ordered_json doc;
  doc["items"] = ordered_json::array();
  for (const PhqItem& item : items_) {
    ordered_json entry;
    entry["id"] = item.id;
    entry["text"] = item.text;
    entry["phrases"] = item.phrases;
    doc["items"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

TokenAlignment token_alignment_score(std::string_view candidate,
                                     std::string_view reference,
                                     const EncoderBackend& backend) {
  const auto cand_tokens = text::tokenize(candidate);
  const auto ref_tokens = text::tokenize(reference);
  if (cand_tokens.empty() || ref_tokens.empty()) {
    warn("token_alignment_score: empty token sequence, scoring 0");
    return {0.0, 0.0, 0.0, true};
  }

  Eigen::MatrixXd cand = backend.encode_tokens(cand_tokens);
  Eigen::MatrixXd ref = backend.encode_tokens(ref_tokens);
  for (Eigen::Index i = 0; i < cand.rows(); ++i) {
    const double norm = cand.row(i).norm();
    if (norm > 0) cand.row(i) /= norm;
  }
  for (Eigen::Index i = 0; i < ref.rows(); ++i) {
    const double norm = ref.row(i).norm();
    if (norm > 0) ref.row(i) /= norm;
  }

  const Eigen::MatrixXd sims = cand * ref.transpose();
  const double precision = clamp01(sims.rowwise().maxCoeff().mean());
  const double recall = clamp01(sims.colwise().maxCoeff().mean());
  TokenAlignment result;
  result.precision = precision;
  result.recall = recall;
  result.f1 = precision + recall > 0.0
                  ? clamp01(2.0 * precision * recall / (precision + recall))
                  : 0.0;
  return result;
}

double token_alignment_similarity(std::string_view utterance,
                                  const PhqItem& item,
                                  const EncoderBackend& backend) {
  // Any phrase of the item counting as a match: take the max over phrases.
  double best = 0.0;
  for (const std::string& phrase : item.phrases) {
    best = std::max(best,
                    token_alignment_score(utterance, phrase, backend).f1);
  }
  return best;
}

KnowledgeScore knowledge_score(std::string_view utterance,
                               const PhqLexicon& phq,
                               const EncoderBackend& backend) {
  KnowledgeScore score;
  for (const PhqItem& item : phq.items()) {
    score.per_item[item.id - 1] =
        token_alignment_similarity(utterance, item, backend);
  }
  // Summed in item-id order so psi is bit-identical under any permutation
  // of the lexicon entries.
  for (double s : score.per_item) score.psi += s;
  return score;
}

std::vector<KnowledgeScore> knowledge_scores(const Dialogue& dialogue,
                                             const PhqLexicon& phq,
                                             const EncoderBackend& backend) {
  std::vector<KnowledgeScore> scores;
  scores.reserve(dialogue.utterances.size());
  for (const Utterance& utt : dialogue.utterances) {
    scores.push_back(knowledge_score(utt.text, phq, backend));
  }
  return scores;
}

MaskArray knowledge_mask_from_scores(std::span<const KnowledgeScore> scores,
                                     double phi) {
  validate_phi(phi);
  MaskArray sigma(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    sigma.set(i, scores[i].psi <= phi);
  }
  return sigma;
}

MaskArray knowledge_mask(const Dialogue& dialogue, const PhqLexicon& phq,
                         double phi, const EncoderBackend& backend) {
  validate_phi(phi);
  const auto scores = knowledge_scores(dialogue, phq, backend);
  return knowledge_mask_from_scores(scores, phi);
}

}  // namespace consum
