#include <doctest.h>

#include <array>
#include <set>
#include <sstream>

#include "consum/corpus.hpp"
#include "support/fixtures.hpp"

using namespace consum;

namespace {

const char* kSmallCorpus =
    R"({"dialogue_id": "d1", "reference_summary": "patient feels anxious", "utterances": [)"
    R"({"speaker": "T", "text": "Good morning", "label": "DF"},)"
    R"({"speaker": "P", "text": "I feel anxious", "label": "SH"},)"
    R"({"speaker": "T", "text": "Tell me more", "label": "PD"}]})"
    "\n";

Corpus parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

}  // namespace

TEST_CASE("parse_corpus reads one dialogue with three utterances") {
  const Corpus corpus = parse_text(kSmallCorpus);
  CHECK(corpus.size() == 1);
  CHECK(corpus.total_utterances() == 3);
  const Dialogue& d = corpus.dialogues[0];
  CHECK(d.dialogue_id == "d1");
  CHECK(d.reference_summary == "patient feels anxious");
  CHECK(d.utterances[0].speaker == Speaker::Therapist);
  CHECK(d.utterances[1].speaker == Speaker::Patient);
  CHECK(d.utterances[1].gold_label == ComponentLabel::SH);
  for (int i = 0; i < 3; ++i) CHECK(d.utterances[i].id == i);
}

TEST_CASE("parse_corpus rejects unknown labels naming field and line") {
  const std::string bad =
      R"({"dialogue_id": "d1", "utterances": [{"speaker": "T", "text": "hi", "label": "XYZ"}]})"
      "\n";
  CHECK_THROWS_WITH_AS(parse_text(bad),
                       doctest::Contains("line 1"), ParseError);
  try {
    parse_text(bad);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("label") != std::string::npos);
    CHECK(std::string(e.what()).find("XYZ") != std::string::npos);
  }
}

TEST_CASE("parse_corpus error paths") {
  SUBCASE("malformed JSON reports the line number") {
    const std::string two_lines = kSmallCorpus + std::string("{not json\n");
    CHECK_THROWS_WITH_AS(parse_text(two_lines), doctest::Contains("line 2"),
                         ParseError);
  }
  SUBCASE("unknown speaker") {
    CHECK_THROWS_AS(
        parse_text(R"({"dialogue_id": "d", "utterances": [{"speaker": "X", "text": "hi"}]})"),
        ParseError);
  }
  SUBCASE("empty utterance text") {
    CHECK_THROWS_AS(
        parse_text(R"({"dialogue_id": "d", "utterances": [{"speaker": "T", "text": "   "}]})"),
        ParseError);
  }
  SUBCASE("duplicate dialogue_id") {
    CHECK_THROWS_WITH_AS(parse_text(kSmallCorpus + std::string(kSmallCorpus)),
                         doctest::Contains("duplicate"), ParseError);
  }
  SUBCASE("dialogue without utterances") {
    CHECK_THROWS_AS(parse_text(R"({"dialogue_id": "d", "utterances": []})"),
                    ParseError);
  }
}

TEST_CASE("parse/serialize round-trips") {
  const Corpus corpus = fixtures::separable_corpus(8, 6, 99);
  const std::string serialized = serialize_corpus(corpus);
  const Corpus reparsed = parse_text(serialized);
  CHECK(reparsed == corpus);
  // Serialization is canonical: a second round is byte-identical.
  CHECK(serialize_corpus(reparsed) == serialized);
}

TEST_CASE("MEMO-scale corpus stats report the per-speaker totals") {
  // Patient 6364 and therapist 6480 utterances across 212 dialogues.
  constexpr std::array<std::pair<ComponentLabel, int>, 4> patient = {{
      {ComponentLabel::DF, 1068},
      {ComponentLabel::SH, 1066},
      {ComponentLabel::RT, 470},
      {ComponentLabel::PD, 3760},
  }};
  constexpr std::array<std::pair<ComponentLabel, int>, 4> therapist = {{
      {ComponentLabel::DF, 1665},
      {ComponentLabel::SH, 1536},
      {ComponentLabel::RT, 913},
      {ComponentLabel::PD, 2366},
  }};
  std::vector<std::pair<Speaker, ComponentLabel>> rows;
  for (const auto& [label, count] : patient) {
    rows.insert(rows.end(), count, {Speaker::Patient, label});
  }
  for (const auto& [label, count] : therapist) {
    rows.insert(rows.end(), count, {Speaker::Therapist, label});
  }
  REQUIRE(rows.size() == 6364 + 6480);

  constexpr int kDialogues = 212;
  Corpus corpus;
  std::size_t next = 0;
  for (int d = 0; d < kDialogues; ++d) {
    Dialogue dialogue;
    dialogue.dialogue_id = "memo-" + std::to_string(d);
    const std::size_t quota =
        rows.size() / kDialogues + (d < static_cast<int>(rows.size() % kDialogues) ? 1 : 0);
    for (std::size_t i = 0; i < quota; ++i, ++next) {
      Utterance utt;
      utt.id = static_cast<int>(i);
      utt.speaker = rows[next].first;
      utt.gold_label = rows[next].second;
      utt.text = "utterance " + std::to_string(next);
      dialogue.utterances.push_back(std::move(utt));
    }
    corpus.dialogues.push_back(std::move(dialogue));
  }
  REQUIRE(next == rows.size());

  // Exercise the full JSONL path at scale before computing stats.
  const Corpus parsed = parse_text(serialize_corpus(corpus));
  const CorpusStats stats = corpus_stats(parsed);
  CHECK(stats.num_dialogues == 212);
  CHECK(stats.per_speaker_total[static_cast<int>(Speaker::Patient)] == 6364);
  CHECK(stats.per_speaker_total[static_cast<int>(Speaker::Therapist)] == 6480);
  CHECK(stats.total_utterances == 12844);

  long labeled_total = 0;
  for (int s = 0; s < kNumSpeakers; ++s) {
    for (int l = 0; l < kNumComponentLabels; ++l) {
      labeled_total += stats.per_speaker_label[s][l];
    }
  }
  CHECK(labeled_total == stats.total_utterances);
}

TEST_CASE("split_corpus sizes follow the floor rule") {
  SUBCASE("10 dialogues at 70:20:10") {
    const Corpus corpus = fixtures::separable_corpus(10, 3, 5);
    const SplitResult split = split_corpus(corpus, {0.7, 0.2, 0.1}, 42);
    CHECK(split.train.size() == 7);
    CHECK(split.test.size() == 2);
    CHECK(split.val.size() == 1);
    CHECK(split.train.split_tag == SplitTag::Train);
  }
  SUBCASE("212 dialogues: floors 148/42/21, remainder to train") {
    const Corpus corpus = fixtures::separable_corpus(212, 2, 5);
    const SplitResult split = split_corpus(corpus, {0.7, 0.2, 0.1}, 42);
    CHECK(split.train.size() == 149);
    CHECK(split.test.size() == 42);
    CHECK(split.val.size() == 21);
  }
}

TEST_CASE("split_corpus is deterministic and partitions the corpus") {
  const Corpus corpus = fixtures::separable_corpus(23, 4, 17);
  const SplitResult a = split_corpus(corpus, {0.7, 0.2, 0.1}, 42);
  const SplitResult b = split_corpus(corpus, {0.7, 0.2, 0.1}, 42);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.val == b.val);

  std::set<std::string> seen;
  for (const Corpus* part : {&a.train, &a.test, &a.val}) {
    for (const Dialogue& d : part->dialogues) {
      CHECK(seen.insert(d.dialogue_id).second);  // no overlap
    }
  }
  CHECK(seen.size() == static_cast<std::size_t>(corpus.size()));
}

TEST_CASE("split_corpus validates its inputs") {
  const Corpus small = fixtures::separable_corpus(2, 2, 1);
  CHECK_THROWS_AS(split_corpus(small, {0.7, 0.2, 0.1}, 0), ConfigError);
  const Corpus ok = fixtures::separable_corpus(10, 2, 1);
  CHECK_THROWS_AS(split_corpus(ok, {0.7, 0.2, 0.2}, 0), ConfigError);
  CHECK_NOTHROW(split_corpus(small, {0.5, 0.5, 0.0}, 0));
}

TEST_CASE("corpus_stats basics") {
  SUBCASE("2 dialogues x 5 utterances") {
    const Corpus corpus = fixtures::separable_corpus(2, 5, 3);
    const CorpusStats stats = corpus_stats(corpus);
    CHECK(stats.num_dialogues == 2);
    CHECK(stats.total_utterances == 10);
    CHECK(stats.utterances_per_dialogue == doctest::Approx(5.0));
  }
  SUBCASE("all-DF corpus has zero counseling counts") {
    SyntheticSpec spec;
    spec.num_dialogues = 3;
    spec.utterances_per_dialogue = 4;
    spec.label_distribution = {{ComponentLabel::DF, 1.0}};
    const Corpus corpus = generate_synthetic_corpus(spec, 9);
    const CorpusStats stats = corpus_stats(corpus);
    for (int s = 0; s < kNumSpeakers; ++s) {
      CHECK(stats.per_speaker_label[s][static_cast<int>(ComponentLabel::SH)] == 0);
      CHECK(stats.per_speaker_label[s][static_cast<int>(ComponentLabel::PD)] == 0);
      CHECK(stats.per_speaker_label[s][static_cast<int>(ComponentLabel::RT)] == 0);
    }
  }
  SUBCASE("unlabeled corpora degrade to totals-only") {
    Corpus corpus = fixtures::separable_corpus(2, 3, 3);
    corpus.dialogues[0].utterances[0].gold_label.reset();
    const CorpusStats stats = corpus_stats(corpus);
    CHECK_FALSE(stats.fully_labeled);
    CHECK(stats.total_utterances == 6);
  }
}

TEST_CASE("corpus_stats agrees with an independent recount") {
  const Corpus corpus = fixtures::separable_corpus(12, 9, 31);
  const CorpusStats stats = corpus_stats(corpus);

  long total = 0;
  std::array<std::array<long, kNumComponentLabels>, kNumSpeakers> recount{};
  for (const Dialogue& d : corpus.dialogues) {
    for (const Utterance& u : d.utterances) {
      ++total;
      ++recount[static_cast<int>(u.speaker)][static_cast<int>(*u.gold_label)];
    }
  }
  CHECK(stats.total_utterances == total);
  long labeled_sum = 0;
  for (int s = 0; s < kNumSpeakers; ++s) {
    for (int l = 0; l < kNumComponentLabels; ++l) {
      CHECK(stats.per_speaker_label[s][l] == recount[s][l]);
      labeled_sum += stats.per_speaker_label[s][l];
    }
  }
  CHECK(labeled_sum == total);
}

TEST_CASE("generate_synthetic_corpus is deterministic") {
  SyntheticSpec spec;
  spec.num_dialogues = 1;
  spec.utterances_per_dialogue = 4;
  spec.label_distribution = {{ComponentLabel::SH, 0.25},
                             {ComponentLabel::PD, 0.25},
                             {ComponentLabel::RT, 0.25},
                             {ComponentLabel::DF, 0.25}};
  spec.vocabulary_seed = 7;
  const Corpus a = generate_synthetic_corpus(spec, 7);
  const Corpus b = generate_synthetic_corpus(spec, 7);
  CHECK(serialize_corpus(a) == serialize_corpus(b));
}

TEST_CASE("generate_synthetic_corpus respects the label distribution") {
  SyntheticSpec spec;
  spec.num_dialogues = 20;
  spec.utterances_per_dialogue = 30;
  spec.label_distribution = {{ComponentLabel::DF, 0.21},
                             {ComponentLabel::SH, 0.20},
                             {ComponentLabel::RT, 0.11},
                             {ComponentLabel::PD, 0.48}};
  const Corpus corpus = generate_synthetic_corpus(spec, 13);
  std::array<long, kNumComponentLabels> counts{};
  long total = 0;
  for (const Dialogue& d : corpus.dialogues) {
    for (const Utterance& u : d.utterances) {
      ++counts[static_cast<int>(*u.gold_label)];
      ++total;
    }
  }
  for (const auto& [label, expected] : spec.label_distribution) {
    const double freq =
        static_cast<double>(counts[static_cast<int>(label)]) / total;
    CHECK(std::abs(freq - expected) <= 0.05);
  }
}

TEST_CASE("generate_synthetic_corpus rejects degenerate specs") {
  SyntheticSpec spec;
  spec.num_dialogues = 0;
  CHECK_THROWS_AS(generate_synthetic_corpus(spec, 1), ConfigError);
  spec.num_dialogues = 1;
  spec.utterances_per_dialogue = 0;
  CHECK_THROWS_AS(generate_synthetic_corpus(spec, 1), ConfigError);
  spec.utterances_per_dialogue = 2;
  spec.label_distribution = {{ComponentLabel::DF, 0.5}};
  CHECK_THROWS_AS(generate_synthetic_corpus(spec, 1), ConfigError);
}

TEST_CASE("generate_synthetic_corpus with DF-only distribution") {
  SyntheticSpec spec;
  spec.num_dialogues = 4;
  spec.utterances_per_dialogue = 5;
  spec.label_distribution = {{ComponentLabel::DF, 1.0}};
  const Corpus corpus = generate_synthetic_corpus(spec, 2);
  for (const Dialogue& d : corpus.dialogues) {
    CHECK_FALSE(d.reference_summary.has_value());
    for (const Utterance& u : d.utterances) {
      CHECK(u.gold_label == ComponentLabel::DF);
    }
  }
}

TEST_CASE("synthetic reference summaries concatenate counseling texts") {
  const Corpus corpus = fixtures::separable_corpus(5, 8, 77);
  for (const Dialogue& d : corpus.dialogues) {
    std::string expected;
    for (const Utterance& u : d.utterances) {
      if (*u.gold_label == ComponentLabel::DF) continue;
      if (!expected.empty()) expected += ' ';
      expected += u.text;
    }
    if (expected.empty()) {
      CHECK_FALSE(d.reference_summary.has_value());
    } else {
      CHECK(d.reference_summary == expected);
    }
  }
}
