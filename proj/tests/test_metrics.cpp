#include <doctest.h>

#include <random>

#include "consum/metrics.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace consum;

TEST_CASE("rouge_n hand-derived cases") {
  SUBCASE("identical texts score 1") {
    const RougeScore s = rouge_n("patient feels very anxious",
                                 "patient feels very anxious", 1);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
    CHECK(s.f1 == 1.0);
  }
  SUBCASE("worked example: 3 shared unigrams of 4 and 4") {
    const RougeScore s =
        rouge_n("the patient feels anxious", "patient feels very anxious", 1);
    CHECK(s.precision == 0.75);
    CHECK(s.recall == 0.75);
    CHECK(s.f1 == 0.75);
  }
  SUBCASE("disjoint vocabularies score 0") {
    const RougeScore s = rouge_n("alpha bravo", "charlie delta", 1);
    CHECK(s.f1 == 0.0);
    const RougeScore s2 = rouge_n("alpha bravo", "charlie delta", 2);
    CHECK(s2.f1 == 0.0);
  }
  SUBCASE("clipped counts cap repeated n-grams") {
    // "a a a" vs "a": overlap clipped to 1.
    const RougeScore s = rouge_n("a a a", "a", 1);
    CHECK(s.precision == doctest::Approx(1.0 / 3.0));
    CHECK(s.recall == 1.0);
  }
  SUBCASE("n outside {1,2} is rejected") {
    CHECK_THROWS_AS(rouge_n("a", "a", 3), ConfigError);
  }
}

TEST_CASE("rouge_l hand-derived cases") {
  SUBCASE("worked example: LCS of 'a c' and 'a b c'") {
    const RougeScore s = rouge_l("a c", "a b c");
    CHECK(s.precision == 1.0);
    CHECK(s.recall == doctest::Approx(2.0 / 3.0));
    CHECK(std::abs(s.f1 - 0.8) <= 1e-12);
  }
  SUBCASE("identical texts score 1") {
    const RougeScore s = rouge_l("one two three", "one two three");
    CHECK(s.f1 == 1.0);
  }
  SUBCASE("empty candidate is degenerate") {
    const RougeScore s = rouge_l("...", "a b c");
    CHECK(s.degenerate);
    CHECK(s.f1 == 0.0);
  }
}

TEST_CASE("rouge empty-input flags") {
  CHECK(rouge_n("", "a b", 1).degenerate);
  CHECK(rouge_n("a b", "", 1).degenerate);
  // Single-token texts have no bigrams at all.
  CHECK(rouge_n("a", "a", 2).degenerate);
}

TEST_CASE("rouge agrees with brute-force oracles on random pairs") {
  std::mt19937_64 rng(4242);
  for (int round = 0; round < 100; ++round) {
    const std::string a = fixtures::random_token_text(rng, 30);
    const std::string b = fixtures::random_token_text(rng, 30);
    for (int n = 1; n <= 2; ++n) {
      const RougeScore main_score = rouge_n(a, b, n);
      const oracles::Score oracle = oracles::rouge_n(a, b, n);
      CHECK(std::abs(main_score.precision - oracle.precision) <= 1e-9);
      CHECK(std::abs(main_score.recall - oracle.recall) <= 1e-9);
      CHECK(std::abs(main_score.f1 - oracle.f1) <= 1e-9);
    }
    const RougeScore main_l = rouge_l(a, b);
    const oracles::Score oracle_l = oracles::rouge_l(a, b);
    CHECK(std::abs(main_l.precision - oracle_l.precision) <= 1e-9);
    CHECK(std::abs(main_l.recall - oracle_l.recall) <= 1e-9);
    CHECK(std::abs(main_l.f1 - oracle_l.f1) <= 1e-9);
  }
}

TEST_CASE("swapping candidate and reference swaps P and R, keeps F1") {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 40; ++round) {
    const std::string a = fixtures::random_token_text(rng, 20);
    const std::string b = fixtures::random_token_text(rng, 20);
    for (int n = 1; n <= 2; ++n) {
      const RougeScore forward = rouge_n(a, b, n);
      const RougeScore backward = rouge_n(b, a, n);
      CHECK(forward.precision == doctest::Approx(backward.recall));
      CHECK(forward.recall == doctest::Approx(backward.precision));
      CHECK(forward.f1 == doctest::Approx(backward.f1));
    }
    const RougeScore fl = rouge_l(a, b);
    const RougeScore bl = rouge_l(b, a);
    CHECK(fl.precision == doctest::Approx(bl.recall));
    CHECK(fl.f1 == doctest::Approx(bl.f1));
  }
}

TEST_CASE("RougeScore invariant: f1 = 2PR/(P+R) or 0") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 50; ++round) {
    const RougeScore s = rouge_n(fixtures::random_token_text(rng, 15),
                                 fixtures::random_token_text(rng, 15), 1);
    if (s.precision + s.recall > 0) {
      CHECK(s.f1 == doctest::Approx(2 * s.precision * s.recall /
                                    (s.precision + s.recall)));
    } else {
      CHECK(s.f1 == 0.0);
    }
  }
}

TEST_CASE("mhic composes the predicted-component transcript") {
  const Dialogue d = fixtures::make_dialogue(
      "d1", {{Speaker::Patient, "I sleep badly", ComponentLabel::SH},
             {Speaker::Therapist, "okay", ComponentLabel::DF},
             {Speaker::Patient, "since the move", ComponentLabel::SH},
             {Speaker::Therapist, "how is work", ComponentLabel::PD}});
  const std::vector<ComponentLabel> labels = {
      ComponentLabel::SH, ComponentLabel::DF, ComponentLabel::SH,
      ComponentLabel::PD};

  SUBCASE("summary identical to H scores 1") {
    const auto h = component_transcript(d, labels, ComponentLabel::SH);
    REQUIRE(h.has_value());
    CHECK(*h == "I sleep badly since the move");
    const auto score = mhic(*h, d, labels, ComponentLabel::SH);
    REQUIRE(score.has_value());
    CHECK(score->f1 == doctest::Approx(1.0));
  }
  SUBCASE("absent component reports absent, not zero") {
    CHECK_FALSE(mhic("anything", d, labels, ComponentLabel::RT).has_value());
  }
  SUBCASE("DF is a contract error") {
    CHECK_THROWS_AS(mhic("anything", d, labels, ComponentLabel::DF),
                    ConfigError);
  }
  SUBCASE("half-overlap summary equals the oracle on composed strings") {
    const std::string summary = "I sleep badly";
    const auto score = mhic(summary, d, labels, ComponentLabel::SH);
    REQUIRE(score.has_value());
    const oracles::Score oracle =
        oracles::rouge_n(summary, "I sleep badly since the move", 1);
    CHECK(std::abs(score->f1 - oracle.f1) <= 1e-9);
    CHECK(std::abs(score->precision - oracle.precision) <= 1e-9);
    CHECK(std::abs(score->recall - oracle.recall) <= 1e-9);
  }
}

TEST_CASE("evaluate_corpus means, skipping, and MHIC wiring") {
  Corpus corpus = fixtures::separable_corpus(4, 6, 8);
  std::map<std::string, std::string> summaries;
  std::map<std::string, std::vector<ComponentLabel>> labels;
  for (const Dialogue& d : corpus.dialogues) {
    summaries[d.dialogue_id] = d.reference_summary.value_or("fallback text");
    std::vector<ComponentLabel> gold;
    for (const Utterance& u : d.utterances) gold.push_back(*u.gold_label);
    labels[d.dialogue_id] = std::move(gold);
  }

  SUBCASE("summaries equal to references score 1 everywhere") {
    const MetricReport report = evaluate_corpus(corpus, summaries, labels);
    CHECK(report.scored_dialogues == 4);
    CHECK(report.skipped_dialogues == 0);
    CHECK(report.mean_r1.f1 == doctest::Approx(1.0));
    CHECK(report.mean_r2.f1 == doctest::Approx(1.0));
    CHECK(report.mean_rl.f1 == doctest::Approx(1.0));
  }
  SUBCASE("dialogues without references are skipped and counted") {
    corpus.dialogues[1].reference_summary.reset();
    const MetricReport report = evaluate_corpus(corpus, summaries, labels);
    CHECK(report.scored_dialogues == 3);
    CHECK(report.skipped_dialogues == 1);
  }
  SUBCASE("corpus means equal the arithmetic mean of per-pair oracles") {
    std::mt19937_64 rng(31);
    std::map<std::string, std::string> noisy;
    double sum_f1 = 0.0;
    for (const Dialogue& d : corpus.dialogues) {
      noisy[d.dialogue_id] = fixtures::random_token_text(rng, 25);
      if (noisy[d.dialogue_id].empty()) noisy[d.dialogue_id] = "w0";
      sum_f1 +=
          oracles::rouge_n(noisy[d.dialogue_id], *d.reference_summary, 1).f1;
    }
    const MetricReport report = evaluate_corpus(corpus, noisy, {});
    CHECK(std::abs(report.mean_r1.f1 - sum_f1 / 4.0) <= 1e-9);
    CHECK_FALSE(report.mean_mhic_sh.has_value());
  }
}

TEST_CASE("external-metric plugins run over the scored corpus") {
  Corpus corpus = fixtures::separable_corpus(3, 5, 14);
  corpus.dialogues[2].reference_summary.reset();
  std::map<std::string, std::string> summaries;
  for (const Dialogue& d : corpus.dialogues) {
    summaries[d.dialogue_id] = "w1 w2 w3";
  }
  const ExternalMetric metric{
      "token-count-ratio", [](std::string_view candidate, std::string_view) {
        return static_cast<double>(candidate.size());
      }};
  const ExternalMetricReport report =
      evaluate_with_plugin(corpus, summaries, metric);
  CHECK(report.name == "token-count-ratio");
  CHECK(report.scored_dialogues == 2);
  CHECK(report.skipped_dialogues == 1);
  CHECK(report.mean == doctest::Approx(8.0));  // strlen("w1 w2 w3")

  CHECK_THROWS_AS(
      evaluate_with_plugin(corpus, summaries, ExternalMetric{"broken", nullptr}),
      ConfigError);
}

TEST_CASE("report rendering carries the absent marker") {
  const Corpus corpus = fixtures::separable_corpus(2, 5, 12);
  std::map<std::string, std::string> summaries;
  for (const Dialogue& d : corpus.dialogues) {
    summaries[d.dialogue_id] = *d.reference_summary;
  }
  const MetricReport report = evaluate_corpus(corpus, summaries, {});
  const std::string json = report_to_json(report);
  CHECK(json.find("\"absent\"") != std::string::npos);
  const std::string table = render_report_table(report);
  CHECK(table.find("absent") != std::string::npos);
  CHECK(table.find("rouge-1") != std::string::npos);
}
