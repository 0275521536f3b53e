#include <doctest.h>

#include "consum/component_classifier.hpp"
#include "consum/encoder.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"

using namespace consum;

namespace {

Eigen::MatrixXd random_batch(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd x(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      x(i, j) = (static_cast<double>(rng() >> 11) * 0x1.0p-53) * 2.0 - 1.0;
    }
  }
  return x;
}

double macro_accuracy(const CccModel& model, const Corpus& corpus,
                      const EncoderBackend& backend) {
  DialogueEncoder encoder(backend);
  std::array<long, kNumComponentLabels> correct{};
  std::array<long, kNumComponentLabels> total{};
  for (const Dialogue& d : corpus.dialogues) {
    const auto vectors = encoder.encode_dialogue(d);
    const auto predictions = model.predict(vectors);
    for (const Utterance& u : d.utterances) {
      const int cls = static_cast<int>(*u.gold_label);
      ++total[cls];
      if (predictions[u.id].predicted == *u.gold_label) ++correct[cls];
    }
  }
  double sum = 0.0;
  int classes = 0;
  for (int c = 0; c < kNumComponentLabels; ++c) {
    if (total[c] == 0) continue;
    sum += static_cast<double>(correct[c]) / static_cast<double>(total[c]);
    ++classes;
  }
  return classes > 0 ? sum / classes : 0.0;
}

}  // namespace

TEST_CASE("default CCC config matches the published hyperparameters") {
  const CccConfig config;
  CHECK(config.epochs == 20);
  CHECK(config.learning_rate == doctest::Approx(0.001));
  CHECK(config.batch_size == 4);
  CHECK(config.arch.hidden_dim == 100);
  CHECK(config.arch.attention_dim == 96);
  CHECK(config.arch.num_heads == 4);
}

TEST_CASE("CCC learns the separable fixture within 20 epochs") {
  const Corpus train = fixtures::separable_corpus(60, 12, 11);
  const Corpus held_out = fixtures::separable_corpus(20, 12, 11);
  HashedBowBackend backend(64, 5);

  CccConfig config;
  config.seed = 3;
  const CccModel model = train_ccc(train, backend, config);
  CHECK(macro_accuracy(model, held_out, backend) >= 0.90);
  const auto& log = model.training_log();
  REQUIRE(log.epoch_loss.size() == 20);
  CHECK(log.final_loss < log.epoch_loss.front());
}

TEST_CASE("trained CCC recognizes known-SH utterances") {
  const Corpus train = fixtures::separable_corpus(60, 12, 11);
  HashedBowBackend backend(64, 5);
  CccConfig config;
  config.seed = 3;
  const CccModel model = train_ccc(train, backend, config);

  // 20 unseen gold-SH utterances in their natural dialogue contexts.
  const Corpus fresh = fixtures::separable_corpus(20, 12, 11);
  DialogueEncoder encoder(backend);
  long sh_predicted = 0;
  long sh_seen = 0;
  for (const Dialogue& d : fresh.dialogues) {
    const auto predictions = model.predict(encoder.encode_dialogue(d));
    for (const Utterance& u : d.utterances) {
      if (*u.gold_label != ComponentLabel::SH || sh_seen >= 20) continue;
      ++sh_seen;
      if (predictions[u.id].predicted == ComponentLabel::SH) ++sh_predicted;
    }
  }
  REQUIRE(sh_seen == 20);
  CHECK(sh_predicted >= 18);
}

TEST_CASE("zero learning rate leaves CCC weights untouched") {
  const Corpus train = fixtures::separable_corpus(4, 5, 2);
  HashedBowBackend backend(32, 0);
  CccConfig config;
  config.epochs = 3;
  config.learning_rate = 0.0;
  config.seed = 6;
  const CccModel trained = train_ccc(train, backend, config);
  const CccModel untouched(backend.dimension(), config.arch, config.seed);
  const auto a = trained.parameters();
  const auto b = untouched.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((*a[i] - *b[i]).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("predictions are normalized, shaped, and deterministic") {
  CccArch arch;
  arch.hidden_dim = 10;
  arch.attention_dim = 8;
  arch.num_heads = 2;
  const CccModel model(16, arch, 4);

  SUBCASE("single-utterance dialogue") {
    std::vector<Eigen::VectorXd> one = {Eigen::VectorXd::Ones(16)};
    const auto predictions = model.predict(one);
    REQUIRE(predictions.size() == 1);
    double sum = 0.0;
    for (double p : predictions[0].probabilities) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-6);
  }
  SUBCASE("reversing utterance order only preserves shape") {
    const Eigen::MatrixXd x = random_batch(6, 16, 9);
    const Eigen::MatrixXd probs = model.probabilities(x);
    const Eigen::MatrixXd reversed_probs =
        model.probabilities(x.colwise().reverse());
    CHECK(probs.rows() == 6);
    CHECK(reversed_probs.rows() == 6);  // context sensitivity is permitted
  }
  SUBCASE("repeated prediction is bitwise stable") {
    const Eigen::MatrixXd x = random_batch(5, 16, 10);
    CHECK((model.probabilities(x) - model.probabilities(x))
              .lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("argmax tie-break is total and deterministic") {
  CHECK(argmax_label({0.25, 0.25, 0.25, 0.25}) == ComponentLabel::SH);
  CHECK(argmax_label({0.1, 0.4, 0.4, 0.1}) == ComponentLabel::PD);
  CHECK(argmax_label({0.0, 0.0, 0.5, 0.5}) == ComponentLabel::RT);
  CHECK(argmax_label({0.0, 0.0, 0.0, 1.0}) == ComponentLabel::DF);
}

TEST_CASE("over-long dialogues are chunked with a warning") {
  CccArch arch;
  arch.hidden_dim = 8;
  arch.attention_dim = 8;
  arch.num_heads = 1;
  arch.max_sequence_length = 4;
  const CccModel model(16, arch, 1);

  std::vector<Eigen::VectorXd> embeddings(10, Eigen::VectorXd::Ones(16));
  std::vector<std::string> warnings;
  set_warning_sink([&](std::string_view msg) { warnings.emplace_back(msg); });
  const auto predictions = model.predict(embeddings);
  reset_warning_sink();
  CHECK(predictions.size() == 10);
  REQUIRE_FALSE(warnings.empty());
  CHECK(warnings.front().find("chunking") != std::string::npos);
}

TEST_CASE("CCC rejects dimension mismatches and bad head counts") {
  CccArch arch;
  arch.hidden_dim = 8;
  arch.attention_dim = 8;
  arch.num_heads = 1;
  const CccModel model(16, arch, 1);
  CHECK_THROWS_AS(model.probabilities(random_batch(3, 8, 1)), Error);

  CccArch bad = arch;
  bad.num_heads = 3;  // does not divide 8
  CHECK_THROWS_AS(CccModel(16, bad, 1), ConfigError);
}

TEST_CASE("CCC analytic gradients match finite differences") {
  CccArch arch;
  arch.hidden_dim = 4;
  arch.attention_dim = 4;
  arch.num_heads = 1;
  CccModel model(8, arch, 7);
  const Eigen::MatrixXd x = random_batch(3, 8, 321);
  const std::vector<Eigen::MatrixXd> sequences = {x};
  const std::vector<std::vector<int>> labels = {{0, 2, 3}};
  std::vector<Eigen::MatrixXd> grads;
  model.loss_and_gradients(sequences, labels, grads);
  const auto result =
      gradcheck::check(model.parameters(), grads,
                       [&] { return model.loss(sequences, labels); });
  CHECK(result.entries_checked > 0);
  CHECK(result.max_relative_error <= 1e-3);
}

TEST_CASE("training requires gold labels") {
  Corpus corpus = fixtures::separable_corpus(2, 3, 1);
  corpus.dialogues[0].utterances[1].gold_label.reset();
  HashedBowBackend backend(32, 0);
  CccConfig config;
  config.epochs = 1;
  CHECK_THROWS_WITH_AS(train_ccc(corpus, backend, config),
                       doctest::Contains("gold labels"), Error);
}
