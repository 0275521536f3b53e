#include <benchmark/benchmark.h>

#include <random>
#include <sstream>
#include <string>

#include "consum/component_classifier.hpp"
#include "consum/corpus.hpp"
#include "consum/encoder.hpp"
#include "consum/filler_classifier.hpp"
#include "consum/knowledge_filter.hpp"
#include "consum/metrics.hpp"
#include "consum/summarizer.hpp"

namespace {

using namespace consum;

std::string random_text(std::mt19937_64& rng, int tokens) {
  std::string out;
  for (int i = 0; i < tokens; ++i) {
    if (i > 0) out += ' ';
    out += "word" + std::to_string(rng() % 200);
  }
  return out;
}

void BM_RougeN(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const std::string a = random_text(rng, static_cast<int>(state.range(0)));
  const std::string b = random_text(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rouge_n(a, b, 2));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RougeN)->Range(16, 1024)->Complexity();

void BM_RougeL(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const std::string a = random_text(rng, static_cast<int>(state.range(0)));
  const std::string b = random_text(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rouge_l(a, b));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RougeL)->Range(16, 512)->Complexity();

void BM_HashedEncode(benchmark::State& state) {
  std::mt19937_64 rng(3);
  HashedBowBackend backend(768, 0);
  const std::string text = random_text(rng, 24);
  for (auto _ : state) {
    benchmark::DoNotOptimize(backend.encode(text));
  }
}
BENCHMARK(BM_HashedEncode);

void BM_TokenAlignment(benchmark::State& state) {
  std::mt19937_64 rng(4);
  HashedBowBackend backend(768, 0);
  const std::string a = random_text(rng, static_cast<int>(state.range(0)));
  const std::string b = random_text(rng, 12);
  for (auto _ : state) {
    benchmark::DoNotOptimize(token_alignment_score(a, b, backend));
  }
}
BENCHMARK(BM_TokenAlignment)->Range(8, 128);

void BM_KnowledgeScore(benchmark::State& state) {
  std::mt19937_64 rng(5);
  HashedBowBackend backend(768, 0);
  const PhqLexicon lexicon = PhqLexicon::default_phq9();
  const std::string text = random_text(rng, 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(knowledge_score(text, lexicon, backend));
  }
}
BENCHMARK(BM_KnowledgeScore);

void BM_DfcForward(benchmark::State& state) {
  const auto n = state.range(0);
  std::mt19937_64 rng(6);
  Eigen::MatrixXd x(n, 768);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      x(i, j) = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }
  }
  DfcModel model(768, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.probabilities(x));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_DfcForward)->Range(8, 256)->Complexity();

void BM_CccForward(benchmark::State& state) {
  const auto n = state.range(0);
  std::mt19937_64 rng(7);
  Eigen::MatrixXd x(n, 768);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      x(i, j) = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }
  }
  CccModel model(768, CccArch{}, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.probabilities(x));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_CccForward)->Range(8, 256)->Complexity();

void BM_SummarizeDialogue(benchmark::State& state) {
  SyntheticSpec spec;
  spec.num_dialogues = 1;
  spec.utterances_per_dialogue = static_cast<int>(state.range(0));
  const Corpus corpus = generate_synthetic_corpus(spec, 9);

  HashedBowBackend backend(768, 0);
  DialogueEncoder encoder(backend);
  DfcModel dfc(768, 1);
  CccModel ccc(768, CccArch{}, 2);
  const PhqLexicon lexicon = PhqLexicon::default_phq9();
  ExtractiveDecoder decoder;
  const GenerationConfig config;

  for (auto _ : state) {
    benchmark::DoNotOptimize(summarize_dialogue(corpus.dialogues[0], dfc, ccc,
                                                lexicon, kDefaultPhi, encoder,
                                                decoder, config));
  }
}
BENCHMARK(BM_SummarizeDialogue)->Arg(8)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
