#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "consum/corpus.hpp"
#include "consum/encoder.hpp"
#include "consum/nn.hpp"
#include "consum/types.hpp"

namespace consum {

struct ComponentPrediction {
  std::array<double, kNumComponentLabels> probabilities{};
  ComponentLabel predicted = ComponentLabel::SH;
};

// Deterministic argmax with tie-break order SH < PD < RT < DF.
ComponentLabel argmax_label(
    const std::array<double, kNumComponentLabels>& probabilities);

struct CccArch {
  int hidden_dim = 100;
  int attention_dim = 96;  // num_heads must divide this
  int num_heads = 4;
  int max_sequence_length = 256;
};

struct CccConfig {
  int epochs = 20;
  double learning_rate = 1e-3;
  int batch_size = 4;  // dialogues per batch; the GRU consumes whole dialogues
  std::uint64_t seed = 0;
  CccArch arch;
};

// Counseling-component classifier: linear projection d -> hidden, GRU over
// the dialogue, multi-head self-attention (residual) over the GRU states,
// dense head hidden -> 4, softmax. Dialogues longer than the configured
// max sequence length are chunked with overlap 0 and a warning.
class CccModel {
 public:
  static constexpr int kNumClasses = kNumComponentLabels;

  CccModel(int input_dim, const CccArch& arch, std::uint64_t seed);

  int input_dim() const { return input_dim_; }
  const CccArch& arch() const { return arch_; }
  std::uint64_t seed() const { return seed_; }

  // Class probabilities for one in-order dialogue (rows = utterances). No
  // chunking: the sequence must fit max_sequence_length.
  Eigen::MatrixXd probabilities(const Eigen::MatrixXd& embeddings) const;

  // Chunked prediction over a whole dialogue.
  std::vector<ComponentPrediction> predict(
      std::span<const Eigen::VectorXd> dialogue_embeddings) const;

  // Mean cross-entropy over all utterances of all sequences.
  double loss(std::span<const Eigen::MatrixXd> sequences,
              std::span<const std::vector<int>> labels) const;
  double loss_and_gradients(std::span<const Eigen::MatrixXd> sequences,
                            std::span<const std::vector<int>> labels,
                            std::vector<Eigen::MatrixXd>& grads) const;

  std::vector<Eigen::MatrixXd*> parameters();
  std::vector<const Eigen::MatrixXd*> parameters() const;
  static std::vector<std::string> parameter_names();

  nn::TrainingLog& training_log() { return log_; }
  const nn::TrainingLog& training_log() const { return log_; }

 private:
  struct SequenceCache;
  void forward_sequence(const Eigen::MatrixXd& x, SequenceCache& cache) const;
  void backward_sequence(const SequenceCache& cache,
                         const Eigen::MatrixXd& dlogits,
                         std::vector<Eigen::MatrixXd>& grads) const;

  int input_dim_;
  CccArch arch_;
  std::uint64_t seed_;
  // Projection, GRU gates (reset/update/candidate), attention, dense head.
  Eigen::MatrixXd wp_, bp_;
  Eigen::MatrixXd wr_, ur_, br_;
  Eigen::MatrixXd wz_, uz_, bz_;
  Eigen::MatrixXd wc_, uc_, bc_;
  Eigen::MatrixXd wq_, wk_, wv_, wo_, bo_;
  Eigen::MatrixXd wd_, bd_;
  nn::TrainingLog log_;
};

// Batching is per-dialogue: the recurrent layer consumes dialogues in
// utterance order. Requires gold labels on every utterance.
CccModel train_ccc(const Corpus& train_corpus, const EncoderBackend& backend,
                   const CccConfig& config);

std::vector<ComponentPrediction> predict_components(
    const CccModel& model,
    std::span<const Eigen::VectorXd> dialogue_embeddings);

}  // namespace consum
