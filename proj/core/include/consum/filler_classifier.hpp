#pragma once

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

struct DfcConfig {
  int epochs = 20;
  double learning_rate = 1e-3;
  int batch_size = 32;
  double dropout = 0.20;
  std::uint64_t seed = 0;
};

// Binary discussion-filler classifier: d -> 100 (ReLU, dropout while
// training) -> 2 softmax. Class 1 is "discussion filler", class 0 is
// "counseling". Dropout is disabled at inference.
class DfcModel {
 public:
  static constexpr int kHiddenDim = 100;
  static constexpr int kNumClasses = 2;
  static constexpr int kFillerClass = 1;

  DfcModel(int input_dim, std::uint64_t seed);

  int input_dim() const { return input_dim_; }
  std::uint64_t seed() const { return seed_; }

  // Row-wise class probabilities for a batch of embeddings (n x d).
  Eigen::MatrixXd probabilities(const Eigen::MatrixXd& embeddings) const;

  // tau[i] = 1 iff utterance i is classified as discussion filler; ties
  // break toward counseling (class 0).
  MaskArray predict_filler_mask(
      std::span<const Eigen::VectorXd> embeddings) const;

  // Mean cross-entropy over the batch; labels are class indices {0, 1}.
  double loss(const Eigen::MatrixXd& embeddings,
              const std::vector<int>& labels) const;
  double loss_and_gradients(const Eigen::MatrixXd& embeddings,
                            const std::vector<int>& labels,
                            std::vector<Eigen::MatrixXd>& grads,
                            double dropout_rate = 0.0,
                            std::mt19937_64* dropout_rng = nullptr) const;

  // Stable order: w1, b1, w2, b2 (biases as column vectors).
  std::vector<Eigen::MatrixXd*> parameters();
  std::vector<const Eigen::MatrixXd*> parameters() const;
  static std::vector<std::string> parameter_names();

  nn::TrainingLog& training_log() { return log_; }
  const nn::TrainingLog& training_log() const { return log_; }

 private:
  int input_dim_;
  std::uint64_t seed_;
  Eigen::MatrixXd w1_, b1_, w2_, b2_;
  nn::TrainingLog log_;
};

// DF maps to class 1, the three counseling components to class 0. Every
// utterance must carry a gold label; a single-class corpus trains with a
// warning.
DfcModel train_dfc(const Corpus& train_corpus, const EncoderBackend& backend,
                   const DfcConfig& config);

MaskArray predict_filler_mask(const DfcModel& model,
                              std::span<const Eigen::VectorXd> embeddings);

}  // namespace consum
