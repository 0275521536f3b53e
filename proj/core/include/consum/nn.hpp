#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace consum::nn {

// Numerically stable row-wise softmax.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

// Backprop through a row-wise softmax: given A = softmax_rows(S) and dL/dA,
// returns dL/dS.
Eigen::MatrixXd softmax_rows_backward(const Eigen::MatrixXd& activations,
                                      const Eigen::MatrixXd& grad_activations);

Eigen::MatrixXd glorot_uniform(Eigen::Index rows, Eigen::Index cols,
                               std::mt19937_64& rng);

// Adaptive moment-estimation gradient descent. State is lazily sized to the
// parameter list on the first step; the list must stay stable afterwards.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);

  void step(const std::vector<Eigen::MatrixXd*>& params,
            const std::vector<Eigen::MatrixXd>& grads);

 private:
  double learning_rate_;
  double beta1_;
  double beta2_;
  double epsilon_;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> m_;
  std::vector<Eigen::MatrixXd> v_;
};

// Inverted dropout mask: entries are 0 with probability rate, else
// 1/(1-rate), so inference needs no rescaling.
Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate,
                             std::mt19937_64& rng);

struct TrainingLog {
  std::vector<double> epoch_loss;  // mean training loss per epoch
  int epochs_run = 0;
  double final_loss = 0.0;
};

}  // namespace consum::nn
