#include "consum/nn.hpp"

#include <cmath>

#include "consum/types.hpp"

namespace consum::nn {

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd shifted =
      logits.colwise() - logits.rowwise().maxCoeff();
  Eigen::MatrixXd exps = shifted.array().exp();
  return exps.array().colwise() / exps.rowwise().sum().array();
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd shifted = logits.array() - logits.maxCoeff();
  Eigen::VectorXd exps = shifted.array().exp();
  return exps / exps.sum();
}

Eigen::MatrixXd softmax_rows_backward(
    const Eigen::MatrixXd& activations,
    const Eigen::MatrixXd& grad_activations) {
  // dS = A .* (dA - rowsum(dA .* A))
  Eigen::VectorXd row_dot =
      (grad_activations.array() * activations.array()).rowwise().sum();
  return activations.array() *
         (grad_activations.colwise() - row_dot).array();
}

Eigen::MatrixXd glorot_uniform(Eigen::Index rows, Eigen::Index cols,
                               std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      out(i, j) = (2.0 * u - 1.0) * limit;
    }
  }
  return out;
}

Adam::Adam(double learning_rate, double beta1, double beta2, double epsilon)
    : learning_rate_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon) {}

void Adam::step(const std::vector<Eigen::MatrixXd*>& params,
                const std::vector<Eigen::MatrixXd>& grads) {
  if (params.size() != grads.size()) {
    throw Error("Adam: parameter/gradient count mismatch");
  }
  if (m_.empty()) {
    for (const Eigen::MatrixXd* p : params) {
      m_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
      v_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    }
  }
  if (m_.size() != params.size()) {
    throw Error("Adam: parameter list changed between steps");
  }
  ++t_;
  const double bias1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i].array() +
            (1.0 - beta2_) * grads[i].array().square();
    Eigen::ArrayXXd m_hat = m_[i].array() / bias1;
    Eigen::ArrayXXd v_hat = v_[i].array() / bias2;
    *params[i] -=
        (learning_rate_ * m_hat / (v_hat.sqrt() + epsilon_)).matrix();
  }
}

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate,
                             std::mt19937_64& rng) {
  if (rate <= 0.0) return Eigen::MatrixXd::Ones(rows, cols);
  if (rate >= 1.0) throw Error("dropout rate must be < 1");
  const double keep = 1.0 - rate;
  Eigen::MatrixXd mask(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      mask(i, j) = u < rate ? 0.0 : 1.0 / keep;
    }
  }
  return mask;
}

}  // namespace consum::nn
