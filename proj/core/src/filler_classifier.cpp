#include "consum/filler_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace consum {

namespace {

constexpr double kLogFloor = 1e-12;

void check_dimension(const DfcModel& model, Eigen::Index cols) {
  if (cols != model.input_dim()) {
    throw Error("DFC input dimension mismatch: got " + std::to_string(cols) +
                ", model expects " + std::to_string(model.input_dim()));
  }
}

}  // namespace

DfcModel::DfcModel(int input_dim, std::uint64_t seed)
    : input_dim_(input_dim), seed_(seed) {
  if (input_dim < 1) throw ConfigError("DFC input dimension must be >= 1");
  std::mt19937_64 rng(seed);
  w1_ = nn::glorot_uniform(kHiddenDim, input_dim, rng);
  b1_ = Eigen::MatrixXd::Zero(kHiddenDim, 1);
  w2_ = nn::glorot_uniform(kNumClasses, kHiddenDim, rng);
  b2_ = Eigen::MatrixXd::Zero(kNumClasses, 1);
}

Eigen::MatrixXd DfcModel::probabilities(
    const Eigen::MatrixXd& embeddings) const {
  check_dimension(*this, embeddings.cols());
  Eigen::MatrixXd z1 =
      (embeddings * w1_.transpose()).rowwise() + b1_.col(0).transpose();
  Eigen::MatrixXd hidden = z1.cwiseMax(0.0);
  Eigen::MatrixXd logits =
      (hidden * w2_.transpose()).rowwise() + b2_.col(0).transpose();
  return nn::softmax_rows(logits);
}

MaskArray DfcModel::predict_filler_mask(
    std::span<const Eigen::VectorXd> embeddings) const {
  Eigen::MatrixXd probs = probabilities(stack_embeddings(embeddings));
  MaskArray tau(embeddings.size());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    // Strict > breaks ties toward class 0 (counseling).
    tau.set(static_cast<std::size_t>(i),
            probs(i, kFillerClass) > probs(i, 0));
  }
  return tau;
}

double DfcModel::loss(const Eigen::MatrixXd& embeddings,
                      const std::vector<int>& labels) const {
  Eigen::MatrixXd probs = probabilities(embeddings);
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    total -= std::log(std::max(probs(i, labels[i]), kLogFloor));
  }
  return total / static_cast<double>(probs.rows());
}

double DfcModel::loss_and_gradients(const Eigen::MatrixXd& embeddings,
                                    const std::vector<int>& labels,
                                    std::vector<Eigen::MatrixXd>& grads,
                                    double dropout_rate,
                                    std::mt19937_64* dropout_rng) const {
  check_dimension(*this, embeddings.cols());
  const Eigen::Index n = embeddings.rows();
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw Error("DFC batch size mismatch between embeddings and labels");
  }

  Eigen::MatrixXd z1 =
      (embeddings * w1_.transpose()).rowwise() + b1_.col(0).transpose();
  Eigen::MatrixXd hidden = z1.cwiseMax(0.0);
  Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(n, kHiddenDim);
  if (dropout_rate > 0.0 && dropout_rng != nullptr) {
    mask = nn::dropout_mask(n, kHiddenDim, dropout_rate, *dropout_rng);
  }
  Eigen::MatrixXd dropped = hidden.cwiseProduct(mask);
  Eigen::MatrixXd logits =
      (dropped * w2_.transpose()).rowwise() + b2_.col(0).transpose();
  Eigen::MatrixXd probs = nn::softmax_rows(logits);

  double total = 0.0;
  Eigen::MatrixXd dlogits = probs;
  for (Eigen::Index i = 0; i < n; ++i) {
    total -= std::log(std::max(probs(i, labels[i]), kLogFloor));
    dlogits(i, labels[i]) -= 1.0;
  }
  dlogits /= static_cast<double>(n);

  Eigen::MatrixXd dw2 = dlogits.transpose() * dropped;
  Eigen::MatrixXd db2 = dlogits.colwise().sum().transpose();
  Eigen::MatrixXd ddropped = dlogits * w2_;
  Eigen::MatrixXd dhidden = ddropped.cwiseProduct(mask);
  Eigen::MatrixXd dz1 =
      (z1.array() > 0.0).cast<double>() * dhidden.array();
  Eigen::MatrixXd dw1 = dz1.transpose() * embeddings;
  Eigen::MatrixXd db1 = dz1.colwise().sum().transpose();

  grads.clear();
  grads.push_back(std::move(dw1));
  grads.push_back(std::move(db1));
  grads.push_back(std::move(dw2));
  grads.push_back(std::move(db2));
  return total / static_cast<double>(n);
}

std::vector<Eigen::MatrixXd*> DfcModel::parameters() {
  return {&w1_, &b1_, &w2_, &b2_};
}

std::vector<const Eigen::MatrixXd*> DfcModel::parameters() const {
  return {&w1_, &b1_, &w2_, &b2_};
}

std::vector<std::string> DfcModel::parameter_names() {
  return {"w1", "b1", "w2", "b2"};
}

DfcModel train_dfc(const Corpus& train_corpus, const EncoderBackend& backend,
                   const DfcConfig& config) {
  if (config.epochs < 0 || config.batch_size < 1) {
    throw ConfigError("DFC config: epochs must be >= 0, batch_size >= 1");
  }
  if (config.dropout < 0.0 || config.dropout >= 1.0) {
    throw ConfigError("DFC config: dropout must be in [0, 1)");
  }

  std::vector<Eigen::VectorXd> embeddings;
  std::vector<int> labels;
  DialogueEncoder encoder(backend);
  for (const Dialogue& dialogue : train_corpus.dialogues) {
    auto vectors = encoder.encode_dialogue(dialogue);
    for (const Utterance& utt : dialogue.utterances) {
      if (!utt.gold_label) {
        throw Error("train_dfc requires gold labels on every utterance "
                    "(dialogue '" + dialogue.dialogue_id + "' utterance " +
                    std::to_string(utt.id) + " is unlabeled)");
      }
      labels.push_back(*utt.gold_label == ComponentLabel::DF ? 1 : 0);
      embeddings.push_back(std::move(vectors[utt.id]));
    }
  }
  if (embeddings.empty()) throw Error("train_dfc: empty training corpus");

  std::set<int> class_set(labels.begin(), labels.end());
  if (class_set.size() < 2) {
    warn("train_dfc: training corpus contains a single class; "
         "training proceeds");
  }

  const Eigen::MatrixXd x = stack_embeddings(embeddings);
  const auto n = static_cast<int>(labels.size());

  DfcModel model(backend.dimension(), config.seed);
  nn::Adam optimizer(config.learning_rate);
  std::mt19937_64 rng(config.seed ^ 0xd1f5c0de);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (int i = n - 1; i > 0; --i) {
      const auto j =
          static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[i], order[j]);
    }
    double epoch_loss = 0.0;
    long seen = 0;
    for (int start = 0; start < n; start += config.batch_size) {
      const int count = std::min(config.batch_size, n - start);
      Eigen::MatrixXd batch_x(count, x.cols());
      std::vector<int> batch_y(count);
      for (int k = 0; k < count; ++k) {
        batch_x.row(k) = x.row(order[start + k]);
        batch_y[k] = labels[order[start + k]];
      }
      std::vector<Eigen::MatrixXd> grads;
      const double batch_loss = model.loss_and_gradients(
          batch_x, batch_y, grads, config.dropout, &rng);
      optimizer.step(model.parameters(), grads);
      epoch_loss += batch_loss * count;
      seen += count;
    }
    model.training_log().epoch_loss.push_back(epoch_loss /
                                              static_cast<double>(seen));
  }
  model.training_log().epochs_run = config.epochs;
  model.training_log().final_loss =
      model.training_log().epoch_loss.empty()
          ? 0.0
          : model.training_log().epoch_loss.back();
  return model;
}

MaskArray predict_filler_mask(const DfcModel& model,
                              std::span<const Eigen::VectorXd> embeddings) {
  return model.predict_filler_mask(embeddings);
}

}  // namespace consum
