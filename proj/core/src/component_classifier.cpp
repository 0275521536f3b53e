#include "consum/component_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace consum {

namespace {

constexpr double kLogFloor = 1e-12;

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

}  // namespace

ComponentLabel argmax_label(
    const std::array<double, kNumComponentLabels>& probabilities) {
  int best = 0;
  for (int i = 1; i < kNumComponentLabels; ++i) {
    if (probabilities[i] > probabilities[best]) best = i;
  }
  return static_cast<ComponentLabel>(best);
}

struct CccModel::SequenceCache {
  Eigen::MatrixXd x;                   // n x d input embeddings
  Eigen::MatrixXd proj;                // n x h
  std::vector<Eigen::VectorXd> r, z, c, uch, h;  // per timestep
  Eigen::MatrixXd hmat;                // n x h GRU outputs
  Eigen::MatrixXd q, k, v;             // n x a
  std::vector<Eigen::MatrixXd> attn_weights;  // per head, n x n
  Eigen::MatrixXd attn_concat;         // n x a
  Eigen::MatrixXd fused;               // n x h residual output
  Eigen::MatrixXd probs;               // n x 4
};

CccModel::CccModel(int input_dim, const CccArch& arch, std::uint64_t seed)
    : input_dim_(input_dim), arch_(arch), seed_(seed) {
  if (input_dim < 1) throw ConfigError("CCC input dimension must be >= 1");
  if (arch.hidden_dim < 1) throw ConfigError("CCC hidden size must be >= 1");
  if (arch.num_heads < 1) throw ConfigError("CCC num_heads must be >= 1");
  if (arch.attention_dim < 1 || arch.attention_dim % arch.num_heads != 0) {
    throw ConfigError("CCC num_heads (" + std::to_string(arch.num_heads) +
                      ") must divide the attention dimension (" +
                      std::to_string(arch.attention_dim) + ")");
  }
  if (arch.max_sequence_length < 1) {
    throw ConfigError("CCC max sequence length must be >= 1");
  }

  const int h = arch.hidden_dim;
  const int a = arch.attention_dim;
  std::mt19937_64 rng(seed);
  wp_ = nn::glorot_uniform(h, input_dim, rng);
  bp_ = Eigen::MatrixXd::Zero(h, 1);
  wr_ = nn::glorot_uniform(h, h, rng);
  ur_ = nn::glorot_uniform(h, h, rng);
  br_ = Eigen::MatrixXd::Zero(h, 1);
  wz_ = nn::glorot_uniform(h, h, rng);
  uz_ = nn::glorot_uniform(h, h, rng);
  bz_ = Eigen::MatrixXd::Zero(h, 1);
  wc_ = nn::glorot_uniform(h, h, rng);
  uc_ = nn::glorot_uniform(h, h, rng);
  bc_ = Eigen::MatrixXd::Zero(h, 1);
  wq_ = nn::glorot_uniform(a, h, rng);
  wk_ = nn::glorot_uniform(a, h, rng);
  wv_ = nn::glorot_uniform(a, h, rng);
  wo_ = nn::glorot_uniform(h, a, rng);
  bo_ = Eigen::MatrixXd::Zero(h, 1);
  wd_ = nn::glorot_uniform(kNumClasses, h, rng);
  bd_ = Eigen::MatrixXd::Zero(kNumClasses, 1);
}

void CccModel::forward_sequence(const Eigen::MatrixXd& x,
                                SequenceCache& cache) const {
  if (x.cols() != input_dim_) {
    throw Error("CCC input dimension mismatch: got " +
                std::to_string(x.cols()) + ", model expects " +
                std::to_string(input_dim_));
  }
  const auto n = x.rows();
  const int h = arch_.hidden_dim;
  const int heads = arch_.num_heads;
  const int dh = arch_.attention_dim / heads;

  cache.x = x;
  cache.proj = (x * wp_.transpose()).rowwise() + bp_.col(0).transpose();

  cache.r.resize(n);
  cache.z.resize(n);
  cache.c.resize(n);
  cache.uch.resize(n);
  cache.h.resize(n);
  cache.hmat.resize(n, h);
  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(h);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::VectorXd p_t = cache.proj.row(t).transpose();
    cache.r[t] = sigmoid(wr_ * p_t + ur_ * h_prev + br_.col(0));
    cache.z[t] = sigmoid(wz_ * p_t + uz_ * h_prev + bz_.col(0));
    cache.uch[t] = uc_ * h_prev;
    cache.c[t] =
        (wc_ * p_t + cache.r[t].cwiseProduct(cache.uch[t]) + bc_.col(0))
            .array()
            .tanh();
    cache.h[t] = (Eigen::VectorXd::Ones(h) - cache.z[t])
                     .cwiseProduct(cache.c[t]) +
                 cache.z[t].cwiseProduct(h_prev);
    cache.hmat.row(t) = cache.h[t].transpose();
    h_prev = cache.h[t];
  }

  cache.q = cache.hmat * wq_.transpose();
  cache.k = cache.hmat * wk_.transpose();
  cache.v = cache.hmat * wv_.transpose();
  cache.attn_weights.resize(heads);
  cache.attn_concat.resize(n, arch_.attention_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int j = 0; j < heads; ++j) {
    const auto cols = Eigen::seqN(j * dh, dh);
    Eigen::MatrixXd scores =
        cache.q(Eigen::all, cols) * cache.k(Eigen::all, cols).transpose() *
        scale;
    cache.attn_weights[j] = nn::softmax_rows(scores);
    cache.attn_concat(Eigen::all, cols) =
        cache.attn_weights[j] * cache.v(Eigen::all, cols);
  }

  Eigen::MatrixXd attn_out =
      (cache.attn_concat * wo_.transpose()).rowwise() + bo_.col(0).transpose();
  cache.fused = cache.hmat + attn_out;
  Eigen::MatrixXd logits =
      (cache.fused * wd_.transpose()).rowwise() + bd_.col(0).transpose();
  cache.probs = nn::softmax_rows(logits);
}

void CccModel::backward_sequence(const SequenceCache& cache,
                                 const Eigen::MatrixXd& dlogits,
                                 std::vector<Eigen::MatrixXd>& grads) const {
  const auto n = cache.x.rows();
  const int h = arch_.hidden_dim;
  const int heads = arch_.num_heads;
  const int dh = arch_.attention_dim / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  enum ParamIndex {
    kWp, kBp, kWr, kUr, kBr, kWz, kUz, kBz, kWc, kUc, kBc,
    kWq, kWk, kWv, kWo, kBo, kWd, kBd
  };

  // Dense head.
  grads[kWd] += dlogits.transpose() * cache.fused;
  grads[kBd] += dlogits.colwise().sum().transpose();
  Eigen::MatrixXd dfused = dlogits * wd_;

  // Residual: gradient flows to both the attention output and H.
  Eigen::MatrixXd dattn_out = dfused;
  Eigen::MatrixXd dh_mat = dfused;

  grads[kWo] += dattn_out.transpose() * cache.attn_concat;
  grads[kBo] += dattn_out.colwise().sum().transpose();
  Eigen::MatrixXd dconcat = dattn_out * wo_;

  Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(n, arch_.attention_dim);
  Eigen::MatrixXd dk = Eigen::MatrixXd::Zero(n, arch_.attention_dim);
  Eigen::MatrixXd dv = Eigen::MatrixXd::Zero(n, arch_.attention_dim);
  for (int j = 0; j < heads; ++j) {
    const auto cols = Eigen::seqN(j * dh, dh);
    const Eigen::MatrixXd& weights = cache.attn_weights[j];
    Eigen::MatrixXd dout_j = dconcat(Eigen::all, cols);
    Eigen::MatrixXd dweights =
        dout_j * cache.v(Eigen::all, cols).transpose();
    dv(Eigen::all, cols) = weights.transpose() * dout_j;
    Eigen::MatrixXd dscores = nn::softmax_rows_backward(weights, dweights);
    dq(Eigen::all, cols) = dscores * cache.k(Eigen::all, cols) * scale;
    dk(Eigen::all, cols) =
        dscores.transpose() * cache.q(Eigen::all, cols) * scale;
  }
  grads[kWq] += dq.transpose() * cache.hmat;
  grads[kWk] += dk.transpose() * cache.hmat;
  grads[kWv] += dv.transpose() * cache.hmat;
  dh_mat += dq * wq_ + dk * wk_ + dv * wv_;

  // GRU backprop through time.
  Eigen::MatrixXd dproj = Eigen::MatrixXd::Zero(n, h);
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h);
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const Eigen::VectorXd dh_t = dh_mat.row(t).transpose() + dh_next;
    const Eigen::VectorXd h_prev =
        t > 0 ? cache.h[t - 1] : Eigen::VectorXd::Zero(h);
    const Eigen::VectorXd& r = cache.r[t];
    const Eigen::VectorXd& z = cache.z[t];
    const Eigen::VectorXd& c = cache.c[t];
    const Eigen::VectorXd p_t = cache.proj.row(t).transpose();

    const Eigen::VectorXd dz = dh_t.cwiseProduct(h_prev - c);
    const Eigen::VectorXd dc =
        dh_t.cwiseProduct(Eigen::VectorXd::Ones(h) - z);
    Eigen::VectorXd dh_prev = dh_t.cwiseProduct(z);

    const Eigen::VectorXd dac =
        dc.cwiseProduct((1.0 - c.array().square()).matrix());
    grads[kWc] += dac * p_t.transpose();
    grads[kBc] += dac;
    const Eigen::VectorXd dr = dac.cwiseProduct(cache.uch[t]);
    const Eigen::VectorXd duch = dac.cwiseProduct(r);
    grads[kUc] += duch * h_prev.transpose();
    dh_prev += uc_.transpose() * duch;
    Eigen::VectorXd dp = wc_.transpose() * dac;

    const Eigen::VectorXd dar =
        dr.cwiseProduct(r).cwiseProduct(Eigen::VectorXd::Ones(h) - r);
    grads[kWr] += dar * p_t.transpose();
    grads[kUr] += dar * h_prev.transpose();
    grads[kBr] += dar;
    dh_prev += ur_.transpose() * dar;
    dp += wr_.transpose() * dar;

    const Eigen::VectorXd daz =
        dz.cwiseProduct(z).cwiseProduct(Eigen::VectorXd::Ones(h) - z);
    grads[kWz] += daz * p_t.transpose();
    grads[kUz] += daz * h_prev.transpose();
    grads[kBz] += daz;
    dh_prev += uz_.transpose() * daz;
    dp += wz_.transpose() * daz;

    dproj.row(t) = dp.transpose();
    dh_next = dh_prev;
  }

  grads[kWp] += dproj.transpose() * cache.x;
  grads[kBp] += dproj.colwise().sum().transpose();
}

Eigen::MatrixXd CccModel::probabilities(
    const Eigen::MatrixXd& embeddings) const {
  SequenceCache cache;
  forward_sequence(embeddings, cache);
  return cache.probs;
}

std::vector<ComponentPrediction> CccModel::predict(
    std::span<const Eigen::VectorXd> dialogue_embeddings) const {
  const auto n = static_cast<Eigen::Index>(dialogue_embeddings.size());
  const int max_len = arch_.max_sequence_length;
  if (n > max_len) {
    warn("CCC: dialogue of " + std::to_string(n) +
         " utterances exceeds max sequence length " +
         std::to_string(max_len) + "; chunking with overlap 0");
  }
  std::vector<ComponentPrediction> predictions;
  predictions.reserve(dialogue_embeddings.size());
  const Eigen::MatrixXd all = stack_embeddings(dialogue_embeddings);
  for (Eigen::Index start = 0; start < n; start += max_len) {
    const Eigen::Index count = std::min<Eigen::Index>(max_len, n - start);
    const Eigen::MatrixXd probs = probabilities(all.middleRows(start, count));
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      ComponentPrediction pred;
      for (int cls = 0; cls < kNumClasses; ++cls) {
        pred.probabilities[cls] = probs(i, cls);
      }
      pred.predicted = argmax_label(pred.probabilities);
      predictions.push_back(pred);
    }
  }
  return predictions;
}

double CccModel::loss(std::span<const Eigen::MatrixXd> sequences,
                      std::span<const std::vector<int>> labels) const {
  double total = 0.0;
  long count = 0;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    SequenceCache cache;
    forward_sequence(sequences[s], cache);
    for (Eigen::Index t = 0; t < cache.probs.rows(); ++t) {
      total -= std::log(std::max(cache.probs(t, labels[s][t]), kLogFloor));
      ++count;
    }
  }
  return count > 0 ? total / static_cast<double>(count) : 0.0;
}

double CccModel::loss_and_gradients(std::span<const Eigen::MatrixXd> sequences,
                                    std::span<const std::vector<int>> labels,
                                    std::vector<Eigen::MatrixXd>& grads) const {
  if (sequences.size() != labels.size()) {
    throw Error("CCC batch: sequence/label count mismatch");
  }
  const auto params = parameters();
  grads.assign(params.size(), Eigen::MatrixXd());
  for (std::size_t i = 0; i < params.size(); ++i) {
    grads[i] = Eigen::MatrixXd::Zero(params[i]->rows(), params[i]->cols());
  }

  long total_utterances = 0;
  for (const auto& seq : sequences) total_utterances += seq.rows();
  if (total_utterances == 0) return 0.0;

  double total = 0.0;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    if (static_cast<std::size_t>(sequences[s].rows()) != labels[s].size()) {
      throw Error("CCC batch: labels do not match sequence length");
    }
    SequenceCache cache;
    forward_sequence(sequences[s], cache);
    Eigen::MatrixXd dlogits = cache.probs;
    for (Eigen::Index t = 0; t < cache.probs.rows(); ++t) {
      total -= std::log(std::max(cache.probs(t, labels[s][t]), kLogFloor));
      dlogits(t, labels[s][t]) -= 1.0;
    }
    dlogits /= static_cast<double>(total_utterances);
    backward_sequence(cache, dlogits, grads);
  }
  return total / static_cast<double>(total_utterances);
}

std::vector<Eigen::MatrixXd*> CccModel::parameters() {
  return {&wp_, &bp_, &wr_, &ur_, &br_, &wz_, &uz_, &bz_, &wc_, &uc_, &bc_,
          &wq_, &wk_, &wv_, &wo_, &bo_, &wd_, &bd_};
}

std::vector<const Eigen::MatrixXd*> CccModel::parameters() const {
  return {&wp_, &bp_, &wr_, &ur_, &br_, &wz_, &uz_, &bz_, &wc_, &uc_, &bc_,
          &wq_, &wk_, &wv_, &wo_, &bo_, &wd_, &bd_};
}

std::vector<std::string> CccModel::parameter_names() {
  return {"wp", "bp", "wr", "ur", "br", "wz", "uz", "bz", "wc", "uc", "bc",
          "wq", "wk", "wv", "wo", "bo", "wd", "bd"};
}

CccModel train_ccc(const Corpus& train_corpus, const EncoderBackend& backend,
                   const CccConfig& config) {
  if (config.epochs < 0 || config.batch_size < 1) {
    throw ConfigError("CCC config: epochs must be >= 0, batch_size >= 1");
  }

  // One training sequence per dialogue chunk; chunking preserves utterance
  // order within each chunk.
  std::vector<Eigen::MatrixXd> sequences;
  std::vector<std::vector<int>> labels;
  DialogueEncoder encoder(backend);
  for (const Dialogue& dialogue : train_corpus.dialogues) {
    const auto vectors = encoder.encode_dialogue(dialogue);
    const auto n = static_cast<Eigen::Index>(vectors.size());
    if (n > config.arch.max_sequence_length) {
      warn("train_ccc: dialogue '" + dialogue.dialogue_id + "' of " +
           std::to_string(n) + " utterances exceeds max sequence length " +
           std::to_string(config.arch.max_sequence_length) +
           "; chunking with overlap 0");
    }
    const Eigen::MatrixXd all = stack_embeddings(vectors);
    for (Eigen::Index start = 0; start < n;
         start += config.arch.max_sequence_length) {
      const Eigen::Index count =
          std::min<Eigen::Index>(config.arch.max_sequence_length, n - start);
      sequences.push_back(all.middleRows(start, count));
      std::vector<int> seq_labels;
      for (Eigen::Index t = 0; t < count; ++t) {
        const Utterance& utt = dialogue.utterances[start + t];
        if (!utt.gold_label) {
          throw Error("train_ccc requires gold labels on every utterance "
                      "(dialogue '" + dialogue.dialogue_id + "' utterance " +
                      std::to_string(utt.id) + " is unlabeled)");
        }
        seq_labels.push_back(static_cast<int>(*utt.gold_label));
      }
      labels.push_back(std::move(seq_labels));
    }
  }
  if (sequences.empty()) throw Error("train_ccc: empty training corpus");

  CccModel model(backend.dimension(), config.arch, config.seed);
  nn::Adam optimizer(config.learning_rate);
  std::mt19937_64 rng(config.seed ^ 0xccc5eed5);
  const auto num_sequences = static_cast<int>(sequences.size());
  std::vector<int> order(num_sequences);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (int i = num_sequences - 1; i > 0; --i) {
      const auto j =
          static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[i], order[j]);
    }
    double epoch_loss = 0.0;
    long seen = 0;
    for (int start = 0; start < num_sequences; start += config.batch_size) {
      const int count = std::min(config.batch_size, num_sequences - start);
      std::vector<Eigen::MatrixXd> batch_x;
      std::vector<std::vector<int>> batch_y;
      long batch_utterances = 0;
      for (int k = 0; k < count; ++k) {
        batch_x.push_back(sequences[order[start + k]]);
        batch_y.push_back(labels[order[start + k]]);
        batch_utterances += batch_x.back().rows();
      }
      std::vector<Eigen::MatrixXd> grads;
      const double batch_loss =
          model.loss_and_gradients(batch_x, batch_y, grads);
      optimizer.step(model.parameters(), grads);
      epoch_loss += batch_loss * static_cast<double>(batch_utterances);
      seen += batch_utterances;
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

std::vector<ComponentPrediction> predict_components(
    const CccModel& model,
    std::span<const Eigen::VectorXd> dialogue_embeddings) {
  return model.predict(dialogue_embeddings);
}

}  // namespace consum
