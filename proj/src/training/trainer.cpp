#include "numta/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "numta/core/errors.hpp"

namespace numta {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must lie in [0,1)");
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"optimizer", "adam"},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"seed", c.seed},
          {"shuffle", c.shuffle},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"epsilon", c.epsilon},
          {"loss", "categorical_crossentropy"}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  try {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.seed = j.value("seed", c.seed);
    c.shuffle = j.value("shuffle", c.shuffle);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.epsilon = j.value("epsilon", c.epsilon);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed train config: ") + e.what());
  }
  return c;
}

void EpochHistory::validate() const {
  const auto n = train_loss.size();
  if (train_accuracy.size() != n || test_loss.size() != n || test_accuracy.size() != n)
    throw DataError("history series differ in length");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(train_loss[i] >= 0.0) || !(test_loss[i] >= 0.0)) throw DataError("history holds a negative loss");
    for (double a : {train_accuracy[i], test_accuracy[i]})
      if (!(a >= 0.0 && a <= 1.0)) throw DataError("history holds an accuracy outside [0,1]");
  }
}

int argmax(const Scalar* row, std::size_t k) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < k; ++c)
    if (row[c] > row[best]) best = c;
  return static_cast<int>(best);
}

double cross_entropy(const Tensor& logits, std::span<const int> labels, Tensor* grad, std::size_t* correct) {
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  if (labels.size() != n) throw ShapeError("label count does not match the batch");
  if (grad) *grad = Tensor(logits.shape());
  double total = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Scalar* z = logits.data() + i * k;
    const auto label = static_cast<std::size_t>(labels[i]);
    if (label >= k) throw LabelOutOfRange("label " + std::to_string(labels[i]) + " outside the head");
    const Scalar peak = *std::max_element(z, z + k);
    Scalar sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += std::exp(z[c] - peak);
    const Scalar lse = peak + std::log(sum);
    total += lse - z[label];
    if (argmax(z, k) == labels[i]) ++hits;
    if (grad) {
      Scalar* g = grad->data() + i * k;
      for (std::size_t c = 0; c < k; ++c) g[c] = std::exp(z[c] - lse) / static_cast<Scalar>(n);
      g[label] -= 1.0 / static_cast<Scalar>(n);
    }
  }
  if (correct) *correct = hits;
  return total;
}

namespace {

std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return order;
}

std::vector<int> labels_for(const ImageSet& set, const std::vector<std::size_t>& order, std::size_t b, std::size_t e) {
  std::vector<int> out;
  out.reserve(e - b);
  for (std::size_t i = b; i < e; ++i) out.push_back(set.labels[order[i]]);
  return out;
}

void check_disjoint(const DatasetManifest& a, const DatasetManifest& b) {
  const auto ids = a.ids();
  for (const auto& r : b.records())
    if (ids.contains(r.id)) throw DataError("train and eval sets share record '" + r.id + "'");
}

}  // namespace

LossAccuracy evaluate_loss_acc(Model& model, const ImageSet& set, const PreprocessMode& mode,
                               std::size_t batch_size) {
  if (set.empty()) throw EmptyDatasetError("evaluation set is empty");
  batch_size = std::max<std::size_t>(batch_size, 1);
  const auto order = identity_order(set.size());
  double loss = 0.0;
  std::size_t hits = 0;
  for (std::size_t b = 0; b < set.size(); b += batch_size) {
    const std::size_t e = std::min(set.size(), b + batch_size);
    const auto logits = model.forward_logits(make_batch(set, order, b, e, mode), nn::Phase::infer);
    std::size_t correct = 0;
    loss += cross_entropy(logits, labels_for(set, order, b, e), nullptr, &correct);
    hits += correct;
  }
  const double n = static_cast<double>(set.size());
  return {loss / n, static_cast<double>(hits) / n};
}

LossAccuracy evaluate_loss_acc(Model& model, const DatasetManifest& set, const PreprocessMode& mode,
                               std::size_t batch_size) {
  return evaluate_loss_acc(model, load_image_set(set), mode, batch_size);
}

Predictions predict_labels(Model& model, const ImageSet& set, const PreprocessMode& mode, std::size_t batch_size) {
  if (set.empty()) throw EmptyDatasetError("prediction set is empty");
  batch_size = std::max<std::size_t>(batch_size, 1);
  const auto order = identity_order(set.size());
  Predictions out;
  out.y_true = set.labels;
  out.y_pred.reserve(set.size());
  for (std::size_t b = 0; b < set.size(); b += batch_size) {
    const std::size_t e = std::min(set.size(), b + batch_size);
    // Softmax is monotone, so the arg-max of the logits is the arg-max of the probabilities
    // except where exp() rounds two distinct logits to the same probability; use the probabilities.
    const auto probs = softmax_rows(model.forward_logits(make_batch(set, order, b, e, mode), nn::Phase::infer));
    const std::size_t k = probs.dim(1);
    for (std::size_t i = 0; i < e - b; ++i) out.y_pred.push_back(argmax(probs.data() + i * k, k));
  }
  return out;
}

Predictions predict_labels(Model& model, const DatasetManifest& set, const PreprocessMode& mode,
                           std::size_t batch_size) {
  return predict_labels(model, load_image_set(set), mode, batch_size);
}

TrainedModel train(Model model, const ImageSet& train_set, const ImageSet& eval_set, const TrainConfig& config,
                   const PreprocessMode& mode, const AugmentSpec* augment, const EpochCallback& on_epoch) {
  config.validate();
  mode.validate();
  if (augment) augment->validate();
  if (train_set.empty()) throw EmptyDatasetError("training set is empty");
  if (eval_set.empty()) throw EmptyDatasetError("evaluation set is empty");
  if (model.config().num_classes != 10) throw ConfigError("model head must have ten classes");

  const auto start = std::chrono::steady_clock::now();
  TrainedModel out{std::move(model), {}, config, 0.0, std::nullopt};
  Model& net = out.model;
  Adam adam(config.adam());
  std::mt19937_64 rng(config.seed);
  auto order = identity_order(train_set.size());
  const auto params = net.parameters();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t e = std::min(order.size(), b + config.batch_size);
      const auto x = make_batch(train_set, order, b, e, mode, augment, config.seed ^ (epoch * 0x100000001B3ull));
      const auto logits = net.forward_logits(x, nn::Phase::train);
      Tensor grad;
      std::size_t correct = 0;
      const double loss = cross_entropy(logits, labels_for(train_set, order, b, e), &grad, &correct);
      if (!std::isfinite(loss)) {
        out.error = "non-finite loss in epoch " + std::to_string(epoch);
        break;
      }
      net.backward(grad);
      adam.step(params);
      loss_sum += loss;
      hits += correct;
    }
    net.release();
    if (out.error) break;
    const double n = static_cast<double>(train_set.size());
    const auto eval = evaluate_loss_acc(net, eval_set, mode, config.batch_size);
    if (!std::isfinite(eval.loss)) {
      out.error = "non-finite evaluation loss in epoch " + std::to_string(epoch);
      break;
    }
    out.history.train_loss.push_back(loss_sum / n);
    out.history.train_accuracy.push_back(static_cast<double>(hits) / n);
    out.history.test_loss.push_back(eval.loss);
    out.history.test_accuracy.push_back(eval.accuracy);
    if (on_epoch) on_epoch(epoch, out.history);
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

TrainedModel train(Model model, const DatasetManifest& train_set, const DatasetManifest& eval_set,
                   const TrainConfig& config, const PreprocessMode& mode, const AugmentSpec* augment,
                   const EpochCallback& on_epoch) {
  if (train_set.empty()) throw EmptyDatasetError("training set is empty");
  if (eval_set.empty()) throw EmptyDatasetError("evaluation set is empty");
  check_disjoint(train_set, eval_set);
  return train(std::move(model), load_image_set(train_set), load_image_set(eval_set), config, mode, augment,
               on_epoch);
}

}  // namespace numta
