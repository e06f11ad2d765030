#include "sap/toymodel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sap/errors.hpp"
#include "sap/rng.hpp"

namespace sap {

void ToyConfig::validate() const {
  if (layers < 1 || heads < 1 || d_head < 1 || max_positions < 1) {
    throw Error(ErrorCode::kInvalidArgument, "toy model dimensions must all be >= 1");
  }
  if (vocab.empty()) throw Error(ErrorCode::kInvalidArgument, "toy model vocabulary is empty");
  std::set<std::string> unique(vocab.begin(), vocab.end());
  if (unique.size() != vocab.size()) throw Error(ErrorCode::kInvalidArgument, "duplicate vocabulary entry");
}

namespace {

Matrix random_matrix(CounterRng& rng, int rows, int cols, double scale) {
  Matrix m{rows, cols, std::vector<double>(static_cast<std::size_t>(rows) * cols)};
  for (double& v : m.data) v = rng.uniform(-scale, scale);
  return m;
}

// x (n x d) times w (d x d).
Matrix matmul(const Matrix& x, const Matrix& w) {
  Matrix out{x.rows, w.cols, std::vector<double>(static_cast<std::size_t>(x.rows) * w.cols, 0.0)};
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      const double a = x(i, k);
      for (int j = 0; j < w.cols; ++j) out(i, j) += a * w(k, j);
    }
  return out;
}

}  // namespace

ToyWeights make_toy_weights(const ToyConfig& config) {
  config.validate();
  const int d = config.d_model();
  const double unit = std::sqrt(3.0 / d);
  CounterRng rng(config.seed);
  ToyWeights w;
  w.embedding = random_matrix(rng, static_cast<int>(config.vocab.size()), d, 1.0);
  w.position = random_matrix(rng, config.max_positions, d, 0.5);
  for (int l = 0; l < config.layers; ++l) {
    ToyLayerWeights layer;
    // Larger query/key gain gives peaked, head-specific attention patterns.
    layer.query = random_matrix(rng, d, d, 2.0 * unit);
    layer.key = random_matrix(rng, d, d, 2.0 * unit);
    layer.value = random_matrix(rng, d, d, unit);
    layer.output = random_matrix(rng, d, d, unit);
    w.layers.push_back(std::move(layer));
  }
  w.classifier = random_matrix(rng, 2, d, 4.0 * unit);
  w.bias = {rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)};
  return w;
}

ToyModel::ToyModel(ToyConfig config) : config_(std::move(config)), weights_(make_toy_weights(config_)) {
  for (std::size_t i = 0; i < config_.vocab.size(); ++i) token_ids_.emplace(config_.vocab[i], static_cast<int>(i));
}

ForwardResult ToyModel::forward(std::span<const std::string> tokens, const PruneMask& mask,
                                const std::string& sentence_id,
                                std::optional<WordAlignment> alignment) const {
  const int n = static_cast<int>(tokens.size());
  const int d = config_.d_model();
  const int dh = config_.d_head;
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "empty input");
  if (n > config_.max_positions) throw Error(ErrorCode::kInvalidArgument, "input longer than max_positions");
  if (mask.layers() != config_.layers || mask.heads_per_layer() != config_.heads) {
    throw Error(ErrorCode::kShapeMismatch, "mask shape does not match the toy model");
  }

  Matrix x{n, d, std::vector<double>(static_cast<std::size_t>(n) * d)};
  for (int i = 0; i < n; ++i) {
    const auto it = token_ids_.find(tokens[static_cast<std::size_t>(i)]);
    if (it == token_ids_.end()) {
      throw Error(ErrorCode::kInvalidArgument, "token '" + tokens[static_cast<std::size_t>(i)] + "' not in vocabulary");
    }
    for (int j = 0; j < d; ++j) x(i, j) = weights_.embedding(it->second, j) + weights_.position(i, j);
  }
  Matrix written{n, d, std::vector<double>(static_cast<std::size_t>(n) * d, 0.0)};

  const std::size_t nn = static_cast<std::size_t>(n) * n;
  std::vector<float> attention(static_cast<std::size_t>(config_.layers) * config_.heads * nn, 0.0f);
  std::vector<HeadId> masked;
  std::vector<Matrix> head_outputs;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<double> scores(static_cast<std::size_t>(n));

  for (int l = 0; l < config_.layers; ++l) {
    const ToyLayerWeights& lw = weights_.layers[static_cast<std::size_t>(l)];
    const Matrix q = matmul(x, lw.query);
    const Matrix k = matmul(x, lw.key);
    const Matrix v = matmul(x, lw.value);
    Matrix concat{n, d, std::vector<double>(static_cast<std::size_t>(n) * d, 0.0)};
    for (int h = 0; h < config_.heads; ++h) {
      if (mask.contains({l, h})) {
        masked.push_back({l, h});
        continue;
      }
      float* map = attention.data() + (static_cast<std::size_t>(l) * config_.heads + h) * nn;
      const int off = h * dh;
      for (int i = 0; i < n; ++i) {
        double peak = -INFINITY;
        for (int j = 0; j < n; ++j) {
          double s = 0.0;
          for (int c = 0; c < dh; ++c) s += q(i, off + c) * k(j, off + c);
          scores[static_cast<std::size_t>(j)] = s * scale;
          peak = std::max(peak, scores[static_cast<std::size_t>(j)]);
        }
        double total = 0.0;
        for (double& s : scores) {
          s = std::exp(s - peak);
          total += s;
        }
        for (int j = 0; j < n; ++j) {
          const double p = scores[static_cast<std::size_t>(j)] / total;
          map[static_cast<std::size_t>(i) * n + j] = static_cast<float>(p);
          for (int c = 0; c < dh; ++c) concat(i, off + c) += p * v(j, off + c);
        }
      }
    }
    const Matrix delta = matmul(concat, lw.output);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
      x.data[i] += delta.data[i];
      written.data[i] += delta.data[i];
    }
    head_outputs.push_back(std::move(concat));
  }

  std::vector<double> hidden(static_cast<std::size_t>(d), 0.0);
  for (int j = 0; j < d; ++j) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += written(i, j);
    hidden[static_cast<std::size_t>(j)] = std::tanh(sum / n);
  }
  std::array<double, 2> logits = weights_.bias;
  for (int c = 0; c < 2; ++c)
    for (int j = 0; j < d; ++j) logits[static_cast<std::size_t>(c)] += weights_.classifier(c, j) * hidden[static_cast<std::size_t>(j)];

  WordAlignment align = alignment ? std::move(*alignment) : WordAlignment::identity(n);
  return ForwardResult{AttentionRecord(sentence_id, config_.layers, config_.heads, n, std::move(attention),
                                       std::move(align), std::move(masked)),
                       logits, std::move(head_outputs)};
}

int ToyModel::predict(std::span<const std::string> tokens, const PruneMask& mask) const {
  const auto result = forward(tokens, mask);
  return result.logits[1] > result.logits[0] ? 1 : 0;
}

double ToyModel::evaluate(const ToyTask& task, const PruneMask& mask) const {
  if (task.examples.empty()) throw Error(ErrorCode::kInvalidArgument, "empty toy task");
  std::size_t correct = 0;
  for (const ToyExample& ex : task.examples) {
    if (predict(ex.tokens, mask) == ex.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(task.examples.size());
}

ToyTask make_toy_task(const ToyTaskSpec& spec) {
  if (spec.window < 1 || spec.min_length < spec.window + 2 || spec.max_length < spec.min_length ||
      spec.size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid toy task specification");
  }
  std::vector<std::string> filler;
  for (const auto& t : spec.vocab)
    if (t != spec.trigger && t != spec.target) filler.push_back(t);
  if (filler.empty()) throw Error(ErrorCode::kInvalidArgument, "toy task needs filler tokens");

  CounterRng rng(spec.seed, /*stream=*/1);
  ToyTask task;
  task.examples.reserve(static_cast<std::size_t>(spec.size));
  const auto pick = [&](int n) { return static_cast<int>(rng.below(static_cast<std::uint64_t>(n))); };
  for (int i = 0; i < spec.size; ++i) {
    const int label = i % 2;
    const int len = spec.min_length + pick(spec.max_length - spec.min_length + 1);
    ToyExample ex;
    ex.label = label;
    ex.tokens.resize(static_cast<std::size_t>(len));
    for (auto& t : ex.tokens) t = filler[static_cast<std::size_t>(pick(static_cast<int>(filler.size())))];
    const int target = pick(len);
    if (label == 1) {
      int trigger = target;
      while (trigger == target || trigger < 0 || trigger >= len) {
        const int offset = 1 + pick(spec.window);
        trigger = target + (pick(2) == 0 ? -offset : offset);
      }
      ex.tokens[static_cast<std::size_t>(target)] = spec.target;
      ex.tokens[static_cast<std::size_t>(trigger)] = spec.trigger;
    } else {
      // Negative: target alone, trigger alone, or both too far apart.
      std::vector<int> far;
      for (int p = 0; p < len; ++p)
        if (std::abs(p - target) > spec.window) far.push_back(p);
      const int variant = pick(far.empty() ? 2 : 3);
      if (variant == 0) {
        ex.tokens[static_cast<std::size_t>(target)] = spec.target;
      } else if (variant == 1) {
        ex.tokens[static_cast<std::size_t>(target)] = spec.trigger;
      } else {
        ex.tokens[static_cast<std::size_t>(target)] = spec.target;
        ex.tokens[static_cast<std::size_t>(far[static_cast<std::size_t>(pick(static_cast<int>(far.size())))])] =
            spec.trigger;
      }
    }
    task.examples.push_back(std::move(ex));
  }
  return task;
}

}  // namespace sap
