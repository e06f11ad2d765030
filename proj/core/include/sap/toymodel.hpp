#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sap/attention.hpp"
#include "sap/cfilter.hpp"
#include "sap/mask.hpp"

namespace sap {

/// Shape of the toy multi-head self-attention encoder. d_model = heads * d_head.
struct ToyConfig {
  int layers = 2;
  int heads = 4;
  int d_head = 4;
  int max_positions = 64;
  std::vector<std::string> vocab;
  std::uint64_t seed = 42;

  int d_model() const { return heads * d_head; }
  void validate() const;
};

/// Row-major dense matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

struct ToyLayerWeights {
  Matrix query, key, value, output;  // d_model x d_model each
};

struct ToyWeights {
  Matrix embedding;   // vocab x d_model
  Matrix position;    // max_positions x d_model
  std::vector<ToyLayerWeights> layers;
  Matrix classifier;  // 2 x d_model
  std::array<double, 2> bias{};
};

/// Weights drawn from CounterRng(config.seed) in a fixed order.
ToyWeights make_toy_weights(const ToyConfig& config);

struct ForwardResult {
  AttentionRecord attention;
  std::array<double, 2> logits{};
  /// Per layer, the n x d_model concatenation of head outputs before the
  /// output projection. Masked heads own all-zero columns.
  std::vector<Matrix> head_outputs;
};

struct ToyExample {
  std::vector<std::string> tokens;
  int label = 0;
};

struct ToyTask {
  std::vector<ToyExample> examples;
};

/// Binary task: label 1 iff `trigger` occurs within `window` positions of
/// `target`. Labels alternate, so the set is exactly balanced for even sizes.
struct ToyTaskSpec {
  std::vector<std::string> vocab;
  std::string trigger;
  std::string target;
  int window = 2;
  int size = 64;
  int min_length = 4;
  int max_length = 10;
  std::uint64_t seed = 7;
};

ToyTask make_toy_task(const ToyTaskSpec& spec);

/// Residual encoder without FFN blocks: each layer adds the projected head
/// outputs to the stream. The classifier reads tanh of the position-mean of
/// everything the attention layers wrote, so a fully masked model falls back
/// to the bias.
class ToyModel {
 public:
  explicit ToyModel(ToyConfig config);

  const ToyConfig& config() const { return config_; }
  const ToyWeights& weights() const { return weights_; }

  /// Throws kInvalidArgument for unknown tokens, oversize input or a mask of
  /// the wrong shape. The alignment defaults to one word per token.
  ForwardResult forward(std::span<const std::string> tokens, const PruneMask& mask,
                        const std::string& sentence_id = "toy",
                        std::optional<WordAlignment> alignment = std::nullopt) const;

  int predict(std::span<const std::string> tokens, const PruneMask& mask) const;

  /// Accuracy over the task.
  double evaluate(const ToyTask& task, const PruneMask& mask) const;

 private:
  ToyConfig config_;
  ToyWeights weights_;
  std::map<std::string, int> token_ids_;
};

/// EvalOracle backed by ToyModel::evaluate; safe for concurrent use.
class ToyModelOracle final : public EvalOracle {
 public:
  ToyModelOracle(const ToyModel& model, const ToyTask& task) : model_(model), task_(task) {}

  double evaluate(const PruneMask& mask) override { return model_.evaluate(task_, mask); }
  bool concurrent() const override { return true; }

 private:
  const ToyModel& model_;
  const ToyTask& task_;
};

}  // namespace sap
