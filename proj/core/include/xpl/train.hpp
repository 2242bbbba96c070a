#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "xpl/data.hpp"
#include "xpl/netcore.hpp"
#include "xpl/trajectory.hpp"

namespace xpl {

enum class Loss { softmax_cross_entropy, squared_error };

std::string_view to_string(Loss l);
Loss parse_loss(std::string_view name);

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  /// One flag per weight layer (hidden layers then output); empty = all.
  std::vector<bool> trainable;
  Loss loss = Loss::softmax_cross_entropy;
  /// Evaluate every this many steps; 0 = once per epoch.
  std::size_t eval_every = 0;
  std::uint64_t seed = 0;
  /// When set, per-layer image lengths of this curve are recorded at every
  /// evaluation.
  std::optional<Trajectory> length_probe;

  void validate(std::size_t num_layers) const;
};

/// Gradients of the mean batch loss, one block per weight layer.
struct Gradients {
  std::vector<Layer> layers;
  double loss = 0.0;
};

/// Targets are one-hot rows of the labels (+-1 for a single output unit).
/// Frozen layers get zero blocks. Throws NonFiniteLossError.
Gradients backprop_grads(const Network& net, const Matrix& inputs, const std::vector<int>& labels, Loss loss,
                         const std::vector<bool>& trainable = {});
/// Explicit targets (B x output_dim); for cross entropy each row must be a
/// probability vector.
Gradients backprop_grads(const Network& net, const Matrix& inputs, const Matrix& targets, Loss loss,
                         const std::vector<bool>& trainable = {});

double mean_loss(const Network& net, const Matrix& inputs, const Matrix& targets, Loss loss);
/// Argmax of the outputs (sign of output 0 for a single output unit).
double accuracy(const Network& net, const Dataset& ds);

/// Empirical std of the entries of W^(d) times sqrt(fan_in).
double weight_scale(const Layer& layer);

struct EvalRecord {
  std::size_t step = 0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double loss = 0.0;
  /// Per weight layer.
  std::vector<double> weight_scale;
  /// Per layer image length of the probe: [input, hidden 1..n]; empty without a probe.
  std::vector<double> traj_len;
};

struct TrainHistory {
  std::vector<EvalRecord> records;
  bool diverged = false;
  std::string error;
  std::size_t failed_batch = 0;
};

struct TrainResult {
  Network net;
  TrainHistory history;
};

/// Plain minibatch SGD. Shuffling is keyed by (seed, epoch). A non-finite
/// loss stops training and returns the history so far with diverged set.
TrainResult sgd_train(const Network& net, const Dataset& train, const Dataset& test, const TrainConfig& config);

/// step,train_acc,test_acc,layer,weight_scale,traj_len
void write_history_csv(std::ostream& os, const TrainHistory& h);

struct NoiseTable {
  double baseline = 0.0;
  std::vector<double> magnitudes;
  /// accuracy[layer][magnitude], mean over noise draws.
  std::vector<std::vector<double>> accuracy;
};

/// Adds N(0, (mag * std(W^(d)))^2) noise to the weights of one layer at a
/// time and measures test accuracy. net is not modified.
NoiseTable layer_noise_robustness(const Network& net, const Dataset& test, const std::vector<double>& magnitudes,
                                  std::size_t num_seeds, std::uint64_t seed);

struct SingleLayerRow {
  /// Weight layer index; -1 for the all-layers reference row.
  int layer = 0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  bool diverged = false;
};

/// Trains exactly one weight layer d = 1..n (the output layer is row n) from
/// a shared initialization, plus a reference row with every layer trainable.
std::vector<SingleLayerRow> train_single_layer_experiment(const NetworkSpec& spec, const Dataset& train,
                                                          const Dataset& test, const TrainConfig& config);

enum class ProbeKind { datapoint_interpolation, random_points };

std::string_view to_string(ProbeKind k);
ProbeKind parse_probe_kind(std::string_view name);

/// Circular arc between two test points of different classes, or between
/// two Gaussian points with the mean norm of the test inputs.
Trajectory make_length_probe(const Dataset& test, ProbeKind kind, std::uint64_t seed);

struct LengthSnapshot {
  std::size_t step = 0;
  /// Image lengths at the input and every hidden layer (no output layer).
  std::vector<double> lengths;
  std::vector<double> weight_scale;
};

std::vector<LengthSnapshot> trajectory_length_during_training(const NetworkSpec& spec, const Dataset& train,
                                                              const Dataset& test, ProbeKind kind,
                                                              const TrainConfig& config);

}  // namespace xpl
