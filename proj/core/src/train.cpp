#include "xpl/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <span>

#include "xpl/csv.hpp"
#include "xpl/errors.hpp"
#include "xpl/parallel.hpp"
#include "xpl/rng.hpp"

namespace xpl {

std::string_view to_string(Loss l) {
  return l == Loss::softmax_cross_entropy ? "softmax_cross_entropy" : "squared_error";
}

Loss parse_loss(std::string_view name) {
  if (name == "softmax_cross_entropy" || name == "cross_entropy") return Loss::softmax_cross_entropy;
  if (name == "squared_error") return Loss::squared_error;
  throw InvalidSpecError("unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(ProbeKind k) {
  return k == ProbeKind::datapoint_interpolation ? "datapoint_interpolation" : "random_points";
}

ProbeKind parse_probe_kind(std::string_view name) {
  if (name == "datapoint_interpolation") return ProbeKind::datapoint_interpolation;
  if (name == "random_points") return ProbeKind::random_points;
  throw InvalidSpecError("unknown probe kind '" + std::string(name) + "'");
}

void TrainConfig::validate(std::size_t num_layers) const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw InvalidSpecError("learning_rate must be finite and non-negative");
  if (batch_size == 0) throw InvalidSpecError("batch_size must be positive");
  if (!trainable.empty()) {
    if (trainable.size() != num_layers) throw InvalidSpecError("trainable mask needs one flag per weight layer");
    if (std::none_of(trainable.begin(), trainable.end(), [](bool b) { return b; }))
      throw InvalidSpecError("at least one layer must be trainable");
  }
}

namespace {

struct BatchPass {
  std::vector<Matrix> z;  // z[d]: fan_in(d) x B
  std::vector<Matrix> h;  // h[d]: fan_out(d) x B
};

BatchPass batch_forward(std::span<const Layer> layers, Activation act, const Matrix& inputs) {
  BatchPass p;
  p.z.push_back(inputs.transpose());
  for (std::size_t d = 0; d < layers.size(); ++d) {
    Matrix h = layers[d].weights * p.z.back();
    h.colwise() += layers[d].bias;
    if (d + 1 < layers.size()) p.z.push_back(h.unaryExpr([act](double v) { return activate(act, v); }));
    p.h.push_back(std::move(h));
  }
  return p;
}

/// Per-example losses and dL/dy for the mean loss.
double output_grad(const Matrix& y, const Matrix& targets, Loss loss, Matrix& dy) {
  const auto b = static_cast<double>(y.cols());
  dy.resize(y.rows(), y.cols());
  double total = 0.0;
  if (loss == Loss::squared_error) {
    dy = y - targets.transpose();
    total = 0.5 * dy.squaredNorm();
  } else {
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      const double mx = y.col(j).maxCoeff();
      Vector e = (y.col(j).array() - mx).exp();
      const double s = e.sum();
      const double lse = mx + std::log(s);
      for (Eigen::Index i = 0; i < y.rows(); ++i) {
        const double t = targets(j, i);
        if (t != 0.0) total -= t * (y(i, j) - lse);
      }
      dy.col(j) = e / s - targets.row(j).transpose();
    }
  }
  dy /= b;
  return total / b;
}

Matrix one_hot(const std::vector<int>& labels, std::size_t classes) {
  Matrix t = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
      throw DimensionError("label outside the output range");
    t(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return t;
}

Gradients grads_impl(std::span<const Layer> layers, Activation act, const Matrix& inputs, const Matrix& targets,
                     Loss loss, const std::vector<bool>& trainable, std::size_t batch_index = 0) {
  if (inputs.rows() == 0) throw DimensionError("empty batch");
  if (inputs.cols() != layers.front().weights.cols()) throw DimensionError("batch width does not match input");
  if (targets.rows() != inputs.rows() || targets.cols() != layers.back().weights.rows())
    throw DimensionError("targets do not match batch and output sizes");
  const BatchPass p = batch_forward(layers, act, inputs);
  Gradients g;
  Matrix delta;
  g.loss = output_grad(p.h.back(), targets, loss, delta);
  if (!std::isfinite(g.loss)) throw NonFiniteLossError("non-finite loss", batch_index);
  g.layers.resize(layers.size());
  for (std::size_t d = layers.size(); d-- > 0;) {
    const bool on = trainable.empty() || trainable[d];
    if (on) {
      g.layers[d].weights = delta * p.z[d].transpose();
      g.layers[d].bias = delta.rowwise().sum();
    } else {
      g.layers[d].weights = Matrix::Zero(layers[d].weights.rows(), layers[d].weights.cols());
      g.layers[d].bias = Vector::Zero(layers[d].bias.size());
    }
    if (d == 0) break;
    Matrix back = layers[d].weights.transpose() * delta;
    delta = back.cwiseProduct(p.h[d - 1].unaryExpr([act](double v) { return activate_derivative(act, v); }));
  }
  return g;
}

std::size_t predict(const Vector& y) {
  if (y.size() == 1) return y(0) > 0.0 ? 1 : 0;
  Eigen::Index i;
  y.maxCoeff(&i);
  return static_cast<std::size_t>(i);
}

double accuracy_impl(std::span<const Layer> layers, Activation act, const Dataset& ds) {
  if (ds.size() == 0) return 0.0;
  const BatchPass p = batch_forward(layers, act, ds.inputs);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    ok += predict(p.h.back().col(static_cast<Eigen::Index>(i))) == static_cast<std::size_t>(ds.labels[i]);
  return static_cast<double>(ok) / static_cast<double>(ds.size());
}

Matrix targets_for(const Network& net, const std::vector<int>& labels) {
  const std::size_t out = net.spec().output_dim;
  if (out == 1) {
    Matrix t(static_cast<Eigen::Index>(labels.size()), 1);
    for (std::size_t i = 0; i < labels.size(); ++i) t(static_cast<Eigen::Index>(i), 0) = labels[i] ? 1.0 : -1.0;
    return t;
  }
  return one_hot(labels, out);
}

}  // namespace

Gradients backprop_grads(const Network& net, const Matrix& inputs, const Matrix& targets, Loss loss,
                         const std::vector<bool>& trainable) {
  if (!trainable.empty() && trainable.size() != net.num_layers())
    throw DimensionError("trainable mask needs one flag per weight layer");
  return grads_impl(net.layers(), net.activation(), inputs, targets, loss, trainable);
}

Gradients backprop_grads(const Network& net, const Matrix& inputs, const std::vector<int>& labels, Loss loss,
                         const std::vector<bool>& trainable) {
  if (static_cast<std::size_t>(inputs.rows()) != labels.size()) throw DimensionError("labels do not match batch");
  return backprop_grads(net, inputs, targets_for(net, labels), loss, trainable);
}

double mean_loss(const Network& net, const Matrix& inputs, const Matrix& targets, Loss loss) {
  const BatchPass p = batch_forward(net.layers(), net.activation(), inputs);
  Matrix dy;
  return output_grad(p.h.back(), targets, loss, dy);
}

double accuracy(const Network& net, const Dataset& ds) { return accuracy_impl(net.layers(), net.activation(), ds); }

double weight_scale(const Layer& layer) {
  const auto& w = layer.weights;
  const double n = static_cast<double>(w.size());
  if (n < 2) return 0.0;
  const double mu = w.mean();
  const double var = (w.array() - mu).square().sum() / (n - 1.0);
  return std::sqrt(var) * std::sqrt(static_cast<double>(w.cols()));
}

TrainResult sgd_train(const Network& net, const Dataset& train, const Dataset& test, const TrainConfig& config) {
  config.validate(net.num_layers());
  if (train.size() == 0) throw DomainError("training set is empty");
  if (train.dim() != net.spec().input_dim) throw DimensionError("dataset dimension does not match network input");
  std::vector<Layer> layers(net.layers().begin(), net.layers().end());
  const Activation act = net.activation();
  const Matrix all_targets = targets_for(net, train.labels);
  TrainHistory hist;

  auto evaluate_now = [&](std::size_t step, double loss) {
    EvalRecord r;
    r.step = step;
    r.train_acc = accuracy_impl(layers, act, train);
    r.test_acc = accuracy_impl(layers, act, test);
    r.loss = loss;
    for (const auto& l : layers) r.weight_scale.push_back(weight_scale(l));
    if (config.length_probe) {
      const Network snap(net.spec(), layers);
      r.traj_len = measure_lengths(snap, *config.length_probe, LengthMethod::automatic).lengths;
    }
    hist.records.push_back(std::move(r));
  };

  const std::size_t n = train.size();
  const std::size_t batches = (n + config.batch_size - 1) / config.batch_size;
  const std::size_t every = config.eval_every ? config.eval_every : batches;
  std::vector<std::size_t> order(n);
  const CounterRng shuffle_root = CounterRng(config.seed).derive(0x5u);
  std::size_t step = 0;
  double last_loss = std::nan("");
  evaluate_now(0, last_loss);
  Matrix xb, tb;
  for (std::size_t epoch = 0; epoch < config.epochs && !hist.diverged; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    RngStream rng(shuffle_root.derive(epoch));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t lo = b * config.batch_size, hi = std::min(n, lo + config.batch_size);
      xb.resize(static_cast<Eigen::Index>(hi - lo), train.inputs.cols());
      tb.resize(static_cast<Eigen::Index>(hi - lo), all_targets.cols());
      for (std::size_t i = lo; i < hi; ++i) {
        xb.row(static_cast<Eigen::Index>(i - lo)) = train.inputs.row(static_cast<Eigen::Index>(order[i]));
        tb.row(static_cast<Eigen::Index>(i - lo)) = all_targets.row(static_cast<Eigen::Index>(order[i]));
      }
      Gradients g;
      try {
        g = grads_impl(layers, act, xb, tb, config.loss, config.trainable, step);
      } catch (const NonFiniteLossError& e) {
        hist.diverged = true;
        hist.failed_batch = e.batch_index();
        hist.error = e.what();
        break;
      }
      for (std::size_t d = 0; d < layers.size(); ++d) {
        if (!config.trainable.empty() && !config.trainable[d]) continue;
        layers[d].weights -= config.learning_rate * g.layers[d].weights;
        layers[d].bias -= config.learning_rate * g.layers[d].bias;
      }
      ++step;
      last_loss = g.loss;
      if (step % every == 0) evaluate_now(step, last_loss);
    }
  }
  if (!hist.diverged && hist.records.back().step != step) evaluate_now(step, last_loss);
  return {Network(net.spec(), std::move(layers)), std::move(hist)};
}

void write_history_csv(std::ostream& os, const TrainHistory& h) {
  os << "step,train_acc,test_acc,layer,weight_scale,traj_len\n";
  for (const auto& r : h.records)
    for (std::size_t d = 0; d < r.weight_scale.size(); ++d) {
      // traj_len[d + 1] is the image after weight layer d; the output layer has none.
      const double len = d + 1 < r.traj_len.size() ? r.traj_len[d + 1] : std::nan("");
      csv_row(os, r.step, r.train_acc, r.test_acc, d, r.weight_scale[d], len);
    }
}

NoiseTable layer_noise_robustness(const Network& net, const Dataset& test, const std::vector<double>& magnitudes,
                                  std::size_t num_seeds, std::uint64_t seed) {
  if (num_seeds == 0) throw DomainError("num_seeds must be positive");
  for (double m : magnitudes)
    if (!(m >= 0.0)) throw DomainError("noise magnitudes must be non-negative");
  NoiseTable t;
  t.magnitudes = magnitudes;
  t.baseline = accuracy(net, test);
  const std::size_t L = net.num_layers(), M = magnitudes.size();
  t.accuracy.assign(L, std::vector<double>(M, 0.0));
  std::vector<double> acc(L * M * num_seeds, 0.0);
  const CounterRng root = CounterRng(seed).derive(0x401eULL);
  parallel_for(acc.size(), [&](std::size_t idx) {
    const std::size_t d = idx / (M * num_seeds), mi = (idx / num_seeds) % M, s = idx % num_seeds;
    std::vector<Layer> layers(net.layers().begin(), net.layers().end());
    Matrix& w = layers[d].weights;
    const double n = static_cast<double>(w.size());
    const double sd = n > 1 ? std::sqrt((w.array() - w.mean()).square().sum() / (n - 1.0)) : 0.0;
    const double amp = magnitudes[mi] * sd;
    if (amp > 0.0) {
      const CounterRng r = root.derive({d, mi, s});
      for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j)
          w(i, j) += amp * r.normal(static_cast<std::uint64_t>(i * w.cols() + j));
    }
    // Correct counts are integers, so averaging them is exact.
    acc[idx] = std::round(accuracy_impl(layers, net.activation(), test) * static_cast<double>(test.size()));
  });
  for (std::size_t d = 0; d < L; ++d)
    for (std::size_t mi = 0; mi < M; ++mi) {
      const auto first = acc.begin() + static_cast<std::ptrdiff_t>((d * M + mi) * num_seeds);
      std::vector<double> v(first, first + static_cast<std::ptrdiff_t>(num_seeds));
      t.accuracy[d][mi] = std::accumulate(v.begin(), v.end(), 0.0) /
                          (static_cast<double>(num_seeds) * static_cast<double>(test.size()));
    }
  return t;
}

std::vector<SingleLayerRow> train_single_layer_experiment(const NetworkSpec& spec, const Dataset& train,
                                                          const Dataset& test, const TrainConfig& config) {
  if (spec.depth() < 3) throw DomainError("single-layer experiment needs n >= 3");
  const Network init = init_network(spec);
  const std::size_t L = init.num_layers();
  std::vector<SingleLayerRow> rows(L);
  parallel_for(L, [&](std::size_t r) {
    TrainConfig c = config;
    // Row r < L - 1 trains weight layer r + 1; the last row trains everything.
    const bool all = r + 1 == L;
    c.trainable.assign(L, all);
    if (!all) c.trainable[r + 1] = true;
    const TrainResult res = sgd_train(init, train, test, c);
    rows[r] = {all ? -1 : static_cast<int>(r + 1), res.history.records.back().train_acc,
               res.history.records.back().test_acc, res.history.diverged};
  });
  return rows;
}

Trajectory make_length_probe(const Dataset& test, ProbeKind kind, std::uint64_t seed) {
  if (test.size() < 2) throw DomainError("length probe needs at least two datapoints");
  if (kind == ProbeKind::datapoint_interpolation) {
    std::size_t j = 1;
    while (j < test.size() && test.labels[j] == test.labels[0]) ++j;
    if (j == test.size()) j = 1;
    return make_trajectory(TrajectoryKind::circular_arc, test.input(0), test.input(j));
  }
  const double r = test.inputs.rowwise().norm().mean();
  const CounterRng rng = CounterRng(seed).derive(0x9b0beULL);
  const auto m = static_cast<Eigen::Index>(test.dim());
  Vector a(m), b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i) = rng.normal(static_cast<std::uint64_t>(i));
    b(i) = rng.normal(static_cast<std::uint64_t>(m + i));
  }
  return make_trajectory(TrajectoryKind::circular_arc, a * (r / a.norm()), b * (r / b.norm()));
}

std::vector<LengthSnapshot> trajectory_length_during_training(const NetworkSpec& spec, const Dataset& train,
                                                              const Dataset& test, ProbeKind kind,
                                                              const TrainConfig& config) {
  TrainConfig c = config;
  c.length_probe = make_length_probe(test, kind, config.seed);
  const TrainResult res = sgd_train(init_network(spec), train, test, c);
  std::vector<LengthSnapshot> out;
  for (const auto& r : res.history.records)
    out.push_back({r.step, r.traj_len, r.weight_scale});
  return out;
}

}  // namespace xpl
