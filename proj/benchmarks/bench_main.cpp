#include <benchmark/benchmark.h>

#include "xpl/netcore.hpp"
#include "xpl/regions.hpp"
#include "xpl/sweep.hpp"
#include "xpl/train.hpp"
#include "xpl/trajectory.hpp"

using namespace xpl;

static void BM_Forward(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Network net = init_network(NetworkSpec::uniform(k, k, 8, Activation::hard_tanh, 4.0, 1.0, 1));
  const Vector x = Vector::Ones(static_cast<Eigen::Index>(k));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(net, x));
}
BENCHMARK(BM_Forward)->Arg(16)->Arg(64)->Arg(256);

static void BM_ExactSweepLine(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Network net = init_network(NetworkSpec::uniform(10, 64, n, Activation::hard_tanh, 16.0, 1.0, 2));
  const Trajectory traj = random_trajectory(TrajectoryKind::line, 10, 3);
  for (auto _ : state) benchmark::DoNotOptimize(exact_transition_sweep(net, traj).num_transitions);
}
BENCHMARK(BM_ExactSweepLine)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_ExactSweepArc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Network net = init_network(NetworkSpec::uniform(10, 64, n, Activation::hard_tanh, 16.0, 1.0, 2));
  const Trajectory traj = random_trajectory(TrajectoryKind::circular_arc, 10, 3);
  for (auto _ : state) benchmark::DoNotOptimize(exact_transition_sweep(net, traj).num_transitions);
}
BENCHMARK(BM_ExactSweepArc)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_Decompose(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Network net = init_network(NetworkSpec::uniform(2, k, 3, Activation::relu, 2.0, 0.5, 1));
  for (auto _ : state) benchmark::DoNotOptimize(decompose_input_plane(net).cells.size());
}
BENCHMARK(BM_Decompose)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_PolylineLength(benchmark::State& state) {
  const Network net = init_network(NetworkSpec::uniform(10, 64, 4, Activation::tanh, 4.0, 1.0, 4));
  const Trajectory traj = random_trajectory(TrajectoryKind::circular_arc, 10, 5);
  for (auto _ : state)
    benchmark::DoNotOptimize(measure_lengths(net, traj, LengthMethod::polyline, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_PolylineLength)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_Backprop(benchmark::State& state) {
  const Network net = init_network(NetworkSpec::uniform(20, 64, 6, Activation::hard_tanh, 2.0, 0.1, 6, 10));
  Matrix x = Matrix::Random(32, 20);
  std::vector<int> y(32);
  for (int i = 0; i < 32; ++i) y[static_cast<std::size_t>(i)] = i % 10;
  for (auto _ : state) benchmark::DoNotOptimize(backprop_grads(net, x, y, Loss::softmax_cross_entropy).loss);
}
BENCHMARK(BM_Backprop);
BENCHMARK_MAIN();
