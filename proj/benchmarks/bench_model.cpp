#include <benchmark/benchmark.h>

#include "par/model.hpp"
#include "par/objectives.hpp"
#include "par/synth.hpp"

using namespace par;

namespace {

struct Setup {
  SynthGraph graph;
  ModelParams params;
};

Setup make(std::size_t hidden) {
  SynthOptions so;
  so.seed = 1;
  Setup s{synth_hin(so), {}};
  ModelOptions mo;
  mo.d_in = s.graph.hin.feature_dim();
  mo.hidden = hidden;
  s.params = init_params(mo, 1);
  return s;
}

void BM_Encode(benchmark::State& state) {
  const auto s = make(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(encode(s.graph.hin, s.params).x_final.data());
}
BENCHMARK(BM_Encode)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

// Forward through the tape, echo loss over every node, and the backward pass.
void BM_EncodeBackward(benchmark::State& state) {
  const auto s = make(static_cast<std::size_t>(state.range(0)));
  const auto hood = build_neighborhoods(s.graph.hin, s.params.options.variant);
  for (auto _ : state) {
    num::Tape tape;
    const auto bound = graph::bind(tape, s.params, true);
    const auto x = graph::encode(tape.constant(s.graph.hin.features()), hood, bound, s.params.options).x_final;
    const auto loss = echo_loss(x, s.graph.hin, EchoOptions{});
    tape.backward(loss);
    benchmark::DoNotOptimize(loss.scalar());
  }
}
BENCHMARK(BM_EncodeBackward)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
