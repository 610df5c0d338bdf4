#include <benchmark/benchmark.h>

#include "scss/covariance.hpp"
#include "scss/estimators.hpp"
#include "scss/mixture.hpp"
#include "scss/rng.hpp"
#include "scss/signals.hpp"

namespace {

using namespace scss;

QpskSpec gaussian_soi() {
  QpskSpec q;
  q.alphabet = Alphabet::GaussianIID;
  return q;
}

OfdmSpec gaussian_ofdm() {
  OfdmSpec o;
  o.alphabet = Alphabet::GaussianIID;
  return o;
}

void BM_AnalyticBank(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_analytic_bank(QpskSpec{}, OfdmSpec{}, L, 0.0, 20.0));
  }
}
BENCHMARK(BM_AnalyticBank)->Arg(80)->Arg(160)->Arg(320)->Unit(benchmark::kMillisecond);

void BM_EstimateBatch(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  constexpr int kColumns = 64;
  const QpskSpec q = gaussian_soi();
  const OfdmSpec o = gaussian_ofdm();
  const CovBank bank = build_analytic_bank(q, o, L, 0.0, 20.0);
  const PulseShape pulse = rrc_taps(q.rolloff, q.span_symbols, q.oversampling);
  const MixtureBatch batch = draw_mixture_batch(q, pulse, o, L, 0.0, 20.0, 0, kColumns, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_batch(bank, batch.y));
  state.SetItemsProcessed(state.iterations() * kColumns);
}
BENCHMARK(BM_EstimateBatch)->Arg(80)->Arg(320)->Unit(benchmark::kMillisecond);

void BM_ShiftPosterior(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const QpskSpec q = gaussian_soi();
  const OfdmSpec o = gaussian_ofdm();
  const CovBank bank = build_analytic_bank(q, o, L, 0.0, 20.0);
  const PulseShape pulse = rrc_taps(q.rolloff, q.span_symbols, q.oversampling);
  const MixtureBatch batch = draw_mixture_batch(q, pulse, o, L, 0.0, 20.0, 0, 1, 2, 0);
  const CVector y = batch.y.col(0);
  for (auto _ : state) benchmark::DoNotOptimize(shift_posterior(y, bank));
}
BENCHMARK(BM_ShiftPosterior)->Arg(80)->Arg(320)->Unit(benchmark::kMicrosecond);

void BM_SeparateLong(benchmark::State& state) {
  const auto method = static_cast<Method>(state.range(0));
  const QpskSpec q;
  const OfdmSpec o;
  const CovBank bank = build_analytic_bank(q, o, 320, 0.0, kInf);
  MixtureParams p;
  p.n_samples = 10240;
  p.snr_db = kInf;
  Rng rng = make_rng(3, 0);
  const MixtureRecord rec =
      gen_record(q, rrc_taps(q.rolloff, q.span_symbols, q.oversampling), o, p, rng);
  LongOptions opt;
  opt.method = method;
  opt.sync_window = 640;
  for (auto _ : state) benchmark::DoNotOptimize(separate_long(rec.y, bank, opt));
  state.SetLabel(to_string(method));
}
BENCHMARK(BM_SeparateLong)
    ->Arg(static_cast<int>(Method::LMMSE))
    ->Arg(static_cast<int>(Method::MapQlmmse))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
