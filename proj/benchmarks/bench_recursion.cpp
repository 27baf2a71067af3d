#include <benchmark/benchmark.h>

#include "toprec/kdv.hpp"
#include "toprec/gue.hpp"

using namespace toprec;

namespace {

// Every stable (g, n) up to the level, from a cold memo.
void run_levels(const AiryStructure& proto, int level, Method m) {
  AiryStructure q = proto;
  q.clear_memory();
  for (int l = 1; l <= level; ++l)
    for (int g = 0; 2 * g - 2 < l; ++g)
      if (int n = l - 2 * g + 2; n >= 1) benchmark::DoNotOptimize(q.F(g, n, m).size());
}

void BM_AiryAbcd(benchmark::State& st) {
  auto q = kdv::make_structure(kdv::airy());
  for (auto _ : st) run_levels(q, static_cast<int>(st.range(0)), Method::abcd);
}
BENCHMARK(BM_AiryAbcd)->DenseRange(3, 6)->Unit(benchmark::kMillisecond);

void BM_AiryGeneral(benchmark::State& st) {
  auto q = kdv::make_structure(kdv::airy());
  for (auto _ : st) run_levels(q, static_cast<int>(st.range(0)), Method::general);
}
BENCHMARK(BM_AiryGeneral)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

void BM_WeilPetersson(benchmark::State& st) {
  auto q = kdv::make_structure(kdv::weil_petersson());
  for (auto _ : st) run_levels(q, static_cast<int>(st.range(0)), Method::abcd);
}
BENCHMARK(BM_WeilPetersson)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

void BM_PureGue(benchmark::State& st) {
  auto q = gue::make_structure(gue::pure());
  for (auto _ : st) run_levels(q, static_cast<int>(st.range(0)), Method::abcd);
}
BENCHMARK(BM_PureGue)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

void BM_AiryThreads(benchmark::State& st) {
  auto q = kdv::make_structure(kdv::airy());
  q.options.threads = static_cast<unsigned>(st.range(0));
  for (auto _ : st) run_levels(q, 6, Method::abcd);
}
BENCHMARK(BM_AiryThreads)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_OperatorMaterialize(benchmark::State& st) {
  auto q = kdv::make_structure(kdv::weil_petersson());
  for (auto _ : st) benchmark::DoNotOptimize(q.op(3, 0, 0).materialize().size());
}
BENCHMARK(BM_OperatorMaterialize);

}  // namespace
