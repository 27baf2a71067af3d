#include <benchmark/benchmark.h>

#include "toprec/elliptic.hpp"
#include "toprec/newton.hpp"
#include "toprec/rs.hpp"

using namespace toprec;

namespace {

void BM_RsLevels(benchmark::State& st) {
  auto c = rs::make_curve(static_cast<int>(st.range(0)), 1);
  for (auto _ : st) {
    auto q = rs::make_structure(c);
    for (int l = 1; l <= 3; ++l)
      for (int g = 0; 2 * g - 2 < l; ++g)
        if (int n = l - 2 * g + 2; n >= 1) benchmark::DoNotOptimize(q.F(g, n).size());
  }
}
BENCHMARK(BM_RsLevels)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_WeierstrassCell(benchmark::State& st) {
  PrecisionScope ps(128);
  auto c = elliptic::weierstrass_curve(elliptic::parse_complex("2i", 128), Complex(0L), 128);
  for (auto _ : st) {
    auto q = elliptic::make_structure(c);
    benchmark::DoNotOptimize(q.F(1, 2).size());
  }
}
BENCHMARK(BM_WeierstrassCell)->Unit(benchmark::kMillisecond);

void BM_NewtonCubicBuild(benchmark::State& st) {
  PrecisionScope ps(256);
  auto P = newton::PlanePolynomial::parse("x^3+y^3+t*x*y+1").specialize(1);
  newton::CurveOptions o;
  o.kmax = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(newton::Curve(P, o).points().size());
}
BENCHMARK(BM_NewtonCubicBuild)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_NewtonExactLayer(benchmark::State& st) {
  auto P = newton::PlanePolynomial::parse("x^3+y^3+t*x*y+1");
  for (auto _ : st) {
    auto k = newton::q_kernel(P);
    benchmark::DoNotOptimize(newton::r0_symbolic(P, k));
    benchmark::DoNotOptimize(newton::u_poly(P));
  }
}
BENCHMARK(BM_NewtonExactLayer)->Unit(benchmark::kMicrosecond);

}  // namespace
