// benchmarks/bench_main.cpp

#include <benchmark/benchmark.h>

BENCHMARK_MAIN();
