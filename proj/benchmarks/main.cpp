#include <benchmark/benchmark.h>

// The distro's libbenchmark_main is LTO bytecode from another compiler
// release, so the entry point is built here.
BENCHMARK_MAIN();
