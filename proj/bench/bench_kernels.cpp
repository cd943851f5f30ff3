// Serial reference kernels against their OpenMP versions. Thread count follows
// DILUTE_SPECTRA_THREADS like the command line tool.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dilute/kernels.hpp"
#include "dilute/model.hpp"
#include "dilute/rng.hpp"

using namespace dilute;

namespace {

CsrMatrix make_sample(std::int64_t N, double p) {
    return sample_matrix(ModelParams(N, N / 2, p, EntryDistribution::gaussian()), 17).matrix;
}

std::vector<double> make_vector(std::int64_t n) {
    Rng rng = make_rng(5);
    std::normal_distribution<double> g;
    std::vector<double> x(n);
    for (double& v : x) v = g(rng);
    return x;
}

template <bool Parallel>
void BM_Multiply(benchmark::State& state) {
    const CsrMatrix a = make_sample(state.range(0), 0.02);
    const auto x = make_vector(a.cols);
    std::vector<double> y(a.rows);
    for (auto _ : state) {
        if constexpr (Parallel) kernels::parallel::multiply(a, x, y);
        else kernels::serial::multiply(a, x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * a.nnz());
}

template <bool Parallel>
void BM_DenseTranspose(benchmark::State& state) {
    const std::int64_t N = state.range(0);
    const auto a = make_sample(N, 1.0).to_dense_row_major();
    const auto x = make_vector(N);
    std::vector<double> y(N / 2);
    for (auto _ : state) {
        if constexpr (Parallel) kernels::parallel::dense_multiply_transpose(a, N, N / 2, x, y);
        else kernels::serial::dense_multiply_transpose(a, N, N / 2, x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * N * (N / 2));
}

template <bool Parallel>
void BM_RowColNorms(benchmark::State& state) {
    const CsrMatrix a = make_sample(state.range(0), 0.02);
    for (auto _ : state) {
        auto r = Parallel ? kernels::parallel::row_col_sq_norms(a) : kernels::serial::row_col_sq_norms(a);
        benchmark::DoNotOptimize(r.col.data());
    }
    state.SetItemsProcessed(state.iterations() * a.nnz());
}

template <bool Parallel>
void BM_Gram(benchmark::State& state) {
    const CsrMatrix a = make_sample(state.range(0), 0.1);
    std::vector<double> g(static_cast<std::size_t>(a.cols * a.cols));
    for (auto _ : state) {
        if constexpr (Parallel) kernels::parallel::gram_upper(a, g);
        else kernels::serial::gram_upper(a, g);
        benchmark::DoNotOptimize(g.data());
    }
}

template <bool Parallel>
void BM_Cholesky(benchmark::State& state) {
    const CsrMatrix a = make_sample(state.range(0), 0.1);
    std::vector<double> g(static_cast<std::size_t>(a.cols * a.cols));
    kernels::serial::gram_upper(a, g);
    std::vector<double> work(g.size());
    for (auto _ : state) {
        state.PauseTiming();
        work = g;
        state.ResumeTiming();
        const auto bad = Parallel ? kernels::parallel::cholesky_upper(work, a.cols)
                                  : kernels::serial::cholesky_upper(work, a.cols);
        benchmark::DoNotOptimize(bad);
    }
}

struct ApplyThreads {
    ApplyThreads() { kernels::apply_thread_setting(); }
} const apply_threads;

}  // namespace

BENCHMARK(BM_Multiply<false>)->Arg(4096)->Arg(16384);
BENCHMARK(BM_Multiply<true>)->Arg(4096)->Arg(16384);
BENCHMARK(BM_DenseTranspose<false>)->Arg(1024)->Arg(4096);
BENCHMARK(BM_DenseTranspose<true>)->Arg(1024)->Arg(4096);
BENCHMARK(BM_RowColNorms<false>)->Arg(16384);
BENCHMARK(BM_RowColNorms<true>)->Arg(16384);
BENCHMARK(BM_Gram<false>)->Arg(1024)->Arg(2048);
BENCHMARK(BM_Gram<true>)->Arg(1024)->Arg(2048);
BENCHMARK(BM_Cholesky<false>)->Arg(1024)->Arg(2048);
BENCHMARK(BM_Cholesky<true>)->Arg(1024)->Arg(2048);

BENCHMARK_MAIN();
