// Copyright 2026 The coop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <vector>

#include "coop/metrics.hpp"
#include "coop/rng.hpp"

namespace {

std::vector<coop::CooperationCategory> random_labels(coop::Rng& rng, std::size_t n) {
    std::vector<coop::CooperationCategory> v(n);
    for (auto& c : v) c = coop::kCategories[rng.between(0, 2)];
    return v;
}

void BM_ClassificationMetrics(benchmark::State& state) {
    const coop::ConfusionMatrix cm{118, 8, 14, 60};
    for (auto _ : state) benchmark::DoNotOptimize(coop::classification_metrics(cm));
}
BENCHMARK(BM_ClassificationMetrics);

void BM_CohenKappa(benchmark::State& state) {
    coop::Rng rng(1);
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = random_labels(rng, n);
    const auto b = random_labels(rng, n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(coop::cohen_kappa(std::span<const coop::CooperationCategory>(a),
                                                   std::span<const coop::CooperationCategory>(b)));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CohenKappa)->Range(64, 1 << 16);

void BM_SensitivityCompare(benchmark::State& state) {
    coop::Rng rng(2);
    const auto a = random_labels(rng, 200);
    const auto b = random_labels(rng, 200);
    for (auto _ : state) benchmark::DoNotOptimize(coop::sensitivity_compare(a, b));
}
BENCHMARK(BM_SensitivityCompare);

}  // namespace
