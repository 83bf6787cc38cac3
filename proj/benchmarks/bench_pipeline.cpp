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

#include <string>

#include "coop/markers.hpp"
#include "coop/reasoning.hpp"
#include "coop/synthetic.hpp"
#include "coop/text.hpp"

namespace {

const coop::SyntheticCorpus& sample_corpus() {
    static const coop::SyntheticCorpus corpus = [] {
        coop::SyntheticConfig cfg;
        cfg.n_cases = 50;
        return coop::generate_synthetic_corpus(cfg);
    }();
    return corpus;
}

const coop::ReportRecord& first_report() { return *sample_corpus().corpus.ordered().front(); }

void BM_Normalize(benchmark::State& state) {
    const auto& text = first_report().text;
    for (auto _ : state) benchmark::DoNotOptimize(coop::text::normalize(text));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_Normalize);

void BM_MockClassify(benchmark::State& state) {
    const auto& report = first_report();
    const auto& rules = coop::MockRuleSet::default_rules();
    for (auto _ : state) benchmark::DoNotOptimize(coop::mock_classify(report.text, coop::CaregiverRole::Father, rules));
}
BENCHMARK(BM_MockClassify);

void BM_SplitReasoning(benchmark::State& state) {
    const auto output =
        coop::mock_classify(first_report().text, coop::CaregiverRole::Mother, coop::MockRuleSet::default_rules());
    for (auto _ : state) benchmark::DoNotOptimize(coop::split_reasoning(output));
}
BENCHMARK(BM_SplitReasoning);

void BM_GenerateSyntheticCorpus(benchmark::State& state) {
    coop::SyntheticConfig cfg;
    cfg.n_cases = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(coop::generate_synthetic_corpus(cfg));
}
BENCHMARK(BM_GenerateSyntheticCorpus)->Arg(10)->Arg(100);

}  // namespace
