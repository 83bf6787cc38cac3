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

#pragma once

#include <map>
#include <string>
#include <string_view>

#include "coop/labeling.hpp"
#include "coop/metrics.hpp"

namespace coop {

/// Fixed-point rendering used by every exported table.
std::string format_fixed(double value, int decimals);

/// block,n,accuracy,precision,recall,f1 (two decimals, weighted P/R/F1).
std::string table2_csv(const MetricsReport& report);

/// block,truth,predicted_lack,predicted_no_documented_lack; counts.
std::string table3_csv(const MetricsReport& report);
/// Reads table3_csv output back into per-block matrices.
std::map<std::string, ConfusionMatrix> parse_table3_csv(std::string_view csv_text);

/// block,rater_a,rater_b,percent_agreement,kappa for every rater pair
/// (binary labels).
std::string table4_csv(const MetricsReport& report);

/// row,reports_n,reports_percent,cases_n,cases_percent with rows mother,
/// father, either and total; percentages at one decimal over the evaluated
/// count of each row.
std::string table5_csv(const CorpusSummary& summary);

/// `run_id` is written as a top-level field when non-empty.
std::string summary_json(const CorpusSummary& summary, std::string_view run_id = {});
std::string metrics_json(const MetricsReport& report, std::string_view run_id = {});

}  // namespace coop
