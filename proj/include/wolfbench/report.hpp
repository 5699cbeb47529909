#pragma once

// Report emission: EvalReport and certificate JSON, sweep CSV rows.

#include <string>
#include <string_view>

#include "wolfbench/secmetrics.hpp"

namespace wolfbench {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// EvalReport JSON. `config_json` is the resolved run configuration, embedded
/// verbatim as an object so the run can be replayed.
std::string eval_report_json(const EvalSummary& summary, const Population& pop, const MatcherPolicy& policy,
                             std::string_view config_json);

std::string certificate_json(const WolfCertificate& cert, const Population& pop, const MatcherPolicy& policy,
                             const EvalMode& mode, std::string_view config_json);

inline constexpr std::string_view kSweepCsvHeader = "parameter,frr,far,ar,wap,stderr_wap";

/// One sweep row; FRR/FAR are left empty for score-model populations and the
/// standard error is empty in exact mode.
std::string sweep_csv_row(double parameter, const EvalSummary& summary);

}  // namespace wolfbench
