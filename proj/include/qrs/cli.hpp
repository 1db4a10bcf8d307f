#pragma once

#include <optional>
#include <string>

#include "qrs/metrics.hpp"
#include "qrs/netsim.hpp"

namespace qrs::cli {

/// metrics.csv body: time_bucket_s,metric_name,stream_id,value,denominator_flag.
std::string metrics_csv(const metrics::MetricsReport& rep);
std::string summary_text(const metrics::MetricsReport& rep);
std::string compare_csv(const metrics::MetricsReport& baseline,
                        const metrics::MetricsReport& proposed);

struct RunArgs {
    std::string scenario_file;
    std::optional<netsim::Mode> mode;     // overrides the scenario's mode
    std::optional<std::uint64_t> seed;    // overrides the scenario's seed
    std::string out_dir = ".";
    bool dump_trace = false;
    bool quiet = false;  // suppress the stdout summary
};

struct CompareArgs {
    std::string scenario_file;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
};

/// Exit codes: 0 success, 1 I/O failure, 2 invalid scenario.
int cmd_run(const RunArgs& args);
int cmd_compare(const CompareArgs& args);

/// Applies the QRS_OUT override to an output directory choice.
std::string effective_out_dir(const std::string& flag_value);

}  // namespace qrs::cli
