#include "qrs/cli.hpp"

#include <cstdio>
#include <functional>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qrs/scenario_io.hpp"
#include "qrs/trace.hpp"

namespace qrs::cli {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string num(std::uint64_t v) { return std::to_string(v); }

struct CsvOut {
    std::ostringstream os;

    void row(double bucket, const std::string& metric, const std::string& stream,
             const std::string& value, bool flagged) {
        os << num(bucket) << ',' << metric << ',' << stream << ',' << value << ','
           << (flagged ? 1 : 0) << '\n';
    }
};

void scalar_rows(CsvOut& csv, double bucket, const std::string& metric,
                 const metrics::MetricsReport& rep,
                 const std::function<std::pair<std::string, bool>(const metrics::StreamMetrics&)>&
                     pick) {
    auto [value, flag] = pick(rep.all);
    csv.row(bucket, metric, "ALL", value, flag);
    for (const auto& [stream, sm] : rep.streams) {
        auto [v, f] = pick(sm);
        csv.row(bucket, metric, std::to_string(stream), v, f);
    }
}

}  // namespace

std::string metrics_csv(const metrics::MetricsReport& rep) {
    CsvOut csv;
    csv.os << "time_bucket_s,metric_name,stream_id,value,denominator_flag\n";
    const double end = rep.horizon_s;

    scalar_rows(csv, end, "generated", rep,
                [](const metrics::StreamMetrics& s) { return std::make_pair(num(s.generated), false); });
    scalar_rows(csv, end, "delivered", rep,
                [](const metrics::StreamMetrics& s) { return std::make_pair(num(s.delivered), false); });
    scalar_rows(csv, end, "loss_count", rep,
                [](const metrics::StreamMetrics& s) { return std::make_pair(num(s.dropped), false); });
    scalar_rows(csv, end, "loss_queue", rep,
                [](const metrics::StreamMetrics& s) { return std::make_pair(num(s.drop_queue), false); });
    scalar_rows(csv, end, "loss_station", rep,
                [](const metrics::StreamMetrics& s) { return std::make_pair(num(s.drop_station), false); });
    scalar_rows(csv, end, "delay_mean_s", rep, [](const metrics::StreamMetrics& s) {
        return std::make_pair(num(s.delay_defined ? s.delay_mean : 0.0), !s.delay_defined);
    });
    scalar_rows(csv, end, "delay_max_s", rep, [](const metrics::StreamMetrics& s) {
        return std::make_pair(num(s.delay_defined ? s.delay_max : 0.0), !s.delay_defined);
    });
    scalar_rows(csv, end, "jitter_mean_s", rep, [](const metrics::StreamMetrics& s) {
        return std::make_pair(num(s.jitter_pairs ? s.jitter_mean : 0.0), s.jitter_pairs == 0);
    });
    scalar_rows(csv, end, "compound_lost_bits", rep, [](const metrics::StreamMetrics& s) {
        return std::make_pair(num(s.compound_lost_bits), false);
    });
    scalar_rows(csv, end, "recovered_paths", rep, [](const metrics::StreamMetrics& s) {
        return std::make_pair(num(static_cast<std::uint64_t>(s.recovered_paths)), false);
    });
    scalar_rows(csv, end, "system_efficiency", rep, [](const metrics::StreamMetrics& s) {
        return std::make_pair(num(s.efficiency.value), s.efficiency.zero_denominator);
    });

    csv.row(end, "detector_utilization", "ALL", num(rep.detector_utilization.value),
            rep.detector_utilization.zero_denominator);
    csv.row(end, "connector_utilization", "ALL", num(rep.connector_utilization.value),
            rep.connector_utilization.zero_denominator);
    csv.row(end, "analyzer_utilization", "ALL", num(rep.analyzer_utilization.value),
            rep.analyzer_utilization.zero_denominator);
    csv.row(end, "messages_total", "ALL", num(rep.total_messages), false);
    csv.row(end, "messages_transit", "ALL", num(rep.transit_messages), false);
    csv.row(end, "audit_violations", "ALL", num(rep.audit_violations), false);

    for (std::size_t b = 0; b < rep.loss_series.size(); ++b)
        csv.row(static_cast<double>(b), "loss", "ALL", num(rep.loss_series[b]), false);
    for (const auto& [stream, series] : rep.loss_series_streams)
        for (std::size_t b = 0; b < series.size(); ++b)
            csv.row(static_cast<double>(b), "loss", std::to_string(stream), num(series[b]), false);
    for (std::size_t b = 0; b < rep.reservation_success_series.size(); ++b) {
        const metrics::Ratio& r = rep.reservation_success_series[b];
        csv.row(static_cast<double>(b), "reservation_success_rate", "ALL", num(r.value),
                r.zero_denominator);
    }
    for (std::size_t b = 0; b < rep.jitter_bucket_mean.size(); ++b)
        csv.row(static_cast<double>(b), "jitter", "ALL", num(rep.jitter_bucket_mean[b]), false);
    return csv.os.str();
}

std::string summary_text(const metrics::MetricsReport& rep) {
    std::ostringstream os;
    os << "mode: " << (rep.mode == 1 ? "proposed" : "baseline") << "  seed: " << rep.seed
       << "  horizon_s: " << num(rep.horizon_s) << (rep.batching ? "  batching: on" : "") << "\n";
    os << "packets: generated " << rep.all.generated << ", delivered " << rep.all.delivered
       << ", lost " << rep.all.dropped << " (queue " << rep.all.drop_queue << ", station "
       << rep.all.drop_station << ")\n";
    os << "delay: mean " << num(rep.all.delay_mean) << " s, max " << num(rep.all.delay_max)
       << " s\n";
    os << "jitter: mean " << num(rep.all.jitter_mean) << " s over " << rep.all.jitter_pairs
       << " pairs\n";
    os << "compound lost bits: " << rep.all.compound_lost_bits << "\n";
    os << "recovered paths: " << rep.recovered_paths << "\n";
    os << "system efficiency: " << num(rep.efficiency.value * 100.0) << " %"
       << (rep.efficiency.zero_denominator ? " (no service-seconds)" : "") << "\n";
    os << "utilization: detector " << num(rep.detector_utilization.value) << ", connector "
       << num(rep.connector_utilization.value) << ", analyzer "
       << num(rep.analyzer_utilization.value) << "\n";
    os << "component messages: " << rep.total_messages << " (" << rep.transit_messages
       << " crossed links)\n";
    os << "failures: injected " << rep.injected_failures << ", detected " << rep.detected_failures
       << ", alarms " << rep.alarm_entries << ", episodes " << rep.episodes_opened << "\n";
    os << "audit violations: " << rep.audit_violations << "\n";
    return os.str();
}

std::string compare_csv(const metrics::MetricsReport& baseline,
                        const metrics::MetricsReport& proposed) {
    std::ostringstream os;
    os << "metric_name,stream_id,baseline,proposed,delta\n";
    auto row = [&os](const std::string& metric, const std::string& stream, double b, double p) {
        os << metric << ',' << stream << ',' << num(b) << ',' << num(p) << ',' << num(p - b)
           << '\n';
    };
    row("loss_count", "ALL", static_cast<double>(baseline.all.dropped),
        static_cast<double>(proposed.all.dropped));
    row("system_efficiency", "ALL", baseline.efficiency.value, proposed.efficiency.value);
    row("jitter_mean_s", "ALL", baseline.all.jitter_mean, proposed.all.jitter_mean);
    row("delay_mean_s", "ALL", baseline.all.delay_mean, proposed.all.delay_mean);
    row("delay_max_s", "ALL", baseline.all.delay_max, proposed.all.delay_max);
    row("recovered_paths", "ALL", baseline.recovered_paths, proposed.recovered_paths);
    row("messages_total", "ALL", static_cast<double>(baseline.total_messages),
        static_cast<double>(proposed.total_messages));
    row("compound_lost_bits", "ALL", static_cast<double>(baseline.all.compound_lost_bits),
        static_cast<double>(proposed.all.compound_lost_bits));
    for (const auto& [stream, b] : baseline.streams) {
        auto it = proposed.streams.find(stream);
        if (it == proposed.streams.end()) continue;
        const std::string id = std::to_string(stream);
        row("loss_count", id, static_cast<double>(b.dropped),
            static_cast<double>(it->second.dropped));
        row("system_efficiency", id, b.efficiency.value, it->second.efficiency.value);
        row("jitter_mean_s", id, b.jitter_mean, it->second.jitter_mean);
    }
    return os.str();
}

std::string effective_out_dir(const std::string& flag_value) {
    if (const char* env = std::getenv("QRS_OUT"); env && *env) return env;
    return flag_value;
}

namespace {

bool write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out << body;
    return static_cast<bool>(out);
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const netsim::ScenarioInvalid& e) {
        std::cerr << "scenario invalid: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int cmd_run(const RunArgs& args) {
    return run_guarded([&]() -> int {
        netsim::Scenario sc = scenario_io::load_file(args.scenario_file);
        if (args.mode) sc.mode = *args.mode;
        if (args.seed) sc.seed = *args.seed;
        netsim::RunResult result = netsim::run(sc);

        std::string dir = effective_out_dir(args.out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) {
            std::cerr << "error: cannot create output directory " << dir << "\n";
            return 1;
        }
        if (!write_file(dir + "/metrics.csv", metrics_csv(result.report)) ||
            !write_file(dir + "/summary.txt", summary_text(result.report))) {
            std::cerr << "error: cannot write outputs under " << dir << "\n";
            return 1;
        }
        if (args.dump_trace) trace::save(result.trace, dir + "/trace.bin");
        if (!args.quiet) std::cout << summary_text(result.report);
        return 0;
    });
}

int cmd_compare(const CompareArgs& args) {
    return run_guarded([&]() -> int {
        netsim::Scenario sc = scenario_io::load_file(args.scenario_file);
        if (args.seed) sc.seed = *args.seed;

        netsim::Scenario base = sc;
        base.mode = netsim::Mode::baseline;
        netsim::Scenario prop = sc;
        prop.mode = netsim::Mode::proposed;
        auto base_rep = netsim::run_report(base);
        auto prop_rep = netsim::run_report(prop);

        std::string dir = effective_out_dir(args.out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) {
            std::cerr << "error: cannot create output directory " << dir << "\n";
            return 1;
        }
        if (!write_file(dir + "/compare.csv", compare_csv(base_rep, prop_rep)) ||
            !write_file(dir + "/metrics_baseline.csv", metrics_csv(base_rep)) ||
            !write_file(dir + "/metrics_proposed.csv", metrics_csv(prop_rep))) {
            std::cerr << "error: cannot write outputs under " << dir << "\n";
            return 1;
        }
        std::cout << "baseline:  loss " << base_rep.all.dropped << ", efficiency "
                  << num(base_rep.efficiency.value * 100.0) << " %\n";
        std::cout << "proposed:  loss " << prop_rep.all.dropped << ", efficiency "
                  << num(prop_rep.efficiency.value * 100.0) << " %\n";
        return 0;
    });
}

}  // namespace qrs::cli
