#include "qrs/analyzer.hpp"

#include <algorithm>

namespace qrs::analyzer {

NoPendingRequest::NoPendingRequest()
    : std::runtime_error("NoPendingRequest: extract reply without an open analysis") {}

DiffResult diff_paths(const Path& old_path, const Path& new_path) {
    DiffResult out;
    std::size_t common = std::min(old_path.size(), new_path.size());
    for (std::size_t i = 0; i < common; ++i) {
        StationId o = old_path.stations[i];
        StationId n = new_path.stations[i];
        if (o == n) {
            out.same.push_back(o);
            ++out.k;
        } else {
            out.diff1.push_back(o);
            out.diff2.push_back(n);
            ++out.h;
        }
    }
    for (std::size_t i = common; i < old_path.size(); ++i)
        out.diff1.push_back(old_path.stations[i]);
    for (std::size_t i = common; i < new_path.size(); ++i)
        out.diff2.push_back(new_path.stations[i]);
    return out;
}

std::pair<FlowSpec, std::vector<std::pair<StationId, FlowSpec>>> build_qos_request(
    const DiffResult& diff, const FlowSpec& old_spec, const Path& new_path) {
    (void)new_path;  // stations already classified by the diff
    std::vector<std::pair<StationId, FlowSpec>> per_station;
    per_station.reserve(diff.diff2.size());
    for (StationId id : diff.diff2) per_station.emplace_back(id, old_spec);
    return {old_spec, per_station};
}

std::vector<wire::Message> analyzer_step(Analyzer& an, const AnalyzerEvent& event,
                                         const FlowSpec& reserved_spec) {
    std::vector<wire::Message> out;

    if (const auto* req = std::get_if<wire::AnalyzeRequest>(&event)) {
        an.state.connector_flag = 1;
        DiffResult diff = diff_paths(req->old_path, req->new_path);
        an.state.same_table = diff.same;
        an.state.diff1_table = diff.diff1;
        an.state.diff2_table = diff.diff2;

        if (diff.diff1.empty() && diff.diff2.empty()) {
            // Identical paths: the old QoS request stands unchanged.
            wire::AnalyzeReply reply;
            reply.connector_id = an.state.connector_id;
            reply.qos_request = reserved_spec;
            out.emplace_back(reply);
            an.state.connector_flag = 0;
            an.pending.reset();
            return out;
        }

        an.pending = PendingAnalysis{req->old_path, req->new_path, diff};
        wire::QosExtractRequest extract;
        extract.analyzer_id = an.state.analyzer_id;
        extract.new_path = req->new_path;
        out.emplace_back(extract);
        return out;
    }

    const auto& reply = std::get<wire::QosExtractReply>(event);
    if (!an.pending) throw NoPendingRequest();
    auto [spec, per_station] =
        build_qos_request(an.pending->diff, reply.qos_request, an.pending->new_path);
    wire::AnalyzeReply result;
    result.connector_id = an.state.connector_id;
    result.qos_request = spec;
    result.per_station_qos = std::move(per_station);
    out.emplace_back(result);
    an.pending.reset();
    an.state.connector_flag = 0;
    return out;
}

}  // namespace qrs::analyzer
