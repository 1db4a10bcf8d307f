#pragma once

#include <optional>
#include <stdexcept>
#include <variant>

#include "qrs/core.hpp"
#include "qrs/wire.hpp"

namespace qrs::analyzer {

class NoPendingRequest : public std::runtime_error {
public:
    NoPendingRequest();
};

/// Position-by-position comparison of the two paths. Equal positions go to
/// `same`, unequal ones to `diff1`/`diff2` pairwise; whatever the longer
/// path has beyond the compared prefix lands in its diff table alone.
DiffResult diff_paths(const Path& old_path, const Path& new_path);

/// End-to-end spec for the new path plus the per-station requirement for
/// every diff2 station. The flow keeps its original spec; replacement
/// stations must each provide it in full.
std::pair<FlowSpec, std::vector<std::pair<StationId, FlowSpec>>> build_qos_request(
    const DiffResult& diff, const FlowSpec& old_spec, const Path& new_path);

/// One in-flight analysis: the paths under comparison and their diff.
struct PendingAnalysis {
    Path old_path;
    Path new_path;
    DiffResult diff;
};

struct Analyzer {
    AnalyzerState state;
    std::optional<PendingAnalysis> pending;
};

using AnalyzerEvent = std::variant<wire::AnalyzeRequest, wire::QosExtractReply>;

/// Drives one analyzer transition. `reserved_spec` is the stream's current
/// reservation as seen by the receiver-side reservation engine; it answers
/// the identical-paths case without an extraction round trip. Throws
/// NoPendingRequest for a stray extract reply.
std::vector<wire::Message> analyzer_step(Analyzer& an, const AnalyzerEvent& event,
                                         const FlowSpec& reserved_spec);

}  // namespace qrs::analyzer
