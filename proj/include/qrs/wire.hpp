#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qrs/core.hpp"

namespace qrs::wire {

// Layout: 6-byte header (magic, version, type), then a u16 big-endian length
// that covers itself plus the body, so total size == 6 + body_len. All
// integers are big-endian and fixed width. Path = u16 count + u32 ids;
// FlowSpec = u64 rate_bps + u32 burst_bytes + u32 jitter_us + u8 priority;
// lists = u16 count + elements.
inline constexpr std::uint32_t kMagic = 0x514D5253;
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 6;

struct SenderUpdate {
    std::uint32_t connector_id = 0;
    std::uint32_t stream_id = 0;
    Path new_path;
    FlowSpec flowspec;
    bool operator==(const SenderUpdate&) const = default;
};

struct RouteRequest {
    std::uint32_t connector_id = 0;
    Path old_path;
    StationId failed_station = 0;
    bool operator==(const RouteRequest&) const = default;
};

struct RouteReply {
    std::uint32_t connector_id = 0;
    std::vector<Path> alternatives;
    bool operator==(const RouteReply&) const = default;
};

struct AnalyzeRequest {
    std::uint32_t connector_id = 0;
    Path old_path;
    Path new_path;
    bool operator==(const AnalyzeRequest&) const = default;
};

struct AnalyzeReply {
    std::uint32_t connector_id = 0;
    FlowSpec qos_request;
    std::vector<std::pair<StationId, FlowSpec>> per_station_qos;
    bool operator==(const AnalyzeReply&) const = default;
};

struct QosExtractRequest {
    std::uint32_t analyzer_id = 0;
    Path new_path;
    bool operator==(const QosExtractRequest&) const = default;
};

struct QosExtractReply {
    std::uint32_t analyzer_id = 0;
    FlowSpec qos_request;
    bool operator==(const QosExtractReply&) const = default;
};

struct DetectorAlarm {
    std::uint32_t connector_id = 0;
    StationId failed_station = 0;
    FlowSpec failed_qos;
    bool operator==(const DetectorAlarm&) const = default;
};

struct CumulativeAlarm {
    std::uint32_t connector_id = 0;
    std::vector<std::pair<StationId, FlowSpec>> entries;  // never empty
    bool operator==(const CumulativeAlarm&) const = default;
};

using Message = std::variant<SenderUpdate, RouteRequest, RouteReply, AnalyzeRequest,
                             AnalyzeReply, QosExtractRequest, QosExtractReply,
                             DetectorAlarm, CumulativeAlarm>;

/// Wire type codes, 1-based in variant order (DetectorAlarm = 8).
std::uint8_t message_type(const Message& msg);

enum class DecodeErrc : std::uint8_t {
    bad_magic,
    bad_version,
    unknown_type,
    truncated_body,
    trailing_bytes,
};

const char* to_string(DecodeErrc code);

class DecodeError : public std::runtime_error {
public:
    DecodeError(DecodeErrc code, std::size_t offset);
    DecodeErrc code() const { return code_; }
    std::size_t offset() const { return offset_; }

private:
    DecodeErrc code_;
    std::size_t offset_;
};

/// Thrown when an encoded body would not fit the u16 length field.
class OversizeBody : public std::runtime_error {
public:
    explicit OversizeBody(std::size_t body_bytes);
};

class MixedConnector : public std::runtime_error {
public:
    MixedConnector();
};

class EmptyBatch : public std::runtime_error {
public:
    EmptyBatch();
};

std::vector<std::uint8_t> encode(const Message& msg);
Message decode(std::span<const std::uint8_t> bytes);

/// Folds several alarms from one connector into a cumulative alarm,
/// preserving entry order.
CumulativeAlarm batch_alarms(const std::vector<DetectorAlarm>& alarms);

}  // namespace qrs::wire
