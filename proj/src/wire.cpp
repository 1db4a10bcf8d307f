#include "qrs/wire.hpp"

namespace qrs::wire {

namespace {

class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) {
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
        buf_.push_back(static_cast<std::uint8_t>(v));
    }
    void u32(std::uint32_t v) {
        for (int shift = 24; shift >= 0; shift -= 8)
            buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
    void u64(std::uint64_t v) {
        for (int shift = 56; shift >= 0; shift -= 8)
            buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
    void flowspec(const FlowSpec& fs) {
        u64(fs.rate_bps);
        u32(fs.burst_bytes);
        u32(fs.jitter_bound_us);
        u8(static_cast<std::uint8_t>(fs.priority));
    }
    void path(const Path& p) {
        u16(static_cast<std::uint16_t>(p.size()));
        for (StationId id : p.stations) u32(id);
    }
    void qos_list(const std::vector<std::pair<StationId, FlowSpec>>& list) {
        u16(static_cast<std::uint16_t>(list.size()));
        for (const auto& [id, fs] : list) {
            u32(id);
            flowspec(fs);
        }
    }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

// Reads from the body region; `base` is the region's offset within the
// whole buffer so errors can name absolute positions.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> data, std::size_t base)
        : data_(data), base_(base) {}

    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_ + i];
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = v << 8 | data_[pos_ + i];
        pos_ += 8;
        return v;
    }
    FlowSpec flowspec() {
        FlowSpec fs;
        fs.rate_bps = u64();
        fs.burst_bytes = u32();
        fs.jitter_bound_us = u32();
        fs.priority = static_cast<Priority>(u8());
        return fs;
    }
    Path path() {
        Path p;
        std::uint16_t n = u16();
        p.stations.reserve(n);
        for (std::uint16_t i = 0; i < n; ++i) p.stations.push_back(u32());
        return p;
    }
    std::vector<std::pair<StationId, FlowSpec>> qos_list() {
        std::vector<std::pair<StationId, FlowSpec>> list;
        std::uint16_t n = u16();
        list.reserve(n);
        for (std::uint16_t i = 0; i < n; ++i) {
            StationId id = u32();
            list.emplace_back(id, flowspec());
        }
        return list;
    }
    std::size_t consumed() const { return pos_; }
    std::size_t absolute() const { return base_ + pos_; }

private:
    void need(std::size_t n) {
        if (pos_ + n > data_.size())
            throw DecodeError(DecodeErrc::truncated_body, base_ + data_.size());
    }
    std::span<const std::uint8_t> data_;
    std::size_t base_;
    std::size_t pos_ = 0;
};

}  // namespace

const char* to_string(DecodeErrc code) {
    switch (code) {
        case DecodeErrc::bad_magic: return "BadMagic";
        case DecodeErrc::bad_version: return "BadVersion";
        case DecodeErrc::unknown_type: return "UnknownType";
        case DecodeErrc::truncated_body: return "TruncatedBody";
        case DecodeErrc::trailing_bytes: return "TrailingBytes";
    }
    return "DecodeError";
}

DecodeError::DecodeError(DecodeErrc code, std::size_t offset)
    : std::runtime_error(std::string(to_string(code)) + " at offset " +
                         std::to_string(offset)),
      code_(code),
      offset_(offset) {}

OversizeBody::OversizeBody(std::size_t body_bytes)
    : std::runtime_error("OversizeBody: body of " + std::to_string(body_bytes) +
                         " bytes exceeds the u16 length field") {}

MixedConnector::MixedConnector()
    : std::runtime_error("MixedConnector: alarms in one batch must share a connector id") {}

EmptyBatch::EmptyBatch() : std::runtime_error("EmptyBatch: nothing to batch") {}

std::uint8_t message_type(const Message& msg) {
    return static_cast<std::uint8_t>(msg.index() + 1);
}

std::vector<std::uint8_t> encode(const Message& msg) {
    ByteWriter body;
    std::visit(
        [&body](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, SenderUpdate>) {
                body.u32(m.connector_id);
                body.u32(m.stream_id);
                body.path(m.new_path);
                body.flowspec(m.flowspec);
            } else if constexpr (std::is_same_v<T, RouteRequest>) {
                body.u32(m.connector_id);
                body.path(m.old_path);
                body.u32(m.failed_station);
            } else if constexpr (std::is_same_v<T, RouteReply>) {
                body.u32(m.connector_id);
                body.u16(static_cast<std::uint16_t>(m.alternatives.size()));
                for (const Path& p : m.alternatives) body.path(p);
            } else if constexpr (std::is_same_v<T, AnalyzeRequest>) {
                body.u32(m.connector_id);
                body.path(m.old_path);
                body.path(m.new_path);
            } else if constexpr (std::is_same_v<T, AnalyzeReply>) {
                body.u32(m.connector_id);
                body.flowspec(m.qos_request);
                body.qos_list(m.per_station_qos);
            } else if constexpr (std::is_same_v<T, QosExtractRequest>) {
                body.u32(m.analyzer_id);
                body.path(m.new_path);
            } else if constexpr (std::is_same_v<T, QosExtractReply>) {
                body.u32(m.analyzer_id);
                body.flowspec(m.qos_request);
            } else if constexpr (std::is_same_v<T, DetectorAlarm>) {
                body.u32(m.connector_id);
                body.u32(m.failed_station);
                body.flowspec(m.failed_qos);
            } else if constexpr (std::is_same_v<T, CumulativeAlarm>) {
                body.u32(m.connector_id);
                body.qos_list(m.entries);
            }
        },
        msg);

    std::vector<std::uint8_t> body_bytes = body.take();
    // body_len covers itself, so the largest representable body is 65533 bytes.
    if (body_bytes.size() + 2 > 0xFFFF) throw OversizeBody(body_bytes.size());

    ByteWriter out;
    out.u32(kMagic);
    out.u8(kVersion);
    out.u8(message_type(msg));
    out.u16(static_cast<std::uint16_t>(body_bytes.size() + 2));
    std::vector<std::uint8_t> framed = out.take();
    framed.insert(framed.end(), body_bytes.begin(), body_bytes.end());
    return framed;
}

Message decode(std::span<const std::uint8_t> bytes) {
    static constexpr std::uint8_t magic[4] = {0x51, 0x4D, 0x52, 0x53};
    for (std::size_t i = 0; i < 4; ++i) {
        if (i >= bytes.size()) throw DecodeError(DecodeErrc::truncated_body, i);
        if (bytes[i] != magic[i]) throw DecodeError(DecodeErrc::bad_magic, i);
    }
    if (bytes.size() < 5) throw DecodeError(DecodeErrc::truncated_body, 4);
    if (bytes[4] != kVersion) throw DecodeError(DecodeErrc::bad_version, 4);
    if (bytes.size() < 6) throw DecodeError(DecodeErrc::truncated_body, 5);
    std::uint8_t type = bytes[5];
    if (type < 1 || type > 9) throw DecodeError(DecodeErrc::unknown_type, 5);
    if (bytes.size() < 8) throw DecodeError(DecodeErrc::truncated_body, bytes.size());
    std::uint16_t body_len = static_cast<std::uint16_t>(bytes[6] << 8 | bytes[7]);
    if (body_len < 2) throw DecodeError(DecodeErrc::truncated_body, 6);
    std::size_t total = kHeaderBytes + body_len;
    if (bytes.size() < total) throw DecodeError(DecodeErrc::truncated_body, bytes.size());
    if (bytes.size() > total) throw DecodeError(DecodeErrc::trailing_bytes, total);

    ByteReader r(bytes.subspan(8, total - 8), 8);
    Message msg;
    switch (type) {
        case 1: {
            SenderUpdate m;
            m.connector_id = r.u32();
            m.stream_id = r.u32();
            m.new_path = r.path();
            m.flowspec = r.flowspec();
            msg = m;
            break;
        }
        case 2: {
            RouteRequest m;
            m.connector_id = r.u32();
            m.old_path = r.path();
            m.failed_station = r.u32();
            msg = m;
            break;
        }
        case 3: {
            RouteReply m;
            m.connector_id = r.u32();
            std::uint16_t n = r.u16();
            m.alternatives.reserve(n);
            for (std::uint16_t i = 0; i < n; ++i) m.alternatives.push_back(r.path());
            msg = m;
            break;
        }
        case 4: {
            AnalyzeRequest m;
            m.connector_id = r.u32();
            m.old_path = r.path();
            m.new_path = r.path();
            msg = m;
            break;
        }
        case 5: {
            AnalyzeReply m;
            m.connector_id = r.u32();
            m.qos_request = r.flowspec();
            m.per_station_qos = r.qos_list();
            msg = m;
            break;
        }
        case 6: {
            QosExtractRequest m;
            m.analyzer_id = r.u32();
            m.new_path = r.path();
            msg = m;
            break;
        }
        case 7: {
            QosExtractReply m;
            m.analyzer_id = r.u32();
            m.qos_request = r.flowspec();
            msg = m;
            break;
        }
        case 8: {
            DetectorAlarm m;
            m.connector_id = r.u32();
            m.failed_station = r.u32();
            m.failed_qos = r.flowspec();
            msg = m;
            break;
        }
        case 9: {
            CumulativeAlarm m;
            m.connector_id = r.u32();
            m.entries = r.qos_list();
            msg = m;
            break;
        }
    }
    if (r.consumed() != total - 8)
        throw DecodeError(DecodeErrc::trailing_bytes, r.absolute());
    return msg;
}

CumulativeAlarm batch_alarms(const std::vector<DetectorAlarm>& alarms) {
    if (alarms.empty()) throw EmptyBatch();
    CumulativeAlarm out;
    out.connector_id = alarms.front().connector_id;
    out.entries.reserve(alarms.size());
    for (const DetectorAlarm& a : alarms) {
        if (a.connector_id != out.connector_id) throw MixedConnector();
        out.entries.emplace_back(a.failed_station, a.failed_qos);
    }
    return out;
}

}  // namespace qrs::wire
