#include "qrs/trace.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace qrs::trace {

namespace {

constexpr char kFileMagic[4] = {'Q', 'R', 'S', 'T'};
constexpr std::uint8_t kFileVersion = 1;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

struct Cursor {
    const std::vector<std::uint8_t>* buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf->size()) throw std::runtime_error("trace: truncated input");
    }
    std::uint8_t u8() {
        need(1);
        return (*buf)[pos++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>((*buf)[pos] << 8 | (*buf)[pos + 1]);
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = v << 8 | (*buf)[pos + i];
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = v << 8 | (*buf)[pos + i];
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
};

}  // namespace

std::vector<std::uint8_t> serialize(const Trace& tr) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kFileMagic, kFileMagic + 4);
    out.push_back(kFileVersion);
    put_u64(out, tr.records.size());
    for (const Record& r : tr.records) {
        out.push_back(static_cast<std::uint8_t>(r.kind));
        put_f64(out, r.t);
        put_u32(out, r.a);
        put_u32(out, r.b);
        put_u32(out, r.c);
        put_u64(out, r.v);
        put_u64(out, r.w);
        put_f64(out, r.d);
        put_u16(out, static_cast<std::uint16_t>(r.path.size()));
        for (std::uint32_t id : r.path) put_u32(out, id);
    }
    return out;
}

Trace deserialize(const std::vector<std::uint8_t>& bytes) {
    Cursor c{&bytes};
    c.need(4);
    if (std::memcmp(bytes.data(), kFileMagic, 4) != 0)
        throw std::runtime_error("trace: bad magic");
    c.pos = 4;
    if (c.u8() != kFileVersion) throw std::runtime_error("trace: unsupported version");
    std::uint64_t count = c.u64();
    Trace tr;
    tr.records.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        Record r;
        r.kind = static_cast<Kind>(c.u8());
        r.t = c.f64();
        r.a = c.u32();
        r.b = c.u32();
        r.c = c.u32();
        r.v = c.u64();
        r.w = c.u64();
        r.d = c.f64();
        std::uint16_t n = c.u16();
        r.path.reserve(n);
        for (std::uint16_t j = 0; j < n; ++j) r.path.push_back(c.u32());
        tr.records.push_back(std::move(r));
    }
    return tr;
}

void save(const Trace& tr, const std::string& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("trace: cannot open " + file + " for writing");
    auto bytes = serialize(tr);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("trace: write failed for " + file);
}

Trace load(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("trace: cannot open " + file);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace qrs::trace
