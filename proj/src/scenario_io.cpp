#include "qrs/scenario_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace qrs::scenario_io {

namespace {

using netsim::ScenarioInvalid;

struct Diag {
    const std::string* name;
    int line = 0;
    std::string section = "(none)";

    [[noreturn]] void fail(const std::string& msg) const {
        throw ScenarioInvalid(*name + ":" + std::to_string(line) + ": [" + section + "] " + msg);
    }
};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

std::uint64_t parse_u64(const Diag& d, const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        d.fail("key '" + key + "' expects an unsigned integer, got '" + text + "'");
    return v;
}

double parse_f64(const Diag& d, const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        d.fail("key '" + key + "' expects a number, got '" + text + "'");
    }
}

bool parse_bool(const Diag& d, const std::string& key, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    d.fail("key '" + key + "' expects true/false, got '" + text + "'");
}

// key=value tokens after an entry keyword; bare flags map to empty values.
std::map<std::string, std::string> kv_fields(const Diag& d, const std::vector<std::string>& toks,
                                             std::size_t from) {
    std::map<std::string, std::string> out;
    for (std::size_t i = from; i < toks.size(); ++i) {
        const std::string& tok = toks[i];
        std::size_t eq = tok.find('=');
        std::string key = eq == std::string::npos ? tok : tok.substr(0, eq);
        std::string val = eq == std::string::npos ? "" : tok.substr(eq + 1);
        if (key.empty()) d.fail("malformed token '" + tok + "'");
        if (!out.emplace(key, val).second) d.fail("duplicate key '" + key + "'");
    }
    return out;
}

std::string take(const Diag& d, std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) d.fail("missing key '" + key + "'");
    std::string v = it->second;
    kv.erase(it);
    return v;
}

void reject_leftovers(const Diag& d, const std::map<std::string, std::string>& kv) {
    if (!kv.empty()) d.fail("unknown key '" + kv.begin()->first + "'");
}

}  // namespace

netsim::Scenario parse(std::istream& in, const std::string& name) {
    netsim::Scenario sc;
    Diag d{&name};
    bool saw_topology = false, saw_sim = false, saw_horizon = false;

    std::string raw;
    while (std::getline(in, raw)) {
        ++d.line;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;

        if (line.front() == '[') {
            if (line.back() != ']') d.fail("malformed section header '" + line + "'");
            std::string section = line.substr(1, line.size() - 2);
            if (section != "topology" && section != "flows" && section != "failures" &&
                section != "sim")
                d.fail("unknown section '" + section + "'");
            d.section = section;
            if (section == "topology") saw_topology = true;
            if (section == "sim") saw_sim = true;
            continue;
        }

        if (d.section == "(none)") d.fail("content before any section header");

        auto toks = split_ws(line);
        if (d.section == "topology") {
            if (toks[0] == "station") {
                auto kv = kv_fields(d, toks, 1);
                Station st;
                st.id = static_cast<StationId>(parse_u64(d, "id", take(d, kv, "id")));
                std::string kind = take(d, kv, "kind");
                if (kind == "host")
                    st.kind = StationKind::host;
                else if (kind == "router")
                    st.kind = StationKind::router;
                else
                    d.fail("key 'kind' expects host|router, got '" + kind + "'");
                st.capacity_bps = parse_u64(d, "capacity_bps", take(d, kv, "capacity_bps"));
                st.available_bps = st.capacity_bps;
                reject_leftovers(d, kv);
                sc.topology.stations.push_back(st);
            } else if (toks[0] == "link") {
                auto kv = kv_fields(d, toks, 1);
                Link l;
                l.a = static_cast<StationId>(parse_u64(d, "a", take(d, kv, "a")));
                l.b = static_cast<StationId>(parse_u64(d, "b", take(d, kv, "b")));
                l.bandwidth_bps = parse_u64(d, "bandwidth_bps", take(d, kv, "bandwidth_bps"));
                l.prop_delay_s = parse_f64(d, "prop_delay_s", take(d, kv, "prop_delay_s"));
                l.queue_capacity =
                    static_cast<std::uint32_t>(parse_u64(d, "queue_pkts", take(d, kv, "queue_pkts")));
                reject_leftovers(d, kv);
                sc.topology.links.push_back(l);
            } else {
                d.fail("expected 'station' or 'link' entry, got '" + toks[0] + "'");
            }
        } else if (d.section == "flows") {
            if (toks[0] != "flow") d.fail("expected 'flow' entry, got '" + toks[0] + "'");
            auto kv = kv_fields(d, toks, 1);
            netsim::FlowDef f;
            f.sender = static_cast<StationId>(parse_u64(d, "sender", take(d, kv, "sender")));
            f.receiver = static_cast<StationId>(parse_u64(d, "receiver", take(d, kv, "receiver")));
            f.spec.rate_bps = parse_u64(d, "rate_bps", take(d, kv, "rate_bps"));
            f.pkt_bytes = static_cast<std::uint32_t>(parse_u64(d, "pkt_bytes", take(d, kv, "pkt_bytes")));
            f.start_s = parse_f64(d, "start_s", take(d, kv, "start_s"));
            f.stop_s = parse_f64(d, "stop_s", take(d, kv, "stop_s"));
            if (auto it = kv.find("compound_deps"); it != kv.end()) {
                std::string list = it->second;
                kv.erase(it);
                std::size_t pos = 0;
                while (pos < list.size()) {
                    std::size_t comma = list.find(',', pos);
                    std::string item = list.substr(pos, comma == std::string::npos ? std::string::npos
                                                                                   : comma - pos);
                    f.compound_deps.push_back(
                        static_cast<std::uint32_t>(parse_u64(d, "compound_deps", item)));
                    if (comma == std::string::npos) break;
                    pos = comma + 1;
                }
            }
            reject_leftovers(d, kv);
            // Video-stream defaults for fields the format omits.
            f.spec.burst_bytes = f.pkt_bytes;
            f.spec.jitter_bound_us = 5000;
            f.spec.priority = Priority::streaming;
            sc.flows.push_back(std::move(f));
        } else if (d.section == "failures") {
            if (toks[0] != "fail") d.fail("expected 'fail' entry, got '" + toks[0] + "'");
            auto kv = kv_fields(d, toks, 1);
            netsim::FailureDef fd;
            fd.time_s = parse_f64(d, "time_s", take(d, kv, "time_s"));
            fd.station = static_cast<StationId>(parse_u64(d, "station", take(d, kv, "station")));
            bool down = kv.count("down") > 0;
            bool degraded = kv.count("available_bps") > 0;
            if (down == degraded)
                d.fail("exactly one of 'available_bps=N' or 'down' is required");
            if (down) {
                kv.erase("down");
                fd.down = true;
            } else {
                fd.new_available_bps = parse_u64(d, "available_bps", take(d, kv, "available_bps"));
            }
            reject_leftovers(d, kv);
            sc.failures.push_back(fd);
        } else {  // sim
            std::size_t eq = line.find('=');
            if (eq == std::string::npos) d.fail("expected 'key = value', got '" + line + "'");
            std::string key = trim(line.substr(0, eq));
            std::string val = trim(line.substr(eq + 1));
            if (key == "mode") {
                if (val == "baseline")
                    sc.mode = netsim::Mode::baseline;
                else if (val == "proposed")
                    sc.mode = netsim::Mode::proposed;
                else
                    d.fail("key 'mode' expects baseline|proposed, got '" + val + "'");
            } else if (key == "seed") {
                sc.seed = parse_u64(d, key, val);
            } else if (key == "horizon_s") {
                sc.horizon_s = parse_f64(d, key, val);
                saw_horizon = true;
            } else if (key == "batching") {
                sc.batching = parse_bool(d, key, val);
            } else if (key == "k_alternatives") {
                sc.k_alternatives = static_cast<std::uint32_t>(parse_u64(d, key, val));
            } else if (key == "tr_s") {
                sc.tr_s = parse_f64(d, key, val);
            } else if (key == "baseline_recovery_delay_s") {
                sc.baseline_recovery_delay_s = parse_f64(d, key, val);
            } else {
                d.fail("unknown key '" + key + "'");
            }
        }
    }

    d.line += 1;
    if (!saw_topology) {
        d.section = "topology";
        d.fail("missing [topology] section");
    }
    if (!saw_sim) {
        d.section = "sim";
        d.fail("missing [sim] section");
    }
    if (!saw_horizon) {
        d.section = "sim";
        d.fail("missing key 'horizon_s'");
    }
    netsim::validate_scenario(sc);
    return sc;
}

netsim::Scenario load_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open scenario file " + file);
    return parse(in, file);
}

}  // namespace qrs::scenario_io
