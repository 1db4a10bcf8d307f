#include "qrs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qrs::metrics {

InsufficientData::InsufficientData()
    : std::runtime_error("InsufficientData: jitter needs at least two delivered packets") {}

JitterResult delay_jitter(const std::vector<double>& delays) {
    if (delays.size() < 2) throw InsufficientData();
    JitterResult out;
    out.series.reserve(delays.size() - 1);
    double sum = 0.0;
    for (std::size_t i = 1; i < delays.size(); ++i) {
        double j = std::abs(delays[i] - delays[i - 1]);
        out.series.push_back(j);
        sum += j;
    }
    out.mean = sum / static_cast<double>(out.series.size());
    return out;
}

namespace {

struct FlowInfo {
    double start = 0.0;
    double stop = 0.0;
    std::vector<std::uint32_t> deps;
};

struct EffState {
    // Station physical state; absent service rate means healthy.
    std::map<std::uint32_t, std::uint64_t> service_rate;
    std::set<std::uint32_t> down;
    std::map<std::uint32_t, std::uint64_t> reserved;
    std::map<std::uint32_t, bool> res_active;
    std::map<std::uint32_t, std::vector<std::uint32_t>> path;

    bool held(std::uint32_t stream) const {
        auto act = res_active.find(stream);
        if (act == res_active.end() || !act->second) return false;
        auto p = path.find(stream);
        if (p == path.end()) return false;
        for (std::uint32_t s : p->second) {
            if (down.count(s)) return false;
            auto sr = service_rate.find(s);
            if (sr != service_rate.end()) {
                auto rs = reserved.find(s);
                std::uint64_t load = rs == reserved.end() ? 0 : rs->second;
                if (sr->second < load) return false;
            }
        }
        return true;
    }
};

std::size_t bucket_of(double t, std::size_t nbuckets) {
    if (nbuckets == 0) return 0;
    auto b = static_cast<std::size_t>(std::max(0.0, std::floor(t)));
    return std::min(b, nbuckets - 1);
}

}  // namespace

MetricsReport finalize(const trace::Trace& tr) {
    MetricsReport rep;
    std::map<std::uint32_t, FlowInfo> flows;
    std::map<std::uint32_t, std::vector<double>> delays;
    std::map<std::uint32_t, std::vector<double>> delivery_times;
    std::map<std::uint32_t, double> held_s, service_s;

    for (const trace::Record& r : tr.records) {
        if (r.kind == trace::Kind::run_header) {
            rep.mode = r.a;
            rep.batching = r.b != 0;
            rep.seed = r.v;
            rep.horizon_s = r.d;
        } else if (r.kind == trace::Kind::flow_start) {
            FlowInfo fi;
            fi.start = r.t;
            fi.stop = r.d;
            fi.deps = r.path;
            flows[r.a] = fi;
            rep.streams[r.a];  // make the stream visible even if it never sends
        }
    }
    std::size_t nbuckets = static_cast<std::size_t>(std::ceil(rep.horizon_s));
    if (nbuckets == 0) nbuckets = 1;
    rep.loss_series.assign(nbuckets, 0);
    std::vector<std::uint64_t> res_attempts(nbuckets, 0), res_success(nbuckets, 0);
    std::vector<double> jit_sum(nbuckets, 0.0);
    std::vector<std::uint64_t> jit_cnt(nbuckets, 0);

    struct Injection {
        double t;
        std::uint32_t station;
        bool detected = false;
    };
    std::vector<Injection> injections;

    EffState eff;
    double last_t = 0.0;
    auto advance = [&](double to) {
        if (to <= last_t) return;
        for (const auto& [stream, fi] : flows) {
            double lo = std::max(fi.start, last_t);
            double hi = std::min({fi.stop, rep.horizon_s, to});
            if (hi <= lo) continue;
            service_s[stream] += hi - lo;
            if (eff.held(stream)) held_s[stream] += hi - lo;
        }
        last_t = to;
    };

    std::uint64_t type4_msgs = 0, type5_msgs = 0, repin_recoveries = 0;

    for (const trace::Record& r : tr.records) {
        advance(r.t);
        StreamMetrics* sm = nullptr;
        if (auto it = rep.streams.find(r.a); it != rep.streams.end()) sm = &it->second;
        switch (r.kind) {
            case trace::Kind::run_header:
            case trace::Kind::flow_start:
            case trace::Kind::flow_end:
                break;
            case trace::Kind::packet_generated:
                if (sm) ++sm->generated;
                break;
            case trace::Kind::packet_delivered:
                if (sm) {
                    ++sm->delivered;
                    double delay = r.t - r.d;
                    delays[r.a].push_back(delay);
                    delivery_times[r.a].push_back(r.t);
                }
                break;
            case trace::Kind::packet_dropped: {
                if (!sm) break;
                ++sm->dropped;
                if (static_cast<trace::DropCause>(r.c) == trace::DropCause::queue_full)
                    ++sm->drop_queue;
                else
                    ++sm->drop_station;
                std::size_t b = bucket_of(r.t, nbuckets);
                rep.loss_series[b] += 1;
                auto& per = rep.loss_series_streams[r.a];
                if (per.empty()) per.assign(nbuckets, 0);
                per[b] += 1;
                // Lost bits of a compound service that was not fully reserved.
                auto fit = flows.find(r.a);
                if (fit != flows.end() && !fit->second.deps.empty()) {
                    bool fully = eff.res_active.count(r.a) && eff.res_active.at(r.a);
                    for (std::uint32_t dep : fit->second.deps) {
                        auto dit = eff.res_active.find(dep);
                        if (dit == eff.res_active.end() || !dit->second) fully = false;
                    }
                    if (!fully) sm->compound_lost_bits += r.w * 8;
                }
                break;
            }
            case trace::Kind::reserve_attempt: {
                std::size_t b = bucket_of(r.t, nbuckets);
                ++res_attempts[b];
                if (r.c) ++res_success[b];
                break;
            }
            case trace::Kind::debit_delta: {
                auto& sum = eff.reserved[r.b];
                if (r.c)
                    sum += r.v;
                else
                    sum = sum >= r.v ? sum - r.v : 0;
                break;
            }
            case trace::Kind::failure_injected:
                ++rep.injected_failures;
                injections.push_back({r.t, r.b});
                if (r.c) {
                    eff.down.insert(r.b);
                } else {
                    eff.down.erase(r.b);
                    eff.service_rate[r.b] = r.v;
                }
                break;
            case trace::Kind::alarm_entry: {
                ++rep.alarm_entries;
                // Credit the most recent injection on this station.
                for (auto it = injections.rbegin(); it != injections.rend(); ++it) {
                    if (it->station == r.b && it->t <= r.t) {
                        it->detected = true;
                        break;
                    }
                }
                break;
            }
            case trace::Kind::episode_opened:
                ++rep.episodes_opened;
                break;
            case trace::Kind::episode_closed:
                break;
            case trace::Kind::recovery_completed:
                ++rep.recovered_paths;
                if (sm) ++sm->recovered_paths;
                if (r.c == 0) ++repin_recoveries;
                break;
            case trace::Kind::path_changed:
                eff.path[r.a] = r.path;
                break;
            case trace::Kind::message_sent:
                ++rep.total_messages;
                if (r.c) ++rep.transit_messages;
                if (r.b == 4) ++type4_msgs;
                if (r.b == 5) ++type5_msgs;
                break;
            case trace::Kind::reservation_active:
                eff.res_active[r.a] = true;
                break;
            case trace::Kind::reservation_released:
                eff.res_active[r.a] = false;
                break;
            case trace::Kind::audit_violation:
                ++rep.audit_violations;
                break;
        }
    }
    advance(rep.horizon_s);

    for (const Injection& inj : injections)
        if (inj.detected) ++rep.detected_failures;

    // Per-stream delay and jitter.
    double all_delay_sum = 0.0;
    std::uint64_t all_delay_cnt = 0;
    double all_jitter_sum = 0.0;
    std::uint64_t all_jitter_cnt = 0;
    for (auto& [stream, sm] : rep.streams) {
        auto dit = delays.find(stream);
        if (dit != delays.end() && !dit->second.empty()) {
            const auto& ds = dit->second;
            double sum = 0.0, mx = 0.0;
            for (double d : ds) {
                sum += d;
                mx = std::max(mx, d);
            }
            sm.delay_mean = sum / static_cast<double>(ds.size());
            sm.delay_max = mx;
            sm.delay_defined = true;
            all_delay_sum += sum;
            all_delay_cnt += ds.size();
            if (ds.size() >= 2) {
                JitterResult jr = delay_jitter(ds);
                sm.jitter_mean = jr.mean;
                sm.jitter_pairs = jr.series.size();
                rep.jitter_series[stream] = jr.series;
                const auto& times = delivery_times[stream];
                for (std::size_t i = 0; i < jr.series.size(); ++i) {
                    std::size_t b = bucket_of(times[i + 1], nbuckets);
                    jit_sum[b] += jr.series[i];
                    jit_cnt[b] += 1;
                }
                for (double j : jr.series) all_jitter_sum += j;
                all_jitter_cnt += jr.series.size();
            }
        }
        auto svc = service_s.find(stream);
        double svc_sec = svc == service_s.end() ? 0.0 : svc->second;
        double held_sec = held_s.count(stream) ? held_s.at(stream) : 0.0;
        sm.efficiency = Ratio::of(held_sec, svc_sec);
    }

    rep.jitter_bucket_mean.assign(nbuckets, 0.0);
    for (std::size_t b = 0; b < nbuckets; ++b)
        if (jit_cnt[b]) rep.jitter_bucket_mean[b] = jit_sum[b] / static_cast<double>(jit_cnt[b]);

    rep.reservation_success_series.reserve(nbuckets);
    for (std::size_t b = 0; b < nbuckets; ++b)
        rep.reservation_success_series.push_back(
            Ratio::of(static_cast<double>(res_success[b]), static_cast<double>(res_attempts[b])));

    // Aggregate stream counters.
    double total_held = 0.0, total_service = 0.0;
    for (const auto& [stream, sm] : rep.streams) {
        rep.all.generated += sm.generated;
        rep.all.delivered += sm.delivered;
        rep.all.dropped += sm.dropped;
        rep.all.drop_queue += sm.drop_queue;
        rep.all.drop_station += sm.drop_station;
        rep.all.compound_lost_bits += sm.compound_lost_bits;
        rep.all.recovered_paths += sm.recovered_paths;
    }
    for (const auto& [stream, s] : service_s) total_service += s;
    for (const auto& [stream, h] : held_s) total_held += h;
    if (all_delay_cnt) {
        rep.all.delay_mean = all_delay_sum / static_cast<double>(all_delay_cnt);
        rep.all.delay_defined = true;
        for (const auto& [stream, sm] : rep.streams)
            rep.all.delay_max = std::max(rep.all.delay_max, sm.delay_max);
    }
    if (all_jitter_cnt) {
        rep.all.jitter_mean = all_jitter_sum / static_cast<double>(all_jitter_cnt);
        rep.all.jitter_pairs = all_jitter_cnt;
    }
    rep.all.efficiency = Ratio::of(total_held, total_service);
    rep.efficiency = rep.all.efficiency;

    rep.detector_utilization = Ratio::of(static_cast<double>(rep.detected_failures),
                                         static_cast<double>(rep.injected_failures));
    rep.connector_utilization = Ratio::of(static_cast<double>(repin_recoveries),
                                          static_cast<double>(rep.alarm_entries));
    rep.analyzer_utilization =
        Ratio::of(static_cast<double>(type5_msgs), static_cast<double>(type4_msgs));
    return rep;
}

}  // namespace qrs::metrics
