// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit code = number of failures.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "qrs/analyzer.hpp"
#include "qrs/cli.hpp"
#include "qrs/netsim.hpp"
#include "qrs/reservation.hpp"
#include "qrs/routing.hpp"
#include "qrs/scenario_io.hpp"
#include "qrs/wire.hpp"

using namespace qrs;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

netsim::Scenario load_scenario(const std::string& name) {
    return scenario_io::load_file(std::string(QRS_SCENARIO_DIR) + "/" + name);
}

netsim::RunResult run_mode(netsim::Scenario sc, netsim::Mode mode) {
    sc.mode = mode;
    return netsim::run(sc);
}

std::uint64_t g_audit_violations = 0;
void note_audit(const netsim::RunResult& r) { g_audit_violations += r.audit_violations; }

// ---- criterion 1: codec soundness -----------------------------------------

Outcome codec_soundness() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(0xC0DEC);
    std::size_t per_variant[9] = {0};
    for (int i = 0; i < 10'000; ++i) {
        wire::Message m = oracle::random_message(rng);
        per_variant[m.index()] += 1;
        auto bytes = wire::encode(m);
        wire::Message back = wire::decode(bytes);
        if (!(back == m)) return {false, "round-trip mismatch at iteration " + std::to_string(i)};
    }
    for (int v = 0; v < 9; ++v)
        if (per_variant[v] == 0) return {false, "variant " + std::to_string(v + 1) + " never generated"};

    std::size_t named_errors = 0;
    for (int i = 0; i < 5'000; ++i) {
        wire::Message m = oracle::random_message(rng);
        auto bytes = wire::encode(m);
        std::size_t pos = rng() % bytes.size();
        bytes[pos] ^= static_cast<std::uint8_t>(1 + rng() % 255);
        try {
            (void)wire::decode(bytes);
        } catch (const wire::DecodeError&) {
            ++named_errors;
        } catch (...) {
            return {false, "fuzzed frame escaped with an unnamed error"};
        }
        // Truncation and padding must also resolve to named errors.
        auto shorter = wire::encode(m);
        shorter.pop_back();
        try {
            (void)wire::decode(shorter);
            return {false, "truncated frame decoded"};
        } catch (const wire::DecodeError&) {
        }
    }
    double dt = seconds_since(t0);
    if (dt >= 10.0) return {false, "took " + std::to_string(dt) + " s (budget 10 s)"};
    std::ostringstream os;
    os << "10000 round trips, 5000 corruptions (" << named_errors << " rejected), "
       << "5000 truncations, " << dt << " s";
    return {true, os.str()};
}

// ---- criterion 2: conservation audit ---------------------------------------

Outcome conservation_audit() {
    // Collected from every simulation this suite performs plus a dedicated
    // sweep here; the engine audits the ledger after every event.
    std::vector<std::string> names{"default.scn", "default_nofail.scn", "single_recovery.scn",
                                   "cumulative.scn"};
    std::uint64_t events_audited = 0;
    for (const auto& name : names) {
        for (auto mode : {netsim::Mode::baseline, netsim::Mode::proposed}) {
            auto res = run_mode(load_scenario(name), mode);
            note_audit(res);
            events_audited += res.trace.records.size();
            if (res.audit_violations != 0)
                return {false, name + " reported ledger violations"};
        }
    }
    // A down-failure variant exercises rebuild accounting.
    netsim::Scenario down = load_scenario("default.scn");
    down.failures[0].down = true;
    down.failures[0].new_available_bps = 0;
    for (auto mode : {netsim::Mode::baseline, netsim::Mode::proposed}) {
        auto res = run_mode(down, mode);
        note_audit(res);
        if (res.audit_violations != 0) return {false, "down-failure variant violated the ledger"};
    }
    if (g_audit_violations != 0)
        return {false, std::to_string(g_audit_violations) + " violations accumulated"};
    return {true, "zero violations across the scenario sweep (" +
                      std::to_string(events_audited) + " traced events)"};
}

// ---- criterion 3: diff oracle ----------------------------------------------

Outcome diff_oracle() {
    auto paths = oracle::all_sequences(4, 4);  // loop-free, so length caps at 4 ids
    std::size_t pairs = 0;
    for (const Path& a : paths) {
        for (const Path& b : paths) {
            if (!(analyzer::diff_paths(a, b) == oracle::diff_reference(a, b)))
                return {false, "mismatch for a pair of length " + std::to_string(a.size()) + "/" +
                                   std::to_string(b.size())};
            ++pairs;
        }
    }
    return {true, std::to_string(pairs) + " exhaustive path pairs matched"};
}

// ---- criterion 4: alternative-path oracle ----------------------------------

Outcome alternatives_oracle() {
    std::mt19937_64 rng(0xA17E57);
    int graphs = 0, comparisons = 0;
    while (graphs < 200) {
        std::uint32_t n = 4 + static_cast<std::uint32_t>(rng() % 5);
        Topology topo = oracle::random_connected_topology(rng, n, n);
        ++graphs;
        StationId src = static_cast<StationId>(rng() % n);
        StationId dst = static_cast<StationId>(rng() % n);
        if (src == dst) continue;
        Path old;
        try {
            old = routing::shortest_path(topo, src, dst);
        } catch (const routing::Unreachable&) {
            continue;
        }
        for (std::size_t pos = 0; pos < old.size(); ++pos) {
            StationId failed = old.stations[pos];
            auto expected = oracle::enumerate_paths(topo, src, dst, {failed}, 4);
            std::vector<Path> got;
            try {
                got = routing::alternative_paths(topo, old, failed, 4);
            } catch (const routing::NoAlternativePath&) {
            }
            if (!(got == expected))
                return {false, "graph " + std::to_string(graphs) + " disagreed with enumeration"};
            ++comparisons;
        }
    }
    return {true, "200 random graphs, " + std::to_string(comparisons) + " failure cases matched"};
}

// ---- criterion 5: recovery comparison --------------------------------------

Outcome recovery_comparison() {
    auto t0 = std::chrono::steady_clock::now();
    netsim::Scenario sc = load_scenario("default.scn");
    auto base = run_mode(sc, netsim::Mode::baseline);
    auto prop = run_mode(sc, netsim::Mode::proposed);
    note_audit(base);
    note_audit(prop);
    double dt = seconds_since(t0);

    double eff_base = base.report.efficiency.value;
    double eff_prop = prop.report.efficiency.value;
    std::uint64_t loss_base = base.report.all.dropped;
    std::uint64_t loss_prop = prop.report.all.dropped;

    std::ostringstream os;
    os << "efficiency " << eff_prop * 100 << " % vs " << eff_base * 100 << " %, loss " << loss_prop
       << " vs " << loss_base << ", " << dt << " s";
    if (eff_prop - eff_base < 0.20) return {false, "efficiency gap below 20 points: " + os.str()};
    if (!(static_cast<double>(loss_prop) < 0.5 * static_cast<double>(loss_base)))
        return {false, "loss not halved: " + os.str()};
    if (dt >= 60.0) return {false, "runtime budget exceeded: " + os.str()};
    return {true, os.str()};
}

// ---- criterion 6: rerouting state -------------------------------------------

Outcome rerouting_state() {
    // One failure, one affected flow: exactly one recovered path.
    auto single = run_mode(load_scenario("single_recovery.scn"), netsim::Mode::proposed);
    note_audit(single);
    if (single.report.recovered_paths != 1)
        return {false, "single-flow scenario recovered " +
                           std::to_string(single.report.recovered_paths) + " paths"};

    // One failure hitting all fifteen flows: exactly one recovery per flow.
    auto wide = run_mode(load_scenario("default.scn"), netsim::Mode::proposed);
    note_audit(wide);
    for (const auto& [stream, sm] : wide.report.streams)
        if (sm.recovered_paths != 1)
            return {false, "stream " + std::to_string(stream) + " recovered " +
                               std::to_string(sm.recovered_paths) + " times"};

    // The baseline shows none before its convergence delay.
    auto base_degraded = run_mode(load_scenario("default.scn"), netsim::Mode::baseline);
    note_audit(base_degraded);
    if (base_degraded.report.recovered_paths != 0)
        return {false, "baseline recovered from a degradation it cannot see"};

    netsim::Scenario down = load_scenario("default.scn");
    down.failures[0].down = true;
    down.failures[0].new_available_bps = 0;
    auto base_down = run_mode(down, netsim::Mode::baseline);
    note_audit(base_down);
    double earliest = 1e30;
    for (const auto& r : base_down.trace.records)
        if (r.kind == trace::Kind::recovery_completed) earliest = std::min(earliest, r.t);
    if (earliest < down.failures[0].time_s + down.baseline_recovery_delay_s - 1e-9)
        return {false, "baseline recovered before its convergence delay"};

    std::ostringstream os;
    os << "1 failure/1 flow -> 1 event; 1 failure/15 flows -> one event each; baseline earliest "
       << (earliest > 1e29 ? std::string("never") : std::to_string(earliest) + " s");
    return {true, os.str()};
}

// ---- criterion 7: jitter non-degradation ------------------------------------

Outcome jitter_comparison() {
    netsim::Scenario quiet = load_scenario("default_nofail.scn");
    auto qb = run_mode(quiet, netsim::Mode::baseline);
    auto qp = run_mode(quiet, netsim::Mode::proposed);
    note_audit(qb);
    note_audit(qp);
    double jb = qb.report.all.jitter_mean;
    double jp = qp.report.all.jitter_mean;
    if (!(jp <= 1.05 * jb + 1e-12))
        return {false, "no-failure jitter " + std::to_string(jp) + " vs " + std::to_string(jb)};

    netsim::Scenario faulty = load_scenario("default.scn");
    auto fb = run_mode(faulty, netsim::Mode::baseline);
    auto fp = run_mode(faulty, netsim::Mode::proposed);
    note_audit(fb);
    note_audit(fp);
    double fjb = fb.report.all.jitter_mean;
    double fjp = fp.report.all.jitter_mean;
    if (!(fjp <= fjb))
        return {false, "failure-scenario jitter " + std::to_string(fjp) + " vs " +
                           std::to_string(fjb)};
    std::ostringstream os;
    os << "no-failure " << jp << " vs " << jb << " s; with failure " << fjp << " vs " << fjb
       << " s";
    return {true, os.str()};
}

// ---- criterion 8: cumulative messaging --------------------------------------

Outcome cumulative_messaging() {
    netsim::Scenario sc = load_scenario("cumulative.scn");
    if (sc.failures.size() < 2) return {false, "scenario lost its two failures"};
    netsim::Scenario plain = sc;
    plain.batching = false;
    netsim::Scenario batched = sc;
    batched.batching = true;
    auto rp = run_mode(plain, netsim::Mode::proposed);
    auto rb = run_mode(batched, netsim::Mode::proposed);
    note_audit(rp);
    note_audit(rb);

    std::ostringstream os;
    os << "messages " << rb.report.total_messages << " (batched) vs " << rp.report.total_messages
       << ", recoveries " << rb.report.recovered_paths << "/" << rp.report.recovered_paths
       << ", loss " << rb.report.all.dropped << "/" << rp.report.all.dropped;
    if (!(rb.report.total_messages < rp.report.total_messages))
        return {false, "batching did not reduce messages: " + os.str()};
    if (rb.report.recovered_paths != rp.report.recovered_paths)
        return {false, "recovered-path count changed: " + os.str()};
    if (rb.report.all.dropped != rp.report.all.dropped)
        return {false, "loss totals changed: " + os.str()};
    return {true, os.str()};
}

// ---- criterion 9: compound-service atomicity --------------------------------

Outcome compound_atomicity() {
    std::mt19937_64 rng(0xC09B0D);
    int attempts = 0, failures_seen = 0;
    for (int round = 0; round < 300; ++round) {
        std::uint32_t n = 5 + static_cast<std::uint32_t>(rng() % 4);
        Topology topo = oracle::random_connected_topology(rng, n, n / 2);
        for (Station& st : topo.stations) {
            st.capacity_bps = 500'000 + rng() % 2'000'000;
            st.available_bps = st.capacity_bps;
        }
        reservation::ReservationEngine eng(topo);

        reservation::CompoundService svc;
        std::uint32_t members = 2 + static_cast<std::uint32_t>(rng() % 4);
        bool force_infeasible = rng() % 2 == 0;
        for (std::uint32_t m = 0; m <= members; ++m) {
            StationId a = static_cast<StationId>(rng() % n);
            StationId b = static_cast<StationId>(rng() % n);
            if (a == b) b = (b + 1) % n;
            Path p;
            try {
                p = routing::shortest_path(topo, a, b);
            } catch (const routing::Unreachable&) {
                continue;
            }
            FlowSpec fs{100'000 + rng() % 400'000, 1000, 5000, Priority::streaming};
            if (force_infeasible && m == members / 2) fs.rate_bps = 50'000'000;  // mid-chain reject
            if (m == members)
                svc.root = {1000 + m, p, fs};
            else
                svc.dependencies.push_back({1000 + m, p, fs});
        }
        if (svc.root.path.empty()) continue;
        ++attempts;
        auto failure = eng.reserve_compound(svc);
        if (failure) {
            ++failures_seen;
            for (const auto& dep : svc.dependencies)
                if (eng.has_active(dep.stream_id))
                    return {false, "failed compound left a dependency active"};
            if (eng.has_active(svc.root.stream_id))
                return {false, "failed compound left its root active"};
            for (const Station& st : topo.stations)
                if (st.available_bps != st.capacity_bps)
                    return {false, "residual debit at station " + std::to_string(st.id)};
        }
        if (!eng.audit().empty()) return {false, "ledger audit failed after a compound attempt"};
    }
    if (failures_seen < 50)
        return {false, "forced-failure sample too small: " + std::to_string(failures_seen)};
    return {true, std::to_string(attempts) + " compound attempts, " +
                      std::to_string(failures_seen) + " forced failures, zero residue"};
}

// ---- criterion 10: determinism ----------------------------------------------

Outcome determinism() {
    auto t0 = std::chrono::steady_clock::now();
    fs::path dir = fs::temp_directory_path() / "qrs_acceptance_det";
    fs::remove_all(dir);

    cli::RunArgs args;
    args.scenario_file = std::string(QRS_SCENARIO_DIR) + "/default.scn";
    args.seed = 17;
    args.quiet = true;
    args.out_dir = (dir / "a").string();
    if (cli::cmd_run(args) != 0) return {false, "first cmd_run failed"};
    args.out_dir = (dir / "b").string();
    if (cli::cmd_run(args) != 0) return {false, "second cmd_run failed"};
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    std::string a = slurp(dir / "a" / "metrics.csv");
    std::string b = slurp(dir / "b" / "metrics.csv");
    fs::remove_all(dir);
    if (a.empty() || a != b) return {false, "metrics.csv differs between identical invocations"};

    netsim::Scenario sc = load_scenario("default.scn");
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        sc.seed = seed;
        auto rb = run_mode(sc, netsim::Mode::baseline);
        auto rp = run_mode(sc, netsim::Mode::proposed);
        note_audit(rb);
        note_audit(rp);
    }
    double dt = seconds_since(t0);
    if (dt >= 300.0) return {false, "10 seeds x 2 modes took " + std::to_string(dt) + " s"};
    return {true, "byte-identical outputs; 10 seeds x 2 modes in " + std::to_string(dt) + " s"};
}

}  // namespace

int main() {
    struct Criterion {
        int number;
        const char* name;
        std::function<Outcome()> check;
    };
    std::vector<Criterion> criteria{
        {1, "codec soundness", codec_soundness},
        {2, "conservation audit", conservation_audit},
        {3, "path diff equals the positional oracle", diff_oracle},
        {4, "alternative paths equal exhaustive enumeration", alternatives_oracle},
        {5, "recovery comparison (efficiency and loss)", recovery_comparison},
        {6, "rerouting state (one recovery per failed flow)", rerouting_state},
        {7, "jitter non-degradation", jitter_comparison},
        {8, "cumulative messaging", cumulative_messaging},
        {9, "compound-service atomicity", compound_atomicity},
        {10, "determinism", determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        Outcome outcome;
        try {
            outcome = c.check();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %2d: %s - %s\n", outcome.pass ? "PASS" : "FAIL", c.number,
                    c.name, outcome.detail.c_str());
        std::fflush(stdout);
        if (!outcome.pass) ++failures;
    }
    if (failures == 0)
        std::printf("all %zu acceptance criteria hold\n", criteria.size());
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures;
}
