#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "qrs/cli.hpp"

using namespace qrs;
namespace fs = std::filesystem;

namespace {

std::string scenario_path(const std::string& name) {
    return std::string(QRS_SCENARIO_DIR) + "/" + name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("qrs_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("cmd_run writes metrics, summary, and optional trace") {
    TempDir dir("run");
    cli::RunArgs args;
    args.quiet = true;
    args.scenario_file = scenario_path("single_recovery.scn");
    args.out_dir = (dir.path / "out").string();
    args.dump_trace = true;
    CHECK(cli::cmd_run(args) == 0);
    CHECK(fs::exists(dir.path / "out" / "metrics.csv"));
    CHECK(fs::exists(dir.path / "out" / "summary.txt"));
    CHECK(fs::exists(dir.path / "out" / "trace.bin"));
    std::string csv = slurp(dir.path / "out" / "metrics.csv");
    CHECK(csv.rfind("time_bucket_s,metric_name,stream_id,value,denominator_flag\n", 0) == 0);
    CHECK(csv.find("recovered_paths,ALL,1,") != std::string::npos);
}

TEST_CASE("two invocations with one seed emit identical bytes") {
    TempDir dir("det");
    cli::RunArgs args;
    args.quiet = true;
    args.scenario_file = scenario_path("default.scn");
    args.seed = 5;
    args.out_dir = (dir.path / "a").string();
    REQUIRE(cli::cmd_run(args) == 0);
    args.out_dir = (dir.path / "b").string();
    REQUIRE(cli::cmd_run(args) == 0);
    CHECK(slurp(dir.path / "a" / "metrics.csv") == slurp(dir.path / "b" / "metrics.csv"));
}

TEST_CASE("malformed scenarios exit 2 with diagnostics") {
    TempDir dir("bad");
    fs::path bad = dir.path / "bad.scn";
    // No [topology] section at all; the diagnostic must name it.
    std::ofstream(bad) << "[sim]\nhorizon_s = 5\n";
    cli::RunArgs args;
    args.quiet = true;
    args.scenario_file = bad.string();
    args.out_dir = (dir.path / "out").string();
    CHECK(cli::cmd_run(args) == 2);
}

TEST_CASE("missing scenario file exits 1") {
    cli::RunArgs args;
    args.quiet = true;
    args.scenario_file = "/nonexistent/qrs.scn";
    CHECK(cli::cmd_run(args) == 1);
}

TEST_CASE("QRS_OUT overrides the --out flag") {
    TempDir dir("env");
    fs::path env_dir = dir.path / "env_out";
    setenv("QRS_OUT", env_dir.string().c_str(), 1);
    cli::RunArgs args;
    args.quiet = true;
    args.scenario_file = scenario_path("single_recovery.scn");
    args.out_dir = (dir.path / "flag_out").string();
    int rc = cli::cmd_run(args);
    unsetenv("QRS_OUT");
    CHECK(rc == 0);
    CHECK(fs::exists(env_dir / "metrics.csv"));
    CHECK_FALSE(fs::exists(dir.path / "flag_out" / "metrics.csv"));
}

TEST_CASE("cmd_compare pairs both modes on one seed") {
    TempDir dir("cmp");
    cli::CompareArgs args;
    args.scenario_file = scenario_path("single_recovery.scn");
    args.out_dir = (dir.path / "out").string();
    REQUIRE(cli::cmd_compare(args) == 0);
    std::string csv = slurp(dir.path / "out" / "compare.csv");
    CHECK(csv.rfind("metric_name,stream_id,baseline,proposed,delta\n", 0) == 0);
    CHECK(csv.find("loss_count,ALL,") != std::string::npos);
    CHECK(csv.find("system_efficiency,ALL,") != std::string::npos);
    CHECK(csv.find("jitter_mean_s,ALL,") != std::string::npos);
    CHECK(fs::exists(dir.path / "out" / "metrics_baseline.csv"));
    CHECK(fs::exists(dir.path / "out" / "metrics_proposed.csv"));
}

TEST_CASE("compare on a no-failure scenario shows no loss delta") {
    TempDir dir("nofail");
    cli::CompareArgs args;
    args.scenario_file = scenario_path("default_nofail.scn");
    args.out_dir = (dir.path / "out").string();
    REQUIRE(cli::cmd_compare(args) == 0);
    std::string csv = slurp(dir.path / "out" / "compare.csv");
    CHECK(csv.find("loss_count,ALL,0,0,0\n") != std::string::npos);
}
