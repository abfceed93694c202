#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sys/wait.h>

#include "henonmf/io.hpp"

using namespace henonmf;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("henonmf_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HENONMF_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

fs::path config_file(const fs::path& dir, const std::string& text) {
    write_atomic(dir / "config.json", text);
    return dir / "config.json";
}

}  // namespace

TEST(Cli, VersionAndUsage) {
    EXPECT_EQ(run_cli("--version"), 0);
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
}

TEST(Cli, AffinePressure) {
    const fs::path d = scratch_dir("pressure");
    ASSERT_EQ(run_cli("pressure --config " + std::string(HENONMF_CONFIGS) + "/affine.json --out " + (d / "out").string()),
              0);
    const json dim = read_json(d / "out" / "dimension.json");
    EXPECT_NEAR(dim.at("t_u").get<double>(), std::log(2.0) / std::log(3.0), 1e-6);
    const json m = read_json(d / "out" / "manifest.json");
    EXPECT_EQ(m.at("status"), "ok");
    EXPECT_EQ(m.at("command"), "pressure");
    EXPECT_TRUE(fs::exists(d / "out" / "pressure.csv"));
}

TEST(Cli, ConfigErrorsExitTwo) {
    const fs::path d = scratch_dir("config");
    EXPECT_EQ(run_cli("pressure --config " + config_file(d, R"({"bogus": 1})").string()), 2);
    EXPECT_EQ(run_cli("pressure --config " + config_file(d, "{ not json").string()), 2);
    EXPECT_EQ(run_cli("pressure --config " + (d / "missing.json").string()), 2);
    EXPECT_EQ(run_cli("pressure --threads 0 --config " + config_file(d, "{}").string()), 2);
}

TEST(Cli, BadBracketFailsAtAStar) {
    const fs::path d = scratch_dir("bracket");
    const fs::path out = d / "out";
    EXPECT_EQ(run_cli("report --config " + std::string(HENONMF_CONFIGS) + "/bad_bracket.json --out " + out.string()), 3);
    const json m = read_json(out / "manifest.json");
    EXPECT_EQ(m.at("status"), "failed");
    EXPECT_EQ(m.at("failure").at("stage"), "a_star");
    EXPECT_EQ(m.at("failure").at("kind"), "bad-bracket");
}

TEST(Cli, MidRunFailureLeavesPartialFiles) {
    // no horseshoe at a = 0.5: orbits are written, the pressure root is not found
    const fs::path d = scratch_dir("partial");
    const fs::path cfg = config_file(d, R"({"a": 0.5, "n": 4, "direct": {"k": 1}})");
    const fs::path out = d / "out";
    EXPECT_EQ(run_cli("report --config " + cfg.string() + " --out " + out.string()), 3);
    const json m = read_json(out / "manifest.json");
    EXPECT_EQ(m.at("failure").at("stage"), "pressure");
    EXPECT_EQ(m.at("failure").at("kind"), "no-root");
    EXPECT_TRUE(fs::exists(out / "orbits.csv.partial"));
    EXPECT_FALSE(fs::exists(out / "orbits.csv"));
    EXPECT_FALSE(fs::exists(out / "dimension.json"));
    for (const auto& f : m.at("files")) EXPECT_EQ(f.at("sha256").get<std::string>().size(), 64u);
}

TEST(Cli, CacheRerunIsFastAndIdentical) {
    const fs::path d = scratch_dir("cache");
    const fs::path cfg =
        config_file(d, R"({"a": 5.0, "b": 0.3, "n": 16, "cache_dir": ")" + (d / "cache").generic_string() + R"("})");
    auto orbit_seconds = [&](const std::string& run) {
        return read_json(d / run / "manifest.json").at("wall_time").at("orbits").get<double>();
    };
    ASSERT_EQ(run_cli("orbits --config " + cfg.string() + " --out " + (d / "cold").string()), 0);
    EXPECT_FALSE(read_json(d / "cold" / "manifest.json").at("cache_hit").get<bool>());
    const std::string checksum = sha256_file(d / "cold" / "orbits.csv");
    double warm = 1e300;
    for (int i = 0; i < 5; ++i) {
        const std::string run = "warm" + std::to_string(i);
        ASSERT_EQ(run_cli("orbits --config " + cfg.string() + " --out " + (d / run).string()), 0);
        EXPECT_TRUE(read_json(d / run / "manifest.json").at("cache_hit").get<bool>());
        EXPECT_EQ(sha256_file(d / run / "orbits.csv"), checksum);
        warm = std::min(warm, orbit_seconds(run));
    }
    EXPECT_LT(warm, 0.05 * orbit_seconds("cold")) << "cold " << orbit_seconds("cold") << " s, warm " << warm << " s";

    ASSERT_EQ(run_cli("orbits --no-cache --config " + cfg.string() + " --out " + (d / "nocache").string()), 0);
    EXPECT_FALSE(read_json(d / "nocache" / "manifest.json").at("cache_hit").get<bool>());
    EXPECT_EQ(sha256_file(d / "nocache" / "orbits.csv"), checksum);
}

TEST(Cli, ReportManifestIsComplete) {
    const fs::path d = scratch_dir("report");
    const fs::path cfg = config_file(
        d, R"({"family": "affine_horseshoe", "n": 8, "observable": {"name": "symbol_indicator"},
               "beta_grid": {"lo": 0.1, "hi": 0.9, "count": 9}, "direct": {"k": 0},
               "levelsets": {"horizon": 8, "grid": 200000, "window": 0.05}})");
    const fs::path out = d / "out";
    ASSERT_EQ(run_cli("report --no-cache --config " + cfg.string() + " --out " + out.string()), 0);
    const json m = read_json(out / "manifest.json");
    EXPECT_EQ(m.at("status"), "ok");
    EXPECT_EQ(m.at("command"), "report");
    EXPECT_EQ(m.at("config").at("n"), 8);
    for (const char* stage : {"fixed_points", "orbits", "pressure", "spectrum", "levelsets", "compare_routes"})
        EXPECT_TRUE(m.at("wall_time").contains(stage)) << stage;
    std::set<std::string> listed;
    for (const auto& f : m.at("files")) {
        const std::string path = f.at("path");
        listed.insert(path);
        EXPECT_EQ(f.at("sha256"), sha256_file(out / path)) << path;
        EXPECT_EQ(f.at("bytes").get<std::uintmax_t>(), fs::file_size(out / path)) << path;
    }
    for (const char* name : {"fixed_points.json", "orbits.csv", "misses.csv", "pressure.csv", "dimension.json",
                             "dimension.csv", "spectrum.csv", "samples.csv", "levelsets.csv", "levelsets.json",
                             "routes.csv"})
        EXPECT_TRUE(listed.count(name)) << name;
    const auto rows = read_csv(out / "spectrum.csv");
    EXPECT_EQ(rows.size(), 10u);
}
