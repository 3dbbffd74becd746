#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "idset/cli.hpp"
#include "json.hpp"

using namespace idset;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("idtool_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kSmallInterval = R"({
  "model": "interval_proper",
  "model_config": {"theta_resolution": [9, 9]},
  "data": {"simulate": {"n": 300}},
  "truncations": [5]
})";

}  // namespace

TEST_CASE("FNV-1a reference values") {
    CHECK(cli::fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(cli::fnv1a("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("config errors exit with 1") {
    TempDir t("cfgerr");
    CHECK(cli::run_command_text("scan", "{\"model\": ", t.path) == cli::kConfig);
    CHECK(cli::run_command_text("scan", R"({"model": "interval_proper", "typo": 1})", t.path) == cli::kConfig);
    auto diag = nlohmann::json::parse(slurp(t.path / "diagnostics.json"));
    CHECK(diag["message"].get<std::string>().find("typo") != std::string::npos);
    CHECK(cli::run_command_text("scan", R"({"model": "production_function"})", t.path) == cli::kConfig);
    diag = nlohmann::json::parse(slurp(t.path / "diagnostics.json"));
    CHECK(diag["error"] == "NotSupported");
    CHECK(cli::run_command_text("scan", R"({"model": "interval_proper"})", t.path) == cli::kConfig);
    CHECK(cli::run_command_text("launch", kSmallInterval, t.path) == cli::kConfig);
    CHECK(cli::run_command("scan", t.path / "missing.json") == cli::kConfig);
}

TEST_CASE("scan writes verdicts and summary with a metadata header") {
    TempDir t("scan");
    REQUIRE(cli::run_command_text("scan", kSmallInterval, t.path) == cli::kOk);
    const auto csv = slurp(t.path / "verdicts.csv");
    CHECK(csv.rfind("# idtool ", 0) == 0);
    CHECK(csv.find("config_hash=") != std::string::npos);
    auto s = nlohmann::json::parse(slurp(t.path / "summary.json"));
    CHECK(s["grid_points"] == 81);
    CHECK(s["disagreements"].empty());
    CHECK(s["meta"]["version"] == cli::kVersion);
    REQUIRE(cli::run_command_text("scan", kSmallInterval, t.path) == cli::kOk);
    CHECK(slurp(t.path / "verdicts.csv") == csv);
}

TEST_CASE("simulate writes a CSV that scan can read back") {
    TempDir t("sim");
    REQUIRE(cli::run_command_text("simulate", kSmallInterval, t.path) == cli::kOk);
    std::ofstream(t.path / "cfg.json") << R"({
      "model": "interval_proper",
      "model_config": {"theta_resolution": [9, 9]},
      "data": {"csv": "data.csv"},
      "truncations": [5],
      "output_dir": "out"
    })";
    REQUIRE(cli::run_command("scan", t.path / "cfg.json") == cli::kOk);
    CHECK(slurp(t.path / "out" / "verdicts.csv").find("member_lp") != std::string::npos);
}

TEST_CASE("incomplete scans exit with 2") {
    TempDir t("incomplete");
    auto rc = cli::run_command_text("scan", R"({
      "model": "interval_proper",
      "model_config": {"theta_resolution": [3, 3], "points_per_dim": 3, "truncation": 0.01},
      "data": {"simulate": {"n": 300}},
      "truncations": [0.01]
    })", t.path);
    CHECK(rc == cli::kIncomplete);
}

TEST_CASE("counterfactual over supplied thetas") {
    TempDir t("cf");
    REQUIRE(cli::run_command_text("counterfactual", R"({
      "model": "entry_game",
      "data": {"simulate": {"n": 3200}},
      "truncations": [5, 10],
      "counterfactual": {"case": "shift_x", "shift": [0.5, 0.5], "target": "expected_entrants",
                         "thetas": [[0.5, 1.0, 1.0]]}
    })", t.path) == cli::kOk);
    auto j = nlohmann::json::parse(slurp(t.path / "intervals.json"));
    const double lo = j["union"]["lo"], hi = j["union"]["hi"];
    CHECK(lo >= -1e-9);
    CHECK(hi <= 2.0 + 1e-9);
    CHECK(j["intervals"][0]["by_truncation"].size() == 2);
    CHECK(cli::run_command_text("counterfactual", kSmallInterval, t.path) == cli::kConfig);
}

TEST_CASE("reduce on the dagger model finds a certificate") {
    TempDir t("reduce");
    REQUIRE(cli::run_command_text("reduce", R"({
      "model": "interval_dagger",
      "model_config": {"theta_resolution": [9, 9]},
      "data": {"simulate": {"n": 300}},
      "truncations": [5]
    })", t.path) == cli::kOk);
    auto j = nlohmann::json::parse(slurp(t.path / "reduction.json"));
    CHECK(j["double_scan"]["identical"] == true);
    CHECK(fs::exists(t.path / "comparison.csv"));
}
