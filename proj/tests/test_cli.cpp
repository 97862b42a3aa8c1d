#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "evconvex/cli_core.hpp"

using namespace evconvex;
using evconvex::cli::json;

namespace {

std::string tempPath(const char* suffix) {
    static std::atomic<int> counter{0};
    return "/tmp/evconvex_test_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter.fetch_add(1)) + suffix;
}

const char* kReferenceConfig = R"JSON({
  "version": 1,
  "problem": {
    "rows": [
      {"mu": [3, -4], "sigma": [[96, -11], [-11, 98]], "d": 22, "r": -2,
       "marginal": {"type": "student", "nu": 4}},
      {"mu": [0, 1], "sigma": [[44, 21], [21, 92]], "d": 27, "r": -2,
       "marginal": {"type": "student", "nu": 4}},
      {"mu": [2, -1], "sigma": [[90, -2], [-2, 24]], "d": 2, "r": -2,
       "marginal": {"type": "student", "nu": 4}}
    ],
    "copula": {"type": "gumbel", "kappa": {"kind": "builtSeparable", "d": 1.0,
      "c1": 1.0, "c2": 10.0, "K": 2,
      "domain": {"type": "ball", "center": [0, 0], "radius": 7}}},
    "domain": {"type": "ball", "center": [0, 0], "radius": 7, "originAllowed": true}
  },
  "p": 0.97,
  "seed": 11,
  "segments": 40
})JSON";

struct RunOutput {
    int exitCode = 0;
    std::string stdoutText;
};

RunOutput runCli(const std::string& args) {
    const std::string outFile = tempPath(".out");
    const std::string cmd =
        std::string(EVCONVEX_CLI_PATH) + " " + args + " > " + outFile + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    RunOutput out;
    out.exitCode = WEXITSTATUS(rc);
    std::ifstream in(outFile);
    out.stdoutText.assign(std::istreambuf_iterator<char>(in),
                          std::istreambuf_iterator<char>());
    std::remove(outFile.c_str());
    return out;
}

std::string writeTemp(const std::string& body) {
    const std::string path = tempPath(".json");
    std::ofstream out(path);
    out << body;
    return path;
}

}  // namespace

TEST_CASE("config round trip and schema validation") {
    const json doc = json::parse(kReferenceConfig);
    const cli::RunConfig cfg = cli::loadConfig(doc);
    CHECK(cfg.problem.rows.size() == 3);
    CHECK(cfg.problem.originAllowed);
    CHECK(cfg.problem.copula.has_value());

    json bad = doc;
    bad["unexpected"] = 1;
    CHECK_THROWS_AS(cli::loadConfig(bad), ConfigError);

    json badRow = doc;
    badRow["problem"]["rows"][0]["typo"] = 1;
    CHECK_THROWS_AS(cli::loadConfig(badRow), ConfigError);

    json noVersion = doc;
    noVersion.erase("version");
    CHECK_THROWS_AS(cli::loadConfig(noVersion), ConfigError);
}

TEST_CASE("threshold command reproduces the reference thresholds") {
    const cli::RunConfig cfg = cli::loadConfig(json::parse(kReferenceConfig));
    const cli::CommandResult res = cli::cmdThreshold(cfg, LambdaMode::lMin);
    CHECK(res.exitCode == 0);
    REQUIRE(res.payload.contains("pstar"));
    CHECK(std::fabs(res.payload["rows"][0]["theta"].get<double>() - 2.4343) <= 5e-4);
    CHECK(std::fabs(res.payload["rows"][1]["theta"].get<double>() - 0.1965) <= 5e-4);
    CHECK(std::fabs(res.payload["rows"][2]["theta"].get<double>() - 1.4433) <= 5e-4);
    CHECK(std::fabs(res.payload["pstar"]["pstar"].get<double>() - 0.9648) <= 1e-3);
}

TEST_CASE("threshold command exit 2 on nonexistence") {
    json doc = json::parse(kReferenceConfig);
    doc["problem"]["rows"][0]["r"] = 1.0;  // b > 0, r >= -1: theorem item 6
    const cli::RunConfig cfg = cli::loadConfig(doc);
    const cli::CommandResult res = cli::cmdThreshold(cfg, LambdaMode::lMin);
    CHECK(res.exitCode == 2);
    CHECK(res.text.find("no threshold") != std::string::npos);
    CHECK(res.text.find("item 6") != std::string::npos);
}

TEST_CASE("b = 0 single-row threshold flagged best") {
    json doc = json::parse(kReferenceConfig);
    doc["problem"]["rows"] = json::array();
    doc["problem"]["rows"].push_back(
        {{"mu", {1.0, 0.0}},
         {"sigma", {{1.0, 0.0}, {0.0, 1.0}}},
         {"d", 0.0},
         {"r", -2.0},
         {"marginal", {{"type", "student"}, {"nu", 4.0}}}});
    const cli::RunConfig cfg = cli::loadConfig(doc);
    const cli::CommandResult res = cli::cmdThreshold(cfg, LambdaMode::lMin);
    CHECK(res.exitCode == 0);
    CHECK(res.payload["rows"][0]["caseId"].get<int>() == 2);
    CHECK(res.payload["rows"][0]["isBest"].get<bool>());
    CHECK(res.payload["rows"][0]["theta"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("report JSON round trips losslessly") {
    ConvexityReport report;
    report.p = 0.97;
    report.segmentsTested = 12;
    report.starShapedOk = true;
    Violation v;
    v.x1 = {0.125, -0.25};
    v.x2 = {0.5, 0.0625};
    v.lambda = 0.3;
    v.deficit = 0.001953125;
    report.violations.push_back(v);

    const json j = cli::reportToJson(report);
    const ConvexityReport back = cli::reportFromJson(j);
    CHECK(cli::reportToJson(back) == j);

    const KappaModel m = buildKappa(1.0, 1.0, 10.0, 2, DomainBall{{0.0, 0.0}, 7.0});
    const json mj = cli::kappaToJson(m);
    const KappaModel back2 = cli::kappaFromJson(mj);
    CHECK(cli::kappaToJson(back2) == mj);
}

TEST_CASE("grid CSV format") {
    GridTable t;
    t.resolution = 1;
    t.cells.push_back({0.5, -1.25, 0.9375});
    const std::string csv = cli::gridToCsv(t);
    CHECK(csv == "x1,x2,prob\n0.5,-1.25,0.9375\n");
}

TEST_CASE("binary: reproduce-paper") {
    const RunOutput out = runCli("reproduce-paper");
    CHECK(out.exitCode == 0);
    CHECK(out.stdoutText.find("PASS") != std::string::npos);
    CHECK(out.stdoutText.find("FAIL") == std::string::npos);

    const RunOutput js = runCli("--json reproduce-paper");
    CHECK(js.exitCode == 0);
    const json payload = json::parse(js.stdoutText);
    CHECK(payload.contains("checks"));
    CHECK(payload["curveMonotone"].get<bool>());
    CHECK(payload["curveDiverging"].get<bool>());
}

TEST_CASE("binary: threshold and verify round trip through files") {
    const std::string cfgPath = writeTemp(kReferenceConfig);

    const RunOutput th = runCli("--config " + cfgPath + " --json threshold");
    CHECK(th.exitCode == 0);
    const json thj = json::parse(th.stdoutText);
    CHECK(std::fabs(thj["pstar"]["pstar"].get<double>() - 0.9648) <= 1e-3);

    // determinism: identical invocations produce byte-identical output
    const RunOutput th2 = runCli("--config " + cfgPath + " --json threshold");
    CHECK(th.stdoutText == th2.stdoutText);

    const RunOutput ver = runCli("--config " + cfgPath + " --json verify-convexity");
    CHECK(ver.exitCode == 0);
    const json vj = json::parse(ver.stdoutText);
    CHECK(vj["violations"].empty());
    CHECK(vj["starShapedOk"].get<bool>());
    const ConvexityReport round = cli::reportFromJson(vj);
    CHECK(cli::reportToJson(round) == vj);

    std::remove(cfgPath.c_str());
}

TEST_CASE("binary: evaluate and grid") {
    const std::string cfgPath = writeTemp(kReferenceConfig);
    json doc = json::parse(kReferenceConfig);
    doc["x"] = {0.0, 0.0};
    doc["grid"] = {{"box", {{"lo", {-1.0, -1.0}}, {"hi", {1.0, 1.0}}}}, {"resolution", 5}};
    const std::string cfgPath2 = writeTemp(doc.dump());

    const RunOutput ev = runCli("--config " + cfgPath2 + " --json evaluate");
    CHECK(ev.exitCode == 0);
    CHECK(json::parse(ev.stdoutText)["prob"].get<double>() == doctest::Approx(1.0));

    const std::string csvPath = tempPath(".csv");
    const RunOutput gr = runCli("--config " + cfgPath2 + " --out " + csvPath + " grid");
    CHECK(gr.exitCode == 0);
    std::ifstream csv(csvPath);
    std::string header;
    std::getline(csv, header);
    CHECK(header == "x1,x2,prob");
    std::size_t lines = 0;
    std::string line;
    while (std::getline(csv, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 25);
    std::remove(csvPath.c_str());
    std::remove(cfgPath.c_str());
    std::remove(cfgPath2.c_str());
}

TEST_CASE("binary: exit codes") {
    // config error -> 4
    const std::string badPath = writeTemp("{\"version\": 1}");
    CHECK(runCli("--config " + badPath + " threshold").exitCode == 4);
    std::remove(badPath.c_str());

    // nonexistent threshold on pstar path -> 2
    json doc = json::parse(kReferenceConfig);
    doc["problem"]["rows"][0]["r"] = 1.0;
    const std::string noThetaPath = writeTemp(doc.dump());
    CHECK(runCli("--config " + noThetaPath + " pstar").exitCode == 2);
    std::remove(noThetaPath.c_str());

    // empty S(p) -> 3
    json empty = json::parse(kReferenceConfig);
    empty["problem"]["rows"][0]["d"] = -40.0;  // min D < 0 kills the origin anchor
    empty["problem"]["rows"][0]["mu"] = {0.0, 0.0};
    empty["p"] = 0.999;
    empty["segments"] = 5;
    const std::string emptyPath = writeTemp(empty.dump());
    CHECK(runCli("--config " + emptyPath + " verify-convexity").exitCode == 3);
    std::remove(emptyPath.c_str());
}

TEST_CASE("binary: alpha-tstar") {
    const std::string path = writeTemp(R"({"version": 1, "alpha": 3.0,
        "marginal": {"type": "student", "nu": 4}})");
    const RunOutput out = runCli("--config " + path + " --json alpha-tstar");
    CHECK(out.exitCode == 0);
    const json j = json::parse(out.stdoutText);
    CHECK(j["tstar"].get<double>() == doctest::Approx(std::sqrt(6.0)).epsilon(1e-6));

    const std::string ghPath = writeTemp(R"({"version": 1, "alpha": 5.0,
        "marginal": {"type": "gh1", "lambda": -2, "chi": 4, "psi": 0, "phi": 0}})");
    const RunOutput gh = runCli("--config " + ghPath + " --json alpha-tstar");
    CHECK(gh.exitCode == 0);
    CHECK_FALSE(json::parse(gh.stdoutText)["admissible"].get<bool>());
    std::remove(path.c_str());
    std::remove(ghPath.c_str());
}

TEST_CASE("binary: build-kappa") {
    const std::string path = writeTemp(R"({"version": 1, "p": 0.97, "rows": 3,
        "kappa": {"kind": "builtSeparable", "d": 1.0, "c1": 1.0, "c2": 10.0, "K": 2,
                  "domain": {"type": "ball", "center": [0, 0], "radius": 7}}})");
    const RunOutput out = runCli("--config " + path + " --json build-kappa");
    CHECK(out.exitCode == 0);
    const json j = json::parse(out.stdoutText);
    CHECK(j["centre"]["a4Psd"].get<bool>());
    CHECK(j["kappa"]["kind"] == "builtSeparable");

    const std::string badPath = writeTemp(R"({"version": 1,
        "kappa": {"kind": "builtSeparable", "d": 1.0, "c1": 1.0, "c2": 10.0, "K": 2,
                  "domain": {"type": "ball", "center": [0, 0], "radius": 11}}})");
    CHECK(runCli("--config " + badPath + " build-kappa").exitCode == 4);
    std::remove(path.c_str());
    std::remove(badPath.c_str());
}
