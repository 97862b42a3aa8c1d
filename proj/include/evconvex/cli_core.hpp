#pragma once

#include <string>

#include <json.hpp>

#include "evconvex/feasibility.hpp"

namespace evconvex::cli {

using nlohmann::json;

struct RunConfig {
    Problem problem;
    json options;  // validated command options (p, seed, segments, ...)
};

// Parses and schema-validates a config document; unknown keys are rejected.
RunConfig loadConfig(const json& doc);
RunConfig loadConfigFile(const std::string& path);

// Streams without a problem section (alpha-tstar, build-kappa).
json loadRawConfigFile(const std::string& path);

struct CommandResult {
    int exitCode = 0;
    std::string text;   // human-readable report
    json payload;       // machine-readable (--json) form
};

CommandResult cmdThreshold(const RunConfig& cfg, LambdaMode mode);
CommandResult cmdPstar(const RunConfig& cfg, LambdaMode mode);
CommandResult cmdAlphaTstar(const json& doc);
CommandResult cmdBuildKappa(const json& doc);
CommandResult cmdEvaluate(const RunConfig& cfg, ProbMethod method);
CommandResult cmdGrid(const RunConfig& cfg, std::string* csvOut);
CommandResult cmdVerify(const RunConfig& cfg);
CommandResult cmdMinimize(const RunConfig& cfg);
CommandResult cmdReproducePaper();

// Serialization helpers (lossless JSON round trip of the report types).
json thetaToJson(const ThetaResult& t);
json pstarToJson(const PStarResult& p);
json reportToJson(const ConvexityReport& r);
ConvexityReport reportFromJson(const json& j);
json kappaToJson(const KappaModel& m);
KappaModel kappaFromJson(const json& j);
std::string gridToCsv(const GridTable& table);

// Shared parsing of sub-objects (also used in tests).
Marginal1D marginalFromJson(const json& j);
Domain domainFromJson(const json& j);
json domainToJson(const Domain& d);

}  // namespace evconvex::cli
