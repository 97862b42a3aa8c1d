#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "evconvex/cli_core.hpp"

namespace {

using evconvex::cli::CommandResult;
using evconvex::cli::RunConfig;

int emit(const CommandResult& res, bool asJson, const std::string& outPath,
         const std::string* fileBody = nullptr) {
    const std::string body = asJson ? res.payload.dump(2) + "\n" : res.text;
    if (!outPath.empty()) {
        std::ofstream out(outPath);
        if (!out) {
            std::cerr << "cannot write output file: " << outPath << "\n";
            return 4;
        }
        out << (fileBody ? *fileBody : body);
        if (fileBody) std::cout << body;  // summary still goes to stdout
    } else {
        std::cout << body;
    }
    return res.exitCode;
}

evconvex::LambdaMode parseLambdaMode(const std::string& s) {
    if (s == "lmin") return evconvex::LambdaMode::lMin;
    if (s == "closed") return evconvex::LambdaMode::closedForm;
    if (s == "numeric") return evconvex::LambdaMode::definitionNumeric;
    throw evconvex::ConfigError("unknown lambda mode: " + s);
}

evconvex::ProbMethod parseMethod(const std::string& s) {
    if (s == "analytic") return evconvex::ProbMethod::Analytic;
    if (s == "radial") return evconvex::ProbMethod::Radial;
    if (s == "mc") return evconvex::ProbMethod::MonteCarlo;
    throw evconvex::ConfigError("unknown method: " + s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Convexity certificates for joint chance-constrained feasible sets"};
    app.require_subcommand(1);

    std::string configPath;
    std::string outPath;
    std::string lambdaMode = "lmin";
    std::string method = "analytic";
    bool asJson = false;
    long long seed = -1;

    app.add_option("--config", configPath, "JSON configuration file");
    app.add_flag("--json", asJson, "machine-readable output");
    app.add_option("--seed", seed, "RNG seed (overrides config)");
    app.add_option("--lambda-mode", lambdaMode, "lmin|closed|numeric");
    app.add_option("--method", method, "analytic|radial|mc");
    app.add_option("--out", outPath, "output file path");

    auto* cThreshold = app.add_subcommand("threshold", "per-row best thresholds and p*");
    auto* cPstar = app.add_subcommand("pstar", "assembled probability threshold");
    auto* cAlpha = app.add_subcommand("alpha-tstar", "alpha-decreasing threshold t*");
    auto* cKappa = app.add_subcommand("build-kappa", "build and validate a kappa model");
    auto* cEval = app.add_subcommand("evaluate", "joint probability at a point");
    auto* cGrid = app.add_subcommand("grid", "probability grid export (CSV)");
    auto* cVerify = app.add_subcommand("verify-convexity", "segment and star-shape checks");
    auto* cMin = app.add_subcommand("minimize", "linear objective over S(p)");
    auto* cRepro = app.add_subcommand("reproduce-paper", "reference-value reproduction");

    CLI11_PARSE(app, argc, argv);

    try {
        auto loadCfg = [&]() {
            if (configPath.empty()) throw evconvex::ConfigError("--config is required");
            RunConfig cfg = evconvex::cli::loadConfigFile(configPath);
            if (seed >= 0) cfg.options["seed"] = static_cast<std::uint64_t>(seed);
            return cfg;
        };
        const evconvex::LambdaMode mode = parseLambdaMode(lambdaMode);

        if (cThreshold->parsed()) return emit(evconvex::cli::cmdThreshold(loadCfg(), mode),
                                              asJson, outPath);
        if (cPstar->parsed()) return emit(evconvex::cli::cmdPstar(loadCfg(), mode), asJson,
                                          outPath);
        if (cAlpha->parsed()) {
            if (configPath.empty()) throw evconvex::ConfigError("--config is required");
            return emit(evconvex::cli::cmdAlphaTstar(
                            evconvex::cli::loadRawConfigFile(configPath)),
                        asJson, outPath);
        }
        if (cKappa->parsed()) {
            if (configPath.empty()) throw evconvex::ConfigError("--config is required");
            return emit(evconvex::cli::cmdBuildKappa(
                            evconvex::cli::loadRawConfigFile(configPath)),
                        asJson, outPath);
        }
        if (cEval->parsed())
            return emit(evconvex::cli::cmdEvaluate(loadCfg(), parseMethod(method)), asJson,
                        outPath);
        if (cGrid->parsed()) {
            std::string csv;
            const CommandResult res = evconvex::cli::cmdGrid(loadCfg(), &csv);
            return emit(res, asJson, outPath, &csv);
        }
        if (cVerify->parsed()) return emit(evconvex::cli::cmdVerify(loadCfg()), asJson, outPath);
        if (cMin->parsed()) return emit(evconvex::cli::cmdMinimize(loadCfg()), asJson, outPath);
        if (cRepro->parsed())
            return emit(evconvex::cli::cmdReproducePaper(), asJson, outPath);
    } catch (const evconvex::MissingTheta& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const evconvex::SamplingExhausted& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const evconvex::Infeasible& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const evconvex::Error& e) {
        std::cerr << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
