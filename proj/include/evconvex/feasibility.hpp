#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evconvex/copula.hpp"
#include "evconvex/thresholds.hpp"

namespace evconvex {

// Per-row generalized hyperbolic parameters for skewed rows; the 1-D marginal
// at x is GH1(lambda, chi, psi, 0, 1, gamma^T x / sqrt(x^T Sigma x)).
struct GhRowParams {
    double lambda = 0.0;
    double chi = 0.0;
    double psi = 0.0;
    Vec gamma;
};

struct Problem {
    std::vector<RowModel> rows;
    std::optional<KappaModel> copula;  // nullopt: independent rows
    std::vector<std::optional<GhRowParams>> gh;  // empty or one entry per row
    Domain X = DomainBox{};
    bool originAllowed = false;

    std::size_t dimension() const { return rows.empty() ? 0 : rows.front().mu.size(); }
    void validateShape() const;
};

// g_i(x) = (d_i - mu_i^T x) / sqrt(x^T Sigma_i x).
double rowG(const RowModel& row, const Vec& x);

// Marginal of row i at decision point x (GH rows pick up the skew projection).
Marginal1D marginalAt(const Problem& prob, std::size_t i, const Vec& x);

enum class ProbMethod { Analytic, Radial, MonteCarlo };

struct McOptions {
    std::size_t n = 100000;
    std::uint64_t seed = 1;
};

struct ProbEval {
    double value = 0.0;
    double absErr = 0.0;  // 3 binomial SE for Monte Carlo
};

ProbEval jointProbability(const Problem& prob, const Vec& x, ProbMethod method,
                          const McOptions* mc = nullptr);

bool isMember(const Problem& prob, const Vec& x, double p);

struct Violation {
    Vec x1, x2;
    double lambda = 0.0;
    double deficit = 0.0;
};

struct ConvexityReport {
    double p = 0.0;
    std::size_t segmentsTested = 0;
    std::vector<Violation> violations;
    bool starShapedOk = false;
};

ConvexityReport verifySegmentConvexity(const Problem& prob, double p, std::size_t nSegments,
                                       std::uint64_t seed);

bool starShapedCheck(const Problem& prob, double p, std::size_t rays, std::uint64_t seed);

struct GridCell {
    double x1 = 0.0, x2 = 0.0, prob = 0.0;
};

struct GridTable {
    std::size_t resolution = 0;
    std::vector<GridCell> cells;  // row-major: x1 outer, x2 inner
};

GridTable gridExport(const Problem& prob, const DomainBox& box, std::size_t resolution);

struct MinimizeResult {
    Vec x;
    double value = 0.0;
    std::size_t iterations = 0;
    bool certified = false;
    double feasSlack = 0.0;  // p - P(x) at the returned point
};

MinimizeResult minimizeLinear(const Problem& prob, const Vec& c, double p,
                              std::size_t maxIter, bool overrideCert = false);

// Worker cap honoured by grid export and verification (EVCONVEX_THREADS).
unsigned effectiveThreadCount();

}  // namespace evconvex
