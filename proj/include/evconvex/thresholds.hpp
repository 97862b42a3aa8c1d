#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "evconvex/dist.hpp"
#include "evconvex/linalg.hpp"

namespace evconvex {

enum class LambdaMode { lMin, closedForm, definitionNumeric };

// One constraint row: mu, Sigma, right-hand side d, the 1-D marginal of the
// normalized row, and the concavity exponent r.
struct RowModel {
    Vec mu;
    SpdMatrix sigma;
    double d = 0.0;
    Marginal1D marginal = Gaussian{};
    double r = -2.0;

    RowModel(Vec mu_, SpdMatrix sigma_, double d_, Marginal1D marginal_, double r_);
};

struct ThetaResult {
    bool exists = false;
    std::optional<double> theta;
    std::optional<double> sqrtTheta;
    int caseId = 0;  // Theorem item 1..11
    bool isBest = false;
    double lambdaMuMin = 0.0;  // 0 when mu = 0
    double rCircle = 0.0;
    std::optional<double> rStar;
    LambdaMode lambdaMode = LambdaMode::lMin;
};

struct PStarResult {
    struct Contribution {
        double thetaTerm = 0.0;  // F_i(sqrt(theta*_i))
        double tstarTerm = 0.0;  // F_i(t*_i(-r_i + 1))
    };
    enum class Binding { Half, ThetaTerm, TStarTerm };

    double pstar = 0.5;
    std::vector<Contribution> contributions;
    Binding binding = Binding::Half;
    std::size_t bindingRow = 0;
};

// Exact evaluation of the local r-concavity inequality for g = (b - mu^T x)
// / sqrt(x^T Sigma x) at x (the log form when r = 0). Requires x in E.
bool rConcavityHolds(const RowModel& row, const Vec& x, double r);

double lambdaMuMin(const Vec& mu, const SpdMatrix& sigma, LambdaMode mode);

struct TangencyConstants {
    double rCircle = 0.0;
    std::optional<double> rStar;
};

TangencyConstants tangencyConstants(const Vec& mu, const SpdMatrix& sigma, LambdaMode mode);

// Best r-concavity threshold dispatcher over all theorem cases.
ThetaResult bestTheta(const RowModel& row, double r, LambdaMode mode = LambdaMode::lMin);

struct GaussianPStar {
    bool exists = false;
    double theta = 0.0;
    double pstar = 0.0;
    bool isBest = false;
};

// Best probability threshold for a Gaussian row: closed form at b = 0,
// numeric sup over the violation region of the quartic condition at b > 0,
// nonexistence at b < 0.
GaussianPStar gaussianBestP(const RowModel& row, LambdaMode mode = LambdaMode::lMin);

PStarResult assemblePStar(const std::vector<RowModel>& rows,
                          LambdaMode mode = LambdaMode::lMin, double eps0 = 0.1);

}  // namespace evconvex
