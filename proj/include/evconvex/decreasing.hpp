#pragma once

#include <optional>

#include "evconvex/dist.hpp"

namespace evconvex {

enum class DecreasingBranch { psiPositive, psiZeroPhiNeg, psiZeroPhiPos, psiZeroPhiZero };

struct DecreasingCert {
    double alpha = 0.0;
    bool admissible = false;
    std::optional<double> tstar;
    DecreasingBranch branch = DecreasingBranch::psiPositive;
};

// Smallest t0 such that t -> t^alpha f(t) is strictly decreasing beyond t0,
// located by a sign scan of alpha*f + t*f' on a geometric grid (512 points
// per decade up to 1e6) refined by bisection to 1e-9. Throws NotDecreasing
// when no sign-stable tail exists within the scanned range.
double tStarAlpha(const Marginal1D& m, double alpha);

// Admissibility per the GH1 shape parameters: psi>0 admits any alpha;
// psi=0, phi<0 any alpha; psi=0, phi>0 requires alpha < 1-lambda;
// psi=0, phi=0 requires alpha < 1-2*lambda.
DecreasingCert certifyAlphaDecreasing(const GH1& g, double alpha);

// t**(r) = tstar^r. The r=0 case must go through the epsilon0 route.
double tDoubleStar(double r, double tstar);

}  // namespace evconvex
