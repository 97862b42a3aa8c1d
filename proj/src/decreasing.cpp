#include "evconvex/decreasing.hpp"

#include <cmath>
#include <vector>

namespace evconvex {

namespace {

// alpha * f(t) + t * f'(t); its sign drives the scan.
double shape(const Marginal1D& m, double alpha, double t) {
    return alpha * density(m, t) + t * densityDerivative(m, t);
}

}  // namespace

double tStarAlpha(const Marginal1D& m, double alpha) {
    validate(m);
    const double tLo = 1e-8;
    const double tHi = 1e6;
    const int perDecade = 512;
    const double step = std::pow(10.0, 1.0 / perDecade);

    // Geometric grid; remember the last point with nonnegative slope of
    // t^alpha f(t), i.e. shape > 0.
    double lastPositive = -1.0;
    double firstNegativeAfter = -1.0;
    double prev = tLo;
    double prevShape = shape(m, alpha, tLo);
    bool sawPositive = prevShape > 0.0;
    if (prevShape > 0.0) lastPositive = tLo;
    for (double t = tLo * step; t <= tHi * (1.0 + 1e-12); t *= step) {
        const double s = shape(m, alpha, t);
        if (s > 0.0) {
            sawPositive = true;
            lastPositive = t;
            firstNegativeAfter = -1.0;
        } else if (lastPositive > 0.0 && firstNegativeAfter < 0.0) {
            firstNegativeAfter = t;
        }
        prev = t;
        prevShape = s;
    }
    (void)prev;
    if (prevShape > 0.0)
        throw NotDecreasing("tStarAlpha: no sign-stable decreasing tail up to t = 1e6");
    if (!sawPositive) return tLo;  // decreasing from the start of the grid

    double lo = lastPositive;
    double hi = firstNegativeAfter > 0.0 ? firstNegativeAfter : lastPositive * step;
    for (int i = 0; i < 200 && hi - lo > 1e-9; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (shape(m, alpha, mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

DecreasingCert certifyAlphaDecreasing(const GH1& g, double alpha) {
    validate(Marginal1D{g});
    DecreasingCert cert;
    cert.alpha = alpha;
    if (g.psi > 0.0) {
        cert.branch = DecreasingBranch::psiPositive;
        cert.admissible = true;
    } else if (g.phi < 0.0) {
        cert.branch = DecreasingBranch::psiZeroPhiNeg;
        cert.admissible = true;
    } else if (g.phi > 0.0) {
        cert.branch = DecreasingBranch::psiZeroPhiPos;
        cert.admissible = alpha < 1.0 - g.lambda;
    } else {
        cert.branch = DecreasingBranch::psiZeroPhiZero;
        cert.admissible = g.lambda < 0.0 && alpha < 1.0 - 2.0 * g.lambda;
    }
    if (cert.admissible) cert.tstar = std::max(tStarAlpha(Marginal1D{g}, alpha), 1e-12);
    return cert;
}

double tDoubleStar(double r, double tstar) {
    if (r == 0.0) throw DomainError("tDoubleStar: r = 0 must use the epsilon0 route");
    if (!(tstar > 0.0)) throw DomainError("tDoubleStar: tstar must be > 0");
    return std::pow(tstar, r);
}

}  // namespace evconvex
