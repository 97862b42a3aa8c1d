#pragma once

#include <string>

#include "evconvex/errors.hpp"

namespace evconvex {

double logGamma(double x);  // x > 0

// Standard normal CDF, accurate to machine precision via erfc.
double gaussianCdf(double t);

// Student-t CDF with nu > 0 degrees of freedom (regularized incomplete beta).
double studentCdf(double nu, double t);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularizedIncompleteBeta(double x, double a, double b);

enum class BesselMethod { Series, Asymptotic, Recurrence };

struct BesselEval {
    double order = 0.0;
    double argument = 0.0;
    double value = 0.0;  // exponentially scaled: e^x K_nu(x)
    BesselMethod method = BesselMethod::Series;
};

// Modified Bessel function of the third kind, K_nu(x), real order, x > 0.
double besselK(double nu, double x);

// e^x * K_nu(x); finite far beyond the underflow point of K itself.
double besselKScaled(double nu, double x);

BesselEval besselKScaledEval(double nu, double x);

// K_{lambda - 1/2}(s) / K_{lambda + 1/2}(s) for s > 0.
double besselKRatio(double lambda, double s);

}  // namespace evconvex
