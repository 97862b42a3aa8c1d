#pragma once

#include <functional>
#include <vector>

namespace evconvex {

// Adaptive Simpson on [a, b] with absolute tolerance.
double adaptiveSimpson(const std::function<double(double)>& f, double a, double b,
                       double absTol, int maxDepth = 60);

struct GaussLegendreRule {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule (nodes by Newton iteration, cached per n).
const GaussLegendreRule& gaussLegendre(int n);

// Integrate f over [a, b] with the n-point rule.
double gaussLegendreIntegrate(const std::function<double(double)>& f, double a, double b,
                              int n);

}  // namespace evconvex
