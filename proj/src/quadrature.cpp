#include "evconvex/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace evconvex {

namespace {

double simpsonStep(const std::function<double(double)>& f, double a, double fa, double b,
                   double fb, double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpsonStep(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
           simpsonStep(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

}  // namespace

double adaptiveSimpson(const std::function<double(double)>& f, double a, double b,
                       double absTol, int maxDepth) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpsonStep(f, a, fa, b, fb, m, fm, whole, absTol, maxDepth);
}

const GaussLegendreRule& gaussLegendre(int n) {
    static std::mutex mu;
    static std::map<int, GaussLegendreRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-angle initial guess, then Newton on P_n.
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p0 / pp;
            if (std::fabs(z - z1) < 1e-15) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    auto [pos, inserted] = cache.emplace(n, std::move(rule));
    return pos->second;
}

double gaussLegendreIntegrate(const std::function<double(double)>& f, double a, double b,
                              int n) {
    const GaussLegendreRule& rule = gaussLegendre(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return s * half;
}

}  // namespace evconvex
