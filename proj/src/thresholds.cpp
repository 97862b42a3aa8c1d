#include "evconvex/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "evconvex/decreasing.hpp"
#include "evconvex/specfun.hpp"

namespace evconvex {

namespace {

bool isIsotropic(const SpdMatrix& s, double* lambda0) {
    const std::size_t n = s.dim();
    const double d0 = s.entries().at(0, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = s.entries().at(i, j);
            if (i == j) {
                if (std::fabs(v - d0) > 1e-12 * std::fabs(d0)) return false;
            } else if (v != 0.0) {
                return false;
            }
        }
    }
    *lambda0 = d0;
    return true;
}

}  // namespace

RowModel::RowModel(Vec mu_, SpdMatrix sigma_, double d_, Marginal1D marginal_, double r_)
    : mu(std::move(mu_)), sigma(std::move(sigma_)), d(d_), marginal(std::move(marginal_)),
      r(r_) {
    if (mu.size() != sigma.dim()) throw DimError("RowModel: mu/Sigma dimension mismatch");
    validate(marginal);
}

bool rConcavityHolds(const RowModel& row, const Vec& x, double r) {
    const double b = row.d;
    const double mtx = dot(row.mu, x);
    if (norm2(x) == 0.0 || !(b - mtx > 0.0))
        throw OutsideDomain("rConcavityHolds: x must lie in E (nonzero, b - mu^T x > 0)");
    const double xsx = quadForm(row.sigma, x);
    const double q = invQuadForm(row.sigma, row.mu);
    const double theta = (b - mtx) * (b - mtx) / xsx;
    const double proj = mtx / std::sqrt(xsx);
    if (r == 0.0) return q <= 2.0 * proj * proj - theta;
    return q <= (2.0 - r) * proj * proj - 2.0 * r * std::sqrt(theta) * proj - (r + 1.0) * theta;
}

double lambdaMuMin(const Vec& mu, const SpdMatrix& sigma, LambdaMode mode) {
    const double mnorm = norm2(mu);
    if (!(mnorm > 0.0)) throw DomainError("lambdaMuMin: requires mu != 0");
    if (mu.size() != sigma.dim()) throw DimError("lambdaMuMin: dimension mismatch");

    switch (mode) {
        case LambdaMode::lMin:
            return sigma.lambdaMin();
        case LambdaMode::closedForm:
            return mnorm * mnorm / invQuadForm(sigma, mu);
        case LambdaMode::definitionNumeric:
            break;
    }

    // Maximize phi(u) = (mu . u) / (||mu|| sqrt(u^T Sigma u)) over the unit
    // sphere by projected gradient ascent with restarts.
    const std::size_t n = mu.size();
    std::mt19937_64 rng(0x5bd1e995u);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto phi = [&](const Vec& u) { return dot(mu, u) / (mnorm * std::sqrt(quadForm(sigma, u))); };

    double best = -1e300;
    for (int restart = 0; restart < 32; ++restart) {
        Vec u(n);
        if (restart == 0) {
            u = mu;
        } else if (restart == 1) {
            u = sigma.solve(mu);
        } else {
            for (double& v : u) v = gauss(rng);
        }
        double nu = norm2(u);
        if (nu == 0.0) continue;
        u = scale(u, 1.0 / nu);

        double val = phi(u);
        double step = 0.5;
        for (int iter = 0; iter < 400; ++iter) {
            const double xsx = quadForm(sigma, u);
            const Vec su = sigma.mul(u);
            // gradient of phi as a function on R^N (scale-invariant)
            Vec grad(n);
            const double denom = mnorm * std::sqrt(xsx);
            const double c2 = dot(mu, u) / (mnorm * std::pow(xsx, 1.5));
            for (std::size_t i = 0; i < n; ++i) grad[i] = mu[i] / denom - c2 * su[i];
            Vec cand = add(u, scale(grad, step));
            const double cn = norm2(cand);
            if (cn == 0.0) break;
            cand = scale(cand, 1.0 / cn);
            const double cv = phi(cand);
            if (cv > val + 1e-16) {
                u = cand;
                val = cv;
            } else {
                step *= 0.5;
                if (step < 1e-12) break;
            }
        }
        best = std::max(best, val);
    }
    return 1.0 / (best * best);
}

TangencyConstants tangencyConstants(const Vec& mu, const SpdMatrix& sigma, LambdaMode mode) {
    const double mnorm = norm2(mu);
    if (!(mnorm > 0.0)) throw DomainError("tangencyConstants: requires mu != 0");
    const double lam = lambdaMuMin(mu, sigma, mode);
    const double q = invQuadForm(sigma, mu);
    TangencyConstants out;
    out.rCircle = mnorm * mnorm / (q * lam);
    if (out.rCircle > 1.0) out.rStar = -2.0 * std::sqrt(1.0 / (out.rCircle - 1.0) + 1.0);
    return out;
}

ThetaResult bestTheta(const RowModel& row, double r, LambdaMode mode) {
    ThetaResult out;
    out.lambdaMode = mode;

    const double b = row.d;
    const double mnorm = norm2(row.mu);
    const double m2 = mnorm * mnorm;
    const double lmin = row.sigma.lambdaMin();

    auto setTheta = [&](double theta, int caseId, bool best) {
        out.exists = true;
        out.theta = theta;
        out.sqrtTheta = std::sqrt(std::max(0.0, theta));
        out.caseId = caseId;
        out.isBest = best;
    };
    auto setSqrtTheta = [&](double st, int caseId, bool best) {
        out.exists = true;
        out.sqrtTheta = st;
        out.theta = st * st;
        out.caseId = caseId;
        out.isBest = best;
    };

    if (mnorm == 0.0) {
        if (r == 0.0) {
            // ln g with mu = 0: theta must vanish, so only b <= 0 admits one.
            if (b > 0.0) {
                out.caseId = 11;
            } else {
                setTheta(0.0, b == 0.0 ? 9 : 10, b == 0.0);
            }
            return out;
        }
        out.caseId = 1;
        if (r < -1.0) setTheta(0.0, 1, true);
        return out;
    }

    const double q = invQuadForm(row.sigma, row.mu);
    const double lam = lambdaMuMin(row.mu, row.sigma, mode);
    out.lambdaMuMin = lam;
    const TangencyConstants tc = tangencyConstants(row.mu, row.sigma, mode);
    out.rCircle = tc.rCircle;
    out.rStar = tc.rStar;

    if (r == 0.0) {
        if (b == 0.0)
            setSqrtTheta(std::sqrt(q), 9, true);
        else if (b < 0.0)
            setTheta(q + 2.0 * m2 / lmin, 10, false);
        else
            out.caseId = 11;
        return out;
    }

    if (b == 0.0) {
        setTheta(q, 2, true);
        return out;
    }
    if (b < 0.0) {
        if (r <= -2.0)
            setTheta((q - (2.0 + r) * m2 / lmin) / (-1.0 - r), 3, false);
        else if (r < -1.0)
            setTheta(q / (-1.0 - r), 4, false);
        else
            setTheta(q + (2.0 + r) * m2 / lmin, 5, false);
        return out;
    }

    // b > 0
    if (r >= -1.0) {
        out.caseId = 6;
        return out;
    }
    double lambda0 = 0.0;
    if (isIsotropic(row.sigma, &lambda0)) {
        setSqrtTheta(mnorm / std::sqrt(lambda0) * (-r + 1.0) / (-r - 1.0), 8, true);
        return out;
    }
    if (tc.rStar && r <= *tc.rStar && tc.rCircle > 1.0) {
        setSqrtTheta(std::sqrt((-r + 2.0) / (-r - 2.0)) * std::sqrt(q), 7, true);
        return out;
    }
    const double st = ((-r) * mnorm / std::sqrt(lam) +
                       std::sqrt(std::max(0.0, (2.0 + r) * m2 / lam + (-1.0 - r) * q))) /
                      (-1.0 - r);
    setSqrtTheta(st, 7, true);
    return out;
}

namespace {

// Right-hand side of the Gaussian concavity condition in (tbar, sbar) with
// G = b*tbar - m*sbar = sqrt(theta) and proj = m*sbar.
double gaussianRhs(double G, double proj) {
    const double theta = G * G;
    return theta * theta - 2.0 * theta + 2.0 * G * (theta - 1.0) * proj +
           (theta + 1.0) * proj * proj;
}

}  // namespace

GaussianPStar gaussianBestP(const RowModel& row, LambdaMode mode) {
    if (!std::holds_alternative<Gaussian>(row.marginal))
        throw WrongMarginal("gaussianBestP: row marginal must be Gaussian");
    GaussianPStar out;
    const double b = row.d;
    if (b < 0.0) return out;  // no threshold

    const double q = invQuadForm(row.sigma, row.mu);
    if (b == 0.0) {
        out.exists = true;
        out.theta = q;
        out.pstar = gaussianCdf(std::sqrt(q));
        out.isBest = true;
        return out;
    }

    const double m = norm2(row.mu);
    if (m == 0.0) {
        // g is positive and radially unbounded; condition reduces to
        // theta^2 - 2 theta >= 0, violated on theta in (0, 2).
        out.exists = true;
        out.theta = 2.0;
        out.pstar = gaussianCdf(std::sqrt(2.0));
        out.isBest = true;
        return out;
    }
    const double L = 1.0 / std::sqrt(lambdaMuMin(row.mu, row.sigma, mode));

    auto violated = [&](double tbar, double sbar) {
        const double G = b * tbar - m * sbar;
        if (!(G > 0.0)) return false;  // outside E
        return q > gaussianRhs(G, m * sbar);
    };

    // Bound tbar: beyond it the quartic dominates uniformly in sbar.
    double tmax = 1.0;
    for (int k = 0; k < 200; ++k) {
        bool anyViol = false;
        for (int j = 0; j <= 64; ++j) {
            const double sb = -L + 2.0 * L * j / 64.0;
            for (double f : {1.0, 1.5, 2.0})
                if (violated(tmax * f, sb)) anyViol = true;
        }
        if (!anyViol) break;
        tmax *= 2.0;
    }
    tmax *= 2.0;

    const int n = 1024;
    double bestG = 0.0;
    double bestT = 0.0, bestS = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double tb = tmax * i / n;
        for (int j = 0; j <= n; ++j) {
            const double sb = -L + 2.0 * L * j / n;
            if (!violated(tb, sb)) continue;
            const double G = b * tb - m * sb;
            if (G > bestG) {
                bestG = G;
                bestT = tb;
                bestS = sb;
            }
        }
    }
    // Local grid refinement around the best violated cell.
    double ht = tmax / n;
    double hs = 2.0 * L / n;
    while (ht > 1e-7 || hs > 1e-7) {
        double curG = bestG, curT = bestT, curS = bestS;
        for (int i = -16; i <= 16; ++i) {
            for (int j = -16; j <= 16; ++j) {
                const double tb = bestT + i * ht / 8.0;
                const double sb = std::clamp(bestS + j * hs / 8.0, -L, L);
                if (tb <= 0.0 || !violated(tb, sb)) continue;
                const double G = b * tb - m * sb;
                if (G > curG) {
                    curG = G;
                    curT = tb;
                    curS = sb;
                }
            }
        }
        bestG = curG;
        bestT = curT;
        bestS = curS;
        ht /= 8.0;
        hs /= 8.0;
    }

    out.exists = true;
    out.theta = bestG * bestG;
    out.pstar = gaussianCdf(bestG);
    out.isBest = true;
    return out;
}

PStarResult assemblePStar(const std::vector<RowModel>& rows, LambdaMode mode, double eps0) {
    if (rows.empty()) throw ParamError("assemblePStar: empty row list");
    if (!(eps0 > 0.0 && eps0 < 1.0)) throw ParamError("assemblePStar: eps0 must be in (0,1)");

    PStarResult out;
    out.pstar = 0.5;
    out.binding = PStarResult::Binding::Half;

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const RowModel& row = rows[i];
        const ThetaResult th = bestTheta(row, row.r, mode);
        if (!th.exists)
            throw MissingTheta("assemblePStar: row " + std::to_string(i) +
                               " has no best threshold (theorem item " +
                               std::to_string(th.caseId) + ")");
        const double alpha = row.r == 0.0 ? 1.0 + eps0 : -row.r + 1.0;
        const double tstar = tStarAlpha(row.marginal, alpha);

        PStarResult::Contribution c;
        c.thetaTerm = cdf(row.marginal, *th.sqrtTheta);
        c.tstarTerm = cdf(row.marginal, tstar);
        out.contributions.push_back(c);

        if (c.thetaTerm > out.pstar) {
            out.pstar = c.thetaTerm;
            out.binding = PStarResult::Binding::ThetaTerm;
            out.bindingRow = i;
        }
        if (c.tstarTerm > out.pstar) {
            out.pstar = c.tstarTerm;
            out.binding = PStarResult::Binding::TStarTerm;
            out.bindingRow = i;
        }
    }
    return out;
}

}  // namespace evconvex
