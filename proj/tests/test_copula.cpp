#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "evconvex/copula.hpp"
#include "testutil.hpp"

using namespace evconvex;

namespace {

KappaModel referenceKappa() {
    return buildKappa(1.0, 1.0, 10.0, 2, DomainBall{{0.0, 0.0}, 7.0});
}

Vec randomBallPoint(std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const Vec u = testutil::randomUnit(rng, 2);
    const double r = radius * std::sqrt(unif(rng));
    return scale(u, r);
}

}  // namespace

TEST_CASE("psi / psiInv") {
    CHECK(psi(1.0, std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(psi(0.5, std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(psiInv(0.5, 2.0) == doctest::Approx(std::exp(-std::sqrt(2.0))).epsilon(1e-14));
    CHECK(psiInv(0.5, 2.0) == doctest::Approx(0.2431).epsilon(1e-3));
    CHECK(psi(1.0, 1.0) == 0.0);

    // round trip over a (kappa, t) grid
    for (double kappa : {0.05, 0.2, 0.5, 0.8, 1.0}) {
        for (double t : {1e-6, 0.01, 0.3, 0.7, 0.99, 1.0}) {
            CHECK(psiInv(kappa, psi(kappa, t)) == doctest::Approx(t).epsilon(1e-12));
        }
        // strictly decreasing in t
        CHECK(psi(kappa, 0.2) > psi(kappa, 0.4));
    }

    CHECK_THROWS_AS(psi(0.0, 0.5), DomainError);
    CHECK_THROWS_AS(psi(1.5, 0.5), DomainError);
    CHECK_THROWS_AS(psi(0.5, 0.0), DomainError);
    CHECK_THROWS_AS(psiInv(0.5, -1.0), DomainError);
}

TEST_CASE("copulaValue") {
    CHECK(copulaValue(1.0, {0.5, 0.5}) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(copulaValue(0.3, {1.0, 1.0, 1.0}) == doctest::Approx(1.0));

    // literal evaluation at kappa = 1/2
    const double s = std::pow(std::pow(-std::log(0.9), 2.0) + std::pow(-std::log(0.8), 2.0),
                              0.5);
    const double want = std::exp(-s);
    CHECK(copulaValue(0.5, {0.9, 0.8}) == doctest::Approx(want).epsilon(1e-14));
    CHECK(copulaValue(0.5, {0.9, 0.8}) == doctest::Approx(0.781326).epsilon(1e-5));
    CHECK(copulaValue(0.5, {0.9, 0.8}) <= 0.8);

    CHECK_THROWS_AS(copulaValue(0.5, {0.0, 0.5}), DomainError);
    CHECK_THROWS_AS(copulaValue(0.5, {1.2, 0.5}), DomainError);
}

TEST_CASE("copulaValue Frechet bound and monotonicity") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 10000; ++trial) {
        const double kappa = 0.02 + 0.98 * unif(rng);
        const std::size_t k = 2 + trial % 3;
        std::vector<double> u(k);
        double umin = 1.0;
        for (double& v : u) {
            v = std::pow(unif(rng), 2.0);
            if (v <= 0.0) v = 1e-12;
            umin = std::min(umin, v);
        }
        const double c = copulaValue(kappa, u);
        CHECK(c <= umin * (1.0 + 1e-12));
        CHECK(c >= 0.0);

        if (trial < 100) {  // componentwise monotone nondecreasing
            std::vector<double> u2(u);
            const std::size_t j = trial % k;
            u2[j] = u[j] + (1.0 - u[j]) * 0.3;
            CHECK(copulaValue(kappa, u2) >= c - 1e-12);
        }
    }
}

TEST_CASE("bigU closed form") {
    const KappaModel model = referenceKappa();
    const Vec x{1.0, -2.0};

    // y -> 1 recovers p (evaluated at y extremely close to 1).
    CHECK(bigU(model, x, 1.0 - 1e-12, 0.9) == doctest::Approx(0.9).epsilon(1e-9));

    // kappa == 1 constant: U = p^{y}. Via a constant user grid.
    const KappaModel unit = KappaModel::userGrid(
        {{-10.0, 10.0}, {-10.0, 10.0}},
        {1.0, 1.0, 1.0, 1.0},
        DomainBox{{-10.0, -10.0}, {10.0, 10.0}});
    CHECK(bigU(unit, {0.0, 0.0}, 0.5, 0.81) == doctest::Approx(0.9).epsilon(1e-12));

    // closed form equals the composed generator route on random triples.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec xx = randomBallPoint(rng, 7.0);
        const double y = 0.01 + 0.98 * unif(rng);
        const double p = std::exp(-1.0) + (1.0 - std::exp(-1.0) - 0.01) * unif(rng);
        const double kappa = model.eval(xx);
        const double composed = psiInv(kappa, y * psi(kappa, p));
        const double closed = bigU(model, xx, y, p);
        CHECK(closed == doctest::Approx(composed).epsilon(1e-14));
        CHECK(closed > p);
        CHECK(closed < 1.0);
    }

    CHECK_THROWS_AS(bigU(model, x, 0.5, 0.2), DomainError);  // p below e^{-1}
    CHECK_NOTHROW(bigU(model, x, 0.5, 0.2, true));
}

TEST_CASE("phiOmega positivity and the printed evaluation") {
    // kappa = 1, y = 0.5, p = e^{-1}: phi1 = ln(0.5) * (-0.5) = 0.3466.
    const PhiOmega po = phiOmega(1.0, 0.5, std::exp(-1.0));
    CHECK(po.phi1 == doctest::Approx(-std::log(0.5) * 0.5).epsilon(1e-12));
    CHECK(po.phi1 == doctest::Approx(0.3466).epsilon(1e-3));
    CHECK(po.phi2 > 0.0);

    std::mt19937_64 rng(88);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const double kappa = 0.02 + 0.98 * unif(rng);
        const double y = 0.01 + 0.975 * unif(rng);
        const double p = std::exp(-1.0) + (1.0 - std::exp(-1.0) - 1e-6) * unif(rng);
        const PhiOmega v = phiOmega(kappa, y, p);
        CHECK(v.phi1 > 0.0);
        CHECK(v.phi2 > 0.0);
    }

    CHECK_THROWS_AS(phiOmega(1.0, 0.5, 0.2), AssumptionViolated);
    CHECK_THROWS_AS(phiOmega(0.0, 0.5, 0.9), AssumptionViolated);
}

TEST_CASE("dBound evaluation and the 1/omega >= d kappa inequality") {
    // direct a1, a2, a3 arithmetic at y = 1/2, p = e^{-1}
    const double d = dBound(0.5, std::exp(-1.0));
    CHECK(d == doctest::Approx(0.2794).epsilon(1e-3));

    // divergence of a3 as y -> 1-
    CHECK(dBound(1.0 - 1e-9, 0.9) < 1e-6);

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double y = 0.01 + 0.97 * unif(rng);
        const double p = std::exp(-1.0) + (1.0 - std::exp(-1.0) - 1e-6) * unif(rng);
        const double dv = dBound(y, p);
        CHECK(dv > 0.0);
        for (double kappa = 0.05; kappa <= 1.0 + 1e-12; kappa += 0.05) {
            const PhiOmega po = phiOmega(kappa, y, p);
            CHECK(1.0 / po.omega >= dv * kappa - 1e-12);
        }
    }
}

TEST_CASE("buildKappa reference constructions") {
    // d >= 1 with the ball of radius 7: kappa = sum 1/(x_i + 10) in (0, 2/3].
    const KappaModel m = referenceKappa();
    CHECK(m.eval({0.0, 0.0}) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(m.eval({-7.0, 0.0}) == doctest::Approx(1.0 / 3.0 + 0.1).epsilon(1e-14));
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const Vec x = randomBallPoint(rng, 7.0);
        const double v = m.eval(x);
        CHECK(v > 0.0);
        CHECK(v <= 2.0 / 3.0 + 1e-12);
    }

    // d in (0, 1) with radius 9 - d/(4 - 2d).
    for (double d : {0.2, 0.5, 0.9}) {
        const double radius = 9.0 - d / (4.0 - 2.0 * d);
        CHECK_NOTHROW(buildKappa(d, 1.0, 10.0, 2, DomainBall{{0.0, 0.0}, radius}));
    }

    // pole inside the domain
    CHECK_THROWS_AS(buildKappa(1.0, 1.0, 10.0, 2, DomainBall{{0.0, 0.0}, 10.5}),
                    InfeasibleBuild);
    // kappa exceeding 1 near the pole
    CHECK_THROWS_AS(buildKappa(1.0, 1.0, 10.0, 2, DomainBall{{0.0, 0.0}, 9.7}),
                    InfeasibleBuild);
}

TEST_CASE("kappa evaluation outside the domain is an error") {
    const KappaModel m = referenceKappa();
    CHECK_THROWS_AS(m.eval({8.0, 0.0}), OutsideDomain);
    CHECK_THROWS_AS(m.grad({8.0, 0.0}), OutsideDomain);
    CHECK(m.evalClamped({8.0, 0.0}) == doctest::Approx(m.eval({7.0, 0.0})).epsilon(1e-12));
    CHECK(m.evalClamped({100.0, 100.0}) > 0.0);
}

TEST_CASE("mMatrixPsd diagnostics") {
    const KappaModel m = referenceKappa();
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // Assumption-4 matrix PSD at 100 random x (built d = 1 >= 1/2).
    for (int trial = 0; trial < 100; ++trial) {
        const Vec x = randomBallPoint(rng, 7.0);
        const double y = 1.0 / 3.0;
        const double p = 0.97;
        const CopulaDiagnostics diag = mMatrixPsd(m, x, y, p);
        CHECK(diag.a4Psd);
        CHECK(diag.phi1 > 0.0);
        CHECK(diag.phi2 > 0.0);

        // |Delta| closed form for the separable builder with d >= 1:
        // (prod 2/(x_i+10)^3) * (sum 1/(x_i+10)) * (d - 1/2).
        double prod = 1.0, sum = 0.0;
        for (double xi : x) {
            prod *= 2.0 / std::pow(xi + 10.0, 3.0);
            sum += 1.0 / (xi + 10.0);
        }
        const double want = prod * sum * (1.0 - 0.5);
        CHECK(diag.deltaDet == doctest::Approx(want).epsilon(1e-9));
        CHECK(diag.deltaDet > 0.0);
    }

    // constant-kappa user grid: M = 0.
    const KappaModel unit = KappaModel::userGrid(
        {{-1.0, 1.0}, {-1.0, 1.0}}, {0.4, 0.4, 0.4, 0.4}, DomainBox{{-1.0, -1.0}, {1.0, 1.0}});
    const CopulaDiagnostics diag = mMatrixPsd(unit, {0.2, -0.3}, 0.5, 0.9);
    CHECK(diag.mEigMin == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(diag.mPsd);
    CHECK(diag.a4Psd);
}

TEST_CASE("U is jointly convex for validated kappa models") {
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const KappaModel builders[2] = {
        referenceKappa(),
        buildKappa(0.5, 1.0, 10.0, 2,
                   DomainBall{{0.0, 0.0}, 9.0 - 0.5 / (4.0 - 2.0 * 0.5)}),
    };

    // y is drawn from the pipeline's 1/K values; the certificate is not
    // uniform over y in (0,1) (the omega bound degenerates toward y = 1).
    const double yChoices[7] = {1.0 / 2, 1.0 / 3, 1.0 / 4, 1.0 / 5, 1.0 / 6, 1.0 / 7, 1.0 / 8};
    for (const KappaModel& model : builders) {
        const double radius = std::get<DomainBall>(model.domain()).radius;
        int checked = 0;
        for (double p : {std::exp(-1.0), 0.9, 0.97}) {
            for (int trial = 0; trial < 67 && checked < 200; ++trial, ++checked) {
                const Vec x = randomBallPoint(rng, radius * 0.9);
                const double y = yChoices[trial % 7];
                (void)unif;

                auto f = [&](const Vec& z) {
                    const Vec xz(z.begin(), z.begin() + 2);
                    return bigU(model, xz, z[2], p);
                };
                Vec z{x[0], x[1], y};
                const SymMatrix h = testutil::fdHessian(f, z, 1e-4);
                const double lmin = testutil::smallestEig(h);
                CHECK(lmin >= -1e-7 * testutil::matScale(h));
            }
        }
    }
}

TEST_CASE("Hessian of U sign matches the M matrix sign") {
    const KappaModel model = referenceKappa();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int agreements = 0;
    int comparisons = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const Vec x = randomBallPoint(rng, 6.0);
        const double y = 0.05 + 0.9 * unif(rng);
        const double p = std::exp(-1.0) + (0.99 - std::exp(-1.0)) * unif(rng);

        const CopulaDiagnostics diag = mMatrixPsd(model, x, y, p);
        auto f = [&](const Vec& z) {
            const Vec xz(z.begin(), z.begin() + 2);
            return bigU(model, xz, z[2], p);
        };
        Vec z{x[0], x[1], y};
        const SymMatrix h = testutil::fdHessian(f, z, 1e-4);
        const double hMin = testutil::smallestEig(h) / testutil::matScale(h);
        const double mMin = diag.mEigMin / std::max(std::fabs(diag.phi1), 1e-12);
        if (std::fabs(hMin) < 1e-8 || std::fabs(mMin) < 1e-8) continue;  // dead band
        ++comparisons;
        if ((hMin >= 0.0) == (mMin >= 0.0)) ++agreements;
    }
    CHECK(comparisons > 0);
    CHECK(agreements == comparisons);
}

TEST_CASE("userGrid validation") {
    CHECK_THROWS_AS(KappaModel::userGrid({{0.0, 1.0}}, {0.5, 1.5},
                                         DomainBox{{0.0}, {1.0}}),
                    InfeasibleBuild);
    CHECK_THROWS_AS(KappaModel::userGrid({{1.0, 0.0}}, {0.5, 0.5},
                                         DomainBox{{0.0}, {1.0}}),
                    InfeasibleBuild);
    CHECK_THROWS_AS(KappaModel::userGrid({{0.0, 1.0}}, {0.5},
                                         DomainBox{{0.0}, {1.0}}),
                    InfeasibleBuild);
}
