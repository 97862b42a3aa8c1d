#include "evconvex/copula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace evconvex {

namespace {

constexpr double kInvE = 0.36787944117144232;  // e^{-1}

std::string pointToString(const Vec& x) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

double detDense(std::vector<double> a, std::size_t n) {
    double det = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
        if (a[piv * n + col] == 0.0) return 0.0;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
            det = -det;
        }
        det *= a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / a[col * n + col];
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
        }
    }
    return det;
}

}  // namespace

std::size_t domainDim(const Domain& d) {
    if (const DomainBox* b = std::get_if<DomainBox>(&d)) return b->lo.size();
    return std::get<DomainBall>(d).center.size();
}

bool domainContains(const Domain& d, const Vec& x) {
    if (x.size() != domainDim(d)) return false;
    if (const DomainBox* b = std::get_if<DomainBox>(&d)) {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < b->lo[i] || x[i] > b->hi[i]) return false;
        return true;
    }
    const DomainBall& ball = std::get<DomainBall>(d);
    return norm2(sub(x, ball.center)) <= ball.radius * (1.0 + 1e-12);
}

double domainCoordinateMin(const Domain& d) {
    if (const DomainBox* b = std::get_if<DomainBox>(&d))
        return *std::min_element(b->lo.begin(), b->lo.end());
    const DomainBall& ball = std::get<DomainBall>(d);
    double m = ball.center[0] - ball.radius;
    for (double c : ball.center) m = std::min(m, c - ball.radius);
    return m;
}

DomainBox domainHull(const Domain& d) {
    if (const DomainBox* b = std::get_if<DomainBox>(&d)) return *b;
    const DomainBall& ball = std::get<DomainBall>(d);
    DomainBox box;
    box.lo = ball.center;
    box.hi = ball.center;
    for (std::size_t i = 0; i < ball.center.size(); ++i) {
        box.lo[i] -= ball.radius;
        box.hi[i] += ball.radius;
    }
    return box;
}

Vec domainClamp(const Domain& d, const Vec& x) {
    if (const DomainBox* b = std::get_if<DomainBox>(&d)) {
        Vec out(x);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = std::clamp(out[i], b->lo[i], b->hi[i]);
        return out;
    }
    const DomainBall& ball = std::get<DomainBall>(d);
    const Vec rel = sub(x, ball.center);
    const double r = norm2(rel);
    if (r <= ball.radius) return x;
    return add(ball.center, scale(rel, ball.radius / r));
}

double KappaModel::fSep(double t) const {
    const double u = c2_ + c1_ * t;
    if (d_ >= 1.0) return 1.0 / u;
    const double a = 2.0 / d_ - 1.0;
    return std::pow(a * u, d_ / (d_ - 2.0));
}

double KappaModel::fSepD1(double t) const {
    const double u = c2_ + c1_ * t;
    if (d_ >= 1.0) return -c1_ / (u * u);
    const double a = 2.0 / d_ - 1.0;
    const double e = d_ / (d_ - 2.0);
    return e * a * c1_ * std::pow(a * u, e - 1.0);
}

double KappaModel::fSepD2(double t) const {
    const double u = c2_ + c1_ * t;
    if (d_ >= 1.0) return 2.0 * c1_ * c1_ / (u * u * u);
    const double a = 2.0 / d_ - 1.0;
    const double e = d_ / (d_ - 2.0);
    return e * (e - 1.0) * a * a * c1_ * c1_ * std::pow(a * u, e - 2.0);
}

double KappaModel::evalUnchecked(const Vec& x) const {
    if (kind_ == Kind::builtSeparable) {
        double s = 0.0;
        for (double xi : x) s += fSep(xi);
        return s;
    }
    // userGrid: multilinear interpolation.
    const std::size_t k = k_;
    std::vector<std::size_t> cell(k);
    std::vector<double> frac(k);
    for (std::size_t i = 0; i < k; ++i) {
        const Vec& nodes = axisNodes_[i];
        double xi = std::clamp(x[i], nodes.front(), nodes.back());
        std::size_t j = 0;
        while (j + 2 < nodes.size() && xi > nodes[j + 1]) ++j;
        cell[i] = j;
        frac[i] = (xi - nodes[j]) / (nodes[j + 1] - nodes[j]);
    }
    double val = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t(1) << k); ++corner) {
        double w = 1.0;
        std::size_t idx = 0;
        for (std::size_t i = 0; i < k; ++i) {
            const bool hi = (corner >> i) & 1;
            w *= hi ? frac[i] : 1.0 - frac[i];
            idx = idx * axisNodes_[i].size() + (cell[i] + (hi ? 1 : 0));
        }
        val += w * values_[idx];
    }
    return val;
}

double KappaModel::eval(const Vec& x) const {
    if (!domainContains(domain_, x))
        throw OutsideDomain("KappaModel: evaluation point outside the certified domain " +
                            pointToString(x));
    return evalUnchecked(x);
}

double KappaModel::evalClamped(const Vec& x) const {
    const Vec xc = domainClamp(domain_, x);
    return std::clamp(evalUnchecked(xc), 1e-9, 1.0);
}

Vec KappaModel::grad(const Vec& x) const {
    if (!domainContains(domain_, x))
        throw OutsideDomain("KappaModel::grad: point outside domain");
    Vec g(k_, 0.0);
    if (kind_ == Kind::builtSeparable) {
        for (std::size_t i = 0; i < k_; ++i) g[i] = fSepD1(x[i]);
        return g;
    }
    // Central difference of the multilinear surface (exact inside a cell).
    const double h = 1e-6;
    for (std::size_t i = 0; i < k_; ++i) {
        Vec xp(x), xm(x);
        xp[i] += h;
        xm[i] -= h;
        g[i] = (evalUnchecked(xp) - evalUnchecked(xm)) / (2.0 * h);
    }
    return g;
}

SymMatrix KappaModel::hess(const Vec& x) const {
    if (!domainContains(domain_, x))
        throw OutsideDomain("KappaModel::hess: point outside domain");
    SymMatrix h(k_, 0.0);
    if (kind_ == Kind::builtSeparable) {
        for (std::size_t i = 0; i < k_; ++i) h.at(i, i) = fSepD2(x[i]);
        return h;
    }
    const double step = 1e-5;
    for (std::size_t i = 0; i < k_; ++i) {
        for (std::size_t j = i + 1; j < k_; ++j) {
            Vec xpp(x), xpm(x), xmp(x), xmm(x);
            xpp[i] += step;
            xpp[j] += step;
            xpm[i] += step;
            xpm[j] -= step;
            xmp[i] -= step;
            xmp[j] += step;
            xmm[i] -= step;
            xmm[j] -= step;
            const double v = (evalUnchecked(xpp) - evalUnchecked(xpm) - evalUnchecked(xmp) +
                              evalUnchecked(xmm)) /
                             (4.0 * step * step);
            h.at(i, j) = v;
            h.at(j, i) = v;
        }
    }
    return h;
}

KappaModel KappaModel::buildSeparable(double d, double c1, double c2, std::size_t k,
                                      Domain domain) {
    if (!(d > 0.0)) throw InfeasibleBuild("buildKappa: requires d > 0");
    if (!(c1 > 0.0)) throw InfeasibleBuild("buildKappa: requires c1 > 0");
    if (k == 0 || domainDim(domain) != k)
        throw InfeasibleBuild("buildKappa: domain dimension mismatch");

    KappaModel m;
    m.kind_ = Kind::builtSeparable;
    m.k_ = k;
    m.domain_ = std::move(domain);
    m.d_ = d;
    m.c1_ = c1;
    m.c2_ = c2;

    const double xmin = domainCoordinateMin(m.domain_);
    if (!(c2 + c1 * xmin > 0.0))
        throw InfeasibleBuild("buildKappa: domain reaches the pole of f at x = " +
                              std::to_string(-c2 / c1));
    if (d < 1.0) {
        const double bound = d / ((2.0 - d) * c1 * k) - c2 / c1;
        if (!(xmin > bound))
            throw InfeasibleBuild("buildKappa: X_min constraint violated (X_min = " +
                                  std::to_string(xmin) + " must exceed " +
                                  std::to_string(bound) + ")");
    }

    // Sample the domain: corners/axis extremes plus grid or sphere points.
    std::vector<Vec> sample;
    const DomainBox hull = domainHull(m.domain_);
    if (std::holds_alternative<DomainBox>(m.domain_)) {
        const DomainBox& box = std::get<DomainBox>(m.domain_);
        const std::size_t corners = std::size_t(1) << k;
        for (std::size_t c = 0; c < corners; ++c) {
            Vec x(k);
            for (std::size_t i = 0; i < k; ++i) x[i] = ((c >> i) & 1) ? box.hi[i] : box.lo[i];
            sample.push_back(x);
        }
        Vec center(k);
        for (std::size_t i = 0; i < k; ++i) center[i] = 0.5 * (box.lo[i] + box.hi[i]);
        for (std::size_t i = 0; i < k; ++i) {
            for (int j = 0; j <= 32; ++j) {
                Vec x = center;
                x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * j / 32.0;
                sample.push_back(x);
            }
        }
    } else {
        const DomainBall& ball = std::get<DomainBall>(m.domain_);
        if (k == 2) {
            for (int j = 0; j < 4096; ++j) {
                const double a = 2.0 * M_PI * j / 4096.0;
                sample.push_back({ball.center[0] + ball.radius * std::cos(a),
                                  ball.center[1] + ball.radius * std::sin(a)});
            }
        } else {
            std::mt19937_64 rng(0x2545f491u);
            std::normal_distribution<double> gauss(0.0, 1.0);
            for (int j = 0; j < 4096; ++j) {
                Vec u(k);
                for (double& v : u) v = gauss(rng);
                const double n = norm2(u);
                if (n == 0.0) continue;
                sample.push_back(add(ball.center, scale(u, ball.radius / n)));
            }
        }
        for (std::size_t i = 0; i < k; ++i) {
            Vec lo = ball.center, hi = ball.center;
            lo[i] -= ball.radius;
            hi[i] += ball.radius;
            sample.push_back(lo);
            sample.push_back(hi);
        }
        sample.push_back(ball.center);
    }
    (void)hull;

    for (const Vec& x : sample) {
        const double kap = m.evalUnchecked(x);
        if (!(kap > 0.0) || kap > 1.0)
            throw InfeasibleBuild("buildKappa: kappa(x) = " + std::to_string(kap) +
                                  " outside (0, 1] at " + pointToString(x));
        for (std::size_t i = 0; i < k; ++i)
            if (!(m.fSepD2(x[i]) > 0.0))
                throw InfeasibleBuild("buildKappa: f'' not positive at " + pointToString(x));
    }
    return m;
}

KappaModel KappaModel::userGrid(std::vector<Vec> axisNodes, std::vector<double> values,
                                Domain domain) {
    const std::size_t k = axisNodes.size();
    if (k == 0 || domainDim(domain) != k)
        throw InfeasibleBuild("userGrid: domain dimension mismatch");
    std::size_t total = 1;
    for (const Vec& nodes : axisNodes) {
        if (nodes.size() < 2) throw InfeasibleBuild("userGrid: need >= 2 nodes per axis");
        for (std::size_t j = 1; j < nodes.size(); ++j)
            if (!(nodes[j] > nodes[j - 1]))
                throw InfeasibleBuild("userGrid: axis nodes must be strictly increasing");
        total *= nodes.size();
    }
    if (values.size() != total) throw InfeasibleBuild("userGrid: value table size mismatch");
    for (double v : values)
        if (!(v > 0.0) || v > 1.0)
            throw InfeasibleBuild("userGrid: kappa values must lie in (0, 1]");

    KappaModel m;
    m.kind_ = Kind::userGrid;
    m.k_ = k;
    m.domain_ = std::move(domain);
    m.axisNodes_ = std::move(axisNodes);
    m.values_ = std::move(values);
    return m;
}

double psi(double kappa, double t) {
    if (!(kappa > 0.0 && kappa <= 1.0)) throw DomainError("psi: kappa must be in (0, 1]");
    if (!(t > 0.0 && t <= 1.0)) throw DomainError("psi: t must be in (0, 1]");
    return std::pow(-std::log(t), 1.0 / kappa);
}

double psiInv(double kappa, double s) {
    if (!(kappa > 0.0 && kappa <= 1.0)) throw DomainError("psiInv: kappa must be in (0, 1]");
    if (!(s >= 0.0)) throw DomainError("psiInv: s must be >= 0");
    return std::exp(-std::pow(s, kappa));
}

double copulaValue(double kappaAtX, const std::vector<double>& u) {
    if (!(kappaAtX > 0.0 && kappaAtX <= 1.0))
        throw DomainError("copulaValue: kappa must be in (0, 1]");
    if (u.empty()) throw DomainError("copulaValue: empty argument");
    // log-sum-exp over a_i = ln(-ln u_i) keeps the generator sum stable for
    // small kappa.
    double amax = -std::numeric_limits<double>::infinity();
    std::vector<double> a(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!(u[i] > 0.0 && u[i] <= 1.0))
            throw DomainError("copulaValue: components must be in (0, 1]");
        const double nl = -std::log(u[i]);
        a[i] = nl > 0.0 ? std::log(nl) : -std::numeric_limits<double>::infinity();
        amax = std::max(amax, a[i]);
    }
    if (!std::isfinite(amax)) return 1.0;  // all u_i = 1
    double s = 0.0;
    for (double ai : a) s += std::exp((ai - amax) / kappaAtX);
    const double logSum = amax + kappaAtX * std::log(s);  // ln((sum psi)^kappa)
    return std::exp(-std::exp(logSum));
}

double bigU(const KappaModel& model, const Vec& x, double y, double p, bool allowLowP) {
    if (!(y > 0.0 && y < 1.0)) throw DomainError("bigU: y must be in (0, 1)");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("bigU: p must be in (0, 1)");
    if (!allowLowP && p < kInvE - 1e-15)
        throw DomainError("bigU: p below e^{-1} violates the generator assumption");
    const double kappa = model.eval(x);
    return std::exp(std::log(p) * std::pow(y, kappa));
}

PhiOmega phiOmega(double kappaAtX, double y, double p) {
    if (!(kappaAtX > 0.0 && kappaAtX <= 1.0))
        throw AssumptionViolated("phiOmega: kappa must be in (0, 1]");
    if (!(y > 0.0 && y < 1.0)) throw AssumptionViolated("phiOmega: y must be in (0, 1)");
    if (!(p >= kInvE - 1e-15 && p < 1.0))
        throw AssumptionViolated("phiOmega: p must be in [e^{-1}, 1)");
    const double k = kappaAtX;
    const double ly = std::log(y);
    const double lp = std::log(p);
    const double yk = std::pow(y, k);
    PhiOmega out;
    out.phi1 = k * ly * (k - 1.0 + k * lp * yk);
    out.phi2 = k * ly * ly * (1.0 + lp * yk) * (1.0 - k - k * lp * yk) +
               std::pow(1.0 + k * ly + lp * ly * yk * k, 2.0);
    out.omega = out.phi2 / out.phi1;
    return out;
}

double dBound(double y, double p) {
    if (!(y > 0.0 && y < 1.0)) throw DomainError("dBound: y must be in (0, 1)");
    if (!(p >= kInvE - 1e-15 && p < 1.0)) throw DomainError("dBound: p must be in [e^{-1}, 1)");
    const double ly = -std::log(y);           // > 0
    const double lpy = -std::log(p) * y;      // in (0, 1]
    const double onePlus = 1.0 - lpy;         // 1 + ln p * y
    const double a1 = ly * onePlus * onePlus / lpy;
    const double a2 = ly * onePlus;
    const double a3 = (1.0 / ly) / lpy;
    return 1.0 / (a1 + a2 + a3);
}

CopulaDiagnostics mMatrixPsd(const KappaModel& model, const Vec& x, double y, double p) {
    const double kappa = model.eval(x);
    const Vec g = model.grad(x);
    const SymMatrix h = model.hess(x);
    const std::size_t n = g.size();

    CopulaDiagnostics diag;
    const PhiOmega po = phiOmega(kappa, y, p);
    diag.phi1 = po.phi1;
    diag.phi2 = po.phi2;
    diag.omega = po.omega;
    diag.dBound = dBound(y, p);

    SymMatrix mMat(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            mMat.at(i, j) = po.phi1 * h.at(i, j) - po.phi2 * g[i] * g[j];
    diag.mEigMin = jacobiEigen(mMat).values.front();

    const double dUsed = model.kind() == KappaModel::Kind::builtSeparable ? model.dParam()
                                                                          : diag.dBound;
    SymMatrix a4(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a4.at(i, j) = dUsed * kappa * h.at(i, j) - g[i] * g[j];
    diag.a4EigMin = jacobiEigen(a4).values.front();

    std::vector<double> bordered((n + 1) * (n + 1), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) bordered[i * (n + 1) + j] = h.at(i, j);
        bordered[i * (n + 1) + n] = g[i];
        bordered[n * (n + 1) + i] = g[i];
    }
    bordered[n * (n + 1) + n] = dUsed * kappa;
    diag.deltaDet = detDense(std::move(bordered), n + 1);

    double mTrace = 0.0, a4Trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mTrace += std::fabs(mMat.at(i, i));
        a4Trace += std::fabs(a4.at(i, i));
    }
    diag.mPsd = diag.mEigMin >= -1e-10 * std::max(mTrace, 1e-300);
    diag.a4Psd = diag.a4EigMin >= -1e-10 * std::max(a4Trace, 1e-300);
    return diag;
}

KappaModel buildKappa(double d, double c1, double c2, std::size_t k, Domain domain) {
    return KappaModel::buildSeparable(d, c1, c2, k, std::move(domain));
}

}  // namespace evconvex
