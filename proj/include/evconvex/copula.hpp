#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "evconvex/linalg.hpp"

namespace evconvex {

struct DomainBox {
    Vec lo, hi;
};

struct DomainBall {
    Vec center;
    double radius = 0.0;
};

using Domain = std::variant<DomainBox, DomainBall>;

std::size_t domainDim(const Domain& d);
bool domainContains(const Domain& d, const Vec& x);
// Smallest coordinate value reachable anywhere in the domain.
double domainCoordinateMin(const Domain& d);
// Axis-aligned bounding box.
DomainBox domainHull(const Domain& d);
// Euclidean projection onto the domain.
Vec domainClamp(const Domain& d, const Vec& x);

// Decision-dependent Gumbel-Hougaard exponent kappa(x) in (0, 1].
class KappaModel {
  public:
    enum class Kind { builtSeparable, userGrid };

    // Separable construction kappa(x) = sum_i f(x_i) with
    //   f(x) = ((2/d - 1)(c2 + c1 x))^{d/(d-2)}   for d in (0, 1)
    //   f(x) = 1 / (c2 + c1 x)                    for d >= 1.
    // Validates 0 < kappa <= 1 and f'' > 0 over a corner+grid sample of the
    // domain; throws InfeasibleBuild with the violating point otherwise.
    static KappaModel buildSeparable(double d, double c1, double c2, std::size_t k,
                                     Domain domain);

    // Tabulated kappa on a per-axis regular grid, multilinear interpolation.
    static KappaModel userGrid(std::vector<Vec> axisNodes, std::vector<double> values,
                               Domain domain);

    Kind kind() const { return kind_; }
    std::size_t dimension() const { return k_; }
    const Domain& domain() const { return domain_; }
    double dParam() const { return d_; }
    double c1Param() const { return c1_; }
    double c2Param() const { return c2_; }
    const std::vector<Vec>& gridNodes() const { return axisNodes_; }
    const std::vector<double>& gridValues() const { return values_; }

    // Strict evaluation; x outside the domain is an error, not extrapolation.
    double eval(const Vec& x) const;
    // Clamped evaluation for figure export: projects x onto the domain and
    // clamps the result into (0, 1].
    double evalClamped(const Vec& x) const;
    Vec grad(const Vec& x) const;
    SymMatrix hess(const Vec& x) const;

  private:
    KappaModel() = default;

    double fSep(double t) const;
    double fSepD1(double t) const;
    double fSepD2(double t) const;
    double evalUnchecked(const Vec& x) const;

    Kind kind_ = Kind::builtSeparable;
    std::size_t k_ = 0;
    Domain domain_ = DomainBox{};
    double d_ = 1.0, c1_ = 1.0, c2_ = 10.0;
    std::vector<Vec> axisNodes_;    // userGrid
    std::vector<double> values_;    // userGrid, row-major over axes
};

struct CopulaDiagnostics {
    double phi1 = 0.0;
    double phi2 = 0.0;
    double omega = 0.0;
    double dBound = 0.0;
    double mEigMin = 0.0;       // smallest eigenvalue of M(x, y)
    double a4EigMin = 0.0;      // smallest eigenvalue of d*kappa*H - grad grad^T
    double deltaDet = 0.0;      // det [[H, grad],[grad^T, d*kappa]]
    bool mPsd = false;
    bool a4Psd = false;
};

// Generator psi_x(t) = (-ln t)^{1/kappa} and inverse exp(-s^kappa).
double psi(double kappa, double t);
double psiInv(double kappa, double s);

// Archimedean composition C(u) = exp(-(sum (-ln u_i)^{1/kappa})^kappa).
double copulaValue(double kappaAtX, const std::vector<double>& u);

// U(x, y) = psiInv(y * psi(p)) = p^{y^kappa(x)}.
double bigU(const KappaModel& model, const Vec& x, double y, double p,
            bool allowLowP = false);

struct PhiOmega {
    double phi1 = 0.0;
    double phi2 = 0.0;
    double omega = 0.0;
};

PhiOmega phiOmega(double kappaAtX, double y, double p);

// d = 1/(a1 + a2 + a3) from the omega upper bound; 1/omega >= d * kappa.
double dBound(double y, double p);

CopulaDiagnostics mMatrixPsd(const KappaModel& model, const Vec& x, double y, double p);

KappaModel buildKappa(double d, double c1, double c2, std::size_t k, Domain domain);

}  // namespace evconvex
