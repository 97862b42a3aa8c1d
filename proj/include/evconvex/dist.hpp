#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "evconvex/linalg.hpp"

namespace evconvex {

struct Gaussian {};

struct Student {
    double nu = 1.0;
};

// 1-D generalized hyperbolic GH1(lambda, chi, psi, 0, 1, phi).
struct GH1 {
    double lambda = 0.0;
    double chi = 0.0;
    double psi = 0.0;
    double phi = 0.0;  // skew projection x^T gamma / sqrt(x^T Sigma x)
};

// Generalized inverse Gaussian N^-(lambda, chi, psi), support (0, inf).
struct Gig {
    double lambda = 0.0;
    double chi = 0.0;
    double psi = 0.0;
};

using Marginal1D = std::variant<Gaussian, Student, GH1, Gig>;

// Parameter admissibility: lambda<0 => chi>0, psi>=0; lambda=0 => chi>0, psi>0;
// lambda>0 => chi>=0, psi>0. Throws ParamError when violated.
void validate(const Marginal1D& m);

double density(const Marginal1D& m, double t);
// Analytic derivative of the density (Bessel recurrence for GH1).
double densityDerivative(const Marginal1D& m, double t);
double cdf(const Marginal1D& m, double t);
double quantile(const Marginal1D& m, double p);

// Truncation points (lo, hi) beyond which the density is below 1e-16 * peak.
std::pair<double, double> tailBounds(const Marginal1D& m);

std::vector<double> gigSample(const Gig& g, std::size_t n, std::uint64_t seed);

// Finite mixing table; empty `m` means m(omega) = mu + omega * gamma.
struct DiscreteMixing {
    std::vector<double> omega;
    std::vector<double> weight;
    std::vector<Vec> m;
};

struct NmvmModel {
    Vec mu;
    Vec gamma;
    SpdMatrix sigma;
    std::variant<Gig, DiscreteMixing> mixing;

    NmvmModel(Vec mu_, Vec gamma_, SpdMatrix sigma_, std::variant<Gig, DiscreteMixing> mix);
};

std::vector<Vec> nmvmSample(const NmvmModel& model, std::size_t n, std::uint64_t seed);

}  // namespace evconvex
