#pragma once

#include <cstddef>
#include <vector>

#include "evconvex/errors.hpp"

namespace evconvex {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);  // Euclidean norm
Vec scale(const Vec& v, double s);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);

// Dense symmetric matrix, row-major storage.
class SymMatrix {
  public:
    SymMatrix() = default;
    SymMatrix(std::size_t dim, double fill = 0.0) : dim_(dim), a_(dim * dim, fill) {}
    explicit SymMatrix(const std::vector<std::vector<double>>& rows);

    static SymMatrix identity(std::size_t dim);

    std::size_t dim() const { return dim_; }
    double& at(std::size_t i, std::size_t j) { return a_[i * dim_ + j]; }
    double at(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }

    Vec mul(const Vec& x) const;
    double maxAbs() const;
    double frobenius() const;

  private:
    std::size_t dim_ = 0;
    std::vector<double> a_;
};

struct EigenPairs {
    Vec values;                // ascending
    std::vector<Vec> vectors;  // vectors[k] is the eigenvector for values[k]
};

// Cyclic Jacobi for a general real symmetric matrix. Converges when the
// off-diagonal Frobenius norm drops below 1e-12 * ||A||_F.
EigenPairs jacobiEigen(const SymMatrix& a);

// Symmetric positive definite scale matrix with cached eigenpairs and
// Cholesky factor (lower triangular L, L L^T = Sigma).
class SpdMatrix {
  public:
    explicit SpdMatrix(const SymMatrix& entries);
    explicit SpdMatrix(const std::vector<std::vector<double>>& rows)
        : SpdMatrix(SymMatrix(rows)) {}

    static SpdMatrix identity(std::size_t dim);

    std::size_t dim() const { return entries_.dim(); }
    const SymMatrix& entries() const { return entries_; }
    const EigenPairs& eig() const { return eig_; }
    double lambdaMin() const { return eig_.values.front(); }
    double lambdaMax() const { return eig_.values.back(); }
    // Lower-triangular Cholesky factor as a dense row-major dim x dim block.
    const std::vector<double>& chol() const { return chol_; }

    Vec mul(const Vec& x) const { return entries_.mul(x); }
    // Solves Sigma y = b through the Cholesky factor.
    Vec solve(const Vec& b) const;
    // L * z for the cached factor (used by samplers).
    Vec cholMul(const Vec& z) const;

  private:
    SymMatrix entries_;
    EigenPairs eig_;
    std::vector<double> chol_;
};

EigenPairs eigDecompose(const SpdMatrix& s);

// v^T Sigma^{-1} v, solved through the Cholesky factor.
double invQuadForm(const SpdMatrix& s, const Vec& v);

// x^T Sigma x.
double quadForm(const SpdMatrix& s, const Vec& x);

enum class RankOneMode { Sum, Single, Diff };

// Closed-form nonzero eigenvalues of Z Z^T + Y Y^T, Z Z^T, or Z Z^T - Y Y^T.
// Returned as (lambda1, lambda2) with lambda1 >= lambda2.
std::pair<double, double> rankOneSpectrum(const Vec& z, const Vec& y, RankOneMode mode);

}  // namespace evconvex
