#include "evconvex/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace evconvex {

namespace {

void checkSameDim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DimError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                       " vs " + std::to_string(b) + ")");
    }
}

}  // namespace

double dot(const Vec& a, const Vec& b) {
    checkSameDim(a.size(), b.size(), "dot");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

Vec scale(const Vec& v, double s) {
    Vec out(v);
    for (double& x : out) x *= s;
    return out;
}

Vec add(const Vec& a, const Vec& b) {
    checkSameDim(a.size(), b.size(), "add");
    Vec out(a);
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

Vec sub(const Vec& a, const Vec& b) {
    checkSameDim(a.size(), b.size(), "sub");
    Vec out(a);
    for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
    return out;
}

SymMatrix::SymMatrix(const std::vector<std::vector<double>>& rows) : dim_(rows.size()) {
    a_.assign(dim_ * dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
        if (rows[i].size() != dim_) throw DimError("SymMatrix: ragged row list");
        for (std::size_t j = 0; j < dim_; ++j) a_[i * dim_ + j] = rows[i][j];
    }
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = i + 1; j < dim_; ++j)
            if (a_[i * dim_ + j] != a_[j * dim_ + i])
                throw InvalidMatrix("SymMatrix: entries not symmetric as stored");
}

SymMatrix SymMatrix::identity(std::size_t dim) {
    SymMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
}

Vec SymMatrix::mul(const Vec& x) const {
    checkSameDim(x.size(), dim_, "SymMatrix::mul");
    Vec out(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) s += a_[i * dim_ + j] * x[j];
        out[i] = s;
    }
    return out;
}

double SymMatrix::maxAbs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::fabs(v));
    return m;
}

double SymMatrix::frobenius() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
}

EigenPairs jacobiEigen(const SymMatrix& input) {
    const std::size_t n = input.dim();
    if (n == 0) throw InvalidMatrix("jacobiEigen: empty matrix");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!std::isfinite(input.at(i, j)))
                throw InvalidMatrix("jacobiEigen: non-finite entries");

    SymMatrix a = input;
    std::vector<Vec> q(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) q[i][i] = 1.0;  // q[i] = column i of Q

    const double normA = std::max(input.frobenius(), 1e-300);
    const double tol = 1e-12 * normA;
    const int maxSweeps = 100;

    for (int sweep = 0; sweep < maxSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t r = p + 1; r < n; ++r) off += 2.0 * a.at(p, r) * a.at(p, r);
        if (std::sqrt(off) < tol) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t r = p + 1; r < n; ++r) {
                const double apq = a.at(p, r);
                if (apq == 0.0) continue;
                const double app = a.at(p, p);
                const double aqq = a.at(r, r);
                const double tau = (aqq - app) / (2.0 * apq);
                double t;
                if (tau >= 0.0)
                    t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
                else
                    t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a.at(k, p);
                    const double akq = a.at(k, r);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, r) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a.at(p, k);
                    const double aqk = a.at(r, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(r, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double qkp = q[k][p];
                    const double qkq = q[k][r];
                    q[k][p] = c * qkp - s * qkq;
                    q[k][r] = s * qkp + c * qkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a.at(i, i) < a.at(j, j); });

    EigenPairs out;
    out.values.resize(n);
    out.vectors.assign(n, Vec(n, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a.at(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors[k][i] = q[i][order[k]];
    }
    return out;
}

namespace {

std::vector<double> choleskyLower(const SymMatrix& a) {
    const std::size_t n = a.dim();
    std::vector<double> l(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
            if (i == j) {
                if (s <= 0.0) throw InvalidMatrix("cholesky: matrix not positive definite");
                l[i * n + i] = std::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    return l;
}

}  // namespace

SpdMatrix::SpdMatrix(const SymMatrix& entries) : entries_(entries) {
    eig_ = jacobiEigen(entries_);
    const double lmax = eig_.values.back();
    if (!(lmax > 0.0) || eig_.values.front() < 1e-12 * lmax)
        throw InvalidMatrix("SpdMatrix: matrix not (numerically) positive definite");

    // Reconstruction residual guard for the cached eigenpairs.
    const std::size_t n = entries_.dim();
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double rec = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                rec += eig_.values[k] * eig_.vectors[k][i] * eig_.vectors[k][j];
            resid = std::max(resid, std::fabs(rec - entries_.at(i, j)));
        }
    }
    if (resid > 1e-10 * std::max(entries_.maxAbs(), 1e-300))
        throw InvalidMatrix("SpdMatrix: eigen reconstruction residual too large");

    chol_ = choleskyLower(entries_);
}

SpdMatrix SpdMatrix::identity(std::size_t dim) { return SpdMatrix(SymMatrix::identity(dim)); }

Vec SpdMatrix::solve(const Vec& b) const {
    const std::size_t n = dim();
    checkSameDim(b.size(), n, "SpdMatrix::solve");
    Vec y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= chol_[i * n + k] * y[k];
        y[i] = s / chol_[i * n + i];
    }
    Vec x(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= chol_[k * n + ii] * x[k];
        x[ii] = s / chol_[ii * n + ii];
    }
    return x;
}

Vec SpdMatrix::cholMul(const Vec& z) const {
    const std::size_t n = dim();
    checkSameDim(z.size(), n, "SpdMatrix::cholMul");
    Vec out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k <= i; ++k) s += chol_[i * n + k] * z[k];
        out[i] = s;
    }
    return out;
}

EigenPairs eigDecompose(const SpdMatrix& s) { return s.eig(); }

double invQuadForm(const SpdMatrix& s, const Vec& v) {
    checkSameDim(v.size(), s.dim(), "invQuadForm");
    return dot(v, s.solve(v));
}

double quadForm(const SpdMatrix& s, const Vec& x) {
    checkSameDim(x.size(), s.dim(), "quadForm");
    return dot(x, s.mul(x));
}

std::pair<double, double> rankOneSpectrum(const Vec& z, const Vec& y, RankOneMode mode) {
    if (mode != RankOneMode::Single) checkSameDim(z.size(), y.size(), "rankOneSpectrum");
    const double zz = dot(z, z);
    if (mode == RankOneMode::Single) {
        if (zz == 0.0) throw DegenerateInput("rankOneSpectrum: zero z in single mode");
        return {zz, 0.0};
    }
    const double yy = dot(y, y);
    const double yz = dot(y, z);
    if (mode == RankOneMode::Sum) {
        const double disc = std::sqrt((yy - zz) * (yy - zz) + 4.0 * yz * yz);
        return {(yy + zz + disc) / 2.0, (yy + zz - disc) / 2.0};
    }
    const double disc = std::sqrt(std::max(0.0, (zz + yy) * (zz + yy) - 4.0 * yz * yz));
    return {(zz - yy + disc) / 2.0, (zz - yy - disc) / 2.0};
}

}  // namespace evconvex
