#include "evconvex/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "evconvex/quadrature.hpp"
#include "evconvex/specfun.hpp"

namespace evconvex {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void validateGigParams(double lambda, double chi, double psi, const char* what) {
    bool ok;
    if (lambda < 0.0)
        ok = chi > 0.0 && psi >= 0.0;
    else if (lambda == 0.0)
        ok = chi > 0.0 && psi > 0.0;
    else
        ok = chi >= 0.0 && psi > 0.0;
    if (!ok || !std::isfinite(lambda) || !std::isfinite(chi) || !std::isfinite(psi))
        throw ParamError(std::string(what) + ": inadmissible (lambda, chi, psi)");
}

// log of the GH1 normalizing constant c (limits of the chi*psi -> 0 cases
// taken through the small-argument form of K_lambda).
double gh1LogC(const GH1& g) {
    const double lam = g.lambda;
    const double Lambda = std::sqrt(g.psi + g.phi * g.phi);
    if (g.chi > 0.0 && g.psi > 0.0) {
        const double s = std::sqrt(g.chi * g.psi);
        return -lam * std::log(s) + lam * std::log(g.psi) +
               (1.0 - 2.0 * lam) * std::log(Lambda) - 0.5 * std::log(2.0 * kPi) -
               (std::log(besselKScaled(lam, s)) - s);
    }
    if (g.psi == 0.0) {  // lambda < 0, chi > 0, phi != 0
        return (lam + 1.0) * std::log(2.0) - lam * std::log(g.chi) +
               (1.0 - 2.0 * lam) * std::log(Lambda) - 0.5 * std::log(2.0 * kPi) -
               std::lgamma(-lam);
    }
    // chi == 0, lambda > 0, psi > 0
    return (1.0 - lam) * std::log(2.0) + lam * std::log(g.psi) +
           (1.0 - 2.0 * lam) * std::log(Lambda) - 0.5 * std::log(2.0 * kPi) -
           std::lgamma(lam);
}

double gh1LogDensity(const GH1& g, double t) {
    const double Lambda = std::sqrt(g.psi + g.phi * g.phi);
    const double eta = std::sqrt(g.chi + t * t);
    if (Lambda == 0.0) {
        // psi = 0, phi = 0: f(t) = chat * (chi + t^2)^{lambda - 1/2}
        const double logChat = std::lgamma(-g.lambda + 0.5) - std::lgamma(-g.lambda) -
                               0.5 * std::log(kPi) - g.lambda * std::log(g.chi);
        return logChat + (g.lambda - 0.5) * std::log(g.chi + t * t);
    }
    const double z = Lambda * eta;
    return gh1LogC(g) + (std::log(besselKScaled(g.lambda - 0.5, z)) - z) +
           (g.lambda - 0.5) * std::log(z) + t * g.phi;
}

double gigLogDensity(const Gig& g, double t) {
    if (t <= 0.0) return -std::numeric_limits<double>::infinity();
    double logNorm;
    if (g.chi > 0.0 && g.psi > 0.0) {
        const double s = std::sqrt(g.chi * g.psi);
        logNorm = -g.lambda * std::log(g.chi) + g.lambda * std::log(s) - std::log(2.0) -
                  (std::log(besselKScaled(g.lambda, s)) - s);
    } else if (g.psi == 0.0) {  // inverse gamma Ig(-lambda, chi/2)
        logNorm = -g.lambda * std::log(0.5 * g.chi) - std::lgamma(-g.lambda);
    } else {  // chi == 0: gamma with shape lambda, rate psi/2
        logNorm = g.lambda * std::log(0.5 * g.psi) - std::lgamma(g.lambda);
    }
    double expo = -0.5 * g.psi * t;
    if (g.chi > 0.0) expo -= 0.5 * g.chi / t;
    return logNorm + (g.lambda - 1.0) * std::log(t) + expo;
}

double safeExp(double lx) { return lx < -745.0 ? 0.0 : std::exp(lx); }

}  // namespace

void validate(const Marginal1D& m) {
    if (std::holds_alternative<Gaussian>(m)) return;
    if (const Student* s = std::get_if<Student>(&m)) {
        if (!(s->nu > 0.0)) throw ParamError("Student: requires nu > 0");
        return;
    }
    if (const GH1* g = std::get_if<GH1>(&m)) {
        validateGigParams(g->lambda, g->chi, g->psi, "GH1");
        if (!std::isfinite(g->phi)) throw ParamError("GH1: phi must be finite");
        return;
    }
    const Gig& g = std::get<Gig>(m);
    validateGigParams(g.lambda, g.chi, g.psi, "Gig");
}

double density(const Marginal1D& m, double t) {
    validate(m);
    if (std::holds_alternative<Gaussian>(m))
        return std::exp(-0.5 * t * t) / std::sqrt(2.0 * kPi);
    if (const Student* s = std::get_if<Student>(&m)) {
        const double nu = s->nu;
        const double lf = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                          0.5 * std::log(nu * kPi) -
                          0.5 * (nu + 1.0) * std::log1p(t * t / nu);
        return std::exp(lf);
    }
    if (const GH1* g = std::get_if<GH1>(&m)) return safeExp(gh1LogDensity(*g, t));
    return safeExp(gigLogDensity(std::get<Gig>(m), t));
}

double densityDerivative(const Marginal1D& m, double t) {
    validate(m);
    if (std::holds_alternative<Gaussian>(m)) return -t * density(m, t);
    if (const Student* s = std::get_if<Student>(&m))
        return -(s->nu + 1.0) * t / (s->nu + t * t) * density(m, t);
    if (const GH1* g = std::get_if<GH1>(&m)) {
        const double Lambda = std::sqrt(g->psi + g->phi * g->phi);
        const double eta2 = g->chi + t * t;
        if (Lambda == 0.0)
            return density(m, t) * (2.0 * g->lambda - 1.0) * t / eta2;
        const double eta = std::sqrt(eta2);
        // f'/f = (2 lambda - 1) t / eta^2 + phi - (Lambda t / eta) / J
        const double j = besselKRatio(g->lambda, Lambda * eta);
        const double logd = (2.0 * g->lambda - 1.0) * t / eta2 + g->phi -
                            Lambda * t / (eta * j);
        return density(m, t) * logd;
    }
    const Gig& g = std::get<Gig>(m);
    if (t <= 0.0) return 0.0;
    return density(m, t) * ((g.lambda - 1.0) / t + 0.5 * g.chi / (t * t) - 0.5 * g.psi);
}

std::pair<double, double> tailBounds(const Marginal1D& m) {
    validate(m);
    if (std::holds_alternative<Gaussian>(m)) return {-40.0, 40.0};

    double peak = 0.0;
    for (double t : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0})
        peak = std::max(peak, density(m, t));
    const double cut = 1e-16 * peak;

    const bool positiveSupport = std::holds_alternative<Gig>(m);
    auto grow = [&](double sign) {
        double t = 1.0;
        for (int i = 0; i < 80; ++i) {
            if (density(m, sign * t) < cut) return sign * t;
            t *= 2.0;
        }
        return sign * t;
    };
    if (positiveSupport) return {0.0, grow(1.0)};
    return {grow(-1.0), grow(1.0)};
}

double cdf(const Marginal1D& m, double t) {
    validate(m);
    if (std::holds_alternative<Gaussian>(m)) return gaussianCdf(t);
    if (const Student* s = std::get_if<Student>(&m)) return studentCdf(s->nu, t);

    const auto [lo, hi] = tailBounds(m);
    if (t <= lo) return 0.0;
    if (t >= hi) return 1.0;
    auto f = [&](double u) { return density(m, u); };
    const double v = adaptiveSimpson(f, lo, t, 1e-10);
    return std::clamp(v, 0.0, 1.0);
}

double quantile(const Marginal1D& m, double p) {
    validate(m);
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0, 1)");
    auto [lo, hi] = tailBounds(m);
    if (std::holds_alternative<Gig>(m)) lo = 1e-300;
    double flo = cdf(m, lo);
    double fhi = cdf(m, hi);
    if (p <= flo) return lo;
    if (p >= fhi) return hi;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = cdf(m, mid);
        if (std::fabs(fm - p) <= 1e-10) return mid;
        if (fm < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14 * std::max(1.0, std::fabs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

namespace {

double sampleGamma(std::mt19937_64& rng, double shape, double rate) {
    // Marsaglia-Tsang; shape < 1 boosted through the U^{1/shape} identity.
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double boost = 1.0;
    double a = shape;
    if (a < 1.0) {
        double u = unif(rng);
        while (u <= 0.0) u = unif(rng);
        boost = std::pow(u, 1.0 / a);
        a += 1.0;
    }
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = gauss(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = unif(rng);
        if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v / rate;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return boost * d * v / rate;
    }
}

// Two-parameter GIG(lambda, beta, beta) sampler by ratio-of-uniforms with
// mode shift; the general case reduces to it by the sqrt(chi/psi) scaling.
class GigRouSampler {
  public:
    GigRouSampler(double lambda, double beta) : lambda_(lambda), beta_(beta) {
        mode_ = ((lambda - 1.0) + std::sqrt((lambda - 1.0) * (lambda - 1.0) + beta * beta)) /
                beta;
        logHMode_ = logH(mode_);
        // Stationary points of (z - m)^2 h(z): cubic with one root on each
        // side of the mode.
        auto cubic = [this](double z) {
            const double m = mode_;
            return z * z * z - z * z * (2.0 * (lambda_ + 1.0) / beta_ + m) +
                   z * (2.0 * (lambda_ - 1.0) * m / beta_ - 1.0) + m;
        };
        double lo = mode_ * 1e-12, hi = mode_;
        zMinus_ = bisect(cubic, lo, hi);
        lo = mode_;
        hi = mode_ * 2.0;
        while (cubic(hi) <= 0.0) hi *= 2.0;
        zPlus_ = bisect(cubic, lo, hi);
        vMin_ = (zMinus_ - mode_) * std::exp(0.5 * (logH(zMinus_) - logHMode_));
        vMax_ = (zPlus_ - mode_) * std::exp(0.5 * (logH(zPlus_) - logHMode_));
    }

    double draw(std::mt19937_64& rng) const {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (;;) {
            const double u = unif(rng);
            if (u <= 0.0) continue;
            const double v = vMin_ + unif(rng) * (vMax_ - vMin_);
            const double z = v / u + mode_;
            if (z <= 0.0) continue;
            if (2.0 * std::log(u) <= logH(z) - logHMode_) return z;
        }
    }

  private:
    double logH(double z) const {
        return (lambda_ - 1.0) * std::log(z) - 0.5 * beta_ * (z + 1.0 / z);
    }
    template <typename F>
    static double bisect(const F& f, double lo, double hi) {
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (f(lo) * f(mid) <= 0.0)
                hi = mid;
            else
                lo = mid;
        }
        return 0.5 * (lo + hi);
    }

    double lambda_, beta_, mode_, logHMode_, zMinus_, zPlus_, vMin_, vMax_;
};

}  // namespace

std::vector<double> gigSample(const Gig& g, std::size_t n, std::uint64_t seed) {
    validateGigParams(g.lambda, g.chi, g.psi, "gigSample");
    if (n == 0) throw ParamError("gigSample: n must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<double> out(n);

    if (g.psi == 0.0) {  // inverse gamma Ig(-lambda, chi/2)
        for (std::size_t i = 0; i < n; ++i)
            out[i] = 1.0 / sampleGamma(rng, -g.lambda, 0.5 * g.chi);
        return out;
    }
    if (g.chi == 0.0) {  // gamma(lambda, rate psi/2)
        for (std::size_t i = 0; i < n; ++i) out[i] = sampleGamma(rng, g.lambda, 0.5 * g.psi);
        return out;
    }
    const double beta = std::sqrt(g.chi * g.psi);
    const double scaleFactor = std::sqrt(g.chi / g.psi);
    GigRouSampler sampler(g.lambda, beta);
    for (std::size_t i = 0; i < n; ++i) out[i] = scaleFactor * sampler.draw(rng);
    return out;
}

NmvmModel::NmvmModel(Vec mu_, Vec gamma_, SpdMatrix sigma_,
                     std::variant<Gig, DiscreteMixing> mix)
    : mu(std::move(mu_)), gamma(std::move(gamma_)), sigma(std::move(sigma_)),
      mixing(std::move(mix)) {
    if (mu.size() != sigma.dim() || gamma.size() != sigma.dim())
        throw ParamError("NmvmModel: dimension mismatch");
    if (const Gig* g = std::get_if<Gig>(&mixing)) {
        validateGigParams(g->lambda, g->chi, g->psi, "NmvmModel mixing");
    } else {
        const DiscreteMixing& d = std::get<DiscreteMixing>(mixing);
        if (d.omega.empty() || d.omega.size() != d.weight.size())
            throw ParamError("NmvmModel: empty or ragged mixing table");
        double wsum = 0.0;
        for (std::size_t j = 0; j < d.omega.size(); ++j) {
            if (!(d.omega[j] > 0.0)) throw ParamError("NmvmModel: omega values must be > 0");
            if (d.weight[j] < 0.0) throw ParamError("NmvmModel: negative weight");
            wsum += d.weight[j];
        }
        if (std::fabs(wsum - 1.0) > 1e-12)
            throw ParamError("NmvmModel: weights must sum to 1");
        if (!d.m.empty() && d.m.size() != d.omega.size())
            throw ParamError("NmvmModel: m table size mismatch");
        for (const Vec& mj : d.m)
            if (mj.size() != mu.size()) throw ParamError("NmvmModel: m vector dimension");
    }
}

std::vector<Vec> nmvmSample(const NmvmModel& model, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ParamError("nmvmSample: n must be >= 1");
    const std::size_t dim = model.mu.size();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<double> omegas;
    if (const Gig* g = std::get_if<Gig>(&model.mixing)) {
        omegas = gigSample(*g, n, seed ^ 0x9e3779b97f4a7c15ULL);
    }
    const DiscreteMixing* table = std::get_if<DiscreteMixing>(&model.mixing);

    std::vector<Vec> out;
    out.reserve(n);
    Vec z(dim);
    for (std::size_t i = 0; i < n; ++i) {
        double omega;
        std::size_t idx = 0;
        if (table) {
            double u = unif(rng);
            double acc = 0.0;
            idx = table->omega.size() - 1;
            for (std::size_t j = 0; j < table->omega.size(); ++j) {
                acc += table->weight[j];
                if (u <= acc) {
                    idx = j;
                    break;
                }
            }
            omega = table->omega[idx];
        } else {
            omega = omegas[i];
        }
        for (std::size_t k = 0; k < dim; ++k) z[k] = gauss(rng);
        Vec v = model.sigma.cholMul(z);
        const double sw = std::sqrt(omega);
        for (std::size_t k = 0; k < dim; ++k) v[k] *= sw;
        if (table && !table->m.empty()) {
            for (std::size_t k = 0; k < dim; ++k) v[k] += table->m[idx][k];
        } else {
            for (std::size_t k = 0; k < dim; ++k) v[k] += model.mu[k] + omega * model.gamma[k];
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace evconvex
