#include "evconvex/feasibility.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <thread>
#include <tuple>

#include "evconvex/quadrature.hpp"
#include "evconvex/specfun.hpp"

namespace evconvex {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool isZeroVec(const Vec& x) {
    for (double v : x)
        if (v != 0.0) return false;
    return true;
}

double minD(const Problem& prob) {
    double m = std::numeric_limits<double>::infinity();
    for (const RowModel& row : prob.rows) m = std::min(m, row.d);
    return m;
}

// Quantile split points of the GIG mixing law used by the radial quadrature,
// cached per parameter triple.
const std::vector<double>& gigSplits(const Gig& g) {
    static std::mutex mu;
    static std::map<std::tuple<double, double, double>, std::vector<double>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(g.lambda, g.chi, g.psi);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const Marginal1D m{g};
    std::vector<double> splits;
    for (double q : {1e-13, 0.01, 0.5, 0.99, 1.0 - 1e-13})
        splits.push_back(quantile(m, q));
    auto [pos, inserted] = cache.emplace(key, std::move(splits));
    return pos->second;
}

// P(W*phi + sqrt(W) Z <= g) for Z ~ N(0,1), W ~ GIG mixing; evaluated as the
// radial form 1/2 + 1/2 E_W[F_R((g - w phi)/sqrt(w))] with the half-normal
// radial CDF extended as an odd function.
double radialRowProbability(const Gig& mixing, double phi, double g) {
    if (phi < 0.0)
        throw MethodUnavailable("radial method requires gamma^T x >= 0");
    const std::vector<double>& base = gigSplits(mixing);
    std::vector<double> splits(base.begin(), base.end());
    if (phi > 0.0) {
        const double t = g / phi;  // sign change of the F_R argument
        if (t > splits.front() && t < splits.back()) {
            splits.push_back(t);
            std::sort(splits.begin(), splits.end());
        }
    }
    auto integrand = [&](double u) {  // u = ln(omega)
        const double w = std::exp(u);
        const double arg = (g - w * phi) / std::sqrt(w);
        const double fr = std::erf(arg / std::sqrt(2.0));
        return fr * density(Marginal1D{mixing}, w) * w;
    };
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < splits.size(); ++s) {
        const double lo = std::log(std::max(splits[s], 1e-300));
        const double hi = std::log(std::max(splits[s + 1], 1e-300));
        if (!(hi > lo)) continue;
        acc += gaussLegendreIntegrate(integrand, lo, hi, 160);
    }
    // Tail mass outside the 1e-13 quantile range contributes at the sign of
    // the integrand limit there.
    const double tailMass = 1e-13;
    acc += tailMass * (g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0));
    if (phi > 0.0) acc -= tailMass;
    return std::clamp(0.5 + 0.5 * acc, 0.0, 1.0);
}

struct RowRadialSpec {
    bool gaussian = false;
    Gig mixing;
    double phi = 0.0;
};

RowRadialSpec radialSpecFor(const Problem& prob, std::size_t i, const Vec& x) {
    RowRadialSpec spec;
    const RowModel& row = prob.rows[i];
    if (i < prob.gh.size() && prob.gh[i]) {
        const GhRowParams& g = *prob.gh[i];
        spec.mixing = Gig{g.lambda, g.chi, g.psi};
        spec.phi = dot(g.gamma, x) / std::sqrt(quadForm(row.sigma, x));
        return spec;
    }
    if (std::holds_alternative<Gaussian>(row.marginal)) {
        spec.gaussian = true;
        return spec;
    }
    if (const Student* s = std::get_if<Student>(&row.marginal)) {
        spec.mixing = Gig{-s->nu / 2.0, s->nu, 0.0};
        return spec;
    }
    if (const GH1* g = std::get_if<GH1>(&row.marginal)) {
        spec.mixing = Gig{g->lambda, g->chi, g->psi};
        spec.phi = g->phi;
        return spec;
    }
    throw MethodUnavailable("radial method: unsupported row marginal");
}

double combineRows(const Problem& prob, const Vec& x, const std::vector<double>& u) {
    if (prob.copula) {
        std::vector<double> uc(u);
        for (double& v : uc) v = std::clamp(v, 1e-300, 1.0);
        return copulaValue(prob.copula->eval(x), uc);
    }
    double p = 1.0;
    for (double v : u) p *= v;
    return p;
}

// Analytic per-row probability with the radial route for skewed rows.
double hybridProbability(const Problem& prob, const Vec& x) {
    if (isZeroVec(x)) return minD(prob) >= 0.0 ? 1.0 : 0.0;
    std::vector<double> u(prob.rows.size());
    for (std::size_t i = 0; i < prob.rows.size(); ++i) {
        const double g = rowG(prob.rows[i], x);
        const bool skewed = i < prob.gh.size() && prob.gh[i] && norm2(prob.gh[i]->gamma) > 0.0;
        if (skewed) {
            const RowRadialSpec spec = radialSpecFor(prob, i, x);
            if (spec.phi >= 0.0) {
                u[i] = radialRowProbability(spec.mixing, spec.phi, g);
                continue;
            }
        }
        u[i] = cdf(marginalAt(prob, i, x), g);
    }
    return combineRows(prob, x, u);
}

NmvmModel rowSamplingModel(const Problem& prob, std::size_t i) {
    const RowModel& row = prob.rows[i];
    const std::size_t n = row.mu.size();
    if (i < prob.gh.size() && prob.gh[i]) {
        const GhRowParams& g = *prob.gh[i];
        return NmvmModel(row.mu, g.gamma, row.sigma, Gig{g.lambda, g.chi, g.psi});
    }
    if (std::holds_alternative<Gaussian>(row.marginal)) {
        DiscreteMixing unit;
        unit.omega = {1.0};
        unit.weight = {1.0};
        return NmvmModel(row.mu, Vec(n, 0.0), row.sigma, unit);
    }
    if (const Student* s = std::get_if<Student>(&row.marginal))
        return NmvmModel(row.mu, Vec(n, 0.0), row.sigma, Gig{-s->nu / 2.0, s->nu, 0.0});
    throw MethodUnavailable("Monte Carlo: unsupported row marginal for sampling");
}

}  // namespace

void Problem::validateShape() const {
    if (rows.empty()) throw ParamError("Problem: needs at least one row");
    const std::size_t n = rows.front().mu.size();
    for (const RowModel& row : rows)
        if (row.mu.size() != n) throw DimError("Problem: rows disagree on dimension");
    if (domainDim(X) != n) throw DimError("Problem: domain dimension mismatch");
    if (!gh.empty() && gh.size() != rows.size())
        throw ParamError("Problem: gh list must be empty or one entry per row");
    for (std::size_t i = 0; i < gh.size(); ++i)
        if (gh[i] && gh[i]->gamma.size() != n)
            throw DimError("Problem: gh gamma dimension mismatch");
    if (copula && domainDim(copula->domain()) != n)
        throw DimError("Problem: copula domain dimension mismatch");
}

double rowG(const RowModel& row, const Vec& x) {
    const double xsx = quadForm(row.sigma, x);
    if (!(xsx > 0.0)) throw DomainError("rowG: x must be nonzero");
    return (row.d - dot(row.mu, x)) / std::sqrt(xsx);
}

Marginal1D marginalAt(const Problem& prob, std::size_t i, const Vec& x) {
    if (i < prob.gh.size() && prob.gh[i]) {
        const GhRowParams& g = *prob.gh[i];
        const double phi = dot(g.gamma, x) / std::sqrt(quadForm(prob.rows[i].sigma, x));
        return GH1{g.lambda, g.chi, g.psi, phi};
    }
    return prob.rows[i].marginal;
}

ProbEval jointProbability(const Problem& prob, const Vec& x, ProbMethod method,
                          const McOptions* mc) {
    prob.validateShape();
    if (x.size() != prob.dimension()) throw DimError("jointProbability: x dimension");

    if (isZeroVec(x)) {
        if (!prob.originAllowed)
            throw DomainError("jointProbability: x = 0 requires an origin-allowed domain");
        return {minD(prob) >= 0.0 ? 1.0 : 0.0, 0.0};
    }

    switch (method) {
        case ProbMethod::Analytic: {
            std::vector<double> u(prob.rows.size());
            double err = 1e-9;
            for (std::size_t i = 0; i < prob.rows.size(); ++i) {
                const Marginal1D m = marginalAt(prob, i, x);
                u[i] = cdf(m, rowG(prob.rows[i], x));
                if (std::holds_alternative<GH1>(m)) err = 1e-7;
            }
            return {combineRows(prob, x, u), err};
        }
        case ProbMethod::Radial: {
            std::vector<double> u(prob.rows.size());
            for (std::size_t i = 0; i < prob.rows.size(); ++i) {
                const double g = rowG(prob.rows[i], x);
                const RowRadialSpec spec = radialSpecFor(prob, i, x);
                u[i] = spec.gaussian ? gaussianCdf(g)
                                     : radialRowProbability(spec.mixing, spec.phi, g);
            }
            return {combineRows(prob, x, u), 1e-7};
        }
        case ProbMethod::MonteCarlo:
            break;
    }

    if (!mc) throw ParamError("jointProbability: Monte Carlo needs options");
    if (prob.copula && prob.rows.size() > 1)
        throw MethodUnavailable(
            "Monte Carlo sampling is limited to independent rows (or a single row)");
    const std::size_t chunk = 100000;
    std::size_t hits = 0;
    std::size_t done = 0;
    std::size_t chunkIdx = 0;
    std::vector<char> ok;
    while (done < mc->n) {
        const std::size_t m = std::min(chunk, mc->n - done);
        ok.assign(m, 1);
        for (std::size_t i = 0; i < prob.rows.size(); ++i) {
            const NmvmModel model = rowSamplingModel(prob, i);
            const std::uint64_t seed =
                splitmix64(mc->seed ^ splitmix64(i * 0x9e37u + chunkIdx));
            const std::vector<Vec> draws = nmvmSample(model, m, seed);
            for (std::size_t s = 0; s < m; ++s)
                if (dot(draws[s], x) > prob.rows[i].d) ok[s] = 0;
        }
        for (std::size_t s = 0; s < m; ++s) hits += ok[s];
        done += m;
        ++chunkIdx;
    }
    const double phat = static_cast<double>(hits) / static_cast<double>(mc->n);
    const double se = std::sqrt(std::max(phat * (1.0 - phat), 1e-12) / mc->n);
    return {phat, 3.0 * se};
}

bool isMember(const Problem& prob, const Vec& x, double p) {
    prob.validateShape();
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("isMember: p must lie in (0, 1]");
    if (!domainContains(prob.X, x)) throw OutsideX("isMember: x outside the domain X");
    if (isZeroVec(x)) {
        if (!prob.originAllowed) throw OutsideX("isMember: origin not allowed in X");
        return minD(prob) >= 0.0;
    }
    return hybridProbability(prob, x) >= p - 1e-9;
}

unsigned effectiveThreadCount() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("EVCONVEX_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < n) n = static_cast<unsigned>(cap);
    }
    return n;
}

namespace {

void parallelFor(std::size_t nTasks, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = std::min<std::size_t>(effectiveThreadCount(), nTasks);
    if (workers <= 1) {
        for (std::size_t i = 0; i < nTasks; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= nTasks) return;
                fn(i);
            }
        });
    }
    for (std::thread& t : pool) t.join();
}

// Distance from x along direction u to the boundary of the domain.
double rayExitT(const Domain& dom, const Vec& x, const Vec& u) {
    if (const DomainBox* box = std::get_if<DomainBox>(&dom)) {
        double t = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (u[i] > 0.0) t = std::min(t, (box->hi[i] - x[i]) / u[i]);
            if (u[i] < 0.0) t = std::min(t, (box->lo[i] - x[i]) / u[i]);
        }
        return std::max(t, 0.0);
    }
    const DomainBall& ball = std::get<DomainBall>(dom);
    const Vec rel = sub(x, ball.center);
    const double uu = dot(u, u);
    const double ru = dot(rel, u);
    const double rr = dot(rel, rel) - ball.radius * ball.radius;
    const double disc = ru * ru - uu * rr;
    if (disc <= 0.0) return 0.0;
    return std::max(0.0, (-ru + std::sqrt(disc)) / uu);
}

// Member-point sampler: anchored at a known member, candidates drawn along
// random rays with boundary located by bisection, every candidate re-verified.
class MemberSampler {
  public:
    MemberSampler(const Problem& prob, double p, std::uint64_t seed, std::size_t budget)
        : prob_(prob), p_(p), seed_(seed), budget_(budget) {
        const std::size_t n = prob.dimension();
        if (prob.originAllowed && domainContains(prob.X, Vec(n, 0.0)) && minD(prob) >= 0.0) {
            anchor_ = Vec(n, 0.0);
            return;
        }
        // Random scan for a first member.
        std::mt19937_64 rng(splitmix64(seed ^ 0xabcdefULL));
        const DomainBox hull = domainHull(prob.X);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (std::size_t tries = 0; tries < 200000; ++tries) {
            if (spend(1)) break;
            Vec x(n);
            for (std::size_t i = 0; i < n; ++i)
                x[i] = hull.lo[i] + unif(rng) * (hull.hi[i] - hull.lo[i]);
            if (!domainContains(prob.X, x) || isZeroVec(x)) continue;
            if (member(x)) {
                anchor_ = x;
                return;
            }
        }
        throw SamplingExhausted("no member of S(p) found within the sampling budget");
    }

    const Vec& anchor() const { return anchor_; }

    bool member(const Vec& x) const {
        if (isZeroVec(x)) return prob_.originAllowed && minD(prob_) >= 0.0;
        if (!domainContains(prob_.X, x)) return false;
        return hybridProbability(prob_, x) >= p_ - 1e-9;
    }

    // Draws one member using the task-local RNG stream; throws
    // SamplingExhausted when the shared budget runs out.
    Vec sample(std::mt19937_64& rng) {
        const std::size_t n = prob_.dimension();
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (;;) {
            if (spend(1))
                throw SamplingExhausted("member sampling budget exhausted");
            Vec u(n);
            double nu = 0.0;
            while (nu == 0.0) {
                for (double& v : u) v = gauss(rng);
                nu = norm2(u);
            }
            u = scale(u, 1.0 / nu);
            double tHi = rayExitT(prob_.X, anchor_, u);
            if (!(tHi > 0.0)) continue;
            // Shrink to the membership boundary along the ray.
            double lo = 0.0, hi = tHi;
            if (member(add(anchor_, scale(u, tHi)))) {
                lo = tHi;
            } else {
                for (int it = 0; it < 42; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (member(add(anchor_, scale(u, mid))))
                        lo = mid;
                    else
                        hi = mid;
                }
            }
            if (!(lo > 0.0)) continue;
            const double t = lo * 0.995 * std::pow(unif(rng), 1.0 / n);
            Vec cand = add(anchor_, scale(u, t));
            if (member(cand)) return cand;
        }
    }

  private:
    bool spend(std::size_t n) {
        return draws_.fetch_add(n) + n > budget_;
    }

    const Problem& prob_;
    double p_;
    std::uint64_t seed_;
    std::size_t budget_;
    Vec anchor_;
    std::atomic<std::size_t> draws_{0};
};

}  // namespace

ConvexityReport verifySegmentConvexity(const Problem& prob, double p, std::size_t nSegments,
                                       std::uint64_t seed) {
    prob.validateShape();
    if (!(p > 0.0 && p < 1.0)) throw DomainError("verifySegmentConvexity: p in (0,1)");

    ConvexityReport report;
    report.p = p;

    MemberSampler sampler(prob, p, seed, 1000000);

    std::vector<std::vector<Violation>> perTask(nSegments);
    std::atomic<bool> exhausted{false};
    parallelFor(nSegments, [&](std::size_t s) {
        if (exhausted.load()) return;
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(s + 1)));
        try {
            const Vec a = sampler.sample(rng);
            const Vec b = sampler.sample(rng);
            for (int k = 1; k <= 9; ++k) {
                const double lam = k / 10.0;
                Vec mid = add(scale(a, lam), scale(b, 1.0 - lam));
                double pm;
                if (isZeroVec(mid))
                    pm = minD(prob) >= 0.0 ? 1.0 : 0.0;
                else
                    pm = hybridProbability(prob, mid);
                if (pm < p - 1e-4) {
                    Violation v;
                    v.x1 = a;
                    v.x2 = b;
                    v.lambda = lam;
                    v.deficit = p - pm;
                    perTask[s].push_back(v);
                }
            }
        } catch (const SamplingExhausted&) {
            exhausted.store(true);
        }
    });
    if (exhausted.load())
        throw SamplingExhausted("verifySegmentConvexity: fewer than requested member pairs");

    report.segmentsTested = nSegments;
    for (const auto& tv : perTask)
        report.violations.insert(report.violations.end(), tv.begin(), tv.end());

    try {
        report.starShapedOk = starShapedCheck(prob, p, std::min<std::size_t>(64, nSegments),
                                              seed + 0x5151);
    } catch (const OutsideX&) {
        report.starShapedOk = false;
    } catch (const DomainError&) {
        report.starShapedOk = false;
    }
    return report;
}

bool starShapedCheck(const Problem& prob, double p, std::size_t rays, std::uint64_t seed) {
    prob.validateShape();
    if (!(p > 0.0 && p < 1.0)) throw DomainError("starShapedCheck: p in (0,1)");
    const std::size_t n = prob.dimension();
    if (!prob.originAllowed || !domainContains(prob.X, Vec(n, 0.0)) || minD(prob) < 0.0)
        throw OutsideX("starShapedCheck: origin is not a member of S(p)");

    MemberSampler sampler(prob, p, seed, 1000000);
    std::vector<char> ok(rays, 1);
    parallelFor(rays, [&](std::size_t r) {
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(r + 7777)));
        try {
            const Vec x = sampler.sample(rng);
            for (int k = 1; k <= 20; ++k) {
                const double lam = k / 20.0;
                if (!sampler.member(scale(x, lam))) {
                    ok[r] = 0;
                    return;
                }
            }
        } catch (const SamplingExhausted&) {
            // Budget ran out: treat the remaining rays as unchecked.
        }
    });
    for (char c : ok)
        if (!c) return false;
    return true;
}

GridTable gridExport(const Problem& prob, const DomainBox& box, std::size_t resolution) {
    prob.validateShape();
    if (prob.dimension() != 2 || box.lo.size() != 2)
        throw DimError("gridExport: requires a 2-D problem and box");
    if (resolution == 0) throw ParamError("gridExport: resolution must be >= 1");

    GridTable table;
    table.resolution = resolution;
    table.cells.assign(resolution * resolution, GridCell{});

    const double w1 = (box.hi[0] - box.lo[0]) / static_cast<double>(resolution);
    const double w2 = (box.hi[1] - box.lo[1]) / static_cast<double>(resolution);

    parallelFor(resolution, [&](std::size_t i) {
        const double x1 = box.lo[0] + (i + 0.5) * w1;
        for (std::size_t j = 0; j < resolution; ++j) {
            const double x2 = box.lo[1] + (j + 0.5) * w2;
            const Vec x{x1, x2};
            double pr;
            if (isZeroVec(x)) {
                pr = minD(prob) >= 0.0 ? 1.0 : 0.0;
            } else {
                std::vector<double> u(prob.rows.size());
                for (std::size_t r = 0; r < prob.rows.size(); ++r)
                    u[r] = cdf(marginalAt(prob, r, x), rowG(prob.rows[r], x));
                if (prob.copula) {
                    for (double& v : u) v = std::clamp(v, 1e-300, 1.0);
                    pr = copulaValue(prob.copula->evalClamped(x), u);
                } else {
                    pr = 1.0;
                    for (double v : u) pr *= v;
                }
            }
            table.cells[i * resolution + j] = GridCell{x1, x2, pr};
        }
    });
    return table;
}

namespace {

// Dense two-phase simplex for: min c^T x  s.t.  A x <= b, x free.
// Free variables are split into positive parts internally.
struct SimplexLp {
    std::size_t n = 0;  // decision variables
    std::vector<Vec> rows;
    Vec rhs;

    void addRow(const Vec& a, double b) {
        rows.push_back(a);
        rhs.push_back(b);
    }

    // Returns false when infeasible.
    bool solve(const Vec& c, Vec& xOut) const {
        const std::size_t m = rows.size();
        const std::size_t nv = 2 * n;          // split variables
        const std::size_t total = nv + m;      // plus slacks
        // Tableau rows: m constraints + objective + phase-1 objective.
        std::vector<Vec> t(m + 2, Vec(total + 1, 0.0));
        std::vector<std::size_t> basis(m);
        for (std::size_t i = 0; i < m; ++i) {
            double b = rhs[i];
            Vec row(total + 1, 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                row[j] = rows[i][j];
                row[n + j] = -rows[i][j];
            }
            row[nv + i] = 1.0;
            row[total] = b;
            if (b < 0.0)
                for (double& v : row) v = -v;
            t[i] = row;
            basis[i] = nv + i;
        }
        // Objective row (phase 2): minimize c^T x.
        for (std::size_t j = 0; j < n; ++j) {
            t[m][j] = c[j];
            t[m][n + j] = -c[j];
        }
        // Phase-1 objective: minimize sum of artificials = rows with negated
        // slack sign; artificials are the slack columns whose row was negated.
        std::vector<char> artificial(m, 0);
        for (std::size_t i = 0; i < m; ++i)
            if (t[i][nv + i] < 0.0) artificial[i] = 1;
        // Introduce artificial columns where needed.
        std::size_t nArt = 0;
        for (std::size_t i = 0; i < m; ++i) nArt += artificial[i];
        const std::size_t width = total + nArt + 1;
        std::vector<Vec> tab(m + 2, Vec(width, 0.0));
        std::size_t artCol = total;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < total; ++j) tab[i][j] = t[i][j];
            tab[i][width - 1] = t[i][total];
            if (artificial[i]) {
                tab[i][artCol] = 1.0;
                basis[i] = artCol;
                ++artCol;
            }
        }
        for (std::size_t j = 0; j < total; ++j) tab[m][j] = t[m][j];
        // Phase-1 row.
        for (std::size_t i = 0; i < m; ++i)
            if (artificial[i])
                for (std::size_t j = 0; j < width; ++j) tab[m + 1][j] -= tab[i][j];

        auto pivot = [&](std::size_t objRow, std::size_t maxCol) {
            for (std::size_t iter = 0; iter < 5000; ++iter) {
                // Bland's rule: first negative reduced cost.
                std::size_t col = width;
                for (std::size_t j = 0; j < maxCol; ++j) {
                    if (tab[objRow][j] < -1e-11) {
                        col = j;
                        break;
                    }
                }
                if (col == width) return true;  // optimal
                std::size_t row = m;
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < m; ++i) {
                    if (tab[i][col] > 1e-11) {
                        const double ratio = tab[i][width - 1] / tab[i][col];
                        if (row == m || ratio < best - 1e-13 ||
                            (std::fabs(ratio - best) <= 1e-13 && basis[i] < basis[row])) {
                            best = ratio;
                            row = i;
                        }
                    }
                }
                if (row == m) return false;  // unbounded
                const double pv = tab[row][col];
                for (double& v : tab[row]) v /= pv;
                for (std::size_t i = 0; i < m + 2; ++i) {
                    if (i == row) continue;
                    const double f = tab[i][col];
                    if (f == 0.0) continue;
                    for (std::size_t j = 0; j < width; ++j) tab[i][j] -= f * tab[row][j];
                }
                basis[row] = col;
            }
            return false;
        };

        if (nArt > 0) {
            if (!pivot(m + 1, width - 1)) return false;
            if (tab[m + 1][width - 1] < -1e-7) return false;  // infeasible
        }
        if (!pivot(m, total)) return false;  // artificials stay out in phase 2

        Vec xsplit(total, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            if (basis[i] < total) xsplit[basis[i]] = tab[i][width - 1];
        xOut.assign(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) xOut[j] = xsplit[j] - xsplit[n + j];
        return true;
    }
};

}  // namespace

MinimizeResult minimizeLinear(const Problem& prob, const Vec& c, double p,
                              std::size_t maxIter, bool overrideCert) {
    prob.validateShape();
    const std::size_t n = prob.dimension();
    if (c.size() != n) throw DimError("minimizeLinear: objective dimension");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("minimizeLinear: p in (0,1)");

    bool certified = false;
    if (!overrideCert) {
        try {
            certified = assemblePStar(prob.rows).pstar <= p + 1e-12;
        } catch (const Error&) {
            certified = false;
        }
        if (!certified)
            throw NotCertified(
                "minimizeLinear: convexity not certified at this p (use override)");
    }

    MemberSampler sampler(prob, p, 0x77aa11, 1000000);
    Vec anchor = sampler.anchor();

    MinimizeResult res;
    res.certified = certified;

    auto probAt = [&](const Vec& x) {
        if (isZeroVec(x)) return minD(prob) >= 0.0 ? 1.0 : 0.0;
        return hybridProbability(prob, x);
    };

    if (norm2(c) == 0.0) {
        res.x = anchor;
        res.value = 0.0;
        res.feasSlack = p - probAt(anchor);
        return res;
    }

    SimplexLp lp;
    lp.n = n;
    const DomainBox hull = domainHull(prob.X);
    for (std::size_t i = 0; i < n; ++i) {
        Vec e(n, 0.0);
        e[i] = 1.0;
        lp.addRow(e, hull.hi[i]);
        e[i] = -1.0;
        lp.addRow(e, -hull.lo[i]);
    }

    Vec bestFeasible = anchor;
    double bestValue = dot(c, anchor);

    const DomainBall* ball = std::get_if<DomainBall>(&prob.X);
    for (std::size_t iter = 0; iter < maxIter; ++iter) {
        res.iterations = iter + 1;
        Vec xs;
        if (!lp.solve(c, xs)) break;

        if (ball) {
            const Vec rel = sub(xs, ball->center);
            const double r = norm2(rel);
            if (r > ball->radius * (1.0 + 1e-10)) {
                const Vec nvec = scale(rel, 1.0 / r);
                const Vec z = add(ball->center, scale(nvec, ball->radius));
                lp.addRow(nvec, dot(nvec, z));
                continue;
            }
        }

        const double px = probAt(xs);
        if (p - px < 1e-5) {
            res.x = xs;
            res.value = dot(c, xs);
            res.feasSlack = p - px;
            return res;
        }

        // Supporting hyperplane at the boundary point between anchor and xs.
        double lo = 0.0, hi = 1.0;
        for (int itb = 0; itb < 60; ++itb) {
            const double mid = 0.5 * (lo + hi);
            const Vec xm = add(scale(anchor, 1.0 - mid), scale(xs, mid));
            if (probAt(xm) >= p)
                lo = mid;
            else
                hi = mid;
        }
        const Vec z = add(scale(anchor, 1.0 - lo), scale(xs, lo));
        if (dot(c, z) < bestValue) {
            bestValue = dot(c, z);
            bestFeasible = z;
        }

        Vec grad(n, 0.0);
        double gnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double h = 1e-5 * (1.0 + std::fabs(z[i]));
            Vec zp(z), zm(z);
            zp[i] += h;
            zm[i] -= h;
            grad[i] = (probAt(zp) - probAt(zm)) / (2.0 * h);
            gnorm += grad[i] * grad[i];
        }
        if (!(gnorm > 1e-24)) break;
        Vec cut = scale(grad, -1.0);
        lp.addRow(cut, dot(cut, z));
    }

    res.x = bestFeasible;
    res.value = bestValue;
    res.feasSlack = p - probAt(bestFeasible);
    return res;
}

}  // namespace evconvex
