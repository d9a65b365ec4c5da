#pragma once

// Three independent routes to the extremal Lyapunov exponents: the u-state
// route (exact finite sums at cylinder resolution), the Kingman Monte Carlo
// route (sampled orbits with standard errors), and the periodic-orbit route.

#include <cmath>
#include <limits>
#include <vector>

#include "ustate.hpp"

namespace cclab {

// exact integral of log|det A| against the equilibrium measure
inline double det_integral(const WindowedCocycle& c, const GibbsMeasure& m) {
    if (!c.future_only()) throw std::invalid_argument("det_integral: cocycle must be future-only");
    double s = 0;
    int L = (int)std::max((long long)1, c.w_hi);
    for (const auto& w : c.spec.words(L))
        s += m.cylinder_measure(w) * std::log(std::abs(c.eval_word(w).det()));
    return s;
}

// time reversal: cocycle B over the transposed subshift whose products along
// reversed words are inverses of the forward products; lambda_+(B, reversed
// measure) = -lambda_-(A, measure)
inline WindowedCocycle reverse_cocycle(const WindowedCocycle& c) {
    if (!c.future_only())
        throw std::invalid_argument("reverse_cocycle: cocycle must be future-only");
    int ell = c.spec.alphabet_size;
    std::vector<std::vector<int>> qt(ell, std::vector<int>(ell, 0));
    for (int i = 0; i < ell; ++i)
        for (int j = 0; j < ell; ++j) qt[(size_t)i][(size_t)j] = c.spec.transitions[(size_t)j][(size_t)i];
    SubshiftSpec rev = SubshiftSpec::make(ell, qt, c.spec.theta);
    std::map<Word, Mat2> t;
    int W = (int)(c.w_hi - c.w_lo);
    for (const auto& w : rev.words(W)) {
        Word r(w.rbegin(), w.rend());
        t[w] = c.table.at(r).inverse();
    }
    return WindowedCocycle{rev, 0, (long long)W, t};
}

// the reversed stationary chain as a GibbsMeasure over the transposed subshift
inline GibbsMeasure reverse_measure(const GibbsMeasure& m) {
    GibbsMeasure r;
    r.rc = recode(reverse_cocycle(WindowedCocycle::constant(m.rc.base, Mat2::identity())).spec,
                  m.rc.k);
    int M = m.m();
    r.pi.assign((size_t)M, 0.0);
    r.p.assign((size_t)M, std::vector<double>((size_t)M, 0.0));
    r.phi.assign((size_t)M, 0.0);
    r.zeta.assign((size_t)M, 1.0);
    r.nu.assign((size_t)M, 0.0);
    r.log_lambda = m.log_lambda;
    auto fwd_index = [&](int rev_sym) {
        const Word& w = r.rc.decode(rev_sym);
        Word f(w.rbegin(), w.rend());
        return m.rc.encode(f);
    };
    for (int i = 0; i < M; ++i) {
        r.pi[(size_t)i] = m.pi[(size_t)fwd_index(i)];
        r.nu[(size_t)i] = r.pi[(size_t)i];
    }
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            if (r.rc.recoded.allowed(i, j)) {
                int fi = fwd_index(i), fj = fwd_index(j);
                // reversed edge i->j corresponds to forward edge fj->fi
                r.p[(size_t)i][(size_t)j] = m.pi[(size_t)fj] * m.p[(size_t)fj][(size_t)fi] /
                                            m.pi[(size_t)fi];
            }
    return r;
}

struct UStateExponents {
    double lambda_plus = 0, lambda_minus = 0;
    double residual_plus = 0, residual_minus = 0;
    bool converged = true;
};

inline UStateExponents lyap_ustate(const WindowedCocycle& c, const GibbsMeasure& m, int depth,
                                   double epsilon = kPi / 2 * 0x1p-12, long long max_iter = 400,
                                   double tol = 1e-10, int grid_atoms = 64) {
    UStateExponents r;
    auto up = solve_u_state(c, m, depth, epsilon, max_iter, tol, grid_atoms);
    r.lambda_plus = lyap_from_family(up.family, c, m);
    r.residual_plus = up.residual;
    auto rc = reverse_cocycle(c);
    auto rm = reverse_measure(m);
    auto um = solve_u_state(rc, rm, depth, epsilon, max_iter, tol, grid_atoms);
    r.lambda_minus = -lyap_from_family(um.family, rc, rm);
    r.residual_minus = um.residual;
    r.converged = up.converged && um.converged;
    return r;
}

struct KingmanEstimate {
    double lambda_plus = 0, lambda_minus = 0;
    double stderr_plus = 0, stderr_minus = 0;
    long long n = 0;
    int samples = 0;
};

inline KingmanEstimate lyap_kingman(const WindowedCocycle& c, const GibbsMeasure& m, long long n,
                                    int samples, uint64_t seed) {
    if (!c.future_only()) throw std::invalid_argument("lyap_kingman: cocycle must be future-only");
    KingmanEstimate r;
    r.n = n;
    r.samples = samples;
    std::vector<double> lp, lm;
    for (int s = 0; s < samples; ++s) {
        Word w = sample_orbit_full(m, n + (long long)std::max((long long)1, c.w_hi),
                                   seed + (uint64_t)s * 0x9e3779b97f4a7c15ULL);
        Mat2 prod = Mat2::identity();
        double logsum = 0, logdet = 0;
        for (long long j = 0; j < n; ++j) {
            Word key(w.begin() + j + c.w_lo, w.begin() + j + c.w_hi);
            const Mat2& a = c.table.at(key);
            prod = a * prod;
            logdet += std::log(std::abs(a.det()));
            if ((j & 63) == 63) {
                double sc = prod.norm();
                logsum += std::log(sc);
                prod = prod.scaled(1.0 / sc);
            }
        }
        double ln = logsum + std::log(prod.norm());
        lp.push_back(ln / (double)n);
        lm.push_back((logdet - ln) / (double)n);
    }
    auto mean_se = [&](const std::vector<double>& v, double& mean, double& se) {
        mean = 0;
        for (double e : v) mean += e;
        mean /= (double)v.size();
        double var = 0;
        for (double e : v) var += (e - mean) * (e - mean);
        var /= v.size() > 1 ? (double)(v.size() - 1) : 1.0;
        se = std::sqrt(var / (double)v.size());
    };
    mean_se(lp, r.lambda_plus, r.stderr_plus);
    mean_se(lm, r.lambda_minus, r.stderr_minus);
    return r;
}

struct PeriodicEstimate {
    double lambda_plus = 0;
    int best_period = 0;
    Word best_word;
};

// max over periodic orbits of period <= max_period of (1/p) log spr(A^p)
inline PeriodicEstimate lyap_periodic(const WindowedCocycle& c, int max_period) {
    PeriodicEstimate r;
    r.lambda_plus = -std::numeric_limits<double>::infinity();
    for (int p = 1; p <= max_period; ++p)
        for (const auto& x : periodic_points(c.spec, p)) {
            double v = std::log(iterate(c, x, p).spectral_radius()) / (double)p;
            if (v > r.lambda_plus) {
                r.lambda_plus = v;
                r.best_period = p;
                r.best_word = x.left;
            }
        }
    return r;
}

} // namespace cclab
