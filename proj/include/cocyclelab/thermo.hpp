#pragma once

// Thermodynamic formalism over the subshift: windowed potentials, potential
// stabilization to future-only form, Ruelle transfer operator, equilibrium
// states as stationary Markov chains on a recoded alphabet, Jacobians of the
// one-sided shifts, the product-structure density psi and the cohomological
// density xi, measure comparison and orbit sampling.

#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cocycle.hpp"
#include "subshift.hpp"

namespace cclab {

struct Potential {
    SubshiftSpec spec;
    long long w_lo = 0, w_hi = 1;
    std::map<Word, double> table;

    bool future_only() const { return w_lo >= 0; }
    int width() const { return (int)(w_hi - w_lo); }

    static Potential make(const SubshiftSpec& spec, long long w_lo, long long w_hi,
                          const std::map<Word, double>& table) {
        if (w_hi < w_lo) throw std::invalid_argument("potential window is reversed");
        Potential p{spec, w_lo, w_hi, table};
        auto words = spec.words((int)(w_hi - w_lo));
        for (const auto& w : words) {
            auto it = table.find(w);
            if (it == table.end())
                throw std::invalid_argument("potential table misses an admissible word");
            if (!std::isfinite(it->second))
                throw std::invalid_argument("potential table has a non-finite value");
        }
        if (table.size() != words.size())
            throw std::invalid_argument("potential table has extraneous words");
        return p;
    }

    static Potential constant(const SubshiftSpec& spec, double v) {
        return make(spec, 0, 0, {{Word{}, v}});
    }

    static Potential one_step(const SubshiftSpec& spec, const std::vector<double>& per_symbol) {
        std::map<Word, double> t;
        for (int s = 0; s < spec.alphabet_size; ++s) t[{s}] = per_symbol[(size_t)s];
        return make(spec, 0, 1, t);
    }

    double eval(const PointRep& x) const {
        Word w;
        for (long long n = w_lo; n < w_hi; ++n) w.push_back(x.at(n));
        auto it = table.find(w);
        if (it == table.end()) throw std::runtime_error("potential: unknown window word");
        return it->second;
    }
};

// psi_u(x) = sum_{j=0}^{J-1} [phi(f^j x) - phi(f^j g(x))], J = max(0, -w_lo);
// terms with j >= -w_lo vanish because f^j x and f^j g(x) agree on the window.
inline double stable_defect(const Potential& phi, const PointRep& x,
                            const std::vector<PointRep>& anchors) {
    long long J = std::max((long long)0, -phi.w_lo);
    if (J == 0) return 0.0;
    long long horizon = phi.w_hi + J + 2;
    PointRep gx = stable_anchor_projection(phi.spec, x, anchors, horizon);
    double s = 0;
    for (long long j = 0; j < J; ++j) s += phi.eval(shift(x, j)) - phi.eval(shift(gx, j));
    return s;
}

// phi_u = phi + psi_u o f - psi_u, future-only with window [0, w_hi - w_lo)
inline std::pair<Potential, std::function<double(const PointRep&)>>
stabilize_potential(const Potential& phi, const std::vector<PointRep>& anchors) {
    auto psi_u = [phi, anchors](const PointRep& x) { return stable_defect(phi, x, anchors); };
    if (phi.future_only()) return {phi, psi_u};
    long long w_out = phi.w_hi - phi.w_lo;
    std::map<Word, double> t;
    for (const auto& w : phi.spec.words((int)w_out)) {
        // anchored representative: psi_u vanishes there, so
        // phi_u = phi + psi_u o f
        PointRep x = point_through_word(phi.spec, w, 0);
        PointRep xa = stable_anchor_projection(phi.spec, x, anchors, w_out - phi.w_lo + 2);
        t[w] = phi.eval(xa) + psi_u(shift(xa, 1));
    }
    return {Potential{phi.spec, 0, w_out, t}, psi_u};
}

struct GibbsMeasure {
    Recoding rc;                 // memory-k recoding of the base subshift
    std::vector<double> phi;     // potential value per recoded symbol
    double log_lambda = 0;
    std::vector<double> zeta;    // RPF eigenfunction, > 0
    std::vector<double> nu;      // adjoint eigen-measure, probability vector
    std::vector<double> pi;      // stationary vector, pi = zeta .* nu
    std::vector<std::vector<double>> p; // transition matrix on recoded symbols

    int m() const { return rc.recoded.alphabet_size; }

    // stationary measure of a recoded-symbol path (consecutive, any position)
    double path_measure(const std::vector<int>& s) const {
        if (s.empty()) return 1.0;
        double v = pi[(size_t)s[0]];
        for (size_t i = 0; i + 1 < s.size(); ++i) v *= p[(size_t)s[i]][(size_t)s[i + 1]];
        return v;
    }

    // cylinder measure of a word in original symbols (position-invariant)
    double cylinder_measure(const Word& w) const {
        if (w.empty()) return 1.0;
        if ((int)w.size() >= rc.k) return path_measure(rc.path(w));
        double v = 0;
        for (int s = 0; s < m(); ++s) {
            const Word& d = rc.decode(s);
            bool pref = true;
            for (size_t i = 0; i < w.size() && pref; ++i) pref = d[i] == w[i];
            if (pref) v += pi[(size_t)s];
        }
        return v;
    }

    double psi(int recoded_symbol) const { return 1.0 / pi[(size_t)recoded_symbol]; }

    double jac_u(int i, int j) const {
        if (!rc.recoded.allowed(i, j)) throw std::invalid_argument("jac_u: forbidden edge");
        return pi[(size_t)j] / (pi[(size_t)i] * p[(size_t)i][(size_t)j]);
    }
    // Jacobian of the one-sided backward shift on past sequences (..., y_-1, y_0):
    // derived from the time-reversed chain p*_{ij} = pi_j p_{ji} / pi_i
    double jac_s(int i, int j) const {
        if (!rc.recoded.allowed(i, j)) throw std::invalid_argument("jac_s: forbidden edge");
        return 1.0 / p[(size_t)i][(size_t)j];
    }
};

// T_phi g(x) = sum over one-step predecessors y of x of e^{phi(y)} g(y),
// on the recoded alphabet with per-symbol potential
inline double transfer_apply(const SubshiftSpec& spec, const std::vector<double>& phi,
                             const std::vector<double>& g, int x) {
    double s = 0;
    for (int y = 0; y < spec.alphabet_size; ++y)
        if (spec.allowed(y, x)) s += std::exp(phi[(size_t)y]) * g[(size_t)y];
    return s;
}

struct RpfData {
    double log_lambda = 0;
    std::vector<double> zeta, nu;
    long long iterations = 0;
};

// power iteration for the RPF eigen-data of the weighted transfer matrix
// B_{ij} = e^{phi(i)} Q_{ij}; nu solves B nu = lambda nu, zeta solves
// B^T zeta = lambda zeta; normalized so sum(nu) = 1 and sum(zeta.*nu) = 1.
inline RpfData rpf_solve(const SubshiftSpec& spec, const std::vector<double>& phi,
                         double tol = 1e-13, long long cap = 100000) {
    auto rep = SubshiftSpec::validate(spec.alphabet_size, spec.transitions, spec.theta);
    if (!rep.ok || !rep.transitive)
        throw std::runtime_error("rpf_solve: transition matrix is not irreducible");
    if (rep.graph_period != 1)
        throw std::runtime_error("rpf_solve: matrix is not primitive (graph period " +
                                 std::to_string(rep.graph_period) + ")");
    int n = spec.alphabet_size;
    auto step = [&](const std::vector<double>& v, bool transpose) {
        std::vector<double> r((size_t)n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (spec.transitions[(size_t)i][(size_t)j]) {
                    double w = std::exp(phi[(size_t)i]);
                    if (transpose) r[(size_t)j] += w * v[(size_t)i];
                    else r[(size_t)i] += w * v[(size_t)j];
                }
        return r;
    };
    auto iterate_to_fix = [&](bool transpose, long long& iters) {
        std::vector<double> v((size_t)n, 1.0 / n);
        double lam = 0;
        for (long long it = 0; it < cap; ++it) {
            auto w = step(v, transpose);
            double s = 0;
            for (double e : w) s += e;
            for (double& e : w) e /= s;
            double diff = 0;
            for (int i = 0; i < n; ++i) diff = std::max(diff, std::abs(w[(size_t)i] - v[(size_t)i]));
            v = w;
            lam = s;
            iters = it + 1;
            if (diff < tol) return std::pair{v, lam};
        }
        throw std::runtime_error("rpf_solve: power iteration did not converge");
    };
    RpfData out;
    long long it1 = 0, it2 = 0;
    auto [nu, lam1] = iterate_to_fix(false, it1);
    auto [zeta, lam2] = iterate_to_fix(true, it2);
    out.iterations = it1 + it2;
    // refine lambda by the Rayleigh-type ratio zeta^T B nu / zeta^T nu
    auto bnu = step(nu, false);
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i) {
        num += zeta[(size_t)i] * bnu[(size_t)i];
        den += zeta[(size_t)i] * nu[(size_t)i];
    }
    double lambda = num / den;
    out.log_lambda = std::log(lambda);
    // normalize: nu a probability vector, sum zeta.*nu = 1
    double sn = 0;
    for (double e : nu) sn += e;
    for (double& e : nu) e /= sn;
    double sz = 0;
    for (int i = 0; i < n; ++i) sz += zeta[(size_t)i] * nu[(size_t)i];
    for (double& e : zeta) e /= sz;
    out.zeta = zeta;
    out.nu = nu;
    return out;
}

// full pipeline: stabilize to future-only, recode to memory 1, solve RPF,
// assemble the stationary Markov chain p_{ij} = e^{phi(i)} Q'_{ij} nu_j/(lambda nu_i)
inline GibbsMeasure equilibrium(const Potential& phi_in,
                                const std::vector<PointRep>& anchors) {
    auto [phi_u, psi_u] = stabilize_potential(phi_in, anchors);
    int k = (int)std::max((long long)1, phi_u.w_hi);
    GibbsMeasure gm;
    gm.rc = recode(phi_in.spec, k);
    int m = gm.rc.recoded.alphabet_size;
    gm.phi.resize((size_t)m);
    for (int s = 0; s < m; ++s) {
        const Word& w = gm.rc.decode(s);
        Word key(w.begin() + phi_u.w_lo, w.begin() + phi_u.w_hi);
        gm.phi[(size_t)s] = phi_u.table.at(key);
    }
    RpfData r = rpf_solve(gm.rc.recoded, gm.phi);
    gm.log_lambda = r.log_lambda;
    gm.zeta = r.zeta;
    gm.nu = r.nu;
    double lambda = std::exp(r.log_lambda);
    gm.pi.resize((size_t)m);
    for (int i = 0; i < m; ++i) gm.pi[(size_t)i] = r.zeta[(size_t)i] * r.nu[(size_t)i];
    gm.p.assign((size_t)m, std::vector<double>((size_t)m, 0.0));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (gm.rc.recoded.allowed(i, j))
                gm.p[(size_t)i][(size_t)j] =
                    std::exp(gm.phi[(size_t)i]) * r.nu[(size_t)j] / (lambda * r.nu[(size_t)i]);
    // invariance and stochasticity self-checks
    for (int i = 0; i < m; ++i) {
        double row = 0, inv = 0;
        for (int j = 0; j < m; ++j) {
            row += gm.p[(size_t)i][(size_t)j];
            inv += gm.pi[(size_t)j] * gm.p[(size_t)j][(size_t)i];
        }
        if (std::abs(row - 1.0) > 1e-10 || std::abs(inv - gm.pi[(size_t)i]) > 1e-10)
            throw std::runtime_error("equilibrium: chain consistency check failed");
    }
    return gm;
}

struct PsiXiResult {
    std::vector<double> psi; // per recoded symbol
    std::vector<double> xi;  // per recoded symbol
    double residual = 0;     // max cylinder mismatch |mu(cyl) - int psi d(mu_s x mu_u)|
    double xi_residual = 0;  // max residual of the cohomological equation
};

// psi from the product-structure identity mu|[0;i] = psi (mu^s x mu^u); xi from
// the log-linear cohomological system xi(fx)/xi(x) = J_s(P^s(fx))/J_u(P^u(x))
// with normalization sum_i int_{[0;i]} xi d(mu^s x mu^u) = 1.
inline PsiXiResult psi_and_xi(const GibbsMeasure& gm, int depth = 6) {
    int m = gm.m();
    PsiXiResult out;
    out.psi.resize((size_t)m);
    for (int i = 0; i < m; ++i) out.psi[(size_t)i] = gm.psi(i);

    // least squares in log space: L_j - L_i = log J_s(i->j) - log J_u(i->j)
    std::vector<std::tuple<int, int, double>> eqs;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (gm.rc.recoded.allowed(i, j))
                eqs.push_back({i, j, std::log(gm.jac_s(i, j)) - std::log(gm.jac_u(i, j))});
    Eigen::MatrixXd A((long)eqs.size() + 1, m);
    Eigen::VectorXd b((long)eqs.size() + 1);
    A.setZero();
    b.setZero();
    for (size_t e = 0; e < eqs.size(); ++e) {
        auto [i, j, rhs] = eqs[e];
        A((long)e, j) += 1.0;
        A((long)e, i) -= 1.0;
        b((long)e) = rhs;
    }
    // gauge-fixing row (the normalization is applied after exponentiating)
    A((long)eqs.size(), 0) = 1.0;
    Eigen::VectorXd L = A.colPivHouseholderQr().solve(b);
    for (size_t e = 0; e < eqs.size(); ++e) {
        auto [i, j, rhs] = eqs[e];
        out.xi_residual = std::max(out.xi_residual, std::abs(L(j) - L(i) - rhs));
    }
    out.xi.resize((size_t)m);
    double norm = 0;
    for (int i = 0; i < m; ++i) {
        out.xi[(size_t)i] = std::exp(L(i));
        norm += out.xi[(size_t)i] * gm.pi[(size_t)i] * gm.pi[(size_t)i];
    }
    for (double& v : out.xi) v /= norm;

    // residual of the product-structure identity on two-sided cylinders:
    // for a recoded path a_{-mm} ... a_n the product measure contributes
    // mu^s(past) * mu^u(future) * psi(a_0)
    for (int len = 1; len <= depth; ++len)
        for (const auto& _w : gm.rc.recoded.words(len)) {
            std::vector<int> s(_w.begin(), _w.end());
            for (int mm = 0; mm < len; ++mm) {
                std::vector<int> past(s.begin(), s.begin() + mm + 1);
                std::vector<int> fut(s.begin() + mm, s.end());
                double prod = gm.path_measure(past) * gm.path_measure(fut) *
                              out.psi[(size_t)s[(size_t)mm]];
                out.residual = std::max(out.residual, std::abs(gm.path_measure(s) - prod));
            }
        }
    return out;
}

struct MeasureDistance {
    double weak_star = 0;
    double psi_gap = 0;
};

inline MeasureDistance measure_distance(const GibbsMeasure& a, const GibbsMeasure& b, int depth) {
    if (a.rc.base.transitions != b.rc.base.transitions)
        throw std::invalid_argument("measure_distance: measures live on different subshifts");
    MeasureDistance out;
    for (int len = 1; len <= depth; ++len)
        for (const auto& w : a.rc.base.words(len))
            out.weak_star =
                std::max(out.weak_star, std::abs(a.cylinder_measure(w) - b.cylinder_measure(w)));
    int kk = std::max(a.rc.k, b.rc.k);
    for (const auto& w : a.rc.base.words(kk)) {
        double pa = 1.0 / a.cylinder_measure(Word(w.begin(), w.begin() + a.rc.k));
        double pb = 1.0 / b.cylinder_measure(Word(w.begin(), w.begin() + b.rc.k));
        out.psi_gap = std::max(out.psi_gap, std::abs(pa - pb));
    }
    return out;
}

// word of length n in original symbols distributed as the chain (pi, p)
inline Word sample_orbit(const GibbsMeasure& gm, long long n, uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_orbit: n must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto pick = [&](const std::vector<double>& w) {
        double t = u(rng), c = 0;
        for (size_t i = 0; i < w.size(); ++i) {
            c += w[i];
            if (t < c) return (int)i;
        }
        return (int)w.size() - 1;
    };
    Word out;
    int s = pick(gm.pi);
    out.push_back(gm.rc.decode(s).front());
    for (long long i = 1; i < n; ++i) {
        s = pick(gm.p[(size_t)s]);
        out.push_back(gm.rc.decode(s).front());
    }
    return out;
}

// the recoded-path point of a sampled word, for cocycle evaluation: a word of
// length n + k - 1 supports n recoded steps
inline Word sample_orbit_full(const GibbsMeasure& gm, long long n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto pick = [&](const std::vector<double>& w) {
        double t = u(rng), c = 0;
        for (size_t i = 0; i < w.size(); ++i) {
            c += w[i];
            if (t < c) return (int)i;
        }
        return (int)w.size() - 1;
    };
    int s = pick(gm.pi);
    Word out = gm.rc.decode(s);
    for (long long i = 1; i < n; ++i) {
        s = pick(gm.p[(size_t)s]);
        out.push_back(gm.rc.decode(s).back());
    }
    return out;
}

} // namespace cclab
