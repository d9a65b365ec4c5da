#pragma once

// Projective line: angle coordinates, the normalized metric of diameter 1,
// derivative norms of the projective action, the Margulis function
// phi(u,v) = -log d(u,v), atomic measures on P^1, and the selection of the
// expansion/confinement parameters (N, kappa, nested balls, M1, M2, delta,
// rho) consumed by the coupling machinery.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cocycle.hpp"
#include "thermo.hpp"

namespace cclab {

constexpr double kPi = 3.14159265358979323846;

struct Direction {
    double angle = 0; // in [0, pi)

    static Direction of(double a) {
        double r = std::fmod(a, kPi);
        if (r < 0) r += kPi;
        if (r >= kPi) r = 0;
        return Direction{r};
    }
    static Direction q() { return Direction{0.0}; }
    static Direction p() { return Direction{kPi / 2}; }
    // exact unit vectors at the coordinate axes, so triangular matrices fix
    // q and p without rounding noise
    double ux() const { return angle == kPi / 2 ? 0.0 : std::cos(angle); }
    double uy() const { return angle == 0.0 ? 0.0 : std::sin(angle); }
};

inline Direction act(const Mat2& m, Direction v) {
    double x = m.a * v.ux() + m.b * v.uy();
    double y = m.c * v.ux() + m.d * v.uy();
    return Direction::of(std::atan2(y, x));
}

// normalized angular metric of diameter 1
inline double dist(Direction u, Direction v) {
    double d = std::abs(u.angle - v.angle);
    d = std::min(d, kPi - d);
    return d / (kPi / 2);
}

inline double log_gain(const Mat2& m, Direction v) {
    double x = m.a * v.ux() + m.b * v.uy();
    double y = m.c * v.ux() + m.d * v.uy();
    return 0.5 * std::log(x * x + y * y);
}

// operator norm of the derivative of the projective action at v
inline double deriv_norm(const Mat2& m, Direction v) {
    double x = m.a * v.ux() + m.b * v.uy();
    double y = m.c * v.ux() + m.d * v.uy();
    return std::abs(m.det()) / (x * x + y * y);
}

// phi(u,v) = -log d(u,v); +infinity sentinel iff u = v
inline double margulis_phi(Direction u, Direction v) {
    double d = dist(u, v);
    if (d == 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(d);
}

// ---- atomic measures on P^1 --------------------------------------------------

struct ProjMeasure {
    // atoms sorted by angle after normalize(); masses nonnegative
    std::vector<std::pair<double, double>> atoms; // (angle in [0,pi), mass)

    double total_mass() const {
        double s = 0;
        for (const auto& [a, w] : atoms) s += w;
        return s;
    }

    void add(double angle, double mass) {
        if (mass > 0) atoms.push_back({Direction::of(angle).angle, mass});
    }

    // sort by angle and merge atoms closer than eps (angular), dropping zeros;
    // merged position is the mass-weighted circular mean
    void normalize(double eps) {
        std::sort(atoms.begin(), atoms.end());
        std::vector<std::pair<double, double>> out;
        size_t i = 0;
        while (i < atoms.size()) {
            double refa = atoms[i].first;
            double mass = 0, cx = 0, cy = 0;
            size_t j = i;
            while (j < atoms.size() && atoms[j].first - refa <= eps) {
                double a2 = 2 * atoms[j].first; // double angle: P^1 as a circle
                mass += atoms[j].second;
                cx += atoms[j].second * std::cos(a2);
                cy += atoms[j].second * std::sin(a2);
                ++j;
            }
            if (mass > 0) out.push_back({Direction::of(std::atan2(cy, cx) / 2).angle, mass});
            i = j;
        }
        // wrap-around merge (angles near 0 and near pi are eps-close on P^1)
        if (out.size() >= 2 && (kPi - out.back().first) + out.front().first <= eps) {
            auto [a1, m1] = out.front();
            auto [a2, m2] = out.back();
            double b1 = 2 * a1, b2 = 2 * a2;
            double cx = m1 * std::cos(b1) + m2 * std::cos(b2);
            double cy = m1 * std::sin(b1) + m2 * std::sin(b2);
            out.front() = {Direction::of(std::atan2(cy, cx) / 2).angle, m1 + m2};
            out.pop_back();
            std::sort(out.begin(), out.end());
        }
        atoms = out;
    }

    ProjMeasure scaled(double s) const {
        ProjMeasure r = *this;
        for (auto& [a, w] : r.atoms) w *= s;
        return r;
    }

    template <class Pred> ProjMeasure restrict(Pred keep) const {
        ProjMeasure r;
        for (const auto& [a, w] : atoms)
            if (keep(Direction{a})) r.atoms.push_back({a, w});
        return r;
    }

    // mass within normalized distance <= r of u (closed ball)
    double ball_mass(Direction u, double r) const {
        double s = 0;
        for (const auto& [a, w] : atoms)
            if (dist(Direction{a}, u) <= r) s += w;
        return s;
    }

    ProjMeasure pushforward(const Mat2& m) const {
        ProjMeasure r;
        for (const auto& [a, w] : atoms) r.atoms.push_back({act(m, Direction{a}).angle, w});
        std::sort(r.atoms.begin(), r.atoms.end());
        return r;
    }
};

// Kolmogorov distance of angular CDFs (atoms assumed angle-sorted)
inline double kolmogorov(const ProjMeasure& a, const ProjMeasure& b) {
    size_t i = 0, j = 0;
    double ca = 0, cb = 0, best = 0;
    while (i < a.atoms.size() || j < b.atoms.size()) {
        double ta = i < a.atoms.size() ? a.atoms[i].first : std::numeric_limits<double>::infinity();
        double tb = j < b.atoms.size() ? b.atoms[j].first : std::numeric_limits<double>::infinity();
        if (ta <= tb) ca += a.atoms[i++].second;
        if (tb <= ta && j < b.atoms.size() && tb <= ta) cb += b.atoms[j++].second;
        best = std::max(best, std::abs(ca - cb));
    }
    return best;
}

// Kolmogorov distance read at resolution eps: discrepancies supported on
// intervals shorter than eps are ignored, so the metric compares CDFs only
// at gaps wider than the atom-coalescing scale (weak-* at fixed resolution)
inline double kolmogorov(const ProjMeasure& a, const ProjMeasure& b, double eps) {
    std::vector<std::pair<double, double>> ev; // (angle, signed mass)
    for (const auto& [t, m] : a.atoms) ev.push_back({t, m});
    for (const auto& [t, m] : b.atoms) ev.push_back({t, -m});
    std::sort(ev.begin(), ev.end());
    double run = 0, best = 0;
    for (size_t i = 0; i < ev.size();) {
        size_t j = i;
        while (j + 1 < ev.size() && ev[j + 1].first - ev[j].first <= eps) ++j;
        for (size_t k = i; k <= j; ++k) run += ev[k].second;
        best = std::max(best, std::abs(run));
        i = j + 1;
    }
    return best;
}

// ---- Margulis parameter ledger ------------------------------------------------

struct MargulisParams {
    int N = 0;
    int word_depth = 0;              // length of the words indexing kappa
    std::map<Word, double> kappa;    // per depth-(N + w_hi - 1) word
    double r0 = 0, r1 = 0, r2 = 0, r3 = 0, r4 = 0;
    double M1 = 0, M2 = 0;
    double delta = 0;
    double alpha = 0, beta = 0;
    std::map<Word, double> rho;      // per conditional word: m_x(B(q, rho)) = alpha + delta
};

namespace detail {

struct WordMat {
    Word w;
    Mat2 p;      // A^N along the word
    double kappa;
};

inline std::vector<WordMat> word_products(const WindowedCocycle& c, int N) {
    if (!c.future_only()) throw std::invalid_argument("margulis_setup: cocycle must be future-only");
    int L = std::max((long long)1, N + c.w_hi - 1);
    std::vector<WordMat> out;
    for (const auto& w : c.spec.words(L)) {
        Mat2 p = iterate_word(c, w, N);
        out.push_back({w, p, 0.5 * std::log(deriv_norm(p, Direction::q()))});
    }
    return out;
}

// grid of directions in the closed ball B(q, r), including both endpoints
inline std::vector<Direction> ball_grid(double r, int n) {
    std::vector<Direction> g;
    double h = r * (kPi / 2);
    for (int i = 0; i <= n; ++i) g.push_back(Direction::of(-h + 2 * h * i / n));
    return g;
}

// expansion estimate on the grid: d(Pu, Pv) >= e^kappa d(u,v) - margin for u,v in B(q,r)
inline bool expansion_ok(const WordMat& wm, double r, int n, double margin) {
    auto g = ball_grid(r, n);
    std::vector<Direction> img;
    img.reserve(g.size());
    for (auto u : g) img.push_back(act(wm.p, u));
    double ek = std::exp(wm.kappa);
    for (size_t i = 0; i < g.size(); ++i)
        for (size_t j = i + 1; j < g.size(); ++j)
            if (dist(img[i], img[j]) + margin < ek * dist(g[i], g[j])) return false;
    return true;
}

// image of the closed r-ball lies inside the open r_out-ball
inline bool image_inside(const Mat2& p, double r, double r_out, int n, double margin) {
    for (auto u : ball_grid(r, n))
        if (dist(act(p, u), Direction::q()) >= r_out - margin) return false;
    return true;
}

} // namespace detail

// Parameter selection. conditionals: admissible depth-k word -> probability
// ProjMeasure (the targets m_x). The cocycle must fix the directions q and p.
inline MargulisParams margulis_setup(const WindowedCocycle& c, const GibbsMeasure& m,
                                     const std::map<Word, ProjMeasure>& conditionals,
                                     double alpha, double beta, int grid = 2048,
                                     int coarse_grid = 256) {
    const double margin = 1e-9;
    for (const auto& [w, a] : c.table)
        if (std::abs(a.b) > 1e-14 || std::abs(a.c) > 1e-14)
            throw std::runtime_error("margulis_setup: cocycle does not fix q and p");

    MargulisParams P;
    P.alpha = alpha;
    P.beta = beta;

    // (1) smallest N with the exact cylinder-sum integral of log||D_q PA^N|| > 6.
    // q is a fixed point of every branch, so the chain rule and invariance of mu
    // give exactly N times the one-step integral.
    double step_integral = 0;
    {
        int L1 = (int)std::max((long long)1, c.w_hi);
        for (const auto& w : c.spec.words(L1))
            step_integral +=
                m.cylinder_measure(w) * std::log(deriv_norm(c.eval_word(w), Direction::q()));
    }
    if (!(step_integral > 1e-12) || 6.0 / step_integral > 64.0)
        throw std::runtime_error(
            "margulis_setup: infeasible (expansion integral never exceeds 6)");
    P.N = 1;
    while (P.N * step_integral <= 6.0) ++P.N;
    std::vector<detail::WordMat> wms = detail::word_products(c, P.N);
    if (wms.size() > (1u << 20))
        throw std::runtime_error("margulis_setup: infeasible (word budget exceeded)");
    P.word_depth = (int)wms.front().w.size();
    for (const auto& wm : wms) P.kappa[wm.w] = wm.kappa;

    // deduplicate products for grid verification
    std::vector<detail::WordMat> uniq;
    for (const auto& wm : wms) {
        bool seen = false;
        for (const auto& u : uniq)
            seen = seen || (mat_dist(u.p, wm.p) == 0 && u.kappa == wm.kappa);
        if (!seen) uniq.push_back(wm);
    }

    // (2) r0 fixed below d(q,p) = 1 with a strict closure gap
    P.r0 = 0.45;

    // (3) r1 by bisection: expansion on U1, PA^N(clos U1) in U0, clos U1 in PA^N(U0)
    auto r1_ok = [&](double r, int n) {
        for (const auto& wm : uniq) {
            if (!detail::expansion_ok(wm, r, n, margin)) return false;
            if (!detail::image_inside(wm.p, r, P.r0, n, margin)) return false;
            if (!detail::image_inside(wm.p.inverse(), r, P.r0, n, margin)) return false;
        }
        return true;
    };
    double hi = 0.9 * P.r0, lo = hi;
    int halvings = 0;
    while (!r1_ok(lo, coarse_grid) && halvings++ < 60) lo /= 2;
    if (halvings > 60) throw std::runtime_error("margulis_setup: infeasible (no expansion ball U1)");
    if (r1_ok(hi, coarse_grid)) lo = hi;
    for (int it = 0; it < 40 && lo < hi; ++it) {
        double mid = (lo + hi) / 2;
        if (r1_ok(mid, coarse_grid)) lo = mid;
        else hi = mid;
    }
    // final verification at full resolution, shrinking if needed
    while (!r1_ok(lo, grid)) lo *= 0.97;
    P.r1 = lo;
    P.r2 = P.r1 / 2;
    P.r3 = P.r2 / 2;

    // (4) r4 by bisection: PA^N(clos U4) inside U3
    auto r4_ok = [&](double r, int n) {
        for (const auto& wm : uniq)
            if (!detail::image_inside(wm.p, r, P.r3, n, margin)) return false;
        return true;
    };
    double lo4 = P.r3 / 2;
    int h4 = 0;
    while (!r4_ok(lo4, coarse_grid) && h4++ < 80) lo4 /= 2;
    if (h4 > 80) throw std::runtime_error("margulis_setup: infeasible (no confinement ball U4)");
    double hi4 = P.r3 / 2;
    if (!r4_ok(hi4, coarse_grid)) {
        double a = lo4, b = hi4;
        for (int it = 0; it < 40; ++it) {
            double mid = (a + b) / 2;
            if (r4_ok(mid, coarse_grid)) a = mid;
            else b = mid;
        }
        lo4 = a;
    } else {
        lo4 = hi4;
    }
    while (!r4_ok(lo4, grid)) lo4 *= 0.97;
    P.r4 = lo4;

    // (5) M1: global bound on |log ||D_u PA^N||| over all of P^1
    double m1 = 0;
    for (const auto& wm : uniq)
        for (int i = 0; i < grid; ++i) {
            Direction u = Direction::of(kPi * i / grid);
            m1 = std::max(m1, std::abs(std::log(deriv_norm(wm.p, u))));
        }
    P.M1 = m1 + 1e-6;

    // (6) M2: max of phi over (U3 x U2^c) u (U2 x U1^c)
    P.M2 = std::max(-std::log(P.r2 - P.r3), -std::log(P.r1 - P.r2)) + 1e-6;

    // (7) delta: largest dyadic 2^-j, j <= 40, with delta < 1 - alpha and
    // 100 delta M1 M2 < alpha
    P.delta = 0;
    for (int j = 1; j <= 40; ++j) {
        double d = std::ldexp(1.0, -j);
        if (d < 1.0 - alpha && 100.0 * d * P.M1 * P.M2 < alpha) {
            P.delta = d;
            break;
        }
    }
    if (P.delta == 0)
        throw std::runtime_error("margulis_setup: infeasible (no dyadic delta satisfies ledger)");

    // (8) rho per conditional word: closed-ball mass at q hits alpha + delta
    for (const auto& [w, mx] : conditionals) {
        std::vector<std::pair<double, double>> by_dist; // (distance to q, mass)
        for (const auto& [a, mass] : mx.atoms)
            by_dist.push_back({dist(Direction{a}, Direction::q()), mass});
        std::sort(by_dist.begin(), by_dist.end());
        double cum = 0, target = alpha + P.delta;
        bool found = false;
        for (size_t i = 0; i < by_dist.size(); ++i) {
            cum += by_dist[i].second;
            bool boundary = i + 1 == by_dist.size() || by_dist[i + 1].first > by_dist[i].first;
            if (boundary && std::abs(cum - target) <= 1e-9) {
                P.rho[w] = by_dist[i].first;
                found = true;
                break;
            }
            if (cum > target + 1e-9) break;
        }
        if (!found)
            throw std::runtime_error(
                "margulis_setup: infeasible (conditional cannot realize m_x(U_x) = alpha + delta)");
    }
    return P;
}

} // namespace cclab
