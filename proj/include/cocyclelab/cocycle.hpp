#pragma once

// Windowed (finite-memory) GL(2,R)-cocycles over a subshift: products along
// orbits, Holder norms, fiber-bunching certificates, stable/unstable
// holonomies and straightening along stable holonomies.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>

#include "matrix.hpp"
#include "subshift.hpp"

namespace cclab {

struct WindowedCocycle {
    SubshiftSpec spec;
    long long w_lo = 0, w_hi = 1; // window [w_lo, w_hi); may be empty (constant)
    std::map<Word, Mat2> table;   // admissible window-word -> matrix

    bool future_only() const { return w_lo >= 0; }
    int width() const { return (int)(w_hi - w_lo); }

    static WindowedCocycle make(const SubshiftSpec& spec, long long w_lo, long long w_hi,
                                const std::map<Word, Mat2>& table) {
        if (w_hi < w_lo) throw std::invalid_argument("cocycle window is reversed");
        WindowedCocycle c{spec, w_lo, w_hi, table};
        for (const auto& w : spec.words((int)(w_hi - w_lo))) {
            auto it = table.find(w);
            if (it == table.end())
                throw std::invalid_argument("cocycle table misses an admissible window-word");
            if (std::abs(it->second.det()) <= 1e-12)
                throw std::invalid_argument("cocycle table contains a singular matrix");
        }
        if (table.size() != spec.words((int)(w_hi - w_lo)).size())
            throw std::invalid_argument("cocycle table has extraneous words");
        return c;
    }

    static WindowedCocycle constant(const SubshiftSpec& spec, const Mat2& m) {
        return make(spec, 0, 0, {{Word{}, m}});
    }

    // per-symbol table A(x) = table[x_0]
    static WindowedCocycle one_step(const SubshiftSpec& spec, const std::vector<Mat2>& per_symbol) {
        std::map<Word, Mat2> t;
        for (int s = 0; s < spec.alphabet_size; ++s) t[{s}] = per_symbol[(size_t)s];
        return make(spec, 0, 1, t);
    }

    Word window_word(const PointRep& x) const {
        Word w;
        for (long long n = w_lo; n < w_hi; ++n) w.push_back(x.at(n));
        return w;
    }

    const Mat2& eval(const PointRep& x) const {
        auto it = table.find(window_word(x));
        if (it == table.end()) throw std::runtime_error("cocycle: point reads an unknown word");
        return it->second;
    }

    // value along a one-sided word placed at coordinate 0 (future_only tables);
    // word must cover [0, w_hi)
    const Mat2& eval_word(const Word& w) const {
        if (!future_only()) throw std::runtime_error("eval_word requires a future-only cocycle");
        Word key(w.begin() + w_lo, w.begin() + w_hi);
        auto it = table.find(key);
        if (it == table.end()) throw std::runtime_error("cocycle: unknown window word");
        return it->second;
    }
};

// A^n(x) = A(f^{n-1}x) ... A(fx) A(x); Id for n = 0; inverse branch for n < 0.
inline Mat2 iterate(const WindowedCocycle& c, const PointRep& x, long long n) {
    if (n == 0) return Mat2::identity();
    if (n > 0) {
        Mat2 p = Mat2::identity();
        for (long long j = 0; j < n; ++j) p = c.eval(shift(x, j)) * p;
        return p;
    }
    return iterate(c, shift(x, n), -n).inverse();
}

// product of A along a future word: A(f^{n-1}.)...A(.) with the word read from
// position 0; word must have length >= n + w_hi - 1 (future-only cocycles)
inline Mat2 iterate_word(const WindowedCocycle& c, const Word& w, int n) {
    Mat2 p = Mat2::identity();
    for (int j = 0; j < n; ++j) {
        Word key(w.begin() + j + c.w_lo, w.begin() + j + c.w_hi);
        p = c.table.at(key) * p;
    }
    return p;
}

// ||A||_alpha = sup-norm + Holder seminorm; exact for windowed cocycles: the
// supremum over point pairs is attained on pairs of words on the symmetric
// hull of the window.
inline std::pair<double, double> holder_norm(const WindowedCocycle& c, double alpha) {
    if (alpha <= 0) throw std::invalid_argument("holder_norm: alpha must be positive");
    double sup = 0;
    for (const auto& [w, m] : c.table) sup = std::max(sup, m.norm());
    long long R = std::max({-c.w_lo, c.w_hi - 1, (long long)0});
    auto words = c.spec.words((int)(2 * R + 1));
    double semi = 0;
    for (size_t i = 0; i < words.size(); ++i)
        for (size_t j = i + 1; j < words.size(); ++j) {
            // separation index: words occupy coordinates [-R, R]
            long long N = -1;
            for (long long n = 0; n <= R && N < 0; ++n) {
                if (words[i][(size_t)(R + n)] != words[j][(size_t)(R + n)]) N = n;
                else if (words[i][(size_t)(R - n)] != words[j][(size_t)(R - n)]) N = n;
            }
            if (N < 0) continue; // identical on the hull: same matrix
            Word wi(words[i].begin() + (R + c.w_lo), words[i].begin() + (R + c.w_hi));
            Word wj(words[j].begin() + (R + c.w_lo), words[j].begin() + (R + c.w_hi));
            double diff = mat_dist(c.table.at(wi), c.table.at(wj));
            if (diff == 0) continue;
            semi = std::max(semi, diff / std::pow(c.spec.theta, alpha * (double)N));
        }
    return {sup, semi};
}

struct BunchingCertificate {
    double alpha = 0;
    int N = 0;
    double worst_ratio = 0;
};

// smallest N <= N_max with max over admissible words of
// ||A^N|| * ||(A^N)^{-1}|| * theta^{N*alpha} < 1
inline std::optional<BunchingCertificate> fiber_bunching(const WindowedCocycle& c, double alpha,
                                                         int N_max,
                                                         size_t word_budget = (1u << 22)) {
    if (alpha <= 0) throw std::invalid_argument("fiber_bunching: alpha must be positive");
    for (int N = 1; N <= N_max; ++N) {
        long long lo = std::min(c.w_lo, (long long)0);
        long long hi = std::max(c.w_hi + N - 1, (long long)N);
        int span = (int)(hi - lo);
        double wc = std::pow((double)c.spec.alphabet_size, span);
        if (wc > (double)word_budget) return std::nullopt; // enumeration infeasible
        double worst = 0;
        for (const auto& w : c.spec.words(span)) {
            PointRep x = point_through_word(c.spec, w, lo);
            Mat2 p = iterate(c, x, N);
            double ratio = (p.norm() / p.conorm()) * std::pow(c.spec.theta, alpha * N);
            worst = std::max(worst, ratio);
        }
        if (worst < 1.0) return BunchingCertificate{alpha, N, worst};
    }
    return std::nullopt;
}

// A = g * B with |det B| = 1, g = sign(det A) * sqrt(|det A|)
inline std::pair<std::map<Word, double>, WindowedCocycle> sl2_split(const WindowedCocycle& c) {
    std::map<Word, double> g;
    std::map<Word, Mat2> b;
    for (const auto& [w, m] : c.table) {
        double dt = m.det();
        if (std::abs(dt) <= 1e-12) throw std::runtime_error("sl2_split: singular matrix");
        double gv = (dt < 0 ? -1.0 : 1.0) * std::sqrt(std::abs(dt));
        g[w] = gv;
        b[w] = m.scaled(1.0 / gv);
    }
    WindowedCocycle bc = c;
    bc.table = b;
    return {g, bc};
}

struct HolonomyResult {
    Mat2 matrix;
    long long steps = 0;
    double residual = 0;
    bool exact = false;
};

// Canonical holonomies. Stable side: H^s_{x,y} = lim A^n(y)^{-1} A^n(x) for
// y in W^s_loc(x); unstable side via the inverse cocycle over the inverse
// shift. For windowed cocycles the limits stabilize exactly.
inline HolonomyResult holonomy(const WindowedCocycle& c, const PointRep& x, const PointRep& y,
                               Side side, double /*tol*/ = 1e-12) {
    if (side == Side::s) {
        if (!same_projection(x, y, Side::u))
            throw std::invalid_argument("holonomy(s): points are not on a common local stable set");
        long long n = std::max((long long)0, -c.w_lo);
        Mat2 h = iterate(c, y, n).inverse() * iterate(c, x, n);
        Mat2 h2 = iterate(c, y, n + 1).inverse() * iterate(c, x, n + 1);
        return HolonomyResult{h, n, mat_dist(h, h2), true};
    }
    if (!same_projection(x, y, Side::s))
        throw std::invalid_argument("holonomy(u): points are not on a common local unstable set");
    long long n = std::max((long long)0, c.w_hi - 1);
    Mat2 h = iterate(c, y, -n).inverse() * iterate(c, x, -n);
    Mat2 h2 = iterate(c, y, -(n + 1)).inverse() * iterate(c, x, -(n + 1));
    return HolonomyResult{h, n, mat_dist(h, h2), true};
}

// Genuinely Holder cocycle given by a coordinate-reading callback plus
// declared Holder data; holonomies are computed iteratively with a stopping
// budget derived from a bunching certificate.
struct CallbackCocycle {
    SubshiftSpec spec;
    std::function<Mat2(const PointRep&)> fn;
    double alpha = 1.0;
    double sup_norm = 0;      // declared sup ||A||
    double holder_seminorm = 0;
    double worst_ratio = 0.5; // declared bunching ratio at some N (certificate)
};

inline HolonomyResult holonomy(const CallbackCocycle& c, const PointRep& x, const PointRep& y,
                               Side side, double tol) {
    if (!(c.worst_ratio > 0 && c.worst_ratio < 1))
        throw std::invalid_argument("callback holonomy requires a bunching ratio in (0,1)");
    if (!same_projection(x, y, side == Side::s ? Side::u : Side::s))
        throw std::invalid_argument("holonomy: projection precondition violated");
    long long budget = (long long)(64.0 / -std::log(c.worst_ratio)) + 8;
    auto prod = [&](const PointRep& p, long long n) {
        Mat2 m = Mat2::identity();
        if (n >= 0)
            for (long long j = 0; j < n; ++j) m = c.fn(shift(p, j)) * m;
        else {
            for (long long j = -1; j >= n; --j) m = c.fn(shift(p, j)).inverse() * m;
            return m;
        }
        return m;
    };
    long long sgn = side == Side::s ? 1 : -1;
    Mat2 prev = Mat2::identity();
    for (long long n = 1; n <= budget; ++n) {
        Mat2 h = prod(y, sgn * n).inverse() * prod(x, sgn * n);
        double r = mat_dist(h, prev);
        if (n > 1 && r < tol) return HolonomyResult{h, n, r, false};
        prev = h;
    }
    throw std::runtime_error("holonomy: no convergence within iteration budget");
}

// default anchors: lexicographically least periodic point through each symbol
inline std::vector<PointRep> default_anchors(const SubshiftSpec& spec) {
    std::vector<PointRep> z;
    for (int s = 0; s < spec.alphabet_size; ++s)
        z.push_back(periodic_point(spec.lex_min_cycle(s)));
    return z;
}

// g(x) = W^u_loc(z_{x_0}) /\ W^s_loc(x): past from the anchor, future from x
inline PointRep stable_anchor_projection(const SubshiftSpec& spec, const PointRep& x,
                                         const std::vector<PointRep>& anchors, long long horizon) {
    const PointRep& z = anchors.at((size_t)x.at(0));
    horizon = std::max(horizon, x.core_hi()); // keep the periodic tail phase-aligned
    Word core;
    for (long long n = 0; n <= horizon; ++n) core.push_back(x.at(n));
    // past = anchor's periodic tail ending just before coordinate 0
    Word lp;
    for (long long n = 0; n < z.left_period(); ++n)
        lp.push_back(z.at(-z.left_period() + n));
    // future beyond horizon: continue x's own tail
    Word rp;
    for (long long n = 0; n < x.right_period(); ++n)
        rp.push_back(x.at(horizon + 1 + n));
    PointRep g{lp, core, rp, 0};
    if (!g.admissible(spec)) throw std::runtime_error("stable_anchor_projection: inadmissible");
    return g;
}

// straightening along stable holonomies: conjugate by C(x) = H^s_{x, g(x)},
//   A~(x) = C(fx) o A(x) o C(x)^{-1},
// constant along local stable sets, so future-only; for windowed input with
// window [w_lo, w_hi) the output window is [0, w_hi + max(0, -w_lo)).
inline Mat2 straighten_at(const WindowedCocycle& c, const PointRep& x,
                          const std::vector<PointRep>& anchors) {
    long long horizon = std::max(c.w_hi + std::max((long long)0, -c.w_lo) + 2, (long long)2);
    PointRep fx = shift(x, 1);
    PointRep gx = stable_anchor_projection(c.spec, x, anchors, horizon);
    PointRep gfx = stable_anchor_projection(c.spec, fx, anchors, horizon);
    Mat2 cx = holonomy(c, x, gx, Side::s).matrix;
    Mat2 cfx = holonomy(c, fx, gfx, Side::s).matrix;
    return cfx * c.eval(x) * cx.inverse();
}

inline WindowedCocycle straighten(const WindowedCocycle& c,
                                  const std::vector<PointRep>& anchors) {
    if (c.future_only()) return c;
    long long w_out = c.w_hi + std::max((long long)0, -c.w_lo);
    std::map<Word, Mat2> t;
    for (const auto& w : c.spec.words((int)w_out)) {
        // representative with anchored past: C(x) = Id there, and the value is
        // independent of the choice of past
        PointRep x = point_through_word(c.spec, w, 0);
        PointRep xa = stable_anchor_projection(c.spec, x, anchors,
                                               w_out + std::max((long long)0, -c.w_lo) + 2);
        t[w] = straighten_at(c, xa, anchors);
    }
    WindowedCocycle out{c.spec, 0, w_out, t};
    return out;
}

struct HolonomyReport {
    double composition = 0;
    double identity = 0;
    double equivariance = 0;
};

// residuals of the holonomy family laws over sampled stable/unstable data
inline HolonomyReport holonomy_residuals(const WindowedCocycle& c, int samples, uint64_t seed) {
    HolonomyReport rep;
    std::mt19937_64 rng(seed);
    long long reach = std::max({-c.w_lo, c.w_hi, (long long)1}) + 2;
    auto random_word = [&](int len) {
        Word w;
        std::uniform_int_distribution<int> d(0, c.spec.alphabet_size - 1);
        while ((int)w.size() < len) {
            int s = d(rng);
            if (w.empty() || c.spec.allowed(w.back(), s)) w.push_back(s);
        }
        return w;
    };
    for (int it = 0; it < samples; ++it) {
        for (Side side : {Side::s}) {
            // three points sharing the relevant projection: common future word
            // (stable) or common past word (unstable), independent other side
            int flen = (int)(2 * reach + 6);
            Word shared = random_word(flen);
            auto mk = [&]() {
                Word other = random_word(flen);
                // splice: shared word on the constrained side, independent
                // admissible word on the free side
                if (side == Side::s) {
                    Word w = other; // past, must transition into shared[0]
                    while (!c.spec.allowed(w.back(), shared.front())) w = random_word(flen);
                    Word full = w;
                    full.insert(full.end(), shared.begin(), shared.end());
                    return point_through_word(c.spec, full, -(long long)flen);
                }
                Word w = other;
                while (!c.spec.allowed(shared.back(), w.front())) w = random_word(flen);
                Word full = shared;
                full.insert(full.end(), w.begin(), w.end());
                return point_through_word(c.spec, full, -(flen - 1));
            };
            PointRep x = mk(), y = mk(), z = mk();
            Mat2 hxz = holonomy(c, x, z, side).matrix;
            Mat2 hyz = holonomy(c, y, z, side).matrix;
            Mat2 hxy = holonomy(c, x, y, side).matrix;
            rep.composition = std::max(rep.composition, mat_dist(hxz, hyz * hxy));
            rep.identity = std::max(rep.identity,
                                    mat_dist(holonomy(c, x, x, side).matrix, Mat2::identity()));
            if (side == Side::s) {
                // H_{fy,fz} A(y) = A(z) H_{y,z}: inverse-free form of the
                // equivariance law, exact for future-only cocycles
                Mat2 lhs = holonomy(c, shift(y, 1), shift(z, 1), Side::s).matrix * c.eval(y);
                Mat2 rhs = c.eval(z) * holonomy(c, y, z, Side::s).matrix;
                rep.equivariance = std::max(rep.equivariance, mat_dist(lhs, rhs));
            }
        }
    }
    return rep;
}

} // namespace cclab
