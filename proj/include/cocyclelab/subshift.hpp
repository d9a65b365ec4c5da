#pragma once

// Two-sided subshift of finite type: transition data, eventually periodic
// points, the theta-metric, cylinders, periodic orbits and memory recoding.
//
// Symbols are 0-based internally; configs and reports use 1-based names.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cclab {

using Word = std::vector<int>;

struct ValidationReport {
    bool ok = true;
    bool transitive = true;
    int graph_period = 1;
    std::vector<std::string> issues;
};

struct SubshiftSpec {
    int alphabet_size = 0;
    std::vector<std::vector<int>> transitions; // 0/1
    double theta = 0.5;

    bool allowed(int a, int b) const { return transitions[a][b] != 0; }

    static ValidationReport validate(int ell, const std::vector<std::vector<int>>& q,
                                     double theta) {
        ValidationReport rep;
        auto fail = [&](const std::string& s) {
            rep.ok = false;
            rep.issues.push_back(s);
        };
        if (ell <= 0) fail("alphabet_size must be positive");
        if ((int)q.size() != ell) fail("transition matrix is not square (rows)");
        for (const auto& row : q)
            if ((int)row.size() != ell) fail("transition matrix is not square (cols)");
        if (!(theta > 0.0 && theta < 1.0)) fail("theta must lie in (0,1)");
        if (!rep.ok) return rep;
        for (int i = 0; i < ell; ++i) {
            bool row = false, col = false;
            for (int j = 0; j < ell; ++j) {
                if (q[i][j] != 0 && q[i][j] != 1) fail("transition entries must be 0/1");
                row = row || q[i][j] != 0;
                col = col || q[j][i] != 0;
            }
            if (!row) fail("row " + std::to_string(i + 1) + " has no allowed transition");
            if (!col) fail("column " + std::to_string(i + 1) + " has no allowed transition");
        }
        if (!rep.ok) return rep;
        // strong connectivity by forward/backward reachability from 0
        auto reach = [&](bool fwd) {
            std::vector<char> seen(ell, 0);
            std::vector<int> stack{0};
            seen[0] = 1;
            while (!stack.empty()) {
                int v = stack.back();
                stack.pop_back();
                for (int w = 0; w < ell; ++w) {
                    int e = fwd ? q[v][w] : q[w][v];
                    if (e && !seen[w]) {
                        seen[w] = 1;
                        stack.push_back(w);
                    }
                }
            }
            return seen;
        };
        auto f = reach(true), b = reach(false);
        for (int i = 0; i < ell; ++i)
            if (!f[i] || !b[i]) {
                rep.transitive = false;
                fail("transition graph is not strongly connected (symbol " +
                     std::to_string(i + 1) + ")");
                break;
            }
        if (rep.ok) {
            // graph period: gcd of closed-walk length differences via BFS levels
            std::vector<long long> level(ell, -1);
            std::vector<int> order{0};
            level[0] = 0;
            long long g = 0;
            for (size_t h = 0; h < order.size(); ++h) {
                int v = order[h];
                for (int w = 0; w < ell; ++w)
                    if (q[v][w]) {
                        if (level[w] < 0) {
                            level[w] = level[v] + 1;
                            order.push_back(w);
                        } else {
                            g = std::gcd(g, std::abs(level[v] + 1 - level[w]));
                        }
                    }
            }
            rep.graph_period = g == 0 ? 1 : (int)g;
        }
        return rep;
    }

    static SubshiftSpec make(int ell, const std::vector<std::vector<int>>& q, double theta) {
        ValidationReport rep = validate(ell, q, theta);
        if (!rep.ok)
            throw std::invalid_argument("invalid subshift spec: " + rep.issues.front());
        return SubshiftSpec{ell, q, theta};
    }

    static SubshiftSpec full_shift(int ell, double theta = 0.5) {
        return make(ell, std::vector<std::vector<int>>(ell, std::vector<int>(ell, 1)), theta);
    }
    static SubshiftSpec golden_mean(double theta = 0.5) {
        return make(2, {{1, 1}, {1, 0}}, theta);
    }

    bool word_admissible(const Word& w) const {
        for (size_t i = 0; i + 1 < w.size(); ++i)
            if (!allowed(w[i], w[i + 1])) return false;
        for (int s : w)
            if (s < 0 || s >= alphabet_size) return false;
        return true;
    }

    // all admissible words of a given length (lexicographic order)
    std::vector<Word> words(int len) const {
        std::vector<Word> out;
        if (len <= 0) {
            out.push_back({});
            return out;
        }
        Word w;
        std::function<void(int)> rec = [&](int depth) {
            if (depth == len) {
                out.push_back(w);
                return;
            }
            for (int s = 0; s < alphabet_size; ++s) {
                if (!w.empty() && !allowed(w.back(), s)) continue;
                w.push_back(s);
                rec(depth + 1);
                w.pop_back();
            }
        };
        rec(0);
        return out;
    }

    // lexicographically least cycle through s of minimal length, as a word
    // starting at s; the cycle closes admissibly (last -> first).
    Word lex_min_cycle(int s) const {
        for (int len = 1; len <= alphabet_size; ++len) {
            Word w{s};
            std::function<bool(int)> rec = [&](int depth) {
                if (depth == len)
                    return allowed(w.back(), s);
                for (int t = 0; t < alphabet_size; ++t) {
                    if (!allowed(w[depth - 1], t)) continue;
                    if (depth == len - 1 && !allowed(t, s)) continue;
                    w.push_back(t);
                    if (rec(depth + 1)) return true;
                    w.pop_back();
                }
                return false;
            };
            if (len == 1) {
                if (allowed(s, s)) return w;
                continue;
            }
            if (rec(1)) return w;
        }
        throw std::runtime_error("no cycle through symbol (graph not transitive?)");
    }
};

// Eventually periodic bi-infinite point:
//   ... L L L | core | R R R ...
// Coordinate n reads position (n + origin) of the conceptual concatenation in
// which core occupies [0, |core|), the left period repeats on (-inf, 0) and
// the right period repeats on [|core|, +inf).
struct PointRep {
    Word left;  // nonempty
    Word core;  // may be empty
    Word right; // nonempty
    long long origin = 0;

    int at(long long n) const {
        long long m = n + origin;
        long long cs = (long long)core.size();
        if (m >= 0 && m < cs) return core[(size_t)m];
        if (m < 0) {
            long long L = (long long)left.size();
            long long r = ((m % L) + L) % L;
            return left[(size_t)r];
        }
        long long R = (long long)right.size();
        return right[(size_t)((m - cs) % R)];
    }

    // smallest n-coordinate occupied by core (or junction), for scan bounds
    long long core_lo() const { return -origin; }
    long long core_hi() const { return (long long)core.size() - origin; }
    long long left_period() const { return (long long)left.size(); }
    long long right_period() const { return (long long)right.size(); }

    bool admissible(const SubshiftSpec& spec) const {
        auto ok = [&](int a, int b) { return spec.allowed(a, b); };
        for (size_t i = 0; i + 1 < left.size(); ++i)
            if (!ok(left[i], left[i + 1])) return false;
        if (!ok(left.back(), left.front())) return false;
        for (size_t i = 0; i + 1 < core.size(); ++i)
            if (!ok(core[i], core[i + 1])) return false;
        for (size_t i = 0; i + 1 < right.size(); ++i)
            if (!ok(right[i], right[i + 1])) return false;
        if (!ok(right.back(), right.front())) return false;
        int before_core = left.back();
        int after_core_first = right.front();
        if (core.empty()) {
            if (!ok(before_core, after_core_first)) return false;
        } else {
            if (!ok(before_core, core.front())) return false;
            if (!ok(core.back(), after_core_first)) return false;
        }
        return true;
    }
};

inline PointRep shift(const PointRep& x, long long n) {
    PointRep y = x;
    y.origin += n;
    return y;
}

// Bound B such that agreement of coordinates on |n| <= B implies agreement
// everywhere (both points are eventually periodic).
inline long long comparison_bound(const PointRep& x, const PointRep& y) {
    long long lp = std::lcm(x.left_period(), y.left_period());
    long long rp = std::lcm(x.right_period(), y.right_period());
    long long lo = std::min({x.core_lo(), y.core_lo(), (long long)0});
    long long hi = std::max({x.core_hi(), y.core_hi(), (long long)0});
    return std::max(std::abs(lo) + lp, std::abs(hi) + rp) + 1;
}

// N(x,y) = max{N >= 0 : x_n = y_n for all |n| < N}; nullopt means equal points.
inline std::optional<long long> separation_index(const PointRep& x, const PointRep& y) {
    long long B = comparison_bound(x, y);
    for (long long n = 0; n <= B; ++n) {
        if (x.at(n) != y.at(n)) return n;
        if (n > 0 && x.at(-n) != y.at(-n)) return n;
    }
    return std::nullopt;
}

inline bool points_equal(const PointRep& x, const PointRep& y) {
    return !separation_index(x, y).has_value();
}

inline double d_theta(const SubshiftSpec& spec, const PointRep& x, const PointRep& y) {
    auto n = separation_index(x, y);
    if (!n) return 0.0;
    return std::pow(spec.theta, (double)*n);
}

// one-sided projections: equality tests of P^u (n >= 0) and P^s (n <= 0)
enum class Side { u, s };

inline bool same_projection(const PointRep& x, const PointRep& y, Side side) {
    long long B = comparison_bound(x, y);
    for (long long n = 0; n <= B; ++n) {
        long long m = side == Side::u ? n : -n;
        if (x.at(m) != y.at(m)) return false;
    }
    return true;
}

// one-sided word view: coordinates 0..len-1 (side u) or -len+1..0 (side s)
inline Word project_word(const PointRep& x, Side side, int len) {
    Word w((size_t)len);
    for (int i = 0; i < len; ++i)
        w[(size_t)i] = side == Side::u ? x.at(i) : x.at(-(len - 1) + i);
    return w;
}

struct Cylinder {
    long long offset = 0; // m
    Word word;            // a_0 ... a_k occupying coordinates m..m+k

    bool contains(const PointRep& x) const {
        for (size_t i = 0; i < word.size(); ++i)
            if (x.at(offset + (long long)i) != word[i]) return false;
        return true;
    }
};

// purely periodic point with period word w, w[0] at coordinate 0
inline PointRep periodic_point(const Word& w) {
    return PointRep{w, {}, w, 0};
}

inline std::vector<PointRep> periodic_points(const SubshiftSpec& spec, int n) {
    if (n < 1) throw std::invalid_argument("periodic_points: n must be >= 1");
    std::vector<PointRep> out;
    for (const auto& w : spec.words(n))
        if (spec.allowed(w.back(), w.front())) out.push_back(periodic_point(w));
    return out;
}

// a concrete admissible point running through `w` with w[0] at coordinate pos;
// tails are filled with deterministic admissible cycles
inline PointRep point_through_word(const SubshiftSpec& spec, const Word& w, long long pos = 0) {
    if (w.empty()) {
        Word c = spec.lex_min_cycle(0);
        PointRep p{c, {}, c, 0};
        p.origin = -pos;
        return p;
    }
    Word lc = spec.lex_min_cycle(w.front()); // ends with a symbol leading to w.front()
    Word rcyc = spec.lex_min_cycle(w.back());
    Word rc(rcyc.begin() + 1, rcyc.end());
    rc.push_back(rcyc.front()); // rotation: starts with a successor of w.back()
    if (rc.empty()) rc = rcyc;
    PointRep p{lc, w, rc, 0};
    p.origin = -pos;
    if (!p.admissible(spec)) throw std::runtime_error("point_through_word: inadmissible");
    return p;
}

// --- memory-k recoding -------------------------------------------------------

struct Recoding {
    SubshiftSpec base;    // original spec
    SubshiftSpec recoded; // alphabet of admissible k-words
    int k = 1;
    std::vector<Word> decode_tbl;  // recoded symbol -> k-word
    std::map<Word, int> encode_tbl;

    int encode(const Word& w) const {
        auto it = encode_tbl.find(w);
        if (it == encode_tbl.end()) throw std::runtime_error("recode: inadmissible word");
        return it->second;
    }
    const Word& decode(int s) const { return decode_tbl.at((size_t)s); }

    // recoded path of an original word of length >= k (sliding blocks)
    std::vector<int> path(const Word& w) const {
        if ((int)w.size() < k) throw std::runtime_error("recode: word shorter than k");
        std::vector<int> p;
        for (size_t i = 0; i + (size_t)k <= w.size(); ++i)
            p.push_back(encode(Word(w.begin() + i, w.begin() + i + k)));
        return p;
    }
};

inline Recoding recode(const SubshiftSpec& spec, int k) {
    if (k < 1) throw std::invalid_argument("recode: k must be >= 1");
    Recoding rc;
    rc.base = spec;
    rc.k = k;
    rc.decode_tbl = spec.words(k);
    for (size_t i = 0; i < rc.decode_tbl.size(); ++i)
        rc.encode_tbl[rc.decode_tbl[i]] = (int)i;
    int m = (int)rc.decode_tbl.size();
    std::vector<std::vector<int>> q(m, std::vector<int>(m, 0));
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            const Word& wa = rc.decode_tbl[(size_t)a];
            const Word& wb = rc.decode_tbl[(size_t)b];
            bool over = true;
            for (int i = 0; i + 1 < k; ++i)
                if (wa[(size_t)(i + 1)] != wb[(size_t)i]) { over = false; break; }
            if (over && spec.allowed(wa.back(), wb.back()))
                q[a][b] = 1;
            if (k == 1) q[a][b] = spec.transitions[a][b];
        }
    rc.recoded = SubshiftSpec::make(m, q, spec.theta);
    return rc;
}

} // namespace cclab
