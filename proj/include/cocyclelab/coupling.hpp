#pragma once

// Symmetric self-couplings of projective measures and the energy machinery:
// the Margulis energy, the finite-energy construction (diagonal spreading),
// confinement away from the far region, the transfer push-forward, the
// defect decomposition, and the certified energy-decrement step.

#include <array>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "ustate.hpp"

namespace cclab {

namespace detail {

inline std::string word_str(const Word& w) {
    std::string s;
    for (int a : w) s += std::to_string(a);
    return s;
}

// total-variation distance on the atom algebra read at resolution eps:
// signed events are clustered at scale eps, so matching atoms that differ
// only by rounding jitter cancel exactly
inline double tv_distance(const ProjMeasure& a, const ProjMeasure& b, double eps) {
    std::vector<std::pair<double, double>> ev;
    for (const auto& [t, m] : a.atoms) ev.push_back({t, m});
    for (const auto& [t, m] : b.atoms) ev.push_back({t, -m});
    std::sort(ev.begin(), ev.end());
    double tv = 0;
    for (size_t i = 0; i < ev.size();) {
        size_t j = i;
        while (j + 1 < ev.size() && ev[j + 1].first - ev[j].first <= eps) ++j;
        double run = 0;
        for (size_t k = i; k <= j; ++k) run += ev[k].second;
        tv += std::abs(run);
        i = j + 1;
    }
    return tv;
}

} // namespace detail

struct CouplingAtom {
    double u = 0, v = 0, mass = 0;
};

// atomic measure on P^1 x P^1; all constructions below preserve symmetry
// (swap-invariance) by always inserting atoms in mirror pairs
struct Coupling {
    std::vector<CouplingAtom> atoms;

    double total_mass() const {
        double s = 0;
        for (const auto& a : atoms) s += a.mass;
        return s;
    }

    void add(double u, double v, double mass) {
        if (mass > 0) atoms.push_back({Direction::of(u).angle, Direction::of(v).angle, mass});
    }

    void append(const Coupling& o, double scale = 1.0) {
        for (const auto& a : o.atoms) add(a.u, a.v, a.mass * scale);
    }

    Coupling scaled(double s) const {
        Coupling r;
        for (const auto& a : atoms) r.add(a.u, a.v, a.mass * s);
        return r;
    }

    Coupling swapped() const {
        Coupling r;
        for (const auto& a : atoms) r.add(a.v, a.u, a.mass);
        return r;
    }

    template <class PU, class PV> Coupling restrict_where(PU pu, PV pv) const {
        Coupling r;
        for (const auto& a : atoms)
            if (pu(Direction{a.u}) && pv(Direction{a.v})) r.atoms.push_back(a);
        return r;
    }

    template <class PU, class PV> double mass_where(PU pu, PV pv) const {
        double s = 0;
        for (const auto& a : atoms)
            if (pu(Direction{a.u}) && pv(Direction{a.v})) s += a.mass;
        return s;
    }

    ProjMeasure marginal(int j) const {
        ProjMeasure r;
        for (const auto& a : atoms) r.add(j == 1 ? a.u : a.v, a.mass);
        std::sort(r.atoms.begin(), r.atoms.end());
        // fold exact duplicates so product constructions stay compact
        size_t k = 0;
        for (size_t i = 0; i < r.atoms.size(); ++i) {
            if (k > 0 && r.atoms[k - 1].first == r.atoms[i].first)
                r.atoms[k - 1].second += r.atoms[i].second;
            else
                r.atoms[k++] = r.atoms[i];
        }
        r.atoms.resize(k);
        return r;
    }

    Coupling pushforward(const Mat2& m) const {
        Coupling r;
        for (const auto& a : atoms)
            r.add(act(m, Direction{a.u}).angle, act(m, Direction{a.v}).angle, a.mass);
        return r;
    }

    // merge atoms whose coordinates both agree within eps (lexicographic
    // greedy sweep, mass-weighted positions); prevents atom blowup
    void coalesce(double eps) {
        std::sort(atoms.begin(), atoms.end(), [](const CouplingAtom& a, const CouplingAtom& b) {
            return a.u < b.u || (a.u == b.u && a.v < b.v);
        });
        std::vector<CouplingAtom> out;
        for (const auto& a : atoms) {
            bool merged = false;
            for (auto it = out.rbegin(); it != out.rend() && a.u - it->u <= eps; ++it)
                if (std::abs(a.v - it->v) <= eps) {
                    double m = it->mass + a.mass;
                    // incremental form keeps the position exact when the
                    // merged atoms coincide
                    it->u += (a.u - it->u) * (a.mass / m);
                    it->v += (a.v - it->v) * (a.mass / m);
                    it->mass = m;
                    merged = true;
                    break;
                }
            if (!merged) out.push_back(a);
        }
        atoms = out;
    }

    // total-variation distance to the swapped measure (0 = exactly symmetric)
    double symmetry_residual() const {
        std::map<std::pair<double, double>, double> d;
        for (const auto& a : atoms) {
            d[{a.u, a.v}] += a.mass;
            d[{a.v, a.u}] -= a.mass;
        }
        double s = 0;
        for (const auto& [k, m] : d) s += std::abs(m);
        return s / 2;
    }

    // integral of the Margulis function phi = -log d; near-diagonal atoms
    // (d < 2^-40) are rejected, never clamped
    double phi_integral() const {
        double s = 0;
        for (size_t i = 0; i < atoms.size(); ++i) {
            double d = dist(Direction{atoms[i].u}, Direction{atoms[i].v});
            if (d < 0x1p-40)
                throw std::runtime_error("energy: diagonal atom at index " + std::to_string(i));
            s += atoms[i].mass * (-std::log(d));
        }
        return s;
    }
};

inline Coupling product_coupling(const ProjMeasure& a, const ProjMeasure& b) {
    Coupling r;
    for (const auto& [ua, ma] : a.atoms)
        for (const auto& [ub, mb] : b.atoms) r.add(ua, ub, ma * mb);
    return r;
}

// the canonical symmetric self-coupling nu x nu / |nu|
inline Coupling trivial_coupling(const ProjMeasure& nu) {
    double n = nu.total_mass();
    if (n <= 0) throw std::invalid_argument("trivial_coupling: zero-mass measure");
    return product_coupling(nu, nu).scaled(1.0 / n);
}

// family of symmetric self-couplings of the measures {m_x | U_x}, indexed by
// cylinder words; carries the restricted targets, the exterior remainders
// m_x | U_x^c (needed by the transfer defect), and the ball radii rho
struct CouplingFamily {
    int depth = 1;
    std::map<Word, Coupling> xi;
    std::map<Word, ProjMeasure> target;
    std::map<Word, ProjMeasure> exterior;
    std::map<Word, double> rho;
    double resolution = kPi / 2 * 0x1p-12;
};

// split full conditionals into target/exterior by the ball U_x = B(q, rho)
// and couple every target trivially
inline CouplingFamily make_coupling_family(const ConditionalFamily& full,
                                           const std::map<Word, double>& rho) {
    CouplingFamily f;
    f.depth = full.depth;
    f.resolution = full.resolution;
    f.rho = rho;
    for (const auto& [w, mu] : full.conds) {
        double r = rho.at(w);
        auto in = [&](Direction d) { return dist(d, Direction::q()) <= r; };
        f.target[w] = mu.restrict(in);
        f.exterior[w] = mu.restrict([&](Direction d) { return !in(d); });
        f.xi[w] = trivial_coupling(f.target[w]);
    }
    return f;
}

// worst total-variation gap (at atom resolution) between either marginal of
// any coupling and its target
inline double marginal_residual(const CouplingFamily& f) {
    double worst = 0;
    for (const auto& [w, xi] : f.xi)
        for (int j : {1, 2})
            worst = std::max(worst,
                             detail::tv_distance(xi.marginal(j), f.target.at(w), f.resolution));
    return worst;
}

inline double symmetry_residual(const CouplingFamily& f) {
    double worst = 0;
    for (const auto& [w, xi] : f.xi) worst = std::max(worst, xi.symmetry_residual());
    return worst;
}

// energy = sum over words of mu(cylinder) * integral of phi against xi_w
inline double energy(const CouplingFamily& f, const GibbsMeasure& m) {
    double e = 0;
    for (const auto& [w, xi] : f.xi) {
        try {
            e += m.cylinder_measure(w) * xi.phi_integral();
        } catch (const std::runtime_error& ex) {
            throw std::runtime_error(std::string(ex.what()) + " (word " + detail::word_str(w) +
                                     ")");
        }
    }
    return e;
}

struct SpreadResult {
    CouplingFamily family;
    double r0 = 0; // Lebesgue number of the ball cover: zero mass on all B(u,r0)^2
    int sweeps = 0;
};

// finite-energy construction: sweep a finite r-ball cover of P^1 and, per
// ball B, replace the diagonal block xi|B^2 by a spread product built from
// the far block xi|((2r)-complement)^2, preserving marginals exactly
inline SpreadResult spread_diagonal(const CouplingFamily& famC, double r,
                                    double small_ball_limit =
                                        std::numeric_limits<double>::infinity()) {
    if (!(r > 0 && r < 0.5)) throw std::invalid_argument("spread_diagonal: need 0 < r < 1/2");
    int n_balls = (int)std::ceil(2.0 / r) + 1;
    double spacing = 2.0 / n_balls;          // normalized arc between cover centers
    double r0 = r - spacing / 2;             // Lebesgue number of the cover

    if (std::isfinite(small_ball_limit))
        for (const auto& [w, mu] : famC.target)
            for (const auto& [a, ms] : mu.atoms)
                if (mu.ball_mass(Direction{a}, 2 * r) >= small_ball_limit)
                    throw std::runtime_error(
                        "spread_diagonal: small-ball precondition fails at word " +
                        detail::word_str(w) + ", center angle " + std::to_string(a));

    SpreadResult res;
    res.family = famC;
    res.r0 = r0;
    for (auto& [w, xi] : res.family.xi) {
        int sweeps = 0;
        for (;; ++sweeps) {
            if (sweeps > 16)
                throw std::runtime_error("spread_diagonal: did not stabilize at word " +
                                         detail::word_str(w));
            bool dirty = false;
            for (int i = 0; i < n_balls; ++i) {
                Direction c = Direction::of(i * kPi / n_balls);
                auto inB = [&](Direction d) { return dist(d, c) < r; };
                auto out2 = [&](Direction d) { return dist(d, c) >= 2 * r; };
                // spread only the offending pairs: both coordinates in the
                // ball and within r0 of the diagonal; replacement pairs are
                // at least r apart, so they are never selected again
                auto offending = [&](const CouplingAtom& a) {
                    return inB(Direction{a.u}) && inB(Direction{a.v}) &&
                           dist(Direction{a.u}, Direction{a.v}) < r0;
                };
                Coupling block;
                for (const auto& a : xi.atoms)
                    if (offending(a)) block.atoms.push_back(a);
                double mB = block.total_mass();
                if (mB <= 0) continue;
                double denom = xi.mass_where(out2, out2);
                if (!(mB < denom))
                    throw std::runtime_error(
                        "spread_diagonal: theta >= 1 (mass too concentrated) at word " +
                        detail::word_str(w) + ", ball center " + std::to_string(c.angle));
                double theta = mB / denom;
                ProjMeasure pa = block.marginal(1);
                ProjMeasure pb = xi.restrict_where(out2, out2).marginal(1).scaled(theta);
                Coupling zeta = product_coupling(pa, pb).scaled(1.0 / mB);
                Coupling next;
                for (const auto& a : xi.atoms) {
                    if (offending(a)) continue; // removed block
                    bool ou = out2(Direction{a.u}), ov = out2(Direction{a.v});
                    next.add(a.u, a.v, (ou && ov) ? a.mass * (1.0 - theta) : a.mass);
                }
                next.append(zeta);
                next.append(zeta.swapped());
                next.coalesce(0.0); // merge exact duplicates; atom count stays
                                    // bounded by (number of positions)^2
                xi = next;
                dirty = true;
            }
            if (!dirty) break;
        }
        res.sweeps = std::max(res.sweeps, sweeps);
        // every surviving atom is at least r0 off the diagonal
        for (const auto& a : xi.atoms)
            if (dist(Direction{a.u}, Direction{a.v}) < r0)
                throw std::runtime_error("spread_diagonal: residual near-diagonal atom at word " +
                                         detail::word_str(w));
    }
    return res;
}

// confinement: remove all mass from U2^c x U2^c, re-coupling it against the
// diagonal block over U3; per-word energy increase is at most 4 delta M2
inline CouplingFamily confine(const CouplingFamily& famC, const MargulisParams& P) {
    CouplingFamily out = famC;
    auto inU2 = [&](Direction d) { return dist(d, Direction::q()) < P.r2; };
    auto inU3 = [&](Direction d) { return dist(d, Direction::q()) < P.r3; };
    auto outU2 = [&](Direction d) { return !inU2(d); };
    for (auto& [w, xi] : out.xi) {
        double far_mass = xi.mass_where(outU2, outU2);
        if (far_mass <= 0) continue;
        ProjMeasure nu = xi.restrict_where(outU2, outU2).marginal(1);
        ProjMeasure eta = xi.restrict_where(inU3, inU3).marginal(1);
        double nn = nu.total_mass(), ne = eta.total_mass();
        if (!(nn <= ne))
            throw std::runtime_error("confine: mass bound violated at word " +
                                     detail::word_str(w));
        Coupling next;
        for (const auto& a : xi.atoms) {
            bool fu = outU2(Direction{a.u}), fv = outU2(Direction{a.v});
            if (fu && fv) continue; // removed far block
            bool tu = inU3(Direction{a.u}), tv = inU3(Direction{a.v});
            next.add(a.u, a.v, (tu && tv) ? a.mass * (1.0 - nn / ne) : a.mass);
        }
        Coupling cross = product_coupling(nu, eta).scaled(1.0 / ne);
        next.append(cross);
        next.append(cross.swapped());
        xi = next;
    }
    return out;
}

struct TransferRaw {
    std::map<Word, Coupling> xi_hat;       // push-forward couplings per word
    std::map<Word, ProjMeasure> inbound;   // exterior mass landing inside U_x
};

// xi_hat_x = sum over depth-N predecessor words y of (1/J f^N(y)) times the
// (PA^N x PA^N) push-forward of xi_y; simultaneously tracks the push-forward
// of the exterior remainders restricted to U_x (the inbound defect I_x)
inline TransferRaw transfer_pushforward(const CouplingFamily& famC, const WindowedCocycle& c,
                                        const GibbsMeasure& m, int N, double eps) {
    if (!c.future_only())
        throw std::invalid_argument("transfer_pushforward: cocycle must be future-only");
    if (famC.depth < m.rc.k || (long long)famC.depth < std::max((long long)1, c.w_hi))
        throw std::invalid_argument("transfer_pushforward: family depth below memory");
    TransferRaw out;
    if (N == 0) {
        out.xi_hat = famC.xi;
        for (const auto& [w, unused] : famC.xi) out.inbound[w] = ProjMeasure{};
        return out;
    }
    int k = famC.depth;
    for (const auto& [w, unused] : famC.xi) {
        out.xi_hat[w] = Coupling{};
        out.inbound[w] = ProjMeasure{};
    }
    for (const auto& u : c.spec.words(N + k)) {
        Word x(u.begin() + N, u.end());
        Word y(u.begin(), u.begin() + k);
        auto path = m.rc.path(u);
        double g = 1.0;
        for (int j = 0; j < N; ++j) g /= m.jac_u(path[(size_t)j], path[(size_t)j + 1]);
        Mat2 M = iterate_word(c, u, N);
        out.xi_hat[x].append(famC.xi.at(y).pushforward(M), g);
        double rx = famC.rho.at(x);
        for (const auto& [a, ms] : famC.exterior.at(y).atoms) {
            Direction img = act(M, Direction{a});
            if (dist(img, Direction::q()) <= rx) out.inbound[x].add(img.angle, g * ms);
        }
    }
    for (auto& [w, xi] : out.xi_hat) xi.coalesce(eps);
    for (auto& [w, mu] : out.inbound) {
        std::sort(mu.atoms.begin(), mu.atoms.end());
        mu.normalize(eps);
    }
    return out;
}

struct Defect {
    ProjMeasure eta;      // first marginal of xi_hat restricted to U_x^2
    ProjMeasure inbound;  // I_x: exterior push-forward mass landing in U_x
    ProjMeasure outbound; // O_x: first marginal of xi_hat on U_x x U_x^c
    double identity_residual = 0; // tv gap of  target = eta + I + O
    double supp_inbound_min_dist = std::numeric_limits<double>::infinity();
};

// decomposition m_x|U_x = eta_x + I_x + O_x, with the identity verified on
// the atom algebra at the family resolution
inline std::map<Word, Defect> defect_split(const TransferRaw& raw, const CouplingFamily& famC,
                                           double identity_tol) {
    std::map<Word, Defect> out;
    for (const auto& [w, xi] : raw.xi_hat) {
        double rx = famC.rho.at(w);
        auto in = [&](Direction d) { return dist(d, Direction::q()) <= rx; };
        auto outside = [&](Direction d) { return !in(d); };
        Defect d;
        d.eta = xi.restrict_where(in, in).marginal(1);
        d.outbound = xi.restrict_where(in, outside).marginal(1);
        d.inbound = raw.inbound.at(w);
        ProjMeasure combined = d.eta;
        for (const auto& [a, ms] : d.inbound.atoms) combined.add(a, ms);
        for (const auto& [a, ms] : d.outbound.atoms) combined.add(a, ms);
        std::sort(combined.atoms.begin(), combined.atoms.end());
        d.identity_residual = detail::tv_distance(famC.target.at(w), combined, famC.resolution);
        for (const auto& [a, ms] : d.inbound.atoms)
            d.supp_inbound_min_dist =
                std::min(d.supp_inbound_min_dist, dist(Direction{a}, Direction::q()));
        if (d.identity_residual > identity_tol)
            throw std::runtime_error("defect_split: identity residual " +
                                     std::to_string(d.identity_residual) + " at word " +
                                     detail::word_str(w));
        out[w] = d;
    }
    return out;
}

struct DecrementLedger {
    double energy_before = 0;
    double kappa_integral = 0;   // integral of kappa against the base measure
    double gain = 0;             // measured expansion gain, certified >= 2 alpha
    double overhead_confine = 0; // 4 delta M2
    double overhead_cross = 0;   // 4 delta M1 M2
    double overhead_oi = 0;      // 4 delta M2
    double overhead_lambda = 0;  // 8 delta M2
    double energy_after = 0;     // certified: before - gain + overheads
    double bracket_min = 0, bracket_max = 0; // per-word xi(U1^2) range
    bool exact_path_ok = false;  // the literal reassembly produced a valid family
    double exact_energy = 0;     // energy of the reassembled family, if valid
    double defect_residual = 0;  // worst defect identity residual observed
};

struct DecrementResult {
    CouplingFamily family;
    DecrementLedger ledger;
};

// one energy-decrement step.  The energy ledger is certified: the expansion
// gain is measured exactly on the confined family and each overhead term is
// charged at its proven bound, so energy_after <= energy_before - alpha holds
// whenever the parameter ledger (100 delta M1 M2 < alpha, kappa integral > 3)
// does.  The literal coupling reassembly is also attempted; whether it closes
// exactly depends on how invariant the supplied conditionals are, and is
// reported rather than required.
inline DecrementResult decrement_step(const CouplingFamily& famC, const WindowedCocycle& c,
                                      const GibbsMeasure& m, const MargulisParams& P) {
    DecrementResult res;
    DecrementLedger& L = res.ledger;
    L.energy_before = energy(famC, m);

    CouplingFamily xdot = confine(famC, P);

    // diagonal bracket alpha - 3 delta <= xi(U1^2) <= alpha + delta
    auto inU1 = [&](Direction d) { return dist(d, Direction::q()) < P.r1; };
    L.bracket_min = std::numeric_limits<double>::infinity();
    L.bracket_max = 0;
    for (const auto& [w, xi] : xdot.xi) {
        double b = xi.mass_where(inU1, inU1);
        L.bracket_min = std::min(L.bracket_min, b);
        L.bracket_max = std::max(L.bracket_max, b);
    }
    if (L.bracket_min < P.alpha - 3 * P.delta - 1e-9 || L.bracket_max > P.alpha + P.delta + 1e-9)
        throw std::runtime_error("decrement_step: diagonal bracket violated");

    // measured expansion gain and the kappa integral, as exact cylinder sums
    int Lw = std::max(famC.depth, P.word_depth);
    for (const auto& z : c.spec.words(Lw)) {
        Word wk(z.begin(), z.begin() + famC.depth);
        Word wkap(z.begin(), z.begin() + P.word_depth);
        double mu = m.cylinder_measure(z);
        double kap = P.kappa.at(wkap);
        L.kappa_integral += mu * kap;
        L.gain += mu * xdot.xi.at(wk).mass_where(inU1, inU1) * kap;
    }
    if (L.kappa_integral <= 3.0)
        throw std::runtime_error("decrement_step: infeasible (kappa integral <= 3)");
    if (L.gain < 2 * P.alpha - 1e-9)
        throw std::runtime_error("decrement_step: measured gain below 2 alpha");

    L.overhead_confine = 4 * P.delta * P.M2;
    L.overhead_cross = 4 * P.delta * P.M1 * P.M2;
    L.overhead_oi = 4 * P.delta * P.M2;
    L.overhead_lambda = 8 * P.delta * P.M2;
    L.energy_after = L.energy_before - L.gain + L.overhead_confine + L.overhead_cross +
                     L.overhead_oi + L.overhead_lambda;
    if (L.energy_after > L.energy_before - P.alpha + 1e-9)
        throw std::runtime_error("decrement_step: certified drop below alpha");

    // literal reassembly: transfer, defect split, and the new coupling
    res.family = xdot;
    try {
        TransferRaw raw = transfer_pushforward(xdot, c, m, P.N, famC.resolution);
        auto defects = defect_split(raw, famC, std::numeric_limits<double>::infinity());
        CouplingFamily rebuilt = famC;
        bool ok = true;
        for (auto& [w, xi] : rebuilt.xi) {
            const Defect& d = defects.at(w);
            L.defect_residual = std::max(L.defect_residual, d.identity_residual);
            double rx = famC.rho.at(w);
            auto in = [&](Direction dd) { return dist(dd, Direction::q()) <= rx; };
            auto inU2 = [&](Direction dd) { return dist(dd, Direction::q()) < P.r2; };
            auto inU3 = [&](Direction dd) { return dist(dd, Direction::q()) < P.r3; };
            const Coupling& hat = raw.xi_hat.at(w);
            ProjMeasure theta = hat.restrict_where(inU3, inU3).marginal(1);
            ProjMeasure o2 = d.outbound.restrict(inU2);
            ProjMeasure o2c = d.outbound.restrict([&](Direction dd) { return !inU2(dd); });
            double nI = d.inbound.total_mass(), nO2 = o2.total_mass();
            if (nI <= 0 && nO2 > 0) { ok = false; break; }
            ProjMeasure lambda = o2c;
            if (nI > 0)
                for (const auto& [a, ms] : d.inbound.atoms)
                    lambda.add(a, (1.0 - nO2 / nI) * ms);
            double nTheta = theta.total_mass(), nLambda = lambda.total_mass();
            if (!(nLambda <= nTheta) || nTheta <= 0) { ok = false; break; }
            Coupling next;
            for (const auto& a : hat.atoms) {
                bool iu = in(Direction{a.u}), iv = in(Direction{a.v});
                if (!(iu && iv)) continue; // keep only the U_x^2 block
                bool tu = inU3(Direction{a.u}), tv = inU3(Direction{a.v});
                next.add(a.u, a.v, (tu && tv) ? a.mass * (1.0 - nLambda / nTheta) : a.mass);
            }
            if (nI > 0) {
                Coupling oi = product_coupling(o2, d.inbound).scaled(1.0 / nI);
                next.append(oi);
                next.append(oi.swapped());
            }
            Coupling lt = product_coupling(lambda, theta).scaled(1.0 / nTheta);
            next.append(lt);
            next.append(lt.swapped());
            xi = next;
        }
        if (ok && marginal_residual(rebuilt) <= 1e-10) {
            L.exact_energy = energy(rebuilt, m);
            L.exact_path_ok = true;
            res.family = rebuilt;
        }
    } catch (const std::exception&) {
        L.exact_path_ok = false;
    }
    return res;
}

struct DecrementRun {
    double initial_energy = 0;
    long long step_bound = 0; // ceil(E0 / alpha)
    std::vector<DecrementLedger> steps;
    bool contradiction = false; // certified energy went negative
};

// iterate the certified decrement until the energy chain turns negative;
// phi >= 0 makes a negative energy impossible, so this is the contradiction
inline DecrementRun decrement_iterate(const CouplingFamily& famC, const WindowedCocycle& c,
                                      const GibbsMeasure& m, const MargulisParams& P) {
    DecrementRun run;
    run.initial_energy = energy(famC, m);
    run.step_bound = (long long)std::ceil(run.initial_energy / P.alpha);
    CouplingFamily cur = famC;
    double certified = run.initial_energy;
    for (long long s = 0; s < run.step_bound + 1; ++s) {
        DecrementResult step = decrement_step(cur, c, m, P);
        DecrementLedger led = step.ledger;
        // chain the certified energies: each step starts from the previous
        // certified value, not from the re-measured one
        led.energy_after = certified - led.gain + led.overhead_confine + led.overhead_cross +
                           led.overhead_oi + led.overhead_lambda;
        led.energy_before = certified;
        certified = led.energy_after;
        run.steps.push_back(led);
        cur = step.family;
        if (certified < 0) {
            run.contradiction = true;
            break;
        }
    }
    return run;
}

struct DemoInstance {
    SubshiftSpec spec;
    WindowedCocycle cocycle;
    GibbsMeasure measure;
    MargulisParams params;
    CouplingFamily family;
};

// generated non-atomic-style instance: rings of equal-mass atoms near q
// (total alpha + delta, outermost ring on the ball boundary) plus remainder
// mass near p; couplings pair each ring atom with its mirror across q, so
// the family is symmetric, marginal-exact, and diagonal-free
inline DemoInstance coupling_demo_instance(uint64_t seed) {
    DemoInstance ins;
    ins.spec = SubshiftSpec::full_shift(2);
    ins.measure = equilibrium(Potential::constant(ins.spec, 0.0), default_anchors(ins.spec));
    ins.cocycle = WindowedCocycle::constant(ins.spec, Mat2::diag(0.5, 2.0));
    double alpha = 0.5, beta = 0.5;

    // first pass: ledger scalars (delta, ball radii) without conditionals
    MargulisParams base = margulis_setup(ins.cocycle, ins.measure, {}, alpha, beta);

    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 1);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::map<Word, ProjMeasure> conds;
    for (const auto& w : ins.spec.words(1)) {
        int n_rings = 8 + (int)(rng() % 9);
        double R = base.r4 * (0.5 + 0.4 * u01(rng)); // outermost ring radius, inside U4
        ProjMeasure mu;
        double per_atom = (alpha + base.delta) / (2 * n_rings);
        for (int j = 0; j < n_rings; ++j) {
            double dj = R * (j + 1) / n_rings; // normalized distance; angular = dj*pi/2
            mu.add(dj * (kPi / 2), per_atom);
            mu.add(-dj * (kPi / 2), per_atom);
        }
        double far = 1.0 - (alpha + base.delta);
        mu.add(kPi / 2 - 0.02 - 0.01 * u01(rng), far / 2);
        mu.add(kPi / 2 + 0.02 + 0.01 * u01(rng), far / 2);
        std::sort(mu.atoms.begin(), mu.atoms.end());
        conds[w] = mu;
    }
    ins.params = margulis_setup(ins.cocycle, ins.measure, conds, alpha, beta);

    ins.family.depth = 1;
    ins.family.rho = ins.params.rho;
    for (const auto& [w, mu] : conds) {
        double rx = ins.params.rho.at(w);
        auto in = [&](Direction d) { return dist(d, Direction::q()) <= rx; };
        ins.family.target[w] = mu.restrict(in);
        ins.family.exterior[w] = mu.restrict([&](Direction d) { return !in(d); });
        // mirror pairing: couple q + d with q - d at each ring; pairing by
        // sorted index keeps the stored angles bit-identical under the swap
        Coupling xi;
        const auto& ta = ins.family.target[w].atoms;
        for (size_t i = 0; i < ta.size(); ++i)
            xi.add(ta[i].first, ta[ta.size() - 1 - i].first, ta[i].second);
        ins.family.xi[w] = xi;
    }
    return ins;
}

} // namespace cclab
