// Projective invariant families. Independent oracles:
//  - direct predecessor summation for one push of the invariance operator,
//  - closed-form eigen-directions of explicit hyperbolic matrices,
//  - Birkhoff sums of a one-step diagonal exponent,
//  - arc-mass transport bookkeeping for the convexity (mass balance) property.

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cocyclelab/ustate.hpp"

using namespace cclab;

namespace {

GibbsMeasure bernoulli_half() {
    auto spec = SubshiftSpec::full_shift(2);
    return equilibrium(Potential::constant(spec, 0.0), default_anchors(spec));
}

WindowedCocycle one_step_cocycle(const SubshiftSpec& spec, const std::vector<Mat2>& per_symbol) {
    std::map<Word, Mat2> t;
    for (int s = 0; s < spec.alphabet_size; ++s) t[{s}] = per_symbol[(size_t)s];
    return WindowedCocycle::make(spec, 0, 1, t);
}

// oracle for one application of the invariance operator: explicit predecessor
// sum, no coalescing, evaluated as arc masses so atom bookkeeping cancels
double oracle_pushed_arc_mass(const ConditionalFamily& fam, const WindowedCocycle& c,
                              const GibbsMeasure& m, const Word& x, double lo, double hi) {
    double s = 0;
    for (int a = 0; a < c.spec.alphabet_size; ++a) {
        if (!c.spec.allowed(a, x.front())) continue;
        Word y{a};
        y.insert(y.end(), x.begin(), x.end() - 1);
        Word edge{a};
        edge.insert(edge.end(), x.begin(), x.begin() + m.rc.k);
        auto path = m.rc.path(edge);
        double weight = 1.0 / m.jac_u(path[0], path[1]);
        Mat2 amat = c.eval_word(y);
        for (const auto& [ang, mass] : fam.conds.at(y).atoms) {
            double img = act(amat, Direction{ang}).angle;
            if (img >= lo && img < hi) s += weight * mass;
        }
    }
    return s;
}

} // namespace

TEST_CASE("push_invariance: fixed deltas, direct summation oracle, mass") {
    auto spec = SubshiftSpec::full_shift(2);
    auto m = bernoulli_half();
    auto diag = one_step_cocycle(spec, {Mat2::diag(2.0, 0.5), Mat2::diag(3.0, 1.0 / 3.0)});

    // deltas at the fixed axes are fixed points of one push
    for (Direction v : {Direction::q(), Direction::p()}) {
        auto fam = ConditionalFamily::delta(spec, 2, v);
        auto out = push_invariance(fam, diag, m);
        for (const auto& [w, mu] : out.conds) {
            REQUIRE(mu.atoms.size() == 1);
            CHECK(mu.atoms[0].first == v.angle);
            CHECK(std::abs(mu.total_mass() - 1.0) < 1e-12);
        }
    }

    // uniform 64-atom input, one push: arc masses match the direct sum oracle
    auto fam = ConditionalFamily::uniform(spec, 2, 64);
    auto out = push_invariance(fam, diag, m);
    for (const auto& [w, mu] : out.conds) {
        CHECK(std::abs(mu.total_mass() - 1.0) < 1e-12);
        for (double lo : {0.0, 0.3, 1.1}) {
            double hi = lo + 0.9;
            double have = 0;
            for (const auto& [ang, mass] : mu.atoms)
                if (ang >= lo && ang < hi) have += mass;
            // coalescing can move an atom across the cut by at most epsilon,
            // so compare with cuts padded away from atom positions
            double want = oracle_pushed_arc_mass(fam, diag, m, w, lo, hi);
            CHECK(std::abs(have - want) < 1e-9);
        }
    }
}

TEST_CASE("push_invariance: mass balance convexity with an indicator arc") {
    auto spec = SubshiftSpec::full_shift(2);
    auto m = bernoulli_half();
    // constant positive diagonal matrix: the projective map is monotone on
    // [0, pi/2) and maps that arc into itself
    auto c = WindowedCocycle::constant(spec, Mat2::diag(2.0, 0.5));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ConditionalFamily fam;
    fam.depth = 2;
    for (const auto& w : spec.words(2)) {
        ProjMeasure mu;
        for (int j = 0; j < 16; ++j) mu.add(u(rng) * kPi, u(rng) + 0.05);
        mu.normalize(0);
        mu.scaled(1.0); // no-op; masses already normalized by normalize(0)
        double tm = mu.total_mass();
        ProjMeasure nrm;
        for (const auto& [a, ms] : mu.atoms) nrm.add(a, ms / tm);
        fam.conds[w] = nrm;
    }

    double t = 1.2; // S = [0, t), image arc = [0, image of t)
    double timg = act(Mat2::diag(2.0, 0.5), Direction{t}).angle;
    double gamma = 1.0;
    for (const auto& [w, mu] : fam.conds) gamma = std::min(gamma, mu.ball_mass(Direction{t / 2}, (t / 2) / (kPi / 2)));
    auto out = push_invariance(fam, c, m);
    for (const auto& [w, mu] : out.conds) {
        double got = 0;
        for (const auto& [a, ms] : mu.atoms)
            if (a < timg) got += ms;
        CHECK(got >= gamma - 1e-9);
    }
}

TEST_CASE("solve_u_state: contraction to delta, rotation plateau, identity fixed") {
    auto spec = SubshiftSpec::full_shift(2);
    auto m = bernoulli_half();

    // constant diag(1/2,2): p attracts, family collapses to a delta at p
    auto c = WindowedCocycle::constant(spec, Mat2::diag(0.5, 2.0));
    auto r = solve_u_state(c, m, 1, kPi / 2 * 0x1p-12, 200, 1e-10, 64);
    CHECK(r.converged);
    CHECK(r.residual < 1e-8);
    for (const auto& [w, mu] : r.family.conds) {
        REQUIRE(!mu.atoms.empty());
        double mbig = 0, abig = 0;
        for (const auto& [a, ms] : mu.atoms)
            if (ms > mbig) mbig = ms, abig = a;
        CHECK(mbig > 1.0 - 1e-8);
        CHECK(dist(Direction{abig}, Direction::p()) < 1e-6);
    }

    // constant rotation by an irrational multiple of pi: near-uniform plateau
    auto rot = WindowedCocycle::constant(spec, Mat2::rotation(1.0));
    auto rr = solve_u_state(rot, m, 1, kPi / 2 * 0x1p-12, 200, 1e-10, 64);
    for (const auto& [w, mu] : rr.family.conds) {
        CHECK(std::abs(mu.total_mass() - 1.0) < 1e-9);
        for (const auto& [a, ms] : mu.atoms) CHECK(ms <= 2.0 / 64 + 1e-12);
    }

    // identity cocycle: the uniform initial family is already fixed
    auto id = WindowedCocycle::constant(spec, Mat2::identity());
    auto ri = solve_u_state(id, m, 1, kPi / 2 * 0x1p-12, 50, 1e-10, 64);
    CHECK(ri.converged);
    CHECK(ri.iterations == 1);
    CHECK(ri.residual == 0.0);
}

TEST_CASE("lyap_from_family: deltas, rotation, diagonal Birkhoff sums") {
    auto spec = SubshiftSpec::full_shift(2);
    auto m = bernoulli_half();

    // constant diag(2,1/2) with the delta family at the expanding axis q
    auto c = WindowedCocycle::constant(spec, Mat2::diag(2.0, 0.5));
    auto fam = ConditionalFamily::delta(spec, 1, Direction::q());
    CHECK(std::abs(lyap_from_family(fam, c, m) - std::log(2.0)) < 1e-14);

    // constant rotation with the solved family: integral vanishes
    auto rot = WindowedCocycle::constant(spec, Mat2::rotation(1.0));
    auto rr = solve_u_state(rot, m, 1, kPi / 2 * 0x1p-12, 200, 1e-10, 64);
    CHECK(std::abs(lyap_from_family(rr.family, rot, m)) < 1e-6);

    // diagonal one-step cocycle diag(e^{a(x0)}, e^{-a(x0)}) over Bernoulli(p):
    // exponent is the Birkhoff average sum pi_i a_i, delta family at q
    std::vector<double> a = {0.8, -0.25};
    auto mb = equilibrium(Potential::one_step(spec, {std::log(0.3), std::log(0.7)}),
                          default_anchors(spec));
    auto cd = one_step_cocycle(spec, {Mat2::diag(std::exp(a[0]), std::exp(-a[0])),
                                      Mat2::diag(std::exp(a[1]), std::exp(-a[1]))});
    double want = 0;
    for (int i = 0; i < 2; ++i) want += mb.pi[(size_t)i] * a[(size_t)i];
    auto famq = ConditionalFamily::delta(spec, 1, Direction::q());
    CHECK(std::abs(lyap_from_family(famq, cd, mb) - want) < 1e-13);
}

TEST_CASE("oseledets_dirs: exact axes, eigenvectors of hyperbolic matrices, decay") {
    auto spec = SubshiftSpec::full_shift(2);
    PointRep x = periodic_point({0});
    (void)spec;

    // constant diag(2,1/2): axes recovered to machine precision
    auto c = WindowedCocycle::constant(spec, Mat2::diag(2.0, 0.5));
    auto r = oseledets_dirs(c, x, 120);
    CHECK(dist(r.e_u, Direction::q()) < 1e-14);
    CHECK(dist(r.e_s, Direction::p()) < 1e-14);
    CHECK(r.residual_u < 1e-14);
    CHECK(r.residual_s < 1e-14);

    // constant hyperbolic non-diagonal M: eigen-directions of M
    Mat2 M{2.0, 1.0, 1.0, 1.0};
    double s5 = std::sqrt(5.0);
    Direction vu = Direction::of(std::atan2((s5 - 1.0) / 2.0, 1.0));
    Direction vs = Direction::of(std::atan2(-(s5 + 1.0) / 2.0, 1.0));
    auto ch = WindowedCocycle::constant(spec, M);
    auto rh = oseledets_dirs(ch, x, 50);
    CHECK(dist(rh.e_u, vu) < 1e-8);
    CHECK(dist(rh.e_s, vs) < 1e-8);

    // equivariance residual decays at the power-method rate (ratio of the
    // eigenvalues squared per step); check five steps lose at least a factor 100
    double r10 = oseledets_dirs(ch, x, 10).residual_u;
    double r15 = oseledets_dirs(ch, x, 15).residual_u;
    CHECK(r15 < r10 / 100.0);
}

TEST_CASE("atom_spectrum: deltas, two-atom split, degenerate plateau") {
    auto spec = SubshiftSpec::full_shift(2);
    auto c = WindowedCocycle::constant(spec, Mat2::diag(2.0, 0.5));

    auto famp = ConditionalFamily::delta(spec, 1, Direction::p());
    auto sp = atom_spectrum(famp, c, kPi / 2 * 0x1p-12);
    CHECK(sp.gamma0 == 1.0);
    CHECK(sp.card_min == 1);
    CHECK(sp.card_max == 1);
    CHECK(sp.equivariance_residual == 0.0);

    ConditionalFamily fam2;
    fam2.depth = 1;
    for (const auto& w : spec.words(1)) {
        ProjMeasure mu;
        mu.add(Direction::q().angle, 0.5);
        mu.add(Direction::p().angle, 0.5);
        fam2.conds[w] = mu;
    }
    auto s2 = atom_spectrum(fam2, c, kPi / 2 * 0x1p-12);
    CHECK(s2.gamma0 == 0.5);
    CHECK(s2.card_min == 2);
    CHECK(s2.card_max == 2);
    CHECK(s2.equivariance_residual < 1e-12);

    // degenerate plateau: 64 uniform atoms under the identity cocycle
    auto id = WindowedCocycle::constant(spec, Mat2::identity());
    auto famu = ConditionalFamily::uniform(spec, 1, 64);
    auto su = atom_spectrum(famu, id, kPi / 2 * 0x1p-12);
    CHECK(std::abs(su.gamma0 - 1.0 / 64) < 1e-15);
    CHECK(su.card_min == 64);
    CHECK(su.card_max == 64);
    CHECK(su.equivariance_residual < 1e-12);
}

TEST_CASE("su_check: trivial s-side, rotation u-side, fixed-axis u-side") {
    auto spec = SubshiftSpec::full_shift(2);
    auto m = bernoulli_half();

    // future-only cocycle: s-side residual is exactly zero
    auto diag = one_step_cocycle(spec, {Mat2::diag(2.0, 0.5), Mat2::diag(1.5, 1.0 / 1.5)});
    auto famq = ConditionalFamily::delta(spec, 1, Direction::q());
    auto rep = su_check(famq, diag, m, 200, 7);
    CHECK(rep.s_residual == 0.0);
    CHECK(rep.u_residual == 0.0); // q fixed by every holonomy of a diagonal cocycle

    // constant rotation (zero exponents): solved family passes at 64-atom resolution
    auto rot = WindowedCocycle::constant(spec, Mat2::rotation(1.0));
    auto rr = solve_u_state(rot, m, 1, kPi / 2 * 0x1p-12, 200, 1e-10, 64);
    auto rrot = su_check(rr.family, rot, m, 200, 7);
    CHECK(rrot.s_residual <= 1e-3);
    CHECK(rrot.u_residual <= 1e-3);

    // constant diag(2,1/2), family = delta at p: p fixed by all holonomies
    auto cd = WindowedCocycle::constant(spec, Mat2::diag(2.0, 0.5));
    auto famp = ConditionalFamily::delta(spec, 1, Direction::p());
    auto rd = su_check(famp, cd, m, 200, 7);
    CHECK(rd.s_residual == 0.0);
    CHECK(rd.u_residual == 0.0);
}
