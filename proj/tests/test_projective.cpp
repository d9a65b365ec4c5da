// Projective layer. Oracles: closed-form angle images, central finite
// differences for derivative norms, hand-computed metric values, and the
// closed-form N for the diag(1/2,2) benchmark.

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cocyclelab/projective.hpp"

using namespace cclab;

namespace {
Mat2 random_gl2(std::mt19937_64& rng, double spread = 1.0) {
    std::uniform_real_distribution<double> u(-spread, spread);
    for (;;) {
        Mat2 m{1 + u(rng), u(rng), u(rng), 1 + u(rng)};
        if (std::abs(m.det()) > 0.05) return m;
    }
}
} // namespace

TEST_CASE("projective action on explicit examples") {
    Direction v = Direction::of(0.3);
    CHECK(act(Mat2::identity(), v).angle == Catch::Approx(0.3));
    // rotation shifts the angle mod pi
    CHECK(act(Mat2::rotation(0.4), v).angle == Catch::Approx(0.7));
    CHECK(act(Mat2::rotation(kPi - 0.1), Direction::of(0.3)).angle ==
          Catch::Approx(0.2).margin(1e-12));
    // diag(2,1/2) on pi/4: (1,1) -> (2,1/2), angle atan(1/4)
    CHECK(act(Mat2::diag(2.0, 0.5), Direction::of(kPi / 4)).angle ==
          Catch::Approx(std::atan(0.25)));
    // composition law
    std::mt19937_64 rng(3);
    for (int it = 0; it < 300; ++it) {
        Mat2 m = random_gl2(rng, 2.0), n = random_gl2(rng, 2.0);
        Direction w = Direction::of(rng() % 1000 * kPi / 1000.0);
        CHECK(dist(act(m * n, w), act(m, act(n, w))) < 1e-12);
    }
}

TEST_CASE("normalized metric") {
    CHECK(dist(Direction::of(0.7), Direction::of(0.7)) == 0.0);
    CHECK(dist(Direction::q(), Direction::p()) == Catch::Approx(1.0));
    CHECK(dist(Direction::q(), Direction::of(kPi / 4)) == Catch::Approx(0.5));
    // wrap-around
    CHECK(dist(Direction::of(0.05), Direction::of(kPi - 0.05)) ==
          Catch::Approx(0.1 / (kPi / 2)));
    // triangle inequality on random triples
    std::mt19937_64 rng(7);
    for (int it = 0; it < 500; ++it) {
        Direction a = Direction::of(rng() % 10000 * kPi / 10000.0);
        Direction b = Direction::of(rng() % 10000 * kPi / 10000.0);
        Direction c = Direction::of(rng() % 10000 * kPi / 10000.0);
        CHECK(dist(a, c) <= dist(a, b) + dist(b, c) + 1e-12);
        CHECK(dist(a, b) == dist(b, a));
    }
}

TEST_CASE("log gain") {
    CHECK(log_gain(Mat2::identity(), Direction::of(1.1)) == Catch::Approx(0.0).margin(1e-15));
    CHECK(log_gain(Mat2::diag(0.5, 2.0), Direction::q()) == Catch::Approx(-std::log(2)));
    CHECK(log_gain(Mat2::diag(0.5, 2.0), Direction::p()) == Catch::Approx(std::log(2)));
    CHECK(log_gain(Mat2::diag(0.5, 2.0), Direction::of(kPi / 4)) ==
          Catch::Approx(0.5 * std::log((0.25 + 4.0) / 2.0)));
}

TEST_CASE("derivative norm: closed form vs finite differences") {
    CHECK(deriv_norm(Mat2::identity(), Direction::of(0.2)) == Catch::Approx(1.0));
    // diag(1/2,2) at q: |det|/||Aq||^2 = 1/(1/4) = 4
    CHECK(deriv_norm(Mat2::diag(0.5, 2.0), Direction::q()) == Catch::Approx(4.0));
    std::mt19937_64 rng(11);
    for (int it = 0; it < 200; ++it) {
        Mat2 m = random_gl2(rng, 2.0);
        Direction v = Direction::of(rng() % 10000 * kPi / 10000.0);
        double h = 1e-6;
        Direction vp = Direction::of(v.angle + h), vm = Direction::of(v.angle - h);
        // central difference in the normalized metric
        double num = dist(act(m, vp), act(m, vm)) / (2 * h / (kPi / 2));
        CHECK(deriv_norm(m, v) == Catch::Approx(num).margin(1e-5).epsilon(1e-5));
    }
    // chain rule
    for (int it = 0; it < 200; ++it) {
        Mat2 m = random_gl2(rng, 2.0), n = random_gl2(rng, 2.0);
        Direction v = Direction::of(rng() % 10000 * kPi / 10000.0);
        double lhs = deriv_norm(m * n, v);
        double rhs = deriv_norm(m, act(n, v)) * deriv_norm(n, v);
        CHECK(lhs == Catch::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("margulis phi") {
    CHECK(margulis_phi(Direction::q(), Direction::p()) == Catch::Approx(0.0).margin(1e-15));
    CHECK(margulis_phi(Direction::q(), Direction::of(kPi / 4)) == Catch::Approx(std::log(2)));
    CHECK(std::isinf(margulis_phi(Direction::of(0.4), Direction::of(0.4))));
}

TEST_CASE("projective measures: normalize, coalesce, kolmogorov") {
    ProjMeasure a;
    a.add(0.5, 0.25);
    a.add(0.5 + 1e-15, 0.25);
    a.add(2.0, 0.5);
    a.normalize(1e-12);
    REQUIRE(a.atoms.size() == 2);
    CHECK(a.atoms[0].second == Catch::Approx(0.5));
    CHECK(a.total_mass() == Catch::Approx(1.0));

    // wrap-around coalescing
    ProjMeasure b;
    b.add(1e-8, 0.5);
    b.add(kPi - 1e-8, 0.5);
    b.normalize(1e-6);
    REQUIRE(b.atoms.size() == 1);

    ProjMeasure u, v;
    u.add(0.3, 1.0);
    v.add(0.9, 1.0);
    u.normalize(0);
    v.normalize(0);
    CHECK(kolmogorov(u, v) == Catch::Approx(1.0));
    CHECK(kolmogorov(u, u) == 0.0);
    ProjMeasure w2;
    w2.add(0.3, 0.5);
    w2.add(0.9, 0.5);
    w2.normalize(0);
    CHECK(kolmogorov(u, w2) == Catch::Approx(0.5));
}

TEST_CASE("margulis_setup on the diag(1/2,2) benchmark") {
    auto spec = SubshiftSpec::full_shift(2);
    auto anchors = default_anchors(spec);
    auto m = equilibrium(Potential::constant(spec, 0.0), anchors);
    auto c = WindowedCocycle::constant(spec, Mat2::diag(0.5, 2.0));

    // first a run with no conditionals to extract the ledger scalars (delta
    // depends only on alpha, M1, M2)
    double alpha = 0.5;
    auto base = margulis_setup(c, m, {}, alpha, 1 - alpha);
    double delta = base.delta;
    REQUIRE(delta > 0);

    // closed form: N log 4 > 6 first at N = 5
    CHECK(base.N == 5);
    for (const auto& [w, k] : base.kappa)
        CHECK(k == Catch::Approx(2.5 * std::log(4.0)).epsilon(1e-12));
    CHECK(base.r0 == Catch::Approx(0.45));
    CHECK(base.r1 > base.r2);
    CHECK(base.r2 == Catch::Approx(base.r1 / 2));
    CHECK(base.r4 <= base.r3 / 2 + 1e-15);
    CHECK(100.0 * base.delta * base.M1 * base.M2 < alpha);
    CHECK(base.delta < 1 - alpha);

    // now the CDF-inversion example: ring at distance 0.1 with mass alpha+delta
    std::map<Word, ProjMeasure> conds;
    {
        ProjMeasure mx;
        int n_ring = 16;
        for (int j = 0; j < n_ring; ++j) {
            double r = 0.1 * (j + 1) / n_ring; // outermost exactly at 0.1
            mx.add(r * (kPi / 2), (alpha + delta) / n_ring);
        }
        mx.add(kPi / 2 - 0.01, 1.0 - (alpha + delta));
        mx.normalize(0);
        conds[{0}] = mx;
        conds[{1}] = mx;
    }
    auto P = margulis_setup(c, m, conds, alpha, 1 - alpha);
    CHECK(P.rho.at({0}) == Catch::Approx(0.1).epsilon(1e-9));
    CHECK(P.rho.at({1}) == Catch::Approx(0.1).epsilon(1e-9));

    // pair estimate on a grid of U1 pairs for every word: phi(Pu,Pv) <= phi - kappa
    Mat2 p5 = Mat2::diag(std::pow(0.5, 5), std::pow(2.0, 5));
    double kap = 2.5 * std::log(4.0);
    int G = 256;
    for (int i = 0; i <= G; ++i)
        for (int j = i + 1; j <= G; ++j) {
            Direction u = Direction::of((-P.r1 + 2 * P.r1 * i / G) * (kPi / 2));
            Direction v = Direction::of((-P.r1 + 2 * P.r1 * j / G) * (kPi / 2));
            if (dist(u, v) == 0) continue;
            double lhs = margulis_phi(act(p5, u), act(p5, v));
            double rhs = margulis_phi(u, v) - kap;
            CHECK(lhs <= rhs + 1e-9);
        }

    // identity cocycle: infeasible (integral never exceeds 6)
    auto idc = WindowedCocycle::constant(spec, Mat2::identity());
    CHECK_THROWS_WITH(margulis_setup(idc, m, {}, alpha, 1 - alpha),
                      Catch::Matchers::ContainsSubstring("never exceeds 6"));
}
