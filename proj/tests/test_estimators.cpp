// Exponent estimators. Independent oracles:
//  - hand products of per-symbol matrices along explicit words,
//  - stationarity / row-sum checks for the reversed Markov chain,
//  - Birkhoff means over enumerated periodic words,
//  - closed-form exponents of constant matrices.

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cocyclelab/estimators.hpp"

using namespace cclab;

namespace {

GibbsMeasure bernoulli(double p0) {
    auto spec = SubshiftSpec::full_shift(2);
    return equilibrium(Potential::one_step(spec, {std::log(p0), std::log(1.0 - p0)}),
                       default_anchors(spec));
}

WindowedCocycle one_step_cocycle(const SubshiftSpec& spec, const std::vector<Mat2>& per_symbol) {
    std::map<Word, Mat2> t;
    for (int s = 0; s < spec.alphabet_size; ++s) t[{s}] = per_symbol[(size_t)s];
    return WindowedCocycle::make(spec, 0, 1, t);
}

} // namespace

TEST_CASE("det_integral: closed forms") {
    auto spec = SubshiftSpec::full_shift(2);
    auto m = bernoulli(0.3);

    // unimodular matrices integrate to zero
    auto sl = one_step_cocycle(spec, {Mat2::diag(2.0, 0.5), Mat2::rotation(0.7)});
    CHECK(std::abs(det_integral(sl, m)) < 1e-15);

    // scaled rotations: log|det| = 2 log c per symbol, integral = 2 sum pi_i log c_i
    double c0 = 1.7, c1 = 0.4;
    auto sc = one_step_cocycle(
        spec, {Mat2::rotation(0.3).scaled(c0), Mat2::rotation(1.1).scaled(c1)});
    double want = 2.0 * (m.pi[0] * std::log(c0) + m.pi[1] * std::log(c1));
    CHECK(std::abs(det_integral(sc, m) - want) < 1e-14);
}

TEST_CASE("reverse_cocycle: products along reversed words invert forward products") {
    auto gm = SubshiftSpec::golden_mean();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.4, 0.4);

    for (long long w_hi : {1LL, 2LL}) {
        std::map<Word, Mat2> t;
        for (const auto& w : gm.words((int)w_hi))
            t[w] = Mat2{1.0 + u(rng), u(rng), u(rng), 1.0 + u(rng)};
        auto c = WindowedCocycle::make(gm, 0, w_hi, t);
        auto b = reverse_cocycle(c);

        // reversed transition matrix is the transpose
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) CHECK(b.spec.allowed(i, j) == gm.allowed(j, i));

        // for words long enough to support n forward steps, the product of B
        // along the reversed word equals the inverse of the forward product
        int n = 5;
        for (const auto& w : gm.words(n + (int)w_hi - 1)) {
            Mat2 fwd = iterate_word(c, w, n);
            Word r(w.rbegin(), w.rend());
            Mat2 bwd = iterate_word(b, r, n);
            CHECK(mat_dist(bwd, fwd.inverse()) < 1e-10);
        }
    }
}

TEST_CASE("reverse_measure: stationary reversed chain and cylinder identities") {
    auto gm = SubshiftSpec::golden_mean();
    std::map<Word, double> t;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (const auto& w : gm.words(2)) t[w] = u(rng);
    auto m = equilibrium(Potential::make(gm, 0, 2, t), default_anchors(gm));
    auto r = reverse_measure(m);

    int M = r.m();
    REQUIRE(M == m.m());
    // rows of p' are stochastic on admissible edges; pi' is stationary
    for (int i = 0; i < M; ++i) {
        double row = 0;
        for (int j = 0; j < M; ++j) row += r.p[(size_t)i][(size_t)j];
        CHECK(std::abs(row - 1.0) < 1e-12);
    }
    for (int j = 0; j < M; ++j) {
        double acc = 0;
        for (int i = 0; i < M; ++i) acc += r.pi[(size_t)i] * r.p[(size_t)i][(size_t)j];
        CHECK(std::abs(acc - r.pi[(size_t)j]) < 1e-12);
    }
    // cylinder measure of a reversed word equals the forward measure of the word
    for (int len = 2; len <= 6; ++len)
        for (const auto& w : gm.words(len)) {
            Word rw(w.rbegin(), w.rend());
            CHECK(std::abs(r.cylinder_measure(rw) - m.cylinder_measure(w)) < 1e-12);
        }
}

TEST_CASE("lyap_ustate: constant diagonal, determinant sum rule") {
    auto spec = SubshiftSpec::full_shift(2);
    auto m = bernoulli(0.5);
    auto c = WindowedCocycle::constant(spec, Mat2::diag(2.0, 0.5));
    auto r = lyap_ustate(c, m, 2);
    CHECK(r.converged);
    CHECK(std::abs(r.lambda_plus - std::log(2.0)) < 1e-8);
    CHECK(std::abs(r.lambda_minus + std::log(2.0)) < 1e-8);
    CHECK(std::abs(r.lambda_plus + r.lambda_minus - det_integral(c, m)) < 1e-6);

    // one-step diagonal cocycle with non-unit determinants over Bernoulli(0.3)
    auto mb = bernoulli(0.3);
    auto cd = one_step_cocycle(spec, {Mat2::diag(3.0, 0.7), Mat2::diag(1.4, 0.2)});
    auto rd = lyap_ustate(cd, mb, 2);
    double want_plus = mb.pi[0] * std::log(3.0) + mb.pi[1] * std::log(1.4);
    double want_minus = mb.pi[0] * std::log(0.7) + mb.pi[1] * std::log(0.2);
    CHECK(rd.converged);
    CHECK(std::abs(rd.lambda_plus - want_plus) < 1e-8);
    CHECK(std::abs(rd.lambda_minus - want_minus) < 1e-8);
    CHECK(std::abs(rd.lambda_plus + rd.lambda_minus - det_integral(cd, mb)) < 1e-6);

    // constant rotation: both exponents vanish
    auto rot = WindowedCocycle::constant(spec, Mat2::rotation(1.0));
    auto rr = lyap_ustate(rot, m, 1);
    CHECK(std::abs(rr.lambda_plus) < 1e-6);
    CHECK(std::abs(rr.lambda_minus) < 1e-6);
}

TEST_CASE("lyap_kingman: constant closed form, determinism, u-state agreement") {
    auto spec = SubshiftSpec::full_shift(2);
    auto m = bernoulli(0.5);
    auto c = WindowedCocycle::constant(spec, Mat2::diag(2.0, 0.5));

    auto k = lyap_kingman(c, m, 10000, 100, 42);
    // constant diagonal: every sample is exactly log 2, zero spread
    CHECK(std::abs(k.lambda_plus - std::log(2.0)) < 1e-12);
    CHECK(std::abs(k.lambda_minus + std::log(2.0)) < 1e-12);
    CHECK(k.stderr_plus < 1e-12);

    auto k2 = lyap_kingman(c, m, 10000, 100, 42);
    CHECK(k2.lambda_plus == k.lambda_plus); // bit-reproducible per seed

    // non-degenerate example: agreement with the u-state route within three
    // combined standard errors
    auto mb = bernoulli(0.3);
    auto cr = one_step_cocycle(spec, {Mat2::diag(2.0, 0.5) * Mat2::rotation(0.2),
                                      Mat2::rotation(0.9) * Mat2::diag(1.5, 0.6)});
    auto ku = lyap_ustate(cr, mb, 6);
    auto kk = lyap_kingman(cr, mb, 4000, 60, 7);
    CHECK(std::abs(ku.lambda_plus - kk.lambda_plus) <= 3.0 * kk.stderr_plus + 1e-4);
    CHECK(std::abs(ku.lambda_minus - kk.lambda_minus) <= 3.0 * kk.stderr_minus + 1e-4);
    // two-dimensional sum rule on the sampled route (exact per sample)
    CHECK(std::abs(kk.lambda_plus + kk.lambda_minus - det_integral(cr, mb)) <=
          3.0 * (kk.stderr_plus + kk.stderr_minus) + 1e-6);
}

TEST_CASE("lyap_periodic: constant, rotation, and enumerated Birkhoff oracle") {
    auto spec = SubshiftSpec::full_shift(2);

    auto c = WindowedCocycle::constant(spec, Mat2::diag(2.0, 0.5));
    auto r = lyap_periodic(c, 6);
    CHECK(std::abs(r.lambda_plus - std::log(2.0)) < 1e-12);
    CHECK(r.best_period == 1);

    auto rot = WindowedCocycle::constant(spec, Mat2::rotation(0.9));
    CHECK(std::abs(lyap_periodic(rot, 5).lambda_plus) < 1e-12);

    // one-step diagonal cocycle: periodic exponent equals the best Birkhoff
    // mean of a over periodic words, enumerated directly
    std::vector<double> a = {0.9, -0.4};
    auto cd = one_step_cocycle(spec, {Mat2::diag(std::exp(a[0]), std::exp(-a[0])),
                                      Mat2::diag(std::exp(a[1]), std::exp(-a[1]))});
    double want = -1e300;
    for (int p = 1; p <= 5; ++p)
        for (const auto& x : periodic_points(spec, p)) {
            double s = 0;
            for (int j = 0; j < p; ++j) s += a[(size_t)x.at(j)];
            want = std::max(want, std::abs(s) / p);
        }
    CHECK(std::abs(lyap_periodic(cd, 5).lambda_plus - want) < 1e-12);

    // golden-mean shift: the all-zero fixed point is the only period-1 orbit
    auto gm = SubshiftSpec::golden_mean();
    auto cg = one_step_cocycle(gm, {Mat2::diag(std::exp(0.2), std::exp(-0.2)),
                                    Mat2::diag(std::exp(2.0), std::exp(-2.0))});
    auto rg = lyap_periodic(cg, 1);
    CHECK(std::abs(rg.lambda_plus - 0.2) < 1e-12);
    // allowing period 2 picks up the (01) orbit with mean 1.1
    auto rg2 = lyap_periodic(cg, 2);
    CHECK(std::abs(rg2.lambda_plus - 1.1) < 1e-12);
    CHECK(rg2.best_period == 2);
}
