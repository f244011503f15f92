#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "gcm/explorer.hpp"
#include "gcm/tail.hpp"

using namespace gcm;

namespace {

const Precision P256(256);

EvaluationContext ctx_at(Rational t, int m = 5) { return EvaluationContext(std::move(t), m, P256); }

}  // namespace

TEST_CASE("Tail/premises on the built-in measure") {
    const auto ctx = ctx_at(Rational(1, 3));
    const TailEnvelope env = tail_constants(paper_measure(), ctx, Rational(25));
    const TailReport r = tail_bound(env, ctx);
    CHECK(r.all_verified());
    CHECK(r.premises.size() >= 6);
    CHECK(r.bound.mid_double() < 1e-20);
    CHECK(r.bound.mid_double() > 0);
    CHECK(env.c.mid_double() <= 1.13);
    CHECK(env.q_degree == 12);
    CHECK(env.A.size() == 6);
    CHECK(env.B.size() == 6);
    CHECK(env.delta + env.gamma == env.beta);
    // Upper bounds are exact points.
    for (const auto& a : env.A) CHECK(a.is_exact());
}

TEST_CASE("Tail/constant c") {
    // R >= 1: c = (X + R) / (2 sqrt t (1 + X)).
    const auto ctx = ctx_at(Rational(1, 4));
    const TailEnvelope env = tail_constants(paper_measure(), ctx, Rational(25));
    const double expected = (25 + 8.8) / (2 * 0.5 * 26);
    CHECK(env.c.mid_double() == Catch::Approx(expected).epsilon(1e-12));
    // R < 1: the supremum over x >= X is approached at infinity.
    const TailEnvelope d = tail_constants(dirac_measure(), ctx_at(Rational(1)), Rational(10));
    CHECK(d.c.mid_double() == Catch::Approx(0.5).epsilon(1e-12));
    // A_1 = h_2 c^2 / (4t) = 6 / 4 / 4
    CHECK(d.A[1].mid_double() == Catch::Approx(0.375).epsilon(1e-12));
}

TEST_CASE("Tail/B recursion") {
    CHECK(paper_b_from_a({1, 6, 56, 825, 15472, 350000}) == std::vector<long long>{6, 92, 2265, 76648, 3347024});
    // B_1 = A_1, B_2 = A_2 + B_1 A_1
    const auto B = l_envelope_from_k(std::vector<long long>{1, 2, 3}, 0LL);
    CHECK(B[1] == 2);
    CHECK(B[2] == 3 + 2 * 2);
}

TEST_CASE("Tail/stated constants") {
    for (const auto& c : paper_tail_checks(P256)) {
        INFO(c.name);
        CHECK(c.verified);
    }
}

TEST_CASE("Tail/premise failure below R + 1") {
    const auto ctx = ctx_at(Rational(1, 3));
    try {
        (void)tail_constants(paper_measure(), ctx, Rational(9));
        FAIL("expected PremiseFailure");
    } catch (const PremiseFailure& e) {
        CHECK(e.name() == "X > R + 1");
    }
}

TEST_CASE("Tail/absorption fails close to the support") {
    const auto ctx = ctx_at(Rational(1, 3));
    const TailEnvelope env = tail_constants(paper_measure(), ctx, Rational(10));
    CHECK_THROWS_AS(tail_bound(env, ctx), PremiseFailure);
}

TEST_CASE("Tail/monotone in X") {
    const auto ctx = ctx_at(Rational(1, 3));
    double prev = 1e300;
    for (const long X : {25L, 30L, 40L, 50L}) {
        const TailReport r = tail_bound(tail_constants(paper_measure(), ctx, Rational(X)), ctx);
        CHECK(r.bound.mid_double() < prev);
        prev = r.bound.mid_double();
    }
}

TEST_CASE("Tail/envelope dominates sampled values") {
    const AtomicMeasure mu = paper_measure();
    const auto ctx = ctx_at(Rational(1, 3));
    const TailEnvelope env = tail_constants(mu, ctx, Rational(25));
    const MixtureModel model(mu, ctx);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(25.0, 40.0);
    const double qc = env.QC.mid_double();
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng);
        const auto e = model.evaluate(RealBall::from_rational(Rational::parse(std::to_string(x)), P256));
        const double lp = std::log1p(x);
        for (int n = 1; n <= 5; ++n) {
            CHECK(std::abs(e.stack.K[n].mid_double()) <= env.A[n].mid_double() * std::exp(2 * n * lp));
            CHECK(std::abs(e.stack.L[n].mid_double()) <= env.B[n].mid_double() * std::exp(2 * n * lp));
        }
        CHECK(std::abs(e.stack.L[0].mid_double()) <= env.L0C.to_double() * std::exp(2 * lp));
        CHECK(std::abs(e.Q.mid_double()) <= qc * std::exp(12 * lp));
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("Tail/bound dominates a direct integral") {
    // At X = 30 for a single atom the envelope must exceed the float
    // integral of |G| over [X, X + 15].
    const auto ctx = ctx_at(Rational(1));
    const TailReport r = tail_bound(tail_constants(dirac_measure(), ctx, Rational(30)), ctx);
    REQUIRE(r.all_verified());
    const FloatMixture fm(dirac_measure(), 1.0, 5);
    const auto gk = detail::adaptive_gk([&](double x) { return std::abs(fm.integrand(x)); }, 30.0, 45.0, 1e-300, 12);
    CHECK(2 * gk.value <= r.bound.mid_double());
}

TEST_CASE("Tail/density tail") {
    const auto ctx = ctx_at(Rational(1, 3));
    const RealBall b = density_tail_bound(paper_measure(), ctx, Rational(25));
    CHECK(b.mid_double() > 0);
    CHECK(b.mid_double() < 1e-80);
    CHECK_THROWS_AS(density_tail_bound(paper_measure(), ctx, Rational(8)), PremiseFailure);
    // One atom at 0, t = 1/4: tail of N(0, 1/2) at X = 3 is erfc(3)/2 ~ 1.1e-5.
    const RealBall d = density_tail_bound(dirac_measure(), ctx_at(Rational(1, 4)), Rational(3));
    CHECK(d.mid_double() >= std::erfc(3.0) / 2);
}
