#include <catch_amalgamated.hpp>

#include "gcm/arith/complex_ball.hpp"
#include "gcm/arith/rational.hpp"
#include "gcm/arith/real_ball.hpp"
#include "gcm/selftest.hpp"

using namespace gcm;
using Catch::Approx;

namespace {

const Precision P256(256);

RealBall iv(const char* lo, const char* hi) {
    return RealBall::from_endpoints(Rational::parse(lo), Rational::parse(hi), P256);
}

// Exact value of mpfr x as a rational.
mpq_class q_of(mpfr_srcptr x) {
    mpz_class m;
    const long e = mpfr_get_z_2exp(m.get_mpz_t(), x);
    mpq_class q(m);
    if (e >= 0)
        q *= mpq_class(mpz_class(1) << static_cast<unsigned>(e));
    else
        q /= mpq_class(mpz_class(1) << static_cast<unsigned>(-e));
    return q;
}

}  // namespace

TEST_CASE("Rational/parse") {
    CHECK(Rational::parse("1/3") == Rational(1, 3));
    CHECK(Rational::parse("-6/4") == Rational(-3, 2));
    CHECK(Rational::parse("0.002") == Rational(2, 1000));
    CHECK(Rational::parse("1.8") == Rational(9, 5));
    CHECK(Rational::parse("1e-4") == Rational(1, 10000));
    CHECK(Rational::parse("-2.5e1") == Rational(-25));
    CHECK(Rational::parse("7") == Rational(7));
    CHECK(Rational(6, -4).to_string() == "-3/2");
    CHECK(Rational(5).to_string() == "5/1");
    CHECK_THROWS_AS(Rational::parse("1/0"), InputError);
    CHECK_THROWS_AS(Rational::parse("abc"), InputError);
    CHECK_THROWS_AS(Rational::parse(""), InputError);
    CHECK_THROWS_AS(Rational::parse("0.1.2"), InputError);
}

TEST_CASE("Precision/bounds") {
    CHECK(Precision().bits() == 256);
    CHECK_THROWS_AS(Precision(52), InputError);
    CHECK(Precision(256).scaled(3, 2).bits() == 384);
}

TEST_CASE("RealBall/from_rational") {
    const RealBall third = RealBall::from_rational(Rational(1, 3), P256);
    CHECK(third.contains(Rational(1, 3)));
    // rad <= 2^(1-p) |mid|
    CHECK(third.rad() <= third.mag_upper().mul_2exp(1 - 256));

    const RealBall half = RealBall::from_rational(Rational(1, 2), Precision(64));
    CHECK(half.is_exact());
    CHECK(half.mid_double() == 0.5);

    const RealBall w = RealBall::from_rational(Rational::parse("2/1000"), P256);
    CHECK(w.contains(Rational(1, 500)));

    // multiplication by the denominator contains the numerator
    CHECK((third * 3L).contains(1L));
    CHECK((RealBall::from_rational(Rational(22, 7), P256) * 7L).contains(22L));
}

TEST_CASE("RealBall/ring") {
    const RealBall s = iv("1", "2") + iv("3", "4");
    CHECK(s.contains(Rational(4)));
    CHECK(s.contains(Rational(6)));
    CHECK(s.inside(mpq_class(399, 100), mpq_class(601, 100)));
    const RealBall d = iv("1", "2") - iv("3", "4");
    CHECK(d.contains(Rational(-3)));
    CHECK(d.contains(Rational(-1)));
    const RealBall p = iv("-1", "2") * iv("1", "2");
    CHECK(p.contains(Rational(-2)));
    CHECK(p.contains(Rational(4)));
    CHECK((-iv("1", "2")).contains(Rational(-2)));
}

TEST_CASE("RealBall/division") {
    const RealBall q = RealBall(1, P256) / RealBall(3, P256);
    CHECK(q.contains(Rational(1, 3)));
    CHECK_THROWS_AS(RealBall(1, P256) / iv("-1", "1"), DivisorContainsZero);
    CHECK_THROWS_AS(RealBall(1, P256) / RealBall(P256), DivisorContainsZero);
    const RealBall w = RealBall(1, P256) / iv("2", "4");
    CHECK(w.contains(Rational(1, 4)));
    CHECK(w.contains(Rational(1, 2)));
}

TEST_CASE("RealBall/elementary") {
    const RealBall e = exp(RealBall(1, P256));
    CHECK(e.rad_double() < 1e-70);
    CHECK(e.mid_double() == Approx(2.718281828459045));
    CHECK(log(e).contains(1L));
    CHECK(sqrt(RealBall(2, P256)).mid_double() == Approx(1.4142135623730951));
    CHECK(sqr(sqrt(RealBall(2, P256))).contains(2L));
    CHECK_THROWS_AS(log(iv("-1", "1")), NonPositiveLog);
    CHECK_THROWS_AS(log(RealBall(P256)), NonPositiveLog);
    CHECK_THROWS_AS(sqrt(RealBall(-1, P256)), DomainError);
    CHECK(pow_int(iv("-2", "1"), 2).contains(Rational(4)));
    CHECK(pow_int(iv("-2", "1"), 2).contains(Rational(0)));
}

TEST_CASE("RealBall/overflow saturates") {
    const RealBall big = exp(RealBall(1L << 40, Precision(64)));
    CHECK(!big.is_finite());
}

TEST_CASE("RealBall/precision refinement") {
    for (const int bits : {64, 128, 256}) {
        const Precision lo(bits);
        const Precision hi(2 * bits);
        auto f = [](Precision p) {
            const RealBall x = RealBall::from_rational(Rational(7, 3), p);
            return exp(sqr(x) / 5L) * log(x + RealBall(1, p)) - sqrt(x);
        };
        const RealBall a = f(lo);
        const RealBall b = f(hi);
        CHECK(a.overlaps(b));
        CHECK(b.rad() <= a.rad());
    }
}

TEST_CASE("RealBall/hex round trip") {
    RealBall x = RealBall::from_rational(Rational(1, 3), P256);
    x.add_error(Mag::from_double(1e-40));
    const RealBall y = RealBall::from_hex(x.mid_hex(), x.rad_hex(), P256);
    CHECK(mpfr_equal_p(x.mid(), y.mid()));
    CHECK(x.rad() == y.rad());
    CHECK_THROWS_AS(RealBall::from_hex("zz", "0x1p-3", P256), InputError);
}

TEST_CASE("RealBall/endpoint exactness") {
    const RealBall b = iv("1/3", "1/2");
    mpfr_t lo, hi;
    mpfr_inits2(300, lo, hi, static_cast<mpfr_ptr>(nullptr));
    b.lower(lo);
    b.upper(hi);
    CHECK(q_of(lo) <= mpq_class(1, 3));
    CHECK(q_of(hi) >= mpq_class(1, 2));
    mpfr_clears(lo, hi, static_cast<mpfr_ptr>(nullptr));
}

TEST_CASE("ComplexBall/arithmetic") {
    const ComplexBall i(RealBall(P256), RealBall(1, P256));
    const ComplexBall m1 = i * i;
    CHECK(m1.contains(mpq_class(-1), mpq_class(0)));
    const ComplexBall z(RealBall(3, P256), RealBall(4, P256));
    const ComplexBall w = inv(z);
    CHECK(w.contains(mpq_class(3, 25), mpq_class(-4, 25)));
    CHECK_THROWS_AS(inv(ComplexBall(iv("-1", "1"), iv("-1", "1"))), DivisorContainsZero);
}

TEST_CASE("ComplexBall/exp and log") {
    const ComplexBall z(RealBall(1, P256), RealBall(1, P256));
    const ComplexBall e = exp(z);
    CHECK(e.real().mid_double() == Approx(std::exp(1.0) * std::cos(1.0)));
    CHECK(e.imag().mid_double() == Approx(std::exp(1.0) * std::sin(1.0)));
    const ComplexBall l = log(e, true);
    CHECK(l.contains(mpq_class(1), mpq_class(1)));
}

TEST_CASE("ComplexBall/branch safety") {
    // Rectangle straddling the negative real axis.
    const ComplexBall bad(iv("-2", "-1"), iv("-1/10", "1/10"));
    CHECK_THROWS_AS(log(bad, true), BranchCutViolation);
    CHECK_THROWS_AS(sqrt(bad, true), BranchCutViolation);
    // Touching the origin.
    const ComplexBall origin(iv("0", "1"), iv("-1", "1"));
    CHECK_THROWS(log(origin, true));
    // Non-analytic request returns a hull with imaginary part in [-pi, pi].
    const ComplexBall h = log(bad, false);
    CHECK(h.imag().contains(RealBall::pi(P256)));
    CHECK(h.imag().contains(-RealBall::pi(P256)));

    // Whenever the analytic log succeeds, the input keeps away from (-inf, 0].
    selftest::BallSampler s{std::mt19937_64(7), 128};
    int succeeded = 0;
    for (int k = 0; k < 2000; ++k) {
        ComplexBall z(s.ball(-3, 3), s.ball(-3, 3));
        z = ComplexBall(z.real() + iv("-1/4", "1/4"), z.imag());
        try {
            (void)log(z, true);
            ++succeeded;
            CHECK(!z.meets_branch_cut());
        } catch (const NumericalError&) {
        }
    }
    CHECK(succeeded > 100);
}

TEST_CASE("RealBall/inclusion monotonicity") {
    const SelftestItem r = selftest::inclusion_monotonicity(10000, 10, 256, 11);
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("RealBall/inclusion monotonicity at 64 bits") {
    const SelftestItem r = selftest::inclusion_monotonicity(3000, 10, 64, 12);
    INFO(r.detail);
    CHECK(r.passed);
}
