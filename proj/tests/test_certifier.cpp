#include <catch_amalgamated.hpp>

#include "gcm/certifier.hpp"
#include "gcm/explorer.hpp"
#include "gcm/io/json_io.hpp"

using namespace gcm;

namespace {

const Precision P128(128);

// (-1)^m (m-1)! / (2 t^m)
Rational single_atom_value(int m, const Rational& t) {
    Rational v(1, 2);
    for (int k = 1; k < m; ++k) v = v * Rational(k);
    for (int k = 0; k < m; ++k) v = v / t;
    return m % 2 == 0 ? v : -v;
}

}  // namespace

TEST_CASE("Plan/construction") {
    const BlockPlan p = paper_plan();
    CHECK(p.blocks.size() == 22);
    CHECK(p.X == Rational(25));
    CHECK(p.blocks[18].a == Rational(9));
    CHECK(p.blocks[21].a == Rational(15));

    const BlockPlan u = uniform_plan(Rational(3), Rational(10), true);
    CHECK(u.blocks.size() == 4);
    CHECK(u.blocks.back().a == Rational(9));

    const BlockPlan f = full_line(u);
    CHECK(!f.half_line);
    CHECK(f.blocks.size() == 8);
    CHECK(f.blocks.front().a == Rational(-10));
    CHECK(f.blocks[3].b == Rational(0));

    CHECK_THROWS_AS(explicit_plan({Rational(0)}, true), InputError);
    CHECK_THROWS_AS(explicit_plan({Rational(0), Rational(2), Rational(1)}, true), InputError);
    CHECK_THROWS_AS(explicit_plan({Rational(1), Rational(2)}, true), InputError);
    CHECK_THROWS_AS(uniform_plan(Rational(0), Rational(5), true), InputError);
}

TEST_CASE("Certifier/verdict rule") {
    const RealBall pos = RealBall::from_endpoints(Rational(1), Rational(2), P128);
    const RealBall straddle = RealBall::from_endpoints(Rational(-1), Rational(2), P128);
    CHECK(decide(pos, true) == Verdict::certified_positive);
    CHECK(decide(-pos, true) == Verdict::certified_negative);
    CHECK(decide(straddle, true) == Verdict::indeterminate);
    CHECK(decide(pos, false) == Verdict::indeterminate);
    CHECK(exit_code(Verdict::certified_positive) == 0);
    CHECK(exit_code(Verdict::certified_negative) == 1);
    CHECK(exit_code(Verdict::indeterminate) == 2);
    for (const Verdict v : {Verdict::certified_positive, Verdict::certified_negative, Verdict::indeterminate})
        CHECK(verdict_from_string(to_string(v)) == v);
    CHECK_THROWS_AS(verdict_from_string("maybe"), InputError);
    CHECK(gcm_consistent(1, Verdict::certified_negative));
    CHECK(gcm_consistent(4, Verdict::certified_positive));
    CHECK(!gcm_consistent(5, Verdict::certified_positive));
}

TEST_CASE("Certifier/single atom closed forms") {
    const Rational t(1, 3);
    const BlockPlan plan = uniform_plan(Rational(1), Rational(15), true, 1e-20);
    for (int m = 1; m <= 5; ++m) {
        const Certificate c = certify(dirac_measure(), EvaluationContext(t, m, P128), plan, CertifyOptions{1});
        INFO("m = " << m << " total " << c.total.to_string());
        CHECK(c.total.contains(single_atom_value(m, t)));
        CHECK(c.total.rad_double() < 1e-6);
        CHECK(gcm_consistent(m, c.verdict));
    }
}

TEST_CASE("Certifier/single atom at another time") {
    const Rational t(2);
    const BlockPlan plan = uniform_plan(Rational(2), Rational(40), true, 1e-20);
    const Certificate c = certify(dirac_measure(), EvaluationContext(t, 3, P128), plan, CertifyOptions{1});
    CHECK(c.total.contains(single_atom_value(3, t)));
}

TEST_CASE("Certifier/asymmetric measure") {
    // A shifted atom has the same entropy derivatives as the centred one.
    const AtomicMeasure shifted = dirac_measure(Rational(3, 4));
    const BlockPlan half = uniform_plan(Rational(1), Rational(16), true, 1e-20);
    CHECK_THROWS_AS(certify(shifted, EvaluationContext(Rational(1, 2), 2, P128), half), AsymmetricMeasureWithHalfPlan);
    const Certificate c = certify(shifted, EvaluationContext(Rational(1, 2), 2, P128), full_line(half), CertifyOptions{1});
    CHECK(c.extra.size() == 1);
    CHECK(c.total.contains(single_atom_value(2, Rational(1, 2))));
}

TEST_CASE("Certifier/plan invariance") {
    const AtomicMeasure mu = AtomicMeasure::validate(
        {{Rational(-3, 2), Rational(1, 4)}, {Rational(0), Rational(1, 2)}, {Rational(3, 2), Rational(1, 4)}});
    const EvaluationContext ctx(Rational(1, 2), 3, P128);
    const Certificate a = certify(mu, ctx, uniform_plan(Rational(1), Rational(20), true, 1e-20), CertifyOptions{1});
    const Certificate b = certify(mu, ctx, explicit_plan({Rational(0), Rational(1, 3), Rational(5), Rational(20)}, true, 1e-20),
                                  CertifyOptions{1});
    const Certificate c = certify(mu, ctx, full_line(uniform_plan(Rational(2), Rational(20), true, 1e-20)), CertifyOptions{1});
    CHECK(a.total.overlaps(b.total));
    CHECK(a.total.overlaps(c.total));
    CHECK(a.verdict == b.verdict);
    CHECK(a.verdict == c.verdict);
    // float cross-check
    CHECK(a.total.mid_double() == Catch::Approx(derivative_fp(mu, 0.5, 3, 1e-10).value).epsilon(1e-6));
}

TEST_CASE("Certifier/starved budget is indeterminate") {
    const Certificate c = certify(dirac_measure(), EvaluationContext(Rational(1, 3), 5, P128),
                                  uniform_plan(Rational(15), Rational(15), true, 1e-25), CertifyOptions{1, 1});
    CHECK(!c.all_converged());
    CHECK(c.verdict == Verdict::indeterminate);
    CHECK(c.total.contains(single_atom_value(5, Rational(1, 3))));
}

TEST_CASE("Certifier/tail premise aborts") {
    CHECK_THROWS_AS(certify(paper_measure(), EvaluationContext(Rational(1, 3), 5, P128),
                            uniform_plan(Rational(1), Rational(9), true)),
                    PremiseFailure);
}

TEST_CASE("Certifier/thread count does not change the result") {
    const AtomicMeasure mu = AtomicMeasure::validate({{Rational(-1), Rational(1, 2)}, {Rational(1), Rational(1, 2)}});
    const EvaluationContext ctx(Rational(1, 2), 4, P128);
    const BlockPlan plan = uniform_plan(Rational(1), Rational(16), true, 1e-20);
    const Certificate one = certify(mu, ctx, plan, CertifyOptions{1});
    const Certificate four = certify(mu, ctx, plan, CertifyOptions{4});
    CHECK(certificate_to_json(one).dump() == certificate_to_json(four).dump());
}

TEST_CASE("Certifier/JSON round trip and recheck") {
    const AtomicMeasure mu = AtomicMeasure::validate({{Rational(-1), Rational(1, 2)}, {Rational(1), Rational(1, 2)}});
    const Certificate c = certify(mu, EvaluationContext(Rational(1, 2), 3, P128),
                                  uniform_plan(Rational(1), Rational(16), true, 1e-20), CertifyOptions{1});
    const json j = certificate_to_json(c);
    CHECK(j.at("verdict") == to_string(c.verdict));
    CHECK(j.at("tool_version") == kToolVersion);
    CHECK(j.at("blocks").size() == c.blocks.size());

    const CertificateRecord r = certificate_from_json(json::parse(j.dump()));
    CHECK(r.measure == mu);
    CHECK(r.t == Rational(1, 2));
    CHECK(r.plan.blocks.size() == c.plan.blocks.size());
    CHECK(record_is_consistent(r));

    const RecordRecheck rc = recheck_record(r, recheck_precision(r.precision_bits), 1);
    CHECK(rc.ok());
    CHECK(rc.recomputed.precision_bits == 192);

    // Tampering with a block is detected.
    json bad = j;
    bad["blocks"][0]["mid_hex"] = RealBall(1000, P128).mid_hex();
    CHECK(!record_is_consistent(certificate_from_json(bad)));
    json flipped = j;
    flipped["verdict"] = c.verdict == Verdict::certified_negative ? "certified_positive" : "certified_negative";
    CHECK(!record_is_consistent(certificate_from_json(flipped)));
    CHECK_THROWS_AS(certificate_from_json(json::parse("{\"t\": \"1/3\"}")), InputError);
}

TEST_CASE("Certifier/reverify at higher precision") {
    const Certificate c = certify(dirac_measure(), EvaluationContext(Rational(1, 3), 2, P128),
                                  uniform_plan(Rational(1), Rational(15), true, 1e-20), CertifyOptions{1});
    const Reverification r = reverify(c, recheck_precision(128), CertifyOptions{1});
    CHECK(r.ok());
}

TEST_CASE("Certifier/log-concavity threshold") {
    CHECK(logconcave_threshold(paper_measure()) == Rational(968, 25));
    CHECK(logconcave_threshold(dirac_measure()) == Rational(0));
    CHECK(logconcave_threshold(AtomicMeasure::validate({{Rational(-3), Rational(1, 2)}, {Rational(1), Rational(1, 2)}})) ==
          Rational(9, 2));
}

TEST_CASE("Certifier/published block midpoints") {
    const auto& mids = paper_table_mids();
    Rational sum(0);
    for (const char* s : mids) sum += Rational::parse(s);
    // The rounded rows add up to a value inside the published interval.
    CHECK(Rational::parse("0.36") < sum);
    CHECK(sum < Rational::parse("0.37"));
}
