#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gcm/arith/real_ball.hpp"
#include "gcm/hermite.hpp"
#include "gcm/measure.hpp"
#include "gcm/mixture.hpp"

namespace gcm {

/// An inequality the tail argument depends on could not be verified.
class PremiseFailure : public std::runtime_error {
public:
    explicit PremiseFailure(const std::string& name) : std::runtime_error("tail premise failed: " + name), name_(name) {}
    [[nodiscard]] const std::string& name() const { return name_; }

private:
    std::string name_;
};

struct PremiseCheck {
    std::string name;
    bool verified = false;
};

/// Constants of the polynomial-times-Gaussian envelope of the integrand on
/// [X, inf). Every stored coefficient is an exact upper bound (radius 0).
///
///   |x - a_i| / (2 sqrt t) <= c (1 + x)
///   |K_n| <= A_n (1 + x)^(2n),  |L_n| <= B_n (1 + x)^(2n),  |log g| <= L0C (1 + x)^2
///   |Q| <= QC (1 + x)^(2m + 2)
///   g <= prefactor exp(-beta (x - R)^2)
struct TailEnvelope {
    Rational X;
    Rational R;
    int m = 0;
    RealBall c;
    std::vector<RealBall> A;  // A_0 .. A_m
    std::vector<RealBall> B;  // B_0 (unused, zero) .. B_m
    Rational L0C;
    RealBall QC;
    int q_degree = 0;
    Rational beta;   // 1 / (4t)
    Rational delta;  // share of beta spent absorbing the polynomial
    Rational gamma;  // beta - delta
    RealBall prefactor;  // (4 pi t)^(-1/2)
    std::vector<PremiseCheck> premises;
};

struct TailReport {
    TailEnvelope envelope;
    RealBall bound;  // upper bound for |2 int_X^inf G|, as an exact ball
    std::vector<PremiseCheck> premises;

    [[nodiscard]] bool all_verified() const {
        for (const auto& p : premises)
            if (!p.verified) return false;
        return true;
    }
};

namespace detail {

/// Exact ball holding the upper endpoint of b.
inline RealBall upper_point(const RealBall& b) {
    mpfr_t u;
    mpfr_init2(u, b.precision().bits() + 64);
    b.upper(u);
    RealBall r(b.precision());
    // Round the endpoint up again into the working precision.
    mpfr_t v;
    mpfr_init2(v, b.precision().bits());
    mpfr_set(v, u, MPFR_RNDU);
    r = RealBall::from_mpfr(v, b.precision());
    mpfr_clears(u, v, static_cast<mpfr_ptr>(nullptr));
    return r;
}

inline void require(std::vector<PremiseCheck>& log, const std::string& name, bool ok) {
    log.push_back({name, ok});
    if (!ok) throw PremiseFailure(name);
}

}  // namespace detail

/// B_n = A_n + sum_{r=1}^{n-1} C(n-1, r-1) B_r A_{n-r}, n = 1..size-1, with
/// B_0 = 0. Works for exact integers and for upper-bound balls alike.
template <class T>
std::vector<T> l_envelope_from_k(const std::vector<T>& A, const T& zero) {
    std::vector<T> B(A.size(), zero);
    for (std::size_t n = 1; n < A.size(); ++n) {
        T s = A[n];
        for (std::size_t r = 1; r < n; ++r) s = s + B[r] * A[n - r] * binomial(static_cast<int>(n) - 1, static_cast<int>(r) - 1);
        B[n] = s;
    }
    return B;
}

/// Builds the envelope constants for the right tail [X, inf).
inline TailEnvelope tail_constants(const AtomicMeasure& mu, const EvaluationContext& ctx, const Rational& X) {
    const Precision p = ctx.prec;
    const int m = ctx.m;
    TailEnvelope env;
    env.X = X;
    env.R = mu.support_radius();
    env.m = m;
    env.beta = Rational(1) / (Rational(4) * ctx.t);
    env.delta = env.beta * Rational(1, 3);
    env.gamma = env.beta - env.delta;
    auto& checks = env.premises;

    detail::require(checks, "X > R + 1", X > env.R + Rational(1));

    const RealBall t = RealBall::from_rational(ctx.t, p);
    const RealBall Xb = RealBall::from_rational(X, p);
    const RealBall one(1, p);
    env.prefactor = one / sqrt(RealBall::pi(p) * t * 4L);

    // sup_{x >= X} (x + R) / (1 + x) is attained at x = X when R >= 1 and as
    // x -> inf (value 1) otherwise.
    const Rational lead = std::max(env.R, Rational(1));
    env.c = detail::upper_point(RealBall::from_rational(X + lead, p) / (sqrt(t) * 2L * (Xb + one)));
    detail::require(checks, "c (1 + X) >= 1", !((env.c * (Xb + one)) - one).is_negative());

    // |H_2n(u)| <= h_2n max(1, |u|)^(2n) <= h_2n (c (1 + x))^(2n).
    env.A.push_back(RealBall(1, p));
    const RealBall inv_4t = RealBall::from_rational(env.beta, p);
    for (int n = 1; n <= m; ++n) {
        const RealBall h(static_cast<long>(hermite_abs_coefficient_sum(2 * n)), p);
        env.A.push_back(detail::upper_point(h * pow_int(env.c, 2U * n) * pow_int(inv_4t, n)));
    }
    env.B = l_envelope_from_k(env.A, RealBall(p));
    for (auto& b : env.B) b = detail::upper_point(b);

    // g < 1 on [X, inf): the Gaussian envelope is decreasing past R.
    const RealBall XmR = RealBall::from_rational(X - env.R, p);
    const RealBall g_env_X = env.prefactor * exp(-(sqr(XmR) * inv_4t));
    detail::require(checks, "g < 1 on [X, inf)", (one - g_env_X).is_positive());

    // -log g <= C0 + beta (x - a_max)^2 with C0 = log(w_max^-1 (4 pi t)^(1/2)),
    // from the rightmost atom alone. L0C is the smallest half-integer with
    // L0C (1 + x)^2 >= C0 + beta (x - a_max)^2 on [X, inf), verified through
    // L0C >= beta (convexity), D(X) > 0 and D'(X) >= 0.
    const Atom& right = mu.rightmost();
    const RealBall C0 = log(one / (RealBall::from_rational(right.weight, p) * env.prefactor));
    const RealBall Xma = RealBall::from_rational(X - right.location, p);
    bool found = false;
    for (long k = 1; k <= 4096 && !found; ++k) {
        const Rational cand(k, 2);
        if (cand < env.beta) continue;
        const RealBall Lc = RealBall::from_rational(cand, p);
        const RealBall D = Lc * sqr(Xb + one) - inv_4t * sqr(Xma) - C0;
        const RealBall Dp = (Lc * (Xb + one) - inv_4t * Xma) * 2L;
        if (D.is_positive() && !Dp.is_negative() && !Dp.contains_zero()) {
            env.L0C = cand;
            found = true;
        }
    }
    detail::require(checks, "|log g| <= L0C (1 + x)^2", found);

    // |Q| <= sum_{r<m} C(m,r) A_r B_{m-r} (1+x)^(2m) + A_m L0C (1+x)^(2m+2).
    RealBall qc(p);
    for (int r = 0; r < m; ++r) qc += env.A[r] * env.B[m - r] * binomial(m, r);
    qc += env.A[m] * RealBall::from_rational(env.L0C, p);
    env.QC = detail::upper_point(qc);
    env.q_degree = 2 * m + 2;
    return env;
}

/// Upper bound for |2 int_X^inf G| from the envelope:
///   |G| <= QC (1+x)^deg prefactor exp(-beta (x-R)^2)
///       <= QC prefactor exp(-gamma (x-R)^2)          (absorption, delta = beta/3)
///   int_X^inf exp(-gamma (x-R)^2) <= exp(-gamma (X-R)^2) / (2 gamma (X-R)).
inline TailReport tail_bound(const TailEnvelope& env, const EvaluationContext& ctx) {
    const Precision p = ctx.prec;
    TailReport report;
    report.envelope = env;
    report.premises = env.premises;
    auto& checks = report.premises;

    const RealBall one(1, p);
    const RealBall Xb = RealBall::from_rational(env.X, p);
    const RealBall XmR = RealBall::from_rational(env.X - env.R, p);
    const RealBall delta = RealBall::from_rational(env.delta, p);
    const RealBall gamma = RealBall::from_rational(env.gamma, p);
    const long deg = env.q_degree;

    // phi(x) = delta (x-R)^2 - deg log(1+x) is convex, so phi(X) >= 0 and
    // phi'(X) >= 0 give (1+x)^deg <= exp(delta (x-R)^2) on [X, inf).
    const RealBall phi = delta * sqr(XmR) - log(Xb + one) * deg;
    const RealBall dphi = delta * XmR * 2L - RealBall(deg, p) / (Xb + one);
    detail::require(checks, "(1+x)^" + std::to_string(deg) + " <= exp(delta (x-R)^2) at X",
                    !phi.is_negative() && !phi.contains_zero());
    detail::require(checks, "absorption log-ratio nondecreasing on [X, inf)", dphi.is_positive());

    const RealBall tail_integral = exp(-(gamma * sqr(XmR))) / (gamma * XmR * 2L);
    report.bound = detail::upper_point(env.QC * env.prefactor * tail_integral * 2L);
    return report;
}

/// Rigorous upper bound for int_X^inf g_t (the density's right tail).
inline RealBall density_tail_bound(const AtomicMeasure& mu, const EvaluationContext& ctx, const Rational& X) {
    const Precision p = ctx.prec;
    const Rational R = mu.support_radius();
    if (!(X > R)) throw PremiseFailure("X > R for the density tail");
    const RealBall beta = RealBall::from_rational(Rational(1) / (Rational(4) * ctx.t), p);
    const RealBall XmR = RealBall::from_rational(X - R, p);
    const RealBall prefactor = RealBall(1, p) / sqrt(RealBall::pi(p) * RealBall::from_rational(ctx.t, p) * 4L);
    return detail::upper_point(prefactor * exp(-(beta * sqr(XmR))) / (beta * XmR * 2L));
}

/// Constants stated for the 17-atom measure at t = 1/3, X = 25.
struct PaperTailConstants {
    std::vector<long long> A{1, 6, 56, 825, 15472, 350000};
    std::vector<long long> B{6, 92, 2265, 76648, 3347024};
    long long QC = 100000000;
    int degree = 12;
};

/// Exact-integer B recursion applied to the stated A.
inline std::vector<long long> paper_b_from_a(const std::vector<long long>& A) {
    std::vector<long long> B = l_envelope_from_k(A, 0LL);
    return {B.begin() + 1, B.end()};
}

/// Checks of the stated constants: B from A in exact integers, the resulting
/// QC <= 10^8, (1+x)^12 <= exp((x-9)^2/4) at x = 25 with a nondecreasing
/// log-ratio, and 2 10^8 e^-128 / 16 < 10^-20.
inline std::vector<PremiseCheck> paper_tail_checks(Precision p) {
    const PaperTailConstants k;
    std::vector<PremiseCheck> out;
    out.push_back({"B from A recursion reproduces (6, 92, 2265, 76648, 3347024)", paper_b_from_a(k.A) == k.B});

    long long qc = 0;
    for (int r = 0; r < 5; ++r) qc += binomial(5, r) * k.A[r] * k.B[4 - r];
    qc += k.A[5] * 2;  // |L_0| <= 2 (1 + x)^2
    out.push_back({"sum C(5,r) A_r B_(5-r) + A_5 * 2 <= 10^8", qc <= k.QC});

    const RealBall x(25, p);
    const RealBall lhs = log(x + RealBall(1, p)) * 12L;
    const RealBall rhs = sqr(x - RealBall(9, p)) / 4L;
    out.push_back({"(1+x)^12 <= exp((x-9)^2/4) at x = 25", (rhs - lhs).is_positive()});
    const RealBall slope = (x - RealBall(9, p)) / 2L - RealBall(12, p) / (x + RealBall(1, p));
    out.push_back({"(x-9)^2/4 - 12 log(1+x) nondecreasing on [25, inf)", slope.is_positive()});

    const RealBall bound = RealBall(k.QC, p) * 2L * exp(RealBall(-128, p)) / 16L;
    const RealBall limit = RealBall::from_rational(Rational::parse("1e-20"), p);
    out.push_back({"2 * 10^8 * e^-128 / 16 < 10^-20", (limit - bound).is_positive()});
    return out;
}

}  // namespace gcm
