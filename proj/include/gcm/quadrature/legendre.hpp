#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "gcm/arith/real_ball.hpp"

namespace gcm {

class RootIsolationFailure : public NumericalError {
public:
    RootIsolationFailure() : NumericalError("could not isolate a Legendre root; raise precision") {}
};

/// n-point Gauss-Legendre rule on [-1, 1] with certified node and weight balls.
struct GLRule {
    int order = 0;
    std::vector<RealBall> nodes;    // ascending
    std::vector<RealBall> weights;
};

namespace detail {

/// P_n(x) and P_{n-1}(x) by the Bonnet recursion, in ball arithmetic.
inline std::pair<RealBall, RealBall> legendre_pair(int n, const RealBall& x) {
    RealBall p0(1, x.precision());
    if (n == 0) return {p0, RealBall(x.precision())};
    RealBall p1 = x;
    for (int k = 1; k < n; ++k) {
        RealBall p2 = ((2L * k + 1) * x * p1 - p0 * static_cast<long>(k)) / static_cast<long>(k + 1);
        p0 = std::move(p1);
        p1 = std::move(p2);
    }
    return {p1, p0};
}

/// Newton iteration on P_n in working precision, starting from x (in place).
inline void legendre_newton(int n, mpfr_ptr x, int iterations) {
    const mpfr_prec_t wp = mpfr_get_prec(x);
    mpfr_t p0, p1, p2, dp, t;
    mpfr_inits2(wp, p0, p1, p2, dp, t, static_cast<mpfr_ptr>(nullptr));
    for (int it = 0; it < iterations; ++it) {
        mpfr_set_ui(p0, 1, MPFR_RNDN);
        mpfr_set(p1, x, MPFR_RNDN);
        for (int k = 1; k < n; ++k) {
            // p2 = ((2k+1) x p1 - k p0) / (k+1)
            mpfr_mul(p2, x, p1, MPFR_RNDN);
            mpfr_mul_ui(p2, p2, 2 * k + 1, MPFR_RNDN);
            mpfr_mul_ui(t, p0, k, MPFR_RNDN);
            mpfr_sub(p2, p2, t, MPFR_RNDN);
            mpfr_div_ui(p2, p2, k + 1, MPFR_RNDN);
            mpfr_swap(p0, p1);
            mpfr_swap(p1, p2);
        }
        // P_n' = n (x P_n - P_{n-1}) / (x^2 - 1)
        mpfr_mul(dp, x, p1, MPFR_RNDN);
        mpfr_sub(dp, dp, p0, MPFR_RNDN);
        mpfr_mul_ui(dp, dp, n, MPFR_RNDN);
        mpfr_sqr(t, x, MPFR_RNDN);
        mpfr_sub_ui(t, t, 1, MPFR_RNDN);
        mpfr_div(dp, dp, t, MPFR_RNDN);
        mpfr_div(t, p1, dp, MPFR_RNDN);
        mpfr_sub(x, x, t, MPFR_RNDN);
    }
    mpfr_clears(p0, p1, p2, dp, t, static_cast<mpfr_ptr>(nullptr));
}

inline int sign_of(const RealBall& b) {
    if (b.is_positive()) return 1;
    if (b.is_negative()) return -1;
    return 0;
}

inline GLRule compute_legendre_rule(int n, Precision prec) {
    if (n < 1 || n > 256) throw InputError("Gauss-Legendre order must lie in [1, 256]");
    const int bits = prec.bits();
    // Ball evaluation of the Bonnet recursion inflates radii by up to ~3 per
    // step, so the guard bits grow with n.
    const int wp = bits + 32 + 2 * n;
    GLRule rule;
    rule.order = n;
    rule.nodes.resize(static_cast<std::size_t>(n), RealBall(prec));
    std::vector<RealBall> wide(static_cast<std::size_t>(n), RealBall(Precision(wp)));
    rule.weights.resize(static_cast<std::size_t>(n), RealBall(prec));

    mpfr_t x, lo, hi;
    mpfr_inits2(wp, x, lo, hi, static_cast<mpfr_ptr>(nullptr));
    const Precision wprec(wp);
    // Positive roots x_k = cos(pi (k - 1/4) / (n + 1/2)), k = 1..n/2; the
    // negative half is the exact mirror image.
    for (int k = 1; k <= n / 2; ++k) {
        double guess = std::cos(std::numbers::pi * (k - 0.25) / (n + 0.5));
        mpfr_set_d(x, guess, MPFR_RNDN);
        {
            mpfr_t xd;
            mpfr_init2(xd, 64);
            mpfr_set(xd, x, MPFR_RNDN);
            legendre_newton(n, xd, 6);
            mpfr_set(x, xd, MPFR_RNDN);
            mpfr_clear(xd);
        }
        legendre_newton(n, x, 2 + static_cast<int>(std::ceil(std::log2(wp / 60.0))));

        // Certify a sign change of P_n across [x - eps, x + eps].
        bool isolated = false;
        for (long shift = bits - 4; shift > bits / 2 && !isolated; shift -= 16) {
            mpfr_set(lo, x, MPFR_RNDN);
            mpfr_set(hi, x, MPFR_RNDN);
            mpfr_t eps;
            mpfr_init2(eps, 64);
            mpfr_set_ui_2exp(eps, 1, -shift, MPFR_RNDN);
            mpfr_sub(lo, lo, eps, MPFR_RNDD);
            mpfr_add(hi, hi, eps, MPFR_RNDU);
            mpfr_clear(eps);
            const int s_lo = sign_of(legendre_pair(n, RealBall::from_mpfr(lo, wprec)).first);
            const int s_hi = sign_of(legendre_pair(n, RealBall::from_mpfr(hi, wprec)).first);
            isolated = s_lo != 0 && s_hi != 0 && s_lo != s_hi;
        }
        if (!isolated) {
            mpfr_clears(x, lo, hi, static_cast<mpfr_ptr>(nullptr));
            throw RootIsolationFailure();
        }
        const std::size_t right = static_cast<std::size_t>(n - k);
        const std::size_t left = static_cast<std::size_t>(k - 1);
        rule.nodes[right] = RealBall::from_bounds(lo, hi, prec);
        rule.nodes[left] = -rule.nodes[right];
        wide[right] = RealBall::from_bounds(lo, hi, wprec);
        wide[left] = -wide[right];
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = RealBall(prec);
    mpfr_clears(x, lo, hi, static_cast<mpfr_ptr>(nullptr));

    // Isolating intervals must be pairwise disjoint: then each holds exactly
    // one of the n roots.
    for (std::size_t i = 1; i < rule.nodes.size(); ++i) {
        if (rule.nodes[i - 1].overlaps(rule.nodes[i])) throw RootIsolationFailure();
    }

    // w = 2 (1 - x^2) / (n P_{n-1}(x))^2 at a root of P_n.
    for (int i = 0; i < n; ++i) {
        const RealBall& node = wide[static_cast<std::size_t>(i)];
        if (i >= (n + 1) / 2) {
            rule.weights[static_cast<std::size_t>(i)] = rule.weights[static_cast<std::size_t>(n - 1 - i)];
            continue;
        }
        // P_{n-1} at the exact midpoint, widened by max |P'_{n-1}| <= n^2 / 2
        // times the node radius: feeding the node ball through the
        // recursion would amplify its radius exponentially in n.
        RealBall pm1 = legendre_pair(n, RealBall::from_mpfr(node.mid(), wprec)).second;
        pm1.add_error(Mag::from_double(0.5 * n * n) * node.rad());
        const RealBall w = (RealBall(1, wprec) - sqr(node)) * 2L / sqr(pm1 * static_cast<long>(n));
        rule.weights[static_cast<std::size_t>(i)] = w.with_precision(prec);
    }
    return rule;
}

}  // namespace detail

/// Cached n-point Gauss-Legendre rule; safe for concurrent first use.
inline std::shared_ptr<const GLRule> legendre_rule(int n, Precision prec) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const GLRule>> cache;
    const auto key = std::make_pair(n, prec.bits());
    {
        std::lock_guard<std::mutex> lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto rule = std::make_shared<const GLRule>(detail::compute_legendre_rule(n, prec));
    std::lock_guard<std::mutex> lock(mutex);
    return cache.emplace(key, std::move(rule)).first->second;
}

}  // namespace gcm
