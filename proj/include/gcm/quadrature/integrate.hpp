#pragma once

#include <algorithm>
#include <array>
#include <queue>
#include <vector>

#include "gcm/arith/complex_ball.hpp"
#include "gcm/quadrature/legendre.hpp"

namespace gcm {

/// The integrand could not be certified holomorphic on the ellipse box.
class AnalyticityUnavailable : public NumericalError {
public:
    AnalyticityUnavailable() : NumericalError("integrand not certified analytic on the enclosing ellipse") {}
};

/// The ellipse box evaluated but its magnitude bound is infinite.
class MagnitudeOverflow : public NumericalError {
public:
    MagnitudeOverflow() : NumericalError("integrand magnitude bound on the ellipse is infinite") {}
};

/// Ball-valued integrand: callable on RealBall (the real segment) and on
/// ComplexBall (holomorphic extension, throwing NumericalError when the
/// enclosure cannot be certified).
template <class F>
concept BallIntegrand = requires(const F& f, const RealBall& x, const ComplexBall& z) {
    { f(x) } -> std::convertible_to<RealBall>;
    { f(z) } -> std::convertible_to<ComplexBall>;
};

struct QuadratureRequest {
    Rational a;
    Rational b;
    double abs_tol = 1e-30;
    double rel_tol = 1e-30;
    long budget = 200000;  // maximum number of subinterval evaluations
    Precision prec;

    void validate() const {
        if (!(a < b)) throw InputError("quadrature interval must satisfy a < b");
        if (!(abs_tol > 0)) throw InputError("abs_tol must be positive");
        if (!(rel_tol >= 0)) throw InputError("rel_tol must be nonnegative");
        if (budget < 1) throw InputError("quadrature budget must be at least 1");
    }
};

enum class QuadratureStatus { converged, tolerance_not_met };

inline const char* to_string(QuadratureStatus s) {
    return s == QuadratureStatus::converged ? "converged" : "tolerance_not_met";
}

/// Rigorous enclosure of an integral. value contains the exact integral in
/// both statuses; tolerance_not_met only means the radius is larger than asked.
struct Enclosure {
    RealBall value;
    long evaluations = 0;
    long segments = 0;
    QuadratureStatus status = QuadratureStatus::tolerance_not_met;
};

/// Gauss-Legendre orders tried before bisecting.
inline constexpr std::array<int, 5> kGaussOrders = {8, 16, 32, 64, 128};

/// Bernstein ellipse parameter rho for the truncation bound.
inline constexpr int kEllipseRho = 2;

namespace detail {

/// Complex rectangle enclosing the rho = 2 Bernstein ellipse of [a, b]:
/// semi-axes (5/4) h and (3/4) h around the center, h = (b - a) / 2.
inline ComplexBall ellipse_box(const Rational& a, const Rational& b, Precision p) {
    const Rational c = (a + b) * Rational(1, 2);
    const Rational h = (b - a) * Rational(1, 2);
    const Rational ax = h * Rational(5, 4);
    const Rational ay = h * Rational(3, 4);
    return {RealBall::from_endpoints(c - ax, c + ax, p), RealBall::from_endpoints(-ay, ay, p)};
}

/// Upper bound of 64 M / (15 (rho^2 - 1) rho^(2n)) * h for rho = 2.
inline Mag gauss_truncation_bound(const Mag& M, int n, const Rational& half_width) {
    const Mag factor = div_upper(Mag::from_double(64.0), Mag::from_double(45.0));
    return (M * factor * RealBall::upper_rational(half_width)).mul_2exp(-2L * n);
}

}  // namespace detail

/// Upper bound M for |f| on the ellipse box of [a, b]; also certifies that f
/// is holomorphic there (the evaluation would throw otherwise).
template <BallIntegrand F>
Mag ellipse_magnitude(const F& f, const Rational& a, const Rational& b, Precision p) {
    ComplexBall v;
    try {
        v = f(detail::ellipse_box(a, b, p));
    } catch (const NumericalError&) {
        throw AnalyticityUnavailable();
    }
    const Mag M = v.mag_upper();
    if (!M.is_finite()) throw MagnitudeOverflow();
    return M;
}

/// Gauss-Legendre sum h sum_k w_k f(c + h x_k), without the truncation term.
template <BallIntegrand F>
RealBall gauss_sum(const F& f, const Rational& a, const Rational& b, const GLRule& rule, Precision p) {
    const RealBall c = RealBall::from_rational((a + b) * Rational(1, 2), p);
    const RealBall h = RealBall::from_rational((b - a) * Rational(1, 2), p);
    RealBall sum(p);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) sum += rule.weights[k] * f(c + h * rule.nodes[k]);
    return sum * h;
}

/// One Gauss-Legendre segment with its rigorous truncation term. The result
/// contains the exact integral of f over [a, b].
template <BallIntegrand F>
RealBall gl_segment(const F& f, const Rational& a, const Rational& b, const GLRule& rule, Precision p) {
    const Mag M = ellipse_magnitude(f, a, b, p);
    RealBall s = gauss_sum(f, a, b, rule, p);
    s.add_error(detail::gauss_truncation_bound(M, rule.order, (b - a) * Rational(1, 2)));
    return s;
}

/// Order-zero enclosure (b - a) f([a, b]).
template <BallIntegrand F>
RealBall bisection_segment(const F& f, const Rational& a, const Rational& b, Precision p) {
    return f(RealBall::from_endpoints(a, b, p)) * RealBall::from_rational(b - a, p);
}

/// Adaptive rigorous integration of f over [req.a, req.b].
///
/// Segments are processed widest first. Each gets a magnitude bound on its
/// ellipse box; the smallest Gauss order whose truncation term fits the
/// segment's share of abs_tol is used, otherwise the segment is bisected.
/// Segments below the width floor, and all remaining ones once the budget is
/// spent, fall back to order-zero enclosures (whole line if even that fails).
template <BallIntegrand F>
Enclosure enclose_integral(const F& f, const QuadratureRequest& req) {
    req.validate();
    const Precision p = req.prec;
    const Rational total_width = req.b - req.a;
    // Width floor 2^-60 of the original interval.
    const Rational floor_width = total_width * Rational(1, 1L << 60);
    // Half of abs_tol is shared among truncation terms in proportion to width.
    const Rational tol_q = Rational(mpq_class(req.abs_tol)) * Rational(1, 2);

    struct Segment {
        Rational a;
        Rational b;
    };
    auto wider = [](const Segment& x, const Segment& y) {
        const Rational wx = x.b - x.a;
        const Rational wy = y.b - y.a;
        if (wx != wy) return wx < wy;
        return x.a > y.a;
    };
    std::priority_queue<Segment, std::vector<Segment>, decltype(wider)> pending(wider);
    pending.push({req.a, req.b});

    struct Piece {
        Rational a;
        RealBall value;
    };
    std::vector<Piece> done;
    Enclosure out;

    auto order_zero = [&](const Segment& s) {
        ++out.evaluations;
        try {
            done.push_back({s.a, bisection_segment(f, s.a, s.b, p)});
        } catch (const NumericalError&) {
            done.push_back({s.a, RealBall::whole_line(p)});
        }
    };

    while (!pending.empty() && out.evaluations < req.budget) {
        const Segment s = pending.top();
        pending.pop();
        const Rational width = s.b - s.a;
        if (width < floor_width) {
            order_zero(s);
            continue;
        }
        ++out.evaluations;
        const Rational mid = (s.a + s.b) * Rational(1, 2);
        Mag M;
        try {
            M = ellipse_magnitude(f, s.a, s.b, p);
        } catch (const NumericalError&) {
            pending.push({s.a, mid});
            pending.push({mid, s.b});
            continue;
        }
        const Mag goal = RealBall::upper_rational(tol_q * width / total_width);
        int chosen = 0;
        Mag bound;
        for (const int n : kGaussOrders) {
            bound = detail::gauss_truncation_bound(M, n, width * Rational(1, 2));
            if (bound <= goal) {
                chosen = n;
                break;
            }
        }
        if (chosen == 0) {
            pending.push({s.a, mid});
            pending.push({mid, s.b});
            continue;
        }
        try {
            RealBall v = gauss_sum(f, s.a, s.b, *legendre_rule(chosen, p), p);
            v.add_error(bound);
            done.push_back({s.a, std::move(v)});
        } catch (const NumericalError&) {
            // Real-line evaluation failed although the box succeeded; bisect.
            pending.push({s.a, mid});
            pending.push({mid, s.b});
        }
    }
    while (!pending.empty()) {
        order_zero(pending.top());
        pending.pop();
    }

    std::sort(done.begin(), done.end(), [](const Piece& x, const Piece& y) { return x.a < y.a; });
    out.value = RealBall(p);
    for (const auto& piece : done) out.value += piece.value;
    out.segments = static_cast<long>(done.size());

    if (out.value.is_finite()) {
        const double rad = out.value.rad_double();
        const double scale = std::fabs(out.value.mid_double());
        if (rad <= req.abs_tol || rad <= req.rel_tol * scale) out.status = QuadratureStatus::converged;
    }
    return out;
}

}  // namespace gcm
