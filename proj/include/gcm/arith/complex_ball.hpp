#pragma once

#include <ostream>
#include <string>

#include "gcm/arith/real_ball.hpp"

namespace gcm {

/// Rectangle enclosure re x im of a complex number.
///
/// Transcendental functions and inversion go through a disc around the
/// exact midpoint, so results are supersets of the exact image of the
/// rectangle.
class ComplexBall {
public:
    ComplexBall() = default;
    explicit ComplexBall(Precision p) : re_(p), im_(p) {}
    ComplexBall(long v, Precision p) : re_(v, p), im_(p) {}
    explicit ComplexBall(RealBall re) : re_(std::move(re)), im_(re_.precision()) {}
    ComplexBall(RealBall re, RealBall im) : re_(std::move(re)), im_(std::move(im)) {}

    static ComplexBall from_rational(const Rational& q, Precision p) { return ComplexBall(RealBall::from_rational(q, p)); }
    static ComplexBall pi(Precision p) { return ComplexBall(RealBall::pi(p)); }

    [[nodiscard]] const RealBall& real() const { return re_; }
    [[nodiscard]] const RealBall& imag() const { return im_; }
    [[nodiscard]] Precision precision() const { return re_.precision(); }
    [[nodiscard]] bool is_finite() const { return re_.is_finite() && im_.is_finite(); }

    /// Rectangle contains the origin.
    [[nodiscard]] bool contains_zero() const { return re_.contains_zero() && im_.contains_zero(); }

    /// Rectangle has a point on the closed negative real axis (-inf, 0].
    [[nodiscard]] bool meets_branch_cut() const { return im_.contains_zero() && !re_.is_positive(); }

    [[nodiscard]] bool contains(const mpq_class& re, const mpq_class& im) const {
        return re_.contains(re) && im_.contains(im);
    }
    [[nodiscard]] bool contains(mpfr_srcptr re, mpfr_srcptr im) const { return re_.contains(re) && im_.contains(im); }
    [[nodiscard]] bool contains(const ComplexBall& o) const { return re_.contains(o.re_) && im_.contains(o.im_); }
    [[nodiscard]] bool overlaps(const ComplexBall& o) const { return re_.overlaps(o.re_) && im_.overlaps(o.im_); }

    /// Upper bound for sup |z| over the rectangle.
    [[nodiscard]] Mag mag_upper() const {
        const Mag a = re_.mag_upper();
        const Mag b = im_.mag_upper();
        if (!a.is_finite() || !b.is_finite()) return Mag::inf();
        if (b.is_zero()) return a;
        if (a.is_zero()) return b;
        auto& s = detail::scratch();
        a.to_mpfr(s.a);
        b.to_mpfr(s.b);
        mpfr_hypot(s.a, s.a, s.b, MPFR_RNDU);
        return Mag::upper_abs(s.a);
    }

    /// Lower bound for inf |z| over the rectangle.
    [[nodiscard]] Mag mag_lower() const {
        const Mag a = re_.mag_lower();
        const Mag b = im_.mag_lower();
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        auto& s = detail::scratch();
        a.to_mpfr(s.a);
        mpfr_prec_round(s.a, 64, MPFR_RNDD);
        mpfr_t t;
        mpfr_init2(t, 64);
        b.to_mpfr(t);
        mpfr_hypot(s.a, s.a, t, MPFR_RNDD);
        mpfr_clear(t);
        return Mag::lower_abs(s.a);
    }

    [[nodiscard]] std::string to_string(int digits = 20) const {
        return "(" + re_.to_string(digits) + " + " + im_.to_string(digits) + "i)";
    }
    friend std::ostream& operator<<(std::ostream& os, const ComplexBall& z) { return os << z.to_string(); }

    friend ComplexBall operator+(const ComplexBall& a, const ComplexBall& b) { return {a.re_ + b.re_, a.im_ + b.im_}; }
    friend ComplexBall operator-(const ComplexBall& a, const ComplexBall& b) { return {a.re_ - b.re_, a.im_ - b.im_}; }
    friend ComplexBall operator-(const ComplexBall& a) { return {-a.re_, -a.im_}; }

    friend ComplexBall operator*(const ComplexBall& a, const ComplexBall& b) {
        if (b.im_.is_exact() && mpfr_zero_p(b.im_.mid())) return {a.re_ * b.re_, a.im_ * b.re_};
        if (a.im_.is_exact() && mpfr_zero_p(a.im_.mid())) return {a.re_ * b.re_, a.re_ * b.im_};
        return {a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_};
    }
    friend ComplexBall operator*(const ComplexBall& a, const RealBall& b) { return {a.re_ * b, a.im_ * b}; }
    friend ComplexBall operator*(const RealBall& b, const ComplexBall& a) { return a * b; }
    friend ComplexBall operator*(const ComplexBall& a, long k) { return {a.re_ * k, a.im_ * k}; }
    friend ComplexBall operator*(long k, const ComplexBall& a) { return a * k; }
    friend ComplexBall operator/(const ComplexBall& a, long k) { return {a.re_ / k, a.im_ / k}; }
    friend ComplexBall operator/(const ComplexBall& a, const RealBall& b) { return {a.re_ / b, a.im_ / b}; }

    friend ComplexBall operator/(const ComplexBall& a, const ComplexBall& b) {
        if (b.im_.is_exact() && mpfr_zero_p(b.im_.mid())) return a / b.re_;
        return a * inv(b);
    }

    ComplexBall& operator+=(const ComplexBall& b) { return *this = *this + b; }
    ComplexBall& operator-=(const ComplexBall& b) { return *this = *this - b; }
    ComplexBall& operator*=(const ComplexBall& b) { return *this = *this * b; }

    friend ComplexBall sqr(const ComplexBall& a) {
        return {sqr(a.re_) - sqr(a.im_), (a.re_ * a.im_).mul_2exp(1)};
    }

    /// 1/z; throws DivisorContainsZero when the enclosing disc reaches 0.
    friend ComplexBall inv(const ComplexBall& z) {
        if (!z.is_finite() || z.contains_zero()) throw DivisorContainsZero();
        const Precision p = z.precision();
        const Mag disc = z.re_.rad() + z.im_.rad();
        const Mag mid_low = mid_abs_lower(z);
        const Mag gap = gap_lower(mid_low, disc);
        if (gap.is_zero()) throw DivisorContainsZero();
        RealBall mr = RealBall::from_mpfr(z.re_.mid(), p);
        RealBall mi = RealBall::from_mpfr(z.im_.mid(), p);
        const RealBall d = sqr(mr) + sqr(mi);
        ComplexBall r{mr / d, -(mi / d)};
        if (!disc.is_zero()) {
            // |1/(m + e) - 1/m| <= |e| / (|m| (|m| - |e|))
            const Mag extra = div_upper(div_upper(disc, mid_low), gap);
            r.re_.add_error(extra);
            r.im_.add_error(extra);
        }
        return r;
    }

    friend ComplexBall exp(const ComplexBall& z) {
        if (!z.is_finite()) return {RealBall::whole_line(z.precision()), RealBall::whole_line(z.precision())};
        const Precision p = z.precision();
        const RealBall scale = exp(RealBall::from_mpfr(z.re_.mid(), p));
        RealBall c(p);
        RealBall s(p);
        sin_cos_of_mid(z.im_, c, s);
        ComplexBall r{scale * c, scale * s};
        const Mag disc = z.re_.rad() + z.im_.rad();
        if (!disc.is_zero()) {
            // |exp(m + e) - exp(m)| <= |exp(m)| (e^|e| - 1)
            const Mag extra = scale.mag_upper() * detail::expm1_upper(disc);
            r.re_.add_error(extra);
            r.im_.add_error(extra);
        }
        return r;
    }

    /// Principal logarithm.
    ///
    /// With analytic set, throws BranchCutViolation when the rectangle meets
    /// (-inf, 0]; a returned value is then a holomorphic enclosure on the
    /// whole rectangle. Without it, a rectangle straddling the cut gets an
    /// imaginary part covering [-pi, pi].
    friend ComplexBall log(const ComplexBall& z, bool analytic) {
        const Precision p = z.precision();
        if (!z.is_finite()) {
            if (analytic) throw BranchCutViolation();
            return {RealBall::whole_line(p), pi_hull(p)};
        }
        if (z.meets_branch_cut()) {
            if (analytic) throw BranchCutViolation();
            const Mag lo = z.mag_lower();
            if (lo.is_zero()) return {RealBall::whole_line(p), pi_hull(p)};
            return {log_modulus_range(lo, z.mag_upper(), p), pi_hull(p)};
        }
        const Mag disc = z.re_.rad() + z.im_.rad();
        const Mag mid_low = mid_abs_lower(z);
        const Mag gap = gap_lower(mid_low, disc);
        if (gap.is_zero()) return log_by_corners(z);
        RealBall mr = RealBall::from_mpfr(z.re_.mid(), p);
        RealBall mi = RealBall::from_mpfr(z.im_.mid(), p);
        RealBall re = log(sqr(mr) + sqr(mi)).mul_2exp(-1);
        RealBall im(p);
        if (!mpfr_zero_p(z.im_.mid())) {
            mpfr_t a;
            mpfr_init2(a, p.bits());
            const int inexact = mpfr_atan2(a, z.im_.mid(), z.re_.mid(), MPFR_RNDN);
            im = RealBall::from_mpfr(a, p);
            if (inexact != 0) im.add_error(detail::ulp_of(a));
            mpfr_clear(a);
        }
        if (!disc.is_zero()) {
            // |log(1 + e/m)| <= -log(1 - |e|/|m|) <= |e| / (|m| - |e|)
            const Mag extra = div_upper(disc, gap);
            re.add_error(extra);
            im.add_error(extra);
        }
        return {std::move(re), std::move(im)};
    }

    /// Principal square root, with the same branch contract as log().
    friend ComplexBall sqrt(const ComplexBall& z, bool analytic) {
        const Precision p = z.precision();
        if (z.meets_branch_cut() || !z.is_finite()) {
            if (analytic) throw BranchCutViolation();
            if (!z.is_finite()) return {RealBall::whole_line(p), RealBall::whole_line(p)};
            auto& s = detail::scratch();
            z.mag_upper().to_mpfr(s.a);
            mpfr_sqrt(s.a, s.a, MPFR_RNDU);
            const Mag bound = Mag::upper_abs(s.a);
            RealBall re = RealBall::from_mpfr(s.a, p).mul_2exp(-1);
            re.add_error(bound.mul_2exp(-1));
            RealBall im(p);
            im.add_error(bound);
            return {std::move(re), std::move(im)};
        }
        if (z.im_.is_exact() && mpfr_zero_p(z.im_.mid())) return ComplexBall(sqrt(z.re_));
        const ComplexBall l = log(z, true);
        return exp(ComplexBall{l.re_.mul_2exp(-1), l.im_.mul_2exp(-1)});
    }

    friend ComplexBall pow_int(const ComplexBall& a, unsigned n) {
        ComplexBall result(1, a.precision());
        ComplexBall base(a);
        while (n != 0) {
            if (n & 1U) result = result * base;
            n >>= 1U;
            if (n != 0) base = sqr(base);
        }
        return result;
    }

private:
    static Mag mid_abs_lower(const ComplexBall& z) {
        auto& s = detail::scratch();
        mpfr_t t;
        mpfr_init2(t, 64);
        mpfr_set(s.a, z.re_.mid(), MPFR_RNDZ);
        mpfr_set(t, z.im_.mid(), MPFR_RNDZ);
        mpfr_hypot(s.a, s.a, t, MPFR_RNDD);
        mpfr_clear(t);
        return Mag::lower_abs(s.a);
    }

    /// Lower bound for a - b, zero when not provably positive.
    static Mag gap_lower(const Mag& a, const Mag& b) {
        if (!a.is_finite() || !b.is_finite()) return Mag::zero();
        auto& s = detail::scratch();
        a.to_mpfr(s.a);
        b.to_mpfr(s.b);
        mpfr_sub(s.a, s.a, s.b, MPFR_RNDD);
        if (mpfr_sgn(s.a) <= 0) return Mag::zero();
        return Mag::lower_abs(s.a);
    }

    static void sin_cos_of_mid(const RealBall& y, RealBall& c, RealBall& s) {
        const Precision p = y.precision();
        if (mpfr_zero_p(y.mid())) {
            c = RealBall(1, p);
            s = RealBall(p);
            return;
        }
        mpfr_t sv, cv;
        mpfr_inits2(p.bits(), sv, cv, static_cast<mpfr_ptr>(nullptr));
        const int inexact = mpfr_sin_cos(sv, cv, y.mid(), MPFR_RNDN);
        s = RealBall::from_mpfr(sv, p);
        c = RealBall::from_mpfr(cv, p);
        if (inexact != 0) {
            s.add_error(detail::ulp_of(sv));
            c.add_error(detail::ulp_of(cv));
        }
        mpfr_clears(sv, cv, static_cast<mpfr_ptr>(nullptr));
    }

    static RealBall pi_hull(Precision p) {
        RealBall r(p);
        r.add_error(RealBall::pi(p).mag_upper());
        return r;
    }

    static RealBall log_modulus_range(const Mag& lo, const Mag& hi, Precision p) {
        mpfr_t a, b;
        mpfr_inits2(p.bits(), a, b, static_cast<mpfr_ptr>(nullptr));
        lo.to_mpfr(a);
        hi.to_mpfr(b);
        mpfr_log(a, a, MPFR_RNDD);
        mpfr_log(b, b, MPFR_RNDU);
        RealBall r = RealBall::from_bounds(a, b, p);
        mpfr_clears(a, b, static_cast<mpfr_ptr>(nullptr));
        return r;
    }

    // Fallback when the midpoint disc reaches the origin but the rectangle
    // avoids the cut: |z| ranges over [mag_lower, mag_upper] and arg attains
    // its extremes at the corners.
    static ComplexBall log_by_corners(const ComplexBall& z) {
        const Precision p = z.precision();
        const Mag lo = z.mag_lower();
        if (lo.is_zero()) throw BranchCutViolation();
        RealBall re = log_modulus_range(lo, z.mag_upper(), p);
        mpfr_t xs[2], ys[2], a, amin, amax;
        for (auto& v : xs) mpfr_init2(v, p.bits() + 8);
        for (auto& v : ys) mpfr_init2(v, p.bits() + 8);
        mpfr_inits2(p.bits(), a, amin, amax, static_cast<mpfr_ptr>(nullptr));
        z.re_.lower(xs[0]);
        z.re_.upper(xs[1]);
        z.im_.lower(ys[0]);
        z.im_.upper(ys[1]);
        mpfr_set_inf(amin, 1);
        mpfr_set_inf(amax, -1);
        for (auto& x : xs) {
            for (auto& y : ys) {
                mpfr_atan2(a, y, x, MPFR_RNDD);
                mpfr_min(amin, amin, a, MPFR_RNDD);
                mpfr_atan2(a, y, x, MPFR_RNDU);
                mpfr_max(amax, amax, a, MPFR_RNDU);
            }
        }
        RealBall im = RealBall::from_bounds(amin, amax, p);
        for (auto& v : xs) mpfr_clear(v);
        for (auto& v : ys) mpfr_clear(v);
        mpfr_clears(a, amin, amax, static_cast<mpfr_ptr>(nullptr));
        return {std::move(re), std::move(im)};
    }

    RealBall re_;
    RealBall im_;
};

}  // namespace gcm
