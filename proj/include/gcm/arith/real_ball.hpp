#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <string>
#include <utility>

#include <gmpxx.h>
#include <mpfr.h>

#include "gcm/arith/errors.hpp"
#include "gcm/arith/mag.hpp"
#include "gcm/arith/precision.hpp"
#include "gcm/arith/rational.hpp"

namespace gcm {

namespace detail {

// Per-thread 64-bit temporaries for radius bookkeeping.
struct Scratch {
    mpfr_t a;
    mpfr_t b;
    Scratch() {
        mpfr_init2(a, 64);
        mpfr_init2(b, 64);
    }
    ~Scratch() {
        mpfr_clear(a);
        mpfr_clear(b);
    }
    Scratch(const Scratch&) = delete;
    Scratch& operator=(const Scratch&) = delete;
};

inline Scratch& scratch() {
    thread_local Scratch s;
    return s;
}

/// Bound on the rounding error of a correctly rounded (or faithfully
/// rounded) result: one ulp at the result's precision.
inline Mag ulp_of(mpfr_srcptr x) {
    if (mpfr_zero_p(x)) return Mag::zero();
    return Mag::pow2(static_cast<std::int64_t>(mpfr_get_exp(x)) - static_cast<std::int64_t>(mpfr_get_prec(x)));
}

inline Mag upper_from_mpfr(mpfr_srcptr x) { return Mag::upper_abs(x); }

/// Upper bound for e^r - 1.
inline Mag expm1_upper(const Mag& r) {
    if (r.is_zero()) return Mag::zero();
    if (!r.is_finite()) return Mag::inf();
    auto& s = scratch();
    r.to_mpfr(s.a);
    mpfr_expm1(s.a, s.a, MPFR_RNDU);
    return Mag::upper_abs(s.a);
}

}  // namespace detail

/// Midpoint-radius enclosure [mid - rad, mid + rad] of a real number.
///
/// The midpoint carries the working precision; the radius is a Mag upper
/// bound. Every operation returns a ball containing the exact image of all
/// member points. A nonfinite radius means the ball is the whole line.
class RealBall {
public:
    RealBall() : RealBall(Precision()) {}

    explicit RealBall(Precision p) {
        mpfr_init2(mid_, p.bits());
        mpfr_set_zero(mid_, 1);
    }

    RealBall(long v, Precision p) : RealBall(p) {
        if (mpfr_set_si(mid_, v, MPFR_RNDN) != 0) rad_ = detail::ulp_of(mid_);
    }

    RealBall(const RealBall& o) {
        mpfr_init2(mid_, mpfr_get_prec(o.mid_));
        mpfr_set(mid_, o.mid_, MPFR_RNDN);
        rad_ = o.rad_;
    }

    RealBall(RealBall&& o) noexcept : rad_(o.rad_) {
        mid_[0] = o.mid_[0];
        o.mid_[0]._mpfr_d = nullptr;
    }

    RealBall& operator=(const RealBall& o) {
        if (this == &o) return *this;
        if (mid_[0]._mpfr_d == nullptr) {
            mpfr_init2(mid_, mpfr_get_prec(o.mid_));
        } else if (mpfr_get_prec(mid_) != mpfr_get_prec(o.mid_)) {
            mpfr_set_prec(mid_, mpfr_get_prec(o.mid_));
        }
        mpfr_set(mid_, o.mid_, MPFR_RNDN);
        rad_ = o.rad_;
        return *this;
    }

    RealBall& operator=(RealBall&& o) noexcept {
        std::swap(mid_[0], o.mid_[0]);
        rad_ = o.rad_;
        return *this;
    }

    ~RealBall() {
        if (mid_[0]._mpfr_d != nullptr) mpfr_clear(mid_);
    }

    /// Ball containing q; exact (radius 0) when q is representable.
    static RealBall from_rational(const Rational& q, Precision p) {
        RealBall r(p);
        if (mpfr_set_q(r.mid_, q.get().get_mpq_t(), MPFR_RNDN) != 0) r.rad_ = detail::ulp_of(r.mid_);
        return r;
    }

    /// Ball containing x; exact when x fits in p bits.
    static RealBall from_mpfr(mpfr_srcptr x, Precision p) {
        RealBall r(p);
        if (mpfr_set(r.mid_, x, MPFR_RNDN) != 0) r.rad_ = detail::ulp_of(r.mid_);
        r.check_finite();
        return r;
    }

    static RealBall from_double(double x, Precision p) {
        RealBall r(p);
        mpfr_set_d(r.mid_, x, MPFR_RNDN);
        r.check_finite();
        return r;
    }

    /// Ball with the given exact midpoint and radius (both already rigorous).
    static RealBall from_mid_rad(mpfr_srcptr mid, const Mag& rad, Precision p) {
        RealBall r = from_mpfr(mid, p);
        r.rad_ += rad;
        return r;
    }

    /// Smallest convenient ball covering the closed interval [lo, hi].
    static RealBall from_endpoints(const Rational& lo, const Rational& hi, Precision p) {
        RealBall r = from_rational((lo + hi) * Rational(1, 2), p);
        r.rad_ += upper_rational((hi - lo) * Rational(1, 2));
        return r;
    }

    static RealBall whole_line(Precision p) {
        RealBall r(p);
        r.rad_ = Mag::inf();
        return r;
    }

    static RealBall pi(Precision p) {
        RealBall r(p);
        if (mpfr_const_pi(r.mid_, MPFR_RNDN) != 0) r.rad_ = detail::ulp_of(r.mid_);
        return r;
    }

    /// Upper bound Mag for |q|.
    static Mag upper_rational(const Rational& q) {
        auto& s = detail::scratch();
        mpfr_set_q(s.a, q.get().get_mpq_t(), MPFR_RNDA);
        return Mag::upper_abs(s.a);
    }

    [[nodiscard]] Precision precision() const { return Precision(static_cast<int>(mpfr_get_prec(mid_))); }
    [[nodiscard]] mpfr_srcptr mid() const { return mid_; }
    [[nodiscard]] const Mag& rad() const { return rad_; }
    [[nodiscard]] bool is_finite() const { return rad_.is_finite() && mpfr_number_p(mid_); }
    [[nodiscard]] bool is_exact() const { return rad_.is_zero(); }

    /// Upper bound for sup |x| over the ball.
    [[nodiscard]] Mag mag_upper() const { return Mag::upper_abs(mid_) + rad_; }

    /// Lower bound for inf |x| over the ball (zero if the ball touches 0).
    [[nodiscard]] Mag mag_lower() const {
        auto& s = detail::scratch();
        mpfr_abs(s.a, mid_, MPFR_RNDZ);
        rad_.to_mpfr(s.b);
        mpfr_sub(s.a, s.a, s.b, MPFR_RNDD);
        if (mpfr_sgn(s.a) <= 0) return Mag::zero();
        return Mag::lower_abs(s.a);
    }

    /// Writes mid - rad rounded down.
    void lower(mpfr_ptr out) const {
        if (!rad_.is_finite()) return mpfr_set_inf(out, -1);
        auto& s = detail::scratch();
        rad_.to_mpfr(s.b);
        mpfr_sub(out, mid_, s.b, MPFR_RNDD);
    }

    /// Writes mid + rad rounded up.
    void upper(mpfr_ptr out) const {
        if (!rad_.is_finite()) return mpfr_set_inf(out, 1);
        auto& s = detail::scratch();
        rad_.to_mpfr(s.b);
        mpfr_add(out, mid_, s.b, MPFR_RNDU);
    }

    [[nodiscard]] double mid_double() const { return mpfr_get_d(mid_, MPFR_RNDN); }
    [[nodiscard]] double rad_double() const { return rad_.to_double_upper(); }
    [[nodiscard]] double lower_double() const {
        mpfr_t t;
        mpfr_init2(t, 53);
        lower(t);
        const double d = mpfr_get_d(t, MPFR_RNDD);
        mpfr_clear(t);
        return d;
    }
    [[nodiscard]] double upper_double() const {
        mpfr_t t;
        mpfr_init2(t, 53);
        upper(t);
        const double d = mpfr_get_d(t, MPFR_RNDU);
        mpfr_clear(t);
        return d;
    }

    /// Exact midpoint as a rational (finite balls only).
    [[nodiscard]] mpq_class mid_q() const {
        mpq_class q;
        mpfr_get_q(q.get_mpq_t(), mid_);
        return q;
    }

    /// Exact radius as a rational (finite balls only).
    [[nodiscard]] mpq_class rad_q() const {
        mpfr_t t;
        mpfr_init2(t, 64);
        rad_.to_mpfr(t);
        mpq_class q;
        mpfr_get_q(q.get_mpq_t(), t);
        mpfr_clear(t);
        return q;
    }

    /// Strictly positive: every member is > 0.
    [[nodiscard]] bool is_positive() const {
        if (!is_finite()) return false;
        auto& s = detail::scratch();
        rad_.to_mpfr(s.b);
        return mpfr_sgn(mid_) > 0 && mpfr_cmp(mid_, s.b) > 0;
    }

    /// Strictly negative: every member is < 0.
    [[nodiscard]] bool is_negative() const {
        if (!is_finite()) return false;
        auto& s = detail::scratch();
        rad_.to_mpfr(s.b);
        return mpfr_sgn(mid_) < 0 && mpfr_cmpabs(mid_, s.b) > 0;
    }

    [[nodiscard]] bool contains_zero() const { return !is_positive() && !is_negative(); }

    [[nodiscard]] bool contains(const mpq_class& q) const {
        if (!is_finite()) return true;
        return ::abs(mpq_class(q - mid_q())) <= rad_q();
    }
    [[nodiscard]] bool contains(const Rational& q) const { return contains(q.get()); }
    [[nodiscard]] bool contains(long v) const { return contains(mpq_class(v)); }

    [[nodiscard]] bool contains(mpfr_srcptr x) const {
        mpq_class q;
        mpfr_get_q(q.get_mpq_t(), x);
        return contains(q);
    }

    /// True when every member of o is a member of this ball.
    [[nodiscard]] bool contains(const RealBall& o) const {
        if (!is_finite()) return true;
        if (!o.is_finite()) return false;
        return ::abs(mpq_class(o.mid_q() - mid_q())) + o.rad_q() <= rad_q();
    }

    [[nodiscard]] bool overlaps(const RealBall& o) const {
        if (!is_finite() || !o.is_finite()) return true;
        return ::abs(mpq_class(o.mid_q() - mid_q())) <= rad_q() + o.rad_q();
    }

    /// Ball lies inside the closed interval [lo, hi].
    [[nodiscard]] bool inside(const mpq_class& lo, const mpq_class& hi) const {
        if (!is_finite()) return false;
        const mpq_class m = mid_q();
        const mpq_class r = rad_q();
        return m - r >= lo && m + r <= hi;
    }

    /// Ball lies inside the open interval (lo, hi).
    [[nodiscard]] bool strictly_inside(const mpq_class& lo, const mpq_class& hi) const {
        if (!is_finite()) return false;
        const mpq_class m = mid_q();
        const mpq_class r = rad_q();
        return m - r > lo && m + r < hi;
    }

    /// Same ball with the midpoint rounded to p bits (radius grows to cover).
    [[nodiscard]] RealBall with_precision(Precision p) const {
        RealBall r = from_mpfr(mid_, p);
        r.rad_ += rad_;
        return r;
    }

    void add_error(const Mag& e) { rad_ += e; }

    /// Decimal rendering "mid +/- rad".
    [[nodiscard]] std::string to_string(int digits = 20) const {
        if (!is_finite()) return "[+/- inf]";
        char* buf = nullptr;
        mpfr_asprintf(&buf, "%.*Re", digits, mid_);
        std::string out(buf);
        mpfr_free_str(buf);
        char rbuf[64];
        std::snprintf(rbuf, sizeof rbuf, "%.3e", rad_.to_double_upper());
        return "[" + out + " +/- " + rbuf + "]";
    }

    /// Exact hexadecimal significand form of the midpoint, e.g. "0x1.8p-1".
    [[nodiscard]] std::string mid_hex() const { return hex_of(mid_); }

    /// Exact hexadecimal form of the radius.
    [[nodiscard]] std::string rad_hex() const {
        if (!rad_.is_finite()) return "inf";
        mpfr_t t;
        mpfr_init2(t, 64);
        rad_.to_mpfr(t);
        std::string s = hex_of(t);
        mpfr_clear(t);
        return s;
    }

    /// Inverse of mid_hex()/rad_hex(): rebuilds the ball exactly.
    static RealBall from_hex(const std::string& mid_hex, const std::string& rad_hex, Precision p) {
        RealBall r(p);
        if (mpfr_set_str(r.mid_, mid_hex.c_str(), 0, MPFR_RNDN) != 0) throw InputError("malformed hex midpoint: " + mid_hex);
        if (rad_hex == "inf") {
            r.rad_ = Mag::inf();
            return r;
        }
        mpfr_t t;
        mpfr_init2(t, 64);
        const bool bad = mpfr_set_str(t, rad_hex.c_str(), 0, MPFR_RNDU) != 0;
        if (!bad) r.rad_ = Mag::upper_abs(t);
        mpfr_clear(t);
        if (bad) throw InputError("malformed hex radius: " + rad_hex);
        return r;
    }

    friend std::ostream& operator<<(std::ostream& os, const RealBall& b) { return os << b.to_string(); }

    // Arithmetic ------------------------------------------------------------

    friend RealBall operator+(const RealBall& a, const RealBall& b) {
        RealBall r(max_prec(a, b));
        if (mpfr_add(r.mid_, a.mid_, b.mid_, MPFR_RNDN) != 0) r.rad_ = detail::ulp_of(r.mid_);
        r.rad_ += a.rad_ + b.rad_;
        r.check_finite();
        return r;
    }

    friend RealBall operator-(const RealBall& a, const RealBall& b) {
        RealBall r(max_prec(a, b));
        if (mpfr_sub(r.mid_, a.mid_, b.mid_, MPFR_RNDN) != 0) r.rad_ = detail::ulp_of(r.mid_);
        r.rad_ += a.rad_ + b.rad_;
        r.check_finite();
        return r;
    }

    friend RealBall operator-(const RealBall& a) {
        RealBall r(a);
        mpfr_neg(r.mid_, r.mid_, MPFR_RNDN);
        return r;
    }

    friend RealBall operator*(const RealBall& a, const RealBall& b) {
        RealBall r(max_prec(a, b));
        if (mpfr_mul(r.mid_, a.mid_, b.mid_, MPFR_RNDN) != 0) r.rad_ = detail::ulp_of(r.mid_);
        if (!a.rad_.is_zero() || !b.rad_.is_zero())
            r.rad_ += Mag::upper_abs(a.mid_) * b.rad_ + Mag::upper_abs(b.mid_) * a.rad_ + a.rad_ * b.rad_;
        r.check_finite();
        return r;
    }

    friend RealBall operator*(const RealBall& a, long k) {
        RealBall r(a.precision());
        if (mpfr_mul_si(r.mid_, a.mid_, k, MPFR_RNDN) != 0) r.rad_ = detail::ulp_of(r.mid_);
        r.rad_ += a.rad_ * Mag::from_double(static_cast<double>(k));
        r.check_finite();
        return r;
    }
    friend RealBall operator*(long k, const RealBall& a) { return a * k; }

    friend RealBall operator/(const RealBall& a, long k) {
        if (k == 0) throw DivisorContainsZero();
        RealBall r(a.precision());
        if (mpfr_div_si(r.mid_, a.mid_, k, MPFR_RNDN) != 0) r.rad_ = detail::ulp_of(r.mid_);
        r.rad_ += div_upper(a.rad_, Mag::from_double(static_cast<double>(k)));
        r.check_finite();
        return r;
    }

    /// Quotient; throws DivisorContainsZero when 0 lies in b.
    friend RealBall operator/(const RealBall& a, const RealBall& b) {
        const Mag denom_low = b.mag_lower();
        if (denom_low.is_zero() || !b.is_finite()) throw DivisorContainsZero();
        RealBall r(max_prec(a, b));
        if (mpfr_div(r.mid_, a.mid_, b.mid_, MPFR_RNDN) != 0) r.rad_ = detail::ulp_of(r.mid_);
        if (!a.rad_.is_zero() || !b.rad_.is_zero()) {
            // |a/b - am/bm| <= (ra |bm| + |am| rb) / (|bm| (|bm| - rb))
            const Mag num = a.rad_ * Mag::upper_abs(b.mid_) + Mag::upper_abs(a.mid_) * b.rad_;
            r.rad_ += div_upper(div_upper(num, Mag::lower_abs(b.mid_)), denom_low);
        }
        r.check_finite();
        return r;
    }

    RealBall& operator+=(const RealBall& b) { return *this = *this + b; }
    RealBall& operator-=(const RealBall& b) { return *this = *this - b; }
    RealBall& operator*=(const RealBall& b) { return *this = *this * b; }

    /// Multiplication by 2^k, exact.
    [[nodiscard]] RealBall mul_2exp(long k) const {
        RealBall r(*this);
        mpfr_mul_2si(r.mid_, r.mid_, k, MPFR_RNDN);
        r.rad_ = r.rad_.mul_2exp(k);
        return r;
    }

    friend RealBall sqr(const RealBall& a) {
        RealBall r(a.precision());
        if (mpfr_sqr(r.mid_, a.mid_, MPFR_RNDN) != 0) r.rad_ = detail::ulp_of(r.mid_);
        if (!a.rad_.is_zero()) r.rad_ += (Mag::upper_abs(a.mid_) * a.rad_).mul_2exp(1) + a.rad_ * a.rad_;
        r.check_finite();
        return r;
    }

    friend RealBall abs(const RealBall& a) {
        RealBall r(a);
        mpfr_abs(r.mid_, r.mid_, MPFR_RNDN);
        return r;
    }

    friend RealBall exp(const RealBall& a) {
        RealBall r(a.precision());
        if (!a.is_finite()) return whole_line(a.precision());
        if (mpfr_exp(r.mid_, a.mid_, MPFR_RNDN) != 0) r.rad_ = detail::ulp_of(r.mid_);
        if (!a.rad_.is_zero()) {
            // |exp(m + d) - exp(m)| <= exp(m) (e^|d| - 1)
            r.rad_ += (Mag::upper_abs(r.mid_) + r.rad_) * detail::expm1_upper(a.rad_);
        }
        r.check_finite();
        return r;
    }

    /// Natural log; throws NonPositiveLog when the ball touches (-inf, 0].
    friend RealBall log(const RealBall& a) {
        if (!a.is_positive()) throw NonPositiveLog();
        RealBall r(a.precision());
        if (mpfr_log(r.mid_, a.mid_, MPFR_RNDN) != 0) r.rad_ = detail::ulp_of(r.mid_);
        if (!a.rad_.is_zero()) r.rad_ += div_upper(a.rad_, a.mag_lower());
        r.check_finite();
        return r;
    }

    /// Square root; throws DomainError when the ball reaches below 0.
    friend RealBall sqrt(const RealBall& a) {
        if (!a.is_finite() || mpfr_sgn(a.mid_) < 0) throw DomainError("sqrt of a negative enclosure");
        RealBall r(a.precision());
        if (mpfr_sqrt(r.mid_, a.mid_, MPFR_RNDN) != 0) r.rad_ = detail::ulp_of(r.mid_);
        if (!a.rad_.is_zero()) {
            if (!a.is_positive()) throw DomainError("sqrt of an enclosure touching 0");
            // |sqrt x - sqrt m| = |x - m| / (sqrt x + sqrt m) <= r / sqrt(m - r)
            auto& s = detail::scratch();
            mpfr_abs(s.a, a.mid_, MPFR_RNDZ);
            a.rad_.to_mpfr(s.b);
            mpfr_sub(s.a, s.a, s.b, MPFR_RNDD);
            mpfr_sqrt(s.a, s.a, MPFR_RNDD);
            r.rad_ += div_upper(a.rad_, Mag::lower_abs(s.a));
        }
        r.check_finite();
        return r;
    }

    friend RealBall pow_int(const RealBall& a, unsigned n) {
        RealBall result(1, a.precision());
        RealBall base(a);
        while (n != 0) {
            if (n & 1U) result = result * base;
            n >>= 1U;
            if (n != 0) base = sqr(base);
        }
        return result;
    }

    /// Smallest ball (up to rounding) containing both a and b.
    friend RealBall hull(const RealBall& a, const RealBall& b) {
        if (!a.is_finite() || !b.is_finite()) return whole_line(max_prec(a, b));
        const Precision p = max_prec(a, b);
        mpfr_t lo, hi, t;
        mpfr_inits2(p.bits() + 64, lo, hi, t, static_cast<mpfr_ptr>(nullptr));
        a.lower(lo);
        b.lower(t);
        mpfr_min(lo, lo, t, MPFR_RNDD);
        a.upper(hi);
        b.upper(t);
        mpfr_max(hi, hi, t, MPFR_RNDU);
        RealBall r = from_bounds(lo, hi, p);
        mpfr_clears(lo, hi, t, static_cast<mpfr_ptr>(nullptr));
        return r;
    }

    /// Ball covering [lo, hi] for mpfr endpoints.
    static RealBall from_bounds(mpfr_srcptr lo, mpfr_srcptr hi, Precision p) {
        RealBall r(p);
        mpfr_t w;
        mpfr_init2(w, std::max<mpfr_prec_t>(mpfr_get_prec(lo), mpfr_get_prec(hi)) + 2);
        mpfr_add(w, lo, hi, MPFR_RNDN);
        mpfr_div_2ui(w, w, 1, MPFR_RNDN);
        if (mpfr_set(r.mid_, w, MPFR_RNDN) != 0) r.rad_ = detail::ulp_of(r.mid_);
        // radius >= max(hi - mid, mid - lo)
        mpfr_t d1, d2;
        mpfr_inits2(64, d1, d2, static_cast<mpfr_ptr>(nullptr));
        mpfr_sub(d1, hi, r.mid_, MPFR_RNDU);
        mpfr_sub(d2, r.mid_, lo, MPFR_RNDU);
        mpfr_max(d1, d1, d2, MPFR_RNDU);
        r.rad_ = Mag::upper_abs(d1);
        mpfr_clears(d1, d2, w, static_cast<mpfr_ptr>(nullptr));
        r.check_finite();
        return r;
    }

private:
    static Precision max_prec(const RealBall& a, const RealBall& b) {
        return Precision(static_cast<int>(std::max(mpfr_get_prec(a.mid_), mpfr_get_prec(b.mid_))));
    }

    static std::string hex_of(mpfr_srcptr x) {
        char* buf = nullptr;
        mpfr_asprintf(&buf, "%Ra", x);
        std::string s(buf);
        mpfr_free_str(buf);
        return s;
    }

    void check_finite() {
        if (!mpfr_number_p(mid_) || !rad_.is_finite()) {
            mpfr_set_zero(mid_, 1);
            rad_ = Mag::inf();
        }
    }

    mpfr_t mid_;
    Mag rad_;
};

}  // namespace gcm
