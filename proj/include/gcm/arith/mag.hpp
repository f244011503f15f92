#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include <mpfr.h>

namespace gcm {

/// Nonnegative upper bound m * 2^e with a double mantissa and a wide exponent.
///
/// Every arithmetic operation rounds upward, so a Mag computed from upper
/// bounds is again an upper bound. The wide exponent keeps radii of
/// Gaussian-small quantities (far below DBL_MIN) from flushing to zero.
class Mag {
public:
    constexpr Mag() = default;

    static Mag zero() { return {}; }

    static Mag inf() {
        Mag r;
        r.man_ = std::numeric_limits<double>::infinity();
        return r;
    }

    /// Exact for finite nonnegative doubles; negative inputs use |x|.
    static Mag from_double(double x) {
        Mag r;
        r.set_normalized(std::fabs(x), 0);
        return r;
    }

    /// 2^e exactly.
    static Mag pow2(std::int64_t e) {
        Mag r;
        r.man_ = 0.5;
        r.exp_ = e + 1;
        return r;
    }

    /// Upper bound for |x|.
    static Mag upper_abs(mpfr_srcptr x) {
        if (mpfr_nan_p(x) || mpfr_inf_p(x)) return inf();
        if (mpfr_zero_p(x)) return zero();
        long e = 0;
        double m = mpfr_get_d_2exp(&e, x, MPFR_RNDA);
        Mag r;
        r.set_normalized(std::fabs(m), e);
        return r;
    }

    /// Lower bound for |x|.
    static Mag lower_abs(mpfr_srcptr x) {
        if (mpfr_nan_p(x) || mpfr_zero_p(x)) return zero();
        if (mpfr_inf_p(x)) return inf();
        long e = 0;
        double m = mpfr_get_d_2exp(&e, x, MPFR_RNDZ);
        Mag r;
        r.set_normalized(std::fabs(m), e);
        return r;
    }

    [[nodiscard]] bool is_zero() const { return man_ == 0.0; }
    [[nodiscard]] bool is_finite() const { return std::isfinite(man_); }
    [[nodiscard]] double mantissa() const { return man_; }
    [[nodiscard]] std::int64_t exponent() const { return exp_; }

    /// Writes the exact value into x (x needs at least 53 bits).
    void to_mpfr(mpfr_ptr x) const {
        if (!is_finite()) {
            mpfr_set_inf(x, 1);
            return;
        }
        mpfr_set_d(x, man_, MPFR_RNDU);
        mpfr_mul_2si(x, x, static_cast<long>(exp_), MPFR_RNDU);
    }

    /// Nearest double, rounded up; saturates to +inf.
    [[nodiscard]] double to_double_upper() const {
        if (!is_finite()) return man_;
        if (man_ == 0.0) return 0.0;
        if (exp_ > 1024) return std::numeric_limits<double>::infinity();
        if (exp_ < -1100) return std::numeric_limits<double>::denorm_min();
        double v = std::ldexp(man_, static_cast<int>(exp_));
        if (v == 0.0) return std::numeric_limits<double>::denorm_min();
        return v;
    }

    /// log2 of the value as a double (approximate; -inf for zero).
    [[nodiscard]] double log2_approx() const {
        if (man_ == 0.0) return -std::numeric_limits<double>::infinity();
        if (!is_finite()) return std::numeric_limits<double>::infinity();
        return std::log2(man_) + static_cast<double>(exp_);
    }

    friend Mag operator+(const Mag& a, const Mag& b) {
        if (!a.is_finite() || !b.is_finite()) return inf();
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        const std::int64_t e = a.exp_ > b.exp_ ? a.exp_ : b.exp_;
        const double s = scaled(a.man_, a.exp_ - e) + scaled(b.man_, b.exp_ - e);
        Mag r;
        r.set_normalized(bump(s), e);
        return r;
    }

    Mag& operator+=(const Mag& b) { return *this = *this + b; }

    friend Mag operator*(const Mag& a, const Mag& b) {
        if (!a.is_finite() || !b.is_finite()) return inf();
        if (a.is_zero() || b.is_zero()) return zero();
        Mag r;
        r.set_normalized(bump(a.man_ * b.man_), a.exp_ + b.exp_);
        return r;
    }

    Mag& operator*=(const Mag& b) { return *this = *this * b; }

    /// Upper bound for a / b where b is a lower bound for the true divisor.
    friend Mag div_upper(const Mag& a, const Mag& b) {
        if (b.is_zero() || !a.is_finite()) return inf();
        if (a.is_zero()) return zero();
        if (!b.is_finite()) return zero();
        Mag r;
        r.set_normalized(bump(a.man_ / b.man_), a.exp_ - b.exp_);
        return r;
    }

    /// Multiplies by 2^k exactly.
    [[nodiscard]] Mag mul_2exp(std::int64_t k) const {
        Mag r = *this;
        if (!r.is_zero() && r.is_finite()) r.exp_ += k;
        return r;
    }

    friend bool operator<(const Mag& a, const Mag& b) {
        if (!b.is_finite()) return a.is_finite();
        if (!a.is_finite()) return false;
        if (a.is_zero()) return !b.is_zero();
        if (b.is_zero()) return false;
        if (a.exp_ != b.exp_) return a.exp_ < b.exp_;
        return a.man_ < b.man_;
    }
    friend bool operator<=(const Mag& a, const Mag& b) { return !(b < a); }
    friend bool operator>(const Mag& a, const Mag& b) { return b < a; }
    friend bool operator==(const Mag& a, const Mag& b) {
        return a.man_ == b.man_ && (a.exp_ == b.exp_ || a.is_zero() || !a.is_finite());
    }

    friend Mag max(const Mag& a, const Mag& b) { return a < b ? b : a; }

private:
    static double bump(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); }

    static double scaled(double m, std::int64_t k) {
        if (k < -1100) return 0.0;
        return std::ldexp(m, static_cast<int>(k));
    }

    void set_normalized(double m, std::int64_t e) {
        if (m == 0.0 || !std::isfinite(m)) {
            man_ = m;
            exp_ = 0;
            return;
        }
        int k = 0;
        man_ = std::frexp(m, &k);
        exp_ = e + k;
    }

    double man_ = 0.0;
    std::int64_t exp_ = 0;
};

}  // namespace gcm
