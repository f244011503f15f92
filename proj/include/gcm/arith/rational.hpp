#pragma once

#include <cctype>
#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include <gmpxx.h>

#include "gcm/arith/errors.hpp"

namespace gcm {

/// Exact rational number in lowest terms with a positive denominator.
class Rational {
public:
    Rational() = default;
    Rational(long n) : q_(n) {}  // NOLINT(google-explicit-constructor)
    Rational(long n, long d) : q_(n, d) {
        if (d == 0) throw InputError("rational with zero denominator");
        q_.canonicalize();
    }
    explicit Rational(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }
    Rational(const mpz_class& n, const mpz_class& d) : q_(n, d) {
        if (d == 0) throw InputError("rational with zero denominator");
        q_.canonicalize();
    }

    /// Parses "num/den", an integer, or a finite decimal such as "-0.002" or
    /// "1.5e-3". Decimals convert exactly; no binary floating point is involved.
    static Rational parse(std::string_view text) {
        std::string s(trim(text));
        if (s.empty()) throw InputError("empty rational string");
        if (auto slash = s.find('/'); slash != std::string::npos) {
            mpz_class n = parse_integer(s.substr(0, slash));
            mpz_class d = parse_integer(s.substr(slash + 1));
            if (d == 0) throw InputError("rational with zero denominator: " + s);
            return Rational(n, d);
        }
        return parse_decimal(s);
    }

    [[nodiscard]] const mpq_class& get() const { return q_; }
    [[nodiscard]] mpz_class num() const { return q_.get_num(); }
    [[nodiscard]] mpz_class den() const { return q_.get_den(); }
    [[nodiscard]] int sign() const { return sgn(q_); }
    [[nodiscard]] bool is_integer() const { return q_.get_den() == 1; }
    [[nodiscard]] double to_double() const { return q_.get_d(); }

    /// True when the denominator is a power of two.
    [[nodiscard]] bool is_dyadic() const {
        const mpz_class& d = q_.get_den();
        return mpz_popcount(d.get_mpz_t()) == 1;
    }

    [[nodiscard]] std::string to_string() const {
        return q_.get_num().get_str() + "/" + q_.get_den().get_str();
    }

    friend Rational operator+(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ + b.q_)); }
    friend Rational operator-(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ - b.q_)); }
    friend Rational operator*(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ * b.q_)); }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.sign() == 0) throw InputError("rational division by zero");
        return Rational(mpq_class(a.q_ / b.q_));
    }
    Rational operator-() const { return Rational(mpq_class(-q_)); }
    Rational& operator+=(const Rational& b) { q_ += b.q_; return *this; }
    Rational& operator-=(const Rational& b) { q_ -= b.q_; return *this; }
    Rational& operator*=(const Rational& b) { q_ *= b.q_; return *this; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        const int c = cmp(a.q_, b.q_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    friend Rational abs(const Rational& a) { return Rational(mpq_class(::abs(a.q_))); }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

private:
    static std::string_view trim(std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    }

    static mpz_class parse_integer(std::string_view text) {
        std::string s(trim(text));
        std::size_t i = 0;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        if (i == s.size()) throw InputError("malformed integer: '" + s + "'");
        for (std::size_t k = i; k < s.size(); ++k)
            if (!std::isdigit(static_cast<unsigned char>(s[k]))) throw InputError("malformed integer: '" + s + "'");
        if (s[0] == '+') s.erase(0, 1);
        return mpz_class(s, 10);
    }

    static Rational parse_decimal(const std::string& s) {
        std::size_t i = 0;
        bool negative = false;
        if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';
        std::string digits;
        long frac_digits = 0;
        bool seen_point = false;
        bool any_digit = false;
        for (; i < s.size(); ++i) {
            const char c = s[i];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                digits.push_back(c);
                any_digit = true;
                if (seen_point) ++frac_digits;
            } else if (c == '.' && !seen_point) {
                seen_point = true;
            } else {
                break;
            }
        }
        if (!any_digit) throw InputError("malformed rational: '" + s + "'");
        long exponent = 0;
        if (i < s.size()) {
            if (s[i] != 'e' && s[i] != 'E') throw InputError("malformed rational: '" + s + "'");
            const std::string exp_text = s.substr(i + 1);
            try {
                std::size_t used = 0;
                exponent = std::stol(exp_text, &used);
                if (used != exp_text.size()) throw InputError("malformed exponent in '" + s + "'");
            } catch (const std::logic_error&) {
                throw InputError("malformed exponent in '" + s + "'");
            }
            if (exponent > 100000 || exponent < -100000) throw InputError("exponent out of range in '" + s + "'");
        }
        mpz_class n(digits, 10);
        if (negative) n = -n;
        const long scale = exponent - frac_digits;
        mpz_class p;
        mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
        return scale >= 0 ? Rational(mpz_class(n * p), mpz_class(1)) : Rational(n, p);
    }

    mpq_class q_;
};

}  // namespace gcm
