#pragma once

#include <string>

#include "gcm/arith/errors.hpp"

namespace gcm {

/// Working mantissa precision in bits.
class Precision {
public:
    static constexpr int kMinBits = 53;
    static constexpr int kDefaultBits = 256;

    constexpr Precision() = default;
    explicit Precision(int bits) : bits_(bits) {
        if (bits < kMinBits) throw InputError("precision must be at least 53 bits, got " + std::to_string(bits));
    }

    [[nodiscard]] constexpr int bits() const { return bits_; }

    /// The same precision scaled by num/den, rounded up, never below 53 bits.
    [[nodiscard]] Precision scaled(int num, int den) const {
        const int b = (bits_ * num + den - 1) / den;
        return Precision(b < kMinBits ? kMinBits : b);
    }

    friend constexpr bool operator==(Precision a, Precision b) { return a.bits_ == b.bits_; }

private:
    int bits_ = kDefaultBits;
};

}  // namespace gcm
