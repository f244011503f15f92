#pragma once

#include <vector>

namespace gcm {

/// Physicists' Hermite polynomials H_0(z) .. H_n(z) by the three-term
/// recursion H_{k+1} = 2z H_k - 2k H_{k-1}, with exact integer coefficients.
///
/// T is any ring type providing T * T, T * long and T - T (balls, double).
template <class T>
std::vector<T> hermite_all(int n, const T& z, const T& one) {
    std::vector<T> h;
    h.reserve(static_cast<std::size_t>(n) + 1);
    h.push_back(one);
    if (n == 0) return h;
    const T two_z = z * 2L;
    h.push_back(two_z);
    for (int k = 1; k < n; ++k) h.push_back(two_z * h[k] - h[k - 1] * (2L * k));
    return h;
}

template <class T>
T hermite(int n, const T& z, const T& one) {
    return hermite_all(n, z, one).back();
}

/// Sum of absolute coefficients of H_n, by the same recursion on
/// coefficient vectors (exact in 64-bit integers for n <= 26).
inline long long hermite_abs_coefficient_sum(int n) {
    std::vector<long long> prev{1};
    if (n == 0) return 1;
    std::vector<long long> cur{0, 2};
    for (int k = 1; k < n; ++k) {
        std::vector<long long> next(cur.size() + 1, 0);
        for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += 2 * cur[i];
        for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= 2LL * k * prev[i];
        prev = std::move(cur);
        cur = std::move(next);
    }
    long long s = 0;
    for (const long long c : cur) s += c < 0 ? -c : c;
    return s;
}

}  // namespace gcm
