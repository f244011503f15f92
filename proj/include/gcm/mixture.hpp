#pragma once

#include <vector>

#include "gcm/arith/complex_ball.hpp"
#include "gcm/arith/real_ball.hpp"
#include "gcm/hermite.hpp"
#include "gcm/measure.hpp"

namespace gcm {

/// Exact binomial coefficient C(n, k) for the small orders used here.
inline long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Principal log that refuses enclosures meeting the branch cut.
inline RealBall log_branch_safe(const RealBall& x) { return log(x); }
inline ComplexBall log_branch_safe(const ComplexBall& z) { return log(z, true); }

/// Per-atom Gaussian components at one evaluation point.
template <class T>
struct DensityBundle {
    T x;
    std::vector<T> rho;  // rho_i(x, t) = w_i (4 pi t)^{-1/2} exp(-(x - a_i)^2 / (4t))
    T g;                 // sum of rho
    std::vector<T> pi;   // rho_i / g
};

/// K_n = d^n_t g / g and L_n = d^n_t log g for n = 0..m.
template <class T>
struct DerivativeStack {
    std::vector<T> K;
    std::vector<T> L;
};

/// Everything computed for one evaluation of the integrand.
template <class T>
struct IntegrandEvaluation {
    DensityBundle<T> bundle;
    DerivativeStack<T> stack;
    T Q;  // sum_r C(m, r) K_r L_{m-r}
    T G;  // g * Q = d^m_t (g log g)
};

/// Evaluates the heat-evolved density g_t of an atomic measure, the stacks
/// K_n and L_n, and the integrand d^m_t (g_t log g_t)(x), all in ball
/// arithmetic over real or complex evaluation points.
class MixtureModel {
public:
    MixtureModel(AtomicMeasure mu, const EvaluationContext& ctx)
        : mu_(std::move(mu)), t_(ctx.t), m_(ctx.m), prec_(ctx.prec) {
        const Precision p = prec_;
        const RealBall t = RealBall::from_rational(t_, p);
        norm_ = RealBall(1, p) / sqrt(RealBall::pi(p) * t * 4L);
        inv_4t_ = RealBall::from_rational(Rational(1) / (Rational(4) * t_), p);
        inv_2sqrt_t_ = RealBall(1, p) / (sqrt(t) * 2L);
        inv_4t_pow_.push_back(RealBall(1, p));
        for (int n = 1; n <= m_; ++n) inv_4t_pow_.push_back(inv_4t_pow_.back() * inv_4t_);
        for (const auto& atom : mu_.atoms()) {
            locations_.push_back(RealBall::from_rational(atom.location, p));
            weights_norm_.push_back(RealBall::from_rational(atom.weight, p) * norm_);
        }
    }

    [[nodiscard]] const AtomicMeasure& measure() const { return mu_; }
    [[nodiscard]] const Rational& time() const { return t_; }
    [[nodiscard]] int order() const { return m_; }
    [[nodiscard]] Precision precision() const { return prec_; }

    /// (4 pi t)^{-1/2}.
    [[nodiscard]] const RealBall& normalization() const { return norm_; }

    template <class T>
    [[nodiscard]] DensityBundle<T> density_bundle(const T& x) const {
        DensityBundle<T> b{x, {}, T(prec_), {}};
        b.rho.reserve(mu_.size());
        for (std::size_t i = 0; i < mu_.size(); ++i) {
            const T y = x - T(locations_[i]);
            b.rho.push_back(exp(-(sqr(y) * inv_4t_)) * weights_norm_[i]);
        }
        b.g = mirror_sum(b.rho);
        b.pi.reserve(mu_.size());
        for (const auto& r : b.rho) b.pi.push_back(r / b.g);
        return b;
    }

    /// g_t(x) alone (no posterior division).
    template <class T>
    [[nodiscard]] T density(const T& x) const {
        std::vector<T> rho;
        rho.reserve(mu_.size());
        for (std::size_t i = 0; i < mu_.size(); ++i) {
            const T y = x - T(locations_[i]);
            rho.push_back(exp(-(sqr(y) * inv_4t_)) * weights_norm_[i]);
        }
        return mirror_sum(rho);
    }

    /// K_0 .. K_m from the posterior weights.
    template <class T>
    [[nodiscard]] std::vector<T> k_stack(const DensityBundle<T>& b) const {
        std::vector<std::vector<T>> terms(static_cast<std::size_t>(m_) + 1);
        const T one(RealBall(1, prec_));
        for (std::size_t i = 0; i < mu_.size(); ++i) {
            const T u = (b.x - T(locations_[i])) * inv_2sqrt_t_;
            const std::vector<T> h = hermite_all(2 * m_, u, one);
            for (int n = 1; n <= m_; ++n) terms[n].push_back(b.pi[i] * h[2 * n]);
        }
        std::vector<T> K;
        K.reserve(terms.size());
        K.push_back(one);
        for (int n = 1; n <= m_; ++n) K.push_back(mirror_sum(terms[n]) * inv_4t_pow_[n]);
        return K;
    }

    /// L_0 = log_g, L_n = K_n - sum_{r=1}^{n-1} C(n-1, r-1) L_r K_{n-r}.
    template <class T>
    [[nodiscard]] std::vector<T> l_stack(const std::vector<T>& K, const T& log_g) const {
        std::vector<T> L;
        L.reserve(K.size());
        L.push_back(log_g);
        for (std::size_t n = 1; n < K.size(); ++n) {
            T s = K[n];
            for (std::size_t r = 1; r < n; ++r)
                s -= L[r] * K[n - r] * binomial(static_cast<int>(n) - 1, static_cast<int>(r) - 1);
            L.push_back(std::move(s));
        }
        return L;
    }

    /// Full evaluation of G(x) = g sum_r C(m, r) K_r L_{m-r}.
    ///
    /// Throws DivisorContainsZero, NonPositiveLog or BranchCutViolation when
    /// the enclosure of x is too wide to evaluate soundly.
    template <class T>
    [[nodiscard]] IntegrandEvaluation<T> evaluate(const T& x) const {
        IntegrandEvaluation<T> e{density_bundle(x), {}, T(prec_), T(prec_)};
        e.stack.K = k_stack(e.bundle);
        e.stack.L = l_stack(e.stack.K, log_branch_safe(e.bundle.g));
        for (int r = 0; r <= m_; ++r) e.Q += e.stack.K[r] * e.stack.L[m_ - r] * binomial(m_, r);
        e.G = e.bundle.g * e.Q;
        return e;
    }

    template <class T>
    [[nodiscard]] T integrand(const T& x) const {
        return evaluate(x).G;
    }

private:
    // Sums v[i] + v[n-1-i] pairwise from the outside in. For a symmetric
    // measure the per-atom terms at -x are those at x in reverse order, so
    // this order makes G(-x) and G(x) bit-identical balls.
    template <class T>
    T mirror_sum(const std::vector<T>& v) const {
        T acc(prec_);
        const std::size_t n = v.size();
        for (std::size_t i = 0; i < n / 2; ++i) acc += v[i] + v[n - 1 - i];
        if (n % 2 == 1) acc += v[n / 2];
        return acc;
    }

    AtomicMeasure mu_;
    Rational t_;
    int m_;
    Precision prec_;
    RealBall norm_;
    RealBall inv_4t_;
    RealBall inv_2sqrt_t_;
    std::vector<RealBall> inv_4t_pow_;
    std::vector<RealBall> locations_;
    std::vector<RealBall> weights_norm_;
};

/// Integrand adaptor: x -> d^m_t (g_t log g_t)(x).
struct EntropyDerivativeIntegrand {
    const MixtureModel* model;
    RealBall operator()(const RealBall& x) const { return model->integrand(x); }
    ComplexBall operator()(const ComplexBall& x) const { return model->integrand(x); }
};

/// Integrand adaptor: x -> g_t(x).
struct DensityIntegrand {
    const MixtureModel* model;
    RealBall operator()(const RealBall& x) const { return model->density(x); }
    ComplexBall operator()(const ComplexBall& x) const { return model->density(x); }
};

}  // namespace gcm
