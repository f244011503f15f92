#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gcm/certifier.hpp"
#include "gcm/explorer.hpp"
#include "gcm/io/json_io.hpp"

namespace gcm {

struct SelftestItem {
    std::string suite;
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SelftestOptions {
    long monotonicity_cases = 10000;
    int members = 10;
    int fd_points = 20;
    int quad_integrands = 50;
    int bits = 256;
    bool certificate = true;
    std::uint64_t seed = 20240601;
    unsigned threads = 0;
};

namespace selftest {

// ------------------------------------------------------------ mpfr helper

/// Owning mpfr value for oracle computations.
class Big {
public:
    explicit Big(int bits) { mpfr_init2(v_, bits); }
    Big(const Big&) = delete;
    Big& operator=(const Big&) = delete;
    ~Big() { mpfr_clear(v_); }
    mpfr_ptr get() { return v_; }
    operator mpfr_ptr() { return v_; }  // NOLINT(google-explicit-constructor)

private:
    mpfr_t v_;
};

// ----------------------------------------------- inclusion monotonicity

struct BallSampler {
    std::mt19937_64 rng;
    int bits;

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

    /// Midpoint using the full mantissa, radius 0 or relative 2^-200 .. 1e-2.
    RealBall ball(double lo, double hi) {
        const Precision p(bits);
        Big mid(bits);
        mpfr_set_d(mid, uniform(lo, hi), MPFR_RNDN);
        Big part(bits);
        mpfr_set_d(part, uniform(-1, 1), MPFR_RNDN);
        mpfr_mul_2si(part, part, -60, MPFR_RNDN);
        mpfr_mul(part, part, mid, MPFR_RNDN);
        mpfr_add(mid, mid, part, MPFR_RNDN);
        RealBall b = RealBall::from_mpfr(mid, p);
        switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
            case 0: break;
            case 1: b.add_error(b.mag_upper().mul_2exp(-200)); break;
            case 2: b.add_error(Mag::from_double(std::fabs(b.mid_double()) * std::pow(10.0, uniform(-12, -2)))); break;
            default: b.add_error(Mag::from_double(std::pow(10.0, uniform(-30, -3)))); break;
        }
        return b;
    }

    /// A point of b at `wide` bits, drawn strictly from the inner endpoints.
    void member(const RealBall& b, mpfr_ptr out, int wide) {
        Big r(64);
        b.rad().to_mpfr(r);
        Big lo(wide);
        Big hi(wide);
        mpfr_sub(lo, b.mid(), r, MPFR_RNDU);
        mpfr_add(hi, b.mid(), r, MPFR_RNDD);
        const double u = std::uniform_int_distribution<int>(0, 9)(rng) == 0 ? 0.0 : uniform(0, 1);
        mpfr_sub(out, hi, lo, MPFR_RNDZ);
        mpfr_mul_d(out, out, u, MPFR_RNDZ);
        mpfr_add(out, out, lo, MPFR_RNDN);
        if (mpfr_cmp(out, lo.get()) < 0) mpfr_set(out, lo.get(), MPFR_RNDN);
        if (mpfr_cmp(out, hi.get()) > 0) mpfr_set(out, hi.get(), MPFR_RNDN);
    }
};

struct RealCase {
    std::string name;
    int arity;
    double lo;
    double hi;
    std::function<RealBall(const RealBall&, const RealBall&)> ball_op;
    std::function<void(mpfr_ptr, mpfr_srcptr, mpfr_srcptr)> exact_op;
};

struct ComplexCase {
    std::string name;
    int arity;
    double lo;
    double hi;
    std::function<ComplexBall(const ComplexBall&, const ComplexBall&)> ball_op;
    // (out_re, out_im, a_re, a_im, b_re, b_im) at the oracle precision
    std::function<void(mpfr_ptr, mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_srcptr, mpfr_srcptr)> exact_op;
};

inline std::vector<RealCase> real_cases() {
    auto div_dom = [](mpfr_ptr o, mpfr_srcptr a, mpfr_srcptr b) { mpfr_div(o, a, b, MPFR_RNDN); };
    return {
        {"add", 2, -1e3, 1e3, [](const RealBall& a, const RealBall& b) { return a + b; },
         [](mpfr_ptr o, mpfr_srcptr a, mpfr_srcptr b) { mpfr_add(o, a, b, MPFR_RNDN); }},
        {"sub", 2, -1e3, 1e3, [](const RealBall& a, const RealBall& b) { return a - b; },
         [](mpfr_ptr o, mpfr_srcptr a, mpfr_srcptr b) { mpfr_sub(o, a, b, MPFR_RNDN); }},
        {"mul", 2, -1e3, 1e3, [](const RealBall& a, const RealBall& b) { return a * b; },
         [](mpfr_ptr o, mpfr_srcptr a, mpfr_srcptr b) { mpfr_mul(o, a, b, MPFR_RNDN); }},
        {"div", 2, 0.5, 1e3, [](const RealBall& a, const RealBall& b) { return a / b; }, div_dom},
        {"neg", 1, -1e3, 1e3, [](const RealBall& a, const RealBall&) { return -a; },
         [](mpfr_ptr o, mpfr_srcptr a, mpfr_srcptr) { mpfr_neg(o, a, MPFR_RNDN); }},
        {"sqr", 1, -1e3, 1e3, [](const RealBall& a, const RealBall&) { return sqr(a); },
         [](mpfr_ptr o, mpfr_srcptr a, mpfr_srcptr) { mpfr_sqr(o, a, MPFR_RNDN); }},
        {"exp", 1, -40, 40, [](const RealBall& a, const RealBall&) { return exp(a); },
         [](mpfr_ptr o, mpfr_srcptr a, mpfr_srcptr) { mpfr_exp(o, a, MPFR_RNDN); }},
        {"log", 1, 1e-3, 1e3, [](const RealBall& a, const RealBall&) { return log(a); },
         [](mpfr_ptr o, mpfr_srcptr a, mpfr_srcptr) { mpfr_log(o, a, MPFR_RNDN); }},
        {"sqrt", 1, 1e-3, 1e3, [](const RealBall& a, const RealBall&) { return sqrt(a); },
         [](mpfr_ptr o, mpfr_srcptr a, mpfr_srcptr) { mpfr_sqrt(o, a, MPFR_RNDN); }},
        {"pow5", 1, -20, 20, [](const RealBall& a, const RealBall&) { return pow_int(a, 5); },
         [](mpfr_ptr o, mpfr_srcptr a, mpfr_srcptr) { mpfr_pow_ui(o, a, 5, MPFR_RNDN); }},
    };
}

inline std::vector<ComplexCase> complex_cases(int wide) {
    auto cmul = [wide](mpfr_ptr ore, mpfr_ptr oim, mpfr_srcptr ar, mpfr_srcptr ai, mpfr_srcptr br, mpfr_srcptr bi) {
        Big t(wide);
        mpfr_mul(t, ai, bi, MPFR_RNDN);
        Big re(wide);
        mpfr_mul(re, ar, br, MPFR_RNDN);
        mpfr_sub(re, re, t, MPFR_RNDN);
        mpfr_mul(t, ar, bi, MPFR_RNDN);
        mpfr_mul(oim, ai, br, MPFR_RNDN);
        mpfr_add(oim, oim, t, MPFR_RNDN);
        mpfr_set(ore, re.get(), MPFR_RNDN);
    };
    return {
        {"cadd", 2, -1e2, 1e2, [](const ComplexBall& a, const ComplexBall& b) { return a + b; },
         [](mpfr_ptr ore, mpfr_ptr oim, mpfr_srcptr ar, mpfr_srcptr ai, mpfr_srcptr br, mpfr_srcptr bi) {
             mpfr_add(ore, ar, br, MPFR_RNDN);
             mpfr_add(oim, ai, bi, MPFR_RNDN);
         }},
        {"cmul", 2, -1e2, 1e2, [](const ComplexBall& a, const ComplexBall& b) { return a * b; }, cmul},
        {"cinv", 1, 0.5, 1e2, [](const ComplexBall& a, const ComplexBall&) { return inv(a); },
         [wide](mpfr_ptr ore, mpfr_ptr oim, mpfr_srcptr ar, mpfr_srcptr ai, mpfr_srcptr, mpfr_srcptr) {
             Big d(wide);
             Big t(wide);
             mpfr_sqr(d, ar, MPFR_RNDN);
             mpfr_sqr(t, ai, MPFR_RNDN);
             mpfr_add(d, d, t, MPFR_RNDN);
             mpfr_div(ore, ar, d, MPFR_RNDN);
             mpfr_div(oim, ai, d, MPFR_RNDN);
             mpfr_neg(oim, oim, MPFR_RNDN);
         }},
        {"cexp", 1, -20, 20, [](const ComplexBall& a, const ComplexBall&) { return exp(a); },
         [wide](mpfr_ptr ore, mpfr_ptr oim, mpfr_srcptr ar, mpfr_srcptr ai, mpfr_srcptr, mpfr_srcptr) {
             Big e(wide);
             mpfr_exp(e, ar, MPFR_RNDN);
             mpfr_sin_cos(oim, ore, ai, MPFR_RNDN);
             mpfr_mul(ore, ore, e, MPFR_RNDN);
             mpfr_mul(oim, oim, e, MPFR_RNDN);
         }},
        {"clog", 1, 0.5, 1e2, [](const ComplexBall& a, const ComplexBall&) { return log(a, true); },
         [wide](mpfr_ptr ore, mpfr_ptr oim, mpfr_srcptr ar, mpfr_srcptr ai, mpfr_srcptr, mpfr_srcptr) {
             Big h(wide);
             mpfr_hypot(h, ar, ai, MPFR_RNDN);
             mpfr_log(ore, h, MPFR_RNDN);
             mpfr_atan2(oim, ai, ar, MPFR_RNDN);
         }},
    };
}

/// Every result ball must contain the oracle value of the operation at each
/// sampled member point. Domain errors raised by the ball layer are allowed
/// (no value claimed); any non-containing finite result is a violation.
inline SelftestItem inclusion_monotonicity(long cases, int members, int bits, std::uint64_t seed) {
    const int wide = 4 * bits;
    BallSampler s{std::mt19937_64(seed), bits};
    const auto rc = real_cases();
    const auto cc = complex_cases(wide);
    const std::size_t kinds = rc.size() + cc.size();
    long violations = 0;
    long refused = 0;
    std::string first;
    Big x(wide), y(wide), xi(wide), yi(wide), o(wide), oi(wide);
    for (long c = 0; c < cases; ++c) {
        const std::size_t k = static_cast<std::size_t>(c) % kinds;
        if (k < rc.size()) {
            const RealCase& op = rc[k];
            RealBall a = s.ball(op.lo, op.hi);
            RealBall b = s.ball(op.lo, op.hi);
            if (op.name == "div" && s.uniform(0, 1) < 0.5) b = -b;
            RealBall r;
            try {
                r = op.ball_op(a, b);
            } catch (const NumericalError&) {
                ++refused;
                continue;
            }
            for (int j = 0; j < members; ++j) {
                s.member(a, x, wide);
                s.member(b, y, wide);
                op.exact_op(o, x, y);
                if (!r.contains(o.get())) {
                    if (violations++ == 0) first = op.name + " " + a.to_string() + " " + b.to_string();
                    break;
                }
            }
        } else {
            const ComplexCase& op = cc[k - rc.size()];
            auto cball = [&] {
                RealBall re = s.ball(op.lo, op.hi);
                RealBall im = s.ball(op.lo, op.hi);
                if (s.uniform(0, 1) < 0.5) im = -im;
                if (op.name != "clog" && s.uniform(0, 1) < 0.5) re = -re;
                return ComplexBall(re, im);
            };
            const ComplexBall a = cball();
            const ComplexBall b = cball();
            ComplexBall r;
            try {
                r = op.ball_op(a, b);
            } catch (const NumericalError&) {
                ++refused;
                continue;
            }
            for (int j = 0; j < members; ++j) {
                s.member(a.real(), x, wide);
                s.member(a.imag(), xi, wide);
                s.member(b.real(), y, wide);
                s.member(b.imag(), yi, wide);
                op.exact_op(o, oi, x, xi, y, yi);
                if (!r.contains(o.get(), oi.get())) {
                    if (violations++ == 0) first = op.name + " " + a.to_string() + " " + b.to_string();
                    break;
                }
            }
        }
    }
    std::string detail = std::to_string(cases) + " cases x " + std::to_string(members) + " members, " +
                         std::to_string(violations) + " violations, " + std::to_string(refused) + " refused";
    if (!first.empty()) detail += "; first: " + first;
    return {"rigor-arith", "inclusion monotonicity", violations == 0 && refused < cases / 10, detail};
}

// --------------------------------------------- finite-difference oracle

/// Exact central-difference weights c_j, j = -p..p, for the n-th derivative
/// with second-order accuracy: sum_j c_j j^k = n! [k == n], k = 0..2p.
inline std::vector<mpq_class> central_weights(int n) {
    const int p = (n + 1) / 2;
    const int size = 2 * p + 1;
    std::vector<std::vector<mpq_class>> M(static_cast<std::size_t>(size), std::vector<mpq_class>(static_cast<std::size_t>(size) + 1));
    for (int k = 0; k < size; ++k) {
        for (int j = -p; j <= p; ++j) {
            mpq_class v = 1;
            for (int e = 0; e < k; ++e) v *= j;
            M[k][j + p] = v;
        }
        mpq_class rhs = 0;
        if (k == n) {
            rhs = 1;
            for (int e = 2; e <= n; ++e) rhs *= e;
        }
        M[k][size] = rhs;
    }
    for (int col = 0; col < size; ++col) {
        int piv = col;
        while (M[piv][col] == 0) ++piv;
        std::swap(M[piv], M[col]);
        for (int r = 0; r < size; ++r) {
            if (r == col || M[r][col] == 0) continue;
            const mpq_class f = M[r][col] / M[col][col];
            for (int c = col; c <= size; ++c) M[r][c] -= f * M[col][c];
        }
    }
    std::vector<mpq_class> w;
    for (int r = 0; r < size; ++r) w.push_back(M[r][size] / M[r][r]);
    return w;
}

/// Multiprecision mixture density, independent of the ball and float code.
struct OracleMixture {
    std::vector<std::pair<mpq_class, mpq_class>> atoms;
    int bits;

    void g(mpfr_ptr out, mpfr_srcptr x, mpfr_srcptr t) const {
        Big acc(bits), term(bits), norm(bits), y(bits);
        mpfr_const_pi(norm, MPFR_RNDN);
        mpfr_mul(norm, norm, t, MPFR_RNDN);
        mpfr_mul_ui(norm, norm, 4, MPFR_RNDN);
        mpfr_rec_sqrt(norm, norm, MPFR_RNDN);
        mpfr_set_zero(acc, 1);
        for (const auto& [a, w] : atoms) {
            mpfr_sub_q(y, x, a.get_mpq_t(), MPFR_RNDN);
            mpfr_sqr(y, y, MPFR_RNDN);
            mpfr_div(y, y, t, MPFR_RNDN);
            mpfr_div_ui(y, y, 4, MPFR_RNDN);
            mpfr_neg(y, y, MPFR_RNDN);
            mpfr_exp(term, y, MPFR_RNDN);
            mpfr_mul_q(term, term, w.get_mpq_t(), MPFR_RNDN);
            mpfr_add(acc, acc, term, MPFR_RNDN);
        }
        mpfr_mul(out, acc, norm, MPFR_RNDN);
    }
};

/// The three quantities differentiated in t.
enum class FdTarget { density, log_density, entropy_density };

/// n-th t-derivative of the target at (x, t) by central differences with
/// step h = 1e-5 t.
inline double fd_derivative(const OracleMixture& om, FdTarget what, double x, const mpq_class& t, int n) {
    const int bits = om.bits;
    const auto w = central_weights(n);
    const int p = (n + 1) / 2;
    Big X(bits), T(bits), h(bits), tj(bits), v(bits), lg(bits), acc(bits), c(bits);
    mpfr_set_d(X, x, MPFR_RNDN);
    mpfr_set_q(T, t.get_mpq_t(), MPFR_RNDN);
    mpfr_mul_d(h, T, 1e-5, MPFR_RNDN);
    mpfr_set_zero(acc, 1);
    for (int j = -p; j <= p; ++j) {
        mpfr_mul_si(tj, h, j, MPFR_RNDN);
        mpfr_add(tj, tj, T, MPFR_RNDN);
        om.g(v, X, tj);
        if (what != FdTarget::density) {
            mpfr_log(lg, v, MPFR_RNDN);
            if (what == FdTarget::log_density)
                mpfr_set(v, lg.get(), MPFR_RNDN);
            else
                mpfr_mul(v, v, lg, MPFR_RNDN);
        }
        mpfr_set_q(c, w[static_cast<std::size_t>(j + p)].get_mpq_t(), MPFR_RNDN);
        mpfr_mul(v, v, c, MPFR_RNDN);
        mpfr_add(acc, acc, v, MPFR_RNDN);
    }
    mpfr_pow_ui(h, h, static_cast<unsigned long>(n), MPFR_RNDN);
    mpfr_div(acc, acc, h, MPFR_RNDN);
    return mpfr_get_d(acc, MPFR_RNDN);
}

/// Relative agreement tolerance on the float path: 1e-3 up to n = 3, 1e-2 beyond.
inline double fd_tolerance(int n) { return n <= 3 ? 1e-3 : 1e-2; }

/// Float-path K_n, L_n and G against the multiprecision finite-difference
/// oracle at random points. Relative errors are measured against
/// max(|oracle|, 1e-8 * max over the sample of |oracle|) so that isolated
/// zero crossings do not turn into spurious relative blow-ups.
inline std::vector<SelftestItem> finite_difference_agreement(int points, std::uint64_t seed) {
    struct Instance {
        std::string name;
        AtomicMeasure mu;
        mpq_class t;
    };
    const std::vector<Instance> instances = {
        {"built-in measure", paper_measure(), mpq_class(1, 3)},
        {"two atoms", AtomicMeasure::validate({{Rational(-1, 2), Rational(3, 10)}, {Rational(7, 4), Rational(7, 10)}}),
         mpq_class(1, 2)},
    };
    const int m = 5;
    std::mt19937_64 rng(seed);
    double worst[3][6] = {};
    long checks = 0;
    for (const auto& inst : instances) {
        OracleMixture om{{}, 512};
        for (const auto& a : inst.mu.atoms()) om.atoms.emplace_back(a.location.get(), a.weight.get());
        const FloatMixture fm(inst.mu, inst.t.get_d(), m);
        const double R = inst.mu.support_radius().to_double();
        std::vector<double> xs;
        for (int i = 0; i < points; ++i) xs.push_back(std::uniform_real_distribution<double>(-R - 3, R + 3)(rng));

        // values[target][n][point]
        std::vector<std::vector<std::vector<std::pair<double, double>>>> vals(3, std::vector<std::vector<std::pair<double, double>>>(m + 1));
        for (const double x : xs) {
            const FloatStacks st = fm.stacks(x);
            Big X(512), T(512), g(512);
            mpfr_set_d(X, x, MPFR_RNDN);
            mpfr_set_q(T, inst.t.get_mpq_t(), MPFR_RNDN);
            om.g(g, X, T);
            const double g0 = mpfr_get_d(g, MPFR_RNDN);
            for (int n = 1; n <= m; ++n) {
                vals[0][n].emplace_back(st.K[n], fd_derivative(om, FdTarget::density, x, inst.t, n) / g0);
                vals[1][n].emplace_back(st.L[n], fd_derivative(om, FdTarget::log_density, x, inst.t, n));
            }
            vals[2][m].emplace_back(st.G, fd_derivative(om, FdTarget::entropy_density, x, inst.t, m));
        }
        for (int target = 0; target < 3; ++target) {
            for (int n = 1; n <= m; ++n) {
                const auto& v = vals[target][n];
                if (v.empty()) continue;
                double scale = 0;
                for (const auto& [fp, fd] : v) scale = std::max(scale, std::fabs(fd));
                for (const auto& [fp, fd] : v) {
                    const double rel = std::fabs(fp - fd) / std::max(std::fabs(fd), 1e-8 * scale);
                    worst[target][n] = std::max(worst[target][n], std::isfinite(rel) ? rel : INFINITY);
                    ++checks;
                }
            }
        }
    }
    std::vector<SelftestItem> out;
    const char* names[3] = {"K_n", "L_n", "G"};
    for (int target = 0; target < 3; ++target) {
        bool ok = true;
        std::string detail;
        for (int n = 1; n <= m; ++n) {
            if (target == 2 && n != m) continue;
            ok = ok && worst[target][n] <= fd_tolerance(n);
            char buf[64];
            std::snprintf(buf, sizeof buf, "n=%d max rel %.2e; ", n, worst[target][n]);
            detail += buf;
        }
        out.push_back({"mixture-entropy", std::string("finite-difference agreement of ") + names[target], ok, detail});
    }
    (void)checks;
    return out;
}

// ------------------------------------------------------ quadrature suite

/// p(x) exp(-s (x - c)^2) with rational data.
struct PolyGaussian {
    std::vector<Rational> coeffs;
    Rational c;
    Rational s;
    Precision prec;

    template <class T>
    T eval(const T& x) const {
        T acc(prec);
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + T(RealBall::from_rational(*it, prec));
        const T y = x - T(RealBall::from_rational(c, prec));
        return acc * exp(-(sqr(y) * RealBall::from_rational(s, prec)));
    }
    RealBall operator()(const RealBall& x) const { return eval(x); }
    ComplexBall operator()(const ComplexBall& x) const { return eval(x); }
};

/// Polynomial with rational coefficients.
struct Poly {
    std::vector<Rational> coeffs;
    Precision prec;

    template <class T>
    T eval(const T& x) const {
        T acc(prec);
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + T(RealBall::from_rational(*it, prec));
        return acc;
    }
    RealBall operator()(const RealBall& x) const { return eval(x); }
    ComplexBall operator()(const ComplexBall& x) const { return eval(x); }

    [[nodiscard]] Rational integral(const Rational& a, const Rational& b) const {
        Rational acc(0);
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            Rational pa(1);
            Rational pb(1);
            for (std::size_t e = 0; e <= k; ++e) {
                pa = pa * a;
                pb = pb * b;
            }
            acc += coeffs[k] * (pb - pa) / Rational(static_cast<long>(k) + 1);
        }
        return acc;
    }
};

/// log(x - 1/2): not real-analytic on [0, 1].
struct ShiftedLog {
    Precision prec;
    RealBall operator()(const RealBall& x) const { return log(x - RealBall::from_rational(Rational(1, 2), prec)); }
    ComplexBall operator()(const ComplexBall& x) const {
        return log(x - ComplexBall(RealBall::from_rational(Rational(1, 2), prec)), true);
    }
};

inline std::vector<SelftestItem> quadrature_properties(int integrands, int bits, std::uint64_t seed) {
    const Precision p(bits);
    std::mt19937_64 rng(seed);
    auto rint = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
    auto rrat = [&](long span, long den) { return Rational(rint(-span, span), den); };
    auto random_pg = [&] {
        PolyGaussian f{{}, rrat(8, 4), Rational(rint(1, 8), 4), p};
        const long deg = rint(0, 6);
        for (long k = 0; k <= deg; ++k) f.coeffs.push_back(rrat(20, 7));
        return f;
    };
    std::vector<SelftestItem> out;

    int refinement_bad = 0;
    int additivity_bad = 0;
    for (int i = 0; i < integrands; ++i) {
        const PolyGaussian f = random_pg();
        const Rational a = rrat(12, 4) - Rational(4);
        const Rational b = a + Rational(rint(1, 24), 4);
        const QuadratureRequest small{a, b, 1e-40, 0, 4, p};
        const QuadratureRequest big{a, b, 1e-40, 0, 16, p};
        const Enclosure e1 = enclose_integral(f, small);
        const Enclosure e4 = enclose_integral(f, big);
        if (!e1.value.overlaps(e4.value) || e1.value.rad() < e4.value.rad()) ++refinement_bad;

        const Rational c = a + (b - a) * Rational(rint(1, 99), 100);
        const QuadratureRequest whole{a, b, 1e-30, 0, 200000, p};
        const QuadratureRequest left{a, c, 1e-30, 0, 200000, p};
        const QuadratureRequest right{c, b, 1e-30, 0, 200000, p};
        const Enclosure w = enclose_integral(f, whole);
        const RealBall parts = enclose_integral(f, left).value + enclose_integral(f, right).value;
        if (w.status != QuadratureStatus::converged || !w.value.overlaps(parts)) ++additivity_bad;
    }
    out.push_back({"quadrature", "containment under refinement (budget B vs 4B)", refinement_bad == 0,
                   std::to_string(integrands) + " integrands, " + std::to_string(refinement_bad) + " failures"});
    out.push_back({"quadrature", "additivity over a random split point", additivity_bad == 0,
                   std::to_string(integrands) + " integrands, " + std::to_string(additivity_bad) + " failures"});

    // Degree 2n - 1 on one segment: the Gauss sum itself is exact up to rounding.
    int exact_bad = 0;
    for (const int n : kGaussOrders) {
        Poly f{{}, p};
        for (int k = 0; k < 2 * n; ++k) f.coeffs.push_back(rrat(9, 5));
        const Rational a = rrat(4, 2);
        const Rational b = a + Rational(rint(1, 6), 2);
        const auto rule = legendre_rule(n, p);
        const RealBall sum = gauss_sum(f, a, b, *rule, p);
        const RealBall seg = gl_segment(f, a, b, *rule, p);
        const Rational exact = f.integral(a, b);
        // The Gauss sum must hit the exact value to within its own rounding
        // radius; the segment (sum plus truncation term) must contain it.
        if (!sum.contains(exact) || !seg.contains(exact)) ++exact_bad;
    }
    out.push_back({"quadrature", "polynomial exactness of degree 2n-1 on one segment", exact_bad == 0,
                   std::to_string(exact_bad) + " failures over n in {8,16,32,64,128}"});

    int oracle_bad = 0;
    for (int k = 0; k <= 12; ++k) {
        Poly f{std::vector<Rational>(static_cast<std::size_t>(k) + 1, Rational(0)), p};
        f.coeffs.back() = Rational(1);
        const Enclosure e = enclose_integral(f, QuadratureRequest{Rational(0), Rational(1), 1e-20, 0, 200000, p});
        if (e.status != QuadratureStatus::converged || !e.value.contains(Rational(1, k + 1))) ++oracle_bad;
    }
    out.push_back({"quadrature", "int_0^1 x^k contains 1/(k+1), k <= 12", oracle_bad == 0,
                   std::to_string(oracle_bad) + " failures"});

    const Enclosure lg = enclose_integral(ShiftedLog{p}, QuadratureRequest{Rational(0), Rational(1), 1e-30, 1e-30, 200000, p});
    const bool silent = lg.status == QuadratureStatus::converged && lg.value.is_finite();
    out.push_back({"quadrature", "log(x - 1/2) on [0, 1] is never reported converged", !silent,
                   std::string("status ") + to_string(lg.status)});
    return out;
}

// ----------------------------------------------- certificate re-check

inline SelftestItem certificate_reverification(int bits, unsigned threads) {
    const Certificate c = certify(paper_measure(), EvaluationContext(Rational(1, 3), 5, Precision(bits)), paper_plan(),
                                  CertifyOptions{threads, 200000});
    const json doc = json::parse(certificate_to_json(c).dump());
    const CertificateRecord rec = certificate_from_json(doc);
    const Precision hi = Precision(bits).scaled(3, 2);
    const RecordRecheck r = recheck_record(rec, hi, threads);
    const std::string detail = std::string("verdict ") + to_string(c.verdict) + " at " + std::to_string(bits) +
                               " bits, " + to_string(r.recomputed.verdict) + " at " + std::to_string(hi.bits()) +
                               " bits; stored sums consistent: " + (r.consistent ? "yes" : "no") +
                               "; totals intersect: " + (r.totals_intersect ? "yes" : "no");
    return {"certifier", "certificate re-verification at 1.5x precision", r.ok(), detail};
}

}  // namespace selftest

/// Runs every property suite and returns one item per property.
inline std::vector<SelftestItem> run_selftest(const SelftestOptions& o) {
    std::vector<SelftestItem> out;
    out.push_back(selftest::inclusion_monotonicity(o.monotonicity_cases, o.members, o.bits, o.seed));
    for (auto& item : selftest::finite_difference_agreement(o.fd_points, o.seed + 1)) out.push_back(std::move(item));
    for (auto& item : selftest::quadrature_properties(o.quad_integrands, o.bits, o.seed + 2)) out.push_back(std::move(item));
    if (o.certificate) out.push_back(selftest::certificate_reverification(o.bits, o.threads));
    return out;
}

}  // namespace gcm
