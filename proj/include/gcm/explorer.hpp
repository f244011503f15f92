#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gcm/certifier.hpp"
#include "gcm/measure.hpp"

namespace gcm {

/// The float path produced a non-finite value.
class NumericalBreakdown : public std::runtime_error {
public:
    explicit NumericalBreakdown(const std::string& what) : std::runtime_error("float evaluation broke down: " + what) {}
};

/// Float evaluation of the mixture and its time derivatives at one point.
struct FloatStacks {
    double g = 0;
    double log_g = 0;
    std::vector<double> K;
    std::vector<double> L;
    double G = 0;
};

/// Double-precision twin of MixtureModel, with log-domain posterior weights.
class FloatMixture {
public:
    FloatMixture(const AtomicMeasure& mu, double t, int m) : t_(t), m_(m) {
        if (!(t > 0)) throw InputError("t must be positive");
        if (m < 1 || m > 40) throw InputError("derivative order must lie in [1, 40]");
        for (const auto& a : mu.atoms()) {
            a_.push_back(a.location.to_double());
            log_w_.push_back(std::log(a.weight.to_double()));
        }
        log_norm_ = -0.5 * std::log(4 * std::numbers::pi * t);
        R_ = mu.support_radius().to_double();
        symmetric_ = mu.is_symmetric();
    }

    [[nodiscard]] double time() const { return t_; }
    [[nodiscard]] int order() const { return m_; }
    [[nodiscard]] double support_radius() const { return R_; }
    [[nodiscard]] bool symmetric() const { return symmetric_; }

    [[nodiscard]] FloatStacks stacks(double x) const {
        const std::size_t n = a_.size();
        std::vector<double> lr(n);
        double lmax = -INFINITY;
        for (std::size_t i = 0; i < n; ++i) {
            const double y = x - a_[i];
            lr[i] = log_w_[i] + log_norm_ - y * y / (4 * t_);
            lmax = std::max(lmax, lr[i]);
        }
        double s = 0;
        for (const double v : lr) s += std::exp(v - lmax);
        FloatStacks out;
        out.log_g = lmax + std::log(s);
        out.g = std::exp(out.log_g);

        out.K.assign(static_cast<std::size_t>(m_) + 1, 0.0);
        out.K[0] = 1;
        std::vector<double> h(2 * static_cast<std::size_t>(m_) + 1);
        const double inv2s = 1 / (2 * std::sqrt(t_));
        for (std::size_t i = 0; i < n; ++i) {
            const double pi = std::exp(lr[i] - out.log_g);
            const double z = (x - a_[i]) * inv2s;
            h[0] = 1;
            if (h.size() > 1) h[1] = 2 * z;
            for (std::size_t k = 1; k + 1 < h.size(); ++k) h[k + 1] = 2 * z * h[k] - 2 * static_cast<double>(k) * h[k - 1];
            for (int k = 1; k <= m_; ++k) out.K[k] += pi * h[2 * static_cast<std::size_t>(k)];
        }
        double scale = 1;
        for (int k = 1; k <= m_; ++k) {
            scale /= 4 * t_;
            out.K[k] *= scale;
        }
        out.L.assign(out.K.size(), 0.0);
        out.L[0] = out.log_g;
        for (int k = 1; k <= m_; ++k) {
            double v = out.K[k];
            for (int r = 1; r < k; ++r) v -= static_cast<double>(binomial(k - 1, r - 1)) * out.L[r] * out.K[k - r];
            out.L[k] = v;
        }
        double q = 0;
        for (int r = 0; r <= m_; ++r) q += static_cast<double>(binomial(m_, r)) * out.K[r] * out.L[m_ - r];
        out.G = out.g * q;
        return out;
    }

    [[nodiscard]] double integrand(double x) const { return stacks(x).G; }
    [[nodiscard]] double density(double x) const { return stacks(x).g; }

private:
    double t_;
    int m_;
    std::vector<double> a_;
    std::vector<double> log_w_;
    double log_norm_ = 0;
    double R_ = 0;
    bool symmetric_ = false;
};

struct FpEstimate {
    double value = 0;
    double est_error = 0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
inline constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                               0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                               0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                               0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                               0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                               0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                               0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                              0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GkResult {
    double value;
    double error;
};

template <class F>
GkResult gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[static_cast<std::size_t>(j)];
        const double s = f(c - dx) + f(c + dx);
        kron += kWgk[static_cast<std::size_t>(j)] * s;
        if (j % 2 == 1) gauss += kWg[static_cast<std::size_t>(j / 2)] * s;
    }
    return {kron * h, std::fabs((kron - gauss) * h)};
}

template <class F>
GkResult adaptive_gk(const F& f, double a, double b, double tol, int depth) {
    const GkResult whole = gk15(f, a, b);
    if (whole.error <= tol || depth <= 0) return whole;
    const double mid = 0.5 * (a + b);
    const GkResult l = adaptive_gk(f, a, mid, tol / 2, depth - 1);
    const GkResult r = adaptive_gk(f, mid, b, tol / 2, depth - 1);
    return {l.value + r.value, l.error + r.error};
}

}  // namespace detail

/// Non-rigorous estimate of H^(m)_mu(t): adaptive Gauss-Kronrod on panels of
/// width sqrt(t)/2 over [-X, X] (or [0, X] doubled for symmetric measures),
/// X = R + 20 sqrt(t), targeting an absolute error `tol`.
inline FpEstimate derivative_fp(const FloatMixture& fm, double tol = 1e-6) {
    const double st = std::sqrt(fm.time());
    const double X = fm.support_radius() + 20 * st;
    const double lo = fm.symmetric() ? 0.0 : -X;
    const double factor = fm.symmetric() ? 2.0 : 1.0;
    const int panels = std::max(1, static_cast<int>(std::ceil((X - lo) / (0.5 * st))));
    const double w = (X - lo) / panels;
    FpEstimate out;
    auto f = [&](double x) { return fm.integrand(x); };
    for (int k = 0; k < panels; ++k) {
        const auto r = detail::adaptive_gk(f, lo + k * w, lo + (k + 1) * w, tol / (factor * panels), 12);
        out.value += factor * r.value;
        out.est_error += factor * r.error;
    }
    if (!std::isfinite(out.value) || !std::isfinite(out.est_error))
        throw NumericalBreakdown("H^(" + std::to_string(fm.order()) + ") at t = " + std::to_string(fm.time()));
    return out;
}

inline FpEstimate derivative_fp(const AtomicMeasure& mu, double t, int m, double tol = 1e-6) {
    return derivative_fp(FloatMixture(mu, t, m), tol);
}

// -------------------------------------------------------------------- scan

struct ScanResult {
    std::vector<double> t_grid;
    std::vector<double> values;
    std::vector<double> est_error;
    std::size_t argmax = 0;
    std::vector<std::pair<double, double>> sign_changes;  // brackets [t_k, t_{k+1}]
};

inline ScanResult scan(const AtomicMeasure& mu, double t_lo, double t_hi, int steps, int m, bool geometric = false,
                       unsigned threads = 1) {
    if (!(t_lo > 0) || !(t_lo < t_hi)) throw InputError("scan needs 0 < t_lo < t_hi");
    if (steps < 2) throw InputError("scan needs at least 2 steps");
    ScanResult r;
    for (int k = 0; k < steps; ++k) {
        const double s = static_cast<double>(k) / (steps - 1);
        r.t_grid.push_back(geometric ? t_lo * std::pow(t_hi / t_lo, s) : t_lo + s * (t_hi - t_lo));
    }
    r.t_grid.back() = t_hi;
    r.values.resize(r.t_grid.size());
    r.est_error.resize(r.t_grid.size());
    parallel_for(r.t_grid.size(), resolve_threads(threads), [&](std::size_t k) {
        const FpEstimate e = derivative_fp(mu, r.t_grid[k], m);
        r.values[k] = e.value;
        r.est_error[k] = e.est_error;
    });
    r.argmax = static_cast<std::size_t>(std::max_element(r.values.begin(), r.values.end()) - r.values.begin());
    for (std::size_t k = 1; k < r.values.size(); ++k)
        if ((r.values[k - 1] < 0) != (r.values[k] < 0)) r.sign_changes.emplace_back(r.t_grid[k - 1], r.t_grid[k]);
    return r;
}

inline std::string scan_csv(const ScanResult& r) {
    std::string out = "t,value,est_error\n";
    char line[128];
    for (std::size_t k = 0; k < r.t_grid.size(); ++k) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.3e\n", r.t_grid[k], r.values[k], r.est_error[k]);
        out += line;
    }
    return out;
}

// ------------------------------------------------------------------ search

/// Symmetric family w_0 delta_0 + sum_j c_j (delta_{offset+j} + delta_{-(offset+j)}).
struct SearchConfig {
    Rational offset = Rational(9, 5);
    std::vector<double> start_pairs;  // empty: the built-in weights
    double start_center = -1;         // negative: the built-in center weight
    double perturb = 0;               // relative start perturbation, e.g. 0.1
    double t_lo = 0.25;
    double t_hi = 0.45;
    int t_grid = 17;
    int m = 5;
    int iterations = 500;
    int starts = 1;
    std::uint64_t seed = 1;
    double step = 0.1;   // initial log-scale move size
    long denominator = 1000;
    double objective_tol = 1e-5;
    unsigned threads = 0;

    void validate() const {
        if (!(t_lo > 0) || !(t_lo < t_hi)) throw InputError("search needs 0 < t_lo < t_hi");
        if (t_grid < 3) throw InputError("search needs a t grid of at least 3 points");
        if (m < 1 || m > 40) throw InputError("derivative order must lie in [1, 40]");
        if (iterations < 0 || starts < 1) throw InputError("iterations must be >= 0 and starts >= 1");
        if (!(perturb >= 0 && perturb < 1)) throw InputError("perturbation must lie in [0, 1)");
        if (!(step > 0)) throw InputError("step must be positive");
        if (denominator < 2) throw InputError("denominator must be at least 2");
        if (offset.sign() <= 0) throw InputError("pair offset must be positive");
    }

    [[nodiscard]] std::vector<double> pairs() const {
        if (!start_pairs.empty() || start_center >= 0) return start_pairs;
        std::vector<double> c;
        for (const long v : kPaperPairWeights) c.push_back(static_cast<double>(v) / 1000);
        return c;
    }
    [[nodiscard]] double center() const {
        if (start_center >= 0) return start_center;
        return start_pairs.empty() ? static_cast<double>(kPaperCenterWeight) / 1000 : 0.0;
    }
};

struct SearchResult {
    AtomicMeasure measure;
    double best_t = 0;
    double objective = 0;
    bool improved = false;
};

namespace detail {

/// Float weights (center, pairs) on the simplex w_0 + 2 sum c_j = 1.
struct FamilyPoint {
    double center = 0;
    std::vector<double> pairs;

    void normalize() {
        double s = center;
        for (const double c : pairs) s += 2 * c;
        center /= s;
        for (double& c : pairs) c /= s;
    }
};

inline AtomicMeasure family_measure_fp(const Rational& offset, const FamilyPoint& p, long den) {
    // Exact measure with weights rounded to 1/den, center absorbing the residual.
    std::vector<long> q;
    long used = 0;
    for (const double c : p.pairs) {
        q.push_back(std::max(1L, std::lround(c * static_cast<double>(den))));
        used += 2 * q.back();
    }
    while (den - used < 1) {
        auto it = std::max_element(q.begin(), q.end());
        if (it == q.end() || *it <= 1) throw InputError("cannot rationalize: denominator too small for the family");
        --*it;
        used -= 2;
    }
    std::vector<Atom> atoms{{Rational(0), Rational(den - used, den)}};
    for (std::size_t j = 0; j < q.size(); ++j) {
        const Rational a = offset + Rational(static_cast<long>(j));
        atoms.push_back({a, Rational(q[j], den)});
        atoms.push_back({-a, Rational(q[j], den)});
    }
    return AtomicMeasure::validate(std::move(atoms));
}

inline AtomicMeasure family_measure_exactish(const Rational& offset, const FamilyPoint& p) {
    // Float weights as exact rationals over 2^40, for objective evaluation.
    return family_measure_fp(offset, p, 1L << 40);
}

}  // namespace detail

/// max over t in [t_lo, t_hi] of H^(m)(t): geometric grid, then golden
/// section on the bracket around the best grid point.
inline std::pair<double, double> objective_max_t(const AtomicMeasure& mu, const SearchConfig& cfg) {
    std::vector<double> ts;
    std::vector<double> vs;
    for (int k = 0; k < cfg.t_grid; ++k) {
        const double t = cfg.t_lo * std::pow(cfg.t_hi / cfg.t_lo, static_cast<double>(k) / (cfg.t_grid - 1));
        ts.push_back(t);
        vs.push_back(derivative_fp(mu, t, cfg.m, cfg.objective_tol).value);
    }
    // Prefer the best interior local maximum: a boundary maximum only says the
    // peak lies outside the window.
    std::size_t k = static_cast<std::size_t>(std::max_element(vs.begin(), vs.end()) - vs.begin());
    bool interior = false;
    for (std::size_t i = 1; i + 1 < vs.size(); ++i) {
        if (vs[i] >= vs[i - 1] && vs[i] >= vs[i + 1] && (!interior || vs[i] > vs[k])) {
            k = i;
            interior = true;
        }
    }
    double lo = ts[k == 0 ? 0 : k - 1];
    double hi = ts[std::min(k + 1, ts.size() - 1)];
    double best_t = ts[k];
    double best_v = vs[k];
    const double phi = (std::sqrt(5.0) - 1) / 2;
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = derivative_fp(mu, x1, cfg.m, cfg.objective_tol).value;
    double f2 = derivative_fp(mu, x2, cfg.m, cfg.objective_tol).value;
    for (int it = 0; it < 12; ++it) {
        if (f1 > f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = derivative_fp(mu, x1, cfg.m, cfg.objective_tol).value;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = derivative_fp(mu, x2, cfg.m, cfg.objective_tol).value;
        }
    }
    for (const auto& [t, v] : {std::pair{x1, f1}, std::pair{x2, f2}})
        if (v > best_v) {
            best_v = v;
            best_t = t;
        }
    return {best_t, best_v};
}

/// Perturb-project-accept local search with independent seeded starts.
/// Each start runs cfg.iterations proposals.
/// Results are sorted by objective, ties by canonical measure text.
inline std::vector<SearchResult> search(const SearchConfig& cfg) {
    cfg.validate();
    detail::FamilyPoint base{cfg.center(), cfg.pairs()};
    if (base.center < 0 || std::any_of(base.pairs.begin(), base.pairs.end(), [](double c) { return !(c > 0); }))
        throw InputError("start weights must be positive");
    if (base.center == 0 && base.pairs.empty()) throw InputError("search family is empty");
    base.normalize();

    std::vector<SearchResult> results(static_cast<std::size_t>(cfg.starts), SearchResult{dirac_measure()});
    parallel_for(results.size(), resolve_threads(cfg.threads), [&](std::size_t s) {
        std::mt19937_64 rng(cfg.seed + 0x9e3779b97f4a7c15ULL * s);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);

        detail::FamilyPoint cur = base;
        if (cfg.perturb > 0) {
            cur.center *= 1 + cfg.perturb * unit(rng);
            for (double& c : cur.pairs) c *= 1 + cfg.perturb * unit(rng);
            cur.normalize();
        }
        auto score = [&](const detail::FamilyPoint& p) { return objective_max_t(detail::family_measure_exactish(cfg.offset, p), cfg); };
        auto [best_t, best_v] = score(cur);
        const double start_v = best_v;
        // (1+1) evolution strategy in log-weights: every coordinate moves by
        // step * N(0, 1) / sqrt(d), step adapted by the one-fifth success rule.
        double step = cfg.step;
        const double scale = 1 / std::sqrt(static_cast<double>(cur.pairs.size() + 1));
        for (int it = 0; it < cfg.iterations; ++it) {
            detail::FamilyPoint cand = cur;
            cand.center *= std::exp(step * scale * gauss(rng));
            for (double& c : cand.pairs) c *= std::exp(step * scale * gauss(rng));
            cand.normalize();
            const auto [t, v] = score(cand);
            if (v > best_v) {
                cur = std::move(cand);
                best_v = v;
                best_t = t;
                step = std::min(1.0, step * 1.5);
            } else {
                step = std::max(1e-3, step * std::pow(1.5, -0.25));
            }
        }
        AtomicMeasure rational = detail::family_measure_fp(cfg.offset, cur, cfg.denominator);
        const auto [rt, rv] = objective_max_t(rational, cfg);
        results[s] = SearchResult{rational, rt, rv, best_v > start_v};
    });
    std::sort(results.begin(), results.end(), [](const SearchResult& a, const SearchResult& b) {
        if (a.objective != b.objective) return a.objective > b.objective;
        return a.measure.canonical_string() < b.measure.canonical_string();
    });
    return results;
}

}  // namespace gcm
