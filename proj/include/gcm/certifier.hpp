#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "gcm/mixture.hpp"
#include "gcm/quadrature/integrate.hpp"
#include "gcm/tail.hpp"

#ifndef GCM_VERSION
#define GCM_VERSION "1.0.0"
#endif

namespace gcm {

inline constexpr const char* kToolVersion = GCM_VERSION;

class AsymmetricMeasureWithHalfPlan : public InputError {
public:
    AsymmetricMeasureWithHalfPlan()
        : InputError("half-line block plan requires a symmetric measure; use a plan covering [-X, X]") {}
};

struct Interval {
    Rational a;
    Rational b;
};

/// Ordered contiguous blocks covering [0, X] (half_line) or [-X, X].
struct BlockPlan {
    std::vector<Interval> blocks;
    double per_block_tol = 1e-30;
    Rational X;
    bool half_line = true;

    void validate() const {
        if (blocks.empty()) throw InputError("block plan is empty");
        if (!(per_block_tol > 0)) throw InputError("per-block tolerance must be positive");
        const Rational start = half_line ? Rational(0) : -X;
        if (blocks.front().a != start) throw InputError("block plan must start at " + start.to_string());
        if (blocks.back().b != X) throw InputError("block plan must end at X = " + X.to_string());
        for (std::size_t k = 0; k < blocks.size(); ++k) {
            if (!(blocks[k].a < blocks[k].b)) throw InputError("block " + std::to_string(k) + " is empty or reversed");
            if (k > 0 && blocks[k].a != blocks[k - 1].b) throw InputError("block plan is not contiguous at block " + std::to_string(k));
        }
    }

    /// Breakpoints a_1, ..., a_n, X.
    [[nodiscard]] std::vector<Rational> breakpoints() const {
        std::vector<Rational> out;
        for (const auto& b : blocks) out.push_back(b.a);
        out.push_back(blocks.back().b);
        return out;
    }
};

/// Plan from explicit breakpoints (first and last give the covered range).
inline BlockPlan explicit_plan(const std::vector<Rational>& points, bool half_line, double tol = 1e-30) {
    if (points.size() < 2) throw InputError("an explicit plan needs at least two breakpoints");
    BlockPlan plan;
    plan.per_block_tol = tol;
    plan.half_line = half_line;
    plan.X = points.back();
    for (std::size_t i = 0; i + 1 < points.size(); ++i) plan.blocks.push_back({points[i], points[i + 1]});
    plan.validate();
    return plan;
}

/// The 22 blocks of the published table: width 1/2 up to 9, then [9,10],
/// [10,12], [12,15], [15,25].
inline BlockPlan paper_plan(double tol = 1e-30) {
    std::vector<Rational> pts;
    for (long k = 0; k <= 18; ++k) pts.push_back(Rational(k, 2));
    for (const long v : {10L, 12L, 15L, 25L}) pts.push_back(Rational(v));
    return explicit_plan(pts, true, tol);
}

/// Blocks of equal width (the last one may be shorter).
inline BlockPlan uniform_plan(const Rational& width, const Rational& X, bool half_line, double tol = 1e-30) {
    if (width.sign() <= 0) throw InputError("uniform block width must be positive");
    if (X.sign() <= 0) throw InputError("cutoff X must be positive");
    std::vector<Rational> pts;
    Rational p = half_line ? Rational(0) : -X;
    while (p < X) {
        pts.push_back(p);
        p += width;
    }
    pts.push_back(X);
    return explicit_plan(pts, half_line, tol);
}

/// Mirror a half-line plan to one covering [-X, X].
inline BlockPlan full_line(const BlockPlan& plan) {
    if (!plan.half_line) return plan;
    std::vector<Rational> pts;
    const auto half = plan.breakpoints();
    for (auto it = half.rbegin(); it != half.rend(); ++it)
        if (it->sign() != 0) pts.push_back(-*it);
    pts.insert(pts.end(), half.begin(), half.end());
    return explicit_plan(pts, false, plan.per_block_tol);
}

enum class Verdict { certified_positive, certified_negative, indeterminate };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::certified_positive: return "certified_positive";
        case Verdict::certified_negative: return "certified_negative";
        default: return "indeterminate";
    }
}

inline Verdict verdict_from_string(const std::string& s) {
    if (s == "certified_positive") return Verdict::certified_positive;
    if (s == "certified_negative") return Verdict::certified_negative;
    if (s == "indeterminate") return Verdict::indeterminate;
    throw InputError("unknown verdict '" + s + "'");
}

/// Exit code for a verdict: 0 positive, 1 negative, 2 indeterminate.
inline int exit_code(Verdict v) {
    switch (v) {
        case Verdict::certified_positive: return 0;
        case Verdict::certified_negative: return 1;
        default: return 2;
    }
}

struct BlockResult {
    Interval interval;
    RealBall enclosure;  // 2 int_I G on a half-line plan, int_I G otherwise
    QuadratureStatus status = QuadratureStatus::tolerance_not_met;
    long evaluations = 0;
};

struct Certificate {
    AtomicMeasure measure;
    Rational t;
    int m = 0;
    int precision_bits = 0;
    BlockPlan plan;
    long budget = 0;
    std::vector<BlockResult> blocks;
    TailReport tail;                // right tail
    std::vector<TailReport> extra;  // left tail for full-line plans
    RealBall tail_total;            // bound on everything outside the plan
    RealBall total;
    Verdict verdict = Verdict::indeterminate;
    std::string tool_version = kToolVersion;

    [[nodiscard]] bool all_converged() const {
        return std::all_of(blocks.begin(), blocks.end(),
                           [](const BlockResult& b) { return b.status == QuadratureStatus::converged; });
    }
};

struct CertifyOptions {
    unsigned threads = 0;  // 0: hardware concurrency
    long budget = 200000;  // per block
};

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs job(i) for i in [0, n) on up to `threads` workers. The first
/// exception (lowest index) is rethrown after all workers join.
template <class Job>
void parallel_for(std::size_t n, unsigned threads, Job job) {
    const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Verdict rule: a sign is certified only when every block converged and the
/// total excludes zero.
inline Verdict decide(const RealBall& total, bool converged) {
    if (!converged || !total.is_finite()) return Verdict::indeterminate;
    if (total.is_positive()) return Verdict::certified_positive;
    if (total.is_negative()) return Verdict::certified_negative;
    return Verdict::indeterminate;
}

/// Rigorous enclosure of H^(m)_mu(t) = int G over the plan plus the analytic
/// tail bound outside it.
inline Certificate certify(const AtomicMeasure& mu, const EvaluationContext& ctx, const BlockPlan& plan,
                           const CertifyOptions& opts = {}) {
    plan.validate();
    if (plan.half_line && !mu.is_symmetric()) throw AsymmetricMeasureWithHalfPlan();
    if (opts.budget < 1) throw InputError("quadrature budget must be at least 1");

    Certificate cert{mu, ctx.t, ctx.m, ctx.prec.bits(), plan, opts.budget, {}, {}, {}, RealBall(ctx.prec),
                     RealBall(ctx.prec)};

    // Tails first: a failed premise aborts before any quadrature.
    cert.tail = tail_bound(tail_constants(mu, ctx, plan.X), ctx);
    if (plan.half_line) {
        cert.tail_total = cert.tail.bound;
    } else {
        cert.extra.push_back(tail_bound(tail_constants(mu.reflected(), ctx, plan.X), ctx));
        cert.tail_total = detail::upper_point((cert.tail.bound + cert.extra.front().bound) / 2L);
    }

    const MixtureModel model(mu, ctx);
    const EntropyDerivativeIntegrand f{&model};
    const double tol = plan.half_line ? plan.per_block_tol / 2 : plan.per_block_tol;
    cert.blocks.resize(plan.blocks.size(), BlockResult{{}, RealBall(ctx.prec)});
    parallel_for(plan.blocks.size(), resolve_threads(opts.threads), [&](std::size_t k) {
        const Interval& iv = plan.blocks[k];
        const QuadratureRequest req{iv.a, iv.b, tol, tol, opts.budget, ctx.prec};
        Enclosure e = enclose_integral(f, req);
        BlockResult r{iv, plan.half_line ? e.value * 2L : e.value, e.status, e.evaluations};
        if (r.status == QuadratureStatus::converged && !(r.enclosure.rad_double() <= plan.per_block_tol))
            r.status = QuadratureStatus::tolerance_not_met;
        cert.blocks[k] = std::move(r);
    });

    for (const auto& b : cert.blocks) cert.total += b.enclosure;
    cert.total.add_error(cert.tail_total.mag_upper());
    cert.verdict = decide(cert.total, cert.all_converged());
    return cert;
}

/// Published block midpoints M_I, four decimals.
inline const std::array<const char*, 22>& paper_table_mids() {
    static const std::array<const char*, 22> mids = {
        "161.9975", "-219.0117", "73.0107",  "1.8755",  "-49.7406", "78.9371", "-92.4682", "90.8184",
        "-79.1908", "58.8918",   "-30.2433", "-3.3394", "29.4837",  "-45.4866", "50.1159", "-43.9915",
        "29.8270",  "-14.0523",  "5.7303",   "-3.1009", "0.3030",   "-0.0000"};
    return mids;
}

struct TableRow {
    Interval interval;
    BlockResult result;
    Rational paper_mid;
    bool pass = false;
};

/// Recomputes every block of the published table for the built-in measure at
/// t = 1/3, m = 5 and checks C_I within [M_I - 1e-4, M_I + 1e-4].
inline std::vector<TableRow> reproduce_table(Precision prec, const CertifyOptions& opts = {}) {
    const AtomicMeasure mu = paper_measure();
    const EvaluationContext ctx(Rational(1, 3), 5, prec);
    const BlockPlan plan = paper_plan();
    const MixtureModel model(mu, ctx);
    const EntropyDerivativeIntegrand f{&model};
    const Rational slack(1, 10000);
    std::vector<TableRow> rows(plan.blocks.size(), TableRow{{}, BlockResult{{}, RealBall(prec)}, {}});
    parallel_for(plan.blocks.size(), resolve_threads(opts.threads), [&](std::size_t k) {
        const Interval& iv = plan.blocks[k];
        const QuadratureRequest req{iv.a, iv.b, plan.per_block_tol / 2, plan.per_block_tol / 2, opts.budget, prec};
        Enclosure e = enclose_integral(f, req);
        TableRow row{iv, BlockResult{iv, e.value * 2L, e.status, e.evaluations}, Rational::parse(paper_table_mids()[k])};
        row.pass = row.result.enclosure.is_finite() &&
                   row.result.enclosure.inside((row.paper_mid - slack).get(), (row.paper_mid + slack).get());
        rows[k] = std::move(row);
    });
    return rows;
}

/// R^2 / 2: P_t mu is strictly log-concave for every t above this value.
inline Rational logconcave_threshold(const AtomicMeasure& mu) {
    const Rational& R = mu.support_radius();
    return R * R * Rational(1, 2);
}

struct SignRow {
    int m = 0;
    Verdict verdict = Verdict::indeterminate;
    RealBall total;
};

/// Certifies H^(m)(t) for m = 1..m_max.
inline std::vector<SignRow> sign_suite(const AtomicMeasure& mu, const Rational& t, int m_max, const BlockPlan& plan,
                                       Precision prec = Precision(), const CertifyOptions& opts = {}) {
    if (m_max < 1) throw InputError("sign suite needs m_max >= 1");
    std::vector<SignRow> out;
    for (int m = 1; m <= m_max; ++m) {
        const Certificate c = certify(mu, EvaluationContext(t, m, prec), plan, opts);
        out.push_back({m, c.verdict, c.total});
    }
    return out;
}

/// True when verdict matches the sign (-1)^m predicted by complete monotonicity.
inline bool gcm_consistent(int m, Verdict v) {
    return v == (m % 2 == 0 ? Verdict::certified_positive : Verdict::certified_negative);
}

struct Reverification {
    Certificate recomputed;
    bool totals_intersect = false;
    bool same_verdict = false;

    [[nodiscard]] bool ok() const { return totals_intersect && same_verdict; }
};

/// Recomputes a certificate at the given precision with the same plan.
inline Reverification reverify(const Certificate& c, Precision prec, const CertifyOptions& opts = {}) {
    CertifyOptions o = opts;
    o.budget = c.budget;
    Reverification r{certify(c.measure, EvaluationContext(c.t, c.m, prec), c.plan, o)};
    r.totals_intersect = r.recomputed.total.overlaps(c.total);
    r.same_verdict = r.recomputed.verdict == c.verdict;
    return r;
}

/// Precision scaled by 3/2, as used for independent re-checks.
inline Precision recheck_precision(int bits) { return Precision(bits).scaled(3, 2); }

}  // namespace gcm
