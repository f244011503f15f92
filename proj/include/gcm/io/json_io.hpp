#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gcm/certifier.hpp"

namespace gcm {

using json = nlohmann::json;

// ---------------------------------------------------------------- measures

inline AtomicMeasure measure_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("atoms")) throw InputError("measure document must be an object with an \"atoms\" array");
    const json& atoms = doc.at("atoms");
    if (!atoms.is_array()) throw InputError("\"atoms\" must be an array");
    std::vector<Atom> raw;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const json& a = atoms[i];
        const std::string where = "atom " + std::to_string(i);
        if (!a.is_object()) throw InputError(where + " must be an object");
        for (const char* key : {"a", "w"}) {
            if (!a.contains(key)) throw InputError(where + " lacks \"" + key + "\"");
            if (!a.at(key).is_string())
                throw InputError(where + " field \"" + key + "\" must be a rational string such as \"9/5\" (JSON numbers are rejected)");
        }
        raw.push_back({Rational::parse(a.at("a").get<std::string>()), Rational::parse(a.at("w").get<std::string>())});
    }
    return AtomicMeasure::validate(std::move(raw));
}

inline json measure_to_json(const AtomicMeasure& mu) {
    json atoms = json::array();
    for (const auto& a : mu.atoms()) atoms.push_back({{"a", a.location.to_string()}, {"w", a.weight.to_string()}});
    return {{"atoms", atoms}};
}

inline AtomicMeasure parse_measure(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("measure file is not valid JSON: ") + e.what());
    }
    return measure_from_json(doc);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << text;
    if (!out) throw InputError("write to '" + path + "' failed");
}

inline AtomicMeasure load_measure(const std::string& path) { return parse_measure(read_text_file(path)); }

// ------------------------------------------------------------ certificates

inline std::string decimal_mid(const RealBall& b, int digits = 30) {
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%.*Re", digits, b.mid());
    std::string s(buf);
    mpfr_free_str(buf);
    return s;
}

inline std::string decimal_rad(const RealBall& b) {
    if (!b.rad().is_finite()) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", b.rad().to_double_upper());
    return buf;
}

inline json ball_to_json(const RealBall& b) {
    return {{"mid_hex", b.mid_hex()}, {"rad_hex", b.rad_hex()}, {"mid_dec", decimal_mid(b)}, {"rad_dec", decimal_rad(b)}};
}

inline RealBall ball_from_json(const json& j, Precision p) {
    return RealBall::from_hex(j.at("mid_hex").get<std::string>(), j.at("rad_hex").get<std::string>(), p);
}

inline json premises_to_json(const std::vector<PremiseCheck>& ps) {
    json out = json::array();
    for (const auto& p : ps) out.push_back({{"name", p.name}, {"verified", p.verified}});
    return out;
}

inline json tail_to_json(const TailReport& r) {
    const TailEnvelope& e = r.envelope;
    json A = json::array();
    json B = json::array();
    for (const auto& a : e.A) A.push_back(decimal_mid(a, 12));
    for (std::size_t n = 1; n < e.B.size(); ++n) B.push_back(decimal_mid(e.B[n], 12));
    return {{"X", e.X.to_string()},
            {"R", e.R.to_string()},
            {"c_dec", decimal_mid(e.c, 12)},
            {"A_dec", A},
            {"B_dec", B},
            {"L0C", e.L0C.to_string()},
            {"QC_dec", decimal_mid(e.QC, 12)},
            {"q_degree", e.q_degree},
            {"delta", e.delta.to_string()},
            {"gamma", e.gamma.to_string()},
            {"bound_hex", r.bound.mid_hex()},
            {"bound_dec", decimal_mid(r.bound, 12)},
            {"premises", premises_to_json(r.premises)}};
}

inline json certificate_to_json(const Certificate& c) {
    json blocks = json::array();
    for (const auto& b : c.blocks) {
        json jb = ball_to_json(b.enclosure);
        jb["a"] = b.interval.a.to_string();
        jb["b"] = b.interval.b.to_string();
        jb["status"] = to_string(b.status);
        blocks.push_back(jb);
    }
    json tail = tail_to_json(c.tail);
    if (!c.extra.empty()) tail["left"] = tail_to_json(c.extra.front());
    tail["total_bound_hex"] = c.tail_total.mid_hex();
    tail["total_bound_dec"] = decimal_mid(c.tail_total, 12);

    json total = ball_to_json(c.total);
    char lo[40];
    char hi[40];
    std::snprintf(lo, sizeof lo, "%.17g", c.total.lower_double());
    std::snprintf(hi, sizeof hi, "%.17g", c.total.upper_double());
    total["lower_dec"] = lo;
    total["upper_dec"] = hi;

    return {{"measure", measure_to_json(c.measure)},
            {"t", c.t.to_string()},
            {"m", c.m},
            {"precision_bits", c.precision_bits},
            {"plan", {{"half_line", c.plan.half_line}, {"X", c.plan.X.to_string()}, {"per_block_tol", c.plan.per_block_tol}}},
            {"budget", c.budget},
            {"blocks", blocks},
            {"tail", tail},
            {"total", total},
            {"verdict", to_string(c.verdict)},
            {"tool_version", c.tool_version}};
}

/// A certificate as read back from JSON: enough to recompute it and to
/// re-add its stored balls.
struct CertificateRecord {
    AtomicMeasure measure;
    Rational t{};
    int m = 0;
    int precision_bits = 0;
    BlockPlan plan{};
    long budget = 0;
    std::vector<RealBall> block_balls{};
    std::vector<bool> block_converged{};
    RealBall tail_bound{};
    RealBall total{};
    Verdict verdict = Verdict::indeterminate;
};

inline CertificateRecord certificate_from_json(const json& j) {
    try {
        CertificateRecord r{measure_from_json(j.at("measure"))};
        r.t = Rational::parse(j.at("t").get<std::string>());
        r.m = j.at("m").get<int>();
        r.precision_bits = j.at("precision_bits").get<int>();
        const Precision p(r.precision_bits);
        const json& plan = j.at("plan");
        std::vector<Rational> pts;
        for (const auto& b : j.at("blocks")) {
            if (pts.empty()) pts.push_back(Rational::parse(b.at("a").get<std::string>()));
            pts.push_back(Rational::parse(b.at("b").get<std::string>()));
            r.block_balls.push_back(ball_from_json(b, p));
            r.block_converged.push_back(b.at("status").get<std::string>() == "converged");
        }
        r.plan = explicit_plan(pts, plan.at("half_line").get<bool>(), plan.at("per_block_tol").get<double>());
        if (r.plan.X != Rational::parse(plan.at("X").get<std::string>())) throw InputError("plan X disagrees with the blocks");
        r.budget = j.at("budget").get<long>();
        r.tail_bound = RealBall::from_hex(j.at("tail").at("total_bound_hex").get<std::string>(), "0x0p+0", p);
        r.total = ball_from_json(j.at("total"), p);
        r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
        return r;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed certificate: ") + e.what());
    }
}

/// Re-adds the stored block balls and tail bound and checks that the stored
/// total contains the sum and that the stored verdict follows from it.
inline bool record_is_consistent(const CertificateRecord& r) {
    const Precision p(r.precision_bits);
    RealBall sum(p);
    for (const auto& b : r.block_balls) sum += b;
    sum.add_error(r.tail_bound.mag_upper());
    bool converged = true;
    for (const bool c : r.block_converged) converged = converged && c;
    return r.total.contains(sum) && decide(r.total, converged) == r.verdict;
}

struct RecordRecheck {
    bool consistent = false;
    bool totals_intersect = false;
    bool same_verdict = false;
    Certificate recomputed;

    [[nodiscard]] bool ok() const { return consistent && totals_intersect && same_verdict; }
};

/// Independent recomputation of a stored certificate at precision p.
inline RecordRecheck recheck_record(const CertificateRecord& r, Precision p, unsigned threads = 0) {
    RecordRecheck out{record_is_consistent(r), false, false,
                      certify(r.measure, EvaluationContext(r.t, r.m, p), r.plan, CertifyOptions{threads, r.budget})};
    out.totals_intersect = out.recomputed.total.overlaps(r.total);
    out.same_verdict = out.recomputed.verdict == r.verdict;
    return out;
}

}  // namespace gcm
