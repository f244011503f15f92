#pragma once

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gcm/certifier.hpp"
#include "gcm/explorer.hpp"
#include "gcm/io/json_io.hpp"
#include "gcm/selftest.hpp"

namespace gcm::cli {

enum ExitCode : int {
    kCertifiedPositive = 0,
    kCertifiedNegative = 1,
    kIndeterminate = 2,
    kUsageError = 3,
    kInternalError = 4,
};

inline constexpr const char* kPrecisionEnv = "GCM_PRECISION";

/// Default precision: $GCM_PRECISION when set, else 256 bits.
inline int default_precision_bits() {
    const char* env = std::getenv(kPrecisionEnv);
    if (env == nullptr || *env == '\0') return Precision::kDefaultBits;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < Precision::kMinBits || v > 1 << 20)
        throw InputError(std::string(kPrecisionEnv) + " must be an integer >= 53, got '" + env + "'");
    return static_cast<int>(v);
}

/// "paper" or a path to a measure JSON file.
inline AtomicMeasure resolve_measure(const std::string& spec) {
    if (spec == "paper") return paper_measure();
    return load_measure(spec);
}

/// "paper", "uniform:<width>" or "explicit:<p0>,<p1>,...". Half-line plans
/// are mirrored to [-X, X] for asymmetric measures.
inline BlockPlan resolve_plan(const std::string& spec, const std::string& X, double tol, bool symmetric) {
    BlockPlan plan;
    if (spec == "paper") {
        plan = paper_plan(tol);
        if (!X.empty() && Rational::parse(X) != plan.X) throw InputError("the paper plan has X = 25; use uniform: or explicit: for another cutoff");
    } else if (spec.rfind("uniform:", 0) == 0) {
        plan = uniform_plan(Rational::parse(spec.substr(8)), Rational::parse(X.empty() ? "25" : X), true, tol);
    } else if (spec.rfind("explicit:", 0) == 0) {
        std::vector<Rational> pts;
        std::string rest = spec.substr(9);
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            const std::size_t comma = rest.find(',', pos);
            const std::string item = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            pts.push_back(Rational::parse(item));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        const bool half = pts.front().sign() == 0;
        plan = explicit_plan(pts, half, tol);
        if (!X.empty() && Rational::parse(X) != plan.X) throw InputError("--X disagrees with the last explicit breakpoint");
    } else {
        throw InputError("unknown plan '" + spec + "' (expected paper, uniform:<width> or explicit:<p0>,<p1>,...)");
    }
    if (plan.half_line && !symmetric) plan = full_line(plan);
    return plan;
}

inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-")
        out << text;
    else
        write_text_file(path, text);
}

/// Parses argv and runs one subcommand. Never throws; returns the exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Rigorous heat-flow entropy derivatives of Gaussian mixtures", "gcm"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    unsigned threads = 0;
    int prec_bits = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--threads", threads, "worker threads (default: all cores)");
        sub->add_option("--prec", prec_bits, std::string("working precision in bits (default: $") + kPrecisionEnv + " or 256)");
    };

    // certify
    std::string measure = "paper";
    std::string t_str = "1/3";
    int m = 5;
    std::string plan_spec = "paper";
    std::string X_str;
    double tol = 1e-30;
    long budget = 200000;
    std::string out_path;
    auto* certify_cmd = app.add_subcommand("certify", "certify the sign of H^(m)(t); exit 0/1/2 = positive/negative/indeterminate");
    certify_cmd->add_option("--measure", measure, "'paper' or a measure JSON file")->capture_default_str();
    certify_cmd->add_option("--t", t_str, "time t as an exact rational")->capture_default_str();
    certify_cmd->add_option("--m", m, "derivative order")->capture_default_str();
    certify_cmd->add_option("--plan", plan_spec, "paper | uniform:<width> | explicit:<p0>,<p1>,...")->capture_default_str();
    certify_cmd->add_option("--X", X_str, "tail cutoff (default 25)");
    certify_cmd->add_option("--tol", tol, "per-block tolerance")->capture_default_str();
    certify_cmd->add_option("--budget", budget, "per-block evaluation budget")->capture_default_str();
    certify_cmd->add_option("--out", out_path, "certificate path (default: stdout)");
    add_common(certify_cmd);

    // recheck
    std::string cert_path;
    auto* recheck_cmd = app.add_subcommand("recheck", "re-verify a saved certificate at 1.5x its precision");
    recheck_cmd->add_option("certificate", cert_path, "certificate JSON file")->required();
    add_common(recheck_cmd);

    // table
    std::string table_out;
    auto* table_cmd = app.add_subcommand("table", "reproduce the 22-block table for the built-in measure");
    table_cmd->add_option("--budget", budget, "per-block evaluation budget")->capture_default_str();
    table_cmd->add_option("--out", table_out, "also write the rows as JSON");
    add_common(table_cmd);

    // scan
    double t_lo = 0.1;
    double t_hi = 1.0;
    int steps = 64;
    bool geometric = false;
    auto* scan_cmd = app.add_subcommand("scan", "float estimate of H^(m)(t) over a t grid (CSV: t,value,est_error)");
    scan_cmd->add_option("--measure", measure, "'paper' or a measure JSON file")->capture_default_str();
    scan_cmd->add_option("--m", m, "derivative order")->capture_default_str();
    scan_cmd->add_option("--t-lo", t_lo)->capture_default_str();
    scan_cmd->add_option("--t-hi", t_hi)->capture_default_str();
    scan_cmd->add_option("--steps", steps)->capture_default_str();
    scan_cmd->add_flag("--geometric", geometric, "geometric instead of uniform grid");
    scan_cmd->add_option("--out", out_path, "CSV path (default: stdout)");
    add_common(scan_cmd);

    // search
    SearchConfig cfg;
    bool single_atom = false;
    auto* search_cmd = app.add_subcommand("search", "local search over symmetric grid measures for H^(m) > 0");
    search_cmd->add_option("--iterations", cfg.iterations)->capture_default_str();
    search_cmd->add_option("--starts", cfg.starts)->capture_default_str();
    search_cmd->add_option("--seed", cfg.seed)->capture_default_str();
    search_cmd->add_option("--perturb", cfg.perturb, "relative perturbation of the start weights")->capture_default_str();
    search_cmd->add_option("--step", cfg.step, "log-scale move size")->capture_default_str();
    search_cmd->add_option("--t-lo", cfg.t_lo)->capture_default_str();
    search_cmd->add_option("--t-hi", cfg.t_hi)->capture_default_str();
    search_cmd->add_option("--m", cfg.m)->capture_default_str();
    search_cmd->add_option("--denominator", cfg.denominator, "weight grid for the emitted measure")->capture_default_str();
    search_cmd->add_flag("--single-atom", single_atom, "restrict the family to the center atom");
    search_cmd->add_option("--out", out_path, "measure JSON path for the best result (default: stdout)");
    add_common(search_cmd);

    // logconcave
    auto* lc_cmd = app.add_subcommand("logconcave", "time R^2/2 after which P_t mu is strictly log-concave");
    lc_cmd->add_option("--measure", measure, "'paper' or a measure JSON file")->capture_default_str();

    // selftest
    SelftestOptions st;
    bool quick = false;
    auto* self_cmd = app.add_subcommand("selftest", "run the property suites; exit 0 when all pass, 4 otherwise");
    self_cmd->add_option("--cases", st.monotonicity_cases, "inclusion-monotonicity cases")->capture_default_str();
    self_cmd->add_option("--seed", st.seed)->capture_default_str();
    self_cmd->add_flag("--quick", quick, "smaller sample sizes and no certificate re-check");
    add_common(self_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        const Precision prec(prec_bits > 0 ? prec_bits : default_precision_bits());
        const CertifyOptions copts{threads, budget};

        if (certify_cmd->parsed()) {
            const AtomicMeasure mu = resolve_measure(measure);
            const EvaluationContext ctx(Rational::parse(t_str), m, prec);
            const BlockPlan plan = resolve_plan(plan_spec, X_str, tol, mu.is_symmetric());
            const Certificate c = certify(mu, ctx, plan, copts);
            emit(out_path, certificate_to_json(c).dump(2) + "\n", out);
            err << "H^(" << m << ")(" << ctx.t.to_string() << ") in " << c.total.to_string(20) << "\n"
                << "verdict: " << to_string(c.verdict) << "\n";
            return exit_code(c.verdict);
        }

        if (recheck_cmd->parsed()) {
            const CertificateRecord rec = certificate_from_json(json::parse(read_text_file(cert_path)));
            const Precision hi = prec_bits > 0 ? prec : Precision(rec.precision_bits).scaled(3, 2);
            const RecordRecheck r = recheck_record(rec, hi, threads);
            out << "stored sums consistent: " << (r.consistent ? "yes" : "no") << "\n"
                << "recomputed at " << hi.bits() << " bits: " << r.recomputed.total.to_string(20) << "\n"
                << "totals intersect: " << (r.totals_intersect ? "yes" : "no") << "\n"
                << "verdict: " << to_string(rec.verdict) << " -> " << to_string(r.recomputed.verdict) << "\n";
            if (!r.ok()) return kInternalError;
            return exit_code(rec.verdict);
        }

        if (table_cmd->parsed()) {
            const auto rows = reproduce_table(prec, copts);
            json j = json::array();
            bool all = true;
            char line[256];
            for (const auto& r : rows) {
                const std::string iv = "[" + r.interval.a.to_string() + ", " + r.interval.b.to_string() + "]";
                std::snprintf(line, sizeof line, "%-12s M = %10s  C = %s  %s\n", iv.c_str(),
                              paper_table_mids()[&r - rows.data()], r.result.enclosure.to_string(15).c_str(),
                              r.pass ? "PASS" : "FAIL");
                out << line;
                all = all && r.pass;
                json jr = ball_to_json(r.result.enclosure);
                jr["a"] = r.interval.a.to_string();
                jr["b"] = r.interval.b.to_string();
                jr["paper_mid"] = paper_table_mids()[&r - rows.data()];
                jr["status"] = to_string(r.result.status);
                jr["pass"] = r.pass;
                j.push_back(jr);
            }
            out << (all ? "all 22 rows within 1e-4" : "some rows outside 1e-4") << "\n";
            if (!table_out.empty()) write_text_file(table_out, j.dump(2) + "\n");
            return all ? 0 : kIndeterminate;
        }

        if (scan_cmd->parsed()) {
            const ScanResult r = scan(resolve_measure(measure), t_lo, t_hi, steps, m, geometric, threads);
            emit(out_path, scan_csv(r), out);
            err << "argmax t = " << r.t_grid[r.argmax] << ", value " << r.values[r.argmax] << "\n";
            for (const auto& [a, b] : r.sign_changes) err << "sign change in [" << a << ", " << b << "]\n";
            return 0;
        }

        if (search_cmd->parsed()) {
            cfg.threads = threads;
            if (single_atom) {
                cfg.start_pairs.clear();
                cfg.start_center = 1;
            }
            const auto results = search(cfg);
            for (const auto& r : results)
                err << "objective " << r.objective << " at t = " << r.best_t << (r.improved ? "" : " (no improvement)") << "\n";
            emit(out_path, measure_to_json(results.front().measure).dump(2) + "\n", out);
            return 0;
        }

        if (lc_cmd->parsed()) {
            const Rational th = logconcave_threshold(resolve_measure(measure));
            out << th.to_string() << "\n";
            err << "P_t mu is strictly log-concave for t > " << th.to_string() << " (= " << th.to_double() << ")\n";
            return 0;
        }

        if (self_cmd->parsed()) {
            st.bits = prec.bits();
            st.threads = threads;
            if (quick) {
                st.monotonicity_cases = std::min(st.monotonicity_cases, 1000L);
                st.quad_integrands = 10;
                st.certificate = false;
            }
            bool all = true;
            for (const auto& item : run_selftest(st)) {
                out << (item.passed ? "PASS " : "FAIL ") << item.suite << ": " << item.name << " (" << item.detail << ")\n";
                all = all && item.passed;
            }
            return all ? 0 : kInternalError;
        }
    } catch (const PremiseFailure& e) {
        err << "error: " << e.what() << " (increase X)\n";
        return kUsageError;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kIndeterminate;
    } catch (const NumericalBreakdown& e) {
        err << e.what() << "\n";
        return kIndeterminate;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
    return kUsageError;
}

}  // namespace gcm::cli
