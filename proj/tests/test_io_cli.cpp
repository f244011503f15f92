#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "gcm/cli.hpp"
#include "gcm/io/json_io.hpp"

using namespace gcm;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli_run(std::vector<std::string> args) {
    args.insert(args.begin(), "gcm");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("gcm_test_" + name)).string();
}

}  // namespace

TEST_CASE("IO/measure round trip") {
    const AtomicMeasure mu = paper_measure();
    const std::string text = measure_to_json(mu).dump();
    CHECK(parse_measure(text) == mu);
    const json j = measure_to_json(mu);
    CHECK(j.at("atoms").size() == 17);
    CHECK(j.at("atoms")[0].at("a") == "-44/5");
    CHECK(j.at("atoms")[0].at("w") == "1/1000");
}

TEST_CASE("IO/measure decimal strings") {
    const AtomicMeasure mu = parse_measure(R"({"atoms": [{"a": "-1.5", "w": "0.25"}, {"a": "1.5", "w": "3/4"}]})");
    CHECK(mu.size() == 2);
    CHECK(mu.atoms()[0].location == Rational(-3, 2));
    CHECK(mu.atoms()[1].weight == Rational(3, 4));
}

TEST_CASE("IO/measure rejections") {
    CHECK_THROWS_AS(parse_measure(R"({"atoms": [{"a": 0, "w": "1"}]})"), InputError);
    CHECK_THROWS_AS(parse_measure(R"({"atoms": [{"a": "0", "w": 1.0}]})"), InputError);
    CHECK_THROWS_AS(parse_measure(R"({"atoms": [{"a": "0"}]})"), InputError);
    CHECK_THROWS_AS(parse_measure(R"({"points": []})"), InputError);
    CHECK_THROWS_AS(parse_measure("not json"), InputError);
    CHECK_THROWS_AS(parse_measure(R"({"atoms": [{"a": "0", "w": "1/2"}]})"), MeasureError);
    CHECK_THROWS_AS(parse_measure(R"({"atoms": [{"a": "0", "w": "1/2"}, {"a": "0", "w": "1/2"}]})"), MeasureError);
    CHECK_THROWS_AS(load_measure("/nonexistent/measure.json"), InputError);
    try {
        (void)parse_measure(R"({"atoms": [{"a": "0", "w": 1}]})");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("JSON numbers are rejected") != std::string::npos);
    }
}

TEST_CASE("IO/ball encoding") {
    RealBall b = RealBall::from_rational(Rational(2, 7), Precision(128));
    b.add_error(Mag::from_double(1e-30));
    const json j = ball_to_json(b);
    const RealBall back = ball_from_json(j, Precision(128));
    CHECK(mpfr_equal_p(back.mid(), b.mid()));
    CHECK(back.rad() == b.rad());
    CHECK(j.at("mid_dec").get<std::string>().rfind("2.857142857142857", 0) == 0);
}

TEST_CASE("CLI/usage errors") {
    CHECK(cli_run({}).code == 3);
    CHECK(cli_run({"frobnicate"}).code == 3);
    CHECK(cli_run({"certify", "--m", "many"}).code == 3);
    CHECK(cli_run({"certify", "--t", "0"}).code == 3);
    CHECK(cli_run({"certify", "--t", "-1/3"}).code == 3);
    CHECK(cli_run({"certify", "--plan", "bogus"}).code == 3);
    CHECK(cli_run({"certify", "--measure", "/nonexistent.json"}).code == 3);
    CHECK(cli_run({"certify", "--plan", "paper", "--X", "30"}).code == 3);
    CHECK(cli_run({"recheck", "/nonexistent.json"}).code == 3);
}

TEST_CASE("CLI/float weights rejected") {
    const std::string path = temp_path("float_weights.json");
    write_text_file(path, R"({"atoms": [{"a": "0", "w": 1.0}]})");
    const Run r = cli_run({"certify", "--measure", path});
    CHECK(r.code == 3);
    CHECK(r.err.find("JSON numbers are rejected") != std::string::npos);
    std::filesystem::remove(path);
}

TEST_CASE("CLI/premise failure maps to usage error") {
    const Run r = cli_run({"certify", "--plan", "uniform:1", "--X", "9", "--prec", "64"});
    CHECK(r.code == 3);
    CHECK(r.err.find("tail premise failed") != std::string::npos);
}

TEST_CASE("CLI/logconcave") {
    const Run r = cli_run({"logconcave", "--measure", "paper"});
    CHECK(r.code == 0);
    CHECK(r.out == "968/25\n");
}

TEST_CASE("CLI/certify, write and recheck") {
    const std::string mpath = temp_path("atom.json");
    const std::string cpath = temp_path("atom_cert.json");
    write_text_file(mpath, R"({"atoms": [{"a": "0", "w": "1"}]})");
    const Run c = cli_run({"certify", "--measure", mpath, "--t", "1/3", "--m", "4", "--plan", "uniform:1", "--X", "15",
                           "--tol", "1e-20", "--prec", "128", "--threads", "1", "--out", cpath});
    CHECK(c.code == 0);
    CHECK(c.out.empty());
    const json j = json::parse(read_text_file(cpath));
    CHECK(j.at("verdict") == "certified_positive");
    CHECK(j.at("precision_bits") == 128);

    const Run r = cli_run({"recheck", cpath, "--threads", "1"});
    CHECK(r.code == 0);
    CHECK(r.out.find("recomputed at 192 bits") != std::string::npos);
    CHECK(r.out.find("totals intersect: yes") != std::string::npos);

    const Run odd = cli_run({"certify", "--measure", mpath, "--m", "3", "--plan", "uniform:1", "--X", "15", "--tol",
                             "1e-20", "--prec", "128", "--threads", "1"});
    CHECK(odd.code == 1);
    CHECK(json::parse(odd.out).at("verdict") == "certified_negative");

    const Run starved = cli_run({"certify", "--measure", mpath, "--m", "3", "--plan", "uniform:15", "--X", "15",
                                 "--tol", "1e-25", "--budget", "1", "--prec", "128", "--threads", "1"});
    CHECK(starved.code == 2);

    std::filesystem::remove(mpath);
    std::filesystem::remove(cpath);
}

TEST_CASE("CLI/asymmetric measure uses a full-line plan") {
    const std::string mpath = temp_path("shifted.json");
    write_text_file(mpath, R"({"atoms": [{"a": "1/2", "w": "1"}]})");
    const Run c = cli_run({"certify", "--measure", mpath, "--t", "1/2", "--m", "2", "--plan", "uniform:1", "--X", "16",
                           "--tol", "1e-20", "--prec", "128", "--threads", "1"});
    CHECK(c.code == 0);
    const json j = json::parse(c.out);
    CHECK(j.at("plan").at("half_line") == false);
    CHECK(j.at("blocks").front().at("a") == "-16/1");
    std::filesystem::remove(mpath);
}

TEST_CASE("CLI/precision environment variable") {
    ::setenv(cli::kPrecisionEnv, "192", 1);
    CHECK(cli::default_precision_bits() == 192);
    ::setenv(cli::kPrecisionEnv, "12", 1);
    CHECK_THROWS_AS(cli::default_precision_bits(), InputError);
    CHECK(cli_run({"logconcave"}).code == 3);
    ::setenv(cli::kPrecisionEnv, "abc", 1);
    CHECK_THROWS_AS(cli::default_precision_bits(), InputError);
    ::unsetenv(cli::kPrecisionEnv);
    CHECK(cli::default_precision_bits() == 256);
}

TEST_CASE("CLI/scan and search") {
    const Run s = cli_run({"scan", "--measure", "paper", "--t-lo", "0.3", "--t-hi", "0.4", "--steps", "5", "--threads", "1"});
    CHECK(s.code == 0);
    CHECK(s.out.rfind("t,value,est_error\n", 0) == 0);
    CHECK(std::count(s.out.begin(), s.out.end(), '\n') == 6);

    const Run q = cli_run({"search", "--iterations", "3", "--threads", "1"});
    CHECK(q.code == 0);
    const AtomicMeasure mu = parse_measure(q.out);
    CHECK(mu.is_symmetric());

    const Run bad = cli_run({"search", "--t-lo", "0.5", "--t-hi", "0.4"});
    CHECK(bad.code == 3);
}

TEST_CASE("CLI/quick selftest") {
    const Run r = cli_run({"selftest", "--quick", "--cases", "200", "--prec", "128", "--threads", "1"});
    INFO(r.out);
    CHECK(r.code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
}
