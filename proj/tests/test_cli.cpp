#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <vector>

#include "cli_util.hpp"
#include "test_util.hpp"

using namespace kahania;
using cliutil::run_cli;

static std::string first_line(const std::string& s) {
    return s.substr(0, s.find('\n'));
}

TEST_CASE("integrate subcommand", "[cli]") {
    auto r = run_cli("integrate \"z^2\" --var z");
    REQUIRE(r.exit_code == 0);
    CHECK(equivalent(parse(first_line(r.output)), parse("z^3/3")));
}

TEST_CASE("kahanian subcommand", "[cli]") {
    auto r = run_cli("kahanian \"z^n\" --var z");
    REQUIRE(r.exit_code == 0);
    CHECK(equivalent(parse(cliutil::line_value(r.output, "C")), parse("-1/(n+1)")));
    CHECK(cliutil::line_value(r.output, "anchor") == "1");
    CHECK(r.output.find("tried") != std::string::npos);  // audit trail present
}

TEST_CASE("definite subcommand with a parameter limit", "[cli]") {
    auto r = run_cli("definite \"x^n\" --var x --from a --to b --limit n=-1");
    REQUIRE(r.exit_code == 0);
    CHECK(equivalent(parse(first_line(r.output)), parse("ln(b) - ln(a)")));
}

TEST_CASE("comprehensive subcommand json", "[cli]") {
    auto r = run_cli("comprehensive \"z^alpha\" --var z --params alpha --format json");
    REQUIRE(r.exit_code == 0);
    nlohmann::json j = nlohmann::json::parse(r.output);
    REQUIRE(j["arms"].size() == 1);
    CHECK(j["arms"][0]["when"] == nlohmann::json::array({"alpha=-1"}));
    CHECK(j["kahanian"] == false);
    CHECK(j.contains("otherwise"));
}

TEST_CASE("verify subcommand", "[cli]") {
    auto r = run_cli("verify \"z^alpha\" --var z");
    REQUIRE(r.exit_code == 0);
    CHECK(first_line(r.output).rfind("PASS", 0) == 0);
}

TEST_CASE("resonance subcommand", "[cli]") {
    auto r = run_cli("resonance --kahanian");
    REQUIRE(r.exit_code == 0);
    CHECK(cliutil::line_value(r.output, "W") == "k");
    CHECK(equivalent(parse(cliutil::line_value(r.output, "x_p")),
                     parse("(cos(omega*t)-cos(k*t))/(k^2-omega^2)")));
    CHECK(equivalent(parse(cliutil::line_value(r.output, "resonant limit")),
                     parse("t*sin(k*t)/(2*k)")));
}

TEST_CASE("grid subcommand csv shape", "[cli]") {
    auto r = run_cli("grid \"z^alpha\" --var z --param alpha"
                     " --zrange 1:2:3 --prange 0:1:2");
    REQUIRE(r.exit_code == 0);
    std::istringstream is(r.output);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(is, line)) lines.push_back(line);
    REQUIRE(lines.size() == 4);  // header + 3 z rows
    CHECK(lines[0] == "z,0,1");
    // each row: z plus 2 cells
    for (std::size_t i = 1; i < lines.size(); ++i)
        CHECK(std::count(lines[i].begin(), lines[i].end(), ',') == 2);
}

TEST_CASE("grid emits nan where evaluation fails", "[cli]") {
    auto r = run_cli("grid \"1/(z*sqrt(z^2-alpha^2))\" --var z --param alpha"
                     " --zrange 1:1:2 --prange 0:0:2 --consequent 1");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("nan") != std::string::npos);
}

TEST_CASE("exit code 1 for parse errors and bad flags", "[cli]") {
    CHECK(run_cli("integrate \"sin(\" --var z").exit_code == 1);
    CHECK(run_cli("integrate \"z\" --no-such-flag").exit_code == 1);
    CHECK(run_cli("grid \"z\" --var z --param a --zrange bogus --prange 0:1:2")
              .exit_code == 1);
}

TEST_CASE("exit code 2 with the error name first for engine errors", "[cli]") {
    auto r = run_cli("integrate \"exp(z^2)\" --var z");
    CHECK(r.exit_code == 2);
    CHECK(first_line(r.output).rfind("UnsupportedForm", 0) == 0);

    r = run_cli("definite \"1/x\" --var x --from 0 --to 1");
    CHECK(r.exit_code == 2);
    CHECK(first_line(r.output).rfind("DivergentIntegral", 0) == 0);

    r = run_cli("kahanian \"1/z\" --var z --anchor 0");
    CHECK(r.exit_code == 2);
    CHECK(first_line(r.output).rfind("NoValidAnchor", 0) == 0);
}

TEST_CASE("determinism: identical invocations give identical bytes", "[cli]") {
    std::string args = "comprehensive \"(alpha^(lambda*z) - alpha^(sigma*z))^2\""
                       " --var z --params alpha,lambda,sigma --format json";
    auto a = run_cli(args);
    auto b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    CHECK(a.output == b.output);
}

TEST_CASE("latex output format", "[cli]") {
    auto r = run_cli("integrate \"z^alpha\" --var z --format latex");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("\\alpha") != std::string::npos);
}
