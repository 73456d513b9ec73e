#include <catch_amalgamated.hpp>

#include <functional>

#include "mcurve/cli.hpp"

using namespace mcurve;
using namespace mcurve::cli;

namespace {

std::string scratch(const std::string& name)
{
    const auto p = std::filesystem::temp_directory_path() / ("mcurve_test_cli_" + name);
    std::filesystem::remove_all(p);
    return p.string();
}

std::vector<std::string> read_lines(const std::string& path)
{
    std::ifstream in(path);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::string body_of(const std::string& path)
{
    std::string b;
    for (const auto& l : read_lines(path))
        if (l.rfind("#", 0) != 0) b += l + "\n";
    return b;
}

std::string field_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const UsageError& e) {
        return e.field();
    }
    return "";
}

} // namespace

TEST_CASE("config parsing and validation", "[cli]")
{
    const RunConfig d = RunConfig::from_json(json::object());
    CHECK(d.k == 2);
    CHECK(d.ladder == std::vector<int>{4, 5, 6, 7, 8, 9});
    CHECK(d.p_list.size() == 5);
    CHECK_FALSE(d.C0);

    const RunConfig c = RunConfig::from_json(json::parse(
        R"({"k": 3, "ladder": [3, 5, 6, 8], "p_list": [3, "7/2", 4.5], "C0": 64, "ack_j": [2, 8], "seed": 7})"));
    CHECK(c.k == 3);
    CHECK(c.p_list[1] == Rational(7, 2));
    CHECK(c.p_list[2] == Rational(9, 2));
    CHECK(*c.C0 == 64);
    CHECK((c.ack_j_lo == 2 && c.ack_j_hi == 8));
    CHECK(c.seed == 7u);
    CHECK_NOTHROW(c.validate());

    CHECK(field_of([] { RunConfig::from_json(json::parse(R"({"budgets": 3})")); }) == "budgets");
    CHECK(field_of([] { RunConfig::from_json(json::parse(R"({"k": "two"})")); }) == "k");
    CHECK(field_of([] { RunConfig::from_json(json::parse(R"({"p_list": ["x/2"]})")); }) == "p_list");
    auto bad = [](const char* text) {
        return field_of([&] { RunConfig::from_json(json::parse(text)).validate(); });
    };
    CHECK(bad(R"({"k": 1})") == "k");
    CHECK(bad(R"({"ladder": [1, 4, 5, 6]})") == "ladder");
    CHECK(bad(R"({"ladder": [4, 6, 5, 7]})") == "ladder");
    CHECK(bad(R"({"C0": 3})") == "C0");
    CHECK(bad(R"({"ack_j": [6, 8]})") == "ack_j");
    CHECK(bad(R"({"ack_p": [1.5]})") == "ack_p");
    CHECK(bad(R"({"mc_budget": 0})") == "mc_budget");

    try {
        RunConfig::from_json(json::parse(R"({"ladder": [1, 4, 5, 6]})")).validate();
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("2^-1 exceeds 1/4") != std::string::npos);
    }

    const std::string dir = scratch("config");
    std::filesystem::create_directories(dir);
    std::ofstream(dir + "/bad.json") << "{ \"k\": ";
    CHECK(field_of([&] { load_config(dir + "/bad.json"); }) == "config");
    CHECK(field_of([&] { load_config(dir + "/missing.json"); }) == "config");
}

TEST_CASE("config round trip and content hash", "[cli]")
{
    RunConfig c;
    c.k = 3;
    c.C0 = 128;
    c.threads = 4;
    const json j = c.to_json();
    CHECK_FALSE(j.contains("threads"));
    CHECK_FALSE(j.contains("out"));
    const RunConfig back = RunConfig::from_json(j);
    CHECK(back.to_json() == j);

    CHECK(content_hash("") == 0xcbf29ce484222325ull);
    CHECK(hex(content_hash("a")) == "af63dc4c8601ec8c");
    CHECK(content_hash("abc") == content_hash(std::string("abc")));
    CHECK(content_hash("abc") != content_hash("abd"));
    CHECK(num(NAN).empty());
    CHECK(num(0.25) == "0.25");
}

TEST_CASE("frenet subcommand output", "[cli]")
{
    RunConfig c;
    c.k = 3;
    c.out = scratch("frenet");
    CHECK(cmd_frenet(c) == 0);
    const auto lines = read_lines(c.out + "/frenet.csv");
    REQUIRE(lines.size() == 3 + 1 + 100);
    CHECK(lines[0] == "# subcommand: frenet");
    CHECK(lines[2].rfind("# body-hash: fnv1a64:", 0) == 0);
    CHECK(lines[2].substr(21) == hex(content_hash(body_of(c.out + "/frenet.csv"))));
    CHECK(lines[3].rfind("t,residual,pass,e1_1", 0) == 0);
    for (std::size_t i = 4; i < lines.size(); ++i) CHECK(lines[i].find(",pass,") != std::string::npos);

    c.k = 2;
    c.frenet_points = 5;
    CHECK(cmd_frenet(c) == 0);
    const auto l2 = read_lines(c.out + "/frenet.csv");
    CHECK(l2[4] == "0,0,pass,1,0,0,1");
    const json rep = json::parse(std::ifstream(c.out + "/frenet.json"));
    CHECK(rep["pass"] == true);
    CHECK(rep["rows"] == 5);
}

TEST_CASE("partition-check subcommand", "[cli]")
{
    RunConfig c;
    c.ladder = {6};
    c.C0 = 256;
    c.partition_samples = 2000;
    c.calibration_samples = 2000;
    c.curve_points = 200;
    c.out = scratch("partition");
    CHECK(cmd_partition_check(c) == 0);
    const json rep = json::parse(std::ifstream(c.out + "/partition-check.json"));
    CHECK(rep["scales"][0]["max_sum_eta_deviation"].get<double>() <= 1e-8);
    CHECK(rep["scales"][0]["epsilon"] == "2^-6");

    c.k = 3;
    c.ladder = {5};
    CHECK(cmd_partition_check(c) == 0);
}

TEST_CASE("threshold-table names the missing scale", "[cli]")
{
    RunConfig c;
    c.ladder = {4, 5, 6, 7};
    c.out = scratch("threshold");
    try {
        cmd_threshold_table(c);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("epsilon = 2^-4") != std::string::npos);
    }
}

TEST_CASE("threshold-table on synthetic measurement files", "[cli]")
{
    RunConfig c;
    c.ladder = {4, 5, 6, 7};
    c.out = scratch("threshold_ok");
    std::filesystem::create_directories(c.out);
    for (int m : c.ladder) {
        const double e = std::ldexp(1.0, -m);
        json rec{{"k", 2}, {"m", m}, {"epsilon", e}};
        rec["l2"] = {{"value", 1e-3 * e}};
        rec["l1_total"] = {{"value", 150.0 / e}};
        rec["lp"] = json::array({{{"exponent", "3/2"}, {"value", 0.1 * std::cbrt(e)}}});
        std::ofstream(measurement_path(c, m)) << rec.dump();
    }
    CHECK(cmd_threshold_table(c) == 0);
    const auto lines = read_lines(c.out + "/threshold-table.csv");
    int certified = 0;
    for (const auto& l : lines)
        if (l.rfind("certificate,", 0) == 0 && l.find(",pass,certified;") != std::string::npos) ++certified;
    CHECK(certified == 3);
}

TEST_CASE("reruns produce byte-identical bodies", "[cli]")
{
    RunConfig c;
    c.ladder = {5};
    c.C0 = 256;
    c.partition_samples = 500;
    c.calibration_samples = 500;
    c.curve_points = 50;
    c.out = scratch("rerun_a");
    cmd_partition_check(c);
    const std::string a = body_of(c.out + "/partition-check.csv");
    c.out = scratch("rerun_b");
    c.threads = 3;
    cmd_partition_check(c);
    CHECK(body_of(c.out + "/partition-check.csv") == a);
}
