#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "runners.hpp"

using namespace cylperc;
namespace fs = std::filesystem;

namespace {

std::string config_error(const json& user) {
    try {
        merge_config(user);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
        return e.what();
    }
    return "";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("cylperc_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("config merging reports field paths") {
    CHECK(config_error(json::object()) == "seed: required");
    CHECK(config_error({{"seed", 1}, {"sample", {{"radius", 3}}}}) == "sample.radius: unknown key");
    CHECK(config_error({{"seed", 1}, {"sample", {{"R", "big"}}}}) == "sample.R: expected a number");
    CHECK(config_error({{"seed", -4}}) == "seed: expected a non-negative integer");
    CHECK(config_error({{"seed", 1}, {"flow", {{"q", {3, "x"}}}}}) == "flow.q[1]: expected an integer");
    CHECK(config_error({{"seed", 1}, {"d", 2}}) == "d: must lie in [3, 8]");
    CHECK(config_error({{"seed", 1}, {"walk", 5}}) == "walk: expected a table");
    auto c = merge_config({{"seed", 9}, {"sample", {{"R", 3}}}});
    CHECK(c["sample"]["R"].get<double>() == 3.0);
    CHECK(c["sample"]["u"] == default_config()["sample"]["u"]);
    CHECK_THROWS_AS(run_command("nope", {{"seed", 1}}), Error);
}

TEST_CASE("reports are deterministic and replay from their own config") {
    const json user = {{"seed", 21}, {"sample", {{"R", 8.0}}}};
    auto a = run_command("sample", user);
    auto b = run_command("sample", user);
    CHECK(a.dump() == b.dump());
    CHECK(a["schema_version"] == kSchemaVersion);
    CHECK(a["ok"] == true);
    auto again = run_command("sample", a["config"]);
    CHECK(again.dump() == a.dump());
    auto d1 = scratch("seed21"), d2 = scratch("seed22");
    json u1 = user, u2 = user;
    u1["out"] = d1.string();
    u2["seed"] = 22;
    u2["out"] = d2.string();
    run_command("sample", u1);
    run_command("sample", u2);
    CHECK(slurp(d1 / "sample.csv") != slurp(d2 / "sample.csv"));
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("render artifacts are byte-identical across runs") {
    auto d1 = scratch("render1"), d2 = scratch("render2");
    json user = {{"seed", 5}, {"render", {{"R", 8.0}, {"pixels", 40}}}};
    user["out"] = d1.string();
    auto r1 = run_command("render", user);
    user["out"] = d2.string();
    run_command("render", user);
    REQUIRE(r1["artifacts"].size() >= 3);
    for (const auto& f : r1["artifacts"]) {
        const std::string name = f.get<std::string>();
        CHECK(fs::exists(d1 / name));
        CHECK(slurp(d1 / name) == slurp(d2 / name));
    }
    const std::string svg = slurp(d1 / "slice.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(slurp(d1 / "tubes.obj").find("\nf ") != std::string::npos);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("flow report with ledger") {
    auto r = run_command("flow", {{"seed", 1}, {"flow", {{"q", {1}}, {"k_max", 1}, {"materialize", true}, {"thomson", true}}}});
    const auto& res = r["results"];
    CHECK(res["ok"] == true);
    CHECK(res["ledger"].size() == 1);
    CHECK(res["ratio"].is_null());
    CHECK(res["div_error"].get<double>() < 1e-12);
    CHECK_THROWS_AS(run_command("flow", {{"seed", 1}, {"flow", {{"k_max", 3}}}}), Error);
    CHECK_THROWS_AS(run_command("flow", {{"seed", 1}, {"flow", {{"thomson", true}}}}), Error);
}

TEST_CASE("selftest passes") {
    auto r = run_command("selftest", {{"seed", 1}});
    CHECK(r["results"]["failed"] == 0);
    CHECK(r["ok"] == true);
}
