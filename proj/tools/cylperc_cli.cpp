// Command-line front end over the C interface.
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cylperc/cylperc.h"

using json = nlohmann::ordered_json;

namespace {

// defaults come from the library so --help shows the real values
json library_defaults() {
    char* text = nullptr;
    if (cp_default_config(&text) != CP_OK) return json::object();
    json cfg = json::parse(text);
    cp_string_free(text);
    return cfg;
}

struct Binding {
    std::string block, key;
    CLI::Option* opt = nullptr;
    json kind;
    double d = 0;
    std::int64_t i = 0;
    bool b = false;
    std::string s;
    std::vector<std::int64_t> vi;
    std::vector<std::string> vs;

    json value() const {
        if (kind.is_boolean()) return b;
        if (kind.is_string()) return s;
        if (kind.is_number_integer()) return i;
        if (kind.is_number()) return d;
        if (kind.is_array() && !kind.empty() && kind[0].is_string()) return vs;
        return vi;
    }
};

void bind(CLI::App* app, std::deque<Binding>& out, const std::string& block, const json& defaults) {
    for (auto it = defaults.begin(); it != defaults.end(); ++it) {
        const json& v = it.value();
        if (v.is_object()) continue;
        Binding& bd = out.emplace_back();
        bd.block = block;
        bd.key = it.key();
        bd.kind = v;
        std::string name = "--" + it.key();
        std::string dashed = it.key();
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        if (dashed != it.key()) name += ",--" + dashed;
        if (v.is_boolean()) bd.opt = app->add_option(name, bd.b);
        else if (v.is_string()) bd.opt = app->add_option(name, bd.s);
        else if (v.is_number_integer()) bd.opt = app->add_option(name, bd.i);
        else if (v.is_number()) bd.opt = app->add_option(name, bd.d);
        else if (v.is_array() && !v.empty() && v[0].is_string()) bd.opt = app->add_option(name, bd.vs);
        else if (v.is_array()) bd.opt = app->add_option(name, bd.vi);
        else continue;
        bd.opt->default_str(v.is_string() ? v.get<std::string>() : v.dump());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Poisson cylinder percolation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML config file; flags override it");
    std::string json_config, format = "json", out;
    std::uint64_t seed = 0;
    int replicas = 0, d = 3;
    app.add_option("--json-config", json_config, "JSON config, or a report whose config to replay");
    auto* seed_opt = app.add_option("--seed", seed, "master seed (required)");
    auto* rep_opt = app.add_option("--replicas", replicas, "override the command's replica count")->default_str("0");
    auto* out_opt = app.add_option("--out", out, "directory for the report and artifacts");
    auto* d_opt = app.add_option("-d,--d", d, "dimension")->default_str("3");
    app.add_option("--format", format, "stdout format")->check(CLI::IsMember({"json", "csv"}))->default_str("json");

    const json defaults = library_defaults();
    std::deque<Binding> bindings;
    std::map<std::string, CLI::App*> subs;
    const std::map<std::string, std::string> help = {
        {"sample", "sample cylinder axes hitting a ball"},
        {"render", "export CSV, an SVG slice and OBJ tubes"},
        {"decouple", "detailed balance, wiggle bound and decoupling estimates"},
        {"renorm", "scale ladder, p0 tail and covering-line certificate"},
        {"flow", "assemble the multiscale unit flow and its energy ledger"},
        {"walk", "vacant graph walks, effective resistance and trends"},
        {"selftest", "run the built-in example suite"}};
    for (const auto& [name, text] : help) {
        CLI::App* sub = app.add_subcommand(name, text);
        subs[name] = sub;
        if (defaults.contains(name)) bind(sub, bindings, name, defaults[name]);
        // ladder parameters feed u_tilde for decouple, flow and walk
        if (name != "renorm" && name != "selftest" && defaults.contains("renorm"))
            for (const char* k : {"L0", "gamma", "alpha", "beta"})
                if (!defaults[name].contains(k)) {
                    Binding& bd = bindings.emplace_back();
                    bd.block = "renorm";
                    bd.key = k;
                    bd.kind = defaults["renorm"][k];
                    if (bd.kind.is_number_integer()) bd.opt = sub->add_option(std::string("--") + k, bd.i);
                    else bd.opt = sub->add_option(std::string("--") + k, bd.d);
                    bd.opt->default_str(bd.kind.dump());
                }
    }
    CLI11_PARSE(app, argc, argv);

    std::string command;
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) command = name;

    json cfg = json::object();
    if (!json_config.empty()) {
        std::ifstream f(json_config);
        if (!f) {
            std::cerr << "error [io]: cannot read " << json_config << "\n";
            return 2;
        }
        json j = json::parse(f, nullptr, false);
        if (j.is_discarded()) {
            std::cerr << "error [invalid-argument]: " << json_config << " is not JSON\n";
            return 2;
        }
        cfg = j.contains("config") ? j["config"] : j;
    }
    if (seed_opt->count()) cfg["seed"] = seed;
    if (rep_opt->count()) cfg["replicas"] = replicas;
    if (d_opt->count()) cfg["d"] = d;
    if (out_opt->count()) cfg["out"] = out;
    for (const auto& bd : bindings)
        if (bd.opt && bd.opt->count()) cfg[bd.block][bd.key] = bd.value();

    char* report = nullptr;
    cp_status st = cp_run(command.c_str(), cfg.dump().c_str(), &report);
    if (st != CP_OK) {
        std::cerr << "error [" << cp_status_name(st) << "]: " << cp_last_error() << "\n";
        return 2;
    }
    std::string text = report;
    cp_string_free(report);
    json rep = json::parse(text);
    const std::string dir = rep["config"]["out"];
    if (!dir.empty()) {
        std::filesystem::create_directories(dir);
        std::ofstream(std::filesystem::path(dir) / (command + ".json"), std::ios::binary) << text;
    }
    if (format == "csv") {
        const json& res = rep["results"];
        if (!res.contains("table")) {
            std::cerr << "error [invalid-argument]: " << command << " has no tabular output\n";
            return 2;
        }
        const json& t = res["table"];
        std::string line;
        for (std::size_t i = 0; i < t["columns"].size(); ++i)
            std::cout << (i ? "," : "") << t["columns"][i].get<std::string>();
        std::cout << "\n";
        for (const auto& row : t["rows"]) {
            for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? "," : "") << row[i].dump();
            std::cout << "\n";
        }
    } else {
        std::cout << text;
    }
    return rep["ok"].get<bool>() ? 0 : 1;
}
