#include "runners.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <tuple>

#include "carpet.hpp"
#include "decouple.hpp"
#include "render.hpp"
#include "renorm.hpp"
#include "rng.hpp"
#include "vacantwalk.hpp"

#ifndef CYLPERC_GIT_DESCRIBE
#define CYLPERC_GIT_DESCRIBE "unknown"
#endif

namespace cylperc {

const char* git_describe() { return CYLPERC_GIT_DESCRIBE; }

const char* error_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InvalidWindow: return "invalid-window";
    case ErrorCode::WindowUndercoverage: return "window-undercoverage";
    case ErrorCode::DegenerateDirection: return "degenerate-direction";
    case ErrorCode::InvalidSegment: return "invalid-segment";
    case ErrorCode::LadderOverflow: return "ladder-overflow";
    case ErrorCode::NoPath: return "no-path";
    case ErrorCode::NoConnection: return "no-connection";
    case ErrorCode::FlowNotFeasible: return "flow-not-feasible";
    case ErrorCode::StartCovered: return "start-covered";
    case ErrorCode::Io: return "io";
    case ErrorCode::Internal: return "internal";
    }
    return "unknown";
}

json default_config() {
    json c;
    c["seed"] = nullptr;
    c["d"] = 3;
    c["replicas"] = 0; // 0: each command's own default
    c["out"] = "";
    c["sample"] = {{"u", 0.07}, {"R", 24.0}, {"rho", 1.0}};
    c["render"] = {{"u", 0.07}, {"R", 24.0}, {"rho", 1.0}, {"z", 0.0},
                   {"pixels", 240}, {"sides", 12}, {"input", ""}};
    c["renorm"] = {{"L0", 17},
                   {"gamma", 0.2},
                   {"alpha", 0.96},
                   {"beta", 0.02},
                   {"k_max", 2},
                   {"p0_L0", {17, 34, 51}},
                   {"p0_replicas", 2000},
                   {"certificate_k", 2},
                   {"certificate_trials", 1000}};
    c["decouple"] = {{"L", 6.0},
                     {"alpha", 0.5},
                     {"eps", 0.5},
                     {"rho", 1.5},
                     {"u_factor", 1.0},
                     {"delta_frac", 0.5},
                     {"err_c", 1.0},
                     {"replicas", 10000},
                     {"observables", {"count_at_least", "all_vacant"}},
                     {"threshold", 1},
                     {"grid", 8},
                     {"fraction", 0.5},
                     {"balance_replicas", 10000},
                     {"wiggle_L", 100.0},
                     {"wiggle_eps", 0.5},
                     {"wiggle_samples", 100000},
                     {"values_csv", false}};
    c["flow"] = {{"L0", 17},
                 {"q", {3, 3}},
                 {"k_max", 2},
                 {"J", 0.5},
                 {"world", "clean"},
                 {"u_factor", 1.0},
                 {"materialize", false},
                 {"thomson", false}};
    c["walk"] = {{"u_factor", 1.0},
                 {"rho", 1.0},
                 {"R", 12},
                 {"walks", 100000},
                 {"R_grid", {8, 12, 16, 20, 24}},
                 {"low_u_factor", 0.25},
                 {"curve_replicas", 10},
                 {"high_u_factor", 10.0},
                 {"reach_R", 24},
                 {"reach_replicas", 100}};
    return c;
}

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& why) {
    fail(ErrorCode::InvalidArgument, path + ": " + why);
}

void overlay(json& base, const json& user, const std::string& path) {
    if (!user.is_object()) bad_field(path.empty() ? "config" : path, "expected a table");
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string p = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) bad_field(p, "unknown key");
        json& slot = base[it.key()];
        const json& v = it.value();
        if (slot.is_object()) {
            overlay(slot, v, p);
        } else if (slot.is_null()) {
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
                bad_field(p, "expected a non-negative integer");
            slot = v;
        } else if (slot.is_boolean()) {
            if (!v.is_boolean()) bad_field(p, "expected true or false");
            slot = v;
        } else if (slot.is_string()) {
            if (!v.is_string()) bad_field(p, "expected a string");
            slot = v;
        } else if (slot.is_number_integer()) {
            if (!v.is_number_integer()) bad_field(p, "expected an integer");
            slot = v;
        } else if (slot.is_number()) {
            if (!v.is_number()) bad_field(p, "expected a number");
            slot = v.get<double>();
        } else if (slot.is_array()) {
            if (!v.is_array()) bad_field(p, "expected an array");
            const bool strings = !slot.empty() && slot[0].is_string();
            for (std::size_t i = 0; i < v.size(); ++i)
                if (strings ? !v[i].is_string() : !v[i].is_number_integer())
                    bad_field(p + "[" + std::to_string(i) + "]",
                              strings ? "expected a string" : "expected an integer");
            slot = v;
        }
    }
}

void check(bool ok, const std::string& path, const std::string& why) {
    if (!ok) bad_field(path, why);
}

struct Ctx {
    json cfg;
    std::uint64_t seed;
    int d;
    std::filesystem::path out;
    json artifacts = json::array();

    const json& block(const char* name) const { return cfg.at(name); }
    int replicas(int fallback) const {
        int r = cfg.at("replicas").get<int>();
        return r > 0 ? r : fallback;
    }
    void write(const std::string& name, const std::string& content) {
        if (out.empty()) return;
        std::filesystem::create_directories(out);
        std::ofstream f(out / name, std::ios::binary);
        if (!f) fail(ErrorCode::Io, "cannot write " + (out / name).string());
        f << content;
        artifacts.push_back(name);
    }
};

std::string csv_table(const json& table) {
    std::string s;
    const auto& cols = table.at("columns");
    for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i].get<std::string>();
    s += "\n";
    for (const auto& row : table.at("rows")) {
        for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + row[i].dump();
        s += "\n";
    }
    return s;
}

double desk_utilde(const Ctx& c) {
    const json& r = c.block("renorm");
    return ladder(r.at("L0").get<std::int64_t>(), r.at("gamma"), r.at("alpha"), r.at("beta"), c.d, 0).u_tilde;
}

// ----------------------------------------------------------------- sample

json run_sample(Ctx& c) {
    const json& b = c.block("sample");
    const double u = b.at("u"), R = b.at("R"), rho = b.at("rho");
    check(u >= 0, "sample.u", "must be >= 0");
    check(R > 0, "sample.R", "must be positive");
    check(rho > 0, "sample.rho", "must be positive");
    auto s = sample_hitting_ball(u, Vec(c.d), R + rho, c.seed);
    c.write("sample.csv", to_csv(s));
    return {{"lines", s.lines.size()},
            {"window", window_string(s.window)},
            {"expected_lines", u * window_mass(s.window, c.d)}};
}

// ----------------------------------------------------------------- render

json run_render(Ctx& c) {
    const json& b = c.block("render");
    SliceSpec spec;
    spec.u = b.at("u");
    spec.R = b.at("R");
    spec.rho = b.at("rho");
    spec.z = b.at("z");
    spec.pixels = b.at("pixels");
    check(spec.pixels >= 1 && spec.pixels <= 4096, "render.pixels", "must lie in [1, 4096]");
    check(spec.rho > 0, "render.rho", "must be positive");
    const std::string input = b.at("input");
    ProcessSample s;
    if (input.empty()) {
        s = sample_hitting_ball(spec.u, Vec(c.d), spec.R + spec.rho, c.seed);
    } else {
        std::ifstream f(input, std::ios::binary);
        if (!f) fail(ErrorCode::Io, "render.input: cannot read " + input);
        std::stringstream ss;
        ss << f.rdbuf();
        s = from_csv(ss.str());
        check(s.d == c.d, "render.input", "dimension differs from d");
    }
    auto st = slice_stats(s, spec);
    c.write("slice.svg", render_svg_slice(s, spec));
    c.write("lines.csv", to_csv(s));
    std::size_t tubes = 0;
    if (c.d == 3) {
        std::string obj = render_obj(s, spec.u, spec.rho, spec.R, b.at("sides"));
        for (std::size_t p = obj.find("\no "); p != std::string::npos; p = obj.find("\no ", p + 1)) ++tubes;
        c.write("tubes.obj", obj);
    }
    std::size_t used = 0;
    for (const auto& l : s.lines) used += l.level <= spec.u;
    return {{"lines", used},
            {"slice", {{"pixels_in_disc", st.inside},
                       {"covered", st.covered},
                       {"covered_fraction", st.inside ? double(st.covered) / double(st.inside) : 0.0}}},
            {"tubes", tubes}};
}

// ----------------------------------------------------------------- decouple

json stat_json(const Estimate& e) { return {{"value", e.value}, {"sigma", e.sigma}}; }

json run_decouple(Ctx& c) {
    const json& b = c.block("decouple");
    auto g = build_two_box(b.at("L"), b.at("alpha"), b.at("eps"), b.at("rho"), c.d);
    const double ut = desk_utilde(c);
    const double u = b.at("u_factor").get<double>() * ut;
    json res;
    res["geometry"] = {{"separation", g.sep}, {"S1_side", 4 * g.L}, {"cap_radius", g.cap_chord}};
    res["u_tilde"] = ut;
    res["u"] = u;

    auto bal = detailed_balance_test(g, u, c.replicas(b.at("balance_replicas")), derive_seed(c.seed, "balance"));
    json stats = json::array();
    for (const auto& s : bal.stats)
        stats.push_back({{"name", s.name}, {"antisymmetric", s.antisymmetric}, {"mean", s.mean},
                         {"sem", s.sem}, {"ok", s.ok}});
    res["detailed_balance"] = {{"replicas", bal.replicas}, {"stats", stats},
                               {"ks_p", bal.ks.p}, {"ok", bal.ok}};

    auto wg = wiggle_check(b.at("wiggle_L"), b.at("wiggle_eps"), c.d, b.at("wiggle_samples"),
                           derive_seed(c.seed, "wiggle"));
    res["wiggle"] = {{"samples", wg.samples}, {"max_displacement", wg.max_displacement},
                     {"bound", wg.bound}, {"ok", wg.ok}};

    json est = json::array();
    std::string values = "observable,replica,f1f2\n";
    for (const auto& name : b.at("observables")) {
        MonotoneObservable f;
        const std::string n = name;
        if (n == "count_at_least") f.kind = ObsKind::CountAtLeast;
        else if (n == "covered_fraction_at_least") f.kind = ObsKind::CoveredFractionAtLeast;
        else if (n == "all_vacant") f.kind = ObsKind::AllVacant;
        else bad_field("decouple.observables", "unknown observable " + n);
        f.threshold = b.at("threshold");
        f.grid = b.at("grid");
        f.fraction = b.at("fraction");
        DecoupleConfig dc;
        dc.u = u;
        dc.delta = b.at("delta_frac").get<double>() * u;
        dc.f1 = dc.f2 = f;
        dc.replicas = c.replicas(b.at("replicas"));
        dc.seed = derive_seed(c.seed, "decouple:" + n);
        dc.err_c = b.at("err_c");
        dc.keep_values = b.at("values_csv");
        auto r = estimate_decoupling(g, dc);
        est.push_back({{"observable", obs_name(f)},
                       {"increasing", f.increasing()},
                       {"lhs", stat_json(r.lhs)},
                       {"rhs1", stat_json(r.rhs1)},
                       {"rhs2", stat_json(r.rhs2)},
                       {"product", stat_json(r.product)},
                       {"fkg", stat_json(r.fkg)},
                       {"err_term", r.err_term},
                       {"err_c", r.err_c},
                       {"baseline", r.baseline},
                       {"monotone_violations", r.monotone_violations},
                       {"verdict_fkg", r.verdict_fkg},
                       {"verdict_bound", r.verdict_bound},
                       {"fkg_ok", r.fkg_ok},
                       {"bound_ok", r.bound_ok}});
        for (std::size_t i = 0; i < r.lhs_values.size(); ++i)
            values += n + "," + std::to_string(i) + "," + json(r.lhs_values[i]).dump() + "\n";
    }
    res["decoupling"] = est;
    if (b.at("values_csv").get<bool>()) c.write("decouple_values.csv", values);
    return res;
}

// ----------------------------------------------------------------- renorm

json ladder_json(const ScaleLadder& lad) {
    json L = json::array(), u = json::array(), rho = json::array();
    for (int k = 0; k <= lad.k_max(); ++k) {
        L.push_back(lad.L[k]);
        u.push_back(lad.u[k]);
        rho.push_back(lad.rho[k]);
    }
    return {{"L", L}, {"u", u}, {"rho", rho}, {"u_tilde", lad.u_tilde}, {"synthetic", lad.synthetic},
            {"warnings", lad.warnings}, {"violations", ladder_violations(lad)}};
}

json run_renorm(Ctx& c) {
    const json& b = c.block("renorm");
    const double gamma = b.at("gamma"), alpha = b.at("alpha"), beta = b.at("beta");
    auto lad = ladder(b.at("L0").get<std::int64_t>(), gamma, alpha, beta, c.d, b.at("k_max"));
    json res;
    res["ladder"] = ladder_json(lad);

    json p0 = json::array(), rows = json::array();
    for (const auto& L0 : b.at("p0_L0")) {
        auto l0 = ladder(L0.get<std::int64_t>(), gamma, alpha, beta, c.d, 0);
        auto r = estimate_p0(l0, c.replicas(b.at("p0_replicas")), derive_seed(c.seed, "p0", L0.get<std::uint64_t>()));
        p0.push_back({{"L0", r.L0}, {"u0", r.u0}, {"rho0", r.rho0}, {"threshold", r.threshold},
                      {"replicas", r.replicas}, {"bad", r.bad}, {"estimate", r.estimate},
                      {"ci", {r.ci.lo, r.ci.hi}}, {"lambda", r.lambda}, {"tail", r.tail},
                      {"lambda_env", r.lambda_env}, {"tail_env", r.tail_env}, {"within_ci", r.within_ci}});
        rows.push_back({r.L0, r.estimate, r.ci.lo, r.ci.hi, r.tail});
    }
    res["p0"] = p0;
    res["table"] = {{"columns", {"L0", "p0_estimate", "ci_lo", "ci_hi", "poisson_tail"}}, {"rows", rows}};

    const int k = b.at("certificate_k");
    check(k >= 1 && k <= lad.k_max(), "renorm.certificate_k", "must lie in [1, k_max]");
    auto cert = covering_certificate(lad, k, b.at("certificate_trials"), derive_seed(c.seed, "certificate"));
    res["certificate"] = {{"k", k}, {"trials", cert.trials}, {"good", cert.good}, {"bad", cert.bad},
                          {"counterexamples", cert.counterexamples},
                          {"covering_cases", {cert.which[0], cert.which[1], cert.which[2]}}};
    return res;
}

// ----------------------------------------------------------------- flow

json run_flow(Ctx& c) {
    const json& b = c.block("flow");
    const json& r = c.block("renorm");
    std::vector<std::int64_t> q = b.at("q").get<std::vector<std::int64_t>>();
    auto lad = synthetic_ladder(b.at("L0").get<std::int64_t>(), q, r.at("gamma"), r.at("alpha"),
                                r.at("beta"), c.d);
    const double uf = b.at("u_factor");
    check(uf >= 0, "flow.u_factor", "must be >= 0");
    for (auto& x : lad.u) x *= uf;
    AssembleConfig ac;
    ac.k_max = b.at("k_max");
    ac.J = b.at("J");
    ac.materialize = b.at("materialize");
    check(ac.k_max >= 1 && ac.k_max <= lad.k_max(), "flow.k_max", "must lie in [1, len(q)]");
    const std::string world = b.at("world");
    const bool thomson = b.at("thomson");
    check(!thomson || ac.materialize, "flow.thomson", "needs flow.materialize = true");

    json res;
    res["ladder"] = ladder_json(lad);
    std::unique_ptr<World> w;
    if (world == "clean") {
        w = std::make_unique<CleanWorld>();
    } else if (world == "sample") {
        check(ac.k_max == 1, "flow.k_max", "sample worlds support k_max = 1");
        const std::int64_t L1 = lad.L[1];
        const double reach = std::max(lad.rho[0] + 1, lad.rho[1]) + double(lad.L[0] + 1) * std::sqrt(double(c.d));
        Vec ctr(c.d);
        ctr[0] = double(L1);
        const double Rw = double(2 * L1 + 1) * std::sqrt(double(c.d)) + reach + 1;
        auto s = sample_hitting_ball(lad.u[1], ctr, Rw, derive_seed(c.seed, "flow-sample"));
        auto sw = std::make_unique<SampleWorld>(s, lad, 1);
        res["sample_lines"] = sw->lines();
        w = std::move(sw);
    } else {
        bad_field("flow.world", "expected \"clean\" or \"sample\"");
    }
    Carpet carpet(lad, *w);
    auto rep = assemble_flow(carpet, ac);
    res["ok"] = rep.ok;
    res["failure"] = rep.failure;
    json ledger = json::array(), rows = json::array();
    for (const auto& row : rep.ledger) {
        ledger.push_back({{"k", row.k}, {"L_k", lad.L[row.k]}, {"energy", row.energy},
                          {"scaled", row.scaled}, {"boxes", row.boxes}, {"box_flows", row.box_flows}});
        rows.push_back({row.k, lad.L[row.k], row.energy, row.scaled, row.boxes});
    }
    res["origin_energy"] = rep.origin_energy;
    res["ledger"] = ledger;
    res["table"] = {{"columns", {"k", "L_k", "energy", "scaled", "boxes"}}, {"rows", rows}};
    if (rep.ok) {
        res["total_energy"] = rep.total_energy;
        res["ratio"] = rep.ledger.size() >= 2 ? json(rep.ratio) : json(nullptr);
        res["div_error"] = rep.div_error;
        res["antisym_error"] = rep.antisym_error;
        res["sink_size"] = rep.sink.size();
        json fs = json::array();
        for (int k = 0; k <= ac.k_max; ++k) fs.push_back(carpet.fractal_size(k));
        res["fractal_sizes"] = fs;
        json cones = json::array();
        for (const auto& cf : rep.cones) {
            json prof = json::array();
            double worst = 0;
            bool monotone = true;
            for (std::size_t i = 0; i < cf.depth_profile.size(); ++i) {
                auto [m, env] = cf.depth_profile[i];
                prof.push_back({m, env});
                worst = std::max(worst, m / env);
                if (i > 0 && m > cf.depth_profile[i - 1].first + 1e-12) monotone = false;
            }
            cones.push_back({{"k", cf.k}, {"boxes", cf.boxes.size()}, {"basis", cf.basis.size()},
                             {"edges", cf.edges.size()}, {"max_abs", cf.max_abs},
                             {"div_error", cf.div_error}, {"bottleneck", cf.bottleneck},
                             {"depth_profile", prof}, {"depth_monotone", monotone},
                             {"depth_max_ratio", worst}});
        }
        res["cones"] = cones;
        if (rep.flow) {
            res["edges"] = rep.edges;
            std::ostringstream os;
            os.precision(17);
            for (int i = 0; i < c.d; ++i) os << 'y' << i << ',';
            os << "axis,value\n";
            std::vector<std::tuple<IVec, int, double>> rows_e;
            rep.flow->for_each([&](const IVec& y, int axis, double v) { rows_e.emplace_back(y, axis, v); });
            std::sort(rows_e.begin(), rows_e.end());
            for (const auto& [y, axis, v] : rows_e) {
                for (int i = 0; i < c.d; ++i) os << y[i] << ',';
                os << axis << ',' << v << '\n';
            }
            c.write("flow_edges.csv", os.str());
        }
        if (thomson && rep.flow) {
            auto g = support_graph(*rep.flow);
            std::vector<int> sink;
            for (const auto& y : rep.sink) sink.push_back(g.find(y));
            auto t = thomson_check(*rep.flow, g, IVec(c.d), sink);
            res["thomson"] = {{"energy", t.energy}, {"r_eff", t.r_eff}, {"slack", t.slack}, {"ok", t.ok}};
        }
    }
    c.write("flow_ledger.csv", csv_table(res["table"]));
    return res;
}

// ----------------------------------------------------------------- walk

json run_walk(Ctx& c) {
    const json& b = c.block("walk");
    const double ut = desk_utilde(c), rho = b.at("rho");
    const std::int64_t R = b.at("R");
    check(R >= 2, "walk.R", "must be >= 2");
    check(rho > 0, "walk.rho", "must be positive");
    auto window = [&](std::int64_t r) { return double(r) * std::sqrt(double(c.d)) + rho + 1; };
    json res;
    res["u_tilde"] = ut;

    {
        const double u = b.at("u_factor").get<double>() * ut;
        auto s = sample_hitting_ball(u, Vec(c.d), window(R), derive_seed(c.seed, "walk-sample"));
        auto g = build_vacant_graph(s, u, rho, R);
        json part = {{"u", u}, {"R", R}, {"vertices", g.pos.size()}, {"edges", g.g.edges()}};
        const IVec o(c.d);
        const int src = g.find(o);
        if (src < 0) {
            part["start_covered"] = true;
        } else {
            const std::uint64_t walks = std::uint64_t(c.replicas(b.at("walks")));
            auto esc = escape_probability(g, o, R, walks, derive_seed(c.seed, "walks"));
            part["escape"] = {{"walks", esc.walks}, {"escapes", esc.escapes}, {"estimate", esc.estimate},
                              {"ci", {esc.ci.lo, esc.ci.hi}}};
            try {
                auto rr = effective_resistance(g.g, src, box_boundary(g, R));
                const double pred = 1.0 / (g.g.degree(src) * rr.r_eff);
                const double sigma = std::sqrt(pred * (1 - pred) / double(walks));
                part["r_eff"] = {{"value", rr.r_eff}, {"residual", rr.residual},
                                 {"iterations", rr.iterations}, {"converged", rr.converged}};
                part["identity"] = {{"predicted", pred}, {"sigma", sigma},
                                    {"z", sigma > 0 ? (esc.estimate - pred) / sigma : 0.0},
                                    {"within_3sigma", std::fabs(esc.estimate - pred) <= 3 * sigma}};
                auto h = harmonic_flow(g, rr);
                auto t = thomson_check(h, g, o, box_boundary(g, R));
                part["thomson_harmonic"] = {{"energy", t.energy}, {"r_eff", t.r_eff}, {"slack", t.slack}};
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoConnection) throw;
                part["r_eff"] = {{"value", nullptr}, {"failure", e.what()}};
            }
        }
        res["escape"] = part;
    }

    // R_eff(origin ↔ ∂B(0,R)) growth at small u
    {
        const double u = b.at("low_u_factor").get<double>() * ut;
        const int reps = b.at("curve_replicas");
        std::vector<std::int64_t> grid = b.at("R_grid").get<std::vector<std::int64_t>>();
        check(!grid.empty(), "walk.R_grid", "must not be empty");
        std::int64_t Rmax = *std::max_element(grid.begin(), grid.end());
        json rows = json::array();
        std::vector<MeanVar> mv(grid.size());
        std::vector<int> fails(grid.size(), 0);
        for (int r = 0; r < reps; ++r) {
            auto s = sample_hitting_ball(u, Vec(c.d), window(Rmax), derive_seed(c.seed, "curve", r));
            for (std::size_t i = 0; i < grid.size(); ++i) {
                auto g = build_vacant_graph(s, u, rho, grid[i]);
                int src = g.find(IVec(c.d));
                try {
                    if (src < 0) fail(ErrorCode::NoConnection, "origin covered");
                    mv[i].add(effective_resistance(g.g, src, box_boundary(g, grid[i])).r_eff);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::NoConnection) throw;
                    ++fails[i];
                }
            }
        }
        for (std::size_t i = 0; i < grid.size(); ++i)
            rows.push_back({grid[i], mv[i].mean, mv[i].sem(), mv[i].n, fails[i]});
        double growth = 0;
        if (mv.front().n && mv.back().n && mv.front().mean > 0) growth = mv.back().mean / mv.front().mean;
        res["curve"] = {{"u", u}, {"replicas", reps}, {"growth", growth}};
        res["table"] = {{"columns", {"R", "r_eff_mean", "r_eff_sem", "connected", "disconnected"}}, {"rows", rows}};
    }

    // origin's component at large u
    {
        const double u = b.at("high_u_factor").get<double>() * ut;
        const std::int64_t Rr = b.at("reach_R");
        const int reps = b.at("reach_replicas");
        int stuck = 0, covered = 0;
        for (int r = 0; r < reps; ++r) {
            auto s = sample_hitting_ball(u, Vec(c.d), window(Rr), derive_seed(c.seed, "reach", r));
            auto g = build_vacant_graph(s, u, rho, Rr);
            int src = g.find(IVec(c.d));
            if (src < 0) {
                ++covered;
                ++stuck;
                continue;
            }
            bool reach = false;
            for (std::size_t v = 0; v < g.pos.size() && !reach; ++v)
                reach = g.component[v] == g.component[src] && linf(g.pos[v]) >= Rr;
            stuck += !reach;
        }
        res["reach"] = {{"u", u}, {"R", Rr}, {"replicas", reps}, {"fail_to_reach", stuck},
                        {"origin_covered", covered},
                        {"fraction", reps ? double(stuck) / reps : 0.0}};
    }
    c.write("walk_curve.csv", csv_table(res["table"]));
    return res;
}

// ----------------------------------------------------------------- selftest

json run_selftest(Ctx&) {
    std::vector<std::pair<std::string, std::function<bool()>>> checks;
    auto near = [](double a, double b, double tol) { return std::fabs(a - b) <= tol; };
    checks.push_back({"dist_set_line: ball meeting a line is at distance 0", [] {
                          return dist_set_line(Ball{Vec{0, 0, 0}, 1}, make_line(Vec{0, 0, 0}, Vec{0, 0, 1})) == 0;
                      }});
    checks.push_back({"dist_point_line: unit offset", [] {
                          return std::fabs(dist_point_line(Vec{1, 0, 0}, make_line(Vec{0, 0, 0}, Vec{0, 0, 1})) - 1) < 1e-12;
                      }});
    checks.push_back({"sample: u = 0 gives no lines", [] {
                          return sample_hitting_ball(0, Vec(3), 5, 1).lines.empty();
                      }});
    checks.push_back({"ladder: L1 = 167331 for the desk preset", [] {
                          return ladder(17, 0.2, 0.96, 0.02, 3, 1).L[1] == 167331;
                      }});
    checks.push_back({"ladder: u0 = u_tilde / 2", [&] {
                          auto l = ladder(17, 0.2, 0.96, 0.02, 3, 1);
                          return near(l.u[0], l.u_tilde / 2, 1e-15);
                      }});
    checks.push_back({"two boxes: separation 10^2.5/0.5", [&] {
                          return near(build_two_box(10, 0.5, 0.5, 1, 3).sep, std::pow(10, 2.5) / 0.5, 1e-9);
                      }});
    checks.push_back({"two boxes: S1 side 40", [] { return build_two_box(10, 0.5, 0.5, 1, 3).s_half * 2 == 40; }});
    checks.push_back({"cap mass vanishes as eps -> 0", [] { return cap_mass(1e-12, 10, 3) < 1e-20; }});
    checks.push_back({"three boxes: collinear triple is aligned", [] {
                          return !three_box_predicates(Vec{0, 0, 0}, Vec{1e6, 0, 0}, Vec{2e6, 0, 0}, 2, 0.5, 0.5).ok;
                      }});
    checks.push_back({"vacant graph: u = 0 edge count", [] {
                          auto s = sample_hitting_ball(0, Vec(3), 8, 1);
                          auto g = build_vacant_graph(s, 0, 1, 3);
                          return g.g.edges() == std::size_t(3 * 7 * 7 * 6);
                      }});
    checks.push_back({"resistance: single edge is 1", [] {
                          auto g = Graph::from_edges(2, {{0, 1}});
                          return std::fabs(effective_resistance(g, 0, {1}).r_eff - 1) < 1e-10;
                      }});
    checks.push_back({"resistance: two parallel 2-paths give 1", [] {
                          auto g = Graph::from_edges(4, {{0, 1}, {1, 3}, {0, 2}, {2, 3}});
                          return std::fabs(effective_resistance(g, 0, {3}).r_eff - 1) < 1e-10;
                      }});
    checks.push_back({"escape: isolated start never escapes", [] {
                          VacantGraph g;
                          g.d = 3;
                          g.R = 2;
                          g.pos = {IVec(3)};
                          g.id[IVec(3)] = 0;
                          g.g = Graph::from_edges(1, {});
                          return escape_probability(g, IVec(3), 2, 100, 1).escapes == 0;
                      }});
    checks.push_back({"detailed balance: u = 0 statistics vanish", [] {
                          auto r = detailed_balance_test(build_two_box(4, 0.5, 0.5, 1, 3), 0, 50, 1);
                          for (const auto& s : r.stats)
                              if (s.mean != 0) return false;
                          return true;
                      }});
    checks.push_back({"flow: clean 0-box flow is a unit flow between fractals", [] {
                          auto lad = synthetic_ladder(17, {1}, 0.2, 0.96, 0.02, 3);
                          CleanWorld w;
                          Carpet cp(lad, w);
                          auto f = cp.flow_box({IVec(3), 0}, {0, -1}, {0, 1});
                          double in = 0;
                          for (const auto& [y, v] : f.divergence())
                              if (y[0] == -17) in += v;
                          return std::fabs(in - 1) < 1e-12;
                      }});
    json list = json::array();
    int failed = 0;
    for (auto& [name, fn] : checks) {
        bool ok = false;
        std::string err;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            err = e.what();
        }
        failed += !ok;
        json item = {{"name", name}, {"ok", ok}};
        if (!err.empty()) item["error"] = err;
        list.push_back(item);
    }
    return {{"checks", list}, {"passed", int(checks.size()) - failed}, {"failed", failed}};
}

} // namespace

json merge_config(const json& user) {
    json c = default_config();
    overlay(c, user, "");
    if (c["seed"].is_null()) bad_field("seed", "required");
    check(c["d"].get<int>() >= 3 && c["d"].get<int>() <= kMaxDim, "d", "must lie in [3, 8]");
    check(c["replicas"].get<int>() >= 0, "replicas", "must be >= 0");
    return c;
}

json run_command(const std::string& command, const json& user_config) {
    static const std::map<std::string, json (*)(Ctx&)> table = {
        {"sample", run_sample}, {"render", run_render}, {"decouple", run_decouple}, {"renorm", run_renorm},
        {"flow", run_flow},     {"walk", run_walk},     {"selftest", run_selftest}};
    auto it = table.find(command);
    if (it == table.end()) fail(ErrorCode::InvalidArgument, "unknown command " + command);
    Ctx c;
    c.cfg = merge_config(user_config);
    c.seed = c.cfg["seed"].get<std::uint64_t>();
    c.d = c.cfg["d"];
    c.out = c.cfg["out"].get<std::string>();
    json results = it->second(c);
    json rep;
    rep["schema_version"] = kSchemaVersion;
    rep["command"] = command;
    rep["git_describe"] = git_describe();
    rep["seed"] = c.seed;
    rep["config"] = c.cfg;
    rep["results"] = results;
    bool ok = true;
    if (results.contains("failed")) ok = results["failed"].get<int>() == 0;
    rep["ok"] = ok;
    rep["artifacts"] = c.artifacts;
    return rep;
}

} // namespace cylperc
