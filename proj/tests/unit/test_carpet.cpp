#include <doctest.h>

#include <set>

#include "carpet.hpp"

using namespace cylperc;

namespace {

ScaleLadder small(std::vector<std::int64_t> q) { return synthetic_ladder(17, q, 0.2, 0.96, 0.02, 3); }

bool inside(const IVec& y, const BoxId& m, std::int64_t L) {
    for (int i = 0; i < y.d; ++i)
        if (std::llabs(y[i] - m.x[i]) > L) return false;
    return true;
}

} // namespace

TEST_CASE("fractal sizes") {
    CleanWorld w;
    auto lad = small({3, 3});
    Carpet c(lad, w);
    CHECK(c.fractal_size(0) == 9);
    CHECK(c.fractal_size(1) == 81);
    CHECK(c.fractal_size(2) == 729);
    const BoxId m{IVec(3), 1};
    for (Dir v : all_dirs(3)) {
        const auto& f = c.fractal(m, v);
        CHECK(f.size() == 81);
        CHECK(std::set<IVec>(f.begin(), f.end()).size() == 81);
        // every point lies on the face plane
        for (const auto& y : f) CHECK(y[v.axis] == v.sign * lad.L[1]);
    }
    // a shared face has one fractal
    CHECK(c.fractal(m, {0, 1}) == c.fractal({IVec{2 * lad.L[1], 0, 0}, 1}, {0, -1}));
}

TEST_CASE("box flows are unit flows between fractals") {
    CleanWorld w;
    auto lad = small({3});
    Carpet c(lad, w);
    for (int k : {0, 1}) {
        const BoxId m{IVec{2 * lad.L[k], 0, 2 * lad.L[k]}, k};
        for (auto [v, u] : {std::pair{Dir{0, -1}, Dir{0, 1}}, std::pair{Dir{1, 1}, Dir{2, -1}}}) {
            auto f = c.flow_box(m, v, u);
            const auto& fv = c.fractal(m, v);
            const auto& fw = c.fractal(m, u);
            const double unit = 1.0 / double(fv.size());
            std::set<IVec> src(fv.begin(), fv.end()), dst(fw.begin(), fw.end());
            double out = 0;
            for (const auto& [y, dv] : f.divergence()) {
                if (src.contains(y)) {
                    CHECK(dv == doctest::Approx(unit));
                    out += dv;
                } else if (dst.contains(y)) {
                    CHECK(dv == doctest::Approx(-unit));
                } else {
                    CHECK(std::fabs(dv) < 1e-12);
                }
            }
            CHECK(out == doctest::Approx(1));
            f.for_each([&](const IVec& y, int axis, double) {
                CHECK(inside(y, m, lad.L[k]));
                CHECK(inside(y + IVec::unit(3, axis), m, lad.L[k]));
            });
        }
    }
}

TEST_CASE("path bundles") {
    CleanWorld w;
    auto lad = small({5});
    Carpet c(lad, w);
    const std::int64_t q = c.q(1);
    const IVec z{0, 0, 0};
    auto straight = c.path_bundle_box(z, {0, -1}, {0, 1}, 1);
    CHECK(straight.size() == std::size_t(q * q));
    for (const auto& p : straight) CHECK(p.size() == std::size_t(q));
    for (auto [a, b] : {std::pair{Dir{0, -1}, Dir{0, 1}}, std::pair{Dir{0, -1}, Dir{1, 1}},
                        std::pair{Dir{2, 1}, Dir{1, -1}}}) {
        auto bundle = c.path_bundle_box(z, a, b, 1);
        std::set<IVec> seen;
        std::size_t total = 0;
        for (const auto& p : bundle) {
            total += p.size();
            seen.insert(p.begin(), p.end());
            // entry next to face a, exit next to face b, unit coarse steps
            CHECK(a.sign * (p.front()[a.axis] - z[a.axis]) == 2 * lad.L[0] * ((q - 1) / 2));
            CHECK(b.sign * (p.back()[b.axis] - z[b.axis]) == 2 * lad.L[0] * ((q - 1) / 2));
            for (std::size_t i = 1; i < p.size(); ++i) CHECK(linf(p[i] - p[i - 1]) == 2 * lad.L[0]);
        }
        CHECK(seen.size() == total);
    }
    const BoxId m{IVec(3), 1};
    for (auto [v, u] : {std::pair{Dir{0, -1}, Dir{0, 1}}, std::pair{Dir{0, 1}, Dir{2, -1}}}) {
        auto route = c.coarse_path17(m, v, u);
        REQUIRE_FALSE(route.empty());
        CHECK(route.size() <= 3 * 17);
        for (std::size_t i = 1; i < route.size(); ++i) CHECK(linf(route[i] - route[i - 1]) == 2 * lad.L[1] / 17);
    }
}

TEST_CASE("Gram energies match the materialized flow") {
    CleanWorld w;
    auto lad = small({3});
    AssembleConfig cfg;
    cfg.k_max = 1;
    Carpet a(lad, w);
    cfg.materialize = true;
    auto mat = assemble_flow(a, cfg);
    Carpet b(lad, w);
    cfg.materialize = false;
    auto gram = assemble_flow(b, cfg);
    REQUIRE(mat.ok);
    REQUIRE(gram.ok);
    REQUIRE(mat.flow);
    CHECK(mat.div_error < 1e-12);
    CHECK(mat.antisym_error < 1e-12);
    REQUIRE(mat.ledger.size() == gram.ledger.size());
    for (std::size_t i = 0; i < mat.ledger.size(); ++i)
        CHECK(gram.ledger[i].energy == doctest::Approx(mat.ledger[i].energy).epsilon(1e-9));
    CHECK(gram.total_energy == doctest::Approx(mat.total_energy).epsilon(1e-9));
    CHECK(mat.flow->energy() <= mat.total_energy * (1 + 1e-9));
    // unit source at the origin, total sink −1 on the outer fractal
    auto div = mat.flow->divergence();
    CHECK(div[IVec(3)] == doctest::Approx(1));
    double sink = 0;
    for (const auto& y : mat.sink) sink += div[y];
    CHECK(sink == doctest::Approx(-1));
    for (const auto& cf : mat.cones) CHECK(cf.div_error < 1e-12);
}

TEST_CASE("an empty sample world is the clean world") {
    CleanWorld clean;
    auto lad = small({3});
    for (auto& x : lad.u) x = 0;
    auto s = sample_hitting_ball(0, Vec{double(lad.L[1]), 0, 0}, 4 * double(lad.L[1]), 3);
    SampleWorld sw(s, lad, 1);
    CHECK(sw.lines() == 0);
    CHECK(sw.good(IVec(3), 1));
    CHECK(sw.good(IVec{34, 0, -34}, 0));
    CHECK(sw.open(IVec{5, 5, 5}));
    CHECK(sw.hole0(IVec(3)).empty());
    AssembleConfig cfg;
    cfg.k_max = 1;
    Carpet a(lad, clean), b(lad, sw);
    auto ra = assemble_flow(a, cfg), rb = assemble_flow(b, cfg);
    REQUIRE(ra.ok);
    REQUIRE(rb.ok);
    CHECK(rb.total_energy == doctest::Approx(ra.total_energy).epsilon(1e-12));
    CHECK(rb.edges == ra.edges);
}

TEST_CASE("a line through a 0-box makes a hole and moves the anchor") {
    auto lad = small({3});
    lad.u = {1, 1};
    ProcessSample s;
    s.d = 3;
    s.window = BallWindow{Vec{double(lad.L[1]), 0, 0}, 4 * double(lad.L[1])};
    s.u_max = 1;
    // through the centre of the +e₁ face of the origin box, along e₁
    s.lines.push_back({make_line(Vec{17, 0, 0}, Vec{1, 0, 0}), 0.5});
    SampleWorld sw(s, lad, 1);
    CHECK_FALSE(sw.open(IVec{17, 0, 0}));
    CHECK(sw.open(IVec{17, 5, 5}));
    CHECK_FALSE(sw.hole0(IVec(3)).empty());
    Carpet c(lad, sw);
    CleanWorld clean;
    Carpet ref(lad, clean);
    const BoxId m{IVec(3), 0};
    auto g = c.good_centers(m, {0, 1});
    CHECK(g.size() < ref.good_centers(m, {0, 1}).size());
    for (const auto& y : c.fractal(m, {0, 1})) CHECK(sw.open(y));
}

TEST_CASE("dir_between") {
    CHECK(dir_between(IVec{0, 0, 0}, IVec{0, 5, 0}) == Dir{1, 1});
    CHECK(dir_between(IVec{0, 0, 0}, IVec{0, 0, -2}) == Dir{2, -1});
    CHECK_THROWS_AS(dir_between(IVec{1, 1, 1}, IVec{1, 1, 1}), Error);
}
