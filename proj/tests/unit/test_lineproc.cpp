#include <doctest.h>

#include <numbers>

#include "lineproc.hpp"
#include "stats.hpp"

using namespace cylperc;

namespace {

const double pi = std::numbers::pi;

bool within(double est, double sem, double target, double z = 3.5) { return std::fabs(est - target) <= z * sem; }

} // namespace

TEST_CASE("ball sampler: intensity, foot points and levels") {
    CHECK(sample_hitting_ball(0, Vec(3), 5, 1).lines.empty());
    MeanVar n;
    for (int r = 0; r < 10000; ++r) {
        auto s = sample_hitting_ball(1, Vec(3), 1, derive_seed(5, "n", r));
        n.add(double(s.lines.size()));
        for (const auto& l : s.lines) {
            CHECK(dist_point_line(Vec(3), l.line) <= 1 + 1e-12);
            CHECK(l.level >= 0);
            CHECK(l.level < 1);
        }
    }
    CHECK(within(n.mean, n.sem(), pi));
    // d = 4: κ₃R³ = 4π/3 · 8
    MeanVar n4;
    for (int r = 0; r < 4000; ++r)
        n4.add(double(sample_hitting_ball(0.25, Vec(4), 2, derive_seed(6, "n4", r)).lines.size()));
    CHECK(within(n4.mean, n4.sem(), 0.25 * 4 * pi / 3 * 8));
    try {
        sample_hitting_ball(1, Vec(3), 0, 1);
        FAIL("R = 0 accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidWindow);
    }
}

TEST_CASE("ball sampler: directions uniform on the projective sphere") {
    // |w_3| is uniform on [0,1] for an isotropic direction in d = 3
    std::vector<double> obs(10, 0), exp(10, 0);
    int total = 0;
    for (int r = 0; r < 400; ++r)
        for (const auto& l : sample_hitting_ball(5, Vec(3), 3, derive_seed(7, "dir", r)).lines) {
            obs[std::min(9, int(std::fabs(l.line.dir[2]) * 10))] += 1;
            ++total;
        }
    for (auto& e : exp) e = total / 10.0;
    CHECK(chi2_gof(obs, exp).p > 0.01);
}

TEST_CASE("chi directions: mean height 2/3 and c_mu = 1/2") {
    Rng rng(8);
    MeanVar m;
    for (int i = 0; i < 100000; ++i) {
        Vec w = sample_chi(rng, 3);
        CHECK(w[2] > 0);
        m.add(w[2]);
    }
    CHECK(within(m.mean, m.sem(), 2.0 / 3.0));
    CHECK(c_mu(3) == doctest::Approx(0.5));
    // ∫_𝔻 w_d dσ / σ(𝔻) = κ_{d−1} / (d κ_d / 2)
    for (int d = 2; d <= 8; ++d) CHECK(c_mu(d) == doctest::Approx(2 * kappa(d - 1) / (d * kappa(d))));
}

TEST_CASE("hyperplane sampler agrees with the ball sampler on a probe ball") {
    CHECK(sample_hyperplane_window(0, 0, Vec{-1, -1, 0}, Vec{1, 1, 0}, 1).lines.empty());
    // lines meeting B(0,1) with w_3 ≥ 1/2 cross Π_0 within distance 3 of the origin
    const Vec lo{-3, -3, 0}, hi{3, 3, 0};
    const Ball probe{Vec(3), 1};
    MeanVar a, b;
    for (int r = 0; r < 4000; ++r) {
        int na = 0, nb = 0;
        for (const auto& l : sample_hyperplane_window(1, 0, lo, hi, derive_seed(9, "plane", r)).lines)
            na += dist_point_line(probe.center, l.line) <= probe.radius && std::fabs(l.line.dir[2]) >= 0.5;
        for (const auto& l : sample_hitting_ball(1, Vec(3), 1, derive_seed(9, "ball", r)).lines)
            nb += std::fabs(l.line.dir[2]) >= 0.5;
        a.add(na);
        b.add(nb);
    }
    // analytic: π · P[|w_3| ≥ 1/2] = π/2
    CHECK(within(a.mean, a.sem(), pi / 2));
    CHECK(within(b.mean, b.sem(), pi / 2));
    try {
        sample_hyperplane_window(1, 0, Vec{0, 0, 0}, Vec{0, 1, 0}, 1);
        FAIL("empty rectangle accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidWindow);
    }
}

TEST_CASE("count_hitting: mean 4π for the unit ball at rho 1") {
    MeanVar m;
    for (int r = 0; r < 10000; ++r) {
        auto s = sample_hitting_ball(1, Vec(3), 10, derive_seed(10, "count", r));
        m.add(count_hitting(make_view(s, 1, 1), ConvexSet{Ball{Vec(3), 1}}));
    }
    CHECK(within(m.mean, m.sem(), 4 * pi));
}

TEST_CASE("count_hitting and is_covered against brute force, monotone in u and rho") {
    for (int r = 0; r < 30; ++r) {
        auto s = sample_hitting_ball(0.5, Vec(3), 8, derive_seed(11, "brute", r));
        BoxInf box{Vec{0.5, -1, 2}, 1.5};
        for (double u : {0.1, 0.3, 0.5})
            for (double rho : {0.5, 1.0, 2.0}) {
                int brute = 0;
                for (const auto& l : s.lines) brute += l.level <= u && dist_set_line(box, l.line) <= rho;
                int got = count_hitting(make_view(s, u, rho), ConvexSet{box});
                CHECK(got == brute);
                if (u < 0.5) CHECK(got <= count_hitting(make_view(s, u + 0.2, rho), ConvexSet{box}));
                CHECK(got <= count_hitting(make_view(s, u, rho + 0.5), ConvexSet{box}));
            }
        Rng rng(derive_seed(11, "pts", r));
        for (int i = 0; i < 50; ++i) {
            Vec x{rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)};
            bool brute = false;
            for (const auto& l : s.lines) brute |= l.level <= 0.4 && dist_point_line(x, l.line) <= 1;
            CHECK(is_covered(make_view(s, 0.4, 1), x) == brute);
        }
    }
    ProcessSample z = sample_hitting_ball(0.0, Vec(3), 5, 1);
    CHECK(count_hitting(make_view(z, 0, 1), ConvexSet{Ball{Vec(3), 1}}) == 0);
    CHECK_FALSE(is_covered(make_view(z, 0, 1), Vec(3)));
}

TEST_CASE("single axis line coverage") {
    ProcessSample s;
    s.d = 3;
    s.window = BallWindow{Vec(3), 10};
    s.u_max = 1;
    s.lines.push_back({make_line(Vec(3), Vec{0, 0, 1}), 0.5});
    auto v = make_view(s, 1, 1);
    CHECK(is_covered(v, Vec{0.5, 0, 0}));
    CHECK_FALSE(is_covered(v, Vec{2, 0, 0}));
    CHECK(is_covered(v, Vec{1, 0, 0})); // boundary inclusive
}

TEST_CASE("window coverage is enforced") {
    auto s = sample_hitting_ball(1, Vec(3), 5, 3);
    try {
        count_hitting(make_view(s, 1, 1), ConvexSet{Ball{Vec{4.5, 0, 0}, 1}});
        FAIL("undercovered query accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::WindowUndercoverage);
    }
    CHECK_NOTHROW(count_hitting(make_view(s, 1, 1), ConvexSet{Ball{Vec{2, 0, 0}, 2}}));
    BallWindow w = window_for(ConvexSet{BoxInf{Vec{1, 1, 1}, 2}}, 1);
    CHECK(dist(w.center, Vec{1, 1, 1}) < 1e-12);
    CHECK(w.R == doctest::Approx(2 * std::sqrt(3.0) + 1));
}

TEST_CASE("restriction, top-up and determinism") {
    auto s = sample_hitting_ball(1, Vec(3), 6, 21);
    auto again = sample_hitting_ball(1, Vec(3), 6, 21);
    CHECK(to_csv(s) == to_csv(again));
    auto half = s.restrict_to(0.5);
    CHECK(half.u_max == 0.5);
    for (const auto& l : half.lines) CHECK(l.level <= 0.5);

    MeanVar added, prod, orig;
    for (int r = 0; r < 4000; ++r) {
        auto base = sample_hitting_ball(0.3, Vec(3), 2, derive_seed(12, "base", r));
        auto up = top_up(base, 0.2, derive_seed(12, "up", r));
        CHECK(up.u_max == doctest::Approx(0.5));
        auto back = up.restrict_to(0.3);
        CHECK(to_csv(back) == to_csv(base));
        double extra = double(up.lines.size() - base.lines.size());
        for (std::size_t i = base.lines.size(); i < up.lines.size(); ++i) CHECK(up.lines[i].level >= 0.3);
        added.add(extra);
        orig.add(double(base.lines.size()));
        prod.add(extra * double(base.lines.size()));
    }
    CHECK(within(added.mean, added.sem(), 0.2 * pi * 4));
    // covariance of added and original counts
    const double cov = prod.mean - added.mean * orig.mean;
    const double sd = std::sqrt(added.var() * orig.var() / double(added.n));
    CHECK(std::fabs(cov) <= 4 * sd);
}

TEST_CASE("thinning matches a direct sample at the lower level") {
    std::vector<double> thin(8, 0), direct(8, 0);
    for (int r = 0; r < 10000; ++r) {
        auto s = sample_hitting_ball(1, Vec(3), 1, derive_seed(13, "a", r)).restrict_to(0.4);
        auto t = sample_hitting_ball(0.4, Vec(3), 1, derive_seed(13, "b", r));
        thin[std::min<std::size_t>(7, s.lines.size())] += 1;
        direct[std::min<std::size_t>(7, t.lines.size())] += 1;
    }
    CHECK(chi2_two_sample(thin, direct).p > 0.01);
}

TEST_CASE("csv round trip") {
    for (auto s : {sample_hitting_ball(0.7, Vec{1, 2, 3}, 4, 5),
                   sample_hyperplane_window(0.3, 1.5, Vec{-2, -1, 0}, Vec{2, 3, 0}, 6)}) {
        auto back = from_csv(to_csv(s));
        CHECK(back.lines.size() == s.lines.size());
        CHECK(to_csv(back) == to_csv(s));
        CHECK(window_string(back.window) == window_string(s.window));
        for (std::size_t i = 0; i < s.lines.size(); ++i) {
            CHECK(back.lines[i].level == s.lines[i].level);
            CHECK(back.lines[i].line.anchor == s.lines[i].line.anchor);
            CHECK(back.lines[i].line.dir == s.lines[i].line.dir);
        }
    }
    CHECK_THROWS_AS(from_csv("garbage"), Error);
}

TEST_CASE("line index returns every line within reach") {
    for (int r = 0; r < 10; ++r) {
        auto s = sample_hitting_ball(0.2, Vec(3), 30, derive_seed(14, "idx", r));
        std::vector<Line> lines;
        for (const auto& l : s.lines) lines.push_back(l.line);
        const double reach = 2.5;
        LineIndex idx(lines, Vec{-20, -20, -20}, Vec{20, 20, 20}, 4.0, reach);
        Rng rng(derive_seed(14, "q", r));
        for (int i = 0; i < 300; ++i) {
            Vec x{rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 20)};
            const auto& near = idx.near(x);
            for (std::size_t j = 0; j < lines.size(); ++j)
                if (dist_point_line(x, lines[j]) <= reach)
                    CHECK(std::find(near.begin(), near.end(), int(j)) != near.end());
            std::vector<int> sorted(near.begin(), near.end());
            std::sort(sorted.begin(), sorted.end());
            CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
        }
    }
}

TEST_CASE("statistics helpers against closed forms") {
    // P[Poisson(2) > 3] = 1 − e^{−2}(1 + 2 + 2 + 4/3)
    CHECK(poisson_tail_above(2, 3) == doctest::Approx(1 - std::exp(-2.0) * (1 + 2 + 2 + 4.0 / 3)));
    CHECK(poisson_tail_above(2, 3.5) == doctest::Approx(1 - std::exp(-2.0) * (1 + 2 + 2 + 4.0 / 3)));
    // chi-square with 2 dof: survival e^{−x/2}
    CHECK(chi2_sf(3.0, 2) == doctest::Approx(std::exp(-1.5)));
    auto w = wilson(50, 100, 2);
    CHECK(w.lo < 0.5);
    CHECK(w.hi > 0.5);
    CHECK(w.hi - 0.5 == doctest::Approx(0.5 - w.lo));
}
