#include <doctest.h>

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>

#include "renorm.hpp"

using namespace cylperc;
using boost::multiprecision::cpp_int;

namespace {

// smallest c with c^q ≥ L^p, i.e. ⌈L^{p/q}⌉, exactly
cpp_int ceil_root_pow(cpp_int L, unsigned p, unsigned q) {
    const cpp_int target = boost::multiprecision::pow(L, p);
    cpp_int lo = 0, hi = 1;
    while (boost::multiprecision::pow(hi, q) < target) hi *= 2;
    while (lo + 1 < hi) {
        cpp_int mid = (lo + hi) / 2;
        if (boost::multiprecision::pow(mid, q) >= target) hi = mid;
        else lo = mid;
    }
    return hi;
}

cpp_int next_L(const cpp_int& Lp, int k, unsigned p, unsigned q) {
    return 17 * (cpp_int(k) * k * 2 * Lp * Lp * ceil_root_pow(Lp, p, q) + Lp);
}

ScaleLadder desk(int k_max = 2) { return ladder(17, 0.2, 0.96, 0.02, 3, k_max); }

ProcessSample lines_through(const std::vector<Line>& ls, double R = 200) {
    ProcessSample s;
    s.d = 3;
    s.window = BallWindow{Vec(3), R};
    s.u_max = 1;
    for (const auto& l : ls) s.lines.push_back({l, 0.0});
    return s;
}

} // namespace

TEST_CASE("ladder against exact integer recursion") {
    auto lad = desk();
    CHECK(ceil_root_pow(17, 49, 50) == 17);
    CHECK(lad.L[1] == 167331);
    cpp_int L1 = next_L(17, 1, 49, 50);
    cpp_int L2 = next_L(L1, 2, 49, 50);
    CHECK(L1 == lad.L[1]);
    CHECK(L2 == lad.L[2]);
    CHECK(lad.L[2] % 17 == 0);
    CHECK(lad.L[1] % (2 * 17) == 17);
    CHECK(ladder_violations(lad).empty());
    for (std::int64_t L0 : {34, 51, 170}) {
        auto l = ladder(L0, 0.2, 0.97, 0.02, 4, 1);
        CHECK(cpp_int(l.L[1]) == next_L(L0, 1, 99, 100));
        CHECK(ladder_violations(l).empty());
    }
    try {
        desk(3);
        FAIL("L_3 fits in 64 bits");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::LadderOverflow);
    }
}

TEST_CASE("ceil_pow is exact at rational exponents") {
    for (std::int64_t L = 2; L < 3000; L += 7) {
        CHECK(cpp_int(ceil_pow(L, 0.98)) == ceil_root_pow(L, 49, 50));
        CHECK(cpp_int(ceil_pow(L, 0.5)) == ceil_root_pow(L, 1, 2));
        CHECK(cpp_int(ceil_pow(L, 0.75)) == ceil_root_pow(L, 3, 4));
    }
    CHECK(ceil_pow(16, 0.5) == 4);
    CHECK(ceil_pow(17, 0.5) == 5);
}

TEST_CASE("schedules") {
    auto lad = desk();
    CHECK(lad.u_tilde == doctest::Approx(std::pow(17.0, -1.9)));
    CHECK(lad.u[0] == doctest::Approx(lad.u_tilde / 2));
    CHECK(lad.rho[0] == doctest::Approx(1));
    for (int k = 1; k <= lad.k_max(); ++k) {
        CHECK(lad.u[k] > lad.u[k - 1]);
        CHECK(lad.u[k] < lad.u_tilde);
        CHECK(lad.rho[k] > lad.rho[k - 1]);
        CHECK(lad.rho[k] < 2);
        CHECK(lad.u[k] == doctest::Approx(lad.u_tilde * (1 - 1.0 / (k + 2))));
    }
    CHECK_FALSE(lad.warnings.empty());
    CHECK_THROWS_AS(ladder(18, 0.2, 0.96, 0.02, 3, 1), Error);
    CHECK_THROWS_AS(ladder(17, 0.3, 0.96, 0.02, 3, 1), Error);
    CHECK_THROWS_AS(ladder(17, 0.2, 0.9, 0.02, 3, 1), Error);
    CHECK_THROWS_AS(ladder(17, 0.2, 0.96, 0.05, 3, 1), Error);
    auto syn = synthetic_ladder(17, {3, 5}, 0.2, 0.96, 0.02, 3);
    CHECK(syn.L == std::vector<std::int64_t>{17, 867, 73695});
    CHECK(ladder_violations(syn).empty());
    CHECK_THROWS_AS(synthetic_ladder(17, {2}, 0.2, 0.96, 0.02, 3), Error);
}

TEST_CASE("classify0 counts strictly above L0^gamma") {
    auto lad = desk(0);
    const IVec o(3);
    auto none = lines_through({});
    CHECK_FALSE(classify0(make_view(none, 1, 1), o, lad).bad);
    // ⌊17^0.2⌋ = 1 line is good, 2 are bad
    auto one = lines_through({make_line(Vec(3), Vec{0, 0, 1})});
    CHECK_FALSE(classify0(make_view(one, 1, 1), o, lad).bad);
    auto two = lines_through({make_line(Vec(3), Vec{0, 0, 1}), make_line(Vec(3), Vec{1, 1, 0})});
    auto v = classify0(make_view(two, 1, 1), o, lad);
    CHECK(v.bad);
    CHECK(v.count == 2);
    // a line at distance 17.5 from the box counts at rho = 1 only if within reach
    auto grazing = lines_through({make_line(Vec{18.5, 0, 0}, Vec{0, 0, 1}), make_line(Vec(3), Vec{0, 0, 1})});
    CHECK_FALSE(classify0(make_view(grazing, 1, 1), o, lad).bad);
    CHECK(classify0(make_view(grazing, 1, 1.5), o, lad).bad);
}

TEST_CASE("classify0 is increasing in (u, rho) on coupled samples") {
    auto lad = desk(0);
    for (int r = 0; r < 200; ++r) {
        auto s = sample_hitting_ball(0.05, Vec(3), 40, derive_seed(3, "mono", r));
        IVec x{0, 0, 0};
        bool lo = classify0(make_view(s, 0.02, 1), x, lad).bad;
        bool hi = classify0(make_view(s, 0.03, 1.5), x, lad).bad;
        CHECK((!lo || hi));
    }
}

TEST_CASE("classify_k examples and monotonicity") {
    auto lad = desk();
    const std::int64_t L1 = lad.L[1];
    const IVec o(3);
    CHECK_FALSE(classify_k({}, lad, 2).bad);
    // pair floor k²L_{k−1}^{2+α} at k = 2, rounded up to a multiple of 2L₁
    const double floor2 = 4 * std::pow(double(L1), 2.96);
    const std::int64_t n = std::int64_t(std::ceil(floor2 / double(2 * L1))) + 1;
    const IVec a{0, 0, 0}, b{2 * L1 * n, 0, 0}, c{0, 2 * L1 * n, 0};
    CHECK(2 * L1 * n < lad.L[2]);
    CHECK_FALSE(classify_k({a, b}, lad, 2).bad);
    auto bad = classify_k({a, b, c}, lad, 2);
    CHECK(bad.bad);
    CHECK_FALSE(classify_k({a, b, IVec{4 * L1 * n, 0, 0}}, lad, 2).bad);
    // too close to each other
    CHECK_FALSE(classify_k({a, IVec{2 * L1, 0, 0}, IVec{0, 2 * L1, 0}}, lad, 2).bad);
    // at k = 1 the unalignment window is empty
    const std::int64_t m = std::int64_t(std::ceil(std::pow(17.0, 2.96) / 34)) + 1;
    CHECK_FALSE(classify_k({o, IVec{34 * m, 0, 0}, IVec{0, 34 * m, 0}}, lad, 1).bad);

    // adding bad sub-boxes never makes a bad box good
    Rng rng(4);
    const std::int64_t h = (lad.L[2] / L1 - 1) / 2;
    for (int t = 0; t < 300; ++t) {
        std::vector<IVec> pts;
        int cnt = 1 + int(rng.below(4));
        for (int i = 0; i < cnt; ++i) {
            IVec p(3);
            for (int j = 0; j < 3; ++j) p[j] = 2 * L1 * (std::int64_t(rng.below(2 * h + 1)) - h);
            pts.push_back(p);
        }
        bool before = classify_k(pts, lad, 2).bad;
        IVec extra(3);
        for (int j = 0; j < 3; ++j) extra[j] = 2 * L1 * (std::int64_t(rng.below(2 * h + 1)) - h);
        pts.push_back(extra);
        if (before) CHECK(classify_k(pts, lad, 2).bad);
    }
}

TEST_CASE("covering lines") {
    auto lad = desk();
    const std::int64_t L1 = lad.L[1];
    const IVec o(3);
    auto none = find_covering_line({}, o, lad, 2);
    CHECK(none.found);
    CHECK(none.which == 0);
    CHECK(none.defect.empty);

    const IVec x{2 * L1 * 7, -2 * L1 * 3, 0};
    auto one = find_covering_line({x}, o, lad, 2);
    CHECK(one.found);
    CHECK(one.which == 1);
    CHECK(one.defect.contains(x, lad));
    CHECK(dist_point_line(to_vec(x), one.defect.line) < 1e-6);

    // collinear bad boxes far apart: the line through the two extreme ones covers them all
    const std::int64_t n = 200000000;
    std::vector<IVec> row{IVec{0, 0, 0}, IVec{2 * L1 * n, 0, 0}, IVec{4 * L1 * n, 0, 0}};
    auto line = find_covering_line(row, o, lad, 2);
    CHECK(line.found);
    for (const auto& y : row) CHECK(line.defect.contains(y, lad));
    std::reverse(row.begin(), row.end());
    CHECK(find_covering_line(row, o, lad, 2).found);

    auto cert = covering_certificate(lad, 2, 300, 5);
    CHECK(cert.trials == 300);
    CHECK(cert.good + cert.bad == 300);
    CHECK(cert.counterexamples == 0);
    CHECK(cert.good > 0);
    CHECK(cert.bad > 0);
}

TEST_CASE("vacancy agrees with the segment definition") {
    for (int r = 0; r < 8; ++r) {
        auto s = sample_hitting_ball(0.15, Vec(3), 14, derive_seed(6, "vac", r));
        const IVec c{1, -1, 0};
        Vacancy v(s, 0.1, 1.0, c, 5);
        std::size_t closed = 0;
        for (std::int64_t a = -5; a <= 5; ++a)
            for (std::int64_t b = -5; b <= 5; ++b)
                for (std::int64_t e = -5; e <= 5; ++e) {
                    IVec y{c[0] + a, c[1] + b, c[2] + e};
                    bool shut = false;
                    for (const auto& l : s.lines) {
                        if (l.level > 0.1) continue;
                        for (int ax = 0; ax < 3 && !shut; ++ax)
                            for (int sg : {-1, 1}) {
                                Vec z = to_vec(y);
                                z[ax] += sg;
                                if (segment_hits_cylinder(to_vec(y), z, {l.line, 1.0})) shut = true;
                            }
                    }
                    CHECK(v.is_open(y) == !shut);
                    closed += shut;
                }
        CHECK(v.closed_count() == closed);
        CHECK(hole0(v, c, 5).size() == closed);
    }
    auto empty = sample_hitting_ball(0, Vec(3), 20, 1);
    Vacancy v(empty, 0, 1, IVec(3), 5);
    CHECK(v.all_open());
    CHECK(hole0(v, IVec(3), 5).empty());
}

TEST_CASE("box hitting mass against the ball sampler") {
    // lines hitting B(0,R) that come within rho of the box, versus the Steiner formula
    const double L = 2, rho = 0.5, R = 5;
    MeanVar m;
    for (int r = 0; r < 6000; ++r) {
        auto s = sample_hitting_ball(1, Vec(3), R, derive_seed(7, "mass", r));
        int c = 0;
        for (const auto& l : s.lines) c += dist_set_line(BoxInf{Vec(3), L}, l.line) <= rho;
        m.add(c);
    }
    CHECK(std::fabs(m.mean - box_hitting_mass(L, rho, 3)) < 3.5 * m.sem());
    // ρ = 0: mean projected area of the cube, surface/4 = 6L²
    CHECK(box_hitting_mass(L, 0, 3) == doctest::Approx(6 * L * L));
}

TEST_CASE("p0 estimate") {
    auto zero = ladder(17, 0.2, 0.96, 0.02, 3, 0);
    zero.u = {0};
    auto z = estimate_p0(zero, 200, 1);
    CHECK(z.bad == 0);
    CHECK(z.estimate == 0);
    auto r = estimate_p0(ladder(17, 0.2, 0.96, 0.02, 3, 0), 1000, 2);
    CHECK(r.within_ci);
    CHECK(r.tail <= r.tail_env);
    CHECK(r.lambda == doctest::Approx(r.u0 * box_hitting_mass(17, r.rho0, 3)));
}
