#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "decouple.hpp"

using namespace cylperc;

namespace {

// χ(cap) by quadrature of the polar density ∝ cos θ sin^{d−2} θ
double cap_mass_quadrature(double chord, int d) {
    using boost::math::quadrature::gauss_kronrod;
    const double theta = std::acos(1 - chord * chord / 2);
    auto f = [d](double t) { return std::cos(t) * std::pow(std::sin(t), d - 2); };
    const double num = gauss_kronrod<double, 61>::integrate(f, 0.0, theta, 15, 1e-14);
    const double den = gauss_kronrod<double, 61>::integrate(f, 0.0, std::acos(0.0), 15, 1e-14);
    return num / den;
}

} // namespace

TEST_CASE("two-box geometry") {
    auto g = build_two_box(10, 0.5, 0.5, 1, 3);
    CHECK(g.sep == doctest::Approx(std::pow(10, 2.5) / 0.5));
    CHECK(g.sep == doctest::Approx(632.456).epsilon(1e-5));
    CHECK(2 * g.s_half == 40);
    CHECK(g.s_prime_half == doctest::Approx(2 * std::pow(10, 1.5)));
    // dist(B₁, B₂) along e_d
    CHECK(g.B2.center[2] - g.B1.center[2] - 2 * g.L == doctest::Approx(g.sep));
    CHECK(g.B1.radius == 10);
    CHECK(build_two_box(10, 0.5, 0.999999, 1, 3).cap_chord == doctest::Approx(0.0125).epsilon(1e-5));
    // chord c ↔ cos θ = 1 − c²/2
    CHECK(g.cap_cos == doctest::Approx(1 - g.cap_chord * g.cap_chord / 2));
    CHECK_THROWS_AS(build_two_box(10, 1.5, 0.5, 1, 3), Error);
    CHECK_THROWS_AS(build_two_box(10, 0.5, 0.5, 5, 3), Error);
    CHECK_THROWS_AS(build_two_box(0.5, 0.5, 0.5, 1, 3), Error);
}

TEST_CASE("cap mass: closed form, quadrature and monotonicity") {
    CHECK(cap_mass(1, 10, 3) == doctest::Approx(1 - std::pow(1 - 1.0 / 12800, 2)));
    CHECK(cap_mass(1, 10, 3) == doctest::Approx(1.56244e-4).epsilon(1e-5));
    CHECK(cap_mass(1e-9, 10, 3) < 1e-20);
    for (int d = 3; d <= 6; ++d)
        for (double eps : {0.1, 0.5, 1.0})
            for (double L : {1.0, 3.0, 10.0}) {
                CHECK(std::fabs(cap_mass(eps, L, d) - cap_mass_quadrature(eps / (8 * L), d)) < 1e-8);
                CHECK(cap_mass(eps, L, d) < cap_mass(eps * 1.1, L, d));
                CHECK(cap_mass(eps, L, d) > cap_mass(eps, L * 1.1, d));
            }
}

TEST_CASE("cap sampler stays in the cap with the conditioned law") {
    const double cos_max = 0.6;
    Rng rng(3), ref(4);
    std::vector<double> a(10, 0), b(10, 0);
    for (int i = 0; i < 50000; ++i) {
        Vec w = sample_cap(rng, 3, cos_max);
        CHECK(w[2] > cos_max);
        CHECK(norm(w) == doctest::Approx(1));
        a[std::min(9, int((w[2] - cos_max) / (1 - cos_max) * 10))] += 1;
        // rejection oracle: χ conditioned on the cap
        Vec v;
        do v = sample_chi(ref, 3);
        while (v[2] <= cos_max);
        b[std::min(9, int((v[2] - cos_max) / (1 - cos_max) * 10))] += 1;
    }
    CHECK(chi2_two_sample(a, b).p > 0.01);
}

TEST_CASE("gamma resampling keeps intersection points") {
    auto g = build_two_box(6, 0.5, 0.5, 1.5, 3);
    CHECK(gamma_resample({}, 1, g, 1).empty());
    Rng rng(5);
    std::vector<Line> in;
    for (int i = 0; i < 2000; ++i) {
        Vec p{rng.uniform(-3 * g.s_prime_half, 3 * g.s_prime_half),
              rng.uniform(-3 * g.s_prime_half, 3 * g.s_prime_half), g.pi1};
        in.push_back(from_hyperplane_param({p, sample_cap(rng, 3, g.cap_cos)}));
    }
    for (int plane : {1, 2}) {
        auto out = gamma_resample(in, plane, g, 6);
        REQUIRE(out.size() == in.size());
        int moved = 0;
        for (std::size_t i = 0; i < in.size(); ++i) {
            auto a = to_hyperplane_param(in[i], g.plane(plane));
            auto b = to_hyperplane_param(out[i], g.plane(plane));
            CHECK(dist(a.p, b.p) < 1e-6);
            CHECK(g.in_cap(b.w));
            if (g.in_square(a.p, g.s_prime_half)) moved += !same_line(in[i], out[i]);
            else CHECK(same_line(in[i], out[i]));
        }
        CHECK(moved > 0);
    }
}

TEST_CASE("detailed balance at u = 0 and at a small intensity") {
    auto g = build_two_box(4, 0.5, 0.5, 1, 3);
    auto zero = detailed_balance_test(g, 0, 100, 1);
    for (const auto& s : zero.stats) CHECK(s.mean == 0);
    auto r = detailed_balance_test(g, 0.05, 2000, 2);
    CHECK(r.ok);
    CHECK(r.ks.p > 0.01);
}

TEST_CASE("wiggle bound") {
    auto w = wiggle_check(100, 0.5, 3, 20000, 7);
    CHECK(w.ok);
    CHECK(w.bound == doctest::Approx(0.375));
    CHECK(w.max_displacement < 0.375);
    CHECK(w.max_displacement > 0);
}

TEST_CASE("landing points spread out") {
    auto g = build_two_box(6, 0.5, 0.5, 1, 3);
    auto r = landing_density_probe(g, 20000, 8, true);
    CHECK(r.cells_hit >= 100);
    CHECK(r.independence.p > 0.01);
}

TEST_CASE("three-box predicates") {
    const double L = 2, eps = 0.5, alpha = 0.5;
    const double far = 10 * std::pow(L, 2 + alpha) / eps;
    CHECK_FALSE(three_box_predicates(Vec{0, 0, 0}, Vec{far, 0, 0}, Vec{2 * far, 0, 0}, L, eps, alpha).ok);
    // at L = 2, ε = 0.5 the floor 30√3ε/L exceeds √2, so nothing is unaligned
    CHECK_FALSE(three_box_predicates(Vec{0, 0, 0}, Vec{far, 0, 0}, Vec{0, far, 0}, L, eps, alpha).ok);
    const double far2 = 10 * std::pow(100.0, 2 + alpha) / 0.05;
    auto right = three_box_predicates(Vec{0, 0, 0}, Vec{far2, 0, 0}, Vec{0, far2, 0}, 100, 0.05, alpha);
    CHECK(right.ok);
    CHECK(right.dir_dist == doctest::Approx(std::sqrt(2.0)));
    auto close = three_box_predicates(Vec{0, 0, 0}, Vec{1, 0, 0}, Vec{0, far, 0}, L, eps, alpha);
    CHECK_FALSE(close.separated);
    CHECK_THROWS_AS(three_box_predicates(Vec{0, 0, 0}, Vec{0, 0, 0}, Vec{0, far, 0}, L, eps, alpha), Error);
    // unit vectors at chord distance exactly 30√3·ε/L
    const double c = 30 * std::sqrt(3.0) * 0.05 / 100;
    const double theta = 2 * std::asin(c / 2);
    const double f2 = 2 * far2;
    auto edge = three_box_predicates(Vec{0, 0, 0}, Vec{f2, 0, 0}, Vec{f2 * std::cos(theta), f2 * std::sin(theta), 0},
                                     100, 0.05, alpha);
    CHECK(edge.dir_dist == doctest::Approx(c).epsilon(1e-9));
}

TEST_CASE("decoupling estimates") {
    auto g = build_two_box(6, 0.5, 0.5, 1.5, 3);
    DecoupleConfig cfg;
    cfg.f1.kind = cfg.f2.kind = ObsKind::CountAtLeast;
    cfg.replicas = 500;
    cfg.u = 0;
    cfg.delta = 0;
    auto z = estimate_decoupling(g, cfg);
    CHECK(z.lhs.value == 0);
    CHECK(z.rhs1.value == 0);
    CHECK(z.fkg.value == 0);
    CHECK(z.fkg_ok);
    CHECK(z.bound_ok);

    cfg.u = 0.01;
    cfg.delta = 0.005;
    cfg.replicas = 3000;
    cfg.seed = 9;
    auto r = estimate_decoupling(g, cfg);
    CHECK(r.monotone_violations == 0);
    CHECK(r.fkg_ok);
    for (const auto& e : {r.lhs, r.rhs1, r.rhs2, r.fkg}) {
        CHECK(e.value >= 0);
        CHECK(e.value <= 1);
        CHECK(e.sigma >= 0);
    }
    auto again = estimate_decoupling(g, cfg);
    CHECK(again.lhs.value == r.lhs.value);
    CHECK(again.rhs2.value == r.rhs2.value);

    cfg.f2.kind = ObsKind::AllVacant;
    CHECK_THROWS_AS(estimate_decoupling(g, cfg), Error);
    cfg.f1.kind = ObsKind::AllVacant;
    cfg.replicas = 1000;
    auto dec = estimate_decoupling(g, cfg);
    CHECK(dec.monotone_violations == 0);
}
