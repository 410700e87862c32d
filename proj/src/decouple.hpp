// Two-box and three-box laboratory: cap resampling, detailed balance, wiggle
// bound, landing delocalization and the sprinkled decoupling inequality.
#pragma once

#include <string>
#include <vector>

#include "lineproc.hpp"
#include "stats.hpp"

namespace cylperc {

struct TwoBoxGeometry {
    int d = 3;
    double L = 0, alpha = 0, eps = 0, rho = 0;
    double sep = 0;          // L^{2+α}/ε
    BoxInf B1, B2;
    double pi1 = 0, pi2 = 0; // heights of Π₁, Π₂
    double s_half = 0;       // S_i = [−2L,2L]^{d−1}, laterally centred on B_i
    double s_prime_half = 0; // S_i′ = [−2L^{1+α}, 2L^{1+α}]^{d−1}
    double cap_chord = 0;    // D_{ε,L}: |w − e_d| < ε/(8L)
    double cap_cos = 0;      // w_d > 1 − ε²/(128L²)
    double pad = 0;          // B̃_i = points within ρ(1+ε) of B_i

    bool in_cap(const Vec& w) const { return w[d - 1] > cap_cos; }
    bool in_square(const Vec& p, double half) const {
        for (int i = 0; i < d - 1; ++i)
            if (std::fabs(p[i]) > half) return false;
        return true;
    }
    double plane(int i) const { return i == 1 ? pi1 : pi2; }
};

TwoBoxGeometry build_two_box(double L, double alpha, double eps, double rho, int d);

// χ(D) for the cap of chord radius eps/(8L)
double cap_mass(double eps, double L, int d);
// χ conditioned on {w_d > cos_max}, by inverting the polar-angle law
Vec sample_cap(Rng& rng, int d, double cos_max);

// Γ_i: lines crossing S_i′ get a fresh cap direction through the same p_i
std::vector<Line> gamma_resample(const std::vector<Line>& lines, int plane,
                                 const TwoBoxGeometry& g, std::uint64_t seed);

struct SwapStat {
    std::string name;
    bool antisymmetric = true;
    double mean = 0, sem = 0;
    bool ok = true; // |mean| ≤ 3σ for antisymmetric statistics
};

struct DetailedBalanceReport {
    int replicas = 0;
    double mean_lines = 0;
    std::vector<SwapStat> stats;
    KsResult ks;
    bool ok = true;
};

DetailedBalanceReport detailed_balance_test(const TwoBoxGeometry& g, double u, int replicas,
                                            std::uint64_t seed);

struct WiggleReport {
    int samples = 0;
    double max_displacement = 0;
    double bound = 0; // 3ε/4
    bool ok = true;
};

WiggleReport wiggle_check(double L, double eps, int d, int samples, std::uint64_t seed,
                          double min_L = 1.0);

struct LandingReport {
    int samples = 0;
    int grid = 32;
    int cells_hit = 0;
    double sup_density = 0;
    double scaled_sup = 0; // sup_density · L^{(1+α)(d−1)}
    double frac_in_s2prime = 0;
    ChiSquare independence;
};

// single_line: every sample starts from the centre of S₁, otherwise p₁ is uniform on S₁
LandingReport landing_density_probe(const TwoBoxGeometry& g, int samples, std::uint64_t seed,
                                    bool single_line = false);

struct ThreeBoxResult {
    bool ok = false;
    double min_pair = 0, pair_floor = 0;
    double dir_dist = 0, dir_lower = 0, dir_upper = 0;
    bool separated = false, unaligned = false;
};

ThreeBoxResult three_box_predicates(const Vec& x1, const Vec& x2, const Vec& x3, double L,
                                    double eps, double alpha);

// lines through both far squares must miss the thin cap around unit(x₂−x₁)
struct DisjointnessReport {
    int samples = 0;
    int violations = 0;
    double min_gap = 0; // smallest |w − v₁₂| minus the cap radius
};

DisjointnessReport three_box_disjointness(const Vec& x1, const Vec& x2, const Vec& x3, double L,
                                          double eps, double alpha, int samples,
                                          std::uint64_t seed);

enum class ObsKind { CountAtLeast, CoveredFractionAtLeast, AllVacant };

struct MonotoneObservable {
    ObsKind kind = ObsKind::CountAtLeast;
    int threshold = 1;     // count_at_least
    int grid = 8;          // points per axis for grid observables
    double fraction = 0.5; // covered_fraction_at_least
    bool increasing() const { return kind != ObsKind::AllVacant; }
};

std::string obs_name(const MonotoneObservable& f);

struct Estimate {
    double value = 0, sigma = 0;
};

struct DecoupleReport {
    Estimate lhs, rhs1, rhs2, fkg, product, f1, f2;
    double err_term = 0, err_c = 1;
    double baseline = 0; // ((r+1)²/|x−y|)^{d−1}
    int replicas = 0;
    int monotone_violations = 0;
    std::string verdict_fkg, verdict_bound;
    bool fkg_ok = true, bound_ok = true;
    std::vector<double> lhs_values; // per replica, only when requested
};

struct DecoupleConfig {
    double u = 0, delta = 0;
    MonotoneObservable f1, f2;
    int replicas = 10000;
    std::uint64_t seed = 1;
    double err_c = 1.0;
    bool keep_values = false;
};

DecoupleReport estimate_decoupling(const TwoBoxGeometry& g, const DecoupleConfig& cfg);

} // namespace cylperc
