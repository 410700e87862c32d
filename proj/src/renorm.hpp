// Scale ladder, good/bad classification, covering lines, holes and p₀.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lattice.hpp"
#include "lineproc.hpp"
#include "stats.hpp"

namespace cylperc {

struct ScaleLadder {
    int d = 3;
    double gamma = 0.2, alpha = 0.96, beta = 0.02;
    std::vector<std::int64_t> L; // L[0..k_max]
    std::vector<double> u, rho;
    double u_tilde = 0;
    bool synthetic = false;            // L_k = 17·q_k·L_{k−1} instead of the growth law
    std::vector<std::string> warnings; // precondition checks that failed, as data
    int k_max() const { return int(L.size()) - 1; }
};

std::int64_t ceil_pow(std::int64_t L, double a);
ScaleLadder ladder(std::int64_t L0, double gamma, double alpha, double beta, int d, int k_max);
// small ladder for explicit flow constructions: L_k = 17·q_k·L_{k−1}, q_k odd
ScaleLadder synthetic_ladder(std::int64_t L0, const std::vector<std::int64_t>& q, double gamma,
                             double alpha, double beta, int d);
// invariants L_k ∈ 17ℕ, L_{k−1} | L_k, 2L_{k−1} ∤ L_k; empty when all hold
std::vector<std::string> ladder_violations(const ScaleLadder& lad);

inline BoxInf box_of(const IVec& x, std::int64_t Lk) { return {to_vec(x), double(Lk)}; }

struct Verdict0 {
    bool bad = false;
    int count = 0;
};
Verdict0 classify0(const CylinderView& view, const IVec& x, const ScaleLadder& lad);

struct VerdictK {
    bool bad = false;
    std::array<IVec, 3> witness{}; // apex first
};
// bad sub-box centres (scale k−1) inside a k-box
VerdictK classify_k(std::vector<IVec> bad, const ScaleLadder& lad, int k);

struct Defect {
    IVec owner;       // scale-k centre
    int k = 1;
    Line line;
    double radius = 0; // 2k²L_{k−1}^{2+α}
    bool empty = true; // no bad sub-boxes: no members at all
    bool contains(const IVec& sub, const ScaleLadder& lad) const;
};

struct Covering {
    bool found = false;
    int which = 0; // 0 no bad boxes, 1 all near x₁, 2 through x₁ and x₂
    Defect defect;
};
Covering find_covering_line(std::vector<IVec> bad, const IVec& owner, const ScaleLadder& lad,
                            int k);

// closed sites of the discrete vacant set in a lattice box
class Vacancy {
public:
    Vacancy() = default;
    Vacancy(const ProcessSample& s, double u, double rho, const IVec& center, std::int64_t radius);
    static Vacancy clean(int d) {
        Vacancy v;
        v.d_ = d;
        v.all_open_ = true;
        return v;
    }
    bool is_open(const IVec& y) const;
    bool segment_open(const IVec& x, const IVec& y) const; // unit edge
    bool all_open() const { return all_open_; }
    std::size_t closed_count() const;
    std::vector<IVec> closed_in(const IVec& center, std::int64_t radius) const;

private:
    int d_ = 3;
    bool all_open_ = false;
    IVec lo_;
    std::int64_t side_ = 0;
    std::vector<Line> lines_; // lines that reach the box
    double rho_ = 1;
    std::vector<std::uint8_t> closed_;
    std::size_t index(const IVec& y) const;
    bool inside(const IVec& y) const;
};

std::vector<IVec> hole0(const Vacancy& vac, const IVec& x, std::int64_t L0);

struct CertificateReport {
    int trials = 0, good = 0, bad = 0;
    int counterexamples = 0; // good verdict without a covering line
    std::array<int, 3> which{}; // covering cases among good verdicts
};
// random badness patterns in the k-box at the origin: scattered, aligned along a
// random line, and clustered below the pair floor
CertificateReport covering_certificate(const ScaleLadder& lad, int k, int trials, std::uint64_t seed);

struct P0Report {
    std::int64_t L0 = 0;
    double u0 = 0, rho0 = 0, threshold = 0;
    int replicas = 0, bad = 0;
    double estimate = 0;
    Interval ci;
    double lambda = 0, tail = 0;          // true hitting intensity
    double lambda_env = 0, tail_env = 0; // circumscribed-ball envelope
    bool within_ci = false;
};
// μ(lines meeting B∞(0,L)⊕ρ) from the Steiner formula
double box_hitting_mass(double L, double rho, int d);
P0Report estimate_p0(const ScaleLadder& lad, int replicas, std::uint64_t seed, double z = 3.0);

} // namespace cylperc
