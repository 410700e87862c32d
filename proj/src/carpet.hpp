// Faces, fractals, good paths and the hierarchical flow construction.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "lattice.hpp"
#include "renorm.hpp"

namespace cylperc {

struct BoxId {
    IVec x;
    int k = 0;
    bool operator==(const BoxId& o) const { return k == o.k && x == o.x; }
    bool operator<(const BoxId& o) const { return k != o.k ? k < o.k : x < o.x; }
};

// What the construction needs to know about ω. Verdicts at scale k are
// evaluated at (u_k, ρ_k); vacancy at (u_0, ρ_0).
class World {
public:
    virtual ~World() = default;
    virtual bool clean() const { return false; }
    virtual bool open(const IVec& y) const = 0;
    virtual std::vector<IVec> hole0(const IVec& x) const = 0;
    virtual bool good(const IVec& x, int k) const = 0;
    // nonempty defect of a good k-box, k ≥ 1
    virtual std::optional<Defect> defect(const IVec& x, int k) const = 0;
};

class CleanWorld : public World {
public:
    bool clean() const override { return true; }
    bool open(const IVec&) const override { return true; }
    std::vector<IVec> hole0(const IVec&) const override { return {}; }
    bool good(const IVec&, int) const override { return true; }
    std::optional<Defect> defect(const IVec&, int) const override { return std::nullopt; }
};

// Verdicts and vacancy from an actual sample, for boxes inside the two
// top-scale boxes (0,K) and (2L_K e₁,K).
class SampleWorld : public World {
public:
    SampleWorld(const ProcessSample& s, const ScaleLadder& lad, int K);
    ~SampleWorld() override;
    bool open(const IVec& y) const override;
    std::vector<IVec> hole0(const IVec& x) const override;
    bool good(const IVec& x, int k) const override;
    std::optional<Defect> defect(const IVec& x, int k) const override;
    std::size_t lines() const;

private:
    struct Impl;
    std::unique_ptr<Impl> p_;
};

class Carpet {
public:
    Carpet(const ScaleLadder& lad, const World& world);

    const ScaleLadder& ladder() const { return lad_; }
    const World& world() const { return world_; }
    int d() const { return lad_.d; }
    std::int64_t L(int k) const { return lad_.L[k]; }
    // L_k / (17 L_{k−1}), odd
    std::int64_t q(int k) const { return lad_.L[k] / (17 * lad_.L[k - 1]); }

    double small_radius0() const;
    std::int64_t spacing0() const;
    std::vector<IVec> face_grid(const BoxId& m, Dir v) const;
    // scale 0: lattice points of the small face; scale k: the (k−1)-face centres in it
    std::vector<IVec> small_face(const BoxId& m, Dir v, const IVec& y) const;
    std::vector<IVec> coarse_grid(const BoxId& m) const;

    std::vector<IVec> good_centers(const BoxId& m, Dir v) const;
    // lexicographically smallest good centre; FlowNotFeasible when G is empty
    IVec anchor(const BoxId& m, Dir v);
    const std::vector<IVec>& fractal(const BoxId& m, Dir v);
    std::size_t fractal_size(int k) const;

    // BFS in int(B_m) ∩ 𝖵 plus the two endpoints; empty when no path exists
    std::vector<IVec> path0(const BoxId& m, const IVec& from, const IVec& to) const;
    // coarse route in 𝓑_m between the prisms of the two anchors; empty when none
    std::vector<IVec> coarse_path17(const BoxId& m, Dir v, Dir w);
    // disjoint paths of (k−1)-centres across the coarse box B_∞(z, L_k/17),
    // one per start next to face a, in lexicographic order of starts
    std::vector<std::vector<IVec>> path_bundle_box(const IVec& z, Dir a, Dir b, int k) const;
    std::vector<std::vector<IVec>> bundle_k(const BoxId& m, Dir v, Dir w);

    // unit flow from the fractal on face v to the fractal on face w
    LatticeFlow flow_box(const BoxId& m, Dir v, Dir w);
    void add_flow_box(LatticeFlow& out, const BoxId& m, Dir v, Dir w, double scale);
    // box flow of the k-box at the origin; clean world only
    const LatticeFlow& box_template(int k, Dir v, Dir w);

private:
    ScaleLadder lad_;
    const World& world_;
    std::map<std::tuple<int, IVec, int>, std::vector<IVec>> fractals_;
    std::map<std::tuple<int, int, int>, LatticeFlow> templates_; // clean world only
    mutable std::vector<char> interior0_; // scale-0 box interior mask
    std::map<std::tuple<int, IVec, int>, IVec> anchors_;

    BoxId canonical_face(const BoxId& m, Dir v, int& axis) const;
    void build_flow(LatticeFlow& out, const BoxId& m, Dir v, Dir w, double scale);
};

Dir dir_between(const IVec& from, const IVec& to);

struct ConeEdge {
    IVec box;
    Dir v, w; // θ(box+L v → box+L w) = value > 0
    double value = 0;
};

struct ConeFlow {
    int k = 0;
    std::vector<IVec> boxes;
    IVec source;
    std::vector<IVec> basis;
    std::vector<ConeEdge> edges;
    double max_abs = 0;
    double div_error = 0;
    // per layer ⟨x,e₁⟩/(2L_k): max |θ| and the envelope min{(L_k/⟨x,e₁⟩)^{d−1}, 1}
    std::vector<std::pair<double, double>> depth_profile;
    double bottleneck = 0;
};

// Cone_k between 2L_k e₁ and the anchored small face of (0,k+1)
std::vector<IVec> cone_boxes(Carpet& c, int k);
ConeFlow cone_flow(Carpet& c, int k);

struct AssembleConfig {
    int k_max = 2;
    double J = 0.5;
    bool materialize = true;
};

struct LedgerRow {
    int k = 0;
    double energy = 0;
    double scaled = 0; // energy · L_k^{2J}
    std::size_t boxes = 0, box_flows = 0;
};

struct AssembleReport {
    bool ok = false;
    std::string failure;
    int k_max = 0;
    double J = 0.5;
    double origin_energy = 0;
    std::vector<LedgerRow> ledger;
    double total_energy = 0;
    double ratio = 0; // ledger[1].scaled / ledger[0].scaled
    double div_error = 0;
    double antisym_error = 0;
    std::vector<IVec> sink;
    std::size_t edges = 0;
    std::vector<ConeFlow> cones;
    std::optional<LatticeFlow> flow;
};

// flow from the origin to the outermost fractal, with its energy ledger
AssembleReport assemble_flow(Carpet& c, const AssembleConfig& cfg);

} // namespace cylperc
