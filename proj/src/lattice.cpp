#include "lattice.hpp"

#include <algorithm>

namespace cylperc {

std::string to_string(const IVec& v) {
    std::string s = "(";
    for (int i = 0; i < v.d; ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s + ")";
}

std::vector<Dir> all_dirs(int d) {
    std::vector<Dir> out;
    for (int a = 0; a < d; ++a) {
        out.push_back({a, 1});
        out.push_back({a, -1});
    }
    return out;
}

std::string to_string(const Dir& v) { return (v.sign > 0 ? "+e" : "-e") + std::to_string(v.axis + 1); }

Packer::Packer(int d) : d_(d), bits_(61 / d), bias_(std::int64_t(1) << (61 / d - 1)) {}

bool Packer::fits(const IVec& x) const {
    for (int i = 0; i < d_; ++i)
        if (x[i] < -bias_ || x[i] >= bias_) return false;
    return true;
}

std::uint64_t Packer::key(const IVec& x) const {
    if (!fits(x)) fail(ErrorCode::FlowNotFeasible, "vertex outside the packable range: " + to_string(x));
    std::uint64_t k = 0;
    for (int i = 0; i < d_; ++i) k = (k << bits_) | std::uint64_t(x[i] + bias_);
    return k;
}

IVec Packer::unkey(std::uint64_t k) const {
    IVec x(d_);
    std::uint64_t mask = (std::uint64_t(1) << bits_) - 1;
    for (int i = d_ - 1; i >= 0; --i) {
        x[i] = std::int64_t(k & mask) - bias_;
        k >>= bits_;
    }
    return x;
}

LatticeFlow::LatticeFlow(int d) : d_(d), pk_(d) {}

void LatticeFlow::add(const IVec& x, const IVec& y, double v) {
    int axis = -1, sign = 0;
    for (int i = 0; i < d_; ++i) {
        std::int64_t diff = y[i] - x[i];
        if (diff == 0) continue;
        if (axis >= 0 || (diff != 1 && diff != -1))
            fail(ErrorCode::InvalidArgument, "flow edge must join lattice neighbours");
        axis = i;
        sign = int(diff);
    }
    if (axis < 0) fail(ErrorCode::InvalidArgument, "flow edge endpoints coincide");
    const IVec& lo = sign > 0 ? x : y;
    double& slot = map_[pk_.key(lo) * 8 + axis];
    slot += sign > 0 ? v : -v;
}

void LatticeFlow::add_path(const std::vector<IVec>& path, double w) {
    for (std::size_t i = 0; i + 1 < path.size(); ++i) add(path[i], path[i + 1], w);
}

void LatticeFlow::merge(const LatticeFlow& o, double scale) {
    for (const auto& [k, v] : o.map_) map_[k] += scale * v;
}

double LatticeFlow::value(const IVec& x, const IVec& y) const {
    for (int i = 0; i < d_; ++i) {
        std::int64_t diff = y[i] - x[i];
        if (diff == 0) continue;
        const IVec& lo = diff > 0 ? x : y;
        auto it = map_.find(pk_.key(lo) * 8 + i);
        double v = it == map_.end() ? 0.0 : it->second;
        return diff > 0 ? v : -v;
    }
    return 0.0;
}

namespace {
// hash-map iteration order is not stable across processes; sums go in key order
std::vector<std::pair<std::uint64_t, double>> ordered(
    const absl::flat_hash_map<std::uint64_t, double>& m) {
    std::vector<std::pair<std::uint64_t, double>> v(m.begin(), m.end());
    std::sort(v.begin(), v.end());
    return v;
}
} // namespace

double LatticeFlow::energy() const {
    double e = 0;
    for (const auto& kv : ordered(map_)) e += kv.second * kv.second;
    return e;
}

double LatticeFlow::max_abs() const {
    double m = 0;
    for (const auto& kv : map_) m = std::max(m, std::fabs(kv.second));
    return m;
}

absl::flat_hash_map<IVec, double> LatticeFlow::divergence() const {
    absl::flat_hash_map<IVec, double> div;
    for (const auto& [k, v] : ordered(map_)) {
        IVec x = pk_.unkey(k / 8);
        int axis = int(k % 8);
        div[x] += v;
        x[axis] += 1;
        div[x] -= v;
    }
    return div;
}

void LatticeFlow::for_each(const std::function<void(const IVec&, int, double)>& f) const {
    for (const auto& [k, v] : ordered(map_)) f(pk_.unkey(k / 8), int(k % 8), v);
}

std::vector<std::pair<std::pair<IVec, int>, double>> LatticeFlow::sorted() const {
    // the packing is monotone in lexicographic order, so key order is (x, axis) order
    std::vector<std::pair<std::pair<IVec, int>, double>> out;
    out.reserve(map_.size());
    for (const auto& [k, v] : ordered(map_)) out.push_back({{pk_.unkey(k / 8), int(k % 8)}, v});
    return out;
}

} // namespace cylperc
