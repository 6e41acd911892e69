#include "keymesh/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <queue>

#include "keymesh/errors.hpp"
#include "keymesh/rng.hpp"

namespace keymesh {

namespace {

constexpr std::uint64_t kStreamPositions = 1;
constexpr std::uint64_t kStreamTagged = 2;

double dist2(const Vec2& a, const Vec2& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

std::string fmt_coord(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

std::uint32_t Deployment::cell_of(const Vec2& p) const {
    auto clamp_cell = [this](double coord) {
        auto c = std::uint32_t(coord / radio_r_);
        return std::min(c, grid_cols_ - 1);
    };
    return clamp_cell(p.y) * grid_cols_ + clamp_cell(p.x);
}

void Deployment::link_node(NodeId u) {
    const Vec2& p = positions_[u];
    const double r2 = radio_r_ * radio_r_;
    const auto col = std::int64_t(std::min(std::uint32_t(p.x / radio_r_), grid_cols_ - 1));
    const auto row = std::int64_t(std::min(std::uint32_t(p.y / radio_r_), grid_cols_ - 1));
    for (std::int64_t dr = -1; dr <= 1; ++dr) {
        for (std::int64_t dc = -1; dc <= 1; ++dc) {
            const std::int64_t rr = row + dr;
            const std::int64_t cc = col + dc;
            if (rr < 0 || cc < 0 || rr >= grid_cols_ || cc >= grid_cols_) {
                continue;
            }
            for (NodeId v : grid_[std::size_t(rr) * grid_cols_ + std::size_t(cc)]) {
                if (v != u && dist2(p, positions_[v]) <= r2) {
                    adjacency_[u].push_back(v);
                    adjacency_[v].push_back(u);
                }
            }
        }
    }
    grid_[cell_of(p)].push_back(u);
}

void Deployment::build_adjacency() {
    grid_cols_ = std::max<std::uint32_t>(1, std::uint32_t(side_ / radio_r_));
    grid_.assign(std::size_t(grid_cols_) * grid_cols_, {});
    adjacency_.assign(positions_.size(), {});
    for (NodeId u = 0; u < positions_.size(); ++u) {
        link_node(u);
    }
    for (auto& nbrs : adjacency_) {
        std::sort(nbrs.begin(), nbrs.end());
    }
}

Deployment Deployment::random(const SimConfig& cfg, std::uint64_t rng_seed) {
    cfg.validate();
    const std::uint32_t n = cfg.n_nodes;
    const std::uint32_t t = resolve_tagged(cfg);
    if (t >= n) {
        throw ConfigError("tagged count must be < n_nodes");
    }

    Deployment dep;
    dep.side_ = cfg.side;
    dep.radio_r_ = cfg.radio_r;
    dep.positions_.reserve(n);
    Rng pos_rng(substream_seed(rng_seed, kStreamPositions));
    for (std::uint32_t i = 0; i < n; ++i) {
        dep.positions_.push_back({cfg.side * pos_rng.next_double(),
                                  cfg.side * pos_rng.next_double()});
    }

    // partial Fisher-Yates: first t entries become the tagged set
    Rng tag_rng(substream_seed(rng_seed, kStreamTagged));
    std::vector<NodeId> ids(n);
    for (std::uint32_t i = 0; i < n; ++i) ids[i] = i;
    for (std::uint32_t i = 0; i < t; ++i) {
        const auto j = std::uint32_t(i + tag_rng.next_below(n - i));
        std::swap(ids[i], ids[j]);
    }
    dep.tagged_nodes_.assign(ids.begin(), ids.begin() + t);
    std::sort(dep.tagged_nodes_.begin(), dep.tagged_nodes_.end());

    dep.tag_of_.assign(n, 0);
    for (std::uint32_t i = 0; i < t; ++i) {
        dep.tag_of_[dep.tagged_nodes_[i]] = i + 1;
    }
    dep.build_adjacency();
    return dep;
}

Deployment Deployment::from_positions(std::vector<Vec2> positions,
                                      std::vector<NodeId> tagged_nodes,
                                      double radio_r, double side) {
    if (!(side > 0.0) || !(radio_r > 0.0) || radio_r >= side) {
        throw ConfigError("from_positions: need 0 < radio_r < side");
    }
    Deployment dep;
    dep.side_ = side;
    dep.radio_r_ = radio_r;
    dep.positions_ = std::move(positions);
    for (const Vec2& p : dep.positions_) {
        if (p.x < 0 || p.x > side || p.y < 0 || p.y > side) {
            throw ConfigError("from_positions: position outside deployment square");
        }
    }
    std::sort(tagged_nodes.begin(), tagged_nodes.end());
    for (NodeId u : tagged_nodes) {
        if (u >= dep.positions_.size()) {
            throw ConfigError("from_positions: tagged id out of range");
        }
    }
    dep.tagged_nodes_ = std::move(tagged_nodes);
    dep.tag_of_.assign(dep.positions_.size(), 0);
    for (std::uint32_t i = 0; i < dep.tagged_nodes_.size(); ++i) {
        dep.tag_of_[dep.tagged_nodes_[i]] = i + 1;
    }
    dep.build_adjacency();
    return dep;
}

NodeId Deployment::add_position(Vec2 p) {
    if (p.x < 0 || p.x > side_ || p.y < 0 || p.y > side_) {
        throw ConfigError("new node position outside deployment square");
    }
    const auto u = NodeId(positions_.size());
    positions_.push_back(p);
    tag_of_.push_back(0);
    adjacency_.emplace_back();
    link_node(u);
    // neighbors' lists stay sorted: the new id is larger than every other
    std::sort(adjacency_[u].begin(), adjacency_[u].end());
    return u;
}

std::uint64_t Deployment::neighbor_pair_count() const {
    std::uint64_t deg = 0;
    for (const auto& nbrs : adjacency_) {
        deg += nbrs.size();
    }
    return deg / 2;
}

void Deployment::dump_csv(std::ostream& out) const {
    out << "node_id,x,y,is_tagged\n";
    for (NodeId u = 0; u < positions_.size(); ++u) {
        out << u << ',' << fmt_coord(positions_[u].x) << ',' << fmt_coord(positions_[u].y)
            << ',' << (is_tagged(u) ? 1 : 0) << '\n';
    }
}

FloodResult flood(const Deployment& dep, std::uint32_t hops) {
    if (hops < 1) {
        throw ConfigError("flood needs hops >= 1");
    }
    const std::uint32_t n = dep.size();
    FloodResult fr;
    fr.b_sets.assign(n, {});

    // per-tag BFS; visit stamps avoid clearing the visited array every time
    std::vector<std::uint32_t> stamp(n, 0);
    std::vector<NodeId> frontier, next;
    std::uint32_t round = 0;

    for (NodeId origin : dep.tagged_nodes()) {
        const TagId tag = dep.tag_of(origin);
        ++round;
        stamp[origin] = round;
        fr.b_sets[origin].push_back(tag);
        fr.transmissions += 1; // the tagged node's own broadcast
        frontier.assign(1, origin);
        for (std::uint32_t d = 1; d <= hops && !frontier.empty(); ++d) {
            next.clear();
            for (NodeId u : frontier) {
                for (NodeId v : dep.neighbors(u)) {
                    if (stamp[v] == round) {
                        continue; // duplicate reception: stored once, not re-broadcast
                    }
                    stamp[v] = round;
                    fr.b_sets[v].push_back(tag);
                    if (d < hops) {
                        fr.transmissions += 1; // TTL still positive after decrement
                        next.push_back(v);
                    }
                }
            }
            frontier.swap(next);
        }
    }
    // tags were flooded in ascending tag-id order, so each B set is sorted
    return fr;
}

CoverageStats coverage_stats(const Deployment& dep, const FloodResult& fr,
                             const SimConfig& cfg) {
    CoverageStats st;
    st.expected_uncovered = expected_uncovered(cfg, double(dep.tagged_count()));
    std::size_t max_groups = 0;
    for (const auto& b : fr.b_sets) {
        max_groups = std::max(max_groups, b.size());
    }
    st.groups_per_node_hist.assign(max_groups + 1, 0);
    for (NodeId u = 0; u < dep.size(); ++u) {
        st.groups_per_node_hist[fr.b_sets[u].size()] += 1;
        if (fr.b_sets[u].empty() && !dep.is_tagged(u)) {
            st.uncovered_count += 1;
        }
    }
    return st;
}

double expected_uncovered(const SimConfig& cfg, double n_tagged) {
    if (!(n_tagged > 0.0) || n_tagged >= double(cfg.n_nodes)) {
        throw ConfigError("expected_uncovered needs 0 < n < N");
    }
    const double reach = double(cfg.hops) * cfg.radio_r;
    const double rate = (n_tagged / cfg.area()) * std::numbers::pi * reach * reach;
    return (double(cfg.n_nodes) - n_tagged) * std::exp(-rate);
}

double intergroup_threshold_radius(const SimConfig& cfg, double n_tagged) {
    const double n_total = double(cfg.n_nodes);
    if (!(n_tagged > 0.0) || n_tagged >= n_total) {
        throw ConfigError("threshold radius needs 0 < n < N");
    }
    const double c = (n_total - n_tagged) / n_tagged;
    const double factor = (2.0 + std::sqrt(c)) / 2.0;
    return factor * std::sqrt(std::log(n_tagged / cfg.beta) /
                              (c * n_tagged * std::numbers::pi));
}

namespace {

constexpr double kPlannerTol = 1e-6;

// Bisects f (decreasing through zero) on [lo, hi]; f(lo) > 0 > f(hi).
template <typename F>
double bisect_decreasing(F f, double lo, double hi) {
    while (hi - lo > kPlannerTol) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

} // namespace

std::uint32_t plan_coverage(const SimConfig& cfg) {
    const double n_max = double(cfg.n_nodes) - 1.0;
    auto excess = [&cfg](double n) { return expected_uncovered(cfg, n) - 1.0; };
    if (excess(n_max) > 0.0) {
        throw PlannerInfeasibleError(
            "coverage planner: expected uncovered stays above 1 for every n < N");
    }
    if (excess(1.0) <= 0.0) {
        return 1;
    }
    const double root = bisect_decreasing(excess, 1.0, n_max);
    return std::uint32_t(std::ceil(root - kPlannerTol));
}

std::uint32_t plan_intergroup(const SimConfig& cfg) {
    cfg.validate();
    const double r_norm = double(cfg.hops) * cfg.radio_r / cfg.side;
    const auto n_max = std::uint32_t(cfg.n_nodes - 1);
    auto excess = [&](double n) { return intergroup_threshold_radius(cfg, n) - r_norm; };

    // The threshold radius falls, bottoms out, then rises again as n -> N,
    // so a single end-to-end bracket can miss the crossing. Scan for the
    // first integer below the target, then refine the real root beside it.
    if (excess(1.0) <= 0.0) {
        return 1;
    }
    std::uint32_t first = 0;
    for (std::uint32_t n = 2; n <= n_max; ++n) {
        if (excess(double(n)) <= 0.0) {
            first = n;
            break;
        }
    }
    if (first == 0) {
        throw PlannerInfeasibleError(
            "inter-group planner: threshold radius never drops to H*r/side");
    }
    const double root = bisect_decreasing(excess, double(first) - 1.0, double(first));
    return std::uint32_t(std::ceil(root - kPlannerTol));
}

std::uint32_t plan_tagged(const SimConfig& cfg) {
    return std::max(plan_coverage(cfg), plan_intergroup(cfg));
}

std::uint32_t resolve_tagged(const SimConfig& cfg) {
    cfg.validate();
    if (!cfg.tagged_auto()) {
        return cfg.tagged;
    }
    const std::uint32_t t = plan_tagged(cfg);
    if (t >= cfg.n_nodes) {
        throw PlannerInfeasibleError("planned tagged count reaches n_nodes");
    }
    return t;
}

} // namespace keymesh
