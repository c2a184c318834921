#include "causalfrac/iicd.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "causalfrac/errors.hpp"

#include <json.hpp>

namespace causalfrac {

std::string DiscoveryTrace::to_jsonl() const {
    std::string out = "{\"format_version\":1}\n";
    for (const auto& e : entries) {
        nlohmann::json j;
        j["r"] = e.r;
        j["x"] = e.x;
        j["y"] = e.y;
        j["z"] = e.z;
        j["rho"] = e.decision.rho;
        j["statistic"] = e.decision.statistic;
        j["p_value"] = e.decision.p_value;
        j["independent"] = e.decision.independent;
        j["alpha"] = e.decision.alpha;
        j["action"] = e.action;
        out += j.dump();
        out += '\n';
    }
    return out;
}

namespace {

constexpr double kUnreachable = 1e18;

// Node permutation ranks by name, for every lexicographic tie-break.
std::vector<std::size_t> lex_ranks(const MixedGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<int> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return g.node_name(a) < g.node_name(b); });
    std::vector<std::size_t> rank(n);
    for (std::size_t pos = 0; pos < n; ++pos) rank[static_cast<std::size_t>(order[pos])] = pos;
    return rank;
}

void size_r_subsets(const std::vector<int>& pool, std::size_t r,
                    std::set<std::vector<int>>& out) {
    if (pool.size() < r) return;
    std::vector<int> pick;
    // classic combination walk
    std::vector<std::size_t> idx(r);
    for (std::size_t i = 0; i < r; ++i) idx[i] = i;
    while (true) {
        pick.clear();
        for (std::size_t i : idx) pick.push_back(pool[i]);
        std::sort(pick.begin(), pick.end());
        out.insert(pick);
        std::size_t k = r;
        while (k > 0 && idx[k - 1] == pool.size() - r + (k - 1)) --k;
        if (k == 0) break;
        ++idx[k - 1];
        for (std::size_t i = k; i < r; ++i) idx[i] = idx[i - 1] + 1;
    }
}

}  // namespace

std::vector<std::vector<int>> candidate_sets(const MixedGraph& g, int x, int y, std::size_t r) {
    if (!g.has_edge(x, y)) {
        throw NoSuchEdge("candidate_sets: no edge between " + g.node_name(x) + " and " +
                         g.node_name(y));
    }
    if (r == 0) return {std::vector<int>{}};

    std::vector<int> adj_x, adj_y;
    for (int v : g.adjacent(x)) {
        if (v != y) adj_x.push_back(v);
    }
    for (int v : g.adjacent(y)) {
        if (v != x) adj_y.push_back(v);
    }
    std::set<std::vector<int>> merged;
    size_r_subsets(adj_x, r, merged);
    size_r_subsets(adj_y, r, merged);
    if (merged.empty()) return {};

    const std::map<int, int> from_x = pds_path_nodes(g, x, y);
    const std::map<int, int> from_y = pds_path_nodes(g, y, x);
    auto member_len = [&](int z) {
        double best = kUnreachable;
        if (auto it = from_x.find(z); it != from_x.end()) best = it->second;
        if (auto it = from_y.find(z); it != from_y.end()) {
            best = std::min(best, static_cast<double>(it->second));
        }
        return best;
    };

    const std::vector<std::size_t> rank = lex_ranks(g);
    struct Scored {
        double d;
        std::vector<std::size_t> lex;  // members by lexicographic rank
        std::vector<int> z;
    };
    std::vector<Scored> scored;
    scored.reserve(merged.size());
    for (const auto& z : merged) {
        Scored s;
        s.z = z;
        double sum = 0.0;
        for (int m : z) sum += member_len(m);
        s.d = sum / static_cast<double>(z.size());
        for (int m : z) s.lex.push_back(rank[static_cast<std::size_t>(m)]);
        std::sort(s.lex.begin(), s.lex.end());
        scored.push_back(std::move(s));
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.d != b.d) return a.d < b.d;
        return a.lex < b.lex;
    });

    std::vector<std::vector<int>> out;
    out.reserve(scored.size());
    for (auto& s : scored) out.push_back(std::move(s.z));
    return out;
}

namespace {

std::vector<std::pair<int, int>> edges_in_lex_order(const MixedGraph& g) {
    std::vector<std::pair<int, int>> out;
    for (const Edge& e : g.edges()) {
        const std::string& na = g.node_name(e.a);
        const std::string& nb = g.node_name(e.b);
        out.emplace_back(na < nb ? std::pair{e.a, e.b} : std::pair{e.b, e.a});
    }
    std::sort(out.begin(), out.end(), [&](const auto& l, const auto& r) {
        const auto lk = std::pair{g.node_name(l.first), g.node_name(l.second)};
        const auto rk = std::pair{g.node_name(r.first), g.node_name(r.second)};
        return lk < rk;
    });
    return out;
}

std::vector<std::string> names_of(const MixedGraph& g, const std::vector<int>& z) {
    std::vector<std::string> out;
    out.reserve(z.size());
    for (int v : z) out.push_back(g.node_name(v));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> to_indices(const std::vector<int>& z) {
    std::vector<std::size_t> out;
    out.reserve(z.size());
    for (int v : z) out.push_back(static_cast<std::size_t>(v));
    return out;
}

}  // namespace

MixedGraph skeleton_pass(const MixedGraph& g, const CiFunction& ci, std::size_t r,
                         const IicdConfig& cfg, SepsetTable& sepsets, DiscoveryTrace& trace) {
    (void)cfg;
    MixedGraph out = g;
    struct Removal {
        int x, y;
        std::vector<int> sepset;
    };
    std::vector<Removal> removals;

    for (const auto& [x, y] : edges_in_lex_order(g)) {
        const auto candidates = candidate_sets(g, x, y, r);
        for (const auto& z : candidates) {
            CiDecision dec;
            try {
                dec = ci(static_cast<std::size_t>(x), static_cast<std::size_t>(y), to_indices(z));
            } catch (const DegreesOfFreedomExhausted&) {
                TraceEntry e{r, g.node_name(x), g.node_name(y), names_of(g, z), CiDecision{},
                             "skip_dof"};
                trace.entries.push_back(std::move(e));
                break;  // larger sets at this r are equally untestable
            }
            TraceEntry e{r,   g.node_name(x),           g.node_name(y),
                         names_of(g, z), dec, dec.independent ? "remove" : "keep"};
            trace.entries.push_back(std::move(e));
            if (!dec.independent) continue;

            // Minimal separating subset by greedy deletion, smallest-last so
            // the search is deterministic.
            std::vector<int> minimal = z;
            for (std::size_t i = 0; i < minimal.size();) {
                std::vector<int> reduced = minimal;
                reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(i));
                CiDecision rdec;
                bool testable = true;
                try {
                    rdec = ci(static_cast<std::size_t>(x), static_cast<std::size_t>(y),
                              to_indices(reduced));
                } catch (const DegreesOfFreedomExhausted&) {
                    testable = false;
                }
                if (testable) {
                    TraceEntry re{r,
                                  g.node_name(x),
                                  g.node_name(y),
                                  names_of(g, reduced),
                                  rdec,
                                  rdec.independent ? "refine_drop" : "refine_keep"};
                    trace.entries.push_back(std::move(re));
                    if (rdec.independent) {
                        minimal = std::move(reduced);
                        continue;  // same position now holds the next member
                    }
                }
                ++i;
            }
            removals.push_back(Removal{x, y, std::move(minimal)});
            break;
        }
    }

    for (const auto& rm : removals) {
        out.remove_edge(rm.x, rm.y);
        sepsets.set(rm.x, rm.y, rm.sepset);
    }
    return out;
}

MixedGraph orient_v_structures(const MixedGraph& g, const SepsetTable& sepsets) {
    MixedGraph out = g;
    const std::size_t n = g.node_count();
    for (std::size_t zi = 0; zi < n; ++zi) {
        const int z = static_cast<int>(zi);
        std::vector<int> nbs(g.adjacent(z).begin(), g.adjacent(z).end());
        for (std::size_t i = 0; i < nbs.size(); ++i) {
            for (std::size_t j = i + 1; j < nbs.size(); ++j) {
                const int x = nbs[i];
                const int y = nbs[j];
                if (g.has_edge(x, y)) continue;  // shielded
                const auto sep = sepsets.get(x, y);
                if (!sep) continue;
                if (std::binary_search(sep->begin(), sep->end(), z)) continue;
                out.set_mark(x, z, Mark::Arrow);
                out.set_mark(y, z, Mark::Arrow);
            }
        }
    }
    return out;
}

namespace {

// Guarded mark assignments: report a conflict instead of silently flipping a
// committed endpoint.
bool orient_arrow_at(MixedGraph& g, int from, int at, int witness) {
    const Mark cur = g.mark(from, at);
    if (cur == Mark::Arrow) return false;
    if (cur == Mark::Tail) {
        throw OrientationConflict(g.node_name(witness), g.node_name(from), g.node_name(at));
    }
    g.set_mark(from, at, Mark::Arrow);
    return true;
}

bool orient_tail_at(MixedGraph& g, int from, int at, int witness) {
    const Mark cur = g.mark(from, at);
    if (cur == Mark::Tail) return false;
    if (cur == Mark::Arrow) {
        throw OrientationConflict(g.node_name(witness), g.node_name(from), g.node_name(at));
    }
    g.set_mark(from, at, Mark::Tail);
    return true;
}

// R1: alpha *-> beta o-* gamma with alpha, gamma non-adjacent  =>  beta -> gamma.
bool rule_r1(MixedGraph& g) {
    bool changed = false;
    const int n = static_cast<int>(g.node_count());
    for (int b = 0; b < n; ++b) {
        for (int a : g.adjacent(b)) {
            if (g.mark(a, b) != Mark::Arrow) continue;
            for (int c : g.adjacent(b)) {
                if (c == a || g.has_edge(a, c)) continue;
                if (g.mark(c, b) != Mark::Circle) continue;
                changed |= orient_tail_at(g, c, b, a);
                changed |= orient_arrow_at(g, b, c, a);
            }
        }
    }
    return changed;
}

// R2: alpha -> beta *-> gamma or alpha *-> beta -> gamma, alpha *-o gamma
//     =>  arrow at gamma on (alpha, gamma).
bool rule_r2(MixedGraph& g) {
    bool changed = false;
    const int n = static_cast<int>(g.node_count());
    for (int a = 0; a < n; ++a) {
        for (int c : g.adjacent(a)) {
            if (c == a || g.mark(a, c) != Mark::Circle) continue;
            for (int b : g.adjacent(a)) {
                if (b == c || !g.has_edge(b, c)) continue;
                const bool chain1 = g.mark(a, b) == Mark::Arrow && g.mark(b, a) == Mark::Tail &&
                                    g.mark(b, c) == Mark::Arrow;
                const bool chain2 = g.mark(a, b) == Mark::Arrow && g.mark(b, c) == Mark::Arrow &&
                                    g.mark(c, b) == Mark::Tail;
                if (chain1 || chain2) {
                    changed |= orient_arrow_at(g, a, c, b);
                }
            }
        }
    }
    return changed;
}

// R3: alpha *-> beta <-* gamma, alpha *-o delta o-* gamma, alpha, gamma
//     non-adjacent, delta *-o beta  =>  arrow at beta on (delta, beta).
bool rule_r3(MixedGraph& g) {
    bool changed = false;
    const int n = static_cast<int>(g.node_count());
    for (int b = 0; b < n; ++b) {
        for (int d : g.adjacent(b)) {
            if (g.mark(d, b) != Mark::Circle) continue;
            for (int a : g.adjacent(b)) {
                if (a == d || g.mark(a, b) != Mark::Arrow) continue;
                if (!g.has_edge(a, d) || g.mark(a, d) != Mark::Circle) continue;
                for (int c : g.adjacent(b)) {
                    if (c == a || c == d || g.mark(c, b) != Mark::Arrow) continue;
                    if (g.has_edge(a, c)) continue;
                    if (!g.has_edge(c, d) || g.mark(c, d) != Mark::Circle) continue;
                    changed |= orient_arrow_at(g, d, b, a);
                }
            }
        }
    }
    return changed;
}

bool is_parent(const MixedGraph& g, int p, int child) {
    return g.has_edge(p, child) && g.mark(p, child) == Mark::Arrow &&
           g.mark(child, p) == Mark::Tail;
}

// Depth-first search for a discriminating path <theta, ..., delta, beta, gamma>.
// `path` runs beta-first. Every node strictly between theta and beta must be
// a collider on the path and a parent of gamma.
bool find_discriminating_theta(const MixedGraph& g, int gamma, std::vector<int>& path,
                               std::vector<bool>& used, int& theta_out, int& delta_out) {
    const int tip = path.back();
    for (int w : g.adjacent(tip)) {
        if (w == gamma || used[static_cast<std::size_t>(w)]) continue;
        // Stepping past `tip` makes it interior: collider plus parent of gamma.
        if (path.size() >= 2) {
            const int inner = path[path.size() - 2];
            if (g.mark(inner, tip) != Mark::Arrow) continue;
            if (g.mark(w, tip) != Mark::Arrow) continue;
            if (!is_parent(g, tip, gamma)) continue;
        }
        if (!g.has_edge(w, gamma)) {
            if (path.size() >= 2) {  // at least <theta, delta, beta, gamma>
                theta_out = w;
                delta_out = path[1];
                return true;
            }
            continue;  // too short to discriminate
        }
        used[static_cast<std::size_t>(w)] = true;
        path.push_back(w);
        if (find_discriminating_theta(g, gamma, path, used, theta_out, delta_out)) {
            return true;
        }
        path.pop_back();
        used[static_cast<std::size_t>(w)] = false;
    }
    return false;
}

// R4: discriminating path for beta against (theta, gamma). With beta inside
// Sepset(theta, gamma) the circle resolves to beta -> gamma; otherwise the
// triple closes as a double collider delta <-> beta <-> gamma.
bool rule_r4(MixedGraph& g, const SepsetTable& sepsets) {
    bool changed = false;
    const int n = static_cast<int>(g.node_count());
    for (int beta = 0; beta < n; ++beta) {
        for (int gamma : g.adjacent(beta)) {
            if (g.mark(gamma, beta) != Mark::Circle) continue;  // need beta o-* gamma
            std::vector<int> path{beta};
            std::vector<bool> used(g.node_count(), false);
            used[static_cast<std::size_t>(beta)] = true;
            used[static_cast<std::size_t>(gamma)] = true;
            int theta = -1, delta = -1;
            if (!find_discriminating_theta(g, gamma, path, used, theta, delta)) continue;
            delta = path[1];
            if (sepsets.recorded(theta, gamma)) {
                if (sepsets.contains(theta, gamma, beta)) {
                    changed |= orient_tail_at(g, gamma, beta, theta);
                    changed |= orient_arrow_at(g, beta, gamma, theta);
                } else {
                    changed |= orient_arrow_at(g, beta, delta, theta);
                    changed |= orient_arrow_at(g, delta, beta, theta);
                    changed |= orient_arrow_at(g, gamma, beta, theta);
                    changed |= orient_arrow_at(g, beta, gamma, theta);
                }
            }
        }
    }
    return changed;
}

}  // namespace

MixedGraph apply_orientation_rules(const MixedGraph& g, const SepsetTable& sepsets,
                                   const IicdConfig& cfg) {
    MixedGraph out = g;
    out.set_kind(GraphKind::PAG);
    if (cfg.orientation_rule_set == OrientationRuleSet::VStructOnly) return out;

    bool changed = true;
    while (changed) {
        changed = false;
        changed |= rule_r1(out);
        changed |= rule_r2(out);
        changed |= rule_r3(out);
        changed |= rule_r4(out, sepsets);
    }
    return out;
}

DiscoveryResult iicd_discover_with(const std::vector<std::string>& node_names,
                                   const CiFunction& ci, const IicdConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    DiscoveryResult res{complete_circle_graph(node_names), {}, {}};
    const std::size_t d = node_names.size();

    if (d >= 2) {
        const std::size_t r_cap = std::min(cfg.max_r.value_or(d - 2), d - 2);
        for (std::size_t r = 0; r <= r_cap; ++r) {
            if (r > 0) {
                // Degrees shrink monotonically: once no edge has r eligible
                // neighbours on either side, no later r can either.
                bool any = false;
                for (const Edge& e : res.pag.edges()) {
                    const std::size_t ax = res.pag.adjacent(e.a).size() - 1;
                    const std::size_t ay = res.pag.adjacent(e.b).size() - 1;
                    if (std::max(ax, ay) >= r) {
                        any = true;
                        break;
                    }
                }
                if (!any) break;
            }
            res.pag = skeleton_pass(res.pag, ci, r, cfg, res.sepsets, res.trace);
            if (cfg.vstructure_refresh == VStructureRefresh::PerIteration) {
                res.pag = orient_v_structures(res.pag.with_circle_marks(), res.sepsets);
            }
        }
    }

    res.pag = orient_v_structures(res.pag.with_circle_marks(), res.sepsets);
    res.pag = apply_orientation_rules(res.pag, res.sepsets, cfg);
    return res;
}

DiscoveryResult iicd_discover(const Dataset& ds, const IicdConfig& cfg,
                              const FisherZOptions& test_opts) {
    FisherZOptions opts = test_opts;
    opts.alpha = cfg.alpha;
    FisherZTester tester(ds, opts);
    std::vector<std::string> names;
    names.reserve(ds.d());
    for (const auto& c : ds.columns()) names.push_back(c.name);
    return iicd_discover_with(names, tester, cfg);
}

CiFunction d_separation_oracle(const MixedGraph& dag) {
    return [dag](std::size_t x, std::size_t y, const std::vector<std::size_t>& z) {
        std::set<int> zs;
        for (std::size_t v : z) zs.insert(static_cast<int>(v));
        CiDecision d;
        d.independent = d_separated(dag, static_cast<int>(x), static_cast<int>(y), zs);
        d.p_value = d.independent ? 1.0 : 0.0;
        d.rho = d.independent ? 0.0 : 1.0;
        d.alpha = 0.05;
        return d;
    };
}

}  // namespace causalfrac
