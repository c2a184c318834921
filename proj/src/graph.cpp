#include "causalfrac/graph.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "causalfrac/errors.hpp"

#include <json.hpp>

namespace causalfrac {

std::string to_string(Mark m) {
    switch (m) {
        case Mark::Tail: return "tail";
        case Mark::Arrow: return "arrow";
        case Mark::Circle: return "circle";
    }
    return "?";
}

std::string to_string(GraphKind k) {
    switch (k) {
        case GraphKind::DAG: return "DAG";
        case GraphKind::MAG: return "MAG";
        case GraphKind::PAG: return "PAG";
        case GraphKind::Skeleton: return "Skeleton";
    }
    return "?";
}

GraphKind graph_kind_from_string(const std::string& s) {
    if (s == "DAG") return GraphKind::DAG;
    if (s == "MAG") return GraphKind::MAG;
    if (s == "PAG") return GraphKind::PAG;
    if (s == "Skeleton") return GraphKind::Skeleton;
    throw ConfigError("unknown graph kind: " + s);
}

MixedGraph::MixedGraph(GraphKind kind, std::vector<std::string> node_names)
    : kind_(kind), names_(std::move(node_names)), adj_(names_.size()) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        for (std::size_t j = i + 1; j < names_.size(); ++j) {
            if (names_[i] == names_[j]) throw DuplicateNodeId("duplicate node id: " + names_[i]);
        }
    }
}

int MixedGraph::node_index(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) return static_cast<int>(i);
    }
    throw UnknownNode(name);
}

bool MixedGraph::has_node(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

void MixedGraph::check_node(int x) const {
    if (x < 0 || static_cast<std::size_t>(x) >= names_.size()) {
        throw UnknownNode("#" + std::to_string(x));
    }
}

bool MixedGraph::has_edge(int x, int y) const {
    check_node(x);
    check_node(y);
    return edges_.count(key(x, y)) > 0;
}

void MixedGraph::add_edge(int x, int y, Mark mark_at_x, Mark mark_at_y) {
    check_node(x);
    check_node(y);
    if (x == y) throw DuplicateNodeId("self-loop on " + node_name(x));
    auto [a, b] = key(x, y);
    edges_[{a, b}] = (a == x) ? std::pair{mark_at_x, mark_at_y} : std::pair{mark_at_y, mark_at_x};
    adj_[static_cast<std::size_t>(x)].insert(y);
    adj_[static_cast<std::size_t>(y)].insert(x);
}

void MixedGraph::remove_edge(int x, int y) {
    check_node(x);
    check_node(y);
    edges_.erase(key(x, y));
    adj_[static_cast<std::size_t>(x)].erase(y);
    adj_[static_cast<std::size_t>(y)].erase(x);
}

Mark MixedGraph::mark(int x, int y) const {
    check_node(x);
    check_node(y);
    auto it = edges_.find(key(x, y));
    if (it == edges_.end()) {
        throw NoSuchEdge("no edge between " + node_name(x) + " and " + node_name(y));
    }
    return (y > x) ? it->second.second : it->second.first;
}

void MixedGraph::set_mark(int x, int y, Mark m) {
    check_node(x);
    check_node(y);
    auto it = edges_.find(key(x, y));
    if (it == edges_.end()) {
        throw NoSuchEdge("no edge between " + node_name(x) + " and " + node_name(y));
    }
    if (y > x) {
        it->second.second = m;
    } else {
        it->second.first = m;
    }
}

const std::set<int>& MixedGraph::adjacent(int x) const {
    check_node(x);
    return adj_[static_cast<std::size_t>(x)];
}

std::vector<Edge> MixedGraph::edges() const {
    std::vector<Edge> out;
    out.reserve(edges_.size());
    for (const auto& [k, marks] : edges_) {
        out.push_back(Edge{k.first, k.second, marks.first, marks.second});
    }
    return out;
}

MixedGraph MixedGraph::with_circle_marks(GraphKind kind) const {
    MixedGraph g(kind, names_);
    for (const auto& [k, marks] : edges_) {
        (void)marks;
        g.add_edge(k.first, k.second, Mark::Circle, Mark::Circle);
    }
    return g;
}

std::vector<int> MixedGraph::parents(int x) const {
    check_node(x);
    std::vector<int> out;
    for (int nb : adjacent(x)) {
        if (mark(nb, x) == Mark::Arrow && mark(x, nb) == Mark::Tail) out.push_back(nb);
    }
    return out;
}

bool MixedGraph::is_valid_dag() const {
    for (const auto& [k, marks] : edges_) {
        (void)k;
        const bool fwd = marks.first == Mark::Tail && marks.second == Mark::Arrow;
        const bool bwd = marks.first == Mark::Arrow && marks.second == Mark::Tail;
        if (!fwd && !bwd) return false;
    }
    // Kahn topological sort
    const std::size_t n = names_.size();
    std::vector<int> indeg(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        indeg[i] = static_cast<int>(parents(static_cast<int>(i)).size());
    }
    std::deque<int> q;
    for (std::size_t i = 0; i < n; ++i) {
        if (indeg[i] == 0) q.push_back(static_cast<int>(i));
    }
    std::size_t seen = 0;
    while (!q.empty()) {
        const int u = q.front();
        q.pop_front();
        ++seen;
        for (int v : adjacent(u)) {
            if (mark(u, v) == Mark::Arrow && mark(v, u) == Mark::Tail) {
                if (--indeg[static_cast<std::size_t>(v)] == 0) q.push_back(v);
            }
        }
    }
    return seen == n;
}

void SepsetTable::set(int x, int y, std::vector<int> z) {
    std::sort(z.begin(), z.end());
    auto k = x < y ? std::pair{x, y} : std::pair{y, x};
    table_[k] = std::move(z);
}

std::optional<std::vector<int>> SepsetTable::get(int x, int y) const {
    auto k = x < y ? std::pair{x, y} : std::pair{y, x};
    auto it = table_.find(k);
    if (it == table_.end()) return std::nullopt;
    return it->second;
}

bool SepsetTable::contains(int x, int y, int z) const {
    auto s = get(x, y);
    if (!s) return false;
    return std::binary_search(s->begin(), s->end(), z);
}

MixedGraph complete_circle_graph(const std::vector<std::string>& nodes) {
    if (nodes.empty()) throw DuplicateNodeId("graph needs at least one node");
    MixedGraph g(GraphKind::Skeleton, nodes);
    const int n = static_cast<int>(nodes.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) g.add_edge(i, j, Mark::Circle, Mark::Circle);
    }
    return g;
}

bool d_separated(const MixedGraph& dag, int x, int y, const std::set<int>& z) {
    const std::size_t n = dag.node_count();
    auto check = [&](int v) {
        if (v < 0 || static_cast<std::size_t>(v) >= n) {
            throw UnknownNode("#" + std::to_string(v));
        }
    };
    check(x);
    check(y);
    for (int v : z) check(v);
    if (!dag.is_valid_dag()) throw NotADag("d_separated requires a directed acyclic graph");
    if (x == y) throw ConfigError("d_separated: x and y must differ");
    if (z.count(x) || z.count(y)) throw ConfigError("d_separated: x,y must not be conditioned on");

    // ancestors of {x, y} union z
    std::vector<bool> anc(n, false);
    std::deque<int> q;
    auto push = [&](int v) {
        if (!anc[static_cast<std::size_t>(v)]) {
            anc[static_cast<std::size_t>(v)] = true;
            q.push_back(v);
        }
    };
    push(x);
    push(y);
    for (int v : z) push(v);
    while (!q.empty()) {
        const int u = q.front();
        q.pop_front();
        for (int p : dag.parents(u)) push(p);
    }

    // moralize the ancestral subgraph
    std::vector<std::set<int>> moral(n);
    for (const Edge& e : dag.edges()) {
        if (anc[static_cast<std::size_t>(e.a)] && anc[static_cast<std::size_t>(e.b)]) {
            moral[static_cast<std::size_t>(e.a)].insert(e.b);
            moral[static_cast<std::size_t>(e.b)].insert(e.a);
        }
    }
    for (std::size_t v = 0; v < n; ++v) {
        if (!anc[v]) continue;
        const std::vector<int> ps = dag.parents(static_cast<int>(v));
        for (std::size_t i = 0; i < ps.size(); ++i) {
            for (std::size_t j = i + 1; j < ps.size(); ++j) {
                moral[static_cast<std::size_t>(ps[i])].insert(ps[j]);
                moral[static_cast<std::size_t>(ps[j])].insert(ps[i]);
            }
        }
    }

    // reachability from x with z removed
    std::vector<bool> seen(n, false);
    seen[static_cast<std::size_t>(x)] = true;
    q.push_back(x);
    while (!q.empty()) {
        const int u = q.front();
        q.pop_front();
        if (u == y) return false;
        for (int v : moral[static_cast<std::size_t>(u)]) {
            if (z.count(v) || seen[static_cast<std::size_t>(v)]) continue;
            seen[static_cast<std::size_t>(v)] = true;
            q.push_back(v);
        }
    }
    return true;
}

namespace {

// Interior-node condition of a PDS-path: collider (arrows into v from both
// path neighbors) or {u, v, w} triangle.
bool pds_triple_ok(const MixedGraph& g, int u, int v, int w) {
    if (g.mark(u, v) == Mark::Arrow && g.mark(w, v) == Mark::Arrow) return true;
    return g.has_edge(u, w);
}

struct PdsSearch {
    const MixedGraph& g;
    int x;
    int y;
    std::size_t budget;
    std::size_t visits = 0;
    int depth_limit = 0;
    bool reached_limit = false;
    std::vector<bool> on_path;
    std::vector<int> path;
    std::map<int, int>& found;

    PdsSearch(const MixedGraph& g, int x, int y, std::size_t budget, std::map<int, int>& found)
        : g(g), x(x), y(y), budget(budget), on_path(g.node_count(), false), found(found) {}

    void dfs() {
        if (visits >= budget) return;
        ++visits;
        const int cur = path.back();
        const int len = static_cast<int>(path.size()) - 1;
        if (len == depth_limit) {
            reached_limit = true;
            if (cur != x && !found.count(cur)) found.emplace(cur, len);
            return;
        }
        for (int nb : g.adjacent(cur)) {
            if (nb == y || on_path[static_cast<std::size_t>(nb)]) continue;
            if (len >= 1) {
                const int prev = path[path.size() - 2];
                if (!pds_triple_ok(g, prev, cur, nb)) continue;
            }
            on_path[static_cast<std::size_t>(nb)] = true;
            path.push_back(nb);
            dfs();
            path.pop_back();
            on_path[static_cast<std::size_t>(nb)] = false;
        }
    }
};

}  // namespace

std::map<int, int> pds_path_nodes(const MixedGraph& g, int x, int y, std::size_t budget) {
    if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= g.node_count() ||
        static_cast<std::size_t>(y) >= g.node_count()) {
        throw UnknownNode("pds_path_nodes node out of range");
    }
    if (x == y) throw ConfigError("pds_path_nodes: x and y must differ");

    std::map<int, int> found;
    PdsSearch search(g, x, y, budget, found);
    const int max_depth = static_cast<int>(g.node_count()) - 1;
    // Iterative deepening keeps shortest lengths exact even if the expansion
    // budget cuts off deep levels on dense graphs.
    for (int depth = 2; depth <= max_depth; ++depth) {
        search.depth_limit = depth;
        search.reached_limit = false;
        search.path.assign(1, x);
        std::fill(search.on_path.begin(), search.on_path.end(), false);
        search.on_path[static_cast<std::size_t>(x)] = true;
        search.dfs();
        if (!search.reached_limit || search.visits >= search.budget) break;
        if (found.size() + 2 >= g.node_count()) break;  // everything reachable already found
    }
    return found;
}

namespace {

std::string edge_token(Mark a, Mark b, bool& flip) {
    flip = false;
    if (a == Mark::Tail && b == Mark::Arrow) return "-->";
    if (a == Mark::Arrow && b == Mark::Tail) {
        flip = true;
        return "-->";
    }
    if (a == Mark::Tail && b == Mark::Tail) return "---";
    if (a == Mark::Arrow && b == Mark::Arrow) return "<->";
    if (a == Mark::Circle && b == Mark::Tail) return "o--";
    if (a == Mark::Tail && b == Mark::Circle) {
        flip = true;
        return "o--";
    }
    if (a == Mark::Circle && b == Mark::Arrow) return "o->";
    if (a == Mark::Arrow && b == Mark::Circle) {
        flip = true;
        return "o->";
    }
    return "o-o";
}

}  // namespace

std::string edge_notation(const MixedGraph& g) {
    std::ostringstream out;
    out << "# format_version 1\n";
    out << "kind " << to_string(g.kind()) << '\n';
    for (const auto& name : g.node_names()) out << "node " << name << '\n';
    for (const Edge& e : g.edges()) {
        bool flip = false;
        const std::string tok = edge_token(e.mark_at_a, e.mark_at_b, flip);
        const std::string& left = g.node_name(flip ? e.b : e.a);
        const std::string& right = g.node_name(flip ? e.a : e.b);
        out << left << ' ' << tok << ' ' << right << '\n';
    }
    return out.str();
}

MixedGraph parse_notation(const std::string& text) {
    GraphKind kind = GraphKind::PAG;
    std::vector<std::string> nodes;
    struct RawEdge {
        std::string a, b;
        Mark ma, mb;
    };
    std::vector<RawEdge> raw;

    auto intern = [&](const std::string& name) {
        if (std::find(nodes.begin(), nodes.end(), name) == nodes.end()) nodes.push_back(name);
    };

    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::vector<std::string> tok;
        std::string t;
        while (ls >> t) tok.push_back(t);
        if (tok.empty() || tok[0][0] == '#') continue;
        if (tok[0] == "kind") {
            if (tok.size() != 2) throw ParseError(lineno, "kind line needs one value");
            try {
                kind = graph_kind_from_string(tok[1]);
            } catch (const ConfigError& e) {
                throw ParseError(lineno, e.what());
            }
            continue;
        }
        if (tok[0] == "node") {
            if (tok.size() != 2) throw ParseError(lineno, "node line needs one name");
            intern(tok[1]);
            continue;
        }
        if (tok.size() != 3) throw ParseError(lineno, "expected '<node> <edge> <node>'");
        Mark ma, mb;
        if (tok[1] == "-->") {
            ma = Mark::Tail;
            mb = Mark::Arrow;
        } else if (tok[1] == "---") {
            ma = Mark::Tail;
            mb = Mark::Tail;
        } else if (tok[1] == "<->") {
            ma = Mark::Arrow;
            mb = Mark::Arrow;
        } else if (tok[1] == "o--") {
            ma = Mark::Circle;
            mb = Mark::Tail;
        } else if (tok[1] == "o->") {
            ma = Mark::Circle;
            mb = Mark::Arrow;
        } else if (tok[1] == "o-o") {
            ma = Mark::Circle;
            mb = Mark::Circle;
        } else {
            throw ParseError(lineno, "unknown edge token '" + tok[1] + "'");
        }
        if (tok[0] == tok[2]) throw ParseError(lineno, "self-loop on " + tok[0]);
        intern(tok[0]);
        intern(tok[2]);
        raw.push_back(RawEdge{tok[0], tok[2], ma, mb});
    }

    MixedGraph g(kind, nodes);
    for (const auto& e : raw) {
        g.add_edge(g.node_index(e.a), g.node_index(e.b), e.ma, e.mb);
    }
    return g;
}

std::string graph_to_json(const MixedGraph& g) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["kind"] = to_string(g.kind());
    j["nodes"] = g.node_names();
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : g.edges()) {
        edges.push_back({{"a", g.node_name(e.a)},
                         {"b", g.node_name(e.b)},
                         {"mark_at_a", to_string(e.mark_at_a)},
                         {"mark_at_b", to_string(e.mark_at_b)}});
    }
    j["edges"] = edges;
    return j.dump(2);
}

}  // namespace causalfrac
