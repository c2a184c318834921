#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace causalfrac {

/// Endpoint mark on one end of an edge. The six unordered combinations
/// encode the usual causal-graph edge vocabulary: -->, ---, <->, o--, o->, o-o.
enum class Mark { Tail, Arrow, Circle };

std::string to_string(Mark m);

enum class GraphKind { DAG, MAG, PAG, Skeleton };

std::string to_string(GraphKind k);
GraphKind graph_kind_from_string(const std::string& s);

struct Edge {
    int a = 0;
    int b = 0;
    Mark mark_at_a = Mark::Circle;
    Mark mark_at_b = Mark::Circle;
};

/// Node set plus at most one marked edge per unordered node pair.
/// Value type: copying is cheap at this scale and queries are pure.
class MixedGraph {
public:
    MixedGraph() = default;
    MixedGraph(GraphKind kind, std::vector<std::string> node_names);

    GraphKind kind() const { return kind_; }
    void set_kind(GraphKind k) { kind_ = k; }

    std::size_t node_count() const { return names_.size(); }
    const std::vector<std::string>& node_names() const { return names_; }
    const std::string& node_name(int i) const { return names_[static_cast<std::size_t>(i)]; }
    int node_index(const std::string& name) const;  // throws UnknownNode
    bool has_node(const std::string& name) const;

    bool has_edge(int x, int y) const;
    void add_edge(int x, int y, Mark mark_at_x, Mark mark_at_y);
    void remove_edge(int x, int y);

    /// Mark at y's end of the edge between x and y. Throws NoSuchEdge.
    Mark mark(int x, int y) const;
    /// Set the mark at y's end of the edge between x and y.
    void set_mark(int x, int y, Mark m);

    /// Neighbors of x regardless of marks.
    const std::set<int>& adjacent(int x) const;

    std::size_t edge_count() const { return edges_.size(); }
    std::vector<Edge> edges() const;  // a < b, ordered by (a, b)

    /// Same skeleton and node set with every mark reset to Circle.
    MixedGraph with_circle_marks(GraphKind kind = GraphKind::Skeleton) const;

    /// Parents in the DAG sense: p with p --> x.
    std::vector<int> parents(int x) const;

    bool is_valid_dag() const;  // all edges directed and acyclic

    bool operator==(const MixedGraph&) const = default;

private:
    void check_node(int x) const;
    static std::pair<int, int> key(int x, int y) { return x < y ? std::pair{x, y} : std::pair{y, x}; }

    GraphKind kind_ = GraphKind::Skeleton;
    std::vector<std::string> names_;
    std::map<std::pair<int, int>, std::pair<Mark, Mark>> edges_;  // key a<b -> (mark@a, mark@b)
    std::vector<std::set<int>> adj_;
};

/// Conditioning sets that rendered removed pairs independent.
class SepsetTable {
public:
    void set(int x, int y, std::vector<int> z);
    /// nullopt when the pair was never separated.
    std::optional<std::vector<int>> get(int x, int y) const;
    bool recorded(int x, int y) const { return get(x, y).has_value(); }
    bool contains(int x, int y, int z) const;
    std::size_t size() const { return table_.size(); }
    const std::map<std::pair<int, int>, std::vector<int>>& entries() const { return table_; }

private:
    std::map<std::pair<int, int>, std::vector<int>> table_;
};

/// Complete graph over the given nodes with o-o marks everywhere.
MixedGraph complete_circle_graph(const std::vector<std::string>& nodes);

/// Definition-1 d-separation decided by reachability over the moralized
/// ancestral subgraph (equivalent to the path-blocking definition; the
/// path-enumeration form lives in the test oracle).
bool d_separated(const MixedGraph& dag, int x, int y, const std::set<int>& z);

/// Shortest PDS-path lengths from x, avoiding y. A PDS-path here has at
/// least one interior node, every interior node of which is either a
/// collider on the path (Arrow marks on both sides) or part of a triangle
/// with its path neighbors. Key: reachable node, value: edge count of the
/// shortest such path. Search is exhaustive over simple paths up to
/// `budget` node expansions; graphs of the sizes this toolkit targets stay
/// far below the default.
std::map<int, int> pds_path_nodes(const MixedGraph& g, int x, int y,
                                  std::size_t budget = 500000);

/// One edge per line using -->, ---, <->, o--, o->, o-o; node and kind
/// lines carry the rest of the graph so that parse(edge_notation(g)) == g.
std::string edge_notation(const MixedGraph& g);
MixedGraph parse_notation(const std::string& text);

std::string graph_to_json(const MixedGraph& g);

}  // namespace causalfrac
