#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "causalfrac/citest.hpp"
#include "causalfrac/dataset.hpp"
#include "causalfrac/graph.hpp"

namespace causalfrac {

enum class OrientationRuleSet { VStructOnly, Standard };

/// Whether v-structures are re-detected after every conditioning size r or
/// only once after the skeleton loop finishes.
enum class VStructureRefresh { PerIteration, EndOnly };

struct IicdConfig {
    double alpha = 0.05;
    std::optional<std::size_t> max_r;  // default d - 2
    OrientationRuleSet orientation_rule_set = OrientationRuleSet::Standard;
    std::uint64_t seed = 0;  // reserved for sampling-based components; never affects structure
    VStructureRefresh vstructure_refresh = VStructureRefresh::PerIteration;
};

struct TraceEntry {
    std::size_t r = 0;
    std::string x;
    std::string y;
    std::vector<std::string> z;
    CiDecision decision;
    std::string action;  // keep | remove | refine_keep | refine_drop | skip_dof
};

struct DiscoveryTrace {
    std::vector<TraceEntry> entries;
    std::string to_jsonl() const;
};

/// Ordered conditioning candidates for edge (x, y) at size r.
///
/// Candidates are the size-r subsets of Adj(x)\{y} and Adj(y)\{x}, merged,
/// and ordered ascending by the PDS-path distance heuristic
///   d(Z) = mean over z in Z of min(|Pi_y(x,z)|, |Pi_x(y,z)|),
/// with lexicographic node order breaking ties. Members that lie on no
/// PDS-path sort last (a large sentinel length) rather than being dropped:
/// pruning them outright can starve an edge of its only separating set and
/// break skeleton soundness, so the heuristic stays an ordering. At r <= 1
/// the PDS machinery rarely resolves anything and plain adjacency subsets
/// are what gets tested, matching the walkthrough behaviour of conditioning
/// on direct neighbours.
std::vector<std::vector<int>> candidate_sets(const MixedGraph& g, int x, int y, std::size_t r);

/// One refinement sweep at conditioning size r. Every edge is tested against
/// a snapshot of the incoming graph; removals apply after the sweep, so the
/// result does not depend on edge enumeration order. The first independent
/// candidate removes the edge; the recorded sepset is then shrunk to a
/// minimal separating subset by greedy deletion. Edges whose tests run out
/// of degrees of freedom are kept and logged.
MixedGraph skeleton_pass(const MixedGraph& g, const CiFunction& ci, std::size_t r,
                         const IicdConfig& cfg, SepsetTable& sepsets, DiscoveryTrace& trace);

/// Orient every unshielded triple x - z - y with z outside Sepset(x, y) as
/// x *-> z <-* y (marks at z only).
MixedGraph orient_v_structures(const MixedGraph& g, const SepsetTable& sepsets);

/// Apply the four standard PAG propagation rules to a fixpoint (Standard),
/// or return the graph as-is (VStructOnly). Throws OrientationConflict when
/// a rule demands an arrow where a tail is already fixed, or vice versa.
MixedGraph apply_orientation_rules(const MixedGraph& g, const SepsetTable& sepsets,
                                   const IicdConfig& cfg);

struct DiscoveryResult {
    MixedGraph pag;
    SepsetTable sepsets;
    DiscoveryTrace trace;
};

/// Full discovery loop against an arbitrary conditional-independence
/// decision (indices refer to positions in `node_names`). Deterministic for
/// fixed inputs.
DiscoveryResult iicd_discover_with(const std::vector<std::string>& node_names,
                                   const CiFunction& ci, const IicdConfig& cfg);

/// Full discovery on a dataset through the Fisher-z tester.
DiscoveryResult iicd_discover(const Dataset& ds, const IicdConfig& cfg,
                              const FisherZOptions& test_opts = {});

/// CI decision backed by d-separation on a known DAG; the oracle used by
/// soundness benchmarks.
CiFunction d_separation_oracle(const MixedGraph& dag);

}  // namespace causalfrac
