#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "causalfrac/dataset.hpp"
#include "causalfrac/graph.hpp"
#include "causalfrac/regress.hpp"

namespace causalfrac {

struct RegressionMetrics {
    std::optional<double> r2;  // undefined for a constant truth vector
    double mae = 0.0;
    double mse = 0.0;
};

/// r2 = 1 - SSE/SST, mae = mean |y - yhat|, mse = mean (y - yhat)^2.
RegressionMetrics regression_metrics(const std::vector<double>& y_true,
                                     const std::vector<double>& y_pred);

struct GraphScore {
    double skeleton_precision = 0.0;
    double skeleton_recall = 0.0;
    double skeleton_f1 = 0.0;
    std::size_t shd = 0;  // adjacency edits + committed-mark mismatches
};

struct GraphScoreOptions {
    /// Circle marks are uncommitted and free by default; strict mode charges
    /// them like any other mismatch.
    bool strict_marks = false;
};

/// Score an estimated graph against the generating DAG (matched by node
/// name). Throws NodeSetMismatch when the node sets differ.
GraphScore graph_score(const MixedGraph& g_true, const MixedGraph& g_est,
                       const GraphScoreOptions& opts = {});

// --- the correlation-vs-causality comparison protocol -----------------------

enum class SelectionMode { Correlation, Causal };

struct ComparisonRow {
    RegressorKind kind = RegressorKind::Linear;
    SelectionMode mode = SelectionMode::Correlation;
    RegressionMetrics train;
    RegressionMetrics test;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    std::vector<std::string> causal_vars;
    std::vector<std::string> corr_vars;
    std::string output;

    /// Table-shaped CSV, three decimals, with a machine-readable
    /// best-per-column flag column.
    std::string to_csv() const;
};

struct SplitConfig {
    double test_fraction = 0.3;
    std::uint64_t seed = 0;
};

/// Fit every regressor twice on one shared train/test split: once on the
/// correlation-selected inputs, once on the causal-selected inputs. When
/// corr_vars is empty it is auto-selected as the top-k absolute-Pearson
/// correlates of the output on the training rows, k = |causal_vars|.
ComparisonReport compare_protocol(const Dataset& ds, const std::vector<std::string>& causal_vars,
                                  std::vector<std::string> corr_vars,
                                  const std::vector<RegressorSpec>& specs,
                                  const SplitConfig& split_cfg, const std::string& output);

}  // namespace causalfrac
