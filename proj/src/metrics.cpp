#include "causalfrac/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "causalfrac/errors.hpp"
#include "causalfrac/linalg.hpp"

namespace causalfrac {

RegressionMetrics regression_metrics(const std::vector<double>& y_true,
                                     const std::vector<double>& y_pred) {
    if (y_true.size() != y_pred.size()) throw ConfigError("regression_metrics: length mismatch");
    if (y_true.size() < 2) throw ConfigError("regression_metrics needs n >= 2");
    RegressionMetrics m;
    const double ybar = mean(y_true);
    double sse = 0.0, sst = 0.0, abs_sum = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double e = y_true[i] - y_pred[i];
        sse += e * e;
        abs_sum += std::abs(e);
        sst += (y_true[i] - ybar) * (y_true[i] - ybar);
    }
    const auto n = static_cast<double>(y_true.size());
    m.mae = abs_sum / n;
    m.mse = sse / n;
    if (sst > 0.0) m.r2 = 1.0 - sse / sst;
    return m;
}

GraphScore graph_score(const MixedGraph& g_true, const MixedGraph& g_est,
                       const GraphScoreOptions& opts) {
    std::set<std::string> a(g_true.node_names().begin(), g_true.node_names().end());
    std::set<std::string> b(g_est.node_names().begin(), g_est.node_names().end());
    if (a != b) throw NodeSetMismatch("graph_score: node sets differ");

    using Pair = std::pair<std::string, std::string>;
    auto adjacency = [](const MixedGraph& g) {
        std::set<Pair> out;
        for (const Edge& e : g.edges()) {
            std::string x = g.node_name(e.a);
            std::string y = g.node_name(e.b);
            if (y < x) std::swap(x, y);
            out.insert({x, y});
        }
        return out;
    };
    const std::set<Pair> true_adj = adjacency(g_true);
    const std::set<Pair> est_adj = adjacency(g_est);

    std::size_t shared = 0;
    for (const auto& e : est_adj) shared += true_adj.count(e);
    const std::size_t extra = est_adj.size() - shared;
    const std::size_t missing = true_adj.size() - shared;

    GraphScore score;
    score.skeleton_precision =
        est_adj.empty() ? 0.0 : static_cast<double>(shared) / static_cast<double>(est_adj.size());
    score.skeleton_recall =
        true_adj.empty() ? 0.0 : static_cast<double>(shared) / static_cast<double>(true_adj.size());
    const double pr = score.skeleton_precision + score.skeleton_recall;
    score.skeleton_f1 = pr > 0.0 ? 2.0 * score.skeleton_precision * score.skeleton_recall / pr : 0.0;

    score.shd = extra + missing;
    for (const auto& [x, y] : est_adj) {
        if (!true_adj.count({x, y})) continue;
        const int tx = g_true.node_index(x);
        const int ty = g_true.node_index(y);
        const int ex = g_est.node_index(x);
        const int ey = g_est.node_index(y);
        const Mark true_at_y = g_true.mark(tx, ty);
        const Mark true_at_x = g_true.mark(ty, tx);
        const Mark est_at_y = g_est.mark(ex, ey);
        const Mark est_at_x = g_est.mark(ey, ex);
        auto penalty = [&](Mark est, Mark truth) {
            if (est == Mark::Circle && !opts.strict_marks) return std::size_t{0};
            return est == truth ? std::size_t{0} : std::size_t{1};
        };
        score.shd += penalty(est_at_x, true_at_x) + penalty(est_at_y, true_at_y);
    }
    return score;
}

namespace {

std::string format3(const std::optional<double>& v) {
    if (!v) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *v);
    return buf;
}

}  // namespace

std::string ComparisonReport::to_csv() const {
    // per-column best: max for r2, min for mae/mse
    struct Column {
        const char* name;
        bool maximize;
    };
    const Column columns[6] = {{"r2_train", true}, {"mae_train", false}, {"mse_train", false},
                               {"r2_test", true},  {"mae_test", false},  {"mse_test", false}};
    auto cell = [&](const ComparisonRow& row, std::size_t c) -> std::optional<double> {
        switch (c) {
            case 0: return row.train.r2;
            case 1: return row.train.mae;
            case 2: return row.train.mse;
            case 3: return row.test.r2;
            case 4: return row.test.mae;
            default: return row.test.mse;
        }
    };
    std::vector<std::vector<std::string>> best(rows.size());
    for (std::size_t c = 0; c < 6; ++c) {
        std::optional<double> best_value;
        for (const auto& row : rows) {
            const auto v = cell(row, c);
            if (!v) continue;
            if (!best_value || (columns[c].maximize ? *v > *best_value : *v < *best_value)) {
                best_value = *v;
            }
        }
        if (!best_value) continue;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto v = cell(rows[r], c);
            if (v && *v == *best_value) best[r].push_back(columns[c].name);
        }
    }

    std::ostringstream out;
    out << "# format_version 1\n";
    out << "model,mode,r2_train,mae_train,mse_train,r2_test,mae_test,mse_test,best_in\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::string model = to_string(row.kind);
        out << model << ',' << (row.mode == SelectionMode::Causal ? "causal" : "correlation");
        for (std::size_t c = 0; c < 6; ++c) out << ',' << format3(cell(row, c));
        out << ',';
        for (std::size_t i = 0; i < best[r].size(); ++i) {
            if (i) out << ';';
            out << best[r][i];
        }
        out << '\n';
    }
    return out.str();
}

ComparisonReport compare_protocol(const Dataset& ds, const std::vector<std::string>& causal_vars,
                                  std::vector<std::string> corr_vars,
                                  const std::vector<RegressorSpec>& specs,
                                  const SplitConfig& split_cfg, const std::string& output) {
    if (causal_vars.empty()) throw ConfigError("compare_protocol: causal variable list is empty");
    for (const auto& v : causal_vars) (void)ds.column_index(v);
    (void)ds.column_index(output);

    const SplitResult parts = split(ds, split_cfg.test_fraction, split_cfg.seed);

    if (corr_vars.empty()) {
        // top-k |Pearson| with the output, on training rows only
        const std::vector<double> y = parts.train.column(output);
        std::vector<std::pair<double, std::string>> scored;
        for (const auto& col : ds.columns()) {
            if (col.name == output) continue;
            scored.emplace_back(-std::abs(pearson(parts.train.column(col.name), y)), col.name);
        }
        std::sort(scored.begin(), scored.end());
        for (std::size_t i = 0; i < causal_vars.size() && i < scored.size(); ++i) {
            corr_vars.push_back(scored[i].second);
        }
    } else {
        for (const auto& v : corr_vars) (void)ds.column_index(v);
    }

    ComparisonReport report;
    report.causal_vars = causal_vars;
    report.corr_vars = corr_vars;
    report.output = output;

    auto run_arm = [&](const std::vector<std::string>& vars, const RegressorSpec& spec,
                       SelectionMode mode) {
        Matrix xtr(parts.train.n(), vars.size());
        Matrix xte(parts.test.n(), vars.size());
        for (std::size_t j = 0; j < vars.size(); ++j) {
            const std::size_t ctr = parts.train.column_index(vars[j]);
            for (std::size_t i = 0; i < parts.train.n(); ++i) xtr.at(i, j) = parts.train.at(i, ctr);
            const std::size_t cte = parts.test.column_index(vars[j]);
            for (std::size_t i = 0; i < parts.test.n(); ++i) xte.at(i, j) = parts.test.at(i, cte);
        }
        const FittedModel model = fit(spec, xtr, parts.train.column(output), vars);
        ComparisonRow row;
        row.kind = spec.kind;
        row.mode = mode;
        row.train = regression_metrics(parts.train.column(output), model.predict(xtr, vars));
        row.test = regression_metrics(parts.test.column(output), model.predict(xte, vars));
        report.rows.push_back(std::move(row));
    };

    for (const auto& spec : specs) {
        run_arm(corr_vars, spec, SelectionMode::Correlation);
        run_arm(causal_vars, spec, SelectionMode::Causal);
    }
    return report;
}

}  // namespace causalfrac
