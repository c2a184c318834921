#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "causalfrac/errors.hpp"
#include "causalfrac/metrics.hpp"
#include "causalfrac/physics.hpp"
#include "causalfrac/rng.hpp"

using namespace causalfrac;

TEST_CASE("regression metric definitions") {
    const std::vector<double> y{1, 2, 3, 4};
    const RegressionMetrics perfect = regression_metrics(y, y);
    REQUIRE(perfect.r2.has_value());
    CHECK(*perfect.r2 == doctest::Approx(1.0));
    CHECK(perfect.mae == 0.0);
    CHECK(perfect.mse == 0.0);

    const std::vector<double> mean_pred(4, 2.5);
    const RegressionMetrics at_mean = regression_metrics(y, mean_pred);
    CHECK(*at_mean.r2 == doctest::Approx(0.0));

    const RegressionMetrics hand = regression_metrics({0, 2}, {1, 1});
    CHECK(hand.mae == doctest::Approx(1.0));
    CHECK(hand.mse == doctest::Approx(1.0));
    CHECK(*hand.r2 == doctest::Approx(0.0));

    const RegressionMetrics constant = regression_metrics({2, 2, 2}, {1, 2, 3});
    CHECK_FALSE(constant.r2.has_value());  // r2 undefined, mae/mse still usable
    CHECK(constant.mae == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("metrics are invariant under a common shift") {
    Rng rng(4);
    std::vector<double> y(50), pred(50), y2(50), pred2(50);
    for (std::size_t i = 0; i < 50; ++i) {
        y[i] = rng.normal();
        pred[i] = y[i] + 0.3 * rng.normal();
        y2[i] = y[i] + 100.0;
        pred2[i] = pred[i] + 100.0;
    }
    const RegressionMetrics a = regression_metrics(y, pred);
    const RegressionMetrics b = regression_metrics(y2, pred2);
    CHECK(*a.r2 == doctest::Approx(*b.r2).epsilon(1e-9));
    CHECK(a.mae == doctest::Approx(b.mae).epsilon(1e-9));
    CHECK(a.mse == doctest::Approx(b.mse).epsilon(1e-9));
}

namespace {

MixedGraph three_node_dag() {
    MixedGraph g(GraphKind::DAG, {"A", "B", "C"});
    g.add_edge(0, 1, Mark::Tail, Mark::Arrow);
    g.add_edge(1, 2, Mark::Tail, Mark::Arrow);
    return g;
}

}  // namespace

TEST_CASE("graph score on identical graphs") {
    const MixedGraph g = three_node_dag();
    const GraphScore s = graph_score(g, g);
    CHECK(s.skeleton_f1 == doctest::Approx(1.0));
    CHECK(s.shd == 0);
}

TEST_CASE("graph score counts adjacency edits") {
    const MixedGraph truth = three_node_dag();
    MixedGraph missing = truth;
    missing.remove_edge(1, 2);
    const GraphScore s = graph_score(truth, missing);
    CHECK(s.shd == 1);
    CHECK(s.skeleton_recall == doctest::Approx(0.5));
    CHECK(s.skeleton_precision == doctest::Approx(1.0));

    // swapping the roles swaps precision and recall
    const GraphScore swapped = graph_score(missing, truth);
    CHECK(swapped.skeleton_precision == doctest::Approx(s.skeleton_recall));
    CHECK(swapped.skeleton_recall == doctest::Approx(s.skeleton_precision));
}

TEST_CASE("circle marks are free unless strict") {
    const MixedGraph truth = three_node_dag();
    MixedGraph est(GraphKind::PAG, {"A", "B", "C"});
    est.add_edge(0, 1, Mark::Circle, Mark::Circle);
    est.add_edge(1, 2, Mark::Circle, Mark::Circle);
    CHECK(graph_score(truth, est).shd == 0);

    GraphScoreOptions strict;
    strict.strict_marks = true;
    CHECK(graph_score(truth, est, strict).shd == 4);

    // a committed wrong arrowhead is charged in both modes
    MixedGraph wrong = est;
    wrong.set_mark(1, 0, Mark::Arrow);  // arrow at A on A-B, truth has tail
    CHECK(graph_score(truth, wrong).shd == 1);

    MixedGraph other_nodes(GraphKind::PAG, {"A", "B", "X"});
    CHECK_THROWS_AS(graph_score(truth, other_nodes), NodeSetMismatch);
}

TEST_CASE("comparison protocol: identical variable lists give identical rows") {
    ScmSpec spec = scm_preset("FIG7");
    spec.seed = 6;
    const SynthResult res = synth_scm(spec, 600);
    const std::vector<std::string> vars{"Perm", "Gas_Thick", "Flow_Pres"};
    std::vector<RegressorSpec> specs(1);
    specs[0].kind = RegressorKind::Linear;
    const ComparisonReport rep =
        compare_protocol(res.data, vars, vars, specs, SplitConfig{0.3, 1}, "Gas_Prod");
    REQUIRE(rep.rows.size() == 2);
    CHECK(*rep.rows[0].test.r2 == *rep.rows[1].test.r2);
    CHECK(rep.rows[0].train.mse == rep.rows[1].train.mse);
}

TEST_CASE("comparison protocol directional check on confounded data") {
    // causal inputs = the output's observed parents in the generating DAG;
    // the auto-picked correlation arm loads up on reflections of the hidden
    // reservoir stress and generalizes worse with the forest
    ScmSpec spec = scm_preset("FIG7");
    spec.seed = 0;
    const SynthResult res = synth_scm(spec, 2000);
    std::vector<std::string> causal;
    const int out = res.dag.node_index("Gas_Prod");
    for (int p : res.dag.parents(out)) {
        if (res.data.has_column(res.dag.node_name(p))) causal.push_back(res.dag.node_name(p));
    }
    REQUIRE(causal.size() == 4);

    std::vector<RegressorSpec> specs(1);
    specs[0].kind = RegressorKind::RandomForest;
    specs[0].seed = 0;
    const ComparisonReport rep =
        compare_protocol(res.data, causal, {}, specs, SplitConfig{0.3, 0}, "Gas_Prod");
    REQUIRE(rep.rows.size() == 2);
    REQUIRE(rep.rows[0].mode == SelectionMode::Correlation);
    REQUIRE(rep.rows[1].mode == SelectionMode::Causal);
    CHECK(*rep.rows[1].test.r2 > *rep.rows[0].test.r2);
    CHECK(rep.corr_vars.size() == causal.size());
}

TEST_CASE("comparison report csv shape") {
    ScmSpec spec = scm_preset("FIG7");
    spec.seed = 9;
    const SynthResult res = synth_scm(spec, 400);
    std::vector<RegressorSpec> specs;
    for (RegressorKind kind : {RegressorKind::Linear, RegressorKind::Svr, RegressorKind::Mlp,
                               RegressorKind::RandomForest}) {
        RegressorSpec s;
        s.kind = kind;
        s.seed = 1;
        if (kind == RegressorKind::Mlp) s.hyperparams["epochs"] = 40;
        if (kind == RegressorKind::RandomForest) s.hyperparams["trees"] = 25;
        specs.push_back(s);
    }
    const ComparisonReport rep = compare_protocol(
        res.data, {"Perm", "Gas_Thick"}, {}, specs, SplitConfig{0.25, 3}, "Gas_Prod");
    REQUIRE(rep.rows.size() == 8);  // four kinds, two arms each

    const std::string csv = rep.to_csv();
    CHECK(csv.rfind("# format_version 1\n", 0) == 0);
    CHECK(csv.find("model,mode,r2_train,mae_train,mse_train,r2_test,mae_test,mse_test,best_in") !=
          std::string::npos);
    // three-decimal cells and a populated best column somewhere
    CHECK(csv.find("best_in") != std::string::npos);
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 10);  // comment + header + 8 rows

    // every numeric cell is printed with exactly three decimals
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::size_t field = 0;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            if (field >= 2 && field <= 7 && cell != "nan") {
                const auto dot = cell.find('.');
                REQUIRE(dot != std::string::npos);
                CHECK(cell.size() - dot - 1 == 3);
            }
            ++field;
        }
    }
}
