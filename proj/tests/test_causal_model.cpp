#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "causalfrac/causal_model.hpp"
#include "causalfrac/errors.hpp"
#include "causalfrac/rng.hpp"

using namespace causalfrac;

namespace {

Dataset make_ds(std::vector<VariableMeta> metas, std::vector<std::vector<double>> cols) {
    const std::size_t n = cols[0].size();
    std::vector<double> vals(n * cols.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) vals[i * cols.size() + j] = cols[j][i];
    }
    return Dataset(metas, vals);
}

// A small field-data-shaped layout: two geological variables, two engineering
// variables, one output. Liq_Prep bridges into the geological cluster.
Dataset field_layout(std::uint64_t seed, std::size_t n) {
    Rng rng(seed);
    std::vector<double> geo1(n), geo2(n), liq(n), eng(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double latent = rng.normal();
        geo1[i] = latent + 0.5 * rng.normal();
        geo2[i] = rng.normal();
        liq[i] = 0.8 * latent + 0.6 * rng.normal();
        eng[i] = rng.normal();
        out[i] = geo1[i] + 0.5 * geo2[i] + 0.7 * liq[i] + 0.3 * eng[i] + 0.2 * rng.normal();
    }
    return make_ds({{"Break_Stre", VariableRole::Geological, "MPa"},
                    {"Gas_Cont", VariableRole::Geological, ""},
                    {"Liq_Prep", VariableRole::Engineering, "m3"},
                    {"Perf_Thick", VariableRole::Engineering, "m"},
                    {"Gas_Prod", VariableRole::Output, ""}},
                   {geo1, geo2, liq, eng, out});
}

MixedGraph field_layout_pag() {
    MixedGraph g(GraphKind::PAG, {"Break_Stre", "Gas_Cont", "Liq_Prep", "Perf_Thick", "Gas_Prod"});
    g.add_edge(2, 0, Mark::Arrow, Mark::Arrow);   // Liq_Prep <-> Break_Stre bridge
    g.add_edge(0, 4, Mark::Circle, Mark::Arrow);  // Break_Stre o-> Gas_Prod
    g.add_edge(1, 4, Mark::Circle, Mark::Arrow);
    g.add_edge(3, 4, Mark::Circle, Mark::Arrow);
    return g;
}

}  // namespace

TEST_CASE("select_roles finds the unique bridge treatment") {
    const Dataset ds = field_layout(1, 200);
    const RoleBinding b = select_roles(field_layout_pag(), ds, "Gas_Prod");
    CHECK(b.treatment == "Liq_Prep");
    CHECK(b.output == "Gas_Prod");
    CHECK(b.confounders == std::vector<std::string>{"Break_Stre", "Gas_Cont"});
    CHECK(b.inputs == std::vector<std::string>{"Perf_Thick"});
}

TEST_CASE("select_roles errors") {
    const Dataset ds = field_layout(1, 100);

    MixedGraph two_bridges = field_layout_pag();
    two_bridges.add_edge(3, 1, Mark::Circle, Mark::Circle);  // Perf_Thick o-o Gas_Cont
    try {
        select_roles(two_bridges, ds, "Gas_Prod");
        FAIL("expected AmbiguousTreatment");
    } catch (const AmbiguousTreatment& e) {
        CHECK(e.candidates == std::vector<std::string>{"Liq_Prep", "Perf_Thick"});
    }

    MixedGraph disconnected = field_layout_pag();
    disconnected.remove_edge(2, 0);
    try {
        select_roles(disconnected, ds, "Gas_Prod");
        FAIL("expected AmbiguousTreatment");
    } catch (const AmbiguousTreatment& e) {
        CHECK(e.candidates.empty());
    }

    CHECK_THROWS_AS(select_roles(field_layout_pag(), ds, "Nope"), NoOutputNode);
}

TEST_CASE("select_roles honors an explicit treatment tag") {
    Dataset ds = field_layout(1, 100);
    std::vector<VariableMeta> metas = ds.columns();
    metas[3].role = VariableRole::Treatment;  // tag Perf_Thick directly
    const Dataset tagged(metas, ds.raw());
    const RoleBinding b = select_roles(field_layout_pag(), tagged, "Gas_Prod");
    CHECK(b.treatment == "Perf_Thick");
    CHECK(b.inputs == std::vector<std::string>{"Liq_Prep"});
}

TEST_CASE("select_roles is invariant to row and column order") {
    const Dataset ds = field_layout(7, 150);
    const RoleBinding base = select_roles(field_layout_pag(), ds, "Gas_Prod");

    std::vector<std::size_t> rows(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) rows[i] = ds.n() - 1 - i;
    const RoleBinding rowperm = select_roles(field_layout_pag(), ds.take_rows(rows), "Gas_Prod");
    CHECK(rowperm == base);

    const Dataset colperm =
        ds.select({"Gas_Prod", "Perf_Thick", "Liq_Prep", "Gas_Cont", "Break_Stre"});
    const RoleBinding cp = select_roles(field_layout_pag(), colperm, "Gas_Prod");
    CHECK(cp.treatment == base.treatment);
    CHECK(cp.output == base.output);
    std::multiset<std::string> a(cp.confounders.begin(), cp.confounders.end());
    std::multiset<std::string> b(base.confounders.begin(), base.confounders.end());
    CHECK(a == b);
}

TEST_CASE("two deterministic stages compose exactly") {
    // T = W1, Y = T: every prediction must be exact for the linear explainer
    const std::size_t n = 40;
    Rng rng(3);
    std::vector<double> w(n), t(n), x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = rng.normal();
        t[i] = w[i];
        x[i] = rng.normal();
        y[i] = t[i];
    }
    const Dataset ds = make_ds({{"W1", VariableRole::Geological, ""},
                                {"T", VariableRole::Treatment, ""},
                                {"X1", VariableRole::Engineering, ""},
                                {"Y", VariableRole::Output, ""}},
                               {w, t, x, y});
    RoleBinding binding;
    binding.treatment = "T";
    binding.confounders = {"W1"};
    binding.inputs = {"X1"};
    binding.output = "Y";
    RegressorSpec spec;
    const CausalModel m = fit_causal(ds, binding, spec);

    const auto observed = predict_causal(m, ds, TreatmentMode::Observed);
    const auto imputed = predict_causal(m, ds, TreatmentMode::Imputed);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(observed[i] == doctest::Approx(y[i]).epsilon(1e-8));
        CHECK(imputed[i] == doctest::Approx(observed[i]).epsilon(1e-8));
    }
}

TEST_CASE("empty confounder set degenerates psi1 to the mean model") {
    const std::size_t n = 30;
    Rng rng(5);
    std::vector<double> t(n), x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = rng.normal();
        x[i] = rng.normal();
        y[i] = 2.0 * t[i] + x[i];
    }
    const Dataset ds = make_ds({{"T", VariableRole::Treatment, ""},
                                {"X1", VariableRole::Engineering, ""},
                                {"Y", VariableRole::Output, ""}},
                               {t, x, y});
    RoleBinding binding;
    binding.treatment = "T";
    binding.inputs = {"X1"};
    binding.output = "Y";
    const CausalModel m = fit_causal(ds, binding, RegressorSpec{});
    double tbar = 0;
    for (double v : t) tbar += v;
    tbar /= static_cast<double>(n);
    CHECK(m.psi1.predict_row(std::span<const double>{}) == doctest::Approx(tbar).epsilon(1e-12));
}

TEST_CASE("observed-mode linear residuals are orthogonal to the features") {
    const std::size_t n = 120;
    Rng rng(13);
    std::vector<double> w(n), t(n), x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = rng.normal();
        t[i] = 0.5 * w[i] + rng.normal();
        x[i] = rng.normal();
        y[i] = x[i] - t[i] + 0.8 * w[i] + 0.3 * rng.normal();
    }
    const Dataset ds = make_ds({{"W1", VariableRole::Geological, ""},
                                {"T", VariableRole::Treatment, ""},
                                {"X1", VariableRole::Engineering, ""},
                                {"Y", VariableRole::Output, ""}},
                               {w, t, x, y});
    RoleBinding binding;
    binding.treatment = "T";
    binding.confounders = {"W1"};
    binding.inputs = {"X1"};
    binding.output = "Y";
    const CausalModel m = fit_causal(ds, binding, RegressorSpec{});
    const auto pred = predict_causal(m, ds, TreatmentMode::Observed);
    for (const auto& feature : {x, w, t}) {
        double dot = 0;
        for (std::size_t i = 0; i < n; ++i) dot += (y[i] - pred[i]) * feature[i];
        CHECK(std::abs(dot) / static_cast<double>(n) < 1e-8);
    }
}

TEST_CASE("imputed predictions respond to confounders with inputs held fixed") {
    const std::size_t n = 60;
    Rng rng(17);
    std::vector<double> w(n), t(n), x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = rng.normal();
        t[i] = 1.2 * w[i] + 0.2 * rng.normal();
        x[i] = rng.normal();
        y[i] = 0.5 * x[i] + 2.0 * t[i] + 0.1 * rng.normal();
    }
    const Dataset ds = make_ds({{"W1", VariableRole::Geological, ""},
                                {"T", VariableRole::Treatment, ""},
                                {"X1", VariableRole::Engineering, ""},
                                {"Y", VariableRole::Output, ""}},
                               {w, t, x, y});
    RoleBinding binding;
    binding.treatment = "T";
    binding.confounders = {"W1"};
    binding.inputs = {"X1"};
    binding.output = "Y";
    const CausalModel m = fit_causal(ds, binding, RegressorSpec{});

    // two rows identical except for W1; T column deliberately constant
    const Dataset probe = make_ds({{"W1", VariableRole::Geological, ""},
                                   {"T", VariableRole::Treatment, ""},
                                   {"X1", VariableRole::Engineering, ""},
                                   {"Y", VariableRole::Output, ""}},
                                  {{-1.0, 1.0}, {0.0, 0.0}, {0.4, 0.4}, {0.0, 0.0}});
    const auto imputed = predict_causal(m, probe, TreatmentMode::Imputed);
    CHECK(std::abs(imputed[1] - imputed[0]) > 1.0);
    const auto observed = predict_causal(m, probe, TreatmentMode::Observed);
    CHECK(std::abs(observed[1] - observed[0]) < 2.1);  // only the direct W path differs
}

TEST_CASE("adding the treatment never hurts in-sample linear fit") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        Rng rng(seed);
        const std::size_t n = 90;
        std::vector<double> w(n), t(n), x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = rng.normal();
            t[i] = 0.4 * w[i] + rng.normal();
            x[i] = rng.normal();
            y[i] = x[i] + 0.6 * w[i] + rng.uniform(0.0, 1.0) * t[i] + 0.5 * rng.normal();
        }
        const Dataset ds = make_ds({{"W1", VariableRole::Geological, ""},
                                    {"T", VariableRole::Treatment, ""},
                                    {"X1", VariableRole::Engineering, ""},
                                    {"Y", VariableRole::Output, ""}},
                                   {w, t, x, y});
        RoleBinding with_t;
        with_t.treatment = "T";
        with_t.confounders = {"W1"};
        with_t.inputs = {"X1"};
        with_t.output = "Y";
        const CausalModel m = fit_causal(ds, with_t, RegressorSpec{});
        const auto pred_full = predict_causal(m, ds, TreatmentMode::Observed);

        // drop the treatment column and refit psi2 on (X, W) only
        Matrix xw(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
            xw.at(i, 0) = x[i];
            xw.at(i, 1) = w[i];
        }
        const FittedModel reduced = fit(RegressorSpec{}, xw, y, {"X1", "W1"});
        const auto pred_reduced = reduced.predict(xw, {"X1", "W1"});

        auto sse = [&](const std::vector<double>& pred) {
            double s = 0;
            for (std::size_t i = 0; i < n; ++i) s += (y[i] - pred[i]) * (y[i] - pred[i]);
            return s;
        };
        CHECK(sse(pred_full) <= sse(pred_reduced) + 1e-9);
    }
}

TEST_CASE("causal model JSON round-trip preserves predictions bit-exactly") {
    const Dataset ds = field_layout(21, 300);
    RoleBinding binding = select_roles(field_layout_pag(), ds, "Gas_Prod");
    RegressorSpec spec;
    spec.kind = RegressorKind::RandomForest;
    spec.seed = 2;
    spec.hyperparams["trees"] = 25;
    const CausalModel m = fit_causal(ds, binding, spec);
    const CausalModel back = CausalModel::from_json(m.to_json());
    const auto p1 = predict_causal(m, ds, TreatmentMode::Imputed);
    const auto p2 = predict_causal(back, ds, TreatmentMode::Imputed);
    REQUIRE(p1.size() == p2.size());
    for (std::size_t i = 0; i < p1.size(); ++i) REQUIRE(p1[i] == p2[i]);
    CHECK(back.binding == m.binding);
}

TEST_CASE("role binding validation") {
    RoleBinding b;
    b.treatment = "T";
    b.output = "T";
    CHECK_THROWS_AS(b.validate(), ConfigError);
    b.output = "Y";
    b.confounders = {"W", "W"};
    CHECK_THROWS_AS(b.validate(), ConfigError);
    b.confounders = {"W"};
    b.inputs = {"W"};
    CHECK_THROWS_AS(b.validate(), ConfigError);
    b.inputs = {"X"};
    CHECK_NOTHROW(b.validate());

    const std::string json = role_binding_to_json(b);
    const RoleBinding back = role_binding_from_json(json);
    CHECK(back == b);
}
