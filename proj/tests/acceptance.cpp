// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit code is the failure count.

#include <chrono>
#include <cmath>
#include <limits>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <vector>

#include "causalfrac/causal_model.hpp"
#include "causalfrac/citest.hpp"
#include "causalfrac/dataset.hpp"
#include "causalfrac/iicd.hpp"
#include "causalfrac/linalg.hpp"
#include "causalfrac/metrics.hpp"
#include "causalfrac/physics.hpp"
#include "causalfrac/pipeline.hpp"
#include "causalfrac/regress.hpp"
#include "causalfrac/rng.hpp"
#include "causalfrac/shap.hpp"
#include "support/oracles.hpp"

using namespace causalfrac;
namespace oracle = causalfrac::testing;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int id;
    const char* label;
    bool passed;
    std::string detail;
    double seconds;
};

std::vector<Criterion> results;

template <class Fn>
void run_criterion(int id, const char* label, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
        ok = fn(detail);
    } catch (const std::exception& e) {
        ok = false;
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results.push_back(Criterion{id, label, ok, detail, secs});
    std::printf("%s criterion %2d: %-38s %s (%.1fs)\n", ok ? "PASS" : "FAIL", id, label,
                detail.c_str(), secs);
    std::fflush(stdout);
}

// 1. d-separation equals brute-force path enumeration on 100 seeded DAGs
bool criterion_dsep(std::string& detail) {
    std::size_t mismatches = 0, checked = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t d = 3 + seed % 4;  // up to 6 nodes
        const MixedGraph dag = oracle::random_dag(d, 0.45, seed);
        const int n = static_cast<int>(d);
        for (int x = 0; x < n; ++x) {
            for (int y = x + 1; y < n; ++y) {
                std::vector<int> rest;
                for (int v = 0; v < n; ++v) {
                    if (v != x && v != y) rest.push_back(v);
                }
                for (std::size_t mask = 0; mask < (std::size_t{1} << rest.size()); ++mask) {
                    std::set<int> z;
                    for (std::size_t b = 0; b < rest.size(); ++b) {
                        if ((mask >> b) & 1u) z.insert(rest[b]);
                    }
                    mismatches +=
                        d_separated(dag, x, y, z) != oracle::d_separated_bruteforce(dag, x, y, z);
                    ++checked;
                }
            }
        }
    }
    detail = std::to_string(mismatches) + " mismatches over " + std::to_string(checked) +
             " queries";
    return mismatches == 0;
}

// 2. oracle-CI discovery: exact skeletons, no false arrowheads, 200 DAGs
bool criterion_oracle_soundness(std::string& detail) {
    std::size_t skeleton_errors = 0, arrow_errors = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const std::size_t d = 4 + seed % 4;  // up to 7 nodes
        const MixedGraph dag = oracle::random_dag(d, 0.35, seed);
        const DiscoveryResult res =
            iicd_discover_with(dag.node_names(), d_separation_oracle(dag), IicdConfig{});
        const int n = static_cast<int>(d);
        for (int x = 0; x < n; ++x) {
            for (int y = x + 1; y < n; ++y) {
                skeleton_errors += res.pag.has_edge(x, y) != dag.has_edge(x, y);
            }
        }
        for (const Edge& e : res.pag.edges()) {
            if (!dag.has_edge(e.a, e.b)) continue;
            if (res.pag.mark(e.a, e.b) == Mark::Arrow && dag.mark(e.a, e.b) != Mark::Arrow) {
                ++arrow_errors;
            }
            if (res.pag.mark(e.b, e.a) == Mark::Arrow && dag.mark(e.b, e.a) != Mark::Arrow) {
                ++arrow_errors;
            }
        }
    }
    detail = std::to_string(skeleton_errors) + " skeleton / " + std::to_string(arrow_errors) +
             " arrowhead errors over 200 DAGs";
    return skeleton_errors == 0 && arrow_errors == 0;
}

// 3. finite-sample recovery on sparse linear-Gaussian SCMs
bool criterion_finite_sample(std::string& detail) {
    double f1_sum = 0.0;
    const std::size_t seeds = 20;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        ScmSpec spec = random_linear_scm(10, 2, seed);
        spec.seed = Rng::derive(seed, 0xacce);
        const SynthResult synth = synth_scm(spec, 2000);
        IicdConfig cfg;
        cfg.alpha = 0.05;
        const DiscoveryResult res = iicd_discover(synth.data, cfg);
        f1_sum += graph_score(synth.dag, res.pag).skeleton_f1;
    }
    const double mean_f1 = f1_sum / static_cast<double>(seeds);
    char buf[64];
    std::snprintf(buf, sizeof buf, "mean skeleton F1 = %.3f (needs >= 0.90)", mean_f1);
    detail = buf;
    return mean_f1 >= 0.90;
}

// 4. hidden-confounder detection: the prepad/breakdown bridge comes out <->
bool criterion_confounder(std::string& detail) {
    std::size_t hits = 0;
    const std::size_t seeds = 20;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        ScmSpec spec = scm_preset("FIG7");
        spec.seed = seed;
        const SynthResult synth = synth_scm(spec, 20000);
        IicdConfig cfg;
        cfg.alpha = 0.01;
        const DiscoveryResult res = iicd_discover(synth.data, cfg);
        const int qp = res.pag.node_index("Liq_Prep");
        const int pf = res.pag.node_index("Break_Stre");
        hits += res.pag.has_edge(qp, pf) && res.pag.mark(qp, pf) == Mark::Arrow &&
                res.pag.mark(pf, qp) == Mark::Arrow;
    }
    detail = std::to_string(hits) + "/20 seeds show Liq_Prep <-> Break_Stre (needs >= 16)";
    return hits >= 16;
}

// 5. Shapley axioms, permutation oracle, sampled estimator
bool criterion_shapley(std::string& detail) {
    Rng rng(0x5a);
    // axioms at p <= 10
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t p = 3 + rng.index(8);  // 3..10
        std::vector<double> lin(p), inter(p);
        for (auto& v : lin) v = rng.uniform(-2, 2);
        for (auto& v : inter) v = rng.uniform(-1, 1);
        auto g = [lin](std::span<const double> x) {
            double s = 0;
            for (std::size_t j = 0; j < lin.size(); ++j) s += lin[j] * x[j];
            return s;
        };
        auto h = [inter](std::span<const double> x) {
            double s = 0;
            for (std::size_t j = 0; j + 1 < inter.size(); ++j) s += inter[j] * x[j] * x[j + 1];
            return s;
        };
        ValueFunction vf;
        vf.background = Matrix(1, p);
        vf.instance.resize(p);
        for (std::size_t j = 0; j < p; ++j) {
            vf.background.at(0, j) = rng.normal();
            vf.instance[j] = rng.normal();
        }
        // symmetry probe: features 0 and 1 get equal linear weight, no
        // interactions, equal instance/background values
        std::vector<double> sym = lin;
        sym[1] = sym[0];
        std::vector<double> inter_zero(p, 0.0);
        ValueFunction vsym = vf;
        vsym.instance[1] = vsym.instance[0];
        vsym.background.at(0, 1) = vsym.background.at(0, 0);
        vsym.model = [sym](std::span<const double> x) {
            double s = 0;
            for (std::size_t j = 0; j < sym.size(); ++j) s += sym[j] * x[j];
            return s * s;  // nonlinear but symmetric in x0, x1
        };
        const ShapExplanation esym = shap_exact(vsym);
        if (std::abs(esym.phi[0] - esym.phi[1]) > 1e-9) {
            detail = "symmetry axiom violated";
            return false;
        }

        vf.model = [g, h](std::span<const double> x) { return g(x) + h(x); };
        const ShapExplanation esum = shap_exact(vf);
        ValueFunction vg = vf;
        vg.model = g;
        ValueFunction vh = vf;
        vh.model = h;
        const ShapExplanation eg = shap_exact(vg);
        const ShapExplanation eh = shap_exact(vh);
        double total = esum.phi0;
        for (double v : esum.phi) total += v;
        if (std::abs(total - vf.model(vf.instance)) > 1e-9) {
            detail = "efficiency axiom violated";
            return false;
        }
        for (std::size_t j = 0; j < p; ++j) {
            if (std::abs(esum.phi[j] - eg.phi[j] - eh.phi[j]) > 1e-9) {
                detail = "linearity axiom violated";
                return false;
            }
        }
        // dummy: append an unread feature
        ValueFunction vdummy = vf;
        vdummy.instance.push_back(rng.normal());
        vdummy.background = Matrix(1, p + 1);
        for (std::size_t j = 0; j < p; ++j) vdummy.background.at(0, j) = vf.background.at(0, j);
        vdummy.background.at(0, p) = rng.normal();
        vdummy.model = [g, h, p](std::span<const double> x) {
            return g(x.subspan(0, p)) + h(x.subspan(0, p));
        };
        if (std::abs(shap_exact(vdummy).phi[p]) > 1e-12) {
            detail = "dummy axiom violated";
            return false;
        }
    }
    // exact equals the all-permutations oracle at p <= 6
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t p = 2 + rng.index(5);
        std::vector<double> w(p);
        for (auto& v : w) v = rng.uniform(-1.5, 1.5);
        ValueFunction vf;
        vf.model = [w](std::span<const double> x) {
            double s = 0;
            for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
            return s + std::sin(x[0]) * (w.size() > 1 ? x[1] : 1.0);
        };
        vf.background = Matrix(1, p);
        vf.instance.resize(p);
        for (std::size_t j = 0; j < p; ++j) {
            vf.background.at(0, j) = rng.normal();
            vf.instance[j] = rng.normal();
        }
        const ShapExplanation ex = shap_exact(vf);
        const std::vector<double> op = oracle::shap_permutation_oracle(vf);
        for (std::size_t j = 0; j < p; ++j) {
            if (std::abs(ex.phi[j] - op[j]) > 1e-10) {
                detail = "exact deviates from the permutation oracle";
                return false;
            }
        }
    }
    // sampled estimator at 10k permutations
    {
        const std::size_t p = 8;
        std::vector<double> w(p);
        for (auto& v : w) v = rng.uniform(-2, 2);
        ValueFunction vf;
        vf.model = [w](std::span<const double> x) {
            double s = 0;
            for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
            return s + x[0] * x[1];
        };
        vf.background = Matrix(1, p);
        vf.instance.resize(p);
        for (std::size_t j = 0; j < p; ++j) {
            vf.background.at(0, j) = rng.normal();
            vf.instance[j] = rng.normal();
        }
        const ShapExplanation exact = shap_exact(vf);
        const ShapExplanation sampled = shap_sampled(vf, 10000, 0);
        double lo = vf.eval_mask(0), hi = lo;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << p); ++mask) {
            const double v = vf.eval_mask(mask);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double tol = 0.05 * (hi - lo);
        for (std::size_t j = 0; j < p; ++j) {
            if (std::abs(sampled.phi[j] - exact.phi[j]) > tol) {
                detail = "sampled estimator outside 0.05 x range";
                return false;
            }
        }
    }
    detail = "efficiency/symmetry/dummy/linearity, oracle match, sampling bound";
    return true;
}

// 6. regressor correctness: OLS oracle, MLP gradient, single-tree forest
bool criterion_regressors(std::string& detail) {
    Rng rng(0x6c);
    // OLS vs an independently inverted normal-equation system
    for (int trial = 0; trial < 6; ++trial) {
        const std::size_t n = 50 + rng.index(50), p = 3 + rng.index(3);
        Matrix X(n, p);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = rng.normal();
            for (std::size_t j = 0; j < p; ++j) {
                X.at(i, j) = rng.normal();
                s += (1.0 + static_cast<double>(j)) * X.at(i, j);
            }
            y[i] = s;
        }
        std::vector<std::string> names;
        for (std::size_t j = 0; j < p; ++j) names.push_back("f" + std::to_string(j));
        const FittedModel m = fit(RegressorSpec{}, X, y, names);
        const auto& lp = std::get<LinearParams>(m.params());

        Matrix a(p + 1, p + 1);
        std::vector<double> rhs(p + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row(p + 1, 1.0);
            for (std::size_t j = 0; j < p; ++j) row[j] = X.at(i, j);
            for (std::size_t j = 0; j <= p; ++j) {
                rhs[j] += row[j] * y[i];
                for (std::size_t k = 0; k <= p; ++k) a.at(j, k) += row[j] * row[k];
            }
        }
        const auto inv = invert(a);
        if (!inv) {
            detail = "oracle inversion failed";
            return false;
        }
        for (std::size_t j = 0; j < p; ++j) {
            double oracle_beta = 0;
            for (std::size_t k = 0; k <= p; ++k) oracle_beta += inv->at(j, k) * rhs[k];
            if (std::abs(lp.coef[j] - oracle_beta) > 1e-8) {
                detail = "OLS deviates from the normal-equation oracle";
                return false;
            }
        }
    }
    // MLP gradient vs central differences
    {
        const MlpArch arch{4, 6};
        const std::size_t n = 15;
        Matrix X(n, arch.inputs);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < arch.inputs; ++j) X.at(i, j) = rng.normal();
            y[i] = rng.normal();
        }
        const double h = 1e-5;
        for (int point = 0; point < 20; ++point) {
            std::vector<double> theta(mlp_param_count(arch));
            for (auto& t : theta) t = rng.uniform(-1, 1);
            double loss;
            std::vector<double> grad;
            mlp_loss_grad(arch, theta, X, y, loss, grad);
            for (std::size_t k = 0; k < theta.size(); ++k) {
                auto tp = theta, tm = theta;
                tp[k] += h;
                tm[k] -= h;
                const double fd = (mlp_loss(arch, tp, X, y) - mlp_loss(arch, tm, X, y)) / (2 * h);
                const double rel =
                    std::abs(grad[k] - fd) / std::max({std::abs(fd), std::abs(grad[k]), 1e-8});
                if (rel > 1e-5) {
                    detail = "MLP gradient check failed";
                    return false;
                }
            }
        }
    }
    // single-tree, no-bootstrap forest reproduces the CART tree exactly
    {
        const std::size_t n = 100, p = 3;
        Matrix X(n, p);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p; ++j) X.at(i, j) = rng.normal();
            y[i] = X.at(i, 0) > 0.3 ? 1.0 + X.at(i, 1) : -2.0;
        }
        RegressorSpec spec;
        spec.kind = RegressorKind::RandomForest;
        spec.seed = 9;
        spec.hyperparams["trees"] = 1;
        spec.hyperparams["bootstrap"] = 0;
        spec.hyperparams["features_per_split"] = static_cast<double>(p);
        const FittedModel forest = fit(spec, X, y, {"a", "b", "c"});
        const TreeParams tree = fit_cart(X, y, 3, std::numeric_limits<std::size_t>::max(), p, Rng::derive(spec.seed, 0));
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row{X.at(i, 0), X.at(i, 1), X.at(i, 2)};
            if (forest.predict_row(row) != tree.predict(row)) {
                detail = "single-tree forest deviates from CART";
                return false;
            }
        }
    }
    detail = "OLS oracle, MLP gradients, CART equivalence";
    return true;
}

// 7. physics identities and spot values
bool criterion_physics(std::string& detail) {
    Rng rng(0x70);
    for (int trial = 0; trial < 500; ++trial) {
        const double qp = rng.uniform(0, 500), qs = rng.uniform(0, 500),
                     qr = rng.uniform(1e-9, 500);
        const VolumeBalance vb = volume_balance(qp, qs, qr);
        if (std::abs(vb.R_p + vb.R_s + vb.R_r - 1.0) > 1e-12 ||
            std::abs(vb.R_p * vb.Q_f - qp) > 1e-12 * std::max(1.0, qp) ||
            std::abs(vb.R_s * vb.Q_f - qs) > 1e-12 * std::max(1.0, qs) ||
            std::abs(vb.Q_f - (qp + qs + qr)) > 1e-12 * vb.Q_f) {
            detail = "volume/ratio identity failed";
            return false;
        }
    }
    if (breakdown_stress_classic(30, 20, 5, 10) != 85.0) {
        detail = "classic breakdown spot value";
        return false;
    }
    const double p_f = breakdown_stress_poro({0.25, 30, 10, 1.0, 10, 5});
    if (std::abs(p_f - 55.0) > 1e-12) {
        detail = "porous breakdown spot value";
        return false;
    }
    FractureWidthParams fw;
    fw.v = 0.31;
    fw.dp_T = 2.5;
    fw.H = 12.0;
    fw.G = 180.0;
    fw.L = 40.0;
    fw.x = 0.0;
    if (fracture_width(fw) != (1.0 - fw.v) * fw.dp_T * fw.H / fw.G) {
        detail = "fracture width at x = 0";
        return false;
    }
    detail = "volume identities, breakdown and width spot values";
    return true;
}

// 8. causal inputs beat correlation inputs for the forest on held-out data
bool criterion_directional(std::string& detail) {
    std::size_t wins = 0;
    const std::size_t seeds = 10;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        ScmSpec spec = scm_preset("FIG7");
        spec.seed = seed;
        const SynthResult synth = synth_scm(spec, 2000);
        std::vector<std::string> causal;
        const int out = synth.dag.node_index("Gas_Prod");
        for (int p : synth.dag.parents(out)) {
            if (synth.data.has_column(synth.dag.node_name(p))) {
                causal.push_back(synth.dag.node_name(p));
            }
        }
        std::vector<RegressorSpec> specs(1);
        specs[0].kind = RegressorKind::RandomForest;
        specs[0].seed = seed;
        const ComparisonReport rep =
            compare_protocol(synth.data, causal, {}, specs, SplitConfig{0.3, seed}, "Gas_Prod");
        wins += rep.rows[1].test.r2.value_or(-1) > rep.rows[0].test.r2.value_or(-1);
    }
    detail = std::to_string(wins) + "/10 seeds favour causal inputs (needs >= 8)";
    return wins >= 8;
}

// 9. trend classifier labels constructed profiles perfectly
bool criterion_trends(std::string& detail) {
    const std::size_t n = 5000;
    std::size_t correct = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(Rng::derive(seed, 0x9e));
        std::vector<double> values(n);
        for (auto& v : values) v = rng.normal();
        const std::vector<double> ranks = average_ranks(values);

        std::vector<double> up(n), down(n), tent(n), noise(n);
        for (std::size_t i = 0; i < n; ++i) {
            up[i] = values[i] + 0.05 * rng.normal();
            down[i] = -values[i] + 0.05 * rng.normal();
            const double u = (ranks[i] - 1.0) / static_cast<double>(n - 1);
            tent[i] = 1.0 - std::abs(2.0 * u - 1.0) + 0.05 * rng.normal();
            noise[i] = rng.normal();
        }
        correct += classify_trend(values, up).kind == TrendKind::O;
        correct += classify_trend(values, down).kind == TrendKind::N;
        correct += classify_trend(values, tent).kind == TrendKind::M;
        correct += classify_trend(values, noise).kind == TrendKind::C;
        total += 4;
    }
    detail = std::to_string(correct) + "/" + std::to_string(total) + " profiles labelled";
    return correct == total;
}

// 10. byte-identical pipeline reruns within the runtime budget
bool criterion_pipeline(std::string& detail) {
    const std::string cfg = R"({
        "seed": 2024,
        "out_dir": "run",
        "stages": ["synth", "standardize", "discover", "roles", "fit", "explain", "compare"],
        "synth": {"preset": "FIG7", "n": 2000},
        "discover": {"alpha": 0.01},
        "fit": {"regressor": "rf"},
        "explain": {"method": "exact", "max_rows": 400},
        "compare": {"test_fraction": 0.3}
    })";
    const fs::path a = fs::temp_directory_path() / "cf_accept_a";
    const fs::path b = fs::temp_directory_path() / "cf_accept_b";
    fs::remove_all(a);
    fs::remove_all(b);
    fs::create_directories(a);
    fs::create_directories(b);

    const auto t0 = std::chrono::steady_clock::now();
    const auto wa = run_pipeline_json(cfg, a.string());
    const double one_run =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto wb = run_pipeline_json(cfg, b.string());
    if (wa.size() != wb.size()) {
        detail = "different file sets across reruns";
        return false;
    }
    for (const auto& fa : wa) {
        const fs::path pa(fa);
        const fs::path pb = b / "run" / pa.filename();
        std::ifstream ia(pa, std::ios::binary), ib(pb, std::ios::binary);
        std::stringstream sa, sb;
        sa << ia.rdbuf();
        sb << ib.rdbuf();
        if (sa.str() != sb.str()) {
            detail = "byte difference in " + pa.filename().string();
            return false;
        }
    }
    char buf[80];
    std::snprintf(buf, sizeof buf, "byte-identical reruns; one run took %.0fs (< 300s)", one_run);
    detail = buf;
    return one_run < 300.0;
}

}  // namespace

int main() {
    std::printf("acceptance suite, toolkit version %s\n", kToolVersion);
    run_criterion(1, "d-separation oracle equivalence", criterion_dsep);
    run_criterion(2, "oracle-CI discovery soundness", criterion_oracle_soundness);
    run_criterion(3, "finite-sample skeleton recovery", criterion_finite_sample);
    run_criterion(4, "hidden-confounder <-> detection", criterion_confounder);
    run_criterion(5, "Shapley axioms and estimators", criterion_shapley);
    run_criterion(6, "regressor correctness", criterion_regressors);
    run_criterion(7, "physics identities", criterion_physics);
    run_criterion(8, "causal vs correlation inputs", criterion_directional);
    run_criterion(9, "trend classifier", criterion_trends);
    run_criterion(10, "pipeline determinism and runtime", criterion_pipeline);

    int failures = 0;
    for (const auto& c : results) failures += !c.passed;
    std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures,
                results.size());
    // runtime budgets stated for the fast criteria
    for (const auto& c : results) {
        if (c.id == 1 && c.seconds >= 60.0) {
            std::printf("WARN criterion 1 exceeded its 60s budget\n");
            ++failures;
        }
        if (c.id == 2 && c.seconds >= 120.0) {
            std::printf("WARN criterion 2 exceeded its 120s budget\n");
            ++failures;
        }
        if (c.id == 3 && c.seconds >= 60.0) {
            std::printf("WARN criterion 3 exceeded its 60s budget\n");
            ++failures;
        }
    }
    return failures;
}
