#include "causalfrac/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "causalfrac/causal_model.hpp"
#include "causalfrac/citest.hpp"
#include "causalfrac/dataset.hpp"
#include "causalfrac/errors.hpp"
#include "causalfrac/iicd.hpp"
#include "causalfrac/metrics.hpp"
#include "causalfrac/physics.hpp"
#include "causalfrac/shap.hpp"

#include <json.hpp>

namespace causalfrac {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content,
                std::vector<std::string>& written) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
    written.push_back(path.string());
}

std::string roles_json_for(const Dataset& ds) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& col : ds.columns()) {
        j[col.name] = {{"role", to_string(col.role)}, {"unit", col.unit}};
    }
    return j.dump(2);
}

RegressorSpec spec_from_json(const nlohmann::json& j, std::uint64_t seed) {
    RegressorSpec spec;
    spec.kind = regressor_kind_from_string(j.value("regressor", "rf"));
    spec.seed = seed;
    if (j.contains("hyperparams")) {
        for (auto it = j["hyperparams"].begin(); it != j["hyperparams"].end(); ++it) {
            if (it.key() == "kernel") {
                spec.kernel = it.value().get<std::string>();
            } else {
                spec.hyperparams[it.key()] = it.value().get<double>();
            }
        }
    }
    return spec;
}

struct StageState {
    Dataset data;
    bool have_data = false;
    MixedGraph truth;  // generating DAG when synthesized
    bool have_truth = false;
    DiscoveryResult discovery;
    bool have_discovery = false;
    RoleBinding binding;
    bool have_binding = false;
    CausalModel model;
    bool have_model = false;
    std::string output_name;
};

std::string find_output_column(const Dataset& ds) {
    const auto outputs = ds.names_with_role(VariableRole::Output);
    if (outputs.size() != 1) {
        throw ConfigError("expected exactly one output-role variable, found " +
                          std::to_string(outputs.size()));
    }
    return outputs[0];
}

}  // namespace

std::vector<std::string> run_pipeline_json(const std::string& config_json,
                                           const std::string& base_dir) {
    nlohmann::json cfg;
    try {
        cfg = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!cfg.contains("stages") || !cfg["stages"].is_array()) {
        throw ConfigError("config needs a 'stages' array");
    }
    const std::uint64_t seed = cfg.value("seed", std::uint64_t{0});
    const fs::path out_dir = fs::path(base_dir) / cfg.value("out_dir", std::string("out"));
    fs::create_directories(out_dir);

    static const std::set<std::string> known{"synth",    "load",  "standardize", "discover",
                                             "roles",    "fit",   "explain",     "compare"};
    for (const auto& s : cfg["stages"]) {
        if (!known.count(s.get<std::string>())) {
            throw ConfigError("unknown pipeline stage: " + s.get<std::string>());
        }
    }
    auto has_stage = [&](const char* name) {
        for (const auto& s : cfg["stages"]) {
            if (s.get<std::string>() == name) return true;
        }
        return false;
    };

    std::vector<std::string> written;
    StageState st;

    try {
        if (has_stage("synth")) {
            const auto& jc = cfg.value("synth", nlohmann::json::object());
            ScmSpec spec = scm_preset(jc.value("preset", std::string("FIG7")));
            spec.seed = seed;
            if (jc.contains("hide_latents")) spec.hide_latents = jc["hide_latents"].get<bool>();
            const auto n = jc.value("n", std::size_t{2000});
            SynthResult synth = synth_scm(spec, n);
            st.data = std::move(synth.data);
            st.truth = std::move(synth.dag);
            st.have_data = true;
            st.have_truth = true;
            write_csv(st.data, (out_dir / "data.csv").string());
            written.push_back((out_dir / "data.csv").string());
            write_file(out_dir / "meta.json", roles_json_for(st.data), written);
            write_file(out_dir / "truth.edges", edge_notation(st.truth), written);
        } else if (has_stage("load")) {
            if (!cfg.contains("load")) throw ConfigError("load stage needs a 'load' section");
            const auto& jc = cfg["load"];
            if (!jc.contains("csv") || !jc.contains("meta")) {
                throw ConfigError("load stage needs 'csv' and 'meta' paths");
            }
            LoadOptions opts;
            if (jc.value("missing", std::string("reject")) == "impute_mean") {
                opts.missing = LoadOptions::MissingPolicy::ImputeMean;
            }
            const std::string csv = jc["csv"].get<std::string>();
            st.data = load_csv(csv, load_roles_json(jc["meta"].get<std::string>()), opts);
            st.have_data = true;
        }

        if (has_stage("standardize")) {
            if (!st.have_data) throw ConfigError("standardize stage needs synth or load first");
            st.data = standardize(st.data).data;
        }

        if (has_stage("discover")) {
            if (!st.have_data) throw ConfigError("discover stage needs synth or load first");
            const auto& jc = cfg.value("discover", nlohmann::json::object());
            IicdConfig icfg;
            icfg.alpha = jc.value("alpha", 0.05);
            icfg.seed = seed;
            if (jc.contains("max_r")) icfg.max_r = jc["max_r"].get<std::size_t>();
            icfg.orientation_rule_set = jc.value("orientation", std::string("standard")) == "vstruct"
                                            ? OrientationRuleSet::VStructOnly
                                            : OrientationRuleSet::Standard;
            FisherZOptions fopts;
            fopts.spearman = jc.value("spearman", false);
            st.discovery = iicd_discover(st.data, icfg, fopts);
            st.have_discovery = true;
            write_file(out_dir / "pag.edges", edge_notation(st.discovery.pag), written);
            write_file(out_dir / "pag.json", graph_to_json(st.discovery.pag), written);
            write_file(out_dir / "trace.jsonl", st.discovery.trace.to_jsonl(), written);
        }

        if (has_stage("roles")) {
            if (!st.have_data) throw ConfigError("roles stage needs data");
            const auto& jc = cfg.value("roles", nlohmann::json::object());
            st.output_name = jc.value("output", std::string());
            if (st.output_name.empty()) st.output_name = find_output_column(st.data);
            if (jc.contains("file")) {
                std::ifstream in(jc["file"].get<std::string>());
                if (!in) throw MissingFile(jc["file"].get<std::string>());
                std::stringstream ss;
                ss << in.rdbuf();
                st.binding = role_binding_from_json(ss.str());
            } else {
                if (!st.have_discovery) {
                    throw ConfigError("roles stage needs discover first (or a roles file)");
                }
                try {
                    st.binding = select_roles(st.discovery.pag, st.data, st.output_name);
                } catch (const AmbiguousTreatment& e) {
                    // Finite samples occasionally leave a second, uncommitted
                    // bridge candidate. Prefer the one whose bridge edge the
                    // PAG actually commits to (arrow marks beat circles);
                    // rethrow when that still ties.
                    if (e.candidates.empty()) throw;
                    int best_score = -1;
                    std::string best;
                    bool tied = false;
                    for (const auto& cand : e.candidates) {
                        const int score = bridge_commitment(st.discovery.pag, st.data, cand);
                        if (score > best_score) {
                            best_score = score;
                            best = cand;
                            tied = false;
                        } else if (score == best_score) {
                            tied = true;
                        }
                    }
                    if (tied || best.empty()) throw;
                    st.binding = binding_for_treatment(st.data, best, st.output_name);
                }
            }
            st.have_binding = true;
            write_file(out_dir / "roles.json", role_binding_to_json(st.binding), written);
        }

        if (has_stage("fit")) {
            if (!st.have_data || !st.have_binding) {
                throw ConfigError("fit stage needs data and roles");
            }
            const auto& jc = cfg.value("fit", nlohmann::json::object());
            st.model = fit_causal(st.data, st.binding, spec_from_json(jc, seed));
            st.have_model = true;
            write_file(out_dir / "causal_model.json", st.model.to_json(), written);
        }

        if (has_stage("explain")) {
            if (!st.have_data || !st.have_binding) {
                throw ConfigError("explain stage needs data and roles");
            }
            const auto& jc = cfg.value("explain", nlohmann::json::object());
            ExplainOptions eopts;
            eopts.method = jc.value("method", std::string("exact")) == "sampled"
                               ? ShapMethod::Sampled
                               : ShapMethod::Exact;
            eopts.n_permutations = jc.value("n_permutations", std::size_t{2000});
            eopts.max_rows = jc.value("max_rows", std::size_t{400});
            eopts.seed = seed;

            // main explanation with the configured (or default rf) explainer
            const RegressorSpec main_spec =
                spec_from_json(cfg.value("fit", nlohmann::json::object()), seed);
            CausalModel main_model =
                st.have_model ? st.model : fit_causal(st.data, st.binding, main_spec);
            const DatasetExplanation main_ex = explain_dataset(main_model, st.data, eopts);
            write_file(out_dir / "shap.json", explanation_to_json(main_ex), written);
            write_file(out_dir / "beeswarm.csv", beeswarm_csv(main_ex, st.data), written);

            // trend table across the four explainers
            std::vector<std::string> kinds =
                jc.value("kinds", std::vector<std::string>{"lr", "svr", "mlp", "rf"});
            std::map<std::string, std::map<std::string, std::string>> trends;  // factor -> kind
            std::vector<std::pair<double, std::string>> order;  // by main importance
            for (const auto& fr : main_ex.ranking) order.emplace_back(-fr.importance, fr.name);
            std::sort(order.begin(), order.end());
            for (const auto& kind_name : kinds) {
                RegressorSpec spec;
                spec.kind = regressor_kind_from_string(kind_name);
                spec.seed = seed;
                const CausalModel cm = fit_causal(st.data, st.binding, spec);
                const DatasetExplanation ex = explain_dataset(cm, st.data, eopts);
                for (const auto& fr : ex.ranking) trends[fr.name][kind_name] = to_string(fr.trend.kind);
            }
            std::ostringstream tcsv;
            tcsv << "# format_version 1\nfactor";
            for (const auto& kind_name : kinds) tcsv << ',' << kind_name;
            tcsv << '\n';
            for (const auto& [neg_imp, factor] : order) {
                (void)neg_imp;
                tcsv << factor;
                for (const auto& kind_name : kinds) tcsv << ',' << trends[factor][kind_name];
                tcsv << '\n';
            }
            write_file(out_dir / "trends.csv", tcsv.str(), written);
        }

        if (has_stage("compare")) {
            if (!st.have_data) throw ConfigError("compare stage needs data");
            const auto& jc = cfg.value("compare", nlohmann::json::object());
            if (st.output_name.empty()) {
                st.output_name = jc.value("output", std::string());
                if (st.output_name.empty()) st.output_name = find_output_column(st.data);
            }
            std::vector<std::string> causal_vars =
                jc.value("causal_vars", std::vector<std::string>{});
            if (causal_vars.empty()) {
                if (!st.have_discovery) {
                    throw ConfigError("compare stage needs causal_vars or a discover stage");
                }
                // default causal arm: PAG neighbours of the output
                const int out_idx = st.discovery.pag.node_index(st.output_name);
                for (int nb : st.discovery.pag.adjacent(out_idx)) {
                    causal_vars.push_back(st.discovery.pag.node_name(nb));
                }
                std::sort(causal_vars.begin(), causal_vars.end());
                if (causal_vars.empty()) {
                    throw ConfigError("output has no neighbours in the PAG; pass causal_vars");
                }
            }
            SplitConfig scfg;
            scfg.test_fraction = jc.value("test_fraction", 0.3);
            scfg.seed = seed;
            std::vector<RegressorSpec> specs;
            for (const auto& kind_name :
                 jc.value("kinds", std::vector<std::string>{"lr", "svr", "mlp", "rf"})) {
                RegressorSpec spec;
                spec.kind = regressor_kind_from_string(kind_name);
                spec.seed = seed;
                specs.push_back(spec);
            }
            const ComparisonReport report =
                compare_protocol(st.data, causal_vars,
                                 jc.value("corr_vars", std::vector<std::string>{}), specs, scfg,
                                 st.output_name);
            write_file(out_dir / "metrics.csv", report.to_csv(), written);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw Error(std::string("pipeline stage failed: ") + e.what());
    }

    nlohmann::json run;
    run["format_version"] = 1;
    run["tool_version"] = kToolVersion;
    run["config"] = cfg;
    write_file(out_dir / "run.json", run.dump(2), written);
    return written;
}

std::vector<std::string> run_pipeline(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("config file not found: " + config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return run_pipeline_json(ss.str(), fs::path(config_path).parent_path().string());
}

}  // namespace causalfrac
