// causalfrac: causal discovery and interpretable production prediction for
// fractured-well data. Subcommands: synth, discover, explain, compare,
// pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "causalfrac/causal_model.hpp"
#include "causalfrac/citest.hpp"
#include "causalfrac/dataset.hpp"
#include "causalfrac/errors.hpp"
#include "causalfrac/iicd.hpp"
#include "causalfrac/metrics.hpp"
#include "causalfrac/physics.hpp"
#include "causalfrac/pipeline.hpp"
#include "causalfrac/shap.hpp"

namespace fs = std::filesystem;
using namespace causalfrac;

namespace {

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
    std::cout << "wrote " << path.string() << '\n';
}

Dataset load_with_meta(const std::string& csv, const std::string& meta, bool impute,
                       bool raw_scale) {
    LoadOptions opts;
    if (impute) opts.missing = LoadOptions::MissingPolicy::ImputeMean;
    Dataset ds = load_csv(csv, load_roles_json(meta), opts);
    if (raw_scale) return ds;
    auto std_res = standardize(ds);
    for (const auto& warn : std_res.constant_columns) {
        std::cerr << "warning: constant column " << warn << " standardized to zeros\n";
    }
    return std_res.data;
}

IicdConfig discovery_config(double alpha, const std::string& orientation, int max_r,
                            std::uint64_t seed) {
    IicdConfig cfg;
    cfg.alpha = alpha;
    cfg.seed = seed;
    if (max_r >= 0) cfg.max_r = static_cast<std::size_t>(max_r);
    cfg.orientation_rule_set = orientation == "vstruct" ? OrientationRuleSet::VStructOnly
                                                        : OrientationRuleSet::Standard;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"causal discovery and interpretable prediction toolkit for fractured wells"};
    app.require_subcommand(1);

    // shared flags
    std::uint64_t seed = 0;
    double alpha = 0.05;
    std::string out_dir = "out";
    std::string orientation = "standard";

    // synth
    auto* synth = app.add_subcommand("synth", "generate a preset synthetic dataset");
    std::string preset = "FIG7";
    std::size_t n_rows = 2000;
    bool show_latents = false;
    synth->add_option("--preset", preset, "FIG7 | FIG8A | FIG8B");
    synth->add_option("--n", n_rows, "sample count");
    synth->add_option("--seed", seed);
    synth->add_option("--out", out_dir, "output directory");
    synth->add_flag("--show-latents", show_latents, "emit latent columns too");

    // discover
    auto* discover = app.add_subcommand("discover", "run causal discovery on a CSV");
    std::string csv_path, meta_path;
    int max_r = -1;
    bool impute = false, raw_scale = false, spearman_flag = false;
    discover->add_option("--csv", csv_path)->required();
    discover->add_option("--meta", meta_path, "sidecar role JSON")->required();
    discover->add_option("--alpha", alpha, "CI significance level");
    discover->add_option("--seed", seed);
    discover->add_option("--max-r", max_r, "cap on conditioning size (default d-2)");
    discover->add_option("--orientation", orientation, "standard | vstruct");
    discover->add_option("--out", out_dir);
    discover->add_flag("--impute", impute, "impute missing cells by column mean");
    discover->add_flag("--raw-scale", raw_scale, "skip standardization");
    discover->add_flag("--spearman", spearman_flag, "rank-based CI test variant");

    // explain
    auto* explain = app.add_subcommand("explain", "fit the two-stage model and run SHAP");
    std::string roles_file, model_kind = "rf", shap_method = "exact";
    std::size_t max_rows = 400, n_perm = 2000;
    explain->add_option("--csv", csv_path)->required();
    explain->add_option("--meta", meta_path)->required();
    explain->add_option("--roles", roles_file, "role-binding JSON (skips discovery)");
    explain->add_option("--model", model_kind, "lr | svr | mlp | rf");
    explain->add_option("--method", shap_method, "exact | sampled");
    explain->add_option("--rows", max_rows, "instances to explain (0 = all)");
    explain->add_option("--permutations", n_perm);
    explain->add_option("--alpha", alpha);
    explain->add_option("--seed", seed);
    explain->add_option("--orientation", orientation);
    explain->add_option("--out", out_dir);
    explain->add_flag("--impute", impute);
    explain->add_flag("--raw-scale", raw_scale);

    // compare
    auto* compare = app.add_subcommand("compare", "correlation vs causality protocol");
    std::string causal_vars_arg, corr_vars_arg;
    double test_fraction = 0.3;
    compare->add_option("--csv", csv_path)->required();
    compare->add_option("--meta", meta_path)->required();
    compare->add_option("--causal-vars", causal_vars_arg, "comma-separated causal inputs")
        ->required();
    compare->add_option("--corr-vars", corr_vars_arg,
                        "comma-separated correlation inputs (default: auto top-k)");
    compare->add_option("--test-fraction", test_fraction);
    compare->add_option("--seed", seed);
    compare->add_option("--out", out_dir);
    compare->add_flag("--impute", impute);
    compare->add_flag("--raw-scale", raw_scale);

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "run stages from a JSON config");
    std::string config_path;
    pipeline->add_option("--config", config_path, "pipeline config JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            ScmSpec spec = scm_preset(preset);
            spec.seed = seed;
            spec.hide_latents = !show_latents;
            const SynthResult res = synth_scm(spec, n_rows);
            fs::create_directories(out_dir);
            write_csv(res.data, (fs::path(out_dir) / "data.csv").string());
            std::cout << "wrote " << (fs::path(out_dir) / "data.csv").string() << '\n';
            nlohmann::json meta = nlohmann::json::object();
            for (const auto& col : res.data.columns()) {
                meta[col.name] = {{"role", to_string(col.role)}, {"unit", col.unit}};
            }
            write_text(fs::path(out_dir) / "meta.json", meta.dump(2));
            write_text(fs::path(out_dir) / "truth.edges", edge_notation(res.dag));
            write_text(fs::path(out_dir) / "scm.json", scm_to_json(spec));
        } else if (*discover) {
            const Dataset ds = load_with_meta(csv_path, meta_path, impute, raw_scale);
            FisherZOptions fopts;
            fopts.spearman = spearman_flag;
            const DiscoveryResult res =
                iicd_discover(ds, discovery_config(alpha, orientation, max_r, seed), fopts);
            fs::create_directories(out_dir);
            write_text(fs::path(out_dir) / "pag.edges", edge_notation(res.pag));
            write_text(fs::path(out_dir) / "pag.json", graph_to_json(res.pag));
            write_text(fs::path(out_dir) / "trace.jsonl", res.trace.to_jsonl());
        } else if (*explain) {
            const Dataset ds = load_with_meta(csv_path, meta_path, impute, raw_scale);
            RoleBinding binding;
            if (!roles_file.empty()) {
                std::ifstream in(roles_file);
                if (!in) throw MissingFile(roles_file);
                std::stringstream ss;
                ss << in.rdbuf();
                binding = role_binding_from_json(ss.str());
            } else {
                const DiscoveryResult res =
                    iicd_discover(ds, discovery_config(alpha, orientation, -1, seed));
                const auto outputs = ds.names_with_role(VariableRole::Output);
                if (outputs.size() != 1) {
                    throw NoOutputNode("need exactly one output-role variable");
                }
                binding = select_roles(res.pag, ds, outputs[0]);
            }
            RegressorSpec spec;
            spec.kind = regressor_kind_from_string(model_kind);
            spec.seed = seed;
            const CausalModel model = fit_causal(ds, binding, spec);
            ExplainOptions eopts;
            eopts.method = shap_method == "sampled" ? ShapMethod::Sampled : ShapMethod::Exact;
            eopts.n_permutations = n_perm;
            eopts.max_rows = max_rows;
            eopts.seed = seed;
            const DatasetExplanation ex = explain_dataset(model, ds, eopts);
            fs::create_directories(out_dir);
            write_text(fs::path(out_dir) / "roles.json", role_binding_to_json(binding));
            write_text(fs::path(out_dir) / "causal_model.json", model.to_json());
            write_text(fs::path(out_dir) / "shap.json", explanation_to_json(ex));
            write_text(fs::path(out_dir) / "beeswarm.csv", beeswarm_csv(ex, ds));
        } else if (*compare) {
            const Dataset ds = load_with_meta(csv_path, meta_path, impute, raw_scale);
            auto split_list = [](const std::string& s) {
                std::vector<std::string> out;
                std::stringstream ss(s);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    if (!item.empty()) out.push_back(item);
                }
                return out;
            };
            const auto outputs = ds.names_with_role(VariableRole::Output);
            if (outputs.size() != 1) throw NoOutputNode("need exactly one output-role variable");
            std::vector<RegressorSpec> specs;
            for (const char* k : {"lr", "svr", "mlp", "rf"}) {
                RegressorSpec spec;
                spec.kind = regressor_kind_from_string(k);
                spec.seed = seed;
                specs.push_back(spec);
            }
            SplitConfig scfg{test_fraction, seed};
            const ComparisonReport report =
                compare_protocol(ds, split_list(causal_vars_arg), split_list(corr_vars_arg),
                                 specs, scfg, outputs[0]);
            fs::create_directories(out_dir);
            write_text(fs::path(out_dir) / "metrics.csv", report.to_csv());
        } else if (*pipeline) {
            for (const auto& f : run_pipeline(config_path)) std::cout << "wrote " << f << '\n';
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
