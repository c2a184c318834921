#include "causalfrac/causal_model.hpp"

#include <algorithm>
#include <set>

#include "causalfrac/errors.hpp"

#include <json.hpp>

namespace causalfrac {

void RoleBinding::validate() const {
    if (treatment.empty()) throw ConfigError("role binding needs a treatment variable");
    if (output.empty()) throw NoOutputNode("role binding needs an output variable");
    std::set<std::string> seen{treatment, output};
    if (treatment == output) throw ConfigError("treatment and output coincide");
    for (const auto& w : confounders) {
        if (!seen.insert(w).second) throw ConfigError("role overlap on " + w);
    }
    for (const auto& x : inputs) {
        if (!seen.insert(x).second) throw ConfigError("role overlap on " + x);
    }
}

std::vector<std::string> RoleBinding::psi2_features() const {
    std::vector<std::string> f = inputs;
    f.insert(f.end(), confounders.begin(), confounders.end());
    f.push_back(treatment);
    return f;
}

RoleBinding role_binding_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad role file: ") + e.what());
    }
    RoleBinding b;
    b.treatment = j.at("treatment").get<std::string>();
    b.confounders = j.value("confounders", std::vector<std::string>{});
    b.inputs = j.value("inputs", std::vector<std::string>{});
    b.output = j.at("output").get<std::string>();
    b.validate();
    return b;
}

std::string role_binding_to_json(const RoleBinding& binding) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["treatment"] = binding.treatment;
    j["confounders"] = binding.confounders;
    j["inputs"] = binding.inputs;
    j["output"] = binding.output;
    return j.dump(2);
}

RoleBinding select_roles(const MixedGraph& pag, const Dataset& ds, const std::string& output) {
    if (!pag.has_node(output)) throw NoOutputNode("output variable not in graph: " + output);
    if (!ds.has_column(output)) throw NoOutputNode("output variable not in dataset: " + output);

    const std::vector<std::string> geological = ds.names_with_role(VariableRole::Geological);
    std::set<std::string> geo_set(geological.begin(), geological.end());

    // Bridge candidates: engineering variables directly attached to the
    // geological cluster, the Liq_Prep <-> Break_Stre pattern.
    std::vector<std::string> candidates;
    for (const auto& col : ds.columns()) {
        const bool engineering =
            col.role == VariableRole::Engineering || col.role == VariableRole::Treatment;
        if (!engineering || col.name == output || !pag.has_node(col.name)) continue;
        const int idx = pag.node_index(col.name);
        for (int nb : pag.adjacent(idx)) {
            if (geo_set.count(pag.node_name(nb))) {
                candidates.push_back(col.name);
                break;
            }
        }
    }

    // An explicitly tagged treatment column wins outright.
    std::vector<std::string> tagged = ds.names_with_role(VariableRole::Treatment);
    std::string treatment;
    if (tagged.size() == 1) {
        treatment = tagged[0];
    } else if (tagged.size() > 1) {
        throw AmbiguousTreatment(tagged);
    } else if (candidates.size() == 1) {
        treatment = candidates[0];
    } else {
        throw AmbiguousTreatment(candidates);
    }

    return binding_for_treatment(ds, treatment, output);
}

RoleBinding binding_for_treatment(const Dataset& ds, const std::string& treatment,
                                  const std::string& output) {
    RoleBinding b;
    b.treatment = treatment;
    b.output = output;
    for (const auto& col : ds.columns()) {
        if (col.name == treatment || col.name == output) continue;
        if (col.role == VariableRole::Geological) {
            b.confounders.push_back(col.name);
        } else if (col.role != VariableRole::Output) {
            b.inputs.push_back(col.name);
        }
    }
    b.validate();
    return b;
}

int bridge_commitment(const MixedGraph& pag, const Dataset& ds, const std::string& node) {
    const std::vector<std::string> geological = ds.names_with_role(VariableRole::Geological);
    std::set<std::string> geo_set(geological.begin(), geological.end());
    if (!pag.has_node(node)) return -1;
    const int idx = pag.node_index(node);
    int best = -1;
    for (int nb : pag.adjacent(idx)) {
        if (!geo_set.count(pag.node_name(nb))) continue;
        const int arrows = (pag.mark(nb, idx) == Mark::Arrow ? 1 : 0) +
                           (pag.mark(idx, nb) == Mark::Arrow ? 1 : 0);
        best = std::max(best, arrows);
    }
    return best;
}

namespace {

Matrix design_matrix(const Dataset& ds, const std::vector<std::string>& names) {
    Matrix X(ds.n(), names.size());
    for (std::size_t j = 0; j < names.size(); ++j) {
        const std::size_t col = ds.column_index(names[j]);
        for (std::size_t i = 0; i < ds.n(); ++i) X.at(i, j) = ds.at(i, col);
    }
    return X;
}

}  // namespace

CausalModel fit_causal(const Dataset& train, const RoleBinding& binding,
                       const RegressorSpec& spec) {
    binding.validate();
    for (const auto& name : binding.psi2_features()) (void)train.column_index(name);
    (void)train.column_index(binding.output);

    CausalModel m;
    m.binding = binding;
    m.explainer_kind = spec.kind;
    m.psi1 = fit(spec, design_matrix(train, binding.confounders), train.column(binding.treatment),
                 binding.confounders);
    const std::vector<std::string> psi2_names = binding.psi2_features();
    m.psi2 = fit(spec, design_matrix(train, psi2_names), train.column(binding.output), psi2_names);
    return m;
}

std::vector<double> predict_causal(const CausalModel& m, const Dataset& ds, TreatmentMode mode) {
    const std::vector<std::string> psi2_names = m.binding.psi2_features();
    Matrix X(ds.n(), psi2_names.size());
    for (std::size_t j = 0; j + 1 < psi2_names.size(); ++j) {
        const std::size_t col = ds.column_index(psi2_names[j]);
        for (std::size_t i = 0; i < ds.n(); ++i) X.at(i, j) = ds.at(i, col);
    }

    const std::size_t t_col = psi2_names.size() - 1;
    if (mode == TreatmentMode::Observed) {
        const std::size_t col = ds.column_index(m.binding.treatment);
        for (std::size_t i = 0; i < ds.n(); ++i) X.at(i, t_col) = ds.at(i, col);
    } else {
        const std::vector<double> t_hat =
            m.psi1.predict(design_matrix(ds, m.binding.confounders), m.binding.confounders);
        for (std::size_t i = 0; i < ds.n(); ++i) X.at(i, t_col) = t_hat[i];
    }
    return m.psi2.predict(X, psi2_names);
}

std::string CausalModel::to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["binding"] = nlohmann::json::parse(role_binding_to_json(binding));
    j["psi1"] = nlohmann::json::parse(psi1.to_json());
    j["psi2"] = nlohmann::json::parse(psi2.to_json());
    j["explainer_kind"] = to_string(explainer_kind);
    return j.dump(2);
}

CausalModel CausalModel::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad causal model JSON: ") + e.what());
    }
    CausalModel m;
    m.binding = role_binding_from_json(j.at("binding").dump());
    m.psi1 = FittedModel::from_json(j.at("psi1").dump());
    m.psi2 = FittedModel::from_json(j.at("psi2").dump());
    m.explainer_kind = regressor_kind_from_string(j.at("explainer_kind").get<std::string>());
    return m;
}

}  // namespace causalfrac
