#pragma once

#include <string>
#include <vector>

#include "causalfrac/dataset.hpp"
#include "causalfrac/graph.hpp"
#include "causalfrac/regress.hpp"

namespace causalfrac {

/// Variable roles of the two-stage model: treatment T, confounders W,
/// inputs X, output Y. psi2 consumes X + W + T, in that order.
struct RoleBinding {
    std::string treatment;
    std::vector<std::string> confounders;
    std::vector<std::string> inputs;
    std::string output;

    void validate() const;  // disjointness and non-empty T/Y
    std::vector<std::string> psi2_features() const;

    bool operator==(const RoleBinding&) const = default;
};

RoleBinding role_binding_from_json(const std::string& text);
std::string role_binding_to_json(const RoleBinding& binding);

/// The fitted two-stage model: stage one predicts the treatment from the
/// confounders, stage two predicts the output from inputs, confounders and
/// treatment together.
struct CausalModel {
    RoleBinding binding;
    FittedModel psi1;  // W -> T
    FittedModel psi2;  // (X, W, T) -> Y
    RegressorKind explainer_kind = RegressorKind::Linear;

    std::string to_json() const;
    static CausalModel from_json(const std::string& text);
};

/// Derive the role binding from a PAG and the dataset's role tags: the
/// treatment is the unique engineering variable bridging into the
/// geological cluster, confounders are the geological variables, inputs are
/// the remaining factors. Throws AmbiguousTreatment when the bridge is not
/// unique (an empty candidate list means no bridge at all).
RoleBinding select_roles(const MixedGraph& pag, const Dataset& ds, const std::string& output);

/// Build the binding for a known treatment: confounders = geological
/// variables, inputs = the remaining factors.
RoleBinding binding_for_treatment(const Dataset& ds, const std::string& treatment,
                                  const std::string& output);

/// How committed the PAG is to a bridge between `node` and the geological
/// cluster: the largest arrow count (0..2) over its geological edges. A
/// latent-confounded bridge scores 2, an undetermined circle edge 0.
int bridge_commitment(const MixedGraph& pag, const Dataset& ds, const std::string& node);

CausalModel fit_causal(const Dataset& train, const RoleBinding& binding,
                       const RegressorSpec& spec);

enum class TreatmentMode {
    Observed,  // use the recorded treatment column
    Imputed,   // substitute psi1(W): the pre-job planning scenario
};

std::vector<double> predict_causal(const CausalModel& m, const Dataset& ds, TreatmentMode mode);

}  // namespace causalfrac
