#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "causalfrac/causal_model.hpp"
#include "causalfrac/dataset.hpp"
#include "causalfrac/linalg.hpp"
#include "causalfrac/regress.hpp"

namespace causalfrac {

using ModelFn = std::function<double(std::span<const double>)>;

/// Coalition value function: f_x(S) averages the model over the background
/// rows with the instance's values spliced in on S. f_x(everything) is the
/// model at the instance, f_x(empty) the background mean prediction.
struct ValueFunction {
    ModelFn model;
    Matrix background;  // b x p; a single mean row by default
    std::vector<double> instance;

    std::size_t feature_count() const { return instance.size(); }
    /// Evaluate with S given as a bitmask over features.
    double eval_mask(std::uint64_t mask) const;
};

ValueFunction value_function(const FittedModel& model, std::span<const double> instance);

enum class ShapMethod { Exact, Sampled };

struct ShapExplanation {
    double phi0 = 0.0;
    std::vector<double> phi;
    std::vector<std::string> feature_names;
    ShapMethod method = ShapMethod::Exact;
    std::size_t n_permutations = 0;
    std::uint64_t seed = 0;
    /// Monte-Carlo efficiency gap folded back into phi (Sampled only).
    double efficiency_residual = 0.0;
};

/// Exact Shapley attribution by full subset enumeration with memoized
/// coalition values. Hard-capped at 20 features (2^p evaluations).
ShapExplanation shap_exact(const ValueFunction& vf);

/// Permutation-sampling estimator of the same quantity, antithetic pairs
/// (each sampled permutation is followed by its reverse), deterministic per
/// seed. The efficiency identity is enforced by spreading the sampling
/// residual proportionally to |phi|.
ShapExplanation shap_sampled(const ValueFunction& vf, std::size_t n_perm, std::uint64_t seed);

// --- trend classification ----------------------------------------------------

/// O: higher value, higher attribution. N: higher value, lower attribution.
/// M: attribution peaks at moderate values. C: no usable pattern.
enum class TrendKind { O, N, M, C };

std::string to_string(TrendKind t);

struct TrendThresholds {
    double rank_corr = 0.3;  // |Spearman| for O/N
    double mid_margin = 0.1;  // in units of sd(phi), for M
};

struct TrendLabel {
    TrendKind kind = TrendKind::C;
    double rank_correlation = 0.0;
    double tercile_means[3] = {0.0, 0.0, 0.0};  // low / mid / high by feature value
};

/// Label a feature's attribution pattern. Needs n >= 10 and a nonconstant
/// feature (ConstantFeature otherwise).
TrendLabel classify_trend(const std::vector<double>& feature_values,
                          const std::vector<double>& phis,
                          const TrendThresholds& thresholds = {});

// --- dataset-level report ----------------------------------------------------

struct FeatureReport {
    std::string name;
    double importance = 0.0;  // mean |phi| across instances
    TrendLabel trend;
};

struct DatasetExplanation {
    std::vector<std::string> feature_names;
    std::vector<ShapExplanation> instances;
    std::vector<FeatureReport> ranking;  // descending importance
    ShapMethod method = ShapMethod::Exact;
};

struct ExplainOptions {
    ShapMethod method = ShapMethod::Exact;
    std::size_t n_permutations = 2000;  // Sampled only
    std::uint64_t seed = 0;
    std::size_t max_rows = 0;  // 0 = explain every row
    bool full_background = false;  // average over all training rows, not the mean row
    TrendThresholds thresholds{};
};

/// Explain a fitted model on every (or the first max_rows) dataset row:
/// per-instance attributions, mean-|phi| importance ranking, per-feature
/// trend labels.
DatasetExplanation explain_dataset(const FittedModel& model, const Dataset& ds,
                                   const ExplainOptions& opts = {});

/// Explains the outcome stage (psi2) of the two-stage model over its
/// feature set, treatments observed.
DatasetExplanation explain_dataset(const CausalModel& model, const Dataset& ds,
                                   const ExplainOptions& opts = {});

std::string explanation_to_json(const DatasetExplanation& ex);

/// (feature, value, phi) rows for external beeswarm-style plotting.
std::string beeswarm_csv(const DatasetExplanation& ex, const Dataset& ds);

}  // namespace causalfrac
