#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "causalfrac/linalg.hpp"

namespace causalfrac {

enum class RegressorKind { Linear, RandomForest, Mlp, Svr };

std::string to_string(RegressorKind k);
RegressorKind regressor_kind_from_string(const std::string& s);

/// Hyperparameters are a key -> value map validated per kind at fit time:
///   RandomForest: trees, depth (0 = root stump; unlimited when absent), min_leaf,
///                 features_per_split,
///                 bootstrap (0/1)
///   Mlp:          hidden_units, learning_rate, epochs
///   Svr:          epsilon, penalty, learning_rate, epochs
///   Linear:       (none)
struct RegressorSpec {
    RegressorKind kind = RegressorKind::Linear;
    std::map<std::string, double> hyperparams;
    std::string kernel = "linear";  // Svr; only the linear kernel exists
    std::uint64_t seed = 0;
};

struct LinearParams {
    std::vector<double> coef;
    double intercept = 0.0;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;  // leaf mean
    int left = -1;
    int right = -1;
};

struct TreeParams {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    double predict(std::span<const double> x) const;
};

struct ForestParams {
    std::vector<TreeParams> trees;
};

struct MlpParams {
    std::size_t inputs = 0;
    std::size_t hidden = 0;
    // theta layout: [W1 (hidden x inputs, row-major), b1 (hidden), w2 (hidden), b2]
    std::vector<double> theta;
};

struct SvrParams {
    std::vector<double> w;
    double b = 0.0;
};

/// A fitted regressor. Prediction is a pure function of (model, input) and
/// accepts exactly the training feature set, by name and order.
class FittedModel {
public:
    FittedModel() = default;
    FittedModel(RegressorKind kind, std::vector<std::string> features,
                std::vector<double> feature_means,
                std::variant<LinearParams, ForestParams, MlpParams, SvrParams> params)
        : kind_(kind),
          features_(std::move(features)),
          feature_means_(std::move(feature_means)),
          params_(std::move(params)) {}

    RegressorKind kind() const { return kind_; }
    const std::vector<std::string>& feature_names() const { return features_; }
    /// Training-column means; the default SHAP background row.
    const std::vector<double>& feature_means() const { return feature_means_; }

    double predict_row(std::span<const double> x) const;

    /// Throws FeatureMismatch unless names equal the training features.
    std::vector<double> predict(const Matrix& X, const std::vector<std::string>& names) const;

    const std::variant<LinearParams, ForestParams, MlpParams, SvrParams>& params() const {
        return params_;
    }

    std::string to_json() const;
    static FittedModel from_json(const std::string& text);

private:
    RegressorKind kind_ = RegressorKind::Linear;
    std::vector<std::string> features_;
    std::vector<double> feature_means_;
    std::variant<LinearParams, ForestParams, MlpParams, SvrParams> params_;
};

/// Fit a regressor on an n x p design. Feature-free designs (p = 0)
/// degenerate to the intercept-only mean model for every kind.
FittedModel fit(const RegressorSpec& spec, const Matrix& X, const std::vector<double>& y,
                const std::vector<std::string>& feature_names);

// --- pieces exposed for verification ---------------------------------------

struct MlpArch {
    std::size_t inputs = 0;
    std::size_t hidden = 0;
};

std::size_t mlp_param_count(const MlpArch& arch);

/// Mean-squared-error loss of the one-hidden-layer tanh network, plus its
/// analytic gradient; the gradient-check target.
void mlp_loss_grad(const MlpArch& arch, std::span<const double> theta, const Matrix& X,
                   const std::vector<double>& y, double& loss, std::vector<double>& grad);
double mlp_loss(const MlpArch& arch, std::span<const double> theta, const Matrix& X,
                const std::vector<double>& y);

/// One CART regression tree with explicit controls (max_depth counts split
/// levels; 0 yields a root-only stump). trees=1 forests with bootstrap off
/// reduce to this exactly.
TreeParams fit_cart(const Matrix& X, const std::vector<double>& y, std::size_t min_leaf,
                    std::size_t max_depth, std::size_t features_per_split, std::uint64_t seed);

}  // namespace causalfrac
