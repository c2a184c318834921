#include "causalfrac/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "causalfrac/errors.hpp"
#include "causalfrac/rng.hpp"

#include <json.hpp>

namespace causalfrac {

std::string to_string(RegressorKind k) {
    switch (k) {
        case RegressorKind::Linear: return "linear";
        case RegressorKind::RandomForest: return "random_forest";
        case RegressorKind::Mlp: return "mlp";
        case RegressorKind::Svr: return "svr";
    }
    return "?";
}

RegressorKind regressor_kind_from_string(const std::string& s) {
    if (s == "linear" || s == "lr") return RegressorKind::Linear;
    if (s == "random_forest" || s == "rf") return RegressorKind::RandomForest;
    if (s == "mlp") return RegressorKind::Mlp;
    if (s == "svr") return RegressorKind::Svr;
    throw ConfigError("unknown regressor kind: " + s);
}

namespace {

void check_keys(const RegressorSpec& spec, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : spec.hyperparams) {
        (void)value;
        if (!allowed.count(key)) throw UnknownHyperparameter(key);
    }
}

double param(const RegressorSpec& spec, const std::string& key, double fallback) {
    auto it = spec.hyperparams.find(key);
    return it == spec.hyperparams.end() ? fallback : it->second;
}

std::vector<double> column_means(const Matrix& X) {
    std::vector<double> m(X.cols(), 0.0);
    if (X.rows() == 0) return m;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < X.cols(); ++j) m[j] += X.at(i, j);
    }
    for (double& v : m) v /= static_cast<double>(X.rows());
    return m;
}

LinearParams fit_linear(const Matrix& X, const std::vector<double>& y) {
    const std::size_t n = X.rows();
    const std::size_t p = X.cols();
    if (n < p + 1) throw SingularDesign("linear fit needs n >= p + 1 samples");

    // normal equations over [X, 1]
    Matrix a(p + 1, p + 1);
    std::vector<double> b(p + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= p; ++j) {
            const double xj = j < p ? X.at(i, j) : 1.0;
            b[j] += xj * y[i];
            for (std::size_t k = j; k <= p; ++k) {
                const double xk = k < p ? X.at(i, k) : 1.0;
                a.at(j, k) += xj * xk;
            }
        }
    }
    for (std::size_t j = 0; j <= p; ++j) {
        for (std::size_t k = 0; k < j; ++k) a.at(j, k) = a.at(k, j);
    }

    auto sol = gauss_solve(a, b);
    if (!sol) {
        Matrix ridged = a;
        for (std::size_t j = 0; j <= p; ++j) ridged.at(j, j) += 1e-8;
        sol = gauss_solve(ridged, b);
    }
    if (!sol) throw SingularDesign("normal equations singular even after ridge");
    LinearParams lp;
    lp.coef.assign(sol->begin(), sol->end() - 1);
    lp.intercept = sol->back();
    return lp;
}

// --- CART ------------------------------------------------------------------

struct CartBuilder {
    const Matrix& X;
    const std::vector<double>& y;
    std::size_t min_leaf;
    std::size_t max_depth;  // 0 = unlimited
    std::size_t features_per_split;
    Rng rng;
    TreeParams tree;

    CartBuilder(const Matrix& X, const std::vector<double>& y, std::size_t min_leaf,
                std::size_t max_depth, std::size_t features_per_split, std::uint64_t seed)
        : X(X), y(y), min_leaf(std::max<std::size_t>(1, min_leaf)), max_depth(max_depth),
          features_per_split(features_per_split), rng(seed) {}  // max_depth 0 = a root-only stump

    int build(std::vector<std::size_t>& rows, std::size_t depth) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(TreeNode{});
        double sum = 0.0;
        for (std::size_t r : rows) sum += y[r];
        const double node_mean = sum / static_cast<double>(rows.size());
        tree.nodes[static_cast<std::size_t>(id)].value = node_mean;

        if (rows.size() < 2 * min_leaf) return id;
        if (depth >= max_depth) return id;
        bool pure = true;
        for (std::size_t r : rows) {
            if (y[r] != y[rows[0]]) {
                pure = false;
                break;
            }
        }
        if (pure) return id;

        // feature subset for this split
        std::vector<std::size_t> feats(X.cols());
        std::iota(feats.begin(), feats.end(), std::size_t{0});
        if (features_per_split < X.cols()) {
            rng.shuffle(feats);
            feats.resize(features_per_split);
            std::sort(feats.begin(), feats.end());
        }

        double best_score = std::numeric_limits<double>::infinity();
        int best_feature = -1;
        double best_threshold = 0.0;

        std::vector<std::pair<double, double>> vals;  // (x, y) sorted by x
        for (std::size_t f : feats) {
            vals.clear();
            for (std::size_t r : rows) vals.emplace_back(X.at(r, f), y[r]);
            std::sort(vals.begin(), vals.end());
            double left_sum = 0.0, left_sq = 0.0;
            double right_sum = 0.0, right_sq = 0.0;
            for (const auto& [xv, yv] : vals) {
                right_sum += yv;
                right_sq += yv * yv;
            }
            const std::size_t m = vals.size();
            for (std::size_t k = 0; k + 1 < m; ++k) {
                left_sum += vals[k].second;
                left_sq += vals[k].second * vals[k].second;
                right_sum -= vals[k].second;
                right_sq -= vals[k].second * vals[k].second;
                if (vals[k].first == vals[k + 1].first) continue;  // not a boundary
                const std::size_t nl = k + 1;
                const std::size_t nr = m - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                const double sse_left = left_sq - left_sum * left_sum / static_cast<double>(nl);
                const double sse_right =
                    right_sq - right_sum * right_sum / static_cast<double>(nr);
                const double score = sse_left + sse_right;
                const double threshold = 0.5 * (vals[k].first + vals[k + 1].first);
                // ties: lowest feature index, then lowest threshold (feature
                // loop is ascending, threshold scan is ascending)
                if (score < best_score) {
                    best_score = score;
                    best_feature = static_cast<int>(f);
                    best_threshold = threshold;
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows) {
            if (X.at(r, static_cast<std::size_t>(best_feature)) <= best_threshold) {
                left_rows.push_back(r);
            } else {
                right_rows.push_back(r);
            }
        }
        if (left_rows.empty() || right_rows.empty()) return id;

        const int left = build(left_rows, depth + 1);
        const int right = build(right_rows, depth + 1);
        TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = left;
        node.right = right;
        return id;
    }
};

}  // namespace

double TreeParams::predict(std::span<const double> x) const {
    int id = 0;
    while (true) {
        const TreeNode& node = nodes[static_cast<std::size_t>(id)];
        if (node.feature < 0) return node.value;
        id = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
}

TreeParams fit_cart(const Matrix& X, const std::vector<double>& y, std::size_t min_leaf,
                    std::size_t max_depth, std::size_t features_per_split, std::uint64_t seed) {
    CartBuilder builder(X, y, min_leaf, max_depth, features_per_split, seed);
    std::vector<std::size_t> rows(X.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    builder.build(rows, 0);
    return std::move(builder.tree);
}

namespace {

ForestParams fit_forest(const RegressorSpec& spec, const Matrix& X, const std::vector<double>& y) {
    const std::size_t p = X.cols();
    const std::size_t n = X.rows();
    const auto trees = static_cast<std::size_t>(param(spec, "trees", 100));
    const bool depth_given = spec.hyperparams.count("depth") > 0;
    const auto depth = depth_given ? static_cast<std::size_t>(param(spec, "depth", 0))
                                   : std::numeric_limits<std::size_t>::max();
    const auto min_leaf = static_cast<std::size_t>(param(spec, "min_leaf", 3));
    const std::size_t default_mtry = (p + 2) / 3;  // ceil(p / 3)
    auto mtry = static_cast<std::size_t>(
        param(spec, "features_per_split", static_cast<double>(std::max<std::size_t>(1, default_mtry))));
    mtry = std::clamp<std::size_t>(mtry, 1, std::max<std::size_t>(1, p));
    const bool bootstrap = param(spec, "bootstrap", 1.0) != 0.0;
    if (trees == 0) throw ConfigError("random forest needs trees >= 1");

    ForestParams forest;
    forest.trees.reserve(trees);
    for (std::size_t t = 0; t < trees; ++t) {
        const std::uint64_t tree_seed = Rng::derive(spec.seed, t);
        Matrix bx = X;
        std::vector<double> by = y;
        if (bootstrap) {
            Rng rng(Rng::derive(tree_seed, 0x0b00));
            bx = Matrix(n, p);
            by.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t r = rng.index(n);
                for (std::size_t j = 0; j < p; ++j) bx.at(i, j) = X.at(r, j);
                by[i] = y[r];
            }
        }
        forest.trees.push_back(fit_cart(bx, by, min_leaf, depth, mtry, tree_seed));
    }
    return forest;
}

// --- MLP ---------------------------------------------------------------

struct MlpView {
    std::span<const double> w1;  // hidden x inputs
    std::span<const double> b1;
    std::span<const double> w2;
    double b2;
};

MlpView mlp_view(const MlpArch& arch, std::span<const double> theta) {
    const std::size_t hp = arch.hidden * arch.inputs;
    return MlpView{theta.subspan(0, hp), theta.subspan(hp, arch.hidden),
                   theta.subspan(hp + arch.hidden, arch.hidden), theta[hp + 2 * arch.hidden]};
}

double mlp_forward(const MlpArch& arch, const MlpView& v, std::span<const double> x,
                   std::vector<double>* hidden_out) {
    double out = v.b2;
    for (std::size_t h = 0; h < arch.hidden; ++h) {
        double a = v.b1[h];
        for (std::size_t j = 0; j < arch.inputs; ++j) a += v.w1[h * arch.inputs + j] * x[j];
        const double t = std::tanh(a);
        if (hidden_out) (*hidden_out)[h] = t;
        out += v.w2[h] * t;
    }
    return out;
}

}  // namespace

std::size_t mlp_param_count(const MlpArch& arch) {
    return arch.hidden * arch.inputs + 2 * arch.hidden + 1;
}

void mlp_loss_grad(const MlpArch& arch, std::span<const double> theta, const Matrix& X,
                   const std::vector<double>& y, double& loss, std::vector<double>& grad) {
    const std::size_t n = X.rows();
    const MlpView v = mlp_view(arch, theta);
    grad.assign(theta.size(), 0.0);
    loss = 0.0;
    std::vector<double> hidden(arch.hidden);
    std::vector<double> x(arch.inputs);
    const std::size_t hp = arch.hidden * arch.inputs;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < arch.inputs; ++j) x[j] = X.at(i, j);
        const double pred = mlp_forward(arch, v, x, &hidden);
        const double err = pred - y[i];
        loss += err * err;
        const double g_out = 2.0 * err / static_cast<double>(n);
        grad[hp + 2 * arch.hidden] += g_out;  // b2
        for (std::size_t h = 0; h < arch.hidden; ++h) {
            grad[hp + arch.hidden + h] += g_out * hidden[h];  // w2
            const double g_pre = g_out * v.w2[h] * (1.0 - hidden[h] * hidden[h]);
            grad[hp + h] += g_pre;  // b1
            for (std::size_t j = 0; j < arch.inputs; ++j) {
                grad[h * arch.inputs + j] += g_pre * x[j];  // w1
            }
        }
    }
    loss /= static_cast<double>(n);
}

double mlp_loss(const MlpArch& arch, std::span<const double> theta, const Matrix& X,
                const std::vector<double>& y) {
    const MlpView v = mlp_view(arch, theta);
    std::vector<double> x(arch.inputs);
    double loss = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < arch.inputs; ++j) x[j] = X.at(i, j);
        const double err = mlp_forward(arch, v, x, nullptr) - y[i];
        loss += err * err;
    }
    return loss / static_cast<double>(X.rows());
}

namespace {

MlpParams fit_mlp(const RegressorSpec& spec, const Matrix& X, const std::vector<double>& y) {
    MlpParams mp;
    mp.inputs = X.cols();
    mp.hidden = static_cast<std::size_t>(param(spec, "hidden_units", 16));
    if (mp.hidden == 0) throw ConfigError("mlp needs hidden_units >= 1");
    const double lr = param(spec, "learning_rate", 0.05);
    const auto epochs = static_cast<std::size_t>(param(spec, "epochs", 500));
    const MlpArch arch{mp.inputs, mp.hidden};

    mp.theta.resize(mlp_param_count(arch));
    Rng rng(Rng::derive(spec.seed, 0x317));
    const double w1_bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, mp.inputs)));
    const double w2_bound = 1.0 / std::sqrt(static_cast<double>(mp.hidden));
    const std::size_t hp = mp.hidden * mp.inputs;
    for (std::size_t i = 0; i < hp; ++i) mp.theta[i] = rng.uniform(-w1_bound, w1_bound);
    for (std::size_t i = hp; i < hp + mp.hidden; ++i) mp.theta[i] = 0.0;
    for (std::size_t i = hp + mp.hidden; i < hp + 2 * mp.hidden; ++i) {
        mp.theta[i] = rng.uniform(-w2_bound, w2_bound);
    }
    mp.theta[hp + 2 * mp.hidden] = mean(y);

    std::vector<double> grad;
    double loss = 0.0;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        mlp_loss_grad(arch, mp.theta, X, y, loss, grad);
        if (!std::isfinite(loss)) throw NonFiniteLoss("mlp", epoch);
        for (std::size_t i = 0; i < mp.theta.size(); ++i) mp.theta[i] -= lr * grad[i];
    }
    if (!std::isfinite(mlp_loss(arch, mp.theta, X, y))) throw NonFiniteLoss("mlp", epochs);
    return mp;
}

SvrParams fit_svr(const RegressorSpec& spec, const Matrix& X, const std::vector<double>& y) {
    if (spec.kernel != "linear") {
        throw UnknownHyperparameter("kernel=" + spec.kernel + " (only linear is supported)");
    }
    const double eps = param(spec, "epsilon", 0.1);
    const double penalty = param(spec, "penalty", 1.0);
    const double lr = param(spec, "learning_rate", 0.1);
    const auto epochs = static_cast<std::size_t>(param(spec, "epochs", 500));
    const std::size_t n = X.rows();
    const std::size_t p = X.cols();

    SvrParams sp;
    sp.w.assign(p, 0.0);
    sp.b = 0.0;
    std::vector<double> gw(p, 0.0);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::fill(gw.begin(), gw.end(), 0.0);
        double gb = 0.0;
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double pred = sp.b;
            for (std::size_t j = 0; j < p; ++j) pred += sp.w[j] * X.at(i, j);
            const double r = pred - y[i];
            const double excess = std::abs(r) - eps;
            if (excess > 0.0) {
                loss += excess;
                const double s = r > 0.0 ? 1.0 : -1.0;
                gb += s;
                for (std::size_t j = 0; j < p; ++j) gw[j] += s * X.at(i, j);
            }
        }
        loss /= static_cast<double>(n);
        for (std::size_t j = 0; j < p; ++j) loss += 0.5 * penalty * sp.w[j] * sp.w[j];
        if (!std::isfinite(loss)) throw NonFiniteLoss("svr", epoch);
        const double step = lr / std::sqrt(1.0 + static_cast<double>(epoch));
        for (std::size_t j = 0; j < p; ++j) {
            sp.w[j] -= step * (penalty * sp.w[j] + gw[j] / static_cast<double>(n));
        }
        sp.b -= step * gb / static_cast<double>(n);
    }
    return sp;
}

}  // namespace

FittedModel fit(const RegressorSpec& spec, const Matrix& X, const std::vector<double>& y,
                const std::vector<std::string>& feature_names) {
    if (X.rows() != y.size()) throw ConfigError("fit: X rows and y length differ");
    if (X.cols() != feature_names.size()) throw ConfigError("fit: feature name count mismatch");
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < X.cols(); ++j) {
            if (!std::isfinite(X.at(i, j))) throw ConfigError("fit: non-finite feature value");
        }
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw ConfigError("fit: non-finite target value");
    }
    switch (spec.kind) {
        case RegressorKind::Linear: check_keys(spec, {}); break;
        case RegressorKind::RandomForest:
            check_keys(spec, {"trees", "depth", "min_leaf", "features_per_split", "bootstrap"});
            break;
        case RegressorKind::Mlp: check_keys(spec, {"hidden_units", "learning_rate", "epochs"}); break;
        case RegressorKind::Svr:
            check_keys(spec, {"epsilon", "penalty", "learning_rate", "epochs"});
            break;
    }
    if (spec.kind != RegressorKind::Linear && X.rows() < 2) {
        throw SingularDesign("fit needs at least 2 samples");
    }

    std::vector<double> means = column_means(X);
    if (X.cols() == 0) {
        // Degenerate featureless design: the mean model, whatever the kind.
        LinearParams lp;
        lp.intercept = mean(y);
        return FittedModel(spec.kind, feature_names, means, lp);
    }

    switch (spec.kind) {
        case RegressorKind::Linear:
            return FittedModel(spec.kind, feature_names, means, fit_linear(X, y));
        case RegressorKind::RandomForest:
            return FittedModel(spec.kind, feature_names, means, fit_forest(spec, X, y));
        case RegressorKind::Mlp:
            return FittedModel(spec.kind, feature_names, means, fit_mlp(spec, X, y));
        case RegressorKind::Svr:
            return FittedModel(spec.kind, feature_names, means, fit_svr(spec, X, y));
    }
    throw ConfigError("unhandled regressor kind");
}

double FittedModel::predict_row(std::span<const double> x) const {
    if (x.size() != features_.size()) {
        throw FeatureMismatch("predict_row: expected " + std::to_string(features_.size()) +
                              " features, got " + std::to_string(x.size()));
    }
    if (const auto* lp = std::get_if<LinearParams>(&params_)) {
        double v = lp->intercept;
        for (std::size_t j = 0; j < lp->coef.size(); ++j) v += lp->coef[j] * x[j];
        return v;
    }
    if (const auto* fp = std::get_if<ForestParams>(&params_)) {
        double sum = 0.0;
        for (const auto& tree : fp->trees) sum += tree.predict(x);
        return sum / static_cast<double>(fp->trees.size());
    }
    if (const auto* mp = std::get_if<MlpParams>(&params_)) {
        const MlpArch arch{mp->inputs, mp->hidden};
        const MlpView v = mlp_view(arch, mp->theta);
        return mlp_forward(arch, v, x, nullptr);
    }
    const auto& sp = std::get<SvrParams>(params_);
    double v = sp.b;
    for (std::size_t j = 0; j < sp.w.size(); ++j) v += sp.w[j] * x[j];
    return v;
}

std::vector<double> FittedModel::predict(const Matrix& X,
                                         const std::vector<std::string>& names) const {
    if (names != features_) {
        throw FeatureMismatch("predict: feature names/order do not match the training set");
    }
    if (X.cols() != features_.size()) {
        throw FeatureMismatch("predict: column count does not match the training set");
    }
    std::vector<double> out(X.rows());
    std::vector<double> row(X.cols());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < X.cols(); ++j) row[j] = X.at(i, j);
        out[i] = predict_row(row);
    }
    return out;
}

// --- JSON ------------------------------------------------------------------

std::string FittedModel::to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["kind"] = to_string(kind_);
    j["features"] = features_;
    j["feature_means"] = feature_means_;
    nlohmann::json p;
    if (const auto* lp = std::get_if<LinearParams>(&params_)) {
        p["type"] = "linear";
        p["coef"] = lp->coef;
        p["intercept"] = lp->intercept;
    } else if (const auto* fp = std::get_if<ForestParams>(&params_)) {
        p["type"] = "forest";
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& tree : fp->trees) {
            nlohmann::json nodes = nlohmann::json::array();
            for (const auto& nd : tree.nodes) {
                nodes.push_back({{"f", nd.feature},
                                 {"t", nd.threshold},
                                 {"v", nd.value},
                                 {"l", nd.left},
                                 {"r", nd.right}});
            }
            trees.push_back(std::move(nodes));
        }
        p["trees"] = std::move(trees);
    } else if (const auto* mp = std::get_if<MlpParams>(&params_)) {
        p["type"] = "mlp";
        p["inputs"] = mp->inputs;
        p["hidden"] = mp->hidden;
        p["theta"] = mp->theta;
    } else {
        const auto& sp = std::get<SvrParams>(params_);
        p["type"] = "svr";
        p["w"] = sp.w;
        p["b"] = sp.b;
    }
    j["params"] = std::move(p);
    return j.dump();
}

FittedModel FittedModel::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad model JSON: ") + e.what());
    }
    const RegressorKind kind = regressor_kind_from_string(j.at("kind").get<std::string>());
    auto features = j.at("features").get<std::vector<std::string>>();
    auto means = j.at("feature_means").get<std::vector<double>>();
    const auto& p = j.at("params");
    const std::string type = p.at("type").get<std::string>();
    std::variant<LinearParams, ForestParams, MlpParams, SvrParams> params;
    if (type == "linear") {
        LinearParams lp;
        lp.coef = p.at("coef").get<std::vector<double>>();
        lp.intercept = p.at("intercept").get<double>();
        params = std::move(lp);
    } else if (type == "forest") {
        ForestParams fp;
        for (const auto& jt : p.at("trees")) {
            TreeParams tree;
            for (const auto& jn : jt) {
                tree.nodes.push_back(TreeNode{jn.at("f").get<int>(), jn.at("t").get<double>(),
                                              jn.at("v").get<double>(), jn.at("l").get<int>(),
                                              jn.at("r").get<int>()});
            }
            fp.trees.push_back(std::move(tree));
        }
        params = std::move(fp);
    } else if (type == "mlp") {
        MlpParams mp;
        mp.inputs = p.at("inputs").get<std::size_t>();
        mp.hidden = p.at("hidden").get<std::size_t>();
        mp.theta = p.at("theta").get<std::vector<double>>();
        params = std::move(mp);
    } else if (type == "svr") {
        SvrParams sp;
        sp.w = p.at("w").get<std::vector<double>>();
        sp.b = p.at("b").get<double>();
        params = std::move(sp);
    } else {
        throw ConfigError("unknown model parameter type: " + type);
    }
    return FittedModel(kind, std::move(features), std::move(means), std::move(params));
}

}  // namespace causalfrac
