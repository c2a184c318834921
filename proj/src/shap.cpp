#include "causalfrac/shap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "causalfrac/errors.hpp"
#include "causalfrac/rng.hpp"

#include <json.hpp>

namespace causalfrac {

double ValueFunction::eval_mask(std::uint64_t mask) const {
    const std::size_t p = instance.size();
    const std::size_t b = background.rows();
    std::vector<double> x(p);
    double sum = 0.0;
    for (std::size_t r = 0; r < b; ++r) {
        for (std::size_t j = 0; j < p; ++j) {
            x[j] = (mask >> j) & 1u ? instance[j] : background.at(r, j);
        }
        sum += model(x);
    }
    return sum / static_cast<double>(b);
}

ValueFunction value_function(const FittedModel& model, std::span<const double> instance) {
    ValueFunction vf;
    vf.model = [&model](std::span<const double> x) { return model.predict_row(x); };
    vf.instance.assign(instance.begin(), instance.end());
    vf.background = Matrix(1, model.feature_means().size());
    for (std::size_t j = 0; j < model.feature_means().size(); ++j) {
        vf.background.at(0, j) = model.feature_means()[j];
    }
    return vf;
}

namespace {

double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        r *= static_cast<double>(n - i) / static_cast<double>(i + 1);
    }
    return r;
}

}  // namespace

ShapExplanation shap_exact(const ValueFunction& vf) {
    const std::size_t p = vf.feature_count();
    if (p > 20) {
        throw TooManyFeatures("shap_exact enumerates 2^p subsets; p is capped at 20");
    }
    ShapExplanation ex;
    ex.method = ShapMethod::Exact;
    ex.phi.assign(p, 0.0);

    const std::uint64_t full = p == 0 ? 0 : (std::uint64_t{1} << p);
    std::vector<double> value(full ? full : 1, 0.0);
    for (std::uint64_t mask = 0; mask < std::max<std::uint64_t>(full, 1); ++mask) {
        value[mask] = vf.eval_mask(mask);
    }
    ex.phi0 = value[0];
    if (p == 0) return ex;

    // weight by |S|: |S|! (p - |S| - 1)! / p! = 1 / (p * C(p-1, |S|))
    std::vector<double> weight(p);
    for (std::size_t s = 0; s < p; ++s) {
        weight[s] = 1.0 / (static_cast<double>(p) * binomial(p - 1, s));
    }

    for (std::size_t i = 0; i < p; ++i) {
        const std::uint64_t bit = std::uint64_t{1} << i;
        double phi = 0.0;
        for (std::uint64_t mask = 0; mask < full; ++mask) {
            if (mask & bit) continue;
            const auto s = static_cast<std::size_t>(std::popcount(mask));
            phi += weight[s] * (value[mask | bit] - value[mask]);
        }
        ex.phi[i] = phi;
    }
    return ex;
}

ShapExplanation shap_sampled(const ValueFunction& vf, std::size_t n_perm, std::uint64_t seed) {
    if (n_perm == 0) throw ConfigError("shap_sampled needs n_perm >= 1");
    const std::size_t p = vf.feature_count();
    if (p > 63) throw TooManyFeatures("shap_sampled masks coalitions in a 64-bit word");
    ShapExplanation ex;
    ex.method = ShapMethod::Sampled;
    ex.n_permutations = n_perm;
    ex.seed = seed;
    ex.phi.assign(p, 0.0);
    ex.phi0 = vf.eval_mask(0);
    if (p == 0) return ex;

    Rng rng(Rng::derive(seed, 0x5a9));
    std::vector<std::size_t> perm(p);
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    for (std::size_t k = 0; k < n_perm; ++k) {
        if (k % 2 == 0) {
            rng.shuffle(perm);
        } else {
            std::reverse(perm.begin(), perm.end());  // antithetic partner
        }
        std::uint64_t mask = 0;
        double prev = ex.phi0;
        for (std::size_t j : perm) {
            mask |= std::uint64_t{1} << j;
            const double cur = vf.eval_mask(mask);
            ex.phi[j] += cur - prev;
            prev = cur;
        }
    }
    for (double& v : ex.phi) v /= static_cast<double>(n_perm);

    // enforce efficiency exactly; the gap is Monte-Carlo noise
    const double fx = vf.eval_mask((std::uint64_t{1} << p) - 1);
    double residual = fx - ex.phi0 - std::accumulate(ex.phi.begin(), ex.phi.end(), 0.0);
    ex.efficiency_residual = residual;
    double abs_sum = 0.0;
    for (double v : ex.phi) abs_sum += std::abs(v);
    for (std::size_t j = 0; j < p; ++j) {
        ex.phi[j] += abs_sum > 0.0 ? residual * std::abs(ex.phi[j]) / abs_sum
                                   : residual / static_cast<double>(p);
    }
    return ex;
}

std::string to_string(TrendKind t) {
    switch (t) {
        case TrendKind::O: return "O";
        case TrendKind::N: return "N";
        case TrendKind::M: return "M";
        case TrendKind::C: return "C";
    }
    return "?";
}

TrendLabel classify_trend(const std::vector<double>& feature_values,
                          const std::vector<double>& phis, const TrendThresholds& thresholds) {
    const std::size_t n = feature_values.size();
    if (n != phis.size()) throw ConfigError("classify_trend: length mismatch");
    if (n < 10) throw ConfigError("classify_trend needs n >= 10");
    const auto [mn, mx] = std::minmax_element(feature_values.begin(), feature_values.end());
    if (*mn == *mx) throw ConstantFeature("classify_trend: feature is constant");

    TrendLabel label;
    label.rank_correlation = spearman(feature_values, phis);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return feature_values[a] < feature_values[b];
    });
    const std::size_t third = n / 3;
    auto tercile_mean = [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t k = lo; k < hi; ++k) s += phis[order[k]];
        return s / static_cast<double>(hi - lo);
    };
    label.tercile_means[0] = tercile_mean(0, third);
    label.tercile_means[1] = tercile_mean(third, n - third);
    label.tercile_means[2] = tercile_mean(n - third, n);

    if (label.rank_correlation >= thresholds.rank_corr) {
        label.kind = TrendKind::O;
    } else if (label.rank_correlation <= -thresholds.rank_corr) {
        label.kind = TrendKind::N;
    } else {
        const double margin = thresholds.mid_margin * sample_sd(phis);
        const bool peaked = label.tercile_means[1] >= label.tercile_means[0] + margin &&
                            label.tercile_means[1] >= label.tercile_means[2] + margin;
        label.kind = peaked ? TrendKind::M : TrendKind::C;
    }
    return label;
}

namespace {

DatasetExplanation explain_rows(const ModelFn& model, const std::vector<std::string>& features,
                                const std::vector<double>& background_mean, const Dataset& ds,
                                const ExplainOptions& opts) {
    DatasetExplanation out;
    out.feature_names = features;
    out.method = opts.method;

    Matrix feature_rows(ds.n(), features.size());
    for (std::size_t j = 0; j < features.size(); ++j) {
        const std::size_t col = ds.column_index(features[j]);
        for (std::size_t i = 0; i < ds.n(); ++i) feature_rows.at(i, j) = ds.at(i, col);
    }

    const std::size_t rows =
        opts.max_rows == 0 ? ds.n() : std::min<std::size_t>(opts.max_rows, ds.n());

    ValueFunction vf;
    vf.model = model;
    if (opts.full_background) {
        vf.background = feature_rows;
    } else {
        vf.background = Matrix(1, features.size());
        for (std::size_t j = 0; j < features.size(); ++j) {
            vf.background.at(0, j) = background_mean[j];
        }
    }

    for (std::size_t i = 0; i < rows; ++i) {
        vf.instance.resize(features.size());
        for (std::size_t j = 0; j < features.size(); ++j) vf.instance[j] = feature_rows.at(i, j);
        out.instances.push_back(opts.method == ShapMethod::Exact
                                    ? shap_exact(vf)
                                    : shap_sampled(vf, opts.n_permutations,
                                                   Rng::derive(opts.seed, i)));
        out.instances.back().feature_names = features;
    }

    // mean |phi| importance plus per-feature trend labels
    for (std::size_t j = 0; j < features.size(); ++j) {
        FeatureReport fr;
        fr.name = features[j];
        std::vector<double> values, phis;
        values.reserve(rows);
        phis.reserve(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            values.push_back(feature_rows.at(i, j));
            phis.push_back(out.instances[i].phi[j]);
            fr.importance += std::abs(out.instances[i].phi[j]);
        }
        fr.importance /= static_cast<double>(rows);
        try {
            fr.trend = classify_trend(values, phis, opts.thresholds);
        } catch (const Error&) {
            fr.trend = TrendLabel{};  // constant feature or too few rows: C
        }
        out.ranking.push_back(std::move(fr));
    }
    std::stable_sort(out.ranking.begin(), out.ranking.end(),
                     [](const FeatureReport& a, const FeatureReport& b) {
                         if (a.importance != b.importance) return a.importance > b.importance;
                         return a.name < b.name;
                     });
    return out;
}

}  // namespace

DatasetExplanation explain_dataset(const FittedModel& model, const Dataset& ds,
                                   const ExplainOptions& opts) {
    ModelFn fn = [&model](std::span<const double> x) { return model.predict_row(x); };
    return explain_rows(fn, model.feature_names(), model.feature_means(), ds, opts);
}

DatasetExplanation explain_dataset(const CausalModel& model, const Dataset& ds,
                                   const ExplainOptions& opts) {
    const FittedModel& psi2 = model.psi2;
    ModelFn fn = [&psi2](std::span<const double> x) { return psi2.predict_row(x); };
    return explain_rows(fn, psi2.feature_names(), psi2.feature_means(), ds, opts);
}

std::string explanation_to_json(const DatasetExplanation& ex) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["method"] = ex.method == ShapMethod::Exact ? "exact" : "sampled";
    nlohmann::json features = nlohmann::json::array();
    for (const auto& fr : ex.ranking) {
        features.push_back({{"name", fr.name},
                            {"importance", fr.importance},
                            {"trend", to_string(fr.trend.kind)},
                            {"rank_correlation", fr.trend.rank_correlation},
                            {"tercile_means",
                             {fr.trend.tercile_means[0], fr.trend.tercile_means[1],
                              fr.trend.tercile_means[2]}}});
    }
    j["features"] = std::move(features);
    nlohmann::json instances = nlohmann::json::array();
    for (const auto& inst : ex.instances) {
        instances.push_back({{"phi0", inst.phi0}, {"phi", inst.phi}});
    }
    j["instances"] = std::move(instances);
    j["feature_order"] = ex.feature_names;
    return j.dump(2);
}

std::string beeswarm_csv(const DatasetExplanation& ex, const Dataset& ds) {
    std::ostringstream out;
    out << "# format_version 1\n";
    out << "feature,value,phi\n";
    char buf[64];
    for (std::size_t i = 0; i < ex.instances.size(); ++i) {
        for (std::size_t j = 0; j < ex.feature_names.size(); ++j) {
            const std::size_t col = ds.column_index(ex.feature_names[j]);
            out << ex.feature_names[j] << ',';
            std::snprintf(buf, sizeof buf, "%.17g", ds.at(i, col));
            out << buf << ',';
            std::snprintf(buf, sizeof buf, "%.17g", ex.instances[i].phi[j]);
            out << buf << '\n';
        }
    }
    return out.str();
}

}  // namespace causalfrac
