#include "causalfrac/citest.hpp"

#include <algorithm>
#include <cmath>

#include "causalfrac/errors.hpp"

namespace causalfrac {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Matrix correlation_matrix(const Dataset& ds) {
    const std::size_t d = ds.d();
    std::vector<std::vector<double>> cols(d);
    for (std::size_t j = 0; j < d; ++j) cols[j] = ds.column(j);
    Matrix corr(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        corr.at(i, i) = 1.0;
        for (std::size_t j = i + 1; j < d; ++j) {
            const double r = pearson(cols[i], cols[j]);
            corr.at(i, j) = r;
            corr.at(j, i) = r;
        }
    }
    return corr;
}

namespace {
constexpr double kRhoCap = 1.0 - 1e-12;
constexpr double kRidge = 1e-10;

std::optional<Matrix> invert_submatrix(const Matrix& corr, const std::vector<std::size_t>& idx,
                                       double ridge) {
    const std::size_t m = idx.size();
    Matrix sub(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) sub.at(i, j) = corr.at(idx[i], idx[j]);
        sub.at(i, i) += ridge;
    }
    return invert(sub);
}

}  // namespace

double partial_correlation_from(const Matrix& corr, std::size_t x, std::size_t y,
                                const std::vector<std::size_t>& z) {
    if (x == y) throw ConfigError("partial_correlation: x and y must differ");
    for (std::size_t zi : z) {
        if (zi == x || zi == y) throw ConfigError("partial_correlation: x,y must not appear in z");
    }
    std::vector<std::size_t> idx{x, y};
    idx.insert(idx.end(), z.begin(), z.end());

    auto prec = invert_submatrix(corr, idx, 0.0);
    if (!prec) prec = invert_submatrix(corr, idx, kRidge);
    if (!prec) throw SingularCorrelationMatrix("correlation submatrix is singular");

    const double den = prec->at(0, 0) * prec->at(1, 1);
    if (den <= 0.0) throw SingularCorrelationMatrix("non-positive precision diagonal");
    double rho = -prec->at(0, 1) / std::sqrt(den);
    return std::clamp(rho, -kRhoCap, kRhoCap);
}

double partial_correlation(const Dataset& ds, std::size_t x, std::size_t y,
                           const std::vector<std::size_t>& z) {
    if (ds.n() <= z.size() + 3) {
        throw TooFewSamples("need n > |z| + 3 samples for a partial correlation");
    }
    auto check = [&](std::size_t j) {
        if (j >= ds.d()) throw UnknownNode("column #" + std::to_string(j));
    };
    check(x);
    check(y);
    for (std::size_t j : z) check(j);
    return partial_correlation_from(correlation_matrix(ds), x, y, z);
}

CiDecision fisher_z_test(double rho, std::size_t n, std::size_t k, double alpha) {
    if (n <= k + 3) {
        throw DegreesOfFreedomExhausted("fisher_z_test: n - k - 3 must be positive");
    }
    if (!(std::abs(rho) < 1.0)) {
        throw ConfigError("fisher_z_test: |rho| must be < 1");
    }
    CiDecision d;
    d.rho = rho;
    d.alpha = alpha;
    const double dof = static_cast<double>(n - k - 3);
    d.statistic = std::sqrt(dof) * std::abs(0.5 * std::log((1.0 + rho) / (1.0 - rho)));
    d.p_value = 2.0 * (1.0 - normal_cdf(d.statistic));
    d.independent = d.p_value > alpha;
    return d;
}

FisherZTester::FisherZTester(const Dataset& ds, FisherZOptions opts)
    : n_(ds.n()), opts_(opts) {
    if (!opts.spearman) {
        corr_ = correlation_matrix(ds);
        return;
    }
    // Rank-transform every column, then proceed as usual.
    std::vector<double> values(ds.n() * ds.d());
    for (std::size_t j = 0; j < ds.d(); ++j) {
        const std::vector<double> ranks = average_ranks(ds.column(j));
        for (std::size_t i = 0; i < ds.n(); ++i) values[i * ds.d() + j] = ranks[i];
    }
    corr_ = correlation_matrix(Dataset(ds.columns(), std::move(values)));
}

CiDecision FisherZTester::operator()(std::size_t x, std::size_t y,
                                     const std::vector<std::size_t>& z) const {
    if (!testable(z.size())) {
        throw DegreesOfFreedomExhausted("conditioning set too large for sample count");
    }
    const double rho = partial_correlation_from(corr_, x, y, z);
    return fisher_z_test(rho, n_, z.size(), opts_.alpha);
}

}  // namespace causalfrac
