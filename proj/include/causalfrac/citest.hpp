#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "causalfrac/dataset.hpp"
#include "causalfrac/linalg.hpp"

namespace causalfrac {

struct CiDecision {
    double rho = 0.0;        // (partial) correlation in [-1, 1]
    double statistic = 0.0;  // Fisher-z statistic
    double p_value = 1.0;
    bool independent = true;  // p_value > alpha
    double alpha = 0.05;
};

/// Standard normal CDF through the complementary error function.
double normal_cdf(double x);

/// Partial correlation of columns x and y given z, by inversion of the
/// correlation submatrix over {x, y} union z (precision-matrix formula).
/// Result clamped to +-(1 - 1e-12). Throws TooFewSamples when
/// n <= |z| + 3 and SingularCorrelationMatrix when inversion fails even
/// after a 1e-10 ridge.
double partial_correlation(const Dataset& ds, std::size_t x, std::size_t y,
                           const std::vector<std::size_t>& z);

/// Same, but against a precomputed d x d correlation matrix.
double partial_correlation_from(const Matrix& corr, std::size_t x, std::size_t y,
                                const std::vector<std::size_t>& z);

/// Fisher z-transform test of zero (partial) correlation with n samples and
/// k conditioning variables. Throws DegreesOfFreedomExhausted when
/// n - k - 3 <= 0.
CiDecision fisher_z_test(double rho, std::size_t n, std::size_t k, double alpha);

/// Pearson correlation matrix over all columns of the dataset.
Matrix correlation_matrix(const Dataset& ds);

/// Pluggable conditional-independence decision used by the discovery loop:
/// test(x, y, z) for column indices. The Fisher-z tester below is the
/// production implementation; tests substitute a d-separation oracle.
using CiFunction =
    std::function<CiDecision(std::size_t x, std::size_t y, const std::vector<std::size_t>& z)>;

struct FisherZOptions {
    double alpha = 0.05;
    bool spearman = false;  // rank-transform columns first
};

/// Precomputes the correlation matrix once; cheap per-test afterwards.
class FisherZTester {
public:
    FisherZTester(const Dataset& ds, FisherZOptions opts = {});

    CiDecision operator()(std::size_t x, std::size_t y, const std::vector<std::size_t>& z) const;

    std::size_t sample_count() const { return n_; }
    /// Largest conditioning size with positive degrees of freedom.
    bool testable(std::size_t k) const { return n_ > k + 3; }

private:
    Matrix corr_;
    std::size_t n_ = 0;
    FisherZOptions opts_;
};

}  // namespace causalfrac
