#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace causalfrac {

// Small dense row-major matrix. Everything in this toolkit is desk-scale
// (d <= a few dozen), so a naive O(n^3) solver is all we need.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& at(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> a_;
};

/// Solve A x = b by Gaussian elimination with partial pivoting.
/// Returns nullopt when A is numerically singular.
std::optional<std::vector<double>> gauss_solve(Matrix a, std::vector<double> b);

/// Matrix inverse via Gauss-Jordan; nullopt when singular.
std::optional<Matrix> invert(Matrix a);

double mean(const std::vector<double>& v);

/// Sample standard deviation (n-1 denominator); 0 for n < 2.
double sample_sd(const std::vector<double>& v);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Ranks with ties averaged, as used by the Spearman variant.
std::vector<double> average_ranks(const std::vector<double>& v);

double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace causalfrac
