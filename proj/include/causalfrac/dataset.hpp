#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace causalfrac {

enum class VariableRole { Geological, Engineering, Treatment, Output };

std::string to_string(VariableRole role);
VariableRole role_from_string(const std::string& s);

struct VariableMeta {
    std::string name;
    VariableRole role = VariableRole::Geological;
    std::string unit;

    bool operator==(const VariableMeta&) const = default;
};

/// Column-named numeric matrix with per-variable role tags. Immutable after
/// construction; all operations below return new values.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<VariableMeta> columns, std::vector<double> row_major_values);

    std::size_t n() const { return n_; }
    std::size_t d() const { return columns_.size(); }

    const std::vector<VariableMeta>& columns() const { return columns_; }
    const VariableMeta& column_meta(std::size_t j) const { return columns_[j]; }

    /// Index of a named column; throws UnknownNode when absent.
    std::size_t column_index(const std::string& name) const;
    bool has_column(const std::string& name) const;

    double at(std::size_t i, std::size_t j) const { return values_[i * d() + j]; }
    std::vector<double> column(std::size_t j) const;
    std::vector<double> column(const std::string& name) const;
    const std::vector<double>& raw() const { return values_; }

    /// Names of every variable with the given role, in column order.
    std::vector<std::string> names_with_role(VariableRole role) const;

    /// New dataset restricted to the named columns, in the given order.
    Dataset select(const std::vector<std::string>& names) const;

    /// New dataset restricted to the given rows, in the given order.
    Dataset take_rows(const std::vector<std::size_t>& rows) const;

    bool operator==(const Dataset&) const = default;

private:
    std::vector<VariableMeta> columns_;
    std::vector<double> values_;  // row-major, n_ x d
    std::size_t n_ = 0;
};

struct LoadOptions {
    enum class MissingPolicy { Reject, ImputeMean };
    MissingPolicy missing = MissingPolicy::Reject;
};

using RoleMap = std::map<std::string, VariableMeta>;

/// Parse the sidecar JSON role file: { "Name": {"role": "...", "unit": "..."}, ... }.
RoleMap load_roles_json(const std::string& path);

/// Load a UTF-8 comma-separated table with a header row. Every header name
/// must appear in `meta` and vice versa. Cells must parse as finite reals;
/// empty / NA / NaN / non-finite cells follow the missing-value policy.
Dataset load_csv(const std::string& path, const RoleMap& meta, const LoadOptions& opts = {});

/// Serialize with full round-trip precision.
void write_csv(const Dataset& ds, const std::string& path);

struct StandardizeResult {
    Dataset data;
    std::vector<std::string> constant_columns;  // returned as all-zeros
};

/// Z-score every column (mean 0, sample sd 1). Constant columns become zeros
/// and are reported rather than failing.
StandardizeResult standardize(const Dataset& ds);

struct SplitResult {
    Dataset train;
    Dataset test;
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
};

/// Deterministic disjoint row partition. Test size = round(n * fraction),
/// clamped to [1, n-1]. Throws TooFewRows for n < 2.
SplitResult split(const Dataset& ds, double test_fraction, std::uint64_t seed);

}  // namespace causalfrac
