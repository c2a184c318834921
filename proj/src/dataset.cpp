#include "causalfrac/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "causalfrac/errors.hpp"
#include "causalfrac/linalg.hpp"
#include "causalfrac/rng.hpp"

#include <json.hpp>

namespace causalfrac {

std::string to_string(VariableRole role) {
    switch (role) {
        case VariableRole::Geological: return "geological";
        case VariableRole::Engineering: return "engineering";
        case VariableRole::Treatment: return "treatment";
        case VariableRole::Output: return "output";
    }
    return "unknown";
}

VariableRole role_from_string(const std::string& s) {
    std::string t;
    t.reserve(s.size());
    for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (t == "geological") return VariableRole::Geological;
    if (t == "engineering") return VariableRole::Engineering;
    if (t == "treatment") return VariableRole::Treatment;
    if (t == "output") return VariableRole::Output;
    throw ConfigError("unknown variable role: " + s);
}

Dataset::Dataset(std::vector<VariableMeta> columns, std::vector<double> row_major_values)
    : columns_(std::move(columns)), values_(std::move(row_major_values)) {
    if (columns_.empty()) throw EmptyTable("dataset has no columns");
    if (values_.empty() || values_.size() % columns_.size() != 0) {
        throw EmptyTable("dataset values do not form rows of width d");
    }
    n_ = values_.size() / columns_.size();
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        for (std::size_t j = i + 1; j < columns_.size(); ++j) {
            if (columns_[i].name == columns_[j].name) {
                throw DuplicateNodeId("duplicate column name: " + columns_[i].name);
            }
        }
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw NonNumericCell(0, "<constructed>", "non-finite");
    }
}

std::size_t Dataset::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (columns_[j].name == name) return j;
    }
    throw UnknownNode(name);
}

bool Dataset::has_column(const std::string& name) const {
    return std::any_of(columns_.begin(), columns_.end(),
                       [&](const VariableMeta& m) { return m.name == name; });
}

std::vector<double> Dataset::column(std::size_t j) const {
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = at(i, j);
    return out;
}

std::vector<double> Dataset::column(const std::string& name) const {
    return column(column_index(name));
}

std::vector<std::string> Dataset::names_with_role(VariableRole role) const {
    std::vector<std::string> out;
    for (const auto& c : columns_) {
        if (c.role == role) out.push_back(c.name);
    }
    return out;
}

Dataset Dataset::select(const std::vector<std::string>& names) const {
    std::vector<VariableMeta> cols;
    std::vector<std::size_t> idx;
    for (const auto& name : names) {
        const std::size_t j = column_index(name);
        cols.push_back(columns_[j]);
        idx.push_back(j);
    }
    std::vector<double> vals;
    vals.reserve(n_ * idx.size());
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j : idx) vals.push_back(at(i, j));
    }
    return Dataset(std::move(cols), std::move(vals));
}

Dataset Dataset::take_rows(const std::vector<std::size_t>& rows) const {
    std::vector<double> vals;
    vals.reserve(rows.size() * d());
    for (std::size_t i : rows) {
        for (std::size_t j = 0; j < d(); ++j) vals.push_back(at(i, j));
    }
    return Dataset(columns_, std::move(vals));
}

RoleMap load_roles_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad role file " + path + ": " + e.what());
    }
    RoleMap meta;
    for (auto it = j.begin(); it != j.end(); ++it) {
        VariableMeta m;
        m.name = it.key();
        const auto& entry = it.value();
        if (!entry.contains("role")) throw ConfigError("role missing for variable " + m.name);
        m.role = role_from_string(entry["role"].get<std::string>());
        if (entry.contains("unit")) m.unit = entry["unit"].get<std::string>();
        meta.emplace(m.name, m);
    }
    return meta;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trimmed(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool is_missing_token(const std::string& cell) {
    if (cell.empty()) return true;
    std::string t;
    for (char c : cell) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return t == "na" || t == "nan" || t == "null";
}

}  // namespace

Dataset load_csv(const std::string& path, const RoleMap& meta, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw MissingFile(path);

    std::string line;
    if (!std::getline(in, line)) throw EmptyTable("empty file: " + path);
    std::vector<std::string> headers = split_line(line);
    for (auto& h : headers) h = trimmed(h);
    if (headers.empty() || (headers.size() == 1 && headers[0].empty())) {
        throw EmptyTable("no header columns in " + path);
    }

    std::vector<VariableMeta> cols;
    for (const auto& h : headers) {
        auto it = meta.find(h);
        if (it == meta.end()) {
            throw HeaderMetaMismatch("column '" + h + "' has no role metadata");
        }
        VariableMeta m = it->second;
        m.name = h;
        cols.push_back(m);
    }
    for (const auto& [name, m] : meta) {
        (void)m;
        if (std::find(headers.begin(), headers.end(), name) == headers.end()) {
            throw HeaderMetaMismatch("metadata variable '" + name + "' not present in file header");
        }
    }

    const std::size_t d = cols.size();
    std::vector<double> values;
    // (row, col) positions that need imputation
    std::vector<std::pair<std::size_t, std::size_t>> missing;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trimmed(line).empty()) continue;
        ++row;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != d) {
            throw NonNumericCell(row, "<row-width>",
                                 "expected " + std::to_string(d) + " cells, got " +
                                     std::to_string(cells.size()));
        }
        for (std::size_t j = 0; j < d; ++j) {
            const std::string cell = trimmed(cells[j]);
            if (is_missing_token(cell)) {
                if (opts.missing == LoadOptions::MissingPolicy::Reject) {
                    throw NonNumericCell(row, cols[j].name, cell.empty() ? "<empty>" : cell);
                }
                missing.emplace_back(row - 1, j);
                values.push_back(0.0);
                continue;
            }
            double v = 0.0;
            const char* first = cell.data();
            const char* last = cell.data() + cell.size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last) throw NonNumericCell(row, cols[j].name, cell);
            if (!std::isfinite(v)) {
                if (opts.missing == LoadOptions::MissingPolicy::Reject) {
                    throw NonNumericCell(row, cols[j].name, cell);
                }
                missing.emplace_back(row - 1, j);
                values.push_back(0.0);
                continue;
            }
            values.push_back(v);
        }
    }
    if (row == 0) throw EmptyTable("no data rows in " + path);

    if (!missing.empty()) {
        // column means over observed cells
        std::vector<double> sum(d, 0.0);
        std::vector<std::size_t> cnt(d, 0);
        std::vector<std::vector<bool>> is_missing(row, std::vector<bool>(d, false));
        for (const auto& [i, j] : missing) is_missing[i][j] = true;
        for (std::size_t i = 0; i < row; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                if (!is_missing[i][j]) {
                    sum[j] += values[i * d + j];
                    ++cnt[j];
                }
            }
        }
        for (const auto& [i, j] : missing) {
            if (cnt[j] == 0) throw NonNumericCell(i + 1, cols[j].name, "<entire column missing>");
            values[i * d + j] = sum[j] / static_cast<double>(cnt[j]);
        }
    }

    return Dataset(std::move(cols), std::move(values));
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MissingFile(path);
    for (std::size_t j = 0; j < ds.d(); ++j) {
        if (j) out << ',';
        out << ds.column_meta(j).name;
    }
    out << '\n';
    char buf[64];
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t j = 0; j < ds.d(); ++j) {
            if (j) out << ',';
            std::snprintf(buf, sizeof buf, "%.17g", ds.at(i, j));
            out << buf;
        }
        out << '\n';
    }
}

StandardizeResult standardize(const Dataset& ds) {
    StandardizeResult res;
    std::vector<double> values(ds.n() * ds.d());
    for (std::size_t j = 0; j < ds.d(); ++j) {
        const std::vector<double> col = ds.column(j);
        const double m = mean(col);
        const double sd = sample_sd(col);
        if (sd <= 0.0) {
            res.constant_columns.push_back(ds.column_meta(j).name);
            for (std::size_t i = 0; i < ds.n(); ++i) values[i * ds.d() + j] = 0.0;
            continue;
        }
        for (std::size_t i = 0; i < ds.n(); ++i) values[i * ds.d() + j] = (col[i] - m) / sd;
    }
    res.data = Dataset(ds.columns(), std::move(values));
    return res;
}

SplitResult split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    if (ds.n() < 2) throw TooFewRows("cannot split fewer than 2 rows");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("test_fraction must lie in (0,1)");
    }
    const std::size_t n = ds.n();
    auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    k = std::clamp<std::size_t>(k, 1, n - 1);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);

    SplitResult res;
    res.test_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    res.train_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
    std::sort(res.test_rows.begin(), res.test_rows.end());
    std::sort(res.train_rows.begin(), res.train_rows.end());
    res.train = ds.take_rows(res.train_rows);
    res.test = ds.take_rows(res.test_rows);
    return res;
}

}  // namespace causalfrac
