#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace causalfrac {

// Base class for every error the toolkit throws on a contract violation.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- dataset -------------------------------------------------------------

struct MissingFile final : Error {
    explicit MissingFile(const std::string& path) : Error("file not found: " + path) {}
};

struct HeaderMetaMismatch final : Error {
    using Error::Error;
};

struct NonNumericCell final : Error {
    NonNumericCell(std::size_t row, std::string column, const std::string& cell)
        : Error("non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                ", column " + column),
          row(row),
          column(std::move(column)) {}
    std::size_t row;  // 1-based data row (header excluded)
    std::string column;
};

struct EmptyTable final : Error {
    using Error::Error;
};

struct TooFewRows final : Error {
    using Error::Error;
};

// --- graph ---------------------------------------------------------------

struct DuplicateNodeId final : Error {
    using Error::Error;
};

struct UnknownNode final : Error {
    explicit UnknownNode(const std::string& name) : Error("unknown node: " + name) {}
};

struct NotADag final : Error {
    using Error::Error;
};

struct ParseError final : Error {
    ParseError(std::size_t line, const std::string& what)
        : Error("parse error at line " + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

// --- citest --------------------------------------------------------------

struct SingularCorrelationMatrix final : Error {
    using Error::Error;
};

struct TooFewSamples final : Error {
    using Error::Error;
};

struct DegreesOfFreedomExhausted final : Error {
    using Error::Error;
};

// --- iicd ----------------------------------------------------------------

struct NoSuchEdge final : Error {
    using Error::Error;
};

struct OrientationConflict final : Error {
    OrientationConflict(const std::string& a, const std::string& b, const std::string& c)
        : Error("orientation conflict on triple (" + a + ", " + b + ", " + c + ")") {}
};

// --- regress -------------------------------------------------------------

struct SingularDesign final : Error {
    using Error::Error;
};

struct NonFiniteLoss final : Error {
    NonFiniteLoss(const std::string& model, std::size_t iteration)
        : Error(model + " loss became non-finite at iteration " + std::to_string(iteration)),
          iteration(iteration) {}
    std::size_t iteration;
};

struct FeatureMismatch final : Error {
    using Error::Error;
};

struct UnknownHyperparameter final : Error {
    explicit UnknownHyperparameter(const std::string& key)
        : Error("unknown hyperparameter: " + key) {}
};

// --- causal2stage ----------------------------------------------------------

struct AmbiguousTreatment final : Error {
    explicit AmbiguousTreatment(std::vector<std::string> cands)
        : Error(make_message(cands)), candidates(std::move(cands)) {}
    std::vector<std::string> candidates;

private:
    static std::string make_message(const std::vector<std::string>& cands) {
        if (cands.empty()) return "no engineering/geological bridge found; treatment is undetermined";
        std::string msg = "treatment is ambiguous; candidates:";
        for (const auto& c : cands) msg += " " + c;
        return msg;
    }
};

struct NoOutputNode final : Error {
    using Error::Error;
};

// --- shapx ---------------------------------------------------------------

struct TooManyFeatures final : Error {
    using Error::Error;
};

struct ConstantFeature final : Error {
    using Error::Error;
};

// --- physics -------------------------------------------------------------

struct DomainError final : Error {
    using Error::Error;
};

struct AllZeroVolumes final : Error {
    using Error::Error;
};

struct CyclicSpec final : Error {
    using Error::Error;
};

struct MechanismArityMismatch final : Error {
    using Error::Error;
};

// --- evalcli -------------------------------------------------------------

struct ConstantTruth final : Error {
    using Error::Error;
};

struct NodeSetMismatch final : Error {
    using Error::Error;
};

struct ConfigError final : Error {
    using Error::Error;
};

}  // namespace causalfrac
