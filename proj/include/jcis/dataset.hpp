#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jcis/errors.hpp"

namespace jcis {

enum class ResponseKind { continuous, binary, categorical };

/// Column-major numeric matrix (n observations x p covariates) plus one
/// response vector. Covariate j occupies values[j*n .. (j+1)*n).
///
/// Group labels are optional; when present every column carries exactly one
/// dense group id, with `group_names` mapping ids back to their labels.
struct Dataset {
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<double> values;
    std::vector<std::string> column_names;
    std::vector<double> response;
    ResponseKind response_kind = ResponseKind::continuous;
    std::optional<std::vector<std::int32_t>> groups;
    std::vector<std::string> group_names;

    [[nodiscard]] std::span<const double> column(std::size_t j) const {
        return {values.data() + j * n, n};
    }

    [[nodiscard]] std::span<double> column_mut(std::size_t j) {
        return {values.data() + j * n, n};
    }

    /// Checks the structural invariants; throws data_error on violation.
    /// Finiteness of every entry is part of the contract: anything ingested
    /// or generated must be free of NaN/infinity before it reaches the
    /// statistics layer.
    void validate() const {
        if (n < 3) throw data_error("dataset: need at least 3 observations, have " + std::to_string(n));
        if (p < 2) throw data_error("dataset: need at least 2 covariates, have " + std::to_string(p));
        if (values.size() != n * p)
            throw data_error("dataset: values size " + std::to_string(values.size()) +
                             " does not match n*p = " + std::to_string(n * p));
        if (column_names.size() != p)
            throw data_error("dataset: have " + std::to_string(column_names.size()) +
                             " column names for " + std::to_string(p) + " columns");
        if (response.size() != n)
            throw data_error("dataset: response length " + std::to_string(response.size()) +
                             " does not match n = " + std::to_string(n));
        for (std::size_t j = 0; j < p; ++j) {
            for (double v : column(j)) {
                if (!std::isfinite(v))
                    throw data_error("dataset: non-finite value in column '" + column_names[j] + "'");
            }
        }
        for (double v : response) {
            if (!std::isfinite(v)) throw data_error("dataset: non-finite value in response");
        }
        if (groups) {
            if (groups->size() != p)
                throw data_error("dataset: group assignment covers " + std::to_string(groups->size()) +
                                 " of " + std::to_string(p) + " columns");
            for (std::int32_t g : *groups) {
                if (g < 0 || static_cast<std::size_t>(g) >= group_names.size())
                    throw data_error("dataset: group id out of range");
            }
        }
    }
};

} // namespace jcis
