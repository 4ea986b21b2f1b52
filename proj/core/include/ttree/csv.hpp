#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ttree/data.hpp"

namespace ttree {

/// Numeric CSV: first row headers, UTF-8, '.' decimal point, no quoting and
/// no missing values (both are hard errors with row/column diagnostics).
struct CsvTable {
    std::vector<std::string> headers;
    std::vector<std::vector<double>> rows;

    std::optional<std::size_t> column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in, const std::string& source_name = "<stream>");
CsvTable read_csv_file(const std::string& path);

void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);

/// Which columns play which role. Empty `features` means "every column not
/// claimed by another role, in header order".
struct ColumnRoles {
    std::vector<std::string> features;
    std::string treatment = "treatment";
    std::string outcome = "outcome";
    std::optional<std::string> true_effect;

    /// Resolve against a header row: checks existence and disjointness,
    /// fills in defaulted feature columns. Throws DataError.
    ColumnRoles resolve(const std::vector<std::string>& headers) const;
};

/// If `roles.true_effect` is unset but a column named "true_effect" exists,
/// it is picked up automatically.
Dataset dataset_from_csv(const CsvTable& table, const ColumnRoles& roles);

/// Feature columns first (by name), then treatment, outcome, and
/// true_effect when every sample carries one.
CsvTable dataset_to_csv(const Dataset& data);

} // namespace ttree
