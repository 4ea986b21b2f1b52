#include "ttree/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "ttree/errors.hpp"
#include "ttree/format.hpp"

namespace ttree {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

double parse_cell(const std::string& cell, const std::string& source, std::size_t line_no,
                  const std::string& column) {
    if (cell.empty())
        throw DataError(source + ": line " + std::to_string(line_no) + ", column '" + column +
                        "': missing value");
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc{} || result.ptr != end)
        throw DataError(source + ": line " + std::to_string(line_no) + ", column '" + column +
                        "': cannot parse '" + cell + "' as a number");
    return value;
}

} // namespace

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
    const auto it = std::find(headers.begin(), headers.end(), name);
    if (it == headers.end()) return std::nullopt;
    return static_cast<std::size_t>(it - headers.begin());
}

CsvTable read_csv(std::istream& in, const std::string& source_name) {
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find('"') != std::string::npos)
            throw DataError(source_name + ": line " + std::to_string(line_no) +
                            ": quoted fields are not supported");

        if (line_no == 1) {
            table.headers = split_line(line);
            std::unordered_set<std::string> seen;
            for (const std::string& h : table.headers) {
                if (h.empty())
                    throw DataError(source_name + ": header row has an empty column name");
                if (!seen.insert(h).second)
                    throw DataError(source_name + ": duplicate column name '" + h + "'");
            }
            continue;
        }

        if (line.empty()) continue; // tolerate trailing blank lines
        const std::vector<std::string> fields = split_line(line);
        if (fields.size() != table.headers.size())
            throw DataError(source_name + ": line " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(table.headers.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c)
            row.push_back(parse_cell(fields[c], source_name, line_no, table.headers[c]));
        table.rows.push_back(std::move(row));
    }

    if (table.headers.empty())
        throw DataError(source_name + ": missing header row");
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "' for reading");
    return read_csv(in, path);
}

void write_csv(std::ostream& out, const CsvTable& table) {
    for (std::size_t c = 0; c < table.headers.size(); ++c) {
        if (c > 0) out << ',';
        out << table.headers[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out << ',';
            out << format_double(row[c]);
        }
        out << '\n';
    }
}

void write_csv_file(const std::string& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    write_csv(out, table);
    if (!out) throw DataError("failed while writing '" + path + "'");
}

ColumnRoles ColumnRoles::resolve(const std::vector<std::string>& headers) const {
    auto exists = [&headers](const std::string& name) {
        return std::find(headers.begin(), headers.end(), name) != headers.end();
    };

    ColumnRoles resolved = *this;
    if (!exists(resolved.treatment))
        throw DataError("treatment column '" + resolved.treatment + "' not found");
    if (!exists(resolved.outcome))
        throw DataError("outcome column '" + resolved.outcome + "' not found");
    if (resolved.true_effect && !exists(*resolved.true_effect))
        throw DataError("true-effect column '" + *resolved.true_effect + "' not found");

    std::unordered_set<std::string> reserved{resolved.treatment, resolved.outcome};
    if (reserved.size() != 2)
        throw DataError("treatment and outcome columns must differ");
    if (resolved.true_effect && !reserved.insert(*resolved.true_effect).second)
        throw DataError("true-effect column overlaps another role");

    if (resolved.features.empty()) {
        for (const std::string& h : headers)
            if (!reserved.count(h)) resolved.features.push_back(h);
    } else {
        std::unordered_set<std::string> seen;
        for (const std::string& f : resolved.features) {
            if (!exists(f)) throw DataError("feature column '" + f + "' not found");
            if (reserved.count(f))
                throw DataError("feature column '" + f + "' overlaps another role");
            if (!seen.insert(f).second)
                throw DataError("feature column '" + f + "' listed twice");
        }
    }
    if (resolved.features.empty())
        throw DataError("no feature columns remain after assigning roles");
    return resolved;
}

Dataset dataset_from_csv(const CsvTable& table, const ColumnRoles& roles) {
    ColumnRoles wanted = roles;
    if (!wanted.true_effect && table.column("true_effect") &&
        wanted.treatment != "true_effect" && wanted.outcome != "true_effect")
        wanted.true_effect = "true_effect";
    const ColumnRoles resolved = wanted.resolve(table.headers);

    std::vector<std::size_t> feature_cols;
    feature_cols.reserve(resolved.features.size());
    for (const std::string& f : resolved.features) feature_cols.push_back(*table.column(f));
    const std::size_t treatment_col = *table.column(resolved.treatment);
    const std::size_t outcome_col = *table.column(resolved.outcome);
    std::optional<std::size_t> effect_col;
    if (resolved.true_effect) effect_col = *table.column(*resolved.true_effect);

    Dataset data = make_dataset(resolved.features.size());
    data.feature_names = resolved.features;
    data.samples.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        Sample s;
        s.features.reserve(feature_cols.size());
        for (std::size_t c : feature_cols) s.features.push_back(row[c]);
        s.treatment = row[treatment_col];
        s.outcome = row[outcome_col];
        if (effect_col) s.true_effect = row[*effect_col];
        data.samples.push_back(std::move(s));
    }
    data.validate();
    return data;
}

CsvTable dataset_to_csv(const Dataset& data) {
    data.validate();
    CsvTable table;
    table.headers = data.feature_names;
    table.headers.push_back("treatment");
    table.headers.push_back("outcome");
    const bool with_effect = data.has_true_effects();
    if (with_effect) table.headers.push_back("true_effect");

    table.rows.reserve(data.samples.size());
    for (const Sample& s : data.samples) {
        std::vector<double> row = s.features;
        row.push_back(s.treatment);
        row.push_back(s.outcome);
        if (with_effect) row.push_back(*s.true_effect);
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace ttree
