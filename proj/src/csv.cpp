#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "elcox/errors.hpp"
#include "elcox/io.hpp"

namespace elcox {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string strip(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& raw, std::size_t row, std::size_t column) {
    const std::string text = strip(raw);
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ParseError("cannot parse numeric value '" + text + "' at row " +
                         std::to_string(row) + ", column " + std::to_string(column));
    }
    return value;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && strip(lines.back()).empty()) lines.pop_back();
    return lines;
}

}  // namespace

NamedDataset read_survival_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw SchemaError("data file is empty: " + path);

    const auto header = split_csv_line(lines[0]);
    if (header.size() < 3 || strip(header[0]) != "time" || strip(header[1]) != "status")
        throw SchemaError("data header must start with 'time,status' followed by variable names");
    std::vector<std::string> names;
    for (std::size_t c = 2; c < header.size(); ++c) {
        const std::string name = strip(header[c]);
        if (name.empty()) throw SchemaError("empty variable name in data header");
        if (std::find(names.begin(), names.end(), name) != names.end())
            throw SchemaError("duplicate variable name in data header: " + name);
        names.push_back(name);
    }

    const Index n = static_cast<Index>(lines.size()) - 1;
    if (n < 1) throw EmptyData("data file contains no observation rows");
    const Index p = static_cast<Index>(names.size());
    Matrix X(n, p);
    Vector time(n);
    BoolArray event(n);
    for (Index i = 0; i < n; ++i) {
        const std::size_t row = static_cast<std::size_t>(i) + 2;  // 1-based, after header
        const auto fields = split_csv_line(lines[static_cast<std::size_t>(i) + 1]);
        if (fields.size() != header.size())
            throw ParseError("row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(header.size()));
        time(i) = parse_number(fields[0], row, 1);
        const double status = parse_number(fields[1], row, 2);
        if (status != 0.0 && status != 1.0)
            throw SchemaError("status must be 0 or 1 at row " + std::to_string(row));
        event(i) = status == 1.0;
        for (Index j = 0; j < p; ++j)
            X(i, j) = parse_number(fields[static_cast<std::size_t>(j) + 2], row,
                                   static_cast<std::size_t>(j) + 3);
    }
    return NamedDataset{SurvivalDataset(std::move(X), std::move(time), std::move(event)),
                        std::move(names)};
}

std::string format_double(double value) {
    std::ostringstream out;
    out.precision(17);
    out << value;
    return out.str();
}

void write_survival_csv(const std::string& path, const SurvivalDataset& data,
                        const std::vector<std::string>& variable_names) {
    if (static_cast<Index>(variable_names.size()) != data.n_covariates())
        throw DimensionMismatch("variable name count does not match covariate count");
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << "time,status";
    for (const auto& name : variable_names) out << ',' << name;
    out << '\n';
    for (Index i = 0; i < data.n_observations(); ++i) {
        out << format_double(data.times()(i)) << ',' << (data.events()(i) ? 1 : 0);
        for (Index j = 0; j < data.n_covariates(); ++j)
            out << ',' << format_double(data.covariates()(i, j));
        out << '\n';
    }
}

NamedGroups read_groups_csv(const std::string& path,
                            const std::vector<std::string>& variable_names) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw SchemaError("groups file is empty: " + path);
    const auto header = split_csv_line(lines[0]);
    if (header.size() != 2 || strip(header[0]) != "variable" || strip(header[1]) != "group")
        throw SchemaError("groups header must be 'variable,group'");

    std::map<std::string, std::string> group_of_variable;
    std::vector<std::string> group_names;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto fields = split_csv_line(lines[r]);
        if (fields.size() != 2)
            throw ParseError("groups row " + std::to_string(r + 1) + " must have two fields");
        const std::string variable = strip(fields[0]);
        const std::string group = strip(fields[1]);
        if (variable.empty() || group.empty())
            throw ParseError("groups row " + std::to_string(r + 1) + " has an empty field");
        if (group_of_variable.count(variable))
            throw SchemaError("variable listed twice in groups file: " + variable);
        group_of_variable[variable] = group;
        if (std::find(group_names.begin(), group_names.end(), group) == group_names.end())
            group_names.push_back(group);
    }

    std::vector<Index> ids;
    ids.reserve(variable_names.size());
    for (const auto& name : variable_names) {
        const auto found = group_of_variable.find(name);
        if (found == group_of_variable.end())
            throw SchemaError("groups file is missing variable: " + name);
        const auto slot = std::find(group_names.begin(), group_names.end(), found->second);
        ids.push_back(static_cast<Index>(slot - group_names.begin()));
    }
    for (const auto& [variable, group] : group_of_variable) {
        if (std::find(variable_names.begin(), variable_names.end(), variable) ==
            variable_names.end())
            throw SchemaError("groups file lists unknown variable: " + variable);
    }

    // drop group names that ended up with no dataset columns
    std::vector<bool> used(group_names.size(), false);
    for (Index id : ids) used[static_cast<std::size_t>(id)] = true;
    std::vector<std::string> kept;
    std::vector<Index> remap(group_names.size(), -1);
    for (std::size_t g = 0; g < group_names.size(); ++g) {
        if (used[g]) {
            remap[g] = static_cast<Index>(kept.size());
            kept.push_back(group_names[g]);
        }
    }
    for (Index& id : ids) id = remap[static_cast<std::size_t>(id)];

    return NamedGroups{GroupStructure(std::move(ids)), std::move(kept)};
}

void write_groups_csv(const std::string& path, const std::vector<std::string>& variable_names,
                      const GroupStructure& groups, const std::vector<std::string>& group_names) {
    if (static_cast<Index>(variable_names.size()) != groups.n_covariates())
        throw DimensionMismatch("variable name count does not match group structure");
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << "variable,group\n";
    for (Index j = 0; j < groups.n_covariates(); ++j)
        out << variable_names[static_cast<std::size_t>(j)] << ','
            << group_names[static_cast<std::size_t>(groups.group_of(j))] << '\n';
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file for digest: " + path);
    std::uint64_t hash = 1469598103934665603ULL;
    char buffer[4096];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 1099511628211ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(hex);
}

}  // namespace elcox
