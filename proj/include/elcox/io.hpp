#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "elcox/penalty.hpp"
#include "elcox/survival.hpp"

namespace elcox {

inline constexpr const char* kToolName = "elcox";
inline constexpr const char* kToolVersion = "0.1.0";

/// Survival data plus its covariate column names.
struct NamedDataset {
    SurvivalDataset data;
    std::vector<std::string> variable_names;
};

/// Group structure plus the group-name table (ids follow first appearance in
/// the groups file).
struct NamedGroups {
    GroupStructure groups;
    std::vector<std::string> group_names;

    Index id_of(const std::string& name) const {
        for (std::size_t g = 0; g < group_names.size(); ++g)
            if (group_names[g] == name) return static_cast<Index>(g);
        return -1;
    }
};

/// Reads `time,status,<var1>,...` with status in {0,1}. Throws ParseError
/// with the offending row/column or SchemaError for header problems.
NamedDataset read_survival_csv(const std::string& path);

void write_survival_csv(const std::string& path, const SurvivalDataset& data,
                        const std::vector<std::string>& variable_names);

/// Reads the two-column `variable,group` file; every dataset variable must
/// appear exactly once.
NamedGroups read_groups_csv(const std::string& path,
                            const std::vector<std::string>& variable_names);

void write_groups_csv(const std::string& path, const std::vector<std::string>& variable_names,
                      const GroupStructure& groups, const std::vector<std::string>& group_names);

/// FNV-1a 64-bit digest of a file's bytes, as fixed-width hex.
std::string file_digest(const std::string& path);

std::string format_double(double value);

}  // namespace elcox
