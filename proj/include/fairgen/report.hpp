#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairgen/distribution.hpp"
#include "fairgen/json_io.hpp"

namespace fairgen {

// Sum of squared per-category deviations between observed p and declared q.
// Computed at the scheme given; callers aggregate to 3 bins first for the
// headline numbers.
double alignment_error(const Distribution& p, const Distribution& q);

// Relative reduction in alignment error, in percent: 100*(1 - treated/baseline).
double improvement_pct(double baseline_err, double treated_err);

enum class OccStatus { high, moderate, low };
const char* occ_status_name(OccStatus s);

struct OccupationEntry {
    std::string occupation;
    OccStatus status = OccStatus::moderate;
    double siops = 0.0; // SIOPS prestige score, 12-78
};

// Occupation -> status/SIOPS lookup, shipped as an editable CSV data asset.
class OccupationTable {
public:
    static OccupationTable builtin();
    static OccupationTable load_csv(const std::filesystem::path& path);

    const OccupationEntry& lookup(std::string_view occupation) const; // case-insensitive
    const std::vector<OccupationEntry>& entries() const { return entries_; }

private:
    std::vector<OccupationEntry> entries_;
};

// Declared target vs observed outcome for one prompt/occupation.
struct AuditComparison {
    Distribution q;
    Distribution p;
    double error = 0.0; // always recomputed from p and q
    std::int64_t n_images = 0;
    std::int64_t discards = 0;

    static AuditComparison make(Distribution q, Distribution p, std::int64_t n_images,
                                std::int64_t discards);
};

struct ComparisonRow {
    std::string occupation;
    OccStatus status = OccStatus::moderate;
    double siops = 0.0;
    double baseline_error = 0.0;
    double treated_error = 0.0;
    double improvement = 0.0;
    std::int64_t n_images = 0;
    std::int64_t discards = 0;
};

struct GroupRow {
    std::string label;
    double mean_baseline = 0.0;
    double mean_treated = 0.0;
    double improvement = 0.0; // improvement of the row means
    int n_occupations = 0;
};

struct Report {
    std::optional<Distribution> target; // declared q (reporting scheme)
    std::vector<ComparisonRow> rows;
    std::vector<GroupRow> groups;        // High / Moderate / Low, in that order
    GroupRow average_over_groups;        // means of the three group means (default convention)
    GroupRow average_over_occupations;   // means over all occupations, labeled separately
};

struct NamedComparison {
    std::string occupation;
    AuditComparison baseline;
    AuditComparison treated;
};

// Builds the status-group table: per-occupation rows plus High/Moderate/Low
// group means and both averaging conventions.
Report group_report(const std::vector<NamedComparison>& comparisons, const OccupationTable& table);

Json to_json(const Report& r);
void write_report_csv(const std::filesystem::path& path, const Report& r);
std::string format_report_table(const Report& r);

// Plot-ready per-category frequencies: "label,probability" rows.
void write_histogram_csv(const std::filesystem::path& path, const Distribution& p);

} // namespace fairgen
