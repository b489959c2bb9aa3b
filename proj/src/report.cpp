#include "fairgen/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fairgen {

double alignment_error(const Distribution& p, const Distribution& q) {
    if (!(p.scheme() == q.scheme()))
        raise(Errc::scheme_mismatch,
              "alignment error needs one scheme, got '" + p.scheme().name + "' vs '" + q.scheme().name + "'");
    double err = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - q[i];
        err += d * d;
    }
    return err;
}

double improvement_pct(double baseline_err, double treated_err) {
    if (!(baseline_err > 0.0))
        raise(Errc::invalid_argument, "improvement undefined for zero/negative baseline error");
    return 100.0 * (1.0 - treated_err / baseline_err);
}

const char* occ_status_name(OccStatus s) {
    switch (s) {
    case OccStatus::high: return "high";
    case OccStatus::moderate: return "moderate";
    case OccStatus::low: return "low";
    }
    return "moderate";
}

namespace {

OccStatus occ_status_from_name(std::string_view s) {
    if (s == "high" || s == "High") return OccStatus::high;
    if (s == "moderate" || s == "Moderate") return OccStatus::moderate;
    if (s == "low" || s == "Low") return OccStatus::low;
    raise(Errc::invalid_argument, "unknown occupation status '" + std::string(s) + "'");
}

std::string lowercased(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// "Teacher (High School)" matches the prompt label "teacher".
std::string normalized_occupation(std::string_view s) {
    std::string out = lowercased(s);
    if (const auto paren = out.find(" ("); paren != std::string::npos) out.erase(paren);
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

} // namespace

OccupationTable OccupationTable::builtin() {
    OccupationTable t;
    t.entries_ = {
        {"Lawyer", OccStatus::high, 78},
        {"Engineer", OccStatus::high, 74},
        {"Judge", OccStatus::high, 77},
        {"Doctor", OccStatus::high, 78},
        {"CEO", OccStatus::high, 75},
        {"Architect", OccStatus::high, 71},
        {"Scientist", OccStatus::high, 71},
        {"University Professor", OccStatus::high, 71},
        {"Financial Advisor", OccStatus::high, 69},
        {"Surgeon", OccStatus::high, 78},
        {"Teacher (High School)", OccStatus::moderate, 61},
        {"Nurse", OccStatus::moderate, 66},
        {"Police Officer", OccStatus::moderate, 60},
        {"Firefighter", OccStatus::moderate, 62},
        {"Social Worker", OccStatus::moderate, 58.2},
        {"Counselor", OccStatus::moderate, 56.8},
        {"Librarian", OccStatus::moderate, 54},
        {"Paramedic", OccStatus::moderate, 53.5},
        {"Postal Worker", OccStatus::moderate, 45.3},
        {"Bus Driver", OccStatus::moderate, 47},
        {"Delivery Driver", OccStatus::low, 42.5},
        {"Security Guard", OccStatus::low, 48.1},
        {"Maintenance Worker", OccStatus::low, 44},
        {"Landscaper", OccStatus::low, 43.7},
        {"Construction Worker", OccStatus::low, 28},
        {"Factory Worker", OccStatus::low, 22},
        {"Farm Worker", OccStatus::low, 22},
        {"Warehouse Worker", OccStatus::low, 28},
        {"Janitor", OccStatus::low, 15},
        {"Food Service Worker", OccStatus::low, 35},
    };
    return t;
}

OccupationTable OccupationTable::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io, "cannot open occupation table " + path.string());
    OccupationTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string occupation, status, siops;
        std::getline(row, occupation, ',');
        std::getline(row, status, ',');
        std::getline(row, siops, ',');
        if (first && lowercased(occupation) == "occupation") {
            first = false;
            continue; // header
        }
        first = false;
        if (occupation.empty() || status.empty() || siops.empty())
            raise(Errc::schema_violation, "malformed occupation row: " + line);
        const double score = std::stod(siops);
        if (score < 12.0 || score > 78.0)
            raise(Errc::schema_violation, "SIOPS score out of the 12-78 scale: " + line);
        t.entries_.push_back({occupation, occ_status_from_name(status), score});
    }
    if (t.entries_.empty()) raise(Errc::schema_violation, "occupation table is empty");
    return t;
}

const OccupationEntry& OccupationTable::lookup(std::string_view occupation) const {
    const std::string key = lowercased(occupation);
    for (const auto& e : entries_)
        if (lowercased(e.occupation) == key) return e;
    const std::string loose = normalized_occupation(occupation);
    for (const auto& e : entries_)
        if (normalized_occupation(e.occupation) == loose) return e;
    raise(Errc::invalid_argument, "occupation '" + std::string(occupation) + "' not in the table");
}

AuditComparison AuditComparison::make(Distribution q, Distribution p, std::int64_t n_images,
                                      std::int64_t discards) {
    const double err = alignment_error(p, q);
    return AuditComparison{std::move(q), std::move(p), err, n_images, discards};
}

Report group_report(const std::vector<NamedComparison>& comparisons, const OccupationTable& table) {
    if (comparisons.empty()) raise(Errc::invalid_argument, "no comparisons to report");
    Report report;
    report.target = comparisons.front().treated.q;

    for (const auto& c : comparisons) {
        const auto& entry = table.lookup(c.occupation);
        ComparisonRow row;
        row.occupation = entry.occupation;
        row.status = entry.status;
        row.siops = entry.siops;
        row.baseline_error = c.baseline.error;
        row.treated_error = c.treated.error;
        row.improvement = improvement_pct(c.baseline.error, c.treated.error);
        row.n_images = c.baseline.n_images + c.treated.n_images;
        row.discards = c.baseline.discards + c.treated.discards;
        report.rows.push_back(std::move(row));
    }

    const OccStatus order[] = {OccStatus::high, OccStatus::moderate, OccStatus::low};
    const char* labels[] = {"High-Status", "Moderate-Status", "Low-Status"};
    double group_b_sum = 0.0, group_t_sum = 0.0;
    int groups_present = 0;
    for (int g = 0; g < 3; ++g) {
        GroupRow row;
        row.label = labels[g];
        for (const auto& r : report.rows) {
            if (r.status != order[g]) continue;
            row.mean_baseline += r.baseline_error;
            row.mean_treated += r.treated_error;
            ++row.n_occupations;
        }
        if (row.n_occupations > 0) {
            row.mean_baseline /= row.n_occupations;
            row.mean_treated /= row.n_occupations;
            row.improvement = improvement_pct(row.mean_baseline, row.mean_treated);
            group_b_sum += row.mean_baseline;
            group_t_sum += row.mean_treated;
            ++groups_present;
        }
        report.groups.push_back(std::move(row));
    }

    if (groups_present > 0) {
        report.average_over_groups.label = "Average (over group means)";
        report.average_over_groups.mean_baseline = group_b_sum / groups_present;
        report.average_over_groups.mean_treated = group_t_sum / groups_present;
        report.average_over_groups.improvement =
            improvement_pct(report.average_over_groups.mean_baseline, report.average_over_groups.mean_treated);
        report.average_over_groups.n_occupations = static_cast<int>(report.rows.size());
    }

    double occ_b_sum = 0.0, occ_t_sum = 0.0;
    for (const auto& r : report.rows) {
        occ_b_sum += r.baseline_error;
        occ_t_sum += r.treated_error;
    }
    report.average_over_occupations.label = "Average (over occupations)";
    report.average_over_occupations.mean_baseline = occ_b_sum / static_cast<double>(report.rows.size());
    report.average_over_occupations.mean_treated = occ_t_sum / static_cast<double>(report.rows.size());
    report.average_over_occupations.improvement = improvement_pct(
        report.average_over_occupations.mean_baseline, report.average_over_occupations.mean_treated);
    report.average_over_occupations.n_occupations = static_cast<int>(report.rows.size());
    return report;
}

namespace {

Json to_json(const GroupRow& g) {
    return Json{{"label", g.label},
                {"mean_baseline_error", g.mean_baseline},
                {"mean_treated_error", g.mean_treated},
                {"improvement_pct", g.improvement},
                {"n_occupations", g.n_occupations}};
}

} // namespace

Json to_json(const Report& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows)
        rows.push_back(Json{{"occupation", row.occupation},
                            {"status", occ_status_name(row.status)},
                            {"siops", row.siops},
                            {"baseline_error", row.baseline_error},
                            {"treated_error", row.treated_error},
                            {"improvement_pct", row.improvement},
                            {"n_images", row.n_images},
                            {"discards", row.discards}});
    Json groups = Json::array();
    for (const auto& g : r.groups) groups.push_back(to_json(g));
    Json j{{"rows", std::move(rows)},
           {"groups", std::move(groups)},
           {"average", to_json(r.average_over_groups)},
           {"average_over_occupations", to_json(r.average_over_occupations)}};
    if (r.target) j["target"] = fairgen::to_json(*r.target);
    return j;
}

void write_report_csv(const std::filesystem::path& path, const Report& r) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) raise(Errc::io, "cannot write " + path.string());
    out << "occupation,status,siops,baseline_error,treated_error,improvement_pct,n_images,discards\n";
    char buf[256];
    for (const auto& row : r.rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.6g,%.6f,%.6f,%.2f,%lld,%lld\n", row.occupation.c_str(),
                      occ_status_name(row.status), row.siops, row.baseline_error, row.treated_error,
                      row.improvement, static_cast<long long>(row.n_images),
                      static_cast<long long>(row.discards));
        out << buf;
    }
    auto group_line = [&](const GroupRow& g) {
        std::snprintf(buf, sizeof buf, "%s,,,%.6f,%.6f,%.2f,,\n", g.label.c_str(), g.mean_baseline,
                      g.mean_treated, g.improvement);
        out << buf;
    };
    for (const auto& g : r.groups)
        if (g.n_occupations > 0) group_line(g);
    group_line(r.average_over_groups);
    group_line(r.average_over_occupations);
}

std::string format_report_table(const Report& r) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-28s %10s %10s %12s\n", "Category", "Baseline", "Treated", "Improvement");
    out << buf;
    auto line = [&](const std::string& label, double b, double t, double imp) {
        std::snprintf(buf, sizeof buf, "%-28s %10.4f %10.4f %11.1f%%\n", label.c_str(), b, t, imp);
        out << buf;
    };
    for (const auto& g : r.groups)
        if (g.n_occupations > 0) line(g.label, g.mean_baseline, g.mean_treated, g.improvement);
    line("Average", r.average_over_groups.mean_baseline, r.average_over_groups.mean_treated,
         r.average_over_groups.improvement);
    return out.str();
}

void write_histogram_csv(const std::filesystem::path& path, const Distribution& p) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) raise(Errc::io, "cannot write " + path.string());
    out << "label,probability\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s,%.9f\n", p.scheme().categories[i].c_str(), p[i]);
        out << buf;
    }
}

} // namespace fairgen
