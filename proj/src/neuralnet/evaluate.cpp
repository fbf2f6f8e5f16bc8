#include "roadsafe/neuralnet/evaluate.hpp"

#include "roadsafe/error.hpp"

#include <cstdio>

namespace roadsafe::nn {

std::string_view display_name(sim::Scenario s) noexcept
{
    switch (s) {
    case sim::Scenario::glasses: return "With glasses";
    case sim::Scenario::no_glasses: return "Without glasses";
    case sim::Scenario::sunglasses: return "With sunglasses";
    case sim::Scenario::night_glasses: return "Night With glasses";
    case sim::Scenario::night_no_glasses: return "Night Without glasses";
    }
    return "?";
}

const ScenarioAccuracy& AccuracyTable::row(sim::Scenario s) const
{
    for (const auto& r : rows) {
        if (r.scenario == s) {
            return r;
        }
    }
    throw NotFoundError("no accuracy row for scenario " + std::string(sim::to_string(s)));
}

AccuracyTable evaluate(const DrowsinessClassifier& classifier, const ScenarioGroups& groups, double threshold)
{
    AccuracyTable table;
    for (auto scenario : kReportOrder) {
        auto it = groups.find(scenario);
        if (it == groups.end()) {
            continue;
        }
        if (it->second.empty()) {
            throw ValidationError("scenario group '" + std::string(sim::to_string(scenario)) + "' is empty");
        }
        ScenarioAccuracy row{scenario, 0, it->second.size(), 0.0};
        for (const auto& item : it->second) {
            const bool predicted_drowsy = classify(classifier, item.frame) >= threshold;
            row.correct += predicted_drowsy == (item.label == kDrowsyClass) ? 1 : 0;
        }
        row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.total);
        table.correct += row.correct;
        table.total += row.total;
        table.rows.push_back(row);
    }
    if (table.total == 0) {
        throw ValidationError("no labeled frames to evaluate");
    }
    table.all = static_cast<double>(table.correct) / static_cast<double>(table.total);
    return table;
}

std::vector<TableRow> table_rows(const AccuracyTable& table)
{
    std::vector<TableRow> rows;
    for (const auto& r : table.rows) {
        rows.push_back({std::string(display_name(r.scenario)), 100.0 * r.accuracy});
    }
    rows.push_back({"All", 100.0 * table.all});
    return rows;
}

std::string render_accuracy_table(std::span<const TableRow> rows)
{
    std::string out = "Accuracy per driving scenarios\n";
    out += "-------------------------------\n";
    char line[96];
    std::snprintf(line, sizeof line, "%-22s%9s\n", "Category", "Accuracy");
    out += line;
    out += "-------------------------------\n";
    for (const auto& r : rows) {
        if (r.category == "All") {
            out += "-------------------------------\n";
        }
        std::snprintf(line, sizeof line, "%-22s%9.3f\n", r.category.c_str(), r.percent);
        out += line;
    }
    out += "-------------------------------\n";
    return out;
}

std::string render_accuracy_table(const AccuracyTable& table)
{
    const auto rows = table_rows(table);
    return render_accuracy_table(rows);
}

} // namespace roadsafe::nn
