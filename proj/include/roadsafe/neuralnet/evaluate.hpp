#pragma once

#include "roadsafe/domain/types.hpp"
#include "roadsafe/neuralnet/classifier.hpp"
#include "roadsafe/neuralnet/train.hpp"

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace roadsafe::nn {

struct ScenarioAccuracy {
    sim::Scenario scenario;
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy = 0.0;
};

/// Per-scenario accuracy in reporting order plus the pooled "All" row
/// (total correct over total frames, not the mean of rows).
struct AccuracyTable {
    std::vector<ScenarioAccuracy> rows;
    std::size_t correct = 0;
    std::size_t total = 0;
    double all = 0.0;

    [[nodiscard]] const ScenarioAccuracy& row(sim::Scenario s) const;
};

using ScenarioGroups = std::map<sim::Scenario, std::vector<LabeledFrame>>;

/// Rows follow the reporting order: with glasses, night without glasses,
/// night with glasses, without glasses, with sunglasses.
inline constexpr std::array<sim::Scenario, 5> kReportOrder = {
    sim::Scenario::glasses, sim::Scenario::night_no_glasses, sim::Scenario::night_glasses,
    sim::Scenario::no_glasses, sim::Scenario::sunglasses};

/// "With glasses", "Night Without glasses", ...
[[nodiscard]] std::string_view display_name(sim::Scenario s) noexcept;

/// Predicts drowsy when score >= threshold. Throws ValidationError for an empty group.
[[nodiscard]] AccuracyTable evaluate(const DrowsinessClassifier& classifier, const ScenarioGroups& groups,
                                     double threshold = kDrowsyThreshold);

struct TableRow {
    std::string category;
    double percent = 0.0;
};

[[nodiscard]] std::vector<TableRow> table_rows(const AccuracyTable& table);

/// Fixed-width text rendering of the accuracy table (percent, three decimals).
[[nodiscard]] std::string render_accuracy_table(std::span<const TableRow> rows);
[[nodiscard]] std::string render_accuracy_table(const AccuracyTable& table);

} // namespace roadsafe::nn
