#pragma once

#include "roadsafe/simagent/frame.hpp"

namespace roadsafe::nn {

/// Pluggable drowsiness classifier: maps a face frame to the probability of
/// the drowsy class.
class DrowsinessClassifier {
public:
    virtual ~DrowsinessClassifier() = default;

    /// Required frame side, or 0 when any side is accepted.
    [[nodiscard]] virtual int input_side() const noexcept = 0;
    [[nodiscard]] virtual double score(const sim::Frame& frame) const = 0;
};

/// Checked entry point: rejects frames of the wrong size with ShapeError and
/// guarantees a result in [0, 1].
[[nodiscard]] double classify(const DrowsinessClassifier& classifier, const sim::Frame& frame);

/// Closed-form baseline: logistic map of the eye-region mean relative to the
/// face mean. Darker eyes (closed lids) give higher scores.
class EyeRegionBaseline final : public DrowsinessClassifier {
public:
    static constexpr double kMidpoint = 0.85;
    static constexpr double kSlope = 8.0;

    [[nodiscard]] int input_side() const noexcept override { return 0; }
    [[nodiscard]] double score(const sim::Frame& frame) const override;
};

class ConstantClassifier final : public DrowsinessClassifier {
public:
    explicit ConstantClassifier(double value) : value_(value) {}

    [[nodiscard]] int input_side() const noexcept override { return 0; }
    [[nodiscard]] double score(const sim::Frame&) const override { return value_; }

private:
    double value_;
};

} // namespace roadsafe::nn
