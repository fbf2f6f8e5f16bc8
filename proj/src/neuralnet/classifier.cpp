#include "roadsafe/neuralnet/classifier.hpp"

#include "roadsafe/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace roadsafe::nn {

double classify(const DrowsinessClassifier& classifier, const sim::Frame& frame)
{
    const int side = classifier.input_side();
    if (side != 0 && side != frame.side()) {
        throw ShapeError("classifier expects " + std::to_string(side) + "x" + std::to_string(side) +
                         " frames, got " + std::to_string(frame.side()));
    }
    return std::clamp(classifier.score(frame), 0.0, 1.0);
}

double EyeRegionBaseline::score(const sim::Frame& frame) const
{
    const double eyes = sim::eye_region_stats(frame).mean;
    const double face = sim::face_region_stats(frame).mean;
    const double ratio = face > 0.0 ? eyes / face : 0.0;
    return 1.0 / (1.0 + std::exp(kSlope * (ratio - kMidpoint)));
}

} // namespace roadsafe::nn
