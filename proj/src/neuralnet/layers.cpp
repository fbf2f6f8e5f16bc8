#include "roadsafe/neuralnet/layers.hpp"

#include <cstdio>

namespace roadsafe::nn {

std::string describe(const LayerSpec& layer)
{
    char buf[64];
    if (const auto* c = std::get_if<Conv>(&layer)) {
        std::snprintf(buf, sizeof buf, "Conv %d(%dx%d%s)", c->out_channels, c->kernel, c->kernel,
                      c->padding == Padding::same ? ", same" : "");
    } else if (const auto* l = std::get_if<LeakyRelu>(&layer)) {
        std::snprintf(buf, sizeof buf, "LeakyReLU(alpha=%g)", l->alpha);
    } else if (const auto* p = std::get_if<MaxPool>(&layer)) {
        std::snprintf(buf, sizeof buf, "MaxPool(%dx%d)", p->size, p->size);
    } else if (const auto* d = std::get_if<Dropout>(&layer)) {
        std::snprintf(buf, sizeof buf, "Dropout(%g)", d->rate);
    } else if (std::holds_alternative<Flatten>(layer)) {
        std::snprintf(buf, sizeof buf, "Flatten");
    } else if (const auto* n = std::get_if<Dense>(&layer)) {
        std::snprintf(buf, sizeof buf, "Dense(%d, linear)", n->units);
    } else {
        std::snprintf(buf, sizeof buf, "Softmax");
    }
    return buf;
}

} // namespace roadsafe::nn
