#include "roadsafe/neuralnet/model_io.hpp"

#include "roadsafe/error.hpp"
#include "roadsafe/util/bytes.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace roadsafe::nn {

namespace {

constexpr char kMagic[8] = {'R', 'S', 'C', 'N', 'N', 'M', 'D', 'L'};

enum class LayerKind : std::uint8_t { conv = 1, leaky_relu, max_pool, dropout, flatten, dense, softmax };

void put_layer(ByteWriter& w, const LayerSpec& layer)
{
    if (const auto* c = std::get_if<Conv>(&layer)) {
        w.put(static_cast<std::uint8_t>(LayerKind::conv));
        w.put(static_cast<std::uint32_t>(c->out_channels));
        w.put(static_cast<std::uint32_t>(c->kernel));
        w.put(static_cast<std::uint8_t>(c->padding));
    } else if (const auto* l = std::get_if<LeakyRelu>(&layer)) {
        w.put(static_cast<std::uint8_t>(LayerKind::leaky_relu));
        w.put(l->alpha);
    } else if (const auto* p = std::get_if<MaxPool>(&layer)) {
        w.put(static_cast<std::uint8_t>(LayerKind::max_pool));
        w.put(static_cast<std::uint32_t>(p->size));
    } else if (const auto* d = std::get_if<Dropout>(&layer)) {
        w.put(static_cast<std::uint8_t>(LayerKind::dropout));
        w.put(d->rate);
    } else if (std::holds_alternative<Flatten>(layer)) {
        w.put(static_cast<std::uint8_t>(LayerKind::flatten));
    } else if (const auto* n = std::get_if<Dense>(&layer)) {
        w.put(static_cast<std::uint8_t>(LayerKind::dense));
        w.put(static_cast<std::uint32_t>(n->units));
    } else {
        w.put(static_cast<std::uint8_t>(LayerKind::softmax));
    }
}

LayerSpec get_layer(ByteReader& r)
{
    switch (static_cast<LayerKind>(r.get<std::uint8_t>())) {
    case LayerKind::conv: {
        Conv c;
        c.out_channels = static_cast<int>(r.get<std::uint32_t>());
        c.kernel = static_cast<int>(r.get<std::uint32_t>());
        const auto pad = r.get<std::uint8_t>();
        if (pad > static_cast<std::uint8_t>(Padding::same)) {
            throw StorageError("model file: bad padding mode");
        }
        c.padding = static_cast<Padding>(pad);
        return c;
    }
    case LayerKind::leaky_relu: return LeakyRelu{r.get<double>()};
    case LayerKind::max_pool: return MaxPool{static_cast<int>(r.get<std::uint32_t>())};
    case LayerKind::dropout: return Dropout{r.get<double>()};
    case LayerKind::flatten: return Flatten{};
    case LayerKind::dense: return Dense{static_cast<int>(r.get<std::uint32_t>())};
    case LayerKind::softmax: return Softmax{};
    }
    throw StorageError("model file: unknown layer kind");
}

Shape get_shape(ByteReader& r)
{
    const auto rank = r.get<std::uint32_t>();
    if (rank > 8) {
        throw StorageError("model file: implausible tensor rank");
    }
    Shape s(rank);
    for (auto& d : s) {
        d = r.get<std::uint32_t>();
    }
    return s;
}

void put_shape(ByteWriter& w, const Shape& s)
{
    w.put(static_cast<std::uint32_t>(s.size()));
    for (auto d : s) {
        w.put(static_cast<std::uint32_t>(d));
    }
}

} // namespace

std::vector<std::uint8_t> serialize_model(const Model& model)
{
    ByteWriter w;
    w.put_bytes(std::string_view(kMagic, sizeof kMagic));
    w.put(kModelFormatVersion);
    put_shape(w, model.input_shape());
    w.put(static_cast<std::uint32_t>(model.layers().size()));
    for (const auto& layer : model.layers()) {
        put_layer(w, layer);
    }
    w.put(static_cast<std::uint32_t>(model.parameters().size()));
    for (const auto& t : model.parameters()) {
        put_shape(w, t.shape());
        for (double v : t.data()) {
            w.put(v);
        }
    }
    return w.take();
}

Model deserialize_model(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        throw StorageError("model file: bad magic");
    }
    ByteReader r(bytes.subspan(sizeof kMagic));
    const auto version = r.get<std::uint32_t>();
    if (version != kModelFormatVersion) {
        throw StorageError("model file: unsupported version " + std::to_string(version));
    }
    Shape input = get_shape(r);
    const auto n_layers = r.get<std::uint32_t>();
    if (!r.ok() || n_layers > 1024) {
        throw StorageError("model file: truncated header");
    }
    std::vector<LayerSpec> layers;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        layers.push_back(get_layer(r));
    }
    if (!r.ok()) {
        throw StorageError("model file: truncated layer list");
    }
    Model model = [&] {
        try {
            return Model(std::move(input), std::move(layers));
        } catch (const ShapeError& err) {
            throw StorageError(std::string("model file: invalid layer stack: ") + err.what());
        }
    }();
    const auto n_tensors = r.get<std::uint32_t>();
    if (n_tensors != model.parameters().size()) {
        throw StorageError("model file: parameter tensor count mismatch");
    }
    for (auto& param : model.parameters()) {
        if (get_shape(r) != param.shape()) {
            throw StorageError("model file: parameter shape mismatch");
        }
        for (auto& v : param.data()) {
            v = r.get<double>();
            if (!std::isfinite(v)) {
                throw StorageError("model file: non-finite parameter");
            }
        }
    }
    if (!r.ok()) {
        throw StorageError("model file: truncated parameter data");
    }
    if (r.remaining() != 0) {
        throw StorageError("model file: trailing bytes");
    }
    return model;
}

void save_model(const Model& model, const std::filesystem::path& path)
{
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw StorageError("cannot write model file " + path.string());
    }
}

Model load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw StorageError("cannot read model file " + path.string());
    }
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return deserialize_model(bytes);
}

} // namespace roadsafe::nn
