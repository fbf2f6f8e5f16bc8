#include "roadsafe/cli/dataset.hpp"

#include "roadsafe/error.hpp"
#include "roadsafe/util/bytes.hpp"
#include "roadsafe/util/rng.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

namespace roadsafe::cli {

nn::ScenarioGroups synth_dataset(std::size_t per_scenario, int side, std::uint64_t seed)
{
    nn::ScenarioGroups groups;
    for (auto s : sim::kAllScenarios) {
        auto& g = groups[s];
        g.reserve(per_scenario);
        for (std::size_t i = 0; i < per_scenario; ++i) {
            bool drowsy = i % 2 == 1;
            auto fseed = hash_combine(hash_combine(seed, static_cast<std::uint64_t>(s) + 1), i);
            g.push_back({sim::synth_frame(drowsy, s, fseed, side), drowsy ? nn::kDrowsyClass : nn::kAlertClass, s});
        }
    }
    return groups;
}

std::vector<nn::LabeledFrame> pooled(const nn::ScenarioGroups& groups)
{
    std::vector<nn::LabeledFrame> out;
    for (const auto& [s, g] : groups) out.insert(out.end(), g.begin(), g.end());
    return out;
}

std::string dataset_filename(sim::Scenario s)
{
    return std::string(sim::to_string(s)) + ".frames";
}

void write_frames(const std::filesystem::path& file, std::span<const nn::LabeledFrame> frames)
{
    ByteWriter w;
    int side = frames.empty() ? 0 : frames.front().frame.side();
    w.put<std::uint32_t>(static_cast<std::uint32_t>(frames.size()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(side));
    for (const auto& f : frames) {
        if (f.frame.side() != side) throw ShapeError("frames in one file must share a side");
        for (double p : f.frame.pixels()) w.put<std::uint8_t>(static_cast<std::uint8_t>(std::lround(p * 255.0)));
        w.put<std::uint8_t>(static_cast<std::uint8_t>(f.label));
    }
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw Error("cannot write " + file.string());
}

std::vector<nn::LabeledFrame> read_frames(const std::filesystem::path& file, sim::Scenario scenario)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot read " + file.string());
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), {}};
    ByteReader r(bytes);
    auto count = r.get<std::uint32_t>();
    auto side = r.get<std::uint32_t>();
    if (!r.ok()) throw ValidationError(file.string() + ": truncated header");
    if (count > 0 && (side == 0 || side > 4096)) throw ValidationError(file.string() + ": bad side");
    std::size_t px = static_cast<std::size_t>(side) * side;
    if (bytes.size() != 8 + static_cast<std::size_t>(count) * (px + 1))
        throw ValidationError(file.string() + ": size does not match header");
    std::vector<nn::LabeledFrame> out;
    out.reserve(count);
    std::vector<double> pixels(px);
    for (std::uint32_t i = 0; i < count; ++i) {
        for (auto& p : pixels) p = r.get<std::uint8_t>() / 255.0;
        auto label = r.get<std::uint8_t>();
        if (label > 1) throw ValidationError(file.string() + ": label must be 0 or 1");
        out.push_back({sim::Frame(static_cast<int>(side), pixels), label, scenario});
    }
    return out;
}

void write_dataset(const std::filesystem::path& dir, const nn::ScenarioGroups& groups)
{
    std::filesystem::create_directories(dir);
    for (const auto& [s, g] : groups) write_frames(dir / dataset_filename(s), g);
}

nn::ScenarioGroups load_dataset(const std::filesystem::path& dir)
{
    nn::ScenarioGroups groups;
    for (auto s : sim::kAllScenarios) {
        auto file = dir / dataset_filename(s);
        if (!std::filesystem::exists(file)) continue;
        auto frames = read_frames(file, s);
        if (frames.empty()) throw ValidationError(file.string() + ": no frames");
        groups[s] = std::move(frames);
    }
    if (groups.empty()) throw ValidationError("no scenario frame files in " + dir.string());
    return groups;
}

} // namespace roadsafe::cli
