#include "roadsafe/cli/app.hpp"

#include "roadsafe/cli/dataset.hpp"
#include "roadsafe/cli/fleet.hpp"
#include "roadsafe/cli/report.hpp"
#include "roadsafe/error.hpp"
#include "roadsafe/neuralnet/algorithm1.hpp"
#include "roadsafe/neuralnet/cnn_classifier.hpp"
#include "roadsafe/neuralnet/model_io.hpp"
#include "roadsafe/server/http.hpp"
#include "roadsafe/util/kv_config.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <pthread.h>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace roadsafe::cli {

namespace {

struct Globals {
    std::string config_path;
    std::uint64_t seed = 1;
    std::string endpoint;
    std::string storage;
    bool seed_set = false;
};

KvConfig load_config(const Globals& g)
{
    KvConfig cfg;
    if (!g.config_path.empty()) cfg = KvConfig::load(g.config_path);
    cfg.overlay_env("ROADSAFE", {"storage", "endpoint", "listen_host", "listen_port", "token_ttl_s", "match_radius_m",
                                 "password", "username"});
    return cfg;
}

std::string storage_of(const Globals& g, const KvConfig& cfg, const std::string& fallback)
{
    return g.storage.empty() ? cfg.get_string("storage", fallback) : g.storage;
}

std::string endpoint_of(const Globals& g, const KvConfig& cfg)
{
    return g.endpoint.empty() ? cfg.get_string("endpoint", "") : g.endpoint;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw Error("cannot write " + path);
}

std::unique_ptr<nn::DrowsinessClassifier> classifier_from(const std::string& model_path)
{
    if (model_path.empty()) return std::make_unique<nn::EyeRegionBaseline>();
    return std::make_unique<nn::CnnClassifier>(nn::load_model(model_path));
}

/// Trip plus events, either from a local store or through the HTTP API.
std::pair<server::TripRecord, std::vector<TelemetryEvent>> fetch_trip(const Globals& g, const KvConfig& cfg,
                                                                      const TripId& id, const std::string& username,
                                                                      const std::string& password)
{
    auto endpoint = endpoint_of(g, cfg);
    if (!endpoint.empty()) {
        server::HttpClient client(endpoint);
        (void)client.login(username.empty() ? cfg.get_string("username", "") : username,
                           password.empty() ? cfg.get_string("password", "") : password);
        auto trip = client.get_trip(id);
        return {trip, client.all_events(id)};
    }
    auto path = storage_of(g, cfg, "");
    if (path.empty()) throw ConfigError("report needs --storage or --endpoint");
    server::Store store(path);
    auto trip = store.trip(id);
    if (!trip) throw NotFoundError("trip " + id + " not found");
    return {*trip, store.trip_events(id)};
}

std::vector<transport::OutageWindow> parse_outages(const std::vector<std::string>& specs, Timestamp start)
{
    std::vector<transport::OutageWindow> out;
    for (const auto& s : specs) {
        auto colon = s.find(':');
        if (colon == std::string::npos) throw ConfigError("outage must be START_S:END_S, got '" + s + "'");
        try {
            auto a = std::stoll(s.substr(0, colon));
            auto b = std::stoll(s.substr(colon + 1));
            out.push_back({start.plus_ms(a * 1000), start.plus_ms(b * 1000)});
        } catch (const std::logic_error&) {
            throw ConfigError("outage must be START_S:END_S, got '" + s + "'");
        }
    }
    return out;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Connected-vehicle telemetry, drowsiness detection and road-risk analytics"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config_path, "flat key = value config file");
    app.add_option("--seed", g.seed, "seed for every random choice")->each([&](const std::string&) { g.seed_set = true; });
    app.add_option("--endpoint", g.endpoint, "server base URL, e.g. http://127.0.0.1:8080");
    app.add_option("--storage", g.storage, "SQLite database path");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "run a simulated fleet end to end");
    std::size_t drivers = 1;
    std::int64_t duration = 300;
    double loss = 0.0;
    std::int64_t latency = 0;
    std::vector<std::string> outages;
    std::size_t batch = transport::kDefaultBatchSize;
    std::string model_path, outbox_dir, route_path;
    sim_cmd->add_option("--drivers", drivers, "number of agents")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--duration", duration, "trip length in seconds")->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--loss", loss, "link loss probability")->check(CLI::Range(0.0, 1.0));
    sim_cmd->add_option("--latency-ms", latency, "one-way link latency")->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--outage", outages, "outage window START_S:END_S relative to trip start (repeatable)");
    sim_cmd->add_option("--batch", batch, "events per request")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--model", model_path, "trained model file (default: eye-region baseline)");
    sim_cmd->add_option("--outbox-dir", outbox_dir, "keep outbox logs here");
    sim_cmd->add_option("--route", route_path, "route file, one 'lat,lon' per line");

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "run the HTTP ingestion service");
    std::string host;
    int port = -1;
    serve_cmd->add_option("--host", host, "listen address (default 127.0.0.1)");
    serve_cmd->add_option("--port", port, "listen port (default 8080, 0 = any)");

    // train / eval / synth-frames
    auto* train_cmd = app.add_subcommand("train", "train the drowsiness CNN on a frame dataset");
    std::string data_dir, model_out;
    int epochs = 12;
    double lr = 0.05;
    std::size_t train_batch = 16;
    std::string padding = "same";
    train_cmd->add_option("--data", data_dir, "dataset directory")->required();
    train_cmd->add_option("--out", model_out, "model file to write")->required();
    train_cmd->add_option("--epochs", epochs)->check(CLI::PositiveNumber);
    train_cmd->add_option("--lr", lr)->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--batch", train_batch)->check(CLI::PositiveNumber);
    train_cmd->add_option("--padding", padding, "conv padding")->check(CLI::IsMember({"same", "valid"}));

    auto* eval_cmd = app.add_subcommand("eval", "print per-scenario accuracy");
    std::string eval_data, eval_model;
    eval_cmd->add_option("--data", eval_data, "dataset directory")->required();
    eval_cmd->add_option("--model", eval_model, "model file (default: eye-region baseline)");

    auto* synth_cmd = app.add_subcommand("synth-frames", "write a synthetic five-scenario frame dataset");
    std::string synth_out;
    std::size_t per_scenario = 2000;
    int side = sim::kDefaultFrameSide;
    synth_cmd->add_option("--out", synth_out, "dataset directory")->required();
    synth_cmd->add_option("--per-scenario", per_scenario)->check(CLI::PositiveNumber);
    synth_cmd->add_option("--side", side)->check(CLI::PositiveNumber);

    // report / export / import
    auto* report_cmd = app.add_subcommand("report", "print a trip's events and summary");
    auto* export_cmd = app.add_subcommand("export-geojson", "write a trip as GeoJSON");
    std::string trip_id, out_path, username, password;
    for (auto* c : {report_cmd, export_cmd}) {
        c->add_option("trip_id", trip_id)->required();
        c->add_option("--out", out_path, "output file (default stdout)");
        c->add_option("--username", username, "login for --endpoint");
        c->add_option("--password", password, "login for --endpoint");
    }

    auto* import_cmd = app.add_subcommand("import", "bulk-load CSV into the store");
    std::string kind, csv_path;
    import_cmd->add_option("kind", kind)->required()->check(
        CLI::IsMember({"drivers", "vehicles", "roads", "segments", "crashes"}));
    import_cmd->add_option("file", csv_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        auto cfg = load_config(g);
        if (!g.seed_set) g.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));

        if (*sim_cmd) {
            FleetRun run;
            run.drivers = drivers;
            run.duration_s = duration;
            run.seed = g.seed;
            run.batch_size = batch;
            run.outbox_dir = outbox_dir;
            run.link.loss_probability = loss;
            run.link.latency_ms = latency;
            run.link.seed = g.seed;
            run.link.outages = parse_outages(outages, run.start_ts);
            if (!route_path.empty()) run.route = sim::load_route(route_path);
            bool has_profile = false;
            for (const auto& [k, v] : cfg.values()) has_profile |= k.rfind("profile.", 0) == 0;
            if (has_profile) run.profiles.push_back(sim::DrivingProfile::from_config(cfg, "profile."));
            auto classifier = classifier_from(model_path);
            auto password = cfg.get_string("password", "roadsafe");

            FleetSummary summary;
            auto endpoint = endpoint_of(g, cfg);
            if (!endpoint.empty()) {
                HttpBackend backend(endpoint, password);
                summary = run_fleet(run, *classifier, backend);
            } else {
                server::Store store(storage_of(g, cfg, ":memory:"));
                server::Service service(store, server::ServiceConfig::from_config(cfg));
                ServiceBackend backend(service, password);
                summary = run_fleet(run, *classifier, backend);
            }
            out << render_summary(summary);
            return summary.lost() == 0 ? kExitOk : kExitData;
        }

        if (*serve_cmd) {
            auto store_path = storage_of(g, cfg, "roadsafe.db");
            server::Store store(store_path);
            server::Service service(store, server::ServiceConfig::from_config(cfg));
            server::HttpServer http(service);
            auto h = host.empty() ? cfg.get_string("listen_host", "127.0.0.1") : host;
            auto p = port >= 0 ? port : static_cast<int>(cfg.get_int("listen_port", 8080));
            int bound = http.bind(h, p);
            out << "listening on http://" << h << ":" << bound << " (storage " << store_path << ")" << std::endl;
            // Signals are taken by a waiter thread so the handler context never touches the server.
            sigset_t set;
            sigemptyset(&set);
            sigaddset(&set, SIGINT);
            sigaddset(&set, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &set, nullptr);
            std::thread waiter([&] {
                int sig = 0;
                sigwait(&set, &sig);
                http.stop();
            });
            http.run();
            if (waiter.joinable()) {
                pthread_kill(waiter.native_handle(), SIGTERM);
                waiter.join();
            }
            return kExitOk;
        }

        if (*synth_cmd) {
            write_dataset(synth_out, synth_dataset(per_scenario, side, g.seed));
            out << "wrote " << per_scenario << " frames per scenario to " << synth_out << '\n';
            return kExitOk;
        }

        if (*train_cmd) {
            auto groups = load_dataset(data_dir);
            auto frames = pooled(groups);
            auto s = static_cast<std::size_t>(frames.front().frame.side());
            auto model = nn::algorithm1_spec(s, 2, padding == "same" ? nn::Padding::same : nn::Padding::valid);
            model.initialize(g.seed);
            nn::TrainConfig tc;
            tc.learning_rate = lr;
            tc.epochs = epochs;
            tc.batch_size = train_batch;
            tc.seed = g.seed;
            tc.track_accuracy = false;
            auto result = nn::train(std::move(model), frames, tc, [&](const nn::EpochStats& e) {
                out << "epoch " << e.epoch << " loss " << e.loss << std::endl;
            });
            nn::save_model(result.model, model_out);
            out << "saved " << model_out << '\n';
            return kExitOk;
        }

        if (*eval_cmd) {
            auto groups = load_dataset(eval_data);
            auto classifier = classifier_from(eval_model);
            out << nn::render_accuracy_table(nn::evaluate(*classifier, groups));
            return kExitOk;
        }

        if (*report_cmd) {
            auto [trip, events] = fetch_trip(g, cfg, trip_id, username, password);
            write_text(out_path, render_report(make_report(trip, std::move(events))), out);
            return kExitOk;
        }

        if (*export_cmd) {
            auto [trip, events] = fetch_trip(g, cfg, trip_id, username, password);
            auto report = make_report(trip, std::move(events));
            write_text(out_path, export_geojson(trip_id, report.events).dump(2) + "\n", out);
            return kExitOk;
        }

        if (*import_cmd) {
            auto path = storage_of(g, cfg, "");
            if (path.empty()) throw ConfigError("import needs --storage");
            server::Store store(path);
            server::Service service(store, server::ServiceConfig::from_config(cfg));
            auto n = service.import_csv(server::parse_import_kind(kind), read_file(csv_path));
            out << "imported " << n << " " << kind << '\n';
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const DecodeError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const ShapeError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const NotFoundError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const ConflictError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const AuthError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitUsage;
}

} // namespace roadsafe::cli
