#include "roadsafe/server/http.hpp"

#include "roadsafe/domain/wire.hpp"
#include "roadsafe/error.hpp"
#include "roadsafe/server/api_json.hpp"

#include <httplib.h>
#include <json.hpp>

#include <charconv>

namespace roadsafe::server {

using nlohmann::json;

int http_status_for(const std::exception& e) noexcept
{
    if (dynamic_cast<const AuthError*>(&e)) return 401;
    if (dynamic_cast<const NotFoundError*>(&e)) return 404;
    if (dynamic_cast<const ConflictError*>(&e)) return 409;
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const DecodeError*>(&e) ||
        dynamic_cast<const GeoError*>(&e) || dynamic_cast<const json::exception*>(&e))
        return 400;
    return 500;
}

namespace {

std::string bearer(const httplib::Request& req)
{
    auto h = req.get_header_value("Authorization");
    constexpr std::string_view prefix = "Bearer ";
    if (h.size() <= prefix.size() || h.compare(0, prefix.size(), prefix) != 0) throw AuthError("missing bearer token");
    return h.substr(prefix.size());
}

void reply(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req)
{
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw DecodeError("$", e.what());
    }
}

template <class T>
T json_field(const json& j, const char* name)
{
    if (!j.is_object() || !j.contains(name)) throw DecodeError(name, "missing");
    try {
        return j.at(name).get<T>();
    } catch (const json::exception& e) {
        throw DecodeError(name, e.what());
    }
}

std::int64_t parse_id(const std::string& text)
{
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) throw ValidationError("bad id '" + text + "'");
    return v;
}

EventQuery query_from(const httplib::Request& req)
{
    EventQuery q;
    if (req.has_param("from")) q.from = parse_iso8601(req.get_param_value("from"));
    if (req.has_param("to")) q.to = parse_iso8601(req.get_param_value("to"));
    if (req.has_param("cursor")) q.after = EventCursor::decode(req.get_param_value("cursor"));
    if (req.has_param("limit")) {
        auto v = parse_id(req.get_param_value("limit"));
        if (v <= 0 || v > 10'000) throw ValidationError("limit must be in [1, 10000]");
        q.limit = static_cast<std::size_t>(v);
    }
    return q;
}

} // namespace

struct HttpServer::Impl {
    Service& service;
    httplib::Server server;

    explicit Impl(Service& s) : service(s) {}

    template <class F>
    auto guarded(F fn)
    {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const std::exception& e) {
                reply(res, http_status_for(e), {{"error", e.what()}});
            }
        };
    }

    void routes()
    {
        server.Post("/login", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto body = parse_body(req);
            auto tok = service.login(json_field<std::string>(body, "username"), json_field<std::string>(body, "password"));
            reply(res, 200, {{"token", tok.token}, {"driver_id", tok.driver_id}, {"expires", to_iso8601(tok.expiry)}});
        }));

        server.Post("/trips", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto token = bearer(req);
            auto body = parse_body(req);
            CreateTripRequest r;
            if (body.contains("trip_id") && !body["trip_id"].is_null()) r.trip_id = json_field<std::string>(body, "trip_id");
            r.vehicle_id = json_field<VehicleId>(body, "vehicle_id");
            r.start_ts = parse_iso8601(json_field<std::string>(body, "start_ts"));
            if (body.contains("start_position") && !body["start_position"].is_null()) {
                const auto& p = body["start_position"];
                r.start_position = GeoPoint(json_field<double>(p, "lat"), json_field<double>(p, "lon"));
            }
            reply(res, 201, trip_to_json(service.create_trip(token, r)));
        }));

        server.Post(R"(/trips/([^/]+)/events)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto token = bearer(req);
            auto body = parse_body(req);
            auto items = json_field<json>(body, "events");
            if (!items.is_array()) throw DecodeError("events", "not an array");
            std::vector<TelemetryEvent> batch;
            std::vector<std::pair<EventId, std::string>> undecodable;
            for (const auto& item : items) {
                try {
                    batch.push_back(event_from_json(item));
                } catch (const std::exception& e) {
                    EventId id;
                    try {
                        id = EventId::parse(item.at("event_id").get<std::string>());
                    } catch (const std::exception&) {
                    }
                    undecodable.emplace_back(id, e.what());
                }
            }
            auto result = service.ingest_events(token, req.matches[1], batch);
            result.rejected.insert(result.rejected.end(), undecodable.begin(), undecodable.end());
            reply(res, 200, ingest_to_json(result));
        }));

        server.Post(R"(/trips/([^/]+)/end)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto token = bearer(req);
            auto body = parse_body(req);
            EndTripRequest r;
            r.end_ts = parse_iso8601(json_field<std::string>(body, "end_ts"));
            r.distance_m = json_field<double>(body, "distance_m");
            r.speed_min_mps = json_field<double>(body, "speed_min_mps");
            r.speed_avg_mps = json_field<double>(body, "speed_avg_mps");
            r.speed_max_mps = json_field<double>(body, "speed_max_mps");
            reply(res, 200, trip_to_json(service.end_trip(token, req.matches[1], r)));
        }));

        server.Get("/trips", guarded([this](const httplib::Request& req, httplib::Response& res) {
            json trips = json::array();
            for (const auto& t : service.list_trips(bearer(req))) trips.push_back(trip_to_json(t));
            reply(res, 200, {{"trips", trips}});
        }));

        server.Get(R"(/trips/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            reply(res, 200, trip_to_json(service.get_trip(bearer(req), req.matches[1])));
        }));

        server.Get(R"(/trips/([^/]+)/events)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto token = bearer(req);
            reply(res, 200, page_to_json(service.list_events(token, req.matches[1], query_from(req))));
        }));

        server.Get(R"(/segments/([^/]+)/risk)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto token = bearer(req);
            reply(res, 200, risk_to_json(service.segment_risk(token, parse_id(req.matches[1]))));
        }));
    }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service))
{
    impl_->routes();
}

HttpServer::~HttpServer()
{
    stop();
}

int HttpServer::bind(const std::string& host, int port)
{
    int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::run()
{
    impl_->server.listen_after_bind();
}

void HttpServer::stop()
{
    if (impl_->server.is_running()) impl_->server.stop();
}

struct HttpClient::Impl {
    httplib::Client client;

    Impl(const std::string& base, int timeout_s) : client(base)
    {
        client.set_connection_timeout(timeout_s, 0);
        client.set_read_timeout(timeout_s, 0);
        client.set_write_timeout(timeout_s, 0);
        client.set_keep_alive(true);
    }
};

HttpClient::HttpClient(const std::string& base_url, int timeout_s)
    : impl_(std::make_unique<Impl>(base_url, timeout_s))
{
    if (!impl_->client.is_valid()) throw ConfigError("invalid endpoint '" + base_url + "'");
}

HttpClient::~HttpClient() = default;

namespace {

json check(const httplib::Result& res)
{
    if (!res) throw TransportError("no response: " + httplib::to_string(res.error()));
    json body;
    try {
        body = json::parse(res->body);
    } catch (const json::parse_error&) {
        body = json::object();
    }
    int st = res->status;
    if (st >= 200 && st < 300) return body;
    std::string msg = body.is_object() && body.contains("error") ? body["error"].get<std::string>()
                                                                 : "HTTP " + std::to_string(st);
    switch (st) {
    case 401: throw AuthError(msg);
    case 404: throw NotFoundError(msg);
    case 409: throw ConflictError(msg);
    case 400: throw ValidationError(msg);
    default: throw Error("server error " + std::to_string(st) + ": " + msg);
    }
}

httplib::Headers auth_headers(const std::string& token)
{
    return {{"Authorization", "Bearer " + token}};
}

} // namespace

SessionToken HttpClient::login(const std::string& username, const std::string& password)
{
    json body = {{"username", username}, {"password", password}};
    auto j = check(impl_->client.Post("/login", body.dump(), "application/json"));
    SessionToken tok{json_field<std::string>(j, "token"), json_field<DriverId>(j, "driver_id"),
                     parse_iso8601(json_field<std::string>(j, "expires"))};
    token_ = tok.token;
    return tok;
}

TripRecord HttpClient::create_trip(const CreateTripRequest& req)
{
    json body = {{"vehicle_id", req.vehicle_id}, {"start_ts", to_iso8601(req.start_ts)}};
    if (req.trip_id) body["trip_id"] = *req.trip_id;
    if (req.start_position) body["start_position"] = {{"lat", req.start_position->lat()}, {"lon", req.start_position->lon()}};
    return trip_from_json(check(impl_->client.Post("/trips", auth_headers(token_), body.dump(), "application/json")));
}

TripRecord HttpClient::end_trip(const TripId& id, const EndTripRequest& req)
{
    json body = {{"end_ts", to_iso8601(req.end_ts)},
                 {"distance_m", req.distance_m},
                 {"speed_min_mps", req.speed_min_mps},
                 {"speed_avg_mps", req.speed_avg_mps},
                 {"speed_max_mps", req.speed_max_mps}};
    return trip_from_json(
        check(impl_->client.Post(("/trips/" + id + "/end").c_str(), auth_headers(token_), body.dump(), "application/json")));
}

transport::IngestResult HttpClient::post_events(const TripId& id, std::span<const TelemetryEvent> batch)
{
    json events = json::array();
    for (const auto& e : batch) events.push_back(event_to_json(e));
    json body = {{"events", events}};
    return ingest_from_json(check(
        impl_->client.Post(("/trips/" + id + "/events").c_str(), auth_headers(token_), body.dump(), "application/json")));
}

std::vector<TripRecord> HttpClient::list_trips()
{
    auto j = check(impl_->client.Get("/trips", auth_headers(token_)));
    std::vector<TripRecord> out;
    for (const auto& t : json_field<json>(j, "trips")) out.push_back(trip_from_json(t));
    return out;
}

TripRecord HttpClient::get_trip(const TripId& id)
{
    return trip_from_json(check(impl_->client.Get(("/trips/" + id).c_str(), auth_headers(token_))));
}

EventPage HttpClient::list_events(const TripId& id, const EventQuery& query)
{
    httplib::Params params;
    if (query.from) params.emplace("from", to_iso8601(*query.from));
    if (query.to) params.emplace("to", to_iso8601(*query.to));
    if (query.after) params.emplace("cursor", query.after->encode());
    params.emplace("limit", std::to_string(query.limit));
    return page_from_json(check(impl_->client.Get(("/trips/" + id + "/events").c_str(), params, auth_headers(token_))));
}

std::vector<TelemetryEvent> HttpClient::all_events(const TripId& id)
{
    std::vector<TelemetryEvent> out;
    EventQuery q;
    q.limit = 500;
    for (;;) {
        auto page = list_events(id, q);
        out.insert(out.end(), page.events.begin(), page.events.end());
        if (!page.next) return out;
        q.after = page.next;
    }
}

SegmentRisk HttpClient::segment_risk(SegmentId id)
{
    return risk_from_json(check(impl_->client.Get(("/segments/" + std::to_string(id) + "/risk").c_str(), auth_headers(token_))));
}

transport::SendOutcome HttpEndpoint::post_events(const TripId& trip_id, std::span<const TelemetryEvent> batch)
{
    transport::SendOutcome out;
    try {
        out.result = client_.post_events(trip_id, batch);
    } catch (const NotFoundError& e) {
        out.status = transport::SendStatus::rejected;
        out.error = e.what();
    } catch (const ConflictError& e) {
        out.status = transport::SendStatus::rejected;
        out.error = e.what();
    } catch (const ValidationError& e) {
        out.status = transport::SendStatus::rejected;
        out.error = e.what();
    } catch (const std::exception& e) {
        out.status = transport::SendStatus::transient;
        out.error = e.what();
    }
    return out;
}

} // namespace roadsafe::server
