#include "roadsafe/server/store.hpp"

#include "roadsafe/error.hpp"

#include <json.hpp>
#include <sqlite3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace roadsafe::server {

double TripRecord::discrepancy_ratio() const noexcept
{
    double c = trip.distance_m;
    double s = server_distance_m;
    double m = std::max(c, s);
    if (m <= 0.0) return 0.0;
    return std::abs(c - s) / m;
}

std::string EventCursor::encode() const
{
    return std::to_string(ts.ms) + ":" + event_id;
}

EventCursor EventCursor::decode(std::string_view text)
{
    auto colon = text.find(':');
    if (colon == std::string_view::npos || colon == 0) throw ValidationError("malformed cursor");
    std::int64_t ms = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + colon, ms);
    if (ec != std::errc{} || p != text.data() + colon) throw ValidationError("malformed cursor");
    auto id = text.substr(colon + 1);
    (void)EventId::parse(id);
    return {Timestamp{ms}, std::string(id)};
}

// Thin RAII statement wrapper; binds are 1-based like SQLite itself.
class Store::Statement {
public:
    Statement(sqlite3* db, const char* sql) : db_(db)
    {
        if (sqlite3_prepare_v2(db, sql, -1, &st_, nullptr) != SQLITE_OK)
            throw StorageError(std::string("prepare failed: ") + sqlite3_errmsg(db));
    }
    ~Statement() { sqlite3_finalize(st_); }
    Statement(const Statement&) = delete;
    Statement& operator=(const Statement&) = delete;

    Statement& bind(int i, std::int64_t v) { check(sqlite3_bind_int64(st_, i, v)); return *this; }
    Statement& bind(int i, int v) { return bind(i, static_cast<std::int64_t>(v)); }
    Statement& bind(int i, double v) { check(sqlite3_bind_double(st_, i, v)); return *this; }
    Statement& bind(int i, const std::string& v)
    {
        check(sqlite3_bind_text(st_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
        return *this;
    }
    Statement& bind_null(int i) { check(sqlite3_bind_null(st_, i)); return *this; }

    /// True while rows remain.
    bool step()
    {
        int rc = sqlite3_step(st_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        int ext = sqlite3_extended_errcode(db_);
        std::string msg = sqlite3_errmsg(db_);
        if ((ext & 0xff) == SQLITE_CONSTRAINT) {
            if (ext == SQLITE_CONSTRAINT_FOREIGNKEY) throw NotFoundError("referenced row missing: " + msg);
            throw ConflictError("constraint violated: " + msg);
        }
        throw StorageError("step failed: " + msg);
    }

    void run() { (void)step(); }

    [[nodiscard]] std::int64_t i64(int c) const { return sqlite3_column_int64(st_, c); }
    [[nodiscard]] double f64(int c) const { return sqlite3_column_double(st_, c); }
    [[nodiscard]] bool is_null(int c) const { return sqlite3_column_type(st_, c) == SQLITE_NULL; }
    [[nodiscard]] std::string text(int c) const
    {
        auto p = sqlite3_column_text(st_, c);
        return p ? std::string(reinterpret_cast<const char*>(p), static_cast<std::size_t>(sqlite3_column_bytes(st_, c)))
                 : std::string();
    }

private:
    void check(int rc)
    {
        if (rc != SQLITE_OK) throw StorageError(std::string("bind failed: ") + sqlite3_errmsg(db_));
    }

    sqlite3* db_;
    sqlite3_stmt* st_ = nullptr;
};

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS Driver (
    driver_id INTEGER PRIMARY KEY,
    age INTEGER NOT NULL,
    gender TEXT NOT NULL,
    username TEXT UNIQUE,
    salt TEXT,
    password_hash TEXT
);
CREATE TABLE IF NOT EXISTS Vehicle (
    vehicle_id INTEGER PRIMARY KEY,
    model TEXT NOT NULL,
    in_service_date TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS Road (
    road_id INTEGER PRIMARY KEY,
    name TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS SegmentRoad (
    segment_id INTEGER PRIMARY KEY,
    road_id INTEGER NOT NULL REFERENCES Road(road_id),
    polyline TEXT NOT NULL,
    attributes TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS Crashes (
    crash_id INTEGER PRIMARY KEY,
    segment_id INTEGER NOT NULL REFERENCES SegmentRoad(segment_id),
    ts INTEGER NOT NULL,
    severity TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS Trip (
    trip_id TEXT PRIMARY KEY,
    driver_id INTEGER NOT NULL REFERENCES Driver(driver_id),
    vehicle_id INTEGER NOT NULL REFERENCES Vehicle(vehicle_id),
    start_ts INTEGER NOT NULL,
    end_ts INTEGER,
    start_lat REAL,
    start_lon REAL,
    distance_m REAL NOT NULL DEFAULT 0,
    speed_min_mps REAL NOT NULL DEFAULT 0,
    speed_avg_mps REAL NOT NULL DEFAULT 0,
    speed_max_mps REAL NOT NULL DEFAULT 0,
    server_distance_m REAL NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS Events (
    event_id TEXT PRIMARY KEY,
    trip_id TEXT NOT NULL REFERENCES Trip(trip_id),
    ts INTEGER NOT NULL,
    lat REAL NOT NULL,
    lon REAL NOT NULL,
    gps_accuracy_m REAL NOT NULL,
    speed_mps REAL NOT NULL,
    heading_deg REAL NOT NULL,
    speed_min_mps REAL NOT NULL,
    speed_avg_mps REAL NOT NULL,
    speed_max_mps REAL NOT NULL,
    accel_mps2 REAL NOT NULL,
    roll_dps REAL NOT NULL,
    pitch_dps REAL NOT NULL,
    yaw_dps REAL NOT NULL,
    drowsiness_score REAL NOT NULL,
    drowsy INTEGER NOT NULL,
    segment_id INTEGER REFERENCES SegmentRoad(segment_id)
);
CREATE INDEX IF NOT EXISTS events_trip_ts ON Events(trip_id, ts, event_id);
CREATE INDEX IF NOT EXISTS events_segment ON Events(segment_id, trip_id);
CREATE INDEX IF NOT EXISTS trip_driver ON Trip(driver_id, start_ts);
)sql";

std::string encode_polyline(const std::vector<GeoPoint>& pts)
{
    std::string out;
    char buf[64];
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.17g %.17g", i ? ";" : "", pts[i].lat(), pts[i].lon());
        out += buf;
    }
    return out;
}

std::vector<GeoPoint> decode_polyline(const std::string& text)
{
    std::vector<GeoPoint> pts;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find(';', pos);
        if (end == std::string::npos) end = text.size();
        double lat = 0, lon = 0;
        if (std::sscanf(text.substr(pos, end - pos).c_str(), "%lf %lf", &lat, &lon) != 2)
            throw StorageError("corrupt polyline in store");
        pts.emplace_back(lat, lon);
        pos = end + 1;
    }
    return pts;
}

constexpr const char* kEventColumns =
    "event_id, trip_id, ts, lat, lon, gps_accuracy_m, speed_mps, heading_deg, speed_min_mps, "
    "speed_avg_mps, speed_max_mps, accel_mps2, roll_dps, pitch_dps, yaw_dps, drowsiness_score, drowsy, segment_id";

template <class St>
StoredEvent read_event(const St& st)
{
    StoredEvent s;
    auto& e = s.event;
    e.event_id = EventId::parse(st.text(0));
    e.trip_id = st.text(1);
    e.ts = Timestamp{st.i64(2)};
    e.position = GeoPoint(st.f64(3), st.f64(4));
    e.gps_accuracy_m = st.f64(5);
    e.speed_mps = st.f64(6);
    e.heading_deg = st.f64(7);
    e.speed_min_mps = st.f64(8);
    e.speed_avg_mps = st.f64(9);
    e.speed_max_mps = st.f64(10);
    e.accel_mps2 = st.f64(11);
    e.roll_dps = st.f64(12);
    e.pitch_dps = st.f64(13);
    e.yaw_dps = st.f64(14);
    e.drowsiness_score = st.f64(15);
    e.drowsy = st.i64(16) != 0;
    if (!st.is_null(17)) s.segment_id = st.i64(17);
    return s;
}

constexpr const char* kTripColumns =
    "trip_id, driver_id, vehicle_id, start_ts, end_ts, start_lat, start_lon, distance_m, speed_min_mps, "
    "speed_avg_mps, speed_max_mps, server_distance_m, "
    "(SELECT COUNT(*) FROM Events e WHERE e.trip_id = Trip.trip_id)";

template <class St>
TripRecord read_trip(const St& st)
{
    TripRecord r;
    r.trip.trip_id = st.text(0);
    r.trip.driver_id = st.i64(1);
    r.trip.vehicle_id = st.i64(2);
    r.trip.start_ts = Timestamp{st.i64(3)};
    if (!st.is_null(4)) r.trip.end_ts = Timestamp{st.i64(4)};
    if (!st.is_null(5) && !st.is_null(6)) r.start_position = GeoPoint(st.f64(5), st.f64(6));
    r.trip.distance_m = st.f64(7);
    r.trip.speed_min_mps = st.f64(8);
    r.trip.speed_avg_mps = st.f64(9);
    r.trip.speed_max_mps = st.f64(10);
    r.server_distance_m = st.f64(11);
    r.event_count = static_cast<std::size_t>(st.i64(12));
    return r;
}

} // namespace

Store::Store(const std::string& path)
{
    if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                        nullptr) != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        throw StorageError("cannot open store '" + path + "': " + msg);
    }
    sqlite3_busy_timeout(db_, 5000);
    exec("PRAGMA foreign_keys = ON;");
    if (path != ":memory:") exec("PRAGMA journal_mode = WAL; PRAGMA synchronous = FULL;");
    exec(kSchema);
}

Store::~Store()
{
    sqlite3_close(db_);
}

void Store::exec(const char* sql) const
{
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown";
        sqlite3_free(err);
        throw StorageError("sql failed: " + msg);
    }
}

void Store::upsert_driver(const Driver& d)
{
    std::lock_guard lk(mu_);
    Statement st(db_, "INSERT INTO Driver(driver_id, age, gender) VALUES(?,?,?) "
                      "ON CONFLICT(driver_id) DO UPDATE SET age=excluded.age, gender=excluded.gender");
    st.bind(1, d.driver_id).bind(2, d.age).bind(3, std::string(to_string(d.gender))).run();
}

void Store::set_credentials(const Credentials& c)
{
    std::lock_guard lk(mu_);
    Statement st(db_, "UPDATE Driver SET username=?, salt=?, password_hash=? WHERE driver_id=?");
    st.bind(1, c.username).bind(2, c.salt_hex).bind(3, c.hash_hex).bind(4, c.driver_id).run();
    if (sqlite3_changes(db_) == 0) throw NotFoundError("driver " + std::to_string(c.driver_id) + " not found");
}

std::optional<Driver> Store::driver(DriverId id) const
{
    std::lock_guard lk(mu_);
    Statement st(db_, "SELECT driver_id, age, gender FROM Driver WHERE driver_id=?");
    st.bind(1, id);
    if (!st.step()) return std::nullopt;
    return Driver{st.i64(0), static_cast<int>(st.i64(1)), parse_gender(st.text(2))};
}

std::optional<Credentials> Store::credentials(const std::string& username) const
{
    std::lock_guard lk(mu_);
    Statement st(db_, "SELECT driver_id, username, salt, password_hash FROM Driver WHERE username=?");
    st.bind(1, username);
    if (!st.step()) return std::nullopt;
    return Credentials{st.i64(0), st.text(1), st.text(2), st.text(3)};
}

void Store::upsert_vehicle(const Vehicle& v)
{
    std::lock_guard lk(mu_);
    Statement st(db_, "INSERT INTO Vehicle(vehicle_id, model, in_service_date) VALUES(?,?,?) "
                      "ON CONFLICT(vehicle_id) DO UPDATE SET model=excluded.model, "
                      "in_service_date=excluded.in_service_date");
    st.bind(1, v.vehicle_id).bind(2, v.model).bind(3, to_string(v.in_service_date)).run();
}

std::optional<Vehicle> Store::vehicle(VehicleId id) const
{
    std::lock_guard lk(mu_);
    Statement st(db_, "SELECT vehicle_id, model, in_service_date FROM Vehicle WHERE vehicle_id=?");
    st.bind(1, id);
    if (!st.step()) return std::nullopt;
    return Vehicle{st.i64(0), st.text(1), parse_date(st.text(2))};
}

void Store::upsert_road(const Road& r)
{
    std::lock_guard lk(mu_);
    Statement st(db_, "INSERT INTO Road(road_id, name) VALUES(?,?) "
                      "ON CONFLICT(road_id) DO UPDATE SET name=excluded.name");
    st.bind(1, r.road_id).bind(2, r.name).run();
}

std::optional<Road> Store::road(RoadId id) const
{
    std::lock_guard lk(mu_);
    Statement st(db_, "SELECT road_id, name FROM Road WHERE road_id=?");
    st.bind(1, id);
    if (!st.step()) return std::nullopt;
    return Road{st.i64(0), st.text(1)};
}

void Store::upsert_segment(const RoadSegment& s)
{
    check_segment(s);
    nlohmann::json attrs = s.attributes;
    std::lock_guard lk(mu_);
    Statement st(db_, "INSERT INTO SegmentRoad(segment_id, road_id, polyline, attributes) VALUES(?,?,?,?) "
                      "ON CONFLICT(segment_id) DO UPDATE SET road_id=excluded.road_id, "
                      "polyline=excluded.polyline, attributes=excluded.attributes");
    st.bind(1, s.segment_id).bind(2, s.road_id).bind(3, encode_polyline(s.polyline)).bind(4, attrs.dump()).run();
}

std::vector<RoadSegment> Store::segments() const
{
    std::lock_guard lk(mu_);
    Statement st(db_, "SELECT segment_id, road_id, polyline, attributes FROM SegmentRoad ORDER BY segment_id");
    std::vector<RoadSegment> out;
    while (st.step()) {
        RoadSegment s;
        s.segment_id = st.i64(0);
        s.road_id = st.i64(1);
        s.polyline = decode_polyline(st.text(2));
        s.attributes = nlohmann::json::parse(st.text(3)).get<std::map<std::string, std::string>>();
        out.push_back(std::move(s));
    }
    return out;
}

bool Store::has_segment(SegmentId id) const
{
    std::lock_guard lk(mu_);
    Statement st(db_, "SELECT 1 FROM SegmentRoad WHERE segment_id=?");
    st.bind(1, id);
    return st.step();
}

void Store::upsert_crash(const CrashRecord& c)
{
    std::lock_guard lk(mu_);
    Statement st(db_, "INSERT INTO Crashes(crash_id, segment_id, ts, severity) VALUES(?,?,?,?) "
                      "ON CONFLICT(crash_id) DO UPDATE SET segment_id=excluded.segment_id, ts=excluded.ts, "
                      "severity=excluded.severity");
    st.bind(1, c.crash_id).bind(2, c.segment_id).bind(3, c.ts.ms).bind(4, std::string(to_string(c.severity))).run();
}

std::vector<CrashRecord> Store::crashes() const
{
    std::lock_guard lk(mu_);
    Statement st(db_, "SELECT crash_id, segment_id, ts, severity FROM Crashes ORDER BY crash_id");
    std::vector<CrashRecord> out;
    while (st.step()) out.push_back({st.i64(0), st.i64(1), Timestamp{st.i64(2)}, parse_severity(st.text(3))});
    return out;
}

void Store::insert_trip(const TripRecord& r)
{
    std::lock_guard lk(mu_);
    Statement st(db_, "INSERT INTO Trip(trip_id, driver_id, vehicle_id, start_ts, end_ts, start_lat, start_lon, "
                      "distance_m, speed_min_mps, speed_avg_mps, speed_max_mps, server_distance_m) "
                      "VALUES(?,?,?,?,?,?,?,?,?,?,?,?)");
    const auto& t = r.trip;
    st.bind(1, t.trip_id).bind(2, t.driver_id).bind(3, t.vehicle_id).bind(4, t.start_ts.ms);
    if (t.end_ts) st.bind(5, t.end_ts->ms); else st.bind_null(5);
    if (r.start_position) st.bind(6, r.start_position->lat()).bind(7, r.start_position->lon());
    else st.bind_null(6).bind_null(7);
    st.bind(8, t.distance_m).bind(9, t.speed_min_mps).bind(10, t.speed_avg_mps).bind(11, t.speed_max_mps);
    st.bind(12, r.server_distance_m);
    st.run();
}

std::optional<TripRecord> Store::trip(const TripId& id) const
{
    std::lock_guard lk(mu_);
    Statement st(db_, (std::string("SELECT ") + kTripColumns + " FROM Trip WHERE trip_id=?").c_str());
    st.bind(1, id);
    if (!st.step()) return std::nullopt;
    return read_trip(st);
}

std::vector<TripRecord> Store::trips_for_driver(DriverId driver) const
{
    std::lock_guard lk(mu_);
    Statement st(db_, (std::string("SELECT ") + kTripColumns +
                       " FROM Trip WHERE driver_id=? ORDER BY start_ts, trip_id").c_str());
    st.bind(1, driver);
    std::vector<TripRecord> out;
    while (st.step()) out.push_back(read_trip(st));
    return out;
}

void Store::close_trip(const TripId& id, Timestamp end_ts, double client_distance_m, double speed_min,
                       double speed_avg, double speed_max, double server_distance_m)
{
    std::lock_guard lk(mu_);
    Statement st(db_, "UPDATE Trip SET end_ts=?, distance_m=?, speed_min_mps=?, speed_avg_mps=?, speed_max_mps=?, "
                      "server_distance_m=? WHERE trip_id=? AND end_ts IS NULL");
    st.bind(1, end_ts.ms).bind(2, client_distance_m).bind(3, speed_min).bind(4, speed_avg).bind(5, speed_max);
    st.bind(6, server_distance_m).bind(7, id).run();
    if (sqlite3_changes(db_) == 0) {
        Statement q(db_, "SELECT 1 FROM Trip WHERE trip_id=?");
        q.bind(1, id);
        if (!q.step()) throw NotFoundError("trip " + id + " not found");
        throw ConflictError("trip " + id + " already ended");
    }
}

std::vector<InsertOutcome> Store::insert_events(std::span<const StoredEvent> events)
{
    std::lock_guard lk(mu_);
    std::vector<InsertOutcome> out;
    out.reserve(events.size());
    exec("BEGIN IMMEDIATE");
    try {
        const std::string sql = std::string("INSERT OR IGNORE INTO Events(") + kEventColumns +
                                ") VALUES(?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?)";
        for (const auto& s : events) {
            const auto& e = s.event;
            Statement ins(db_, sql.c_str());
            ins.bind(1, e.event_id.to_string()).bind(2, e.trip_id).bind(3, e.ts.ms);
            ins.bind(4, e.position.lat()).bind(5, e.position.lon()).bind(6, e.gps_accuracy_m);
            ins.bind(7, e.speed_mps).bind(8, e.heading_deg).bind(9, e.speed_min_mps).bind(10, e.speed_avg_mps);
            ins.bind(11, e.speed_max_mps).bind(12, e.accel_mps2).bind(13, e.roll_dps).bind(14, e.pitch_dps);
            ins.bind(15, e.yaw_dps).bind(16, e.drowsiness_score).bind(17, e.drowsy ? 1 : 0);
            if (s.segment_id) ins.bind(18, *s.segment_id); else ins.bind_null(18);
            ins.run();
            out.push_back(sqlite3_changes(db_) > 0 ? InsertOutcome::inserted : InsertOutcome::duplicate);
        }
        exec("COMMIT");
    } catch (...) {
        sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
        throw;
    }
    return out;
}

std::vector<TelemetryEvent> Store::trip_events(const TripId& id) const
{
    std::lock_guard lk(mu_);
    Statement st(db_, (std::string("SELECT ") + kEventColumns +
                       " FROM Events WHERE trip_id=? ORDER BY ts, event_id").c_str());
    st.bind(1, id);
    std::vector<TelemetryEvent> out;
    while (st.step()) out.push_back(read_event(st).event);
    return out;
}

EventPage Store::events_page(const TripId& id, const EventQuery& q) const
{
    if (q.limit == 0) throw ValidationError("page limit must be positive");
    std::lock_guard lk(mu_);
    std::string sql = std::string("SELECT ") + kEventColumns + " FROM Events WHERE trip_id=?1";
    if (q.from) sql += " AND ts >= ?2";
    if (q.to) sql += " AND ts < ?3";
    if (q.after) sql += " AND (ts > ?4 OR (ts = ?4 AND event_id > ?5))";
    sql += " ORDER BY ts, event_id LIMIT ?6";
    Statement st(db_, sql.c_str());
    st.bind(1, id);
    if (q.from) st.bind(2, q.from->ms);
    if (q.to) st.bind(3, q.to->ms);
    if (q.after) st.bind(4, q.after->ts.ms).bind(5, q.after->event_id);
    st.bind(6, static_cast<std::int64_t>(q.limit) + 1);
    EventPage page;
    while (st.step()) page.events.push_back(read_event(st).event);
    if (page.events.size() > q.limit) {
        page.events.resize(q.limit);
        const auto& last = page.events.back();
        page.next = EventCursor{last.ts, last.event_id.to_string()};
    }
    return page;
}

std::vector<StoredEvent> Store::all_events() const
{
    std::lock_guard lk(mu_);
    Statement st(db_, (std::string("SELECT ") + kEventColumns + " FROM Events ORDER BY trip_id, ts, event_id").c_str());
    std::vector<StoredEvent> out;
    while (st.step()) out.push_back(read_event(st));
    return out;
}

std::size_t Store::event_count() const
{
    std::lock_guard lk(mu_);
    Statement st(db_, "SELECT COUNT(*) FROM Events");
    st.step();
    return static_cast<std::size_t>(st.i64(0));
}

void Store::set_event_segment(const EventId& id, std::optional<SegmentId> segment)
{
    std::lock_guard lk(mu_);
    Statement st(db_, "UPDATE Events SET segment_id=? WHERE event_id=?");
    if (segment) st.bind(1, *segment); else st.bind_null(1);
    st.bind(2, id.to_string()).run();
}

std::size_t Store::crash_count(SegmentId segment) const
{
    std::lock_guard lk(mu_);
    Statement st(db_, "SELECT COUNT(*) FROM Crashes WHERE segment_id=?");
    st.bind(1, segment);
    st.step();
    return static_cast<std::size_t>(st.i64(0));
}

std::size_t Store::traversal_count(SegmentId segment) const
{
    std::lock_guard lk(mu_);
    Statement st(db_, "SELECT COUNT(DISTINCT trip_id) FROM Events WHERE segment_id=?");
    st.bind(1, segment);
    st.step();
    return static_cast<std::size_t>(st.i64(0));
}

std::size_t Store::integrity_violations() const
{
    std::lock_guard lk(mu_);
    Statement st(db_, "PRAGMA foreign_key_check");
    std::size_t n = 0;
    while (st.step()) ++n;
    return n;
}

} // namespace roadsafe::server
