// tactile: command-line front end for the guidance engine.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <pthread.h>
#include <signal.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "http_bridge.hpp"
#include "json_config.hpp"
#include "tactile/line_server.hpp"
#include "tactile/tactile.hpp"

namespace {

using namespace tactile;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Shape load_shape_checked(const std::string& path)
{
    if (!std::filesystem::is_regular_file(path)) throw UsageError("shape file not found: " + path);
    return load_shape(path);
}

BlinkPeriods periods_from(const std::vector<std::int64_t>& v)
{
    if (v.empty()) return {};
    if (v.size() != 3) throw UsageError("--periods takes three values: slow,medium,fast (ms)");
    BlinkPeriods p{v[0], v[1], v[2]};
    p.validate();
    return p;
}

std::vector<Shape> load_shapes_checked(const std::string& dir)
{
    if (!std::filesystem::is_directory(dir)) throw UsageError("shape directory not found: " + dir);
    std::vector<Shape> shapes = load_shape_dir(dir);
    if (shapes.empty()) throw UsageError("no shapes in " + dir);
    return shapes;
}

// ---------------------------------------------------------------------------

struct ExploreOptions {
    std::string shape;
    std::string agent = "greedy";
    double step = 5.0;
    double noise = -1.0;
    std::uint64_t seed = 0;
    std::int64_t max_steps = -1;
    std::vector<double> start;
    std::string log;
    std::int64_t tick_ms = 10;
    bool wall_clock = false;
};

int run_explore(const ExploreOptions& o)
{
    const Shape shape = load_shape_checked(o.shape);
    AgentConfig cfg;
    cfg.step_size = o.step;
    cfg.seed = o.seed;
    cfg.tick_ms = o.tick_ms;
    if (o.agent == "noisy") cfg.noise_radius = o.noise >= 0.0 ? o.noise : shape.thickness() / 4.0;
    cfg.max_steps = o.max_steps >= 0 ? o.max_steps
                                     : static_cast<std::int64_t>(std::ceil(4.0 * shape.perimeter() / o.step));
    if (o.wall_clock) {
        const auto t0 = std::chrono::steady_clock::now();
        cfg.clock = [t0](std::int64_t) {
            return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
        };
    }
    Point start = shape.vertices().front();
    if (!o.start.empty()) {
        if (o.start.size() != 2) throw UsageError("--start takes two values: x,y");
        start = {o.start[0], o.start[1]};
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    const AgentRun run = greedy_follow(shape, start, cfg);

    if (!o.log.empty()) {
        std::ofstream out(o.log);
        if (!out) throw std::runtime_error("cannot write " + o.log);
        for (const auto& s : run.samples) {
            out << session_log_record(s.time_ms, s.cursor, s.tactile, s.segment, s.events).dump() << '\n';
        }
    }
    std::cout << "laps: " << run.laps << '\n' << "steps: " << run.trajectory.size() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct RenderOptions {
    std::string direction;
    int blink = 1;
    bool on_shape = false;
    std::int64_t at_ms = 0;
    std::string glyphs;
    std::vector<std::int64_t> periods;
};

int run_render(const RenderOptions& o)
{
    const auto dir = parse_direction(o.direction);
    if (!dir) throw UsageError("unknown direction '" + o.direction + "' (expected N, NE, E, SE, S, SW, W or NW)");
    const auto blink = blink_from_wire(o.blink);
    if (!blink) throw UsageError("--blink must be 1, 2 or 3");
    if (o.at_ms < 0) throw UsageError("--at-ms must be >= 0");
    const BlinkPeriods periods = periods_from(o.periods);
    const GlyphTable table = o.glyphs.empty() ? GlyphTable::builtin() : load_glyph_table(o.glyphs);

    const FramePair frames = frame_at({*dir, *blink, o.on_shape}, o.at_ms, periods, table);
    std::cout << "index:\n" << render_ascii(frames.index_frame) << "middle:\n" << render_ascii(frames.middle_frame);
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct ExperimentOptions {
    std::string shapes = "shapes";
    std::string mode = "guidance";
    std::string script;
    std::string out;
    std::string condition;
};

int run_experiment_cmd(const ExperimentOptions& o)
{
    const auto mode = parse_mode(o.mode);
    if (!mode) throw UsageError("--mode must be guidance or pixels");
    const std::vector<Shape> shapes = load_shapes_checked(o.shapes);
    if (!std::filesystem::is_regular_file(o.script)) throw UsageError("script not found: " + o.script);
    ExperimentScript script = load_script(o.script);
    if (!o.condition.empty()) script.condition = o.condition;

    const std::vector<TrialRecord> records = run_experiment(shapes, *mode, script);
    if (o.out.empty()) {
        write_trial_log(std::cout, records);
    } else {
        std::ofstream out(o.out);
        if (!out) throw std::runtime_error("cannot write " + o.out);
        write_trial_log(out, records);
        std::cout << "trials: " << records.size() << '\n';
    }
    if (!records.empty()) std::cerr << "errors: " << error_fraction(records).to_string() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct StatsOptions {
    std::string a;
    std::string b;
};

int run_stats(const StatsOptions& o)
{
    const auto a = read_trial_log(std::filesystem::path(o.a));
    const auto b = read_trial_log(std::filesystem::path(o.b));
    if (a.empty()) throw std::runtime_error(o.a + ": no trial records");
    if (b.empty()) throw std::runtime_error(o.b + ": no trial records");
    std::cout << comparison_report(a, b);
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct RasterOptions {
    std::string shape;
    double cell = 0.0;
    std::string out;
};

int run_raster(const RasterOptions& o)
{
    const Shape shape = load_shape_checked(o.shape);
    RasterConfig cfg;
    cfg.cell_size = o.cell;
    const RasterImage img = rasterize_outline(shape, cfg);
    write_pgm(img, o.out);
    std::cout << img.width() << "x" << img.height() << " pixels, cell " << img.cell_size() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct ServeOptions {
    std::string addr = "127.0.0.1:8765";
    std::string shapes = "shapes";
    std::string static_dir;
    std::string http_addr;
    std::int64_t time_limit_ms = kDefaultTimeLimitMs;
    std::vector<std::int64_t> periods;
};

int run_serve(const ServeOptions& o)
{
    const auto addr = parse_host_port(o.addr);
    if (!addr) throw UsageError("invalid address '" + o.addr + "' (expected HOST:PORT)");
    std::optional<HostPort> http_addr;
    if (!o.http_addr.empty()) {
        http_addr = parse_host_port(o.http_addr);
        if (!http_addr) throw UsageError("invalid address '" + o.http_addr + "' (expected HOST:PORT)");
    } else if (!o.static_dir.empty()) {
        http_addr = HostPort{addr->host, static_cast<std::uint16_t>(addr->port == 0 ? 0 : addr->port + 1)};
    }
    if (!o.static_dir.empty() && !std::filesystem::is_directory(o.static_dir)) {
        throw UsageError("static directory not found: " + o.static_dir);
    }
    if (o.time_limit_ms <= 0) throw UsageError("--time-limit must be > 0");

    auto config = std::make_shared<GatewayConfig>();
    for (auto& s : load_shapes_checked(o.shapes)) config->shapes.push_back(std::make_shared<const Shape>(std::move(s)));
    config->time_limit_ms = o.time_limit_ms;
    config->periods = periods_from(o.periods);

    // Signals are taken by a dedicated thread; block them everywhere else.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    LineServer server(config);
    try {
        server.listen(*addr);
    } catch (const std::exception& e) {
        std::cerr << "tactile serve: " << e.what() << '\n';
        return kExitFailure;
    }
    std::unique_ptr<cli::HttpBridge> bridge;
    if (http_addr) {
        bridge = std::make_unique<cli::HttpBridge>(
            config, o.static_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(o.static_dir));
        try {
            const int port = bridge->bind(*http_addr);
            std::cout << "http on " << http_addr->host << ":" << port << std::endl;
        } catch (const std::exception& e) {
            std::cerr << "tactile serve: " << e.what() << '\n';
            return kExitFailure;
        }
    }
    std::cout << "listening on " << addr->host << ":" << server.port() << std::endl;

    std::thread http_thread;
    if (bridge) http_thread = std::thread([&] { bridge->serve(); });
    std::thread signal_thread([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        server.stop();
        if (bridge) bridge->stop();
    });

    server.serve();
    pthread_kill(signal_thread.native_handle(), SIGTERM);
    signal_thread.join();
    if (http_thread.joinable()) http_thread.join();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Tactile shape guidance: agents, Tacton preview, experiments, statistics and the session gateway"};
    app.config_formatter(std::make_shared<cli::JsonConfig>());
    app.set_config("--config", "", "JSON config file; command-line flags override it");
    app.require_subcommand(1);

    ExploreOptions explore;
    auto* explore_cmd = app.add_subcommand("explore", "Run a synthetic explorer around a shape");
    explore_cmd->add_option("--shape", explore.shape, "Shape file (JSON)")->required();
    explore_cmd->add_option("--agent", explore.agent, "greedy or noisy")
        ->check(CLI::IsMember({"greedy", "noisy"}))
        ->capture_default_str();
    explore_cmd->add_option("--step", explore.step, "Step length per tick (workspace units)")->capture_default_str();
    explore_cmd->add_option("--noise", explore.noise, "Noise disc radius for the noisy agent (default thickness/4)");
    explore_cmd->add_option("--seed", explore.seed, "Noise seed")->capture_default_str();
    explore_cmd->add_option("--max-steps", explore.max_steps, "Step budget (default ceil(4 * perimeter / step))");
    explore_cmd->add_option("--start", explore.start, "Start point x,y (default vertex 0)")->delimiter(',');
    explore_cmd->add_option("--log", explore.log, "Write the session log (JSON lines)");
    explore_cmd->add_option("--tick-ms", explore.tick_ms, "Logical milliseconds per tick")->capture_default_str();
    explore_cmd->add_flag("--wall-clock", explore.wall_clock, "Timestamp samples with elapsed real time");

    RenderOptions render;
    auto* render_cmd = app.add_subcommand("render", "Print both pin arrays for a tactile state");
    render_cmd->add_option("--direction", render.direction, "N, NE, E, SE, S, SW, W or NW")->required();
    render_cmd->add_option("--blink", render.blink, "1 slow, 2 medium, 3 fast")->capture_default_str();
    render_cmd->add_flag("--on-shape", render.on_shape, "Cursor is on the shape");
    render_cmd->add_option("--at-ms", render.at_ms, "Time within the blink cycle")->capture_default_str();
    render_cmd->add_option("--glyphs", render.glyphs, "Glyph table (JSON); built-in table by default");
    render_cmd->add_option("--periods", render.periods, "Blink periods slow,medium,fast in ms")->delimiter(',');

    ExperimentOptions experiment;
    auto* experiment_cmd = app.add_subcommand("experiment", "Replay a scripted participant");
    experiment_cmd->add_option("--shapes", experiment.shapes, "Directory of shape files")->capture_default_str();
    experiment_cmd->add_option("--mode", experiment.mode, "guidance or pixels")->capture_default_str();
    experiment_cmd->add_option("--script", experiment.script, "Participant script (JSON)")->required();
    experiment_cmd->add_option("--out", experiment.out, "Trial log output (default stdout)");
    experiment_cmd->add_option("--condition", experiment.condition, "Override the script's condition label");

    StatsOptions stats;
    auto* stats_cmd = app.add_subcommand("stats", "Compare two trial logs");
    stats_cmd->add_option("--a", stats.a, "First condition's trial log")->required();
    stats_cmd->add_option("--b", stats.b, "Second condition's trial log")->required();

    RasterOptions raster;
    auto* raster_cmd = app.add_subcommand("raster", "Export the dark-pixel image of a shape as PGM");
    raster_cmd->add_option("--shape", raster.shape, "Shape file (JSON)")->required();
    raster_cmd->add_option("--cell", raster.cell, "Cell size (default: the shape thickness)");
    raster_cmd->add_option("--out", raster.out, "Output .pgm file")->required();

    ServeOptions serve;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the session gateway");
    serve_cmd->add_option("--addr", serve.addr, "TCP listen address HOST:PORT")->capture_default_str();
    serve_cmd->add_option("--shapes", serve.shapes, "Directory of trial shapes")->capture_default_str();
    serve_cmd->add_option("--static", serve.static_dir, "UI bundle directory served over HTTP");
    serve_cmd->add_option("--http-addr", serve.http_addr, "HTTP listen address (default: TCP port + 1)");
    serve_cmd->add_option("--time-limit", serve.time_limit_ms, "Per-trial limit in ms")->capture_default_str();
    serve_cmd->add_option("--periods", serve.periods, "Blink periods slow,medium,fast in ms")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (explore_cmd->parsed()) return run_explore(explore);
        if (render_cmd->parsed()) return run_render(render);
        if (experiment_cmd->parsed()) return run_experiment_cmd(experiment);
        if (stats_cmd->parsed()) return run_stats(stats);
        if (raster_cmd->parsed()) return run_raster(raster);
        if (serve_cmd->parsed()) return run_serve(serve);
    } catch (const UsageError& e) {
        std::cerr << "tactile: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "tactile: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "tactile: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
