#include <gtest/gtest.h>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "oracles.hpp"
#include "tactile/trial.hpp"

namespace fs = std::filesystem;
using namespace tactile;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

std::string quote(const std::string& s)
{
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

Result run(const std::vector<std::string>& args)
{
    std::string cmd = "cd " + quote(oracle::kSourceDir.string()) + " && " + quote(oracle::kCli);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed");
    Result r;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class TempDir {
public:
    TempDir()
    {
        path_ = fs::temp_directory_path() / ("tactile_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

TrialRecord record(const std::string& cond, bool correct, int conf, std::int64_t ms)
{
    TrialRecord r;
    r.shape_id = "square";
    r.condition = cond;
    r.answer = correct ? "square" : "triangle";
    r.correct = correct;
    r.confidence = conf;
    r.response_time_ms = ms;
    return r;
}

void write_log(const fs::path& p, const std::vector<TrialRecord>& recs)
{
    std::ofstream out(p);
    write_trial_log(out, recs);
}

std::vector<TrialRecord> condition(const std::string& cond, int errors, std::uint64_t seed)
{
    oracle::Rng rng(seed);
    std::vector<TrialRecord> out;
    for (int i = 0; i < 40; ++i) out.push_back(record(cond, i >= errors, rng.integer(1, 7), rng.integer(20000, 170000)));
    return out;
}

}  // namespace

TEST(Cli, ExploreSquare)
{
    const Result r = run({"explore", "--shape", "shapes/01_square.json", "--step", "5"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("laps: 1\n"), std::string::npos) << r.out;

    const Result none = run({"explore", "--shape", "shapes/01_square.json", "--max-steps", "0"});
    EXPECT_EQ(none.code, 0);
    EXPECT_NE(none.out.find("laps: 0\n"), std::string::npos) << none.out;
}

TEST(Cli, ExploreErrors)
{
    EXPECT_EQ(run({"explore", "--shape", "no/such/file.json"}).code, 2);
    EXPECT_EQ(run({"explore"}).code, 2);
    EXPECT_EQ(run({"explore", "--shape", "shapes/01_square.json", "--step", "-1"}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);

    TempDir dir;
    std::ofstream(dir / "bad.json") << R"({"name":"bad","thickness":10,"vertices":[[0,0],[1,1]]})";
    const Result bad = run({"explore", "--shape", (dir / "bad.json").string()});
    EXPECT_NE(bad.code, 0);
    EXPECT_NE(bad.out.find("tactile:"), std::string::npos) << bad.out;
}

TEST(Cli, Render)
{
    const Result on = run({"render", "--direction", "E", "--blink", "3", "--at-ms", "0"});
    EXPECT_EQ(on.code, 0);
    EXPECT_EQ(on.out, "index:\n" + render_ascii(GlyphTable::builtin()[Direction8::E]) + "middle:\n" +
                          render_ascii(PinFrame::all_lowered()));

    const Result off = run({"render", "--direction", "E", "--blink", "3", "--at-ms", "130", "--on-shape"});
    EXPECT_EQ(off.code, 0);
    EXPECT_EQ(off.out, "index:\n" + render_ascii(PinFrame::all_lowered()) + "middle:\n" +
                           render_ascii(PinFrame::all_raised()));

    EXPECT_EQ(run({"render", "--direction", "Q"}).code, 2);
    EXPECT_EQ(run({"render", "--direction", "N", "--blink", "4"}).code, 2);
    EXPECT_EQ(run({"render", "--direction", "N", "--periods", "100,200"}).code, 2);
}

TEST(Cli, StatsReport)
{
    TempDir dir;
    write_log(dir / "a.jsonl", condition("unimanual", 4, 1));
    write_log(dir / "b.jsonl", condition("bimanual", 8, 2));
    const Result r = run({"stats", "--a", (dir / "a.jsonl").string(), "--b", (dir / "b.jsonl").string()});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(r.out, comparison_report(condition("unimanual", 4, 1), condition("bimanual", 8, 2)));
    EXPECT_NE(r.out.find("errors: 4/40 vs 8/40"), std::string::npos) << r.out;

    const Result same = run({"stats", "--a", (dir / "a.jsonl").string(), "--b", (dir / "a.jsonl").string()});
    EXPECT_NE(same.out.find("W=800, p=1.00"), std::string::npos) << same.out;

    write_log(dir / "one.jsonl", {record("x", true, 5, 10000)});
    write_log(dir / "two.jsonl", {record("y", true, 5, 20000)});
    const Result single = run({"stats", "--a", (dir / "one.jsonl").string(), "--b", (dir / "two.jsonl").string()});
    EXPECT_NE(single.out.find("W=0, p=1.00"), std::string::npos) << single.out;

    std::ofstream(dir / "empty.jsonl").close();
    EXPECT_EQ(run({"stats", "--a", (dir / "empty.jsonl").string(), "--b", (dir / "a.jsonl").string()}).code, 1);
    std::ofstream(dir / "junk.jsonl") << "{not json\n";
    EXPECT_EQ(run({"stats", "--a", (dir / "junk.jsonl").string(), "--b", (dir / "a.jsonl").string()}).code, 2);
}

TEST(Cli, ExperimentThenStats)
{
    TempDir dir;
    std::ofstream(dir / "script.json") << R"({"condition":"uni","trials":[
        {"shape":"square","answer":"square","confidence":6,"t":30000},
        {"shape":"triangle","answer":"square","confidence":2,"t":60000},
        {"shape":"house"}]})";
    const Result r = run({"experiment", "--script", (dir / "script.json").string(), "--out", (dir / "a.jsonl").string()});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("trials: 3"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("errors: 2/3"), std::string::npos) << r.out;
    const auto recs = read_trial_log(dir / "a.jsonl");
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_TRUE(recs[2].timed_out);

    EXPECT_EQ(run({"experiment", "--script", (dir / "script.json").string(), "--mode", "smell"}).code, 2);
    EXPECT_EQ(run({"experiment", "--script", (dir / "missing.json").string()}).code, 2);
}

TEST(Cli, Raster)
{
    TempDir dir;
    const Result r = run({"raster", "--shape", "shapes/01_square.json", "--out", (dir / "sq.pgm").string()});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(slurp(dir / "sq.pgm").substr(0, 3), "P5\n");
}

TEST(Cli, ServeErrors)
{
    EXPECT_EQ(run({"serve", "--addr", "nonsense"}).code, 2);
    EXPECT_EQ(run({"serve", "--addr", "127.0.0.1:70000"}).code, 2);
    TempDir empty;
    const Result r = run({"serve", "--addr", "127.0.0.1:0", "--shapes", empty.path().string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("no shapes"), std::string::npos) << r.out;
    EXPECT_EQ(run({"serve", "--addr", "127.0.0.1:0", "--static", (empty / "nope").string()}).code, 2);
}

TEST(Cli, ConfigFile)
{
    TempDir dir;
    std::ofstream(dir / "cfg.json") << R"({"explore": {"shape": "shapes/01_square.json", "max-steps": 0}})";
    const Result r = run({"--config", (dir / "cfg.json").string(), "explore"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("laps: 0\n"), std::string::npos) << r.out;

    const Result flag = run({"--config", (dir / "cfg.json").string(), "explore", "--max-steps", "400"});
    EXPECT_NE(flag.out.find("laps: 1\n"), std::string::npos) << flag.out;

    std::ofstream(dir / "broken.json") << "{";
    EXPECT_EQ(run({"--config", (dir / "broken.json").string(), "explore"}).code, 2);
}

TEST(Cli, SeededRunsAreByteIdentical)
{
    TempDir dir;
    const std::vector<std::string> base = {"explore", "--shape", "shapes/09_house.json", "--agent", "noisy", "--seed", "7"};
    auto a = base, b = base;
    a.insert(a.end(), {"--log", (dir / "a.jsonl").string()});
    b.insert(b.end(), {"--log", (dir / "b.jsonl").string()});
    ASSERT_EQ(run(a).code, 0);
    ASSERT_EQ(run(b).code, 0);
    const std::string first = slurp(dir / "a.jsonl");
    EXPECT_GT(first.size(), 1000u);
    EXPECT_EQ(first, slurp(dir / "b.jsonl"));
}

TEST(Cli, ServeSmoke)
{
    TempDir dir;
    std::ofstream(dir / "index.html") << "ui";
    int fds[2];
    ASSERT_EQ(::pipe(fds), 0);
    const pid_t pid = ::fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
        ::dup2(fds[1], STDOUT_FILENO);
        ::close(fds[0]);
        ::close(fds[1]);
        const std::string shapes = (oracle::kSourceDir / "shapes").string();
        const std::string stat = dir.path().string();
        ::execl(oracle::kCli.c_str(), "tactile", "serve", "--addr", "127.0.0.1:0", "--http-addr", "127.0.0.1:0",
                "--shapes", shapes.c_str(), "--static", stat.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(fds[1]);
    FILE* out = ::fdopen(fds[0], "r");
    char line[256];
    int http_port = 0;
    int tcp_port = 0;
    while ((!http_port || !tcp_port) && std::fgets(line, sizeof line, out)) {
        std::sscanf(line, "http on 127.0.0.1:%d", &http_port);
        std::sscanf(line, "listening on 127.0.0.1:%d", &tcp_port);
    }
    ASSERT_GT(http_port, 0);
    ASSERT_GT(tcp_port, 0);

    httplib::Client client("127.0.0.1", http_port);
    const auto page = client.Get("/index.html");
    ASSERT_TRUE(page);
    EXPECT_EQ(page->body, "ui");
    const auto hello = client.Post("/api/session", "{\"type\":\"hello\",\"v\":1}\n", "application/x-ndjson");
    ASSERT_TRUE(hello);
    EXPECT_NE(hello->body.find("\"type\":\"trial\""), std::string::npos);

    ::kill(pid, SIGTERM);
    int status = 0;
    ::waitpid(pid, &status, 0);
    std::fclose(out);
    EXPECT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 0);
}
