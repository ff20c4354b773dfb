#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(ENGRAM_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("cli exit codes") {
    CHECK(run("init") == 0);
    CHECK(run("") == 2);
    CHECK(run("juggle") == 2);
    CHECK(run("experiment P9") == 2);
    CHECK(run("run /nonexistent/scenario.jsonl") == 2);
    CHECK(run("--config /nonexistent/config.json init") == 0);  // init never reads the config
    CHECK(run("--config /nonexistent/config.json generate mixed --turns 5") == 2);
    CHECK(run("snapshot load /nonexistent/snap.json") == 2);
    CHECK(run("--help") == 0);
}

TEST_CASE("cli run, snapshot, query and report") {
    const std::string dir = "engram_cli_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    CHECK(run("init --out " + dir + "/config.json") == 0);
    CHECK(slurp(dir + "/config.json").find("\"wm.capacity\": 16") != std::string::npos);
    CHECK(run("--config " + dir + "/config.json generate facts --out " + dir + "/facts.jsonl") == 0);
    CHECK(run("run " + dir + "/facts.jsonl --save " + dir + "/state.json --out " + dir + "/metrics.jsonl") == 0);
    CHECK(!slurp(dir + "/metrics.jsonl").empty());
    CHECK(run("snapshot load " + dir + "/state.json") == 0);
    CHECK(run("query \"what is the capital of alder\" --state " + dir + "/state.json --out " + dir + "/answer.txt") ==
          0);
    CHECK(slurp(dir + "/answer.txt").find("verdict:") != std::string::npos);
    CHECK(run("report " + dir + "/metrics.jsonl --json " + dir + "/report.json --out " + dir + "/report.csv") == 0);
    CHECK(slurp(dir + "/report.csv").rfind("window,", 0) == 0);
    CHECK(!slurp(dir + "/report.json").empty());

    // save, load, save through the CLI gives the same bytes
    CHECK(run("snapshot save " + dir + "/a.json --scenario " + dir + "/facts.jsonl") == 0);
    CHECK(slurp(dir + "/a.json") == slurp(dir + "/state.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli policy-serve answers JSON lines") {
    const std::string in = "engram_cli_policy_in.jsonl", out = "engram_cli_policy_out.jsonl";
    {
        std::ofstream f(in);
        f << R"({"kind":"conflict","candidate":{"subject":"x","gist":{"emotional":{"valence":0,"arousal":0},"associative":[],"contextual":[],"density":0,"precision":0}},"core":{"subject":"y","gist":{"emotional":{"valence":0,"arousal":0},"associative":[],"contextual":[],"density":0,"precision":0}}})"
          << "\n";
    }
    const int status = std::system((std::string(ENGRAM_CLI) + " policy-serve < " + in + " > " + out).c_str());
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(slurp(out).find("\"conflict\":false") != std::string::npos);
    std::remove(in.c_str());
    std::remove(out.c_str());
}
