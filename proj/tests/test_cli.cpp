#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
    int status = -1;
    std::string output;  // stdout and stderr
};

// Runs the CLI with `args` in a shell; `env` is prepended verbatim.
Run run(const std::string& args, const std::string& env = "") {
    const fs::path log = fs::temp_directory_path() / ("distfit_cli_" + std::to_string(::getpid()) + ".log");
    const std::string cmd = env + " '" + std::string(DISTFIT_CLI_PATH) + "' " + args + " > '" + log.string() + "' 2>&1";
    const int raw = std::system(cmd.c_str());
    Run r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(log);
    std::ostringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    fs::remove(log);
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> data_lines(const fs::path& p) {
    std::vector<std::string> out;
    std::istringstream in(slurp(p));
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line[0] != '#') out.push_back(line);
    }
    return out;
}

// Fresh, empty directory under the system temp dir.
fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("distfit_cli_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("fit a single family") {
    const fs::path out = scratch("fit1");
    const Run r = run("fit --builtin --family Lognormal_2P --output-dir " + quoted(out));
    INFO(r.output);
    REQUIRE(r.status == 0);
    const auto lines = data_lines(out / "fits.tsv");
    REQUIRE(lines.size() == 1 + 10);
    const auto orvu = std::find_if(lines.begin(), lines.end(),
                                   [](const std::string& l) { return l.rfind("Lognormal_2P\tORVU\t", 0) == 0; });
    REQUIRE(orvu != lines.end());
    CHECK(orvu->find("1.1515") != std::string::npos);
    CHECK(orvu->find("1.6653") != std::string::npos);
}

TEST_CASE("fit every family") {
    const fs::path out = scratch("fitall");
    const Run r = run("fit --builtin --family ALL --output-dir " + quoted(out));
    INFO(r.output);
    CHECK(r.status == 0);
    CHECK(data_lines(out / "fits.tsv").size() == 1 + 160);
}

TEST_CASE("missing input file") {
    const fs::path out = scratch("missing");
    const Run r = run("fit --input /nonexistent/corpus.csv --output-dir " + quoted(out));
    CHECK(r.status != 0);
    CHECK(r.output.find("/nonexistent/corpus.csv") != std::string::npos);
}

TEST_CASE("usage errors") {
    CHECK(run("fit").status != 0);
    CHECK(run("fit --builtin --family Gamma_2P").status != 0);
    CHECK(run("summary --builtin --precision double").status != 0);
}

TEST_CASE("two-family goodness-of-fit table") {
    const fs::path out = scratch("gof2");
    const Run r = run("gof-table --builtin --families Lognormal_2P,LogLogistic_2P --output-dir " + quoted(out));
    INFO(r.output);
    CHECK(r.status == 0);
    const auto lines = data_lines(out / "table2.tsv");
    REQUIRE(lines.size() == 3);
    CHECK(lines[1].rfind("Lognormal_2P\t", 0) == 0);
}

TEST_CASE("summary table with and without the pooled row") {
    const fs::path a = scratch("summary");
    REQUIRE(run("summary --builtin --output-dir " + quoted(a)).status == 0);
    const auto lines = data_lines(a / "table3.tsv");
    CHECK(lines.size() == 1 + 11);
    CHECK(lines.back().rfind("Magnoliopsida\t", 0) == 0);
    CHECK(lines.back().find("\t3.541\t") != std::string::npos);

    const fs::path b = scratch("summary_nopool");
    REQUIRE(run("summary --builtin --no-pooled --output-dir " + quoted(b)).status == 0);
    CHECK(data_lines(b / "table3.tsv").size() == 1 + 10);
}

TEST_CASE("density curves") {
    const fs::path out = scratch("curves");
    const Run r = run("curves --builtin --points 50 --output-dir " + quoted(out));
    INFO(r.output);
    REQUIRE(r.status == 0);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(out / "curves")) {
        ++files;
        CHECK(data_lines(e.path()).size() == 51);
    }
    CHECK(files == 11);
    CHECK(fs::exists(out / "curves" / "ORVU.csv"));
}

TEST_CASE("cluster outputs") {
    const fs::path out = scratch("cluster");
    const Run r = run("cluster --builtin --output-dir " + quoted(out));
    INFO(r.output);
    REQUIRE(r.status == 0);
    for (const char* name : {"stats_dendrogram.nwk", "stats_dendrogram.dot", "stats_dendrogram.tsv",
                             "taxonomy_dendrogram.nwk", "taxonomy_dendrogram.dot", "taxonomy_dendrogram.tsv",
                             "taxonomy_codebook.tsv"}) {
        CHECK(fs::exists(out / name));
    }
    CHECK(data_lines(out / "stats_dendrogram.tsv").size() == 1 + 9);
    CHECK(data_lines(out / "taxonomy_dendrogram.tsv").size() == 1 + 9);
}

TEST_CASE("missing taxonomy file") {
    const fs::path out = scratch("cluster_missing");
    const Run r = run("cluster --builtin --mode taxonomy --taxonomy /nonexistent/tax.csv --output-dir " + quoted(out));
    CHECK(r.status != 0);
    CHECK(r.output.find("/nonexistent/tax.csv") != std::string::npos);
}

TEST_CASE("full pipeline is byte-identical across thread counts") {
    const fs::path a = scratch("all_1");
    const fs::path b = scratch("all_8");
    const Run ra = run("all --builtin --output-dir " + quoted(a), "DISTFIT_THREADS=1");
    const Run rb = run("all --builtin --output-dir " + quoted(b), "DISTFIT_THREADS=8");
    INFO(ra.output);
    REQUIRE(ra.status == 0);
    REQUIRE(rb.status == 0);
    std::size_t compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        const fs::path rel = fs::relative(e.path(), a);
        INFO(rel.string());
        REQUIRE(fs::exists(b / rel));
        CHECK(slurp(e.path()) == slurp(b / rel));
        ++compared;
    }
    CHECK(compared == 3 + 11 + 7);
}

}
