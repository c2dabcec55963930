#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nlest/cli.hpp"
#include "nlest/io.hpp"

using namespace nlest;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("nlest_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("usage errors exit 2")
{
    const fs::path d = scratch("usage");
    const Run bad_sigma = run({"solve", "--sigma", "2.5", "--out", d.string()});
    CHECK(bad_sigma.code == kExitUsage);
    CHECK(bad_sigma.err.find("sigma must lie in (0,2)") != std::string::npos);
    // The manifest records the failure.
    const std::string manifest = slurp(d / "manifest.txt");
    CHECK(manifest.find("# status = error") != std::string::npos);
    CHECK(manifest.find("sigma = 2.5") != std::string::npos);

    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"solve", "--no-such-flag", "1"}).code == kExitUsage);
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"solve", "--n-cells", "100", "--out", d.string()}).code == kExitUsage);
    CHECK(run({"solve", "--config", (d / "missing.cfg").string()}).code == kExitUsage);
    fs::remove_all(d);
}

TEST_CASE("non-finite data exits 3")
{
    const fs::path d = scratch("numerical");
    const Run r = run({"solve", "--f-constant", "nan", "--out", d.string()});
    CHECK(r.code == kExitNumerical);
    CHECK(slurp(d / "manifest.txt").find("error (numerical)") != std::string::npos);
    fs::remove_all(d);
}

TEST_CASE("failed verdict exits 1")
{
    const fs::path d = scratch("verdict");
    const Run r = run({"potential", "--n-cells", "64", "--instances", "2", "--out", d.string()});
    CHECK(r.code == kExitFail);
    CHECK(r.out.find("FAIL potential.fit") != std::string::npos);
    CHECK(slurp(d / "manifest.txt").find("# status = fail") != std::string::npos);
    fs::remove_all(d);
}

TEST_CASE("help exits 0")
{
    const Run r = run({"--help"});
    CHECK(r.code == kExitPass);
    CHECK(r.out.find("potential") != std::string::npos);
    CHECK(r.out.find("key = value") != std::string::npos);
}

TEST_CASE("config files")
{
    const fs::path d = scratch("config");
    fs::create_directories(d);
    {
        std::ofstream os(d / "run.cfg");
        os << "# comment\ncommand = solve\nsigma = 1.25\n\nn-cells=64\n";
    }
    const auto cfg = read_config_file((d / "run.cfg").string());
    REQUIRE(cfg.size() == 3);
    CHECK(cfg[1] == std::pair<std::string, std::string>{"sigma", "1.25"});
    const auto merged = merge_config({"solve", "--sigma", "1.5"}, cfg);
    CHECK(merged == std::vector<std::string>{"solve", "--sigma", "1.5", "--n-cells", "64"});
    {
        std::ofstream os(d / "bad.cfg");
        os << "sigma 1.2\n";
    }
    CHECK_THROWS(read_config_file((d / "bad.cfg").string()));
    fs::remove_all(d);
}

TEST_CASE("cz pipeline")
{
    const fs::path d = scratch("cz");
    fs::create_directories(d);
    const GridSpec s = make_grid(1, 256, 1.0, 2.0);
    SetIndicator e(s);
    for (int c = 10; c < 40; ++c) e.set(c, 0, true);
    {
        std::ofstream os(d / "E.csv");
        write_set_indicator(os, e);
    }
    const Run r = run({"cz", "--dim", "1", "--n-cells", "256", "--alpha", "0.5", "--set-file", (d / "E.csv").string(),
                       "--out", (d / "out").string()});
    CHECK(r.code == kExitPass);
    CHECK(fs::exists(d / "out" / "cz.csv"));
    const std::string manifest = slurp(d / "out" / "manifest.txt");
    CHECK(manifest.find("# verdict PASS cz.verify") != std::string::npos);
    CHECK(manifest.find("# code_version = ") != std::string::npos);
    // Mismatched grid flags are rejected.
    CHECK(run({"cz", "--n-cells", "128", "--set-file", (d / "E.csv").string(), "--out", (d / "o2").string()}).code ==
          kExitUsage);
    fs::remove_all(d);
}

TEST_CASE("determinism and manifest re-runs")
{
    const fs::path d = scratch("determinism");
    const std::vector<std::string> base = {"potential", "--dim", "1", "--n-cells", "256", "--sigma", "1.5",
                                           "--instances", "20", "--seed", "7", "--threads", "1"};
    auto with_out = [&](const std::string& name) {
        auto a = base;
        a.push_back("--out");
        a.push_back((d / name).string());
        return a;
    };
    CHECK(run(with_out("a")).code == kExitPass);
    CHECK(run(with_out("b")).code == kExitPass);
    const std::string rows_a = slurp(d / "a" / "rows.csv");
    CHECK(!rows_a.empty());
    CHECK(rows_a == slurp(d / "b" / "rows.csv"));
    CHECK(slurp(d / "a" / "fits.csv") == slurp(d / "b" / "fits.csv"));

    // Re-running from the manifest alone reproduces the tables.
    const Run again = run({"potential", "--config", (d / "a" / "manifest.txt").string(), "--out", (d / "c").string()});
    CHECK(again.code == kExitPass);
    CHECK(slurp(d / "c" / "rows.csv") == rows_a);

    // A different seed changes the rows but not their layout.
    auto other = with_out("e");
    other[10] = "8";
    CHECK(run(other).code == kExitPass);
    CHECK(slurp(d / "e" / "rows.csv") != rows_a);
    fs::remove_all(d);
}

TEST_CASE("single operations write their outputs")
{
    const fs::path d = scratch("ops");
    CHECK(run({"eval-dsigma", "--function", "gaussian", "--n-cells", "64", "--out", (d / "e").string()}).code == kExitPass);
    CHECK(fs::exists(d / "e" / "dsigma.csv"));
    CHECK(run({"solve", "--n-cells", "64", "--coefficient", "checkerboard", "--out", (d / "s").string()}).code == kExitPass);
    const GridFunction u = load_grid_function((d / "s" / "solution.csv").string());
    CHECK(u.spec().n_cells == 64);
    CHECK(u.at(0) > 0.0);
    // The solution file feeds back into eval-dsigma.
    CHECK(run({"eval-dsigma", "--input", (d / "s" / "solution.csv").string(), "--out", (d / "e2").string()}).code ==
          kExitPass);
    CHECK(run({"weights-cache", "--n-cells", "64", "--out", (d / "w").string()}).code == kExitPass);
    CHECK(run({"weights-cache", "--verify", (d / "w" / "weights.txt").string(), "--out", (d / "w2").string()}).code ==
          kExitPass);
    fs::remove_all(d);
}
