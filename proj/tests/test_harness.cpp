#include <chrono>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "harness.hpp"
#include "space.hpp"
#include "test_util.hpp"

using namespace autotune;
namespace fs = std::filesystem;

namespace {

ParameterSpace tuning_space() {
    return ParameterSpace::from_json_file(testutil::openmc_space_path().string());
}

ExecutionRequest base_request(const fs::path& dir, const std::string& script) {
    ExecutionRequest req;
    req.script_text = script;
    req.work_dir = dir;
    req.timeout_sec = 10.0;
    req.penalty = -1.0;
    req.metric.kind = MetricKind::fom;
    req.metric.stdout_pattern = R"(FOM:\s*([0-9.eE+-]+)\s*particles/s)";
    req.direction = Direction::maximize;
    return req;
}

} // namespace

TEST_CASE("the tuning mold renders the documented command lines") {
    const ParameterSpace space = tuning_space();
    const Configuration def = space.default_configuration();
    CHECK(render_template("openmc --event -i #P1 -b #P2 -m #P3", space, def) ==
          "openmc --event -i 1000000 -b 4000 -m 20000");
    CHECK(render_template("-c #P4 --ntasks-per-gpu=#P5 --cpu-bind=#P6", space, def) ==
          "-c 8 --ntasks-per-gpu=1 --cpu-bind=threads");
    CHECK(render_template("plain text, no placeholders", space, def) ==
          "plain text, no placeholders");
}

TEST_CASE("inactive parameters render as the literal nan") {
    const ParameterSpace space = tuning_space();
    Configuration cfg = space.default_configuration();
    cfg[0] = Value{std::string("openmc-queueless")};
    cfg[3] = std::nullopt;
    CHECK(render_template("-m #P3", space, cfg) == "-m nan");
}

TEST_CASE("placeholder indices consume the maximal digit run") {
    std::vector<ParameterSpec> params;
    for (int i = 0; i < 11; ++i)
        params.push_back({"p" + std::to_string(i), UniformIntKind{0, 100, 1},
                          Value{std::int64_t{i}}});
    const ParameterSpace space(std::move(params), {});
    const Configuration def = space.default_configuration();
    CHECK(render_template("#P10", space, def) == "10"); // param 10, not param 1 plus "0"
    CHECK(render_template("#P1#P0", space, def) == "10");
    CHECK(render_template("x#P10y", space, def) == "x10y");
}

TEST_CASE("rendering rejects unknown indices and surviving placeholders") {
    const ParameterSpace space = testutil::small_space();
    const Configuration def = space.default_configuration();
    CHECK_THROWS_AS((void)render_template("#P9", space, def), Error);
    // A '#' that does not start a placeholder is ordinary text.
    CHECK(render_template("# comment #P x", space, def) == "# comment #P x");

    // A parameter value that itself looks like a placeholder must not
    // survive into the rendered output unnoticed.
    std::vector<ParameterSpec> params;
    params.push_back({"evil", CategoricalKind{{"#P0"}}, Value{std::string("#P0")}});
    const ParameterSpace evil(std::move(params), {});
    CHECK_THROWS_AS((void)render_template("#P0", evil, evil.default_configuration()), Error);
}

TEST_CASE("render_mold validates the configuration first") {
    const ParameterSpace space = tuning_space();
    Configuration bad = space.default_configuration();
    bad[4] = Value{std::int64_t{77}};
    const CodeMold mold{"run #P4", "-c #P4"};
    CHECK_THROWS_AS((void)render_mold(mold, space, bad), Error);
    const auto rendered = render_mold(mold, space, space.default_configuration());
    CHECK(rendered.script_text == "run 8");
    CHECK(rendered.launcher_args == "-c 8");
}

TEST_CASE("energy aggregation follows the documented examples") {
    CHECK(aggregate_energy({{100.0, 20.0}, {110.0, 30.0}}) == 130.0);
    CHECK(aggregate_energy({{5.0, 2.0}}) == 7.0);
    CHECK(aggregate_energy({{110.0, 30.0}, {100.0, 20.0}}) == 130.0); // order is irrelevant
    CHECK_THROWS_AS((void)aggregate_energy({}), Error);
    CHECK_THROWS_AS((void)aggregate_energy({{-1.0, 0.0}}), Error);
}

TEST_CASE("edp and default timeout arithmetic") {
    CHECK(compute_edp(130.0, 2.0) == 260.0);
    CHECK(compute_edp(5.0, 0.0) == 0.0);
    CHECK_THROWS_AS((void)compute_edp(-1.0, 1.0), Error);
    CHECK_THROWS_AS((void)compute_edp(1.0, -1.0), Error);

    CHECK(default_timeout(200.0) == 300.0);
    CHECK(default_timeout(1.0) == 1.5);
    CHECK_THROWS_AS((void)default_timeout(0.0), Error);
    CHECK_THROWS_AS((void)default_timeout(-5.0), Error);
}

TEST_CASE("metric kinds parse, print, and carry their orientation") {
    CHECK(metric_kind_from_string("fom") == MetricKind::fom);
    CHECK(metric_kind_from_string("edp") == MetricKind::edp);
    CHECK(std::string(to_string(MetricKind::runtime)) == "runtime");
    CHECK_THROWS_AS((void)metric_kind_from_string("speed"), ParseError);
    MetricSpec spec;
    spec.kind = MetricKind::fom;
    CHECK(spec.direction() == Direction::maximize);
    for (const MetricKind kind : {MetricKind::runtime, MetricKind::energy, MetricKind::edp}) {
        spec.kind = kind;
        CHECK(spec.direction() == Direction::minimize);
    }
}

TEST_CASE("energy files parse per node and skip blank lines") {
    testutil::TempDir tmp;
    const auto path = tmp.path() / "metrics.txt";
    testutil::write_file(path, "100 20\n\n110 30\n");
    const auto nodes = read_energy_file(path);
    REQUIRE(nodes.size() == 2);
    CHECK(nodes[0] == std::pair{100.0, 20.0});
    CHECK(nodes[1] == std::pair{110.0, 30.0});

    testutil::write_file(path, "100\n");
    CHECK_THROWS_AS((void)read_energy_file(path), ParseError);
    CHECK_THROWS_AS((void)read_energy_file(tmp.path() / "missing.txt"), IoError);
}

TEST_CASE("successful runs parse the last stdout match") {
    testutil::TempDir tmp;
    auto req = base_request(tmp.path() / "run",
                            "echo 'FOM: 100 particles/s'\n"
                            "echo 'warming up' >&2\n"
                            "echo 'FOM: 2.5e5 particles/s'\n");
    const auto out = execute_with_timeout(req);
    CHECK(out.status == EvalStatus::ok);
    CHECK(out.objective == 250000.0);
    CHECK(out.elapsed > 0.0);
    CHECK(testutil::read_file(req.work_dir / "stdout.log").find("warming up") ==
          std::string::npos);
    CHECK(testutil::read_file(req.work_dir / "stderr.log") == "warming up\n");
    CHECK(testutil::read_file(req.work_dir / "script") == req.script_text);
}

TEST_CASE("launcher arguments reach the script and are recorded") {
    testutil::TempDir tmp;
    auto req = base_request(tmp.path() / "run",
                            "echo \"env: $AUTOTUNE_LAUNCHER_ARGS\"\n"
                            "echo \"argv: $1 $2\"\n"
                            "echo 'FOM: 1 particles/s'\n");
    req.launcher_args = "-c 8 --cpu-bind=threads";
    const auto out = execute_with_timeout(req);
    CHECK(out.status == EvalStatus::ok);
    const std::string stdout_log = testutil::read_file(req.work_dir / "stdout.log");
    CHECK(stdout_log.find("env: -c 8 --cpu-bind=threads") != std::string::npos);
    CHECK(stdout_log.find("argv: -c 8") != std::string::npos);
    CHECK(testutil::read_file(req.work_dir / "launcher") == "-c 8 --cpu-bind=threads\n");
}

TEST_CASE("nonzero exits and unparseable output fail with the penalty") {
    testutil::TempDir tmp;

    auto failing = base_request(tmp.path() / "a", "exit 3\n");
    auto out = execute_with_timeout(failing);
    CHECK(out.status == EvalStatus::fail);
    CHECK(out.objective == -1.0);

    auto silent = base_request(tmp.path() / "b", "echo 'no figure here'\n");
    silent.penalty = -7.0;
    out = execute_with_timeout(silent);
    CHECK(out.status == EvalStatus::fail);
    CHECK(out.objective == -7.0);

    auto unwritable = base_request("/proc/no-such-dir/run", "exit 0\n");
    out = execute_with_timeout(unwritable);
    CHECK(out.status == EvalStatus::fail);
    CHECK(out.objective == -1.0);
}

TEST_CASE("timeouts kill the process group and report per direction") {
    testutil::TempDir tmp;
    auto req = base_request(tmp.path() / "run", "(sleep 1 && touch leaked) &\nwait\n");
    req.timeout_sec = 0.3;

    SUBCASE("maximize gets the penalty") {
        req.penalty = -2.0;
        const auto out = execute_with_timeout(req);
        CHECK(out.status == EvalStatus::timeout);
        CHECK(out.objective == -2.0);
        CHECK(out.elapsed >= 0.3);
        CHECK(out.elapsed < 1.0);
    }
    SUBCASE("minimize gets the timeout itself") {
        req.direction = Direction::minimize;
        req.metric.kind = MetricKind::runtime;
        const auto out = execute_with_timeout(req);
        CHECK(out.status == EvalStatus::timeout);
        CHECK(out.objective == 0.3);
    }

    // The background child was in the same process group, so it must be
    // gone: give its sleep time to expire and check no marker appeared.
    std::this_thread::sleep_for(std::chrono::milliseconds(1200));
    CHECK(!fs::exists(req.work_dir / "leaked"));
}

TEST_CASE("runtime metric with an empty pattern measures wall time") {
    testutil::TempDir tmp;
    auto req = base_request(tmp.path() / "run", "sleep 0.1\n");
    req.metric.kind = MetricKind::runtime;
    req.metric.stdout_pattern.clear();
    req.direction = Direction::minimize;
    const auto out = execute_with_timeout(req);
    CHECK(out.status == EvalStatus::ok);
    CHECK(out.objective == out.elapsed);
    CHECK(out.elapsed >= 0.1);
    CHECK(out.elapsed < 2.0);
}

TEST_CASE("runtime metric can also parse a reported time") {
    testutil::TempDir tmp;
    auto req = base_request(tmp.path() / "run", "echo 'total time: 3.5 s'\n");
    req.metric.kind = MetricKind::runtime;
    req.metric.stdout_pattern = R"(total time: ([0-9.]+) s)";
    req.direction = Direction::minimize;
    const auto out = execute_with_timeout(req);
    CHECK(out.status == EvalStatus::ok);
    CHECK(out.objective == 3.5);
}

TEST_CASE("energy and edp metrics read the per-node metrics file") {
    testutil::TempDir tmp;
    auto req = base_request(tmp.path() / "run", "printf '100 20\\n110 30\\n' > metrics.txt\n");
    req.metric.kind = MetricKind::energy;
    req.metric.stdout_pattern.clear();
    req.direction = Direction::minimize;
    auto out = execute_with_timeout(req);
    CHECK(out.status == EvalStatus::ok);
    CHECK(out.objective == 130.0);

    req.work_dir = tmp.path() / "run-edp";
    req.metric.kind = MetricKind::edp;
    out = execute_with_timeout(req);
    CHECK(out.status == EvalStatus::ok);
    CHECK(out.objective == compute_edp(130.0, out.elapsed));

    req.work_dir = tmp.path() / "run-missing";
    req.script_text = "exit 0\n";
    out = execute_with_timeout(req);
    CHECK(out.status == EvalStatus::fail); // no metrics file was produced
}

TEST_CASE("the subprocess evaluator lays out one directory per evaluation") {
    testutil::TempDir tmp;
    const ParameterSpace space = tuning_space();
    CodeMold mold;
    mold.template_text = "echo \"FOM: #P2 particles/s\"\n";
    mold.launcher_template = "-c #P4";
    MetricSpec metric;
    metric.kind = MetricKind::fom;
    metric.stdout_pattern = R"(FOM:\s*([0-9.eE+-]+)\s*particles/s)";
    const SubprocessEvaluator evaluator(space, mold, metric, tmp.path());

    EvalRequest req;
    req.eval_id = 3;
    req.worker_id = 1;
    req.config = space.default_configuration();
    req.timeout_sec = 10.0;
    req.penalty = -1.0;
    req.direction = Direction::maximize;
    const auto out = evaluator(req);
    CHECK(out.status == EvalStatus::ok);
    CHECK(out.objective == 4000.0); // P2's default echoed back
    CHECK(fs::exists(tmp.path() / "evals" / "3" / "script"));
    CHECK(fs::exists(tmp.path() / "evals" / "3" / "stdout.log"));
    CHECK(testutil::read_file(tmp.path() / "evals" / "3" / "launcher") == "-c 8\n");
}

TEST_CASE("execution requires a positive timeout") {
    ExecutionRequest req;
    req.script_text = "exit 0\n";
    req.work_dir = "/tmp/never-created";
    req.timeout_sec = 0.0;
    CHECK_THROWS_AS((void)execute_with_timeout(req), Error);
}
