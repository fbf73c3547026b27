#include "harness.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "errors.hpp"

extern char** environ;

namespace autotune {

namespace fs = std::filesystem;

const char* to_string(MetricKind k) {
    switch (k) {
    case MetricKind::fom:
        return "fom";
    case MetricKind::runtime:
        return "runtime";
    case MetricKind::energy:
        return "energy";
    default:
        return "edp";
    }
}

MetricKind metric_kind_from_string(const std::string& s) {
    if (s == "fom")
        return MetricKind::fom;
    if (s == "runtime")
        return MetricKind::runtime;
    if (s == "energy")
        return MetricKind::energy;
    if (s == "edp")
        return MetricKind::edp;
    throw ParseError("unknown metric kind '" + s + "' (expected fom, runtime, energy, or edp)");
}

std::string render_template(const std::string& text, const ParameterSpace& space,
                            const Configuration& cfg) {
    std::string out;
    out.reserve(text.size() + 32);
    const std::size_t n = text.size();
    std::size_t i = 0;
    auto digit = [&](std::size_t at) {
        return at < n && std::isdigit(static_cast<unsigned char>(text[at]));
    };
    while (i < n) {
        if (text[i] == '#' && i + 1 < n && text[i + 1] == 'P' && digit(i + 2)) {
            std::size_t j = i + 2;
            while (digit(j))
                ++j;
            const unsigned long k = std::stoul(text.substr(i + 2, j - i - 2));
            if (k >= space.size())
                throw Error("placeholder #P" + std::to_string(k) +
                            " references an unknown parameter (space has " +
                            std::to_string(space.size()) + ")");
            out += format_config_value(cfg[k]);
            i = j;
        } else {
            out += text[i];
            ++i;
        }
    }
    for (std::size_t p = 0; p + 2 < out.size(); ++p)
        if (out[p] == '#' && out[p + 1] == 'P' &&
            std::isdigit(static_cast<unsigned char>(out[p + 2])))
            throw Error("a #P placeholder survived rendering");
    return out;
}

RenderedEvaluation render_mold(const CodeMold& mold, const ParameterSpace& space,
                               const Configuration& cfg) {
    if (const auto violation = space.validate(cfg))
        throw Error("cannot render an invalid configuration: " + *violation);
    return {render_template(mold.template_text, space, cfg),
            render_template(mold.launcher_template, space, cfg)};
}

double aggregate_energy(const std::vector<std::pair<double, double>>& per_node) {
    if (per_node.empty())
        throw Error("aggregate_energy: no node measurements");
    double total = 0;
    for (const auto& [package, dram] : per_node) {
        if (package < 0 || dram < 0 || !std::isfinite(package) || !std::isfinite(dram))
            throw Error("aggregate_energy: energies must be finite and >= 0");
        total += package + dram;
    }
    return total / static_cast<double>(per_node.size());
}

double compute_edp(double energy_joules, double runtime_sec) {
    if (energy_joules < 0 || runtime_sec < 0)
        throw Error("compute_edp: energy and runtime must be >= 0");
    return energy_joules * runtime_sec;
}

double default_timeout(double baseline_runtime_sec) {
    if (!(baseline_runtime_sec > 0))
        throw Error("default_timeout: baseline runtime must be > 0");
    return 1.5 * baseline_runtime_sec;
}

std::vector<std::pair<double, double>> read_energy_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open metrics file " + path.string());
    std::vector<std::pair<double, double>> nodes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream ls(line);
        double package = 0, dram = 0;
        if (!(ls >> package >> dram))
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected two numeric fields 'package_energy_j dram_energy_j'");
        nodes.emplace_back(package, dram);
    }
    return nodes;
}

namespace {

bool write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        return false;
    out << content;
    out.flush();
    return out.good();
}

/// Last regex match's first capture group in `text`, parsed as a double.
std::optional<double> last_match_value(const std::string& text, const std::string& pattern) {
    std::regex re;
    try {
        re.assign(pattern, std::regex::ECMAScript);
    } catch (const std::regex_error&) {
        return std::nullopt;
    }
    if (re.mark_count() < 1)
        return std::nullopt;
    std::optional<std::string> captured;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
         it != std::sregex_iterator(); ++it)
        captured = (*it)[1].str();
    if (!captured)
        return std::nullopt;
    const char* begin = captured->c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin || !std::isfinite(value))
        return std::nullopt;
    return value;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct ChildProcess {
    pid_t pid = -1;
    bool spawned = false;
};

ChildProcess spawn_script(const fs::path& work_dir, const std::string& launcher_args) {
    ChildProcess child;

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addchdir_np(&actions, work_dir.c_str());
    posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
    posix_spawn_file_actions_addopen(&actions, 1, "stdout.log", O_WRONLY | O_CREAT | O_TRUNC,
                                     0644);
    posix_spawn_file_actions_addopen(&actions, 2, "stderr.log", O_WRONLY | O_CREAT | O_TRUNC,
                                     0644);

    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    // New process group so a timeout can kill the whole evaluation tree.
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);

    std::vector<std::string> arg_strings = {"/bin/sh", "script"};
    {
        std::istringstream tokens(launcher_args);
        std::string tok;
        while (tokens >> tok)
            arg_strings.push_back(tok);
    }
    std::vector<char*> argv;
    argv.reserve(arg_strings.size() + 1);
    for (auto& s : arg_strings)
        argv.push_back(s.data());
    argv.push_back(nullptr);

    std::string launcher_env = "AUTOTUNE_LAUNCHER_ARGS=" + launcher_args;
    std::vector<char*> envp;
    for (char** e = environ; *e; ++e)
        envp.push_back(*e);
    envp.push_back(launcher_env.data());
    envp.push_back(nullptr);

    pid_t pid = -1;
    const int rc = posix_spawn(&pid, "/bin/sh", &actions, &attr, argv.data(), envp.data());
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    if (rc == 0) {
        child.pid = pid;
        child.spawned = true;
    }
    return child;
}

} // namespace

ExecutionOutcome execute_with_timeout(const ExecutionRequest& req) {
    if (!(req.timeout_sec > 0))
        throw Error("execute_with_timeout: timeout must be > 0");

    ExecutionOutcome out;
    out.status = EvalStatus::fail;
    out.objective = req.penalty;

    std::error_code ec;
    fs::create_directories(req.work_dir, ec);
    if (ec)
        return out;
    if (!write_file(req.work_dir / "script", req.script_text))
        return out;
    write_file(req.work_dir / "launcher", req.launcher_args + "\n");

    const auto start = std::chrono::steady_clock::now();
    auto elapsed_sec = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    ChildProcess child = spawn_script(req.work_dir, req.launcher_args);
    if (!child.spawned) {
        out.elapsed = elapsed_sec();
        return out;
    }

    bool timed_out = false;
    siginfo_t info;
    for (;;) {
        info.si_pid = 0;
        // WNOWAIT peeks without reaping so the process group can be swept
        // before the leader pid is recycled.
        if (waitid(P_PID, static_cast<id_t>(child.pid), &info,
                   WEXITED | WNOHANG | WNOWAIT) == 0 &&
            info.si_pid == child.pid)
            break;
        if (elapsed_sec() >= req.timeout_sec) {
            timed_out = true;
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    out.elapsed = elapsed_sec();

    killpg(child.pid, SIGKILL); // sweep the whole evaluation tree (ESRCH is fine)
    int wait_status = 0;
    waitpid(child.pid, &wait_status, 0);

    if (timed_out) {
        out.status = EvalStatus::timeout;
        out.objective =
            req.direction == Direction::minimize ? req.timeout_sec : req.penalty;
        return out;
    }

    if (!WIFEXITED(wait_status) || WEXITSTATUS(wait_status) != 0)
        return out; // fail, penalty already set

    switch (req.metric.kind) {
    case MetricKind::fom:
    case MetricKind::runtime: {
        if (req.metric.kind == MetricKind::runtime && req.metric.stdout_pattern.empty()) {
            out.objective = out.elapsed;
            out.status = EvalStatus::ok;
            return out;
        }
        const auto value =
            last_match_value(slurp(req.work_dir / "stdout.log"), req.metric.stdout_pattern);
        if (!value)
            return out;
        out.objective = *value;
        out.status = EvalStatus::ok;
        return out;
    }
    case MetricKind::energy:
    case MetricKind::edp: {
        double energy = 0;
        try {
            energy = aggregate_energy(read_energy_file(req.work_dir / req.metric.metrics_filename));
        } catch (const Error&) {
            return out;
        }
        out.objective =
            req.metric.kind == MetricKind::energy ? energy : compute_edp(energy, out.elapsed);
        out.status = EvalStatus::ok;
        return out;
    }
    }
    return out;
}

SubprocessEvaluator::SubprocessEvaluator(ParameterSpace space, CodeMold mold, MetricSpec metric,
                                         fs::path base_dir)
    : space_(std::move(space)),
      mold_(std::move(mold)),
      metric_(std::move(metric)),
      base_dir_(std::move(base_dir)) {}

ExecutionOutcome SubprocessEvaluator::operator()(const EvalRequest& req) const {
    const RenderedEvaluation rendered = render_mold(mold_, space_, req.config);
    ExecutionRequest exec;
    exec.script_text = rendered.script_text;
    exec.launcher_args = rendered.launcher_args;
    exec.work_dir = base_dir_ / "evals" / std::to_string(req.eval_id);
    exec.timeout_sec = req.timeout_sec;
    exec.penalty = req.penalty;
    exec.metric = metric_;
    exec.direction = req.direction;
    return execute_with_timeout(exec);
}

} // namespace autotune
