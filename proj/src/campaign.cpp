#include "campaign.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"

#include "errors.hpp"

namespace autotune {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path resolve(const fs::path& base_dir, const std::string& relative) {
    fs::path p(relative);
    return p.is_absolute() ? p : base_dir / p;
}

MetricSpec parse_metric(const json& j) {
    if (!j.is_object())
        throw ParseError("campaign file: 'metric' must be an object");
    MetricSpec metric;
    if (!j.contains("kind") || !j.at("kind").is_string())
        throw ParseError("campaign file: metric.kind is required");
    metric.kind = metric_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("stdout_pattern")) {
        if (!j.at("stdout_pattern").is_string())
            throw ParseError("campaign file: metric.stdout_pattern must be a string");
        metric.stdout_pattern = j.at("stdout_pattern").get<std::string>();
    }
    if (j.contains("metrics_filename")) {
        if (!j.at("metrics_filename").is_string())
            throw ParseError("campaign file: metric.metrics_filename must be a string");
        metric.metrics_filename = j.at("metrics_filename").get<std::string>();
    }
    if ((metric.kind == MetricKind::fom) && metric.stdout_pattern.empty())
        throw ParseError("campaign file: fom metrics need metric.stdout_pattern");
    if (!metric.stdout_pattern.empty()) {
        try {
            std::regex probe(metric.stdout_pattern);
            if (probe.mark_count() < 1)
                throw ParseError("campaign file: metric.stdout_pattern needs one capture group");
        } catch (const std::regex_error& e) {
            throw ParseError(std::string("campaign file: metric.stdout_pattern does not compile: ") +
                             e.what());
        }
    }
    return metric;
}

double get_number(const json& j, const char* key) {
    if (!j.at(key).is_number())
        throw ParseError(std::string("campaign file: '") + key + "' must be a number");
    return j.at(key).get<double>();
}

int get_int(const json& j, const char* key) {
    if (!j.at(key).is_number_integer())
        throw ParseError(std::string("campaign file: '") + key + "' must be an integer");
    return j.at(key).get<int>();
}

} // namespace

CampaignDefinition load_campaign_file(const fs::path& path) {
    json j;
    try {
        j = json::parse(slurp_file(path));
    } catch (const json::exception& e) {
        throw ParseError("campaign file " + path.string() + ": " + e.what());
    }
    if (!j.is_object())
        throw ParseError("campaign file " + path.string() + ": top level must be an object");

    const fs::path base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");

    std::optional<ParameterSpace> space;
    if (j.contains("space_file")) {
        if (!j.at("space_file").is_string())
            throw ParseError("campaign file: 'space_file' must be a string");
        space = ParameterSpace::from_json_file(
            resolve(base_dir, j.at("space_file").get<std::string>()).string());
    } else if (j.contains("space")) {
        space = ParameterSpace::from_json_text(j.at("space").dump());
    }

    if (!j.contains("evaluator") || !j.at("evaluator").is_string())
        throw ParseError("campaign file: 'evaluator' is required (\"subprocess\" or "
                         "\"synthetic:<name>\")");
    const std::string evaluator = j.at("evaluator").get<std::string>();

    CampaignDefinition def = [&]() -> CampaignDefinition {
        if (evaluator.rfind("synthetic:", 0) == 0) {
            const std::string name = evaluator.substr(std::string("synthetic:").size());
            SyntheticBenchmark bench = synthetic_benchmark(name);
            if (space)
                throw ParseError("campaign file: synthetic evaluators bring their own space; "
                                 "remove 'space'/'space_file'");
            CampaignDefinition d(std::move(bench.space));
            d.evaluator_kind = EvaluatorKind::synthetic;
            d.synthetic_name = name;
            d.synthetic_objective = std::move(bench.objective);
            d.config.direction = Direction::minimize;
            d.config.metric_name = evaluator;
            return d;
        }
        if (evaluator == "subprocess") {
            if (!space)
                throw ParseError("campaign file: subprocess evaluators need 'space' or "
                                 "'space_file'");
            CampaignDefinition d(std::move(*space));
            d.evaluator_kind = EvaluatorKind::subprocess;
            if (!j.contains("mold_file") || !j.at("mold_file").is_string())
                throw ParseError("campaign file: subprocess evaluators need 'mold_file'");
            d.mold.template_text =
                slurp_file(resolve(base_dir, j.at("mold_file").get<std::string>()));
            if (j.contains("launcher_file")) {
                d.mold.launcher_template =
                    slurp_file(resolve(base_dir, j.at("launcher_file").get<std::string>()));
                // Launcher arguments are one logical line.
                while (!d.mold.launcher_template.empty() &&
                       (d.mold.launcher_template.back() == '\n' ||
                        d.mold.launcher_template.back() == '\r'))
                    d.mold.launcher_template.pop_back();
            }
            if (!j.contains("metric"))
                throw ParseError("campaign file: subprocess evaluators need 'metric'");
            d.metric = parse_metric(j.at("metric"));
            d.config.direction = d.metric.direction();
            d.config.metric_name = to_string(d.metric.kind);
            return d;
        }
        throw ParseError("campaign file: unknown evaluator '" + evaluator + "'");
    }();

    if (def.evaluator_kind == EvaluatorKind::synthetic && j.contains("synthetic")) {
        const json& s = j.at("synthetic");
        if (!s.is_object())
            throw ParseError("campaign file: 'synthetic' must be an object");
        if (s.contains("sleep_sec"))
            def.synthetic_objective.sleep_sec = get_number(s, "sleep_sec");
        if (s.contains("noise_std"))
            def.synthetic_objective.noise_std = get_number(s, "noise_std");
        if (def.synthetic_objective.sleep_sec < 0 || def.synthetic_objective.noise_std < 0)
            throw ParseError("campaign file: synthetic sleep_sec/noise_std must be >= 0");
    }

    CampaignConfig& c = def.config;
    if (j.contains("workers"))
        c.n_workers = get_int(j, "workers");
    if (j.contains("max_evals"))
        c.max_evals = get_int(j, "max_evals");
    else
        c.max_evals = std::max(c.n_workers, 16);
    if (j.contains("timeout"))
        c.eval_timeout = get_number(j, "timeout");
    if (j.contains("kappa"))
        c.kappa = get_number(j, "kappa");
    if (j.contains("n_initial"))
        c.n_initial = get_int(j, "n_initial");
    if (j.contains("candidate_pool_size"))
        c.candidate_pool_size = get_int(j, "candidate_pool_size");
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer())
            throw ParseError("campaign file: 'seed' must be an integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("direction")) {
        if (!j.at("direction").is_string())
            throw ParseError("campaign file: 'direction' must be a string");
        c.direction = direction_from_string(j.at("direction").get<std::string>());
    }
    if (j.contains("penalty"))
        c.penalty = get_number(j, "penalty");
    if (j.contains("wall_clock_budget"))
        c.wall_clock_budget = get_number(j, "wall_clock_budget");
    if (j.contains("n_trees"))
        c.forest.n_trees = get_int(j, "n_trees");

    if (j.contains("baseline")) {
        const json& b = j.at("baseline");
        if (!b.is_object() || !b.contains("objective"))
            throw ParseError("campaign file: 'baseline' must be an object with 'objective'");
        BaselineSpec baseline;
        baseline.objective = get_number(b, "objective");
        if (b.contains("provenance")) {
            if (!b.at("provenance").is_string())
                throw ParseError("campaign file: baseline.provenance must be a string");
            baseline.provenance = b.at("provenance").get<std::string>();
        }
        baseline.direction = c.direction;
        def.baseline = baseline;
    }

    try {
        c.validate();
    } catch (const Error& e) {
        throw ParseError("campaign file: " + std::string(e.what()));
    }

    // Surface placeholder mistakes now, not on worker threads mid-campaign.
    if (def.evaluator_kind == EvaluatorKind::subprocess)
        render_mold(def.mold, def.space, def.space.default_configuration());

    return def;
}

void apply_overrides(CampaignDefinition& def, const CampaignOverrides& overrides) {
    CampaignConfig& c = def.config;
    if (overrides.workers)
        c.n_workers = *overrides.workers;
    if (overrides.max_evals)
        c.max_evals = *overrides.max_evals;
    if (overrides.timeout)
        c.eval_timeout = *overrides.timeout;
    if (overrides.kappa)
        c.kappa = *overrides.kappa;
    if (overrides.seed)
        c.seed = *overrides.seed;
    if (overrides.direction)
        c.direction = direction_from_string(*overrides.direction);
    if (overrides.penalty)
        c.penalty = *overrides.penalty;
    if (overrides.wall_clock_budget)
        c.wall_clock_budget = *overrides.wall_clock_budget;
    if (overrides.reproducible_timestamps)
        c.reproducible_timestamps = true;
    if (def.baseline)
        def.baseline->direction = c.direction;
    try {
        c.validate();
    } catch (const Error& e) {
        throw ParseError(e.what());
    }
}

Evaluator make_evaluator(const CampaignDefinition& def, const fs::path& output_dir) {
    if (def.evaluator_kind == EvaluatorKind::synthetic)
        return make_synthetic_evaluator(def.space, def.synthetic_objective);
    return SubprocessEvaluator(def.space, def.mold, def.metric, output_dir);
}

CampaignRunOutput run_campaign_definition(const CampaignDefinition& def,
                                          const fs::path& output_dir) {
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + output_dir.string());

    CampaignRunOutput out;
    out.results_path = output_dir / "results.csv";
    out.trace_path = output_dir / "trace.csv";

    ResultsWriter writer(out.results_path, def.space);
    const Evaluator evaluator = make_evaluator(def, output_dir);
    out.result = run_campaign(def.space, evaluator, def.config, &writer);
    write_trace_csv(out.trace_path, export_trace(out.result.records, def.baseline));
    return out;
}

std::string dry_run_preview(const CampaignDefinition& def) {
    std::ostringstream out;
    OptimizerConfig opt_config;
    opt_config.kappa = def.config.kappa;
    opt_config.n_initial = def.config.effective_n_initial();
    opt_config.candidate_pool_size = def.config.candidate_pool_size;
    opt_config.seed = def.config.seed;
    opt_config.direction = def.config.direction;
    AskTellOptimizer optimizer(def.space, opt_config);

    std::vector<std::pair<std::string, Configuration>> picks;
    picks.emplace_back("default configuration", def.space.default_configuration());
    for (int i = 0; i < def.config.n_workers; ++i) {
        try {
            picks.emplace_back("initial batch [" + std::to_string(i) + "]", optimizer.ask());
        } catch (const SpaceExhausted&) {
            break;
        }
    }

    for (const auto& [label, cfg] : picks) {
        out << "# " << label << '\n';
        for (std::size_t i = 0; i < def.space.size(); ++i)
            out << "#   " << def.space.param(i).name << " = " << format_config_value(cfg[i])
                << '\n';
        if (def.evaluator_kind == EvaluatorKind::subprocess) {
            const RenderedEvaluation rendered = render_mold(def.mold, def.space, cfg);
            if (!rendered.launcher_args.empty())
                out << "# launcher: " << rendered.launcher_args << '\n';
            out << rendered.script_text;
            if (!rendered.script_text.empty() && rendered.script_text.back() != '\n')
                out << '\n';
        } else {
            out << "# evaluator: synthetic:" << def.synthetic_name << '\n';
        }
        out << '\n';
    }
    return out.str();
}

} // namespace autotune
