#include "autotune/autotune.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "campaign.hpp"
#include "ensemble.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "space.hpp"
#include "store.hpp"

struct atune_space {
    autotune::ParameterSpace impl;
};

struct atune_campaign {
    autotune::CampaignDefinition impl;
};

namespace {

thread_local std::string t_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out)
        std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename F>
int wrap(F&& f) {
    try {
        return f();
    } catch (const autotune::ParseError& e) {
        t_last_error = e.what();
        return ATUNE_EINVAL;
    } catch (const autotune::IoError& e) {
        t_last_error = e.what();
        return ATUNE_EIO;
    } catch (const autotune::SpaceExhausted& e) {
        t_last_error = e.what();
        return ATUNE_EEXHAUSTED;
    } catch (const autotune::Error& e) {
        t_last_error = e.what();
        return ATUNE_EINVAL;
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return ATUNE_EFAIL;
    }
}

int require(bool ok, const char* message) {
    if (ok)
        return ATUNE_OK;
    t_last_error = message;
    return ATUNE_EINVAL;
}

} // namespace

extern "C" {

const char* atune_version(void) {
    return "0.1.0";
}

const char* atune_last_error(void) {
    return t_last_error.c_str();
}

void atune_string_free(char* s) {
    std::free(s);
}

int atune_space_from_file(const char* path, atune_space** out) {
    if (const int rc = require(path && out, "path and out must not be NULL"))
        return rc;
    return wrap([&] {
        *out = new atune_space{autotune::ParameterSpace::from_json_file(path)};
        return ATUNE_OK;
    });
}

int atune_space_from_text(const char* json_text, atune_space** out) {
    if (const int rc = require(json_text && out, "json_text and out must not be NULL"))
        return rc;
    return wrap([&] {
        *out = new atune_space{autotune::ParameterSpace::from_json_text(json_text)};
        return ATUNE_OK;
    });
}

void atune_space_free(atune_space* space) {
    delete space;
}

int atune_space_param_count(const atune_space* space, size_t* out) {
    if (const int rc = require(space && out, "space and out must not be NULL"))
        return rc;
    *out = space->impl.size();
    return ATUNE_OK;
}

int atune_space_sample_csv(const atune_space* space, uint64_t seed, size_t n, char** out_csv) {
    if (const int rc = require(space && out_csv, "space and out_csv must not be NULL"))
        return rc;
    return wrap([&] {
        std::string csv;
        for (const auto& p : space->impl.params()) {
            if (!csv.empty())
                csv += ',';
            csv += p.name;
        }
        csv += '\n';
        autotune::RandomSource rng(seed);
        for (size_t i = 0; i < n; ++i) {
            const autotune::Configuration cfg = space->impl.sample(rng);
            for (size_t k = 0; k < space->impl.size(); ++k) {
                if (k > 0)
                    csv += ',';
                csv += autotune::format_config_value(cfg[k]);
            }
            csv += '\n';
        }
        *out_csv = dup_string(csv);
        return require(*out_csv != nullptr, "out of memory");
    });
}

int atune_campaign_load(const char* path, atune_campaign** out) {
    if (const int rc = require(path && out, "path and out must not be NULL"))
        return rc;
    return wrap([&] {
        *out = new atune_campaign{autotune::load_campaign_file(path)};
        return ATUNE_OK;
    });
}

void atune_campaign_free(atune_campaign* campaign) {
    delete campaign;
}

#define ATUNE_SETTER(name, field, type)                                                        \
    int atune_campaign_set_##name(atune_campaign* c, type value) {                             \
        if (const int rc = require(c != nullptr, "campaign must not be NULL"))                 \
            return rc;                                                                         \
        c->impl.config.field = value;                                                          \
        return ATUNE_OK;                                                                       \
    }

ATUNE_SETTER(workers, n_workers, int)
ATUNE_SETTER(max_evals, max_evals, int)
ATUNE_SETTER(timeout, eval_timeout, double)
ATUNE_SETTER(kappa, kappa, double)
ATUNE_SETTER(seed, seed, uint64_t)
ATUNE_SETTER(penalty, penalty, double)
ATUNE_SETTER(wall_clock_budget, wall_clock_budget, double)

#undef ATUNE_SETTER

int atune_campaign_set_direction(atune_campaign* c, const char* direction) {
    if (const int rc = require(c && direction, "campaign and direction must not be NULL"))
        return rc;
    return wrap([&] {
        c->impl.config.direction = autotune::direction_from_string(direction);
        if (c->impl.baseline)
            c->impl.baseline->direction = c->impl.config.direction;
        return ATUNE_OK;
    });
}

int atune_campaign_set_reproducible_timestamps(atune_campaign* c, int enabled) {
    if (const int rc = require(c != nullptr, "campaign must not be NULL"))
        return rc;
    c->impl.config.reproducible_timestamps = enabled != 0;
    return ATUNE_OK;
}

int atune_campaign_run(atune_campaign* c, const char* output_dir, char** report_out) {
    if (const int rc = require(c && output_dir && report_out,
                               "campaign, output_dir, and report_out must not be NULL"))
        return rc;
    return wrap([&] {
        c->impl.config.validate();
        const autotune::CampaignRunOutput out =
            autotune::run_campaign_definition(c->impl, output_dir);
        std::string text = autotune::render_report(c->impl.space, out.result.records,
                                                   c->impl.config.direction, c->impl.baseline);
        if (out.result.exhausted)
            text += "note: search space exhausted after " +
                    std::to_string(out.result.records.size()) + " evaluations\n";
        text += "results: " + out.results_path.string() + "\n";
        text += "trace: " + out.trace_path.string() + "\n";
        *report_out = dup_string(text);
        if (!*report_out) {
            t_last_error = "out of memory";
            return ATUNE_EFAIL;
        }
        if (out.result.aborted) {
            t_last_error = "campaign aborted: " + out.result.abort_reason;
            return ATUNE_EABORTED;
        }
        return ATUNE_OK;
    });
}

int atune_campaign_dry_run(atune_campaign* c, char** preview_out) {
    if (const int rc = require(c && preview_out, "campaign and preview_out must not be NULL"))
        return rc;
    return wrap([&] {
        c->impl.config.validate();
        *preview_out = dup_string(autotune::dry_run_preview(c->impl));
        return require(*preview_out != nullptr, "out of memory");
    });
}

int atune_campaign_report(atune_campaign* c, const char* results_path,
                          const double* baseline_override, char** report_out) {
    if (const int rc = require(c && results_path && report_out,
                               "campaign, results_path, and report_out must not be NULL"))
        return rc;
    return wrap([&]() -> int {
        const auto records = autotune::read_results(results_path, c->impl.space);
        if (records.empty()) {
            t_last_error = std::string("no evaluation records in ") + results_path;
            return ATUNE_EINVAL;
        }
        std::optional<autotune::BaselineSpec> baseline = c->impl.baseline;
        if (baseline_override) {
            autotune::BaselineSpec b;
            b.objective = *baseline_override;
            b.provenance = "command-line override";
            b.direction = c->impl.config.direction;
            baseline = b;
        }
        *report_out = dup_string(autotune::render_report(c->impl.space, records,
                                                         c->impl.config.direction, baseline));
        return require(*report_out != nullptr, "out of memory");
    });
}

int atune_campaign_export_trace(atune_campaign* c, const char* results_path,
                                const char* trace_path) {
    if (const int rc = require(c && results_path && trace_path,
                               "campaign, results_path, and trace_path must not be NULL"))
        return rc;
    return wrap([&] {
        const auto records = autotune::read_results(results_path, c->impl.space);
        autotune::write_trace_csv(trace_path,
                                  autotune::export_trace(records, c->impl.baseline));
        return ATUNE_OK;
    });
}

} // extern "C"
