#include "space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace autotune {

namespace {

bool csv_safe(const std::string& s) {
    return s.find_first_of(",\"\n\r") == std::string::npos;
}

/// Violation text when `v` is not a legal value for `spec`, else nullopt.
std::optional<std::string> value_violation(const ParameterSpec& spec, const Value& v) {
    if (const auto* cat = std::get_if<CategoricalKind>(&spec.kind)) {
        const auto* s = std::get_if<std::string>(&v);
        if (!s)
            return spec.name + ": value has wrong type for categorical parameter";
        if (std::find(cat->choices.begin(), cat->choices.end(), *s) == cat->choices.end())
            return spec.name + ": value '" + *s + "' is not one of the choices";
        return std::nullopt;
    }
    if (const auto* ord = std::get_if<OrdinalKind>(&spec.kind)) {
        const auto* d = std::get_if<double>(&v);
        if (!d)
            return spec.name + ": value has wrong type for ordinal parameter";
        if (std::find(ord->sequence.begin(), ord->sequence.end(), *d) == ord->sequence.end())
            return spec.name + ": value " + format_value(v) + " is not in the ordinal sequence";
        return std::nullopt;
    }
    const auto& ui = std::get<UniformIntKind>(spec.kind);
    const auto* i = std::get_if<std::int64_t>(&v);
    if (!i)
        return spec.name + ": value has wrong type for uniform_int parameter";
    if (*i < ui.lower)
        return spec.name + ": value " + std::to_string(*i) + " below lower bound " +
               std::to_string(ui.lower);
    if (*i > ui.upper)
        return spec.name + ": value " + std::to_string(*i) + " above upper bound " +
               std::to_string(ui.upper);
    if ((*i - ui.lower) % ui.quantum != 0)
        return spec.name + ": value " + std::to_string(*i) +
               " is not on the quantum lattice (lower=" + std::to_string(ui.lower) +
               ", quantum=" + std::to_string(ui.quantum) + ")";
    return std::nullopt;
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a == 0 || b == 0)
        return 0;
    if (a > UINT64_MAX / b)
        return UINT64_MAX;
    return a * b;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    return a > UINT64_MAX - b ? UINT64_MAX : a + b;
}

} // namespace

std::string format_value(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v))
        return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&v)) {
        if (std::isfinite(*d) && std::floor(*d) == *d && std::fabs(*d) < 9.0e15)
            return std::to_string(static_cast<std::int64_t>(*d));
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", *d);
        return buf;
    }
    return std::get<std::string>(v);
}

std::string format_config_value(const std::optional<Value>& v) {
    return v.has_value() ? format_value(*v) : "nan";
}

ParameterSpace::ParameterSpace(std::vector<ParameterSpec> params,
                               std::vector<ActivationCondition> conditions)
    : params_(std::move(params)), conditions_(std::move(conditions)) {
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (!index_.emplace(params_[i].name, i).second)
            throw Error("duplicate parameter name '" + params_[i].name + "'");
    }
    condition_index_.assign(params_.size(), -1);
    for (std::size_t c = 0; c < conditions_.size(); ++c) {
        const auto& cond = conditions_[c];
        auto child = index_of(cond.child);
        if (!child)
            throw Error("condition references unknown child '" + cond.child + "'");
        if (!index_of(cond.parent))
            throw Error("condition references unknown parent '" + cond.parent + "'");
        if (cond.child == cond.parent)
            throw Error("condition child and parent are the same parameter '" + cond.child + "'");
        if (condition_index_[*child] != -1)
            throw Error("parameter '" + cond.child + "' has more than one condition");
        condition_index_[*child] = static_cast<int>(c);
    }
    check_invariants();
    build_topo_order();
}

void ParameterSpace::check_invariants() const {
    if (params_.empty())
        throw Error("space must declare at least one parameter");
    for (const auto& spec : params_) {
        if (spec.name.empty())
            throw Error("parameter name must not be empty");
        if (!csv_safe(spec.name))
            throw Error("parameter name '" + spec.name + "' contains a reserved character");
        if (const auto* cat = std::get_if<CategoricalKind>(&spec.kind)) {
            if (cat->choices.empty())
                throw Error(spec.name + ": categorical choices must not be empty");
            for (const auto& ch : cat->choices) {
                if (!csv_safe(ch))
                    throw Error(spec.name + ": choice '" + ch + "' contains a reserved character");
                if (ch == "nan")
                    throw Error(spec.name + ": choice 'nan' is reserved for inactive values");
                if (std::count(cat->choices.begin(), cat->choices.end(), ch) != 1)
                    throw Error(spec.name + ": categorical choices must be pairwise distinct");
            }
        } else if (const auto* ord = std::get_if<OrdinalKind>(&spec.kind)) {
            if (ord->sequence.empty())
                throw Error(spec.name + ": ordinal sequence must not be empty");
            for (double d : ord->sequence) {
                if (!std::isfinite(d))
                    throw Error(spec.name + ": ordinal sequence values must be finite");
                if (std::count(ord->sequence.begin(), ord->sequence.end(), d) != 1)
                    throw Error(spec.name + ": ordinal sequence values must be pairwise distinct");
            }
        } else {
            const auto& ui = std::get<UniformIntKind>(spec.kind);
            if (ui.quantum < 1)
                throw Error(spec.name + ": quantum must be >= 1");
            if (ui.lower > ui.upper)
                throw Error(spec.name + ": lower bound exceeds upper bound");
        }
        if (auto viol = value_violation(spec, spec.default_value))
            throw Error("default " + *viol);
    }
    for (const auto& cond : conditions_) {
        const auto& parent_spec = params_[*index_of(cond.parent)];
        if (auto viol = value_violation(parent_spec, cond.required_value))
            throw Error("condition on '" + cond.child + "': required " + *viol);
    }
    // Cycle check: follow parent chains; a chain longer than the parameter
    // count means the conditions loop back on themselves.
    for (std::size_t i = 0; i < params_.size(); ++i) {
        std::size_t steps = 0;
        std::size_t j = i;
        while (condition_index_[j] != -1) {
            j = *index_of(conditions_[condition_index_[j]].parent);
            if (++steps > params_.size())
                throw Error("condition cycle involving parameter '" + params_[i].name + "'");
        }
    }
}

void ParameterSpace::build_topo_order() {
    // Depth = length of the parent chain; parents come first, ties keep
    // declaration order.
    std::vector<std::size_t> depth(params_.size(), 0);
    for (std::size_t i = 0; i < params_.size(); ++i) {
        std::size_t j = i;
        while (condition_index_[j] != -1) {
            j = *index_of(conditions_[condition_index_[j]].parent);
            ++depth[i];
        }
    }
    topo_order_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i)
        topo_order_[i] = i;
    std::stable_sort(topo_order_.begin(), topo_order_.end(),
                     [&](std::size_t a, std::size_t b) { return depth[a] < depth[b]; });
}

std::optional<std::size_t> ParameterSpace::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

const ActivationCondition* ParameterSpace::condition_for(std::size_t i) const {
    if (condition_index_[i] == -1)
        return nullptr;
    return &conditions_[condition_index_[i]];
}

std::optional<std::size_t> ParameterSpace::parent_of(std::size_t i) const {
    const auto* cond = condition_for(i);
    if (!cond)
        return std::nullopt;
    return index_of(cond->parent);
}

Configuration ParameterSpace::default_configuration() const {
    std::vector<std::optional<Value>> values(params_.size());
    for (std::size_t i : topo_order_) {
        if (const auto* cond = condition_for(i)) {
            const auto& parent_value = values[*index_of(cond->parent)];
            if (!parent_value.has_value() || !(*parent_value == cond->required_value))
                continue; // inactive
        }
        values[i] = params_[i].default_value;
    }
    return Configuration(std::move(values));
}

Configuration ParameterSpace::sample(RandomSource& rng) const {
    std::vector<std::optional<Value>> values(params_.size());
    for (std::size_t i : topo_order_) {
        if (const auto* cond = condition_for(i)) {
            const auto& parent_value = values[*index_of(cond->parent)];
            if (!parent_value.has_value() || !(*parent_value == cond->required_value))
                continue; // inactive, no draw consumed
        }
        const auto& spec = params_[i];
        if (const auto* cat = std::get_if<CategoricalKind>(&spec.kind)) {
            values[i] = cat->choices[rng.bounded(cat->choices.size())];
        } else if (const auto* ord = std::get_if<OrdinalKind>(&spec.kind)) {
            values[i] = ord->sequence[rng.bounded(ord->sequence.size())];
        } else {
            const auto& ui = std::get<UniformIntKind>(spec.kind);
            const auto k = static_cast<std::int64_t>(
                rng.bounded(static_cast<std::uint64_t>(ui.lattice_size())));
            values[i] = ui.lower + k * ui.quantum;
        }
    }
    return Configuration(std::move(values));
}

std::optional<std::string> ParameterSpace::validate(const Configuration& cfg) const {
    if (cfg.size() != params_.size())
        return "configuration has " + std::to_string(cfg.size()) + " values but space has " +
               std::to_string(params_.size()) + " parameters";
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const auto& spec = params_[i];
        bool expect_active = true;
        if (const auto* cond = condition_for(i)) {
            const auto& parent_value = cfg[*index_of(cond->parent)];
            expect_active = parent_value.has_value() && *parent_value == cond->required_value;
            if (!expect_active && cfg[i].has_value())
                return spec.name + ": must be inactive (" + cond->parent +
                       " != " + format_value(cond->required_value) + ")";
            if (expect_active && !cfg[i].has_value())
                return spec.name + ": must be active (" + cond->parent +
                       " == " + format_value(cond->required_value) + ")";
        } else if (!cfg[i].has_value()) {
            return spec.name + ": must be active (no condition gates it)";
        }
        if (cfg[i].has_value()) {
            if (auto viol = value_violation(spec, *cfg[i]))
                return viol;
        }
    }
    return std::nullopt;
}

std::optional<std::string> ParameterSpace::validate_named(
    const std::map<std::string, std::optional<Value>>& values) const {
    for (const auto& [name, _] : values) {
        if (!index_of(name))
            return "unknown parameter '" + name + "'";
    }
    for (const auto& spec : params_) {
        if (!values.count(spec.name))
            return "missing parameter '" + spec.name + "'";
    }
    return validate(configuration_from_map(values));
}

Configuration ParameterSpace::configuration_from_map(
    const std::map<std::string, std::optional<Value>>& values) const {
    std::vector<std::optional<Value>> out(params_.size());
    for (const auto& [name, value] : values) {
        auto i = index_of(name);
        if (!i)
            throw Error("unknown parameter '" + name + "'");
        out[*i] = value;
    }
    return Configuration(std::move(out));
}

std::vector<std::int64_t> ParameterSpace::encode_key(const Configuration& cfg) const {
    if (auto viol = validate(cfg))
        throw Error("cannot encode invalid configuration: " + *viol);
    std::vector<std::int64_t> out(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (!cfg[i].has_value()) {
            out[i] = -1;
            continue;
        }
        const auto& spec = params_[i];
        if (const auto* cat = std::get_if<CategoricalKind>(&spec.kind)) {
            const auto& s = std::get<std::string>(*cfg[i]);
            out[i] = static_cast<std::int64_t>(
                std::find(cat->choices.begin(), cat->choices.end(), s) - cat->choices.begin());
        } else if (const auto* ord = std::get_if<OrdinalKind>(&spec.kind)) {
            const double d = std::get<double>(*cfg[i]);
            out[i] = static_cast<std::int64_t>(
                std::find(ord->sequence.begin(), ord->sequence.end(), d) - ord->sequence.begin());
        } else {
            out[i] = std::get<std::int64_t>(*cfg[i]);
        }
    }
    return out;
}

std::vector<double> ParameterSpace::encode(const Configuration& cfg) const {
    const auto ints = encode_key(cfg);
    return std::vector<double>(ints.begin(), ints.end());
}

std::string ParameterSpace::key(const Configuration& cfg) const {
    const auto ints = encode_key(cfg);
    std::string out;
    for (std::size_t i = 0; i < ints.size(); ++i) {
        if (i)
            out += ',';
        out += std::to_string(ints[i]);
    }
    return out;
}

std::int64_t ParameterSpace::value_count(std::size_t i) const {
    const auto& spec = params_[i];
    if (const auto* cat = std::get_if<CategoricalKind>(&spec.kind))
        return static_cast<std::int64_t>(cat->choices.size());
    if (const auto* ord = std::get_if<OrdinalKind>(&spec.kind))
        return static_cast<std::int64_t>(ord->sequence.size());
    return std::get<UniformIntKind>(spec.kind).lattice_size();
}

std::uint64_t ParameterSpace::cardinality() const {
    // Conditions form a forest (one parent per child, acyclic). The count
    // for a subtree rooted at an active parameter p is
    //   sum over values v of p: product over children gated on v of f(child),
    // where values that gate no child contribute 1 each.
    std::vector<std::vector<std::size_t>> children(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (auto p = parent_of(i))
            children[*p].push_back(i);
    }
    std::vector<std::uint64_t> f(params_.size(), 0);
    // topo_order_ has parents first; evaluate children first by reversing.
    for (auto it = topo_order_.rbegin(); it != topo_order_.rend(); ++it) {
        const std::size_t i = *it;
        const auto n_values = static_cast<std::uint64_t>(value_count(i));
        if (children[i].empty()) {
            f[i] = n_values;
            continue;
        }
        std::map<std::vector<std::int64_t>, std::uint64_t> by_required;
        for (std::size_t c : children[i]) {
            // Key required values by their encoded form to merge duplicates.
            const auto& req = condition_for(c)->required_value;
            std::vector<std::int64_t> rk;
            if (const auto* s = std::get_if<std::string>(&req)) {
                const auto& cat = std::get<CategoricalKind>(params_[i].kind);
                rk = {static_cast<std::int64_t>(
                    std::find(cat.choices.begin(), cat.choices.end(), *s) - cat.choices.begin())};
            } else if (const auto* d = std::get_if<double>(&req)) {
                const auto& ord = std::get<OrdinalKind>(params_[i].kind);
                rk = {static_cast<std::int64_t>(
                    std::find(ord.sequence.begin(), ord.sequence.end(), *d) -
                    ord.sequence.begin())};
            } else {
                rk = {std::get<std::int64_t>(req)};
            }
            auto [pos, inserted] = by_required.emplace(rk, f[c]);
            if (!inserted)
                pos->second = saturating_mul(pos->second, f[c]);
        }
        std::uint64_t total = n_values - static_cast<std::uint64_t>(by_required.size());
        for (const auto& [_, prod] : by_required)
            total = saturating_add(total, prod);
        f[i] = total;
    }
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (!parent_of(i))
            total = saturating_mul(total, f[i]);
    }
    return total;
}

std::optional<std::vector<Configuration>> ParameterSpace::enumerate(std::uint64_t limit) const {
    if (cardinality() > limit)
        return std::nullopt;
    std::vector<Configuration> out;
    std::vector<std::optional<Value>> current(params_.size());

    auto recurse = [&](auto&& self, std::size_t pos) -> void {
        if (pos == topo_order_.size()) {
            out.emplace_back(current);
            return;
        }
        const std::size_t i = topo_order_[pos];
        if (const auto* cond = condition_for(i)) {
            const auto& parent_value = current[*index_of(cond->parent)];
            if (!parent_value.has_value() || !(*parent_value == cond->required_value)) {
                current[i] = std::nullopt;
                self(self, pos + 1);
                return;
            }
        }
        const auto& spec = params_[i];
        if (const auto* cat = std::get_if<CategoricalKind>(&spec.kind)) {
            for (const auto& ch : cat->choices) {
                current[i] = ch;
                self(self, pos + 1);
            }
        } else if (const auto* ord = std::get_if<OrdinalKind>(&spec.kind)) {
            for (double d : ord->sequence) {
                current[i] = d;
                self(self, pos + 1);
            }
        } else {
            const auto& ui = std::get<UniformIntKind>(spec.kind);
            for (std::int64_t v = ui.lower; v <= ui.upper; v += ui.quantum) {
                current[i] = v;
                self(self, pos + 1);
            }
        }
        current[i] = std::nullopt;
    };
    recurse(recurse, 0);
    return out;
}

namespace {

using nlohmann::json;

Value coerce_to_spec(const ParameterSpec& spec, const json& j, const std::string& context) {
    if (spec.is_categorical()) {
        if (!j.is_string())
            throw ParseError(context + ": expected a string for categorical parameter '" +
                             spec.name + "'");
        return j.get<std::string>();
    }
    if (spec.is_ordinal()) {
        if (!j.is_number())
            throw ParseError(context + ": expected a number for ordinal parameter '" + spec.name +
                             "'");
        return j.get<double>();
    }
    if (!j.is_number_integer())
        throw ParseError(context + ": expected an integer for uniform_int parameter '" +
                         spec.name + "'");
    return j.get<std::int64_t>();
}

ParameterSpec parse_parameter(const json& j) {
    if (!j.is_object())
        throw ParseError("each entry of 'parameters' must be an object");
    if (!j.contains("name") || !j.at("name").is_string())
        throw ParseError("parameter entry is missing a string 'name'");
    if (!j.contains("type") || !j.at("type").is_string())
        throw ParseError("parameter entry is missing a string 'type'");
    ParameterSpec spec;
    spec.name = j.at("name").get<std::string>();
    const auto type = j.at("type").get<std::string>();
    if (!j.contains("default"))
        throw ParseError("parameter '" + spec.name + "' is missing 'default'");
    if (type == "categorical") {
        if (!j.contains("choices") || !j.at("choices").is_array())
            throw ParseError("parameter '" + spec.name + "' needs a 'choices' array");
        CategoricalKind kind;
        for (const auto& c : j.at("choices")) {
            if (!c.is_string())
                throw ParseError("parameter '" + spec.name + "': choices must be strings");
            kind.choices.push_back(c.get<std::string>());
        }
        spec.kind = std::move(kind);
    } else if (type == "ordinal") {
        if (!j.contains("sequence") || !j.at("sequence").is_array())
            throw ParseError("parameter '" + spec.name + "' needs a 'sequence' array");
        OrdinalKind kind;
        for (const auto& s : j.at("sequence")) {
            if (!s.is_number())
                throw ParseError("parameter '" + spec.name + "': sequence must hold numbers");
            kind.sequence.push_back(s.get<double>());
        }
        spec.kind = std::move(kind);
    } else if (type == "uniform_int") {
        UniformIntKind kind;
        for (const char* field : {"lower", "upper"}) {
            if (!j.contains(field) || !j.at(field).is_number_integer())
                throw ParseError("parameter '" + spec.name + "' needs an integer '" +
                                 std::string(field) + "'");
        }
        kind.lower = j.at("lower").get<std::int64_t>();
        kind.upper = j.at("upper").get<std::int64_t>();
        if (j.contains("quantum")) {
            if (!j.at("quantum").is_number_integer())
                throw ParseError("parameter '" + spec.name + "': 'quantum' must be an integer");
            kind.quantum = j.at("quantum").get<std::int64_t>();
        }
        spec.kind = kind;
    } else {
        throw ParseError("parameter '" + spec.name + "' has unknown type '" + type +
                         "' (expected categorical, ordinal, or uniform_int)");
    }
    spec.default_value = coerce_to_spec(spec, j.at("default"), "default of '" + spec.name + "'");
    return spec;
}

} // namespace

ParameterSpace ParameterSpace::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("space definition is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("parameters") || !doc.at("parameters").is_array())
        throw ParseError("space definition needs a top-level 'parameters' array");

    std::vector<ParameterSpec> params;
    for (const auto& p : doc.at("parameters"))
        params.push_back(parse_parameter(p));

    std::vector<ActivationCondition> conditions;
    if (doc.contains("conditions")) {
        if (!doc.at("conditions").is_array())
            throw ParseError("'conditions' must be an array");
        for (const auto& c : doc.at("conditions")) {
            if (!c.is_object() || !c.contains("child") || !c.contains("parent") ||
                !c.contains("equals"))
                throw ParseError("each condition needs 'child', 'parent', and 'equals'");
            ActivationCondition cond;
            cond.child = c.at("child").get<std::string>();
            cond.parent = c.at("parent").get<std::string>();
            auto parent_it = std::find_if(params.begin(), params.end(), [&](const auto& s) {
                return s.name == cond.parent;
            });
            if (parent_it == params.end())
                throw ParseError("condition references unknown parent '" + cond.parent + "'");
            cond.required_value =
                coerce_to_spec(*parent_it, c.at("equals"), "condition on '" + cond.child + "'");
            conditions.push_back(std::move(cond));
        }
    }
    try {
        return ParameterSpace(std::move(params), std::move(conditions));
    } catch (const Error& e) {
        throw ParseError(std::string("invalid space definition: ") + e.what());
    }
}

ParameterSpace ParameterSpace::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open space definition file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

} // namespace autotune
