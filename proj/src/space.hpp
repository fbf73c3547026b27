#ifndef AUTOTUNE_SPACE_HPP
#define AUTOTUNE_SPACE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace autotune {

/// A concrete parameter value: categorical choices are strings, ordinal
/// sequence entries are doubles, uniform-integer values are int64.
using Value = std::variant<std::int64_t, double, std::string>;

struct CategoricalKind {
    std::vector<std::string> choices;
};

struct OrdinalKind {
    std::vector<double> sequence;
};

struct UniformIntKind {
    std::int64_t lower = 0;
    std::int64_t upper = 0;
    std::int64_t quantum = 1;

    /// Number of points on the lattice {lower, lower+q, ...} not above upper.
    std::int64_t lattice_size() const { return (upper - lower) / quantum + 1; }
};

struct ParameterSpec {
    std::string name;
    std::variant<CategoricalKind, OrdinalKind, UniformIntKind> kind;
    Value default_value;

    bool is_categorical() const { return std::holds_alternative<CategoricalKind>(kind); }
    bool is_ordinal() const { return std::holds_alternative<OrdinalKind>(kind); }
    bool is_uniform_int() const { return std::holds_alternative<UniformIntKind>(kind); }
};

/// Gates a child parameter on a parent holding one specific value.
struct ActivationCondition {
    std::string child;
    std::string parent;
    Value required_value;
};

/// One value (or Inactive, represented as nullopt) per parameter, aligned
/// with the space's parameter order.
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(std::vector<std::optional<Value>> values) : values_(std::move(values)) {}

    std::size_t size() const { return values_.size(); }
    const std::optional<Value>& operator[](std::size_t i) const { return values_[i]; }
    std::optional<Value>& operator[](std::size_t i) { return values_[i]; }
    const std::vector<std::optional<Value>>& values() const { return values_; }

    bool operator==(const Configuration& other) const = default;

private:
    std::vector<std::optional<Value>> values_;
};

/// Immutable conditional parameter space. Construction validates every
/// structural invariant (distinct choices, quantization of defaults,
/// condition acyclicity, ...) and throws Error on the first violation.
class ParameterSpace {
public:
    ParameterSpace(std::vector<ParameterSpec> params, std::vector<ActivationCondition> conditions);

    std::size_t size() const { return params_.size(); }
    const ParameterSpec& param(std::size_t i) const { return params_[i]; }
    const std::vector<ParameterSpec>& params() const { return params_; }
    std::optional<std::size_t> index_of(const std::string& name) const;
    const std::vector<ActivationCondition>& conditions() const { return conditions_; }

    /// Condition gating parameter i, or nullptr if i is unconditioned.
    const ActivationCondition* condition_for(std::size_t i) const;
    std::optional<std::size_t> parent_of(std::size_t i) const;

    Configuration default_configuration() const;

    /// Draws a configuration satisfying all invariants. Uniform-integer
    /// values land on the quantum lattice and never exceed upper.
    Configuration sample(RandomSource& rng) const;

    /// nullopt when the configuration satisfies every invariant; otherwise
    /// a description naming the first violated parameter and rule.
    std::optional<std::string> validate(const Configuration& cfg) const;

    /// Same contract as validate() but for name-keyed assignments; unknown
    /// or missing names are violations.
    std::optional<std::string> validate_named(
        const std::map<std::string, std::optional<Value>>& values) const;

    Configuration configuration_from_map(
        const std::map<std::string, std::optional<Value>>& values) const;

    /// Numeric encoding for the surrogate: categorical -> choice index,
    /// ordinal -> sequence index, uniform int -> raw value, Inactive -> -1.
    /// Throws Error when the configuration is invalid.
    std::vector<double> encode(const Configuration& cfg) const;

    /// Integer form of encode(); exact, used for dedup keys.
    std::vector<std::int64_t> encode_key(const Configuration& cfg) const;
    std::string key(const Configuration& cfg) const;

    /// Number of distinct configurations, saturating at UINT64_MAX.
    std::uint64_t cardinality() const;

    /// All distinct configurations when cardinality() <= limit, else nullopt.
    std::optional<std::vector<Configuration>> enumerate(std::uint64_t limit) const;

    static ParameterSpace from_json_text(const std::string& text);
    static ParameterSpace from_json_file(const std::string& path);

private:
    void check_invariants() const;
    void build_topo_order();
    std::int64_t value_count(std::size_t i) const;

    std::vector<ParameterSpec> params_;
    std::vector<ActivationCondition> conditions_;
    std::map<std::string, std::size_t> index_;
    std::vector<int> condition_index_;     // per param: index into conditions_, or -1
    std::vector<std::size_t> topo_order_;  // parents before children
};

/// Decimal rendering used in molds, CSV rows, and sample listings.
/// Integral doubles print without a decimal point.
std::string format_value(const Value& v);

/// Like format_value but renders Inactive as the literal "nan".
std::string format_config_value(const std::optional<Value>& v);

} // namespace autotune

#endif
