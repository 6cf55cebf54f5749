#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "grassdisagg/regressor.hpp"
#include "grassdisagg/transforms.hpp"

namespace grassdisagg {

enum class InitMode { concrete, average };
enum class PostProcess { none, scale, translate };

std::string_view to_string(InitMode m) noexcept;
std::string_view to_string(PostProcess p) noexcept;
InitMode parse_init_mode(std::string_view s);
PostProcess parse_postprocess(std::string_view s);

/// Flat `key = value` settings with `#` comments. Later assignments win.
class KeyValues {
public:
    static KeyValues parse(std::string_view text, std::string_view origin = "config");
    static KeyValues load(const std::filesystem::path& path);

    void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
    /// Overlays `other` on top of this (other wins).
    void merge(const KeyValues& other);

    bool contains(std::string_view key) const { return values_.find(std::string(key)) != values_.end(); }
    std::optional<std::string> get(std::string_view key) const;
    /// Marks the key as understood and returns its value.
    std::optional<std::string> take(std::string_view key);

    std::optional<double> take_double(std::string_view key);
    std::optional<long long> take_int(std::string_view key);
    std::optional<bool> take_bool(std::string_view key);

    /// Keys that were never taken.
    std::vector<std::string> unused() const;
    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> taken_;
};

/// Full configuration of one disaggregation method.
struct DisaggConfig {
    std::size_t order = 3;
    Transform preprocessing = Transform::raw;
    RegressorKind regressor = RegressorKind::linear;
    SvrParams svr;
    std::size_t svr_sample_cap = 2000;
    ForestParams forest;
    std::size_t forest_sample_cap = 5000;
    InitMode init = InitMode::average;
    double average_init_value = 9.0;  // kg DM/ha/d
    PostProcess postprocessing = PostProcess::none;
    std::uint64_t seed = 42;

    /// Throws ConfigError on p outside [1, 36] or a negative average value.
    void validate() const;

    /// Regressor settings with sub-seeds derived from `seed`.
    RegressorSpec regressor_spec() const;

    /// e.g. "svr-raw", "lm-diff-concrete", "svr-diff-scale".
    std::string method_name() const;

    /// Canonical key = value text (stable order); also the hashing input.
    std::string to_text() const;
    std::uint64_t hash() const;

    /// Applies the recognised keys in `kv` (others are left untaken).
    void apply(KeyValues& kv);

    bool operator==(const DisaggConfig&) const = default;
};

/// Parses a method name such as "svr-diff-concrete-scale" onto a base config.
DisaggConfig parse_method(std::string_view name, const DisaggConfig& base);

/// The nine regressor x preprocessing combinations, in a fixed order.
std::vector<DisaggConfig> standard_methods(const DisaggConfig& base);

}  // namespace grassdisagg
