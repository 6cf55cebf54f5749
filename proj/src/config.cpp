#include "grassdisagg/config.hpp"

#include <fstream>
#include <sstream>

#include "grassdisagg/csv.hpp"
#include "grassdisagg/error.hpp"
#include "grassdisagg/random.hpp"

namespace grassdisagg {

std::string_view to_string(InitMode m) noexcept { return m == InitMode::concrete ? "concrete" : "average"; }

std::string_view to_string(PostProcess p) noexcept {
    switch (p) {
        case PostProcess::scale: return "scale";
        case PostProcess::translate: return "translate";
        case PostProcess::none: break;
    }
    return "none";
}

InitMode parse_init_mode(std::string_view s) {
    if (s == "concrete") return InitMode::concrete;
    if (s == "average") return InitMode::average;
    throw Error(ErrorCode::ConfigError, "unknown initialization '" + std::string(s) + "' (concrete|average)");
}

PostProcess parse_postprocess(std::string_view s) {
    if (s == "none") return PostProcess::none;
    if (s == "scale") return PostProcess::scale;
    if (s == "translate" || s == "trans") return PostProcess::translate;
    throw Error(ErrorCode::ConfigError, "unknown post-processing '" + std::string(s) + "' (none|scale|translate)");
}

KeyValues KeyValues::parse(std::string_view text, std::string_view origin) {
    KeyValues kv;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string_view body = csv::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorCode::ConfigError,
                        std::string(origin) + ":" + std::to_string(n) + ": expected 'key = value'");
        const std::string key(csv::trim(body.substr(0, eq)));
        const std::string value(csv::trim(body.substr(eq + 1)));
        if (key.empty())
            throw Error(ErrorCode::ConfigError, std::string(origin) + ":" + std::to_string(n) + ": empty key");
        kv.values_[key] = value;
    }
    return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

void KeyValues::merge(const KeyValues& other) {
    for (const auto& [k, v] : other.values_) values_[k] = v;
}

std::optional<std::string> KeyValues::get(std::string_view key) const {
    const auto it = values_.find(std::string(key));
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::string> KeyValues::take(std::string_view key) {
    auto v = get(key);
    if (v) taken_.insert(std::string(key));
    return v;
}

std::optional<double> KeyValues::take_double(std::string_view key) {
    const auto v = take(key);
    if (!v) return std::nullopt;
    double out = 0.0;
    if (!csv::parse_double(*v, out))
        throw Error(ErrorCode::ConfigError, "'" + std::string(key) + "' expects a number, got '" + *v + "'");
    return out;
}

std::optional<long long> KeyValues::take_int(std::string_view key) {
    const auto v = take(key);
    if (!v) return std::nullopt;
    long long out = 0;
    if (!csv::parse_int(*v, out))
        throw Error(ErrorCode::ConfigError, "'" + std::string(key) + "' expects an integer, got '" + *v + "'");
    return out;
}

std::optional<bool> KeyValues::take_bool(std::string_view key) {
    const auto v = take(key);
    if (!v) return std::nullopt;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw Error(ErrorCode::ConfigError, "'" + std::string(key) + "' expects true/false, got '" + *v + "'");
}

std::vector<std::string> KeyValues::unused() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : values_)
        if (!taken_.contains(k)) out.push_back(k);
    return out;
}

void DisaggConfig::validate() const {
    if (order < 1 || order > 36)
        throw Error(ErrorCode::ConfigError, "order must lie in [1, 36], got " + std::to_string(order));
    if (!(average_init_value >= 0.0)) throw Error(ErrorCode::ConfigError, "average_init_value must be >= 0");
}

RegressorSpec DisaggConfig::regressor_spec() const {
    RegressorSpec spec;
    spec.kind = regressor;
    spec.svr = svr;
    spec.forest = forest;
    spec.forest.seed = derive_seed(seed, "forest");
    spec.sample_cap = regressor == RegressorKind::svr      ? svr_sample_cap
                      : regressor == RegressorKind::forest ? forest_sample_cap
                                                           : 0;
    spec.sampling_seed = derive_seed(seed, "sampling");
    return spec;
}

std::string DisaggConfig::method_name() const {
    std::string name = std::string(to_string(regressor)) + "-" + std::string(to_string(preprocessing));
    if (init == InitMode::concrete) name += "-concrete";
    if (postprocessing == PostProcess::scale) name += "-scale";
    if (postprocessing == PostProcess::translate) name += "-trans";
    return name;
}

std::string DisaggConfig::to_text() const {
    std::ostringstream out;
    out << "order = " << order << '\n'
        << "preprocessing = " << to_string(preprocessing) << '\n'
        << "regressor = " << to_string(regressor) << '\n'
        << "init = " << to_string(init) << '\n'
        << "average_init_value = " << csv::format_double(average_init_value) << '\n'
        << "postprocessing = " << to_string(postprocessing) << '\n'
        << "seed = " << seed << '\n'
        << "svr.c = " << csv::format_double(svr.c_box) << '\n'
        << "svr.epsilon = " << csv::format_double(svr.epsilon) << '\n'
        << "svr.gamma = " << csv::format_double(svr.gamma) << '\n'
        << "svr.tolerance = " << csv::format_double(svr.tolerance) << '\n'
        << "svr.sample_cap = " << svr_sample_cap << '\n'
        << "forest.n_trees = " << forest.n_trees << '\n'
        << "forest.min_leaf = " << forest.min_leaf << '\n'
        << "forest.mtry = " << forest.mtry << '\n'
        << "forest.bootstrap = " << (forest.bootstrap ? "true" : "false") << '\n'
        << "forest.sample_cap = " << forest_sample_cap << '\n';
    return out.str();
}

std::uint64_t DisaggConfig::hash() const { return fnv1a64(to_text()); }

namespace {

std::size_t non_negative(long long v, std::string_view key) {
    if (v < 0) throw Error(ErrorCode::ConfigError, "'" + std::string(key) + "' must be >= 0");
    return static_cast<std::size_t>(v);
}

}  // namespace

void DisaggConfig::apply(KeyValues& kv) {
    if (auto v = kv.take_int("order")) order = non_negative(*v, "order");
    if (auto v = kv.take("preprocessing")) preprocessing = parse_transform(*v);
    if (auto v = kv.take("regressor")) regressor = parse_regressor_kind(*v);
    if (auto v = kv.take("init")) init = parse_init_mode(*v);
    if (auto v = kv.take_double("average_init_value")) average_init_value = *v;
    if (auto v = kv.take("postprocessing")) postprocessing = parse_postprocess(*v);
    if (auto v = kv.take_int("seed")) seed = static_cast<std::uint64_t>(non_negative(*v, "seed"));
    if (auto v = kv.take_double("svr.c")) svr.c_box = *v;
    if (auto v = kv.take_double("svr.epsilon")) svr.epsilon = *v;
    if (auto v = kv.take_double("svr.gamma")) svr.gamma = *v;
    if (auto v = kv.take_double("svr.tolerance")) svr.tolerance = *v;
    if (auto v = kv.take_int("svr.sample_cap")) svr_sample_cap = non_negative(*v, "svr.sample_cap");
    if (auto v = kv.take_int("forest.n_trees")) forest.n_trees = non_negative(*v, "forest.n_trees");
    if (auto v = kv.take_int("forest.min_leaf")) forest.min_leaf = non_negative(*v, "forest.min_leaf");
    if (auto v = kv.take_int("forest.mtry")) forest.mtry = non_negative(*v, "forest.mtry");
    if (auto v = kv.take_bool("forest.bootstrap")) forest.bootstrap = *v;
    if (auto v = kv.take_int("forest.sample_cap")) forest_sample_cap = non_negative(*v, "forest.sample_cap");
}

DisaggConfig parse_method(std::string_view name, const DisaggConfig& base) {
    DisaggConfig cfg = base;
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= name.size()) {
        const auto dash = name.find('-', start);
        parts.emplace_back(name.substr(start, dash == std::string_view::npos ? std::string_view::npos : dash - start));
        if (dash == std::string_view::npos) break;
        start = dash + 1;
    }
    if (parts.size() < 2)
        throw Error(ErrorCode::ConfigError, "method '" + std::string(name) + "' must look like <lm|svr|rf>-<raw|diff|cumul>");
    cfg.regressor = parse_regressor_kind(parts[0]);
    cfg.preprocessing = parse_transform(parts[1]);
    cfg.init = InitMode::average;
    cfg.postprocessing = PostProcess::none;
    for (std::size_t i = 2; i < parts.size(); ++i) {
        if (parts[i] == "concrete" || parts[i] == "average")
            cfg.init = parse_init_mode(parts[i]);
        else
            cfg.postprocessing = parse_postprocess(parts[i]);
    }
    return cfg;
}

std::vector<DisaggConfig> standard_methods(const DisaggConfig& base) {
    std::vector<DisaggConfig> out;
    for (auto kind : {RegressorKind::linear, RegressorKind::svr, RegressorKind::forest}) {
        for (auto mode : {Transform::raw, Transform::diff, Transform::cumul}) {
            DisaggConfig c = base;
            c.regressor = kind;
            c.preprocessing = mode;
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace grassdisagg
