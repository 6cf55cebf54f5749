#include "grassdisagg/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "grassdisagg/error.hpp"
#include "grassdisagg/random.hpp"
#include "grassdisagg/serial.hpp"

namespace grassdisagg {

std::string_view to_string(RegressorKind kind) noexcept {
    switch (kind) {
        case RegressorKind::linear: return "lm";
        case RegressorKind::svr: return "svr";
        case RegressorKind::forest: return "rf";
    }
    return "lm";
}

RegressorKind parse_regressor_kind(std::string_view name) {
    if (name == "lm" || name == "linear") return RegressorKind::linear;
    if (name == "svr") return RegressorKind::svr;
    if (name == "rf" || name == "forest") return RegressorKind::forest;
    throw Error(ErrorCode::ConfigError, "unknown regressor '" + std::string(name) + "' (lm|svr|rf)");
}

std::vector<std::size_t> sample_rows(std::size_t m, std::size_t cap, std::uint64_t seed) {
    std::vector<std::size_t> rows(m);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (cap == 0 || cap >= m) return rows;
    Rng rng(seed);
    for (std::size_t k = 0; k < cap; ++k) std::swap(rows[k], rows[k + rng.index(m - k)]);
    rows.resize(cap);
    std::sort(rows.begin(), rows.end());
    return rows;
}

Regressor::Regressor(Model model, Standardizer scaler, TargetScaler target)
    : model_(std::move(model)), scaler_(std::move(scaler)), target_(target) {}

Regressor Regressor::fit(const FeatureMatrix& x, std::span<const double> y, const RegressorSpec& spec, int jobs) {
    if (x.rows() != y.size())
        throw Error(ErrorCode::ShapeError,
                    std::to_string(x.rows()) + " rows but " + std::to_string(y.size()) + " targets");
    x.check_finite();
    for (double v : y)
        if (!std::isfinite(v)) throw Error(ErrorCode::ShapeError, "non-finite training target");

    FeatureMatrix rows = x;
    std::vector<double> targets(y.begin(), y.end());
    if (spec.kind != RegressorKind::linear && spec.sample_cap > 0 && spec.sample_cap < x.rows()) {
        const auto keep = sample_rows(x.rows(), spec.sample_cap, spec.sampling_seed);
        rows = x.select_rows(keep);
        targets.resize(keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) targets[i] = y[keep[i]];
    }

    Standardizer scaler = Standardizer::fit(rows);
    const FeatureMatrix z = scaler.transform(rows);

    Regressor out;
    out.scaler_ = std::move(scaler);
    out.training_rows_ = z.rows();
    switch (spec.kind) {
        case RegressorKind::linear:
            out.model_ = fit_linear(z, targets);
            break;
        case RegressorKind::svr: {
            out.target_ = TargetScaler::fit(targets);
            for (double& v : targets) v = out.target_.forward(v);
            out.model_ = fit_svr(z, targets, spec.svr, jobs);
            break;
        }
        case RegressorKind::forest:
            out.model_ = fit_forest(z, targets, spec.forest, jobs);
            break;
    }
    return out;
}

RegressorKind Regressor::kind() const {
    switch (model_.index()) {
        case 1: return RegressorKind::svr;
        case 2: return RegressorKind::forest;
        default: return RegressorKind::linear;
    }
}

double Regressor::predict(std::span<const double> features) const {
    if (features.size() != scaler_.width())
        throw Error(ErrorCode::WidthMismatch,
                    "feature width " + std::to_string(features.size()) + " != " + std::to_string(scaler_.width()));
    thread_local std::vector<double> z;
    z.resize(features.size());
    scaler_.transform_into(features, z);
    return std::visit(
        [&](const auto& m) {
            const double v = m.predict(z);
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, SvrModel>) return target_.inverse(v);
            return v;
        },
        model_);
}

void Regressor::write(std::ostream& out) const {
    serial::Writer w(out);
    w.line("regressor", to_string(kind()));
    w.integer("width", scaler_.width());
    w.integer("training_rows", training_rows_);
    w.numbers("feature_mean", scaler_.mean());
    w.numbers("feature_sd", scaler_.sd());
    w.number("target_mean", target_.mean);
    w.number("target_sd", target_.sd);
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                w.number("bias", m.bias);
                w.numbers("weights", m.weights);
                w.integer("degenerate", m.degenerate ? 1 : 0);
            } else if constexpr (std::is_same_v<T, SvrModel>) {
                w.number("gamma", m.gamma);
                w.number("c_box", m.c_box);
                w.number("epsilon", m.epsilon);
                w.number("bias", m.bias);
                w.integer("converged", m.converged ? 1 : 0);
                w.integer("iterations", m.iterations);
                w.number("dual_objective", m.dual_objective);
                w.integer("support_vectors", m.support_vectors.rows());
                for (std::size_t i = 0; i < m.support_vectors.rows(); ++i) {
                    w.number("coef", m.coefficients[i]);
                    w.numbers("sv", m.support_vectors.row(i));
                }
            } else {
                w.integer("min_leaf", m.min_leaf);
                w.integer("trees", m.trees.size());
                for (std::size_t k = 0; k < m.trees.size(); ++k) {
                    w.integer("tree_seed", m.tree_seeds[k]);
                    w.integer("nodes", m.trees[k].nodes.size());
                    for (const TreeNode& n : m.trees[k].nodes) {
                        out << "node " << n.feature << ' ' << serial::hex(n.threshold) << ' ' << n.left << ' '
                            << n.right << ' ' << serial::hex(n.value) << ' ' << n.samples << '\n';
                    }
                }
            }
        },
        model_);
    w.line("end", "regressor");
}

namespace {

std::int64_t to_int(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ModelFormat, "line " + std::to_string(line) + ": bad integer '" + s + "'");
    }
}

}  // namespace

Regressor Regressor::read(std::istream& in) {
    serial::Reader r(in);
    const RegressorKind kind = parse_regressor_kind(r.text("regressor"));
    const std::size_t width = r.integer("width");
    Regressor out;
    out.training_rows_ = r.integer("training_rows");
    auto mean = r.numbers("feature_mean", width);
    auto sd = r.numbers("feature_sd", width);
    out.scaler_ = Standardizer(std::move(mean), std::move(sd));
    out.target_.mean = r.number("target_mean");
    out.target_.sd = r.number("target_sd");

    switch (kind) {
        case RegressorKind::linear: {
            LinearModel m;
            m.bias = r.number("bias");
            m.weights = r.numbers("weights", width);
            m.degenerate = r.integer("degenerate") != 0;
            out.model_ = std::move(m);
            break;
        }
        case RegressorKind::svr: {
            SvrModel m;
            m.gamma = r.number("gamma");
            m.c_box = r.number("c_box");
            m.epsilon = r.number("epsilon");
            m.bias = r.number("bias");
            m.converged = r.integer("converged") != 0;
            m.iterations = r.integer("iterations");
            m.dual_objective = r.number("dual_objective");
            const std::size_t n_sv = r.integer("support_vectors");
            m.support_vectors = FeatureMatrix(n_sv, width);
            m.coefficients.resize(n_sv);
            for (std::size_t i = 0; i < n_sv; ++i) {
                m.coefficients[i] = r.number("coef");
                const auto row = r.numbers("sv", width);
                std::copy(row.begin(), row.end(), m.support_vectors.row(i).begin());
            }
            out.model_ = std::move(m);
            break;
        }
        case RegressorKind::forest: {
            ForestModel m;
            m.n_features = width;
            m.min_leaf = r.integer("min_leaf");
            const std::size_t n_trees = r.integer("trees");
            m.trees.resize(n_trees);
            m.tree_seeds.resize(n_trees);
            for (std::size_t k = 0; k < n_trees; ++k) {
                m.tree_seeds[k] = r.integer("tree_seed");
                const std::size_t n_nodes = r.integer("nodes");
                m.trees[k].nodes.resize(n_nodes);
                for (std::size_t i = 0; i < n_nodes; ++i) {
                    const auto t = r.expect("node");
                    if (t.size() != 6)
                        throw Error(ErrorCode::ModelFormat, "line " + std::to_string(r.line_number()) +
                                                                ": node needs 6 fields");
                    TreeNode& n = m.trees[k].nodes[i];
                    n.feature = static_cast<std::int32_t>(to_int(t[0], r.line_number()));
                    n.threshold = serial::parse_hex(t[1]);
                    n.left = static_cast<std::int32_t>(to_int(t[2], r.line_number()));
                    n.right = static_cast<std::int32_t>(to_int(t[3], r.line_number()));
                    n.value = serial::parse_hex(t[4]);
                    n.samples = static_cast<std::uint32_t>(to_int(t[5], r.line_number()));
                    const auto limit = static_cast<std::int32_t>(n_nodes);
                    if (n.feature >= static_cast<std::int32_t>(width) ||
                        (n.feature >= 0 && (n.left <= static_cast<std::int32_t>(i) || n.right <= static_cast<std::int32_t>(i) ||
                                            n.left >= limit || n.right >= limit)))
                        throw Error(ErrorCode::ModelFormat,
                                    "line " + std::to_string(r.line_number()) + ": node references out of range");
                }
            }
            out.model_ = std::move(m);
            break;
        }
    }
    if (r.text("end") != "regressor") throw Error(ErrorCode::ModelFormat, "missing 'end regressor'");
    return out;
}

}  // namespace grassdisagg
