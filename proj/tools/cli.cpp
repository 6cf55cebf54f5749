#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "grassdisagg/config.hpp"
#include "grassdisagg/csv.hpp"
#include "grassdisagg/data.hpp"
#include "grassdisagg/engine.hpp"
#include "grassdisagg/error.hpp"
#include "grassdisagg/eval.hpp"
#include "grassdisagg/synthgen.hpp"

namespace grassdisagg::cli {

namespace {

/// Flags shared by every command that builds a DisaggConfig.
struct MethodFlags {
    std::string config_path;
    std::string method;
    std::optional<std::size_t> order;
    std::string preprocessing;
    std::string regressor;
    std::string init;
    std::string postprocessing;
    std::vector<std::string> settings;
    std::optional<std::uint64_t> seed;
};

void add_method_flags(CLI::App& cmd, MethodFlags& f) {
    cmd.add_option("--config", f.config_path, "key = value configuration file")->check(CLI::ExistingFile);
    cmd.add_option("--method", f.method, "method name, e.g. svr-raw or lm-diff-concrete-scale");
    cmd.add_option("--order", f.order, "autoregressive order p");
    cmd.add_option("--preprocessing", f.preprocessing, "raw | diff | cumul");
    cmd.add_option("--regressor", f.regressor, "lm | svr | rf");
    cmd.add_option("--init", f.init, "average | concrete");
    cmd.add_option("--postprocessing", f.postprocessing, "none | scale | translate");
    cmd.add_option("--set", f.settings, "extra key=value setting (repeatable)");
    cmd.add_option("--seed", f.seed, "master seed");
}

KeyValues load_config_file(const std::string& path) { return path.empty() ? KeyValues{} : KeyValues::load(path); }

void reject_unused(const KeyValues& kv, const std::string& origin) {
    if (const auto extra = kv.unused(); !extra.empty())
        throw Error(ErrorCode::ConfigError, origin + ": unknown key '" + extra.front() + "'");
}

/// defaults < config file < flags. `file` keeps the keys this function does not consume.
DisaggConfig build_config(KeyValues& file, const MethodFlags& f) {
    DisaggConfig cfg;
    if (auto m = file.take("method")) cfg = parse_method(*m, cfg);
    cfg.apply(file);
    if (!f.method.empty()) cfg = parse_method(f.method, cfg);

    KeyValues flags;
    for (const auto& s : f.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "--set expects key=value, got '" + s + "'");
        flags.set(std::string(csv::trim(std::string_view(s).substr(0, eq))),
                  std::string(csv::trim(std::string_view(s).substr(eq + 1))));
    }
    if (f.order) flags.set("order", std::to_string(*f.order));
    if (!f.preprocessing.empty()) flags.set("preprocessing", f.preprocessing);
    if (!f.regressor.empty()) flags.set("regressor", f.regressor);
    if (!f.init.empty()) flags.set("init", f.init);
    if (!f.postprocessing.empty()) flags.set("postprocessing", f.postprocessing);
    if (f.seed) flags.set("seed", std::to_string(*f.seed));
    cfg.apply(flags);
    reject_unused(flags, "--set");
    cfg.validate();
    return cfg;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    for (auto field : csv::split(text)) {
        const auto item = csv::trim(field);
        if (!item.empty()) out.emplace_back(item);
    }
    return out;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a64(bytes);
}

std::string repro_header(const std::string& command, std::uint64_t seed, std::uint64_t config_hash,
                         std::optional<std::uint64_t> data_hash = std::nullopt) {
    std::string h = std::string("grassdisagg ") + GRASSDISAGG_VERSION + " command=" + command +
                    " seed=" + std::to_string(seed) + " config=" + hex64(config_hash);
    if (data_hash) h += " data=" + hex64(*data_hash);
    return h;
}

std::uint64_t configs_hash(const std::vector<DisaggConfig>& configs, const std::string& extra) {
    std::string text = extra;
    for (const auto& c : configs) text += c.to_text();
    return fnv1a64(text);
}

// ---------------------------------------------------------------- generate

struct GenerateFlags {
    std::string preset = "default";
    std::string out;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> sites;
    std::optional<int> years;
    int jobs = 1;
};

int cmd_generate(const GenerateFlags& f, std::ostream& err) {
    GenParams params = preset_params(f.preset);
    KeyValues kv = load_config_file(f.config_path);
    params.apply(kv);
    std::uint64_t seed = 42;
    if (auto v = kv.take_int("seed")) seed = static_cast<std::uint64_t>(*v);
    reject_unused(kv, f.config_path);
    if (f.seed) seed = *f.seed;
    if (f.sites) params.n_sites = *f.sites;
    if (f.years) params.n_years = *f.years;
    params.seed = generator_seed(seed);
    const Dataset ds = generate_dataset(params, f.jobs);
    write_dataset(ds, f.out);
    err << "generated " << ds.size() << " records (" << params.n_sites << " sites x " << params.n_years
        << " years, preset " << params.preset << ") -> " << f.out << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainFlags {
    std::string data;
    std::string model_out;
    MethodFlags method;
    int jobs = 1;
};

int cmd_train(const TrainFlags& f, std::ostream& err) {
    KeyValues file = load_config_file(f.method.config_path);
    const DisaggConfig cfg = build_config(file, f.method);
    reject_unused(file, f.method.config_path);
    const Dataset ds = load_dataset(f.data);
    const TrainedModel model = train(ds, cfg, f.jobs);
    model.save(f.model_out);
    err << "trained " << cfg.method_name() << " on " << ds.size() << " records ("
        << model.regressor.training_rows() << " rows) -> " << f.model_out << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- disaggregate

struct DisaggregateFlags {
    std::string model;
    std::string climate;
    std::string cumulative;
    std::string out;
    bool clamp = false;
    int jobs = 1;
};

/// Reads `id,year,cumulative` rows; `#` lines are comments.
std::map<std::pair<std::string, int>, double> load_cumulative_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    std::map<std::pair<std::string, int>, double> table;
    std::string line;
    std::size_t row = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (csv::trim(line).empty() || line.front() == '#') continue;
        const auto fields = csv::split(line);
        const std::string where = path + ":" + std::to_string(row);
        if (!header) {
            if (fields.size() != 3 || csv::trim(fields[0]) != "id" || csv::trim(fields[1]) != "year" ||
                csv::trim(fields[2]) != "cumulative")
                throw Error(ErrorCode::SchemaError, where + ": expected header id,year,cumulative");
            header = true;
            continue;
        }
        if (fields.size() != 3) throw Error(ErrorCode::SchemaError, where + ": expected 3 fields");
        long long year = 0;
        double value = 0.0;
        if (!csv::parse_int(fields[1], year)) throw Error(ErrorCode::NonNumeric, where + ": year is not an integer");
        if (!csv::parse_double(fields[2], value))
            throw Error(ErrorCode::NonNumeric, where + ": cumulative is not a finite number");
        if (!table.emplace(std::pair{std::string(csv::trim(fields[0])), static_cast<int>(year)}, value).second)
            throw Error(ErrorCode::DuplicateRecord, where + ": repeated (id, year)");
    }
    if (!header) throw Error(ErrorCode::SchemaError, path + ": empty file, header required");
    return table;
}

int cmd_disaggregate(const DisaggregateFlags& f, std::ostream& err) {
    const TrainedModel model = TrainedModel::load(f.model);
    const DisaggConfig& cfg = model.config;
    const LoadResult input = load_series(f.climate, CsvSchema{}, LoadOptions{true});
    const auto& records = input.dataset.records();

    std::optional<double> constant;
    std::map<std::pair<std::string, int>, double> table;
    if (!f.cumulative.empty()) {
        double v = 0.0;
        if (csv::parse_double(f.cumulative, v))
            constant = v;
        else
            table = load_cumulative_table(f.cumulative);
    }

    std::vector<BatchItem> items(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        items[i].record = &records[i];
        items[i].growth_known = input.has_growth[i];
        if (constant) {
            items[i].cumulative = constant;
        } else if (!table.empty()) {
            const auto it = table.find({records[i].site_id, records[i].year});
            if (it == table.end())
                throw Error(ErrorCode::MissingCumulative, f.cumulative + ": no cumulative value for (" +
                                                              records[i].site_id + ", " +
                                                              std::to_string(records[i].year) + ")");
            items[i].cumulative = it->second;
        }
    }
    if (cfg.postprocessing != PostProcess::none && f.cumulative.empty())
        throw Error(ErrorCode::MissingCumulative, "model '" + cfg.method_name() +
                                                      "' post-processes with the cumulative value; pass --cumulative");

    const std::vector<DisaggResult> results = disaggregate_batch(model.regressor, items, cfg, f.jobs);

    std::ofstream out(f.out, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + f.out + "'");
    out << "# " << repro_header("disaggregate", cfg.seed, cfg.hash(), file_hash(f.climate)) << '\n';
    out << "id,year,period,growth_true,growth_pred\n";
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const AnnualRecord& r = records[i];
        std::vector<double> pred(results[i].reconstructed.begin(), results[i].reconstructed.end());
        if (f.clamp) pred = clamp_and_rescale(pred, items[i].cumulative);
        if (results[i].negativity_flag) ++flagged;
        for (std::size_t t = 0; t < kPeriods; ++t) {
            out << r.site_id << ',' << r.year << ',' << (t + 1) << ',';
            if (input.has_growth[i]) out << csv::format_double(r.growth[t]);
            out << ',' << csv::format_double(pred[t]) << '\n';
        }
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + f.out + "'");
    err << "disaggregated " << records.size() << " series with " << cfg.method_name() << " (" << flagged
        << " with negative values" << (f.clamp ? ", clamped" : "") << ") -> " << f.out << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- evaluate / compare / init-study

struct EvalFlags {
    std::string data;
    std::string report_dir;
    MethodFlags method;
    std::string methods;
    std::optional<double> split_fraction;
    std::optional<double> alpha;
    bool svg = false;
    int jobs = 1;
};

struct EvalSetup {
    DisaggConfig base;
    std::vector<DisaggConfig> configs;
    double split_fraction = 0.3;
    double alpha = 0.05;
    Dataset train;
    Dataset test;
    std::string header;
};

enum class MethodSet { single, standard };

EvalSetup prepare_evaluation(const EvalFlags& f, MethodSet default_set, const std::string& command, std::ostream& err) {
    EvalSetup s;
    KeyValues file = load_config_file(f.method.config_path);
    std::string methods = f.methods;
    if (auto v = file.take("methods"); v && methods.empty()) methods = *v;
    if (auto v = file.take_double("split_fraction")) s.split_fraction = *v;
    if (auto v = file.take_double("alpha")) s.alpha = *v;
    s.base = build_config(file, f.method);
    reject_unused(file, f.method.config_path);
    if (f.split_fraction) s.split_fraction = *f.split_fraction;
    if (f.alpha) s.alpha = *f.alpha;

    if (!methods.empty()) {
        for (const auto& name : split_list(methods)) s.configs.push_back(parse_method(name, s.base));
        if (s.configs.empty()) throw Error(ErrorCode::ConfigError, "method list is empty");
    } else if (default_set == MethodSet::standard) {
        s.configs = standard_methods(s.base);
    } else {
        s.configs.push_back(s.base);
    }

    const Dataset ds = load_dataset(f.data);
    auto split = split_by_site(ds, s.split_fraction, split_seed(s.base.seed));
    s.train = std::move(split.first);
    s.test = std::move(split.second);
    err << command << ": " << s.train.sites().size() << " training sites (" << s.train.size() << " records), "
        << s.test.sites().size() << " test sites (" << s.test.size() << " records), " << s.configs.size()
        << " method(s)\n";

    std::ostringstream extra;
    extra << "split_fraction=" << csv::format_double(s.split_fraction) << " alpha=" << csv::format_double(s.alpha);
    s.header = repro_header(command, s.base.seed, configs_hash(s.configs, extra.str()), file_hash(f.data));
    return s;
}

void log_report(const EvalReport& report, std::ostream& err) {
    for (const auto& a : report.aggregate)
        err << "  " << a.method << ": mean RMSE " << csv::format_double(a.rmse.mean) << " over " << a.rmse.count
            << " series\n";
    for (const auto& note : report.notes) err << "  note: " << note << '\n';
}

int cmd_evaluate(const EvalFlags& f, MethodSet set, const std::string& command, std::ostream& err) {
    const EvalSetup s = prepare_evaluation(f, set, command, err);
    const EvalReport report = evaluate_methods(s.train, s.test, s.configs, EvalOptions{f.jobs, s.alpha});
    write_report(report, f.report_dir, s.header, f.svg);
    log_report(report, err);
    err << "report -> " << f.report_dir << '\n';
    return kExitOk;
}

int cmd_init_study(const EvalFlags& f, std::ostream& err) {
    const EvalSetup s = prepare_evaluation(f, MethodSet::standard, "init-study", err);
    const InitRatioStudy study = init_ratio_study(s.train, s.test, s.configs, EvalOptions{f.jobs, s.alpha});
    write_init_study(study, f.report_dir, s.header);
    for (const auto& row : study.rows)
        err << "  " << row.method << ": median ratio " << csv::format_double(row.summary.median) << ", "
            << row.below_one << " of " << row.summary.count << " below 1\n";
    for (const auto& note : study.notes) err << "  note: " << note << '\n';
    err << "report -> " << f.report_dir << '\n';
    return kExitOk;
}

void add_eval_flags(CLI::App& cmd, EvalFlags& f, bool with_methods) {
    cmd.add_option("--data", f.data, "dataset CSV")->required()->check(CLI::ExistingFile);
    cmd.add_option("--report-dir", f.report_dir, "output directory")->required();
    add_method_flags(cmd, f.method);
    if (with_methods) cmd.add_option("--methods", f.methods, "comma-separated method names");
    cmd.add_option("--split-fraction", f.split_fraction, "fraction of sites held out for testing");
    cmd.add_option("--alpha", f.alpha, "Nemenyi significance level (0.05 or 0.1)");
    cmd.add_option("--jobs", f.jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Disaggregation of annual grassland growth into 37 ten-day periods", "grassdisagg"};
    app.set_version_flag("--version", std::string(GRASSDISAGG_VERSION));
    app.require_subcommand(1);

    GenerateFlags gen;
    auto* generate = app.add_subcommand("generate", "write a synthetic dataset");
    generate->add_option("--preset", gen.preset, "default | stress | exact-linear");
    generate->add_option("--out", gen.out, "output CSV")->required();
    generate->add_option("--config", gen.config_path, "gen.* settings file")->check(CLI::ExistingFile);
    generate->add_option("--seed", gen.seed, "master seed");
    generate->add_option("--sites", gen.sites, "number of sites");
    generate->add_option("--years", gen.years, "years per site");
    generate->add_option("--jobs", gen.jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    TrainFlags tr;
    auto* train_cmd = app.add_subcommand("train", "fit a method and save the model");
    train_cmd->add_option("--data", tr.data, "dataset CSV")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--model-out", tr.model_out, "model file")->required();
    add_method_flags(*train_cmd, tr.method);
    train_cmd->add_option("--jobs", tr.jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    DisaggregateFlags dis;
    auto* disagg = app.add_subcommand("disaggregate", "reconstruct series from climate and cumulative values");
    disagg->add_option("--model", dis.model, "model file")->required()->check(CLI::ExistingFile);
    disagg->add_option("--climate", dis.climate, "series CSV (growth column may be empty)")
        ->required()
        ->check(CLI::ExistingFile);
    disagg->add_option("--cumulative", dis.cumulative, "annual total for every series, or an id,year,cumulative CSV");
    disagg->add_option("--out", dis.out, "output CSV")->required();
    disagg->add_flag("--clamp", dis.clamp, "clamp negatives to zero and rescale to the total");
    disagg->add_option("--jobs", dis.jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    EvalFlags ev;
    auto* evaluate = app.add_subcommand("evaluate", "site-split evaluation of one or more methods against naive");
    add_eval_flags(*evaluate, ev, true);
    evaluate->add_flag("--svg", ev.svg, "also write boxplot.svg");

    EvalFlags cmp;
    auto* compare = app.add_subcommand("compare", "all nine regressor x preprocessing methods plus naive");
    add_eval_flags(*compare, cmp, false);
    compare->add_flag("--svg", cmp.svg, "also write boxplot.svg");

    EvalFlags ini;
    auto* init_study = app.add_subcommand("init-study", "RMSE ratio of average to concrete initialization");
    add_eval_flags(*init_study, ini, true);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            if (dynamic_cast<const CLI::CallForVersion*>(&e))
                out << e.what() << '\n';
            else
                out << app.help("", dynamic_cast<const CLI::CallForAllHelp*>(&e) ? CLI::AppFormatMode::All
                                                                                  : CLI::AppFormatMode::Normal);
            return kExitOk;
        }
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    try {
        if (generate->parsed()) return cmd_generate(gen, err);
        if (train_cmd->parsed()) return cmd_train(tr, err);
        if (disagg->parsed()) return cmd_disaggregate(dis, err);
        if (evaluate->parsed()) return cmd_evaluate(ev, MethodSet::single, "evaluate", err);
        if (compare->parsed()) return cmd_evaluate(cmp, MethodSet::standard, "compare", err);
        if (init_study->parsed()) return cmd_init_study(ini, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return is_numerical(e.code()) ? kExitNumerical : kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace grassdisagg::cli
