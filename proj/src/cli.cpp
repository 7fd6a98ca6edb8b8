/*
 * Copyright (C) 2026 The apkbayes Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "apkbayes/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "apkbayes/bayes.hpp"
#include "apkbayes/catalog.hpp"
#include "apkbayes/container.hpp"
#include "apkbayes/corpus.hpp"
#include "apkbayes/detect.hpp"
#include "apkbayes/error.hpp"
#include "apkbayes/eval.hpp"
#include "apkbayes/rank.hpp"
#include "apkbayes/text.hpp"

namespace apkbayes {

namespace {

using nlohmann::json;

enum class Format { Table, Csv, Json };

struct RunConfig {
    std::string input;
    std::string output;
    std::string catalog_path;
    std::string model_path;
    std::string marginals_path;
    std::string roc_path;
    std::string format = "table";
    std::vector<std::size_t> top;
    std::vector<std::string> ranks;
    std::string features;
    std::size_t folds = 5;
    double alpha = 1.0;
    std::uint64_t seed = 0;
    std::size_t n_benign = 1000;
    std::size_t n_suspicious = 1000;
    bool global_ranking = false;
    bool pooled = false;
    bool drop_unobserved = false;
};

// All report numbers, in every output format.
constexpr int kDecimals = 6;

std::string fixed(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", kDecimals, v);
    return buf;
}

json fixed_json(double v)
{
    return std::stod(fixed(v));
}

std::string fixed(const std::optional<double>& v)
{
    return v ? fixed(*v) : "NA";
}

json fixed_json(const std::optional<double>& v)
{
    return v ? fixed_json(*v) : json(nullptr);
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    }
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void emit(const RunConfig& cfg, std::ostream& out, const std::string& text)
{
    if (cfg.output.empty()) {
        out << text;
        return;
    }
    std::ofstream file(cfg.output, std::ios::binary);
    file << text;
    if (!file) {
        throw Error(ErrorKind::Io, "cannot write '" + cfg.output + "'");
    }
}

Format parse_format(const std::string& s)
{
    if (s == "csv") return Format::Csv;
    if (s == "json") return Format::Json;
    return Format::Table;
}

FeatureCatalog active_catalog(const RunConfig& cfg)
{
    return cfg.catalog_path.empty() ? default_catalog() : load_catalog_file(cfg.catalog_path);
}

/// Left-aligned first column, right-aligned rest.
std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows)
{
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& r : rows) {
            width[c] = std::max(width[c], r[c].size());
        }
    }
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c > 0) {
                os << "  ";
            }
            auto pad = std::string(width[c] - cells[c].size(), ' ');
            os << (c == 0 ? cells[c] + pad : pad + cells[c]);
        }
        os << '\n';
    };
    line(header);
    for (const auto& r : rows) {
        line(r);
    }
    return os.str();
}

std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows)
{
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) {
            return s;
        }
        std::string q = "\"";
        for (char c : s) {
            q += c == '"' ? std::string("\"\"") : std::string(1, c);
        }
        return q + "\"";
    };
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            out += (c ? "," : "") + quote(cells[c]);
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) {
        line(r);
    }
    return out;
}

std::vector<FeatureSpec> feature_specs(const RunConfig& cfg, bool default_top20)
{
    std::vector<FeatureSpec> specs;
    for (auto k : cfg.top) {
        specs.push_back(FeatureSpec::top(k));
    }
    for (const auto& r : cfg.ranks) {
        auto dash = r.find('-');
        auto first = dash == std::string::npos ? std::nullopt : parse_uint(r.substr(0, dash));
        auto last = dash == std::string::npos ? std::nullopt : parse_uint(r.substr(dash + 1));
        if (!first || !last) {
            throw CLI::ValidationError("--ranks", "expected FIRST-LAST, got '" + r + "'");
        }
        specs.push_back(FeatureSpec::ranks(*first, *last));
    }
    if (!cfg.features.empty()) {
        std::vector<std::string> ids;
        for (auto id : split(cfg.features, ',')) {
            if (!trim(id).empty()) {
                ids.emplace_back(trim(id));
            }
        }
        specs.push_back(FeatureSpec::explicit_ids(std::move(ids)));
    }
    if (specs.empty() && default_top20) {
        specs.push_back(FeatureSpec::top(20));
    }
    return specs;
}

ProfileStore load_store_file(const std::string& path, const FeatureCatalog& catalog)
{
    return load_store(read_file(path), catalog.version);
}

// --- subcommands -----------------------------------------------------------

int cmd_analyze(const RunConfig& cfg, std::ostream& out)
{
    auto catalog = active_catalog(cfg);
    auto archive = ApkArchive::open_file(cfg.input);
    auto report = analyze_archive(archive, catalog);
    const auto& profile = report.profile;

    if (parse_format(cfg.format) == Format::Json) {
        json j;
        j["source"] = profile.source_id;
        j["catalog_version"] = catalog.version;
        j["entries"] = archive.entries().size();
        j["dex"] = report.dex_entries;
        j["payload_entries"] = report.payload_entries;
        json features = json::array();
        for (std::size_t i = 0; i < catalog.size(); ++i) {
            features.push_back({{"id", catalog.features[i].id},
                                {"kind", std::string(to_string(catalog.features[i].kind))},
                                {"present", static_cast<bool>(profile.bits[i])},
                                {"locations", report.locations[i]}});
        }
        j["features"] = features;
        std::string bits;
        for (bool b : profile.bits) {
            bits += b ? '1' : '0';
        }
        j["bits"] = bits;
        if (report.manifest) {
            j["package"] = report.manifest->package_name;
            j["permissions"] = report.manifest->permissions;
            j["components"] = report.manifest->component_names;
            j["intent_actions"] = report.manifest->intent_actions;
        }
        j["diagnostics"] = profile.diagnostics;
        emit(cfg, out, j.dump(2) + "\n");
        return kExitOk;
    }

    std::ostringstream os;
    os << "source: " << profile.source_id << "\n";
    os << "catalog: " << catalog.version << "\n";
    os << "entries: " << archive.entries().size() << "\n";
    os << "dex: " << report.dex_entries.size() << "\n";
    for (const auto& d : report.dex_entries) {
        os << "  " << d << "\n";
    }
    if (report.manifest) {
        os << "package: " << report.manifest->package_name << "\n";
        os << "permissions: " << report.manifest->permissions.size() << "\n";
        for (const auto& p : report.manifest->permissions) {
            os << "  " << p << "\n";
        }
        os << "intent actions: " << report.manifest->intent_actions.size() << "\n";
        for (const auto& a : report.manifest->intent_actions) {
            os << "  " << a << "\n";
        }
    } else {
        os << "manifest: unavailable\n";
    }
    os << "payload entries: " << report.payload_entries.size() << "\n";
    for (const auto& p : report.payload_entries) {
        os << "  " << p << "\n";
    }
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        std::string where;
        for (const auto& loc : report.locations[i]) {
            where += (where.empty() ? "" : " ") + loc;
        }
        rows.push_back({catalog.features[i].id, std::string(to_string(catalog.features[i].kind)),
                        profile.bits[i] ? "1" : "0", where.empty() ? "-" : where});
    }
    os << "\n";
    if (parse_format(cfg.format) == Format::Csv) {
        os << render_csv({"id", "kind", "bit", "locations"}, rows);
    } else {
        os << render_table({"feature", "kind", "bit", "locations"}, rows);
    }
    if (!profile.diagnostics.empty()) {
        os << "\ndiagnostics:\n";
        for (const auto& d : profile.diagnostics) {
            os << "  " << d << "\n";
        }
    }
    emit(cfg, out, os.str());
    return kExitOk;
}

int cmd_extract(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    auto catalog = active_catalog(cfg);
    auto manifest = parse_corpus_manifest(read_file(cfg.input));
    auto base = std::filesystem::path(cfg.input).parent_path().string();
    auto result = extract_corpus(manifest, catalog, base.empty() ? "." : base);
    for (const auto& d : result.diagnostics) {
        err << "skipped: " << d << "\n";
    }
    emit(cfg, out, save_store(result.store));
    return kExitOk;
}

int cmd_rank(const RunConfig& cfg, std::ostream& out)
{
    auto catalog = active_catalog(cfg);
    auto store = load_store_file(cfg.input, catalog);
    auto counts = tally(store.profiles, catalog);
    std::size_t k = cfg.top.empty() ? catalog.size() : cfg.top.front();
    auto ranked = rank_and_select(counts, k, cfg.drop_unobserved);

    std::vector<std::string> header{"rank", "id", "mi", "n11", "n10", "n01", "n00"};
    std::vector<std::vector<std::string>> rows;
    json j = json::array();
    for (std::size_t r = 0; r < ranked.size(); ++r) {
        const auto& f = ranked[r];
        rows.push_back({std::to_string(r + 1), f.id, fixed(f.mi), std::to_string(f.counts.n11),
                        std::to_string(f.counts.n10), std::to_string(f.counts.n01),
                        std::to_string(f.counts.n00)});
        j.push_back({{"rank", r + 1}, {"id", f.id}, {"mi", fixed_json(f.mi)},
                     {"n11", f.counts.n11}, {"n10", f.counts.n10}, {"n01", f.counts.n01},
                     {"n00", f.counts.n00}});
    }
    switch (parse_format(cfg.format)) {
    case Format::Json: emit(cfg, out, j.dump(2) + "\n"); break;
    case Format::Csv: emit(cfg, out, render_csv(header, rows)); break;
    case Format::Table: emit(cfg, out, render_table(header, rows)); break;
    }
    return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out)
{
    auto catalog = active_catalog(cfg);
    auto store = load_store_file(cfg.input, catalog);
    auto specs = feature_specs(cfg, true);
    if (specs.size() != 1) {
        throw CLI::ValidationError("train", "give exactly one of --top, --ranks, --features");
    }
    auto selected = select_features(store.profiles, catalog, specs.front(), cfg.drop_unobserved);
    auto model = train(store.profiles, catalog, selected, cfg.alpha);
    emit(cfg, out, save_model(model));
    return kExitOk;
}

int cmd_classify(const RunConfig& cfg, std::ostream& out)
{
    auto catalog = active_catalog(cfg);
    auto model = load_model(read_file(cfg.model_path), catalog);

    std::vector<AppProfile> profiles;
    auto head = read_file(cfg.input);
    if (head.starts_with("#apkbayes-store")) {
        profiles = load_store(head, catalog.version).profiles;
    } else {
        profiles.push_back(run_detectors(ApkArchive::open_file(cfg.input), catalog));
    }

    std::vector<std::string> header{"id", "verdict", "posterior_suspicious", "log_odds"};
    std::vector<std::vector<std::string>> rows;
    json j = json::array();
    for (const auto& p : profiles) {
        auto v = classify(model, project(model, catalog, p.bits));
        rows.push_back({p.source_id, std::string(to_string(v.label)), fixed(v.posterior_suspicious),
                        fixed(v.log_odds)});
        j.push_back({{"id", p.source_id}, {"verdict", std::string(to_string(v.label))},
                     {"posterior_suspicious", fixed_json(v.posterior_suspicious)},
                     {"log_odds", fixed_json(v.log_odds)}});
    }
    switch (parse_format(cfg.format)) {
    case Format::Json: emit(cfg, out, j.dump(2) + "\n"); break;
    case Format::Csv: emit(cfg, out, render_csv(header, rows)); break;
    case Format::Table: emit(cfg, out, render_table(header, rows)); break;
    }
    return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out)
{
    auto catalog = active_catalog(cfg);
    auto store = load_store_file(cfg.input, catalog);

    std::vector<std::string> header{"features", "ERR", "ACC", "TNR", "FPR", "TPR", "FNR", "Prec.", "AUC"};
    std::vector<std::vector<std::string>> rows;
    json j = json::array();
    std::string roc_csv = "features,fpr,tpr,threshold\n";

    for (const auto& spec : feature_specs(cfg, true)) {
        CvOptions opts;
        opts.folds = cfg.folds;
        opts.spec = spec;
        opts.alpha = cfg.alpha;
        opts.seed = cfg.seed;
        opts.global_ranking = cfg.global_ranking;
        opts.pooled = cfg.pooled;
        opts.drop_unobserved = cfg.drop_unobserved;
        auto result = evaluate_cv(store.profiles, catalog, opts);
        const auto& r = result.report;

        rows.push_back({spec.label(), fixed(r.err), fixed(r.acc), fixed(r.tnr), fixed(r.fpr),
                        fixed(r.tpr), fixed(r.fnr), fixed(r.precision), fixed(r.auc)});
        json folds = json::array();
        for (const auto& f : r.fold_reports) {
            folds.push_back({{"acc", fixed_json(f.acc)}, {"auc", fixed_json(f.auc)},
                             {"selected", f.selected_features}});
        }
        j.push_back({{"features", spec.label()}, {"ERR", fixed_json(r.err)},
                     {"ACC", fixed_json(r.acc)}, {"TNR", fixed_json(r.tnr)},
                     {"FPR", fixed_json(r.fpr)}, {"TPR", fixed_json(r.tpr)},
                     {"FNR", fixed_json(r.fnr)}, {"Prec.", fixed_json(r.precision)},
                     {"AUC", fixed_json(r.auc)},
                     {"counts", {{"n_bb", r.counts.n_bb}, {"n_bs", r.counts.n_bs},
                                 {"n_sb", r.counts.n_sb}, {"n_ss", r.counts.n_ss}}},
                     {"folds", folds}});

        if (!cfg.roc_path.empty()) {
            std::vector<double> scores;
            std::vector<Label> truths;
            for (const auto& s : result.scored) {
                scores.push_back(s.score);
                truths.push_back(s.truth);
            }
            for (const auto& p : roc_curve(scores, truths)) {
                roc_csv += spec.label() + "," + fixed(p.fpr) + "," + fixed(p.tpr) + ","
                    + (std::isinf(p.threshold) ? std::string("inf") : fixed(p.threshold)) + "\n";
            }
        }
    }

    if (!cfg.roc_path.empty()) {
        std::ofstream roc(cfg.roc_path, std::ios::binary);
        roc << roc_csv;
        if (!roc) {
            throw Error(ErrorKind::Io, "cannot write '" + cfg.roc_path + "'");
        }
    }
    switch (parse_format(cfg.format)) {
    case Format::Json: emit(cfg, out, j.dump(2) + "\n"); break;
    case Format::Csv: emit(cfg, out, render_csv(header, rows)); break;
    case Format::Table: emit(cfg, out, render_table(header, rows)); break;
    }
    return kExitOk;
}

int cmd_synth(const RunConfig& cfg, std::ostream& out)
{
    auto catalog = active_catalog(cfg);
    auto spec = cfg.marginals_path.empty() ? default_marginals()
                                           : parse_marginals(read_file(cfg.marginals_path));
    emit(cfg, out, save_store(synth_generate(spec, catalog, cfg.n_benign, cfg.n_suspicious, cfg.seed)));
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Static APK feature extraction and naive-Bayes malware screening", "apkbayes"};
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    const std::vector<std::string> formats{"table", "csv", "json"};

    auto add_catalog = [&](CLI::App* sub) {
        sub->add_option("--catalog", cfg.catalog_path, "Feature catalog file (default: built-in 25)")
            ->check(CLI::ExistingFile);
    };
    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember(formats));
    };
    auto add_output = [&](CLI::App* sub) {
        sub->add_option("-o,--output", cfg.output, "Write the primary output to this file");
    };
    auto add_selection = [&](CLI::App* sub) {
        sub->add_option("--top", cfg.top, "Use the top K ranked features (repeatable)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--ranks", cfg.ranks, "Use ranks FIRST-LAST, e.g. 16-20 (repeatable)");
        sub->add_option("--features", cfg.features, "Comma-separated feature ids");
        sub->add_flag("--drop-unobserved", cfg.drop_unobserved,
                      "Discard features that never fired before ranking");
    };

    auto* analyze = app.add_subcommand("analyze", "Profile one package and report every detector");
    analyze->add_option("apk", cfg.input, "Package file")->required();
    add_catalog(analyze);
    add_format(analyze);
    add_output(analyze);

    auto* extract = app.add_subcommand("extract", "Profile a corpus manifest into a profile store");
    extract->add_option("manifest", cfg.input, "CSV with header id,label,family")->required();
    add_catalog(extract);
    add_output(extract);

    auto* rank = app.add_subcommand("rank", "Rank catalog features by mutual information");
    rank->add_option("store", cfg.input, "Profile store")->required();
    rank->add_option("--top", cfg.top, "Show only the top K")->check(CLI::PositiveNumber)->expected(1);
    rank->add_flag("--drop-unobserved", cfg.drop_unobserved, "Discard features that never fired");
    add_catalog(rank);
    add_format(rank);
    add_output(rank);

    auto* train_cmd = app.add_subcommand("train", "Train a model from a profile store");
    train_cmd->add_option("store", cfg.input, "Profile store")->required();
    train_cmd->add_option("--alpha", cfg.alpha, "Smoothing pseudo-count")->check(CLI::NonNegativeNumber);
    add_selection(train_cmd);
    add_catalog(train_cmd);
    add_output(train_cmd);

    auto* classify_cmd = app.add_subcommand("classify", "Classify a package or every profile in a store");
    classify_cmd->add_option("input", cfg.input, "Package file or profile store")->required();
    classify_cmd->add_option("--model", cfg.model_path, "Model file")->required()->check(CLI::ExistingFile);
    add_catalog(classify_cmd);
    add_format(classify_cmd);
    add_output(classify_cmd);

    auto* evaluate = app.add_subcommand("evaluate", "Stratified k-fold cross-validation report");
    evaluate->add_option("store", cfg.input, "Profile store")->required();
    evaluate->add_option("--folds", cfg.folds, "Number of folds")->check(CLI::Range(2, 1000));
    evaluate->add_option("--alpha", cfg.alpha, "Smoothing pseudo-count")->check(CLI::NonNegativeNumber);
    evaluate->add_option("--seed", cfg.seed, "Fold-assignment seed")->required();
    evaluate->add_flag("--global-ranking", cfg.global_ranking,
                       "Rank once on the whole store before splitting");
    evaluate->add_flag("--pooled", cfg.pooled, "Report pooled instead of fold-averaged metrics");
    evaluate->add_option("--roc", cfg.roc_path, "Write ROC points (fpr,tpr,threshold) as CSV");
    add_selection(evaluate);
    add_catalog(evaluate);
    add_format(evaluate);
    add_output(evaluate);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic profile store from marginals");
    synth->add_option("--benign", cfg.n_benign, "Benign samples")->check(CLI::NonNegativeNumber);
    synth->add_option("--suspicious", cfg.n_suspicious, "Suspicious samples")->check(CLI::NonNegativeNumber);
    synth->add_option("--seed", cfg.seed, "Generator seed")->required();
    synth->add_option("--marginals", cfg.marginals_path, "id<TAB>p_benign<TAB>p_suspicious file")
        ->check(CLI::ExistingFile);
    add_catalog(synth);
    add_output(synth);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        if (code != 0) {
            err << app.help();
            return kExitInputError;
        }
        return kExitOk;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(cfg, out);
        if (extract->parsed()) return cmd_extract(cfg, out, err);
        if (rank->parsed()) return cmd_rank(cfg, out);
        if (train_cmd->parsed()) return cmd_train(cfg, out);
        if (classify_cmd->parsed()) return cmd_classify(cfg, out);
        if (evaluate->parsed()) return cmd_evaluate(cfg, out);
        if (synth->parsed()) return cmd_synth(cfg, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternalError;
    }
    return kExitInputError;
}

}  // namespace apkbayes
