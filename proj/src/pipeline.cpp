#include "glat/pipeline.hpp"

#include "glat/checkpoint.hpp"
#include "glat/error.hpp"
#include "glat/heatmap.hpp"
#include "glat/seeds.hpp"
#include "glat/synth.hpp"
#include "glat/textfmt.hpp"

#include "glat/embedding_io.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

namespace glat {

Dataset load_dataset(const std::filesystem::path& dir) {
    std::vector<std::pair<std::string, GradeLabel>> labels = load_labels(dir / "labels.csv");
    std::sort(labels.begin(), labels.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    Dataset data;
    for (const auto& [slide_id, label] : labels) {
        const std::filesystem::path path = dir / (slide_id + ".emb");
        EmbeddingTable table = load_embedding_table(path);
        if (table.slide_id != slide_id)
            throw FormatError("dataset " + dir.string() + ": file " + path.filename().string() +
                              " declares slide '" + table.slide_id + "'");
        if (data.d == 0) data.d = table.d;
        if (table.d != data.d)
            throw DimensionError("dataset " + dir.string() + ": slide '" + slide_id + "' has d=" +
                                 std::to_string(table.d) + ", expected " + std::to_string(data.d));
        data.tables.push_back(std::move(table));
        data.labels.push_back(label.class_index);
    }
    if (data.tables.empty()) throw FormatError("dataset " + dir.string() + ": no labeled slides");
    return data;
}

void save_dataset(const std::filesystem::path& dir, const std::vector<EmbeddingTable>& tables,
                  const std::vector<int>& labels) {
    if (tables.size() != labels.size()) throw DimensionError("save_dataset: labels misaligned");
    std::filesystem::create_directories(dir);
    std::vector<std::pair<std::string, GradeLabel>> rows;
    for (std::size_t i = 0; i < tables.size(); ++i) {
        save_embedding_table(tables[i], dir / (tables[i].slide_id + ".emb"));
        rows.emplace_back(tables[i].slide_id, GradeLabel{labels[i]});
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    save_labels(rows, dir / "labels.csv");
}

FrozenProjections scorer_projections(const Settings& settings, int feature_dim) {
    return make_frozen_projections(settings.fm_seed, feature_dim, resolve_dk(settings, feature_dim),
                                   resolve_dv(settings, feature_dim));
}

namespace {

FeatureProviderSpec provider_spec(const Settings& settings, int data_dim) {
    FeatureProviderSpec spec;
    spec.kind = provider_kind_from_string(settings.provider);
    spec.seed = settings.provider_seed;
    if (spec.kind == ProviderKind::RandomProjection) {
        if (settings.provider_out_dim <= 0)
            throw ConfigError("provider_out_dim must be positive for random-projection");
        spec.out_dim = settings.provider_out_dim;
    } else {
        spec.out_dim = data_dim;
    }
    return spec;
}

/// Random-selection ablation: a seeded shuffle picks min(M, N) ids, and the
/// draw order stands in for selection scores so aggregation ranks carry no
/// information beyond the shuffle.
WSIBag random_selection_bag(const EmbeddingTable& features, GradeLabel label, int m,
                            std::uint64_t seed) {
    std::vector<PatchId> ids;
    ids.reserve(static_cast<std::size_t>(features.size()));
    for (const PatchRecord& rec : features.records) ids.push_back(rec.id);
    SplitMix64 gen(seed);
    shuffle(ids, gen);
    const std::size_t keep = std::min(ids.size(), static_cast<std::size_t>(m));
    std::vector<PatchId> chosen(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(keep));

    WSIBag bag;
    bag.slide_id = features.slide_id;
    bag.label = label;
    bag.patches = features.subset(chosen);
    bag.selection_scores.resize(static_cast<Index>(keep));
    for (std::size_t pos = 0; pos < keep; ++pos) {
        const PatchId id = ids[pos];
        for (Index r = 0; r < bag.patches.size(); ++r) {
            if (bag.patches.records[static_cast<std::size_t>(r)].id == id) {
                bag.selection_scores[r] = static_cast<double>(keep - pos);
                break;
            }
        }
    }
    return bag;
}

}  // namespace

PreparedData prepare_bags(const Dataset& data, const Settings& settings) {
    if (settings.m < 1) throw ConfigError("m must be >= 1");
    if (settings.t < 1) throw ConfigError("t must be >= 1");
    const bool random_selection = [&] {
        if (settings.selection == "irm") return false;
        if (settings.selection == "random") return true;
        throw ConfigError("selection must be 'irm' or 'random', got '" + settings.selection + "'");
    }();
    const ScoreMode mode = score_mode_from_string(settings.score_mode);
    const SigmaSpec sigma = sigma_spec_from_string(settings.sigma);
    const std::uint64_t sel_root = seeds::selection_root(settings.seed);

    PreparedData out;
    out.labels = data.labels;
    FrozenProjections proj;
    for (std::size_t i = 0; i < data.tables.size(); ++i) {
        const EmbeddingTable features =
            local_extract(provider_spec(settings, data.tables[i].d), data.tables[i]);
        if (out.feature_dim == 0) {
            out.feature_dim = features.d;
            proj = scorer_projections(settings, features.d);
        }
        const std::uint64_t slide_seed = derive_seed(sel_root, static_cast<std::uint64_t>(i));

        WSIBag bag;
        if (random_selection) {
            bag = random_selection_bag(features, GradeLabel{data.labels[i]}, settings.m, slide_seed);
        } else {
            const IrmResult irm =
                irm_run(features, proj, settings.m, settings.t, slide_seed, mode);
            bag.slide_id = features.slide_id;
            bag.label = GradeLabel{data.labels[i]};
            bag.patches = features.subset(irm.final_state.selected_ids);
            bag.selection_scores = irm.final_state.scores;
        }
        out.bundles.push_back(build_laplacian_bundle(bag.patches.matrix(), sigma, [&] {
            std::vector<PatchId> ids;
            for (const PatchRecord& rec : bag.patches.records) ids.push_back(rec.id);
            return ids;
        }()));
        out.bags.push_back(std::move(bag));
    }
    return out;
}

ModelParams build_model(const Settings& settings, int feature_dim) {
    if (settings.heads != 1)
        throw ConfigError("heads = " + std::to_string(settings.heads) +
                          " is not supported; this implementation is single-head");
    return init_model_params(feature_dim, resolve_dk(settings, feature_dim),
                             resolve_dv(settings, feature_dim), settings.m, settings.filter_order,
                             settings.lambda, graph_bias_from_string(settings.graph_bias),
                             attention_kind_from_string(settings.attention),
                             aggregation_mode_from_string(settings.aggregation),
                             seeds::model_root(settings.seed));
}

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochStats>& history) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open history for writing: " + path.string());
    os << "epoch,train_loss,val_loss,val_auc,val_kappa\n";
    for (const EpochStats& e : history) {
        os << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.val_loss) << ','
           << format_double(e.val_auc) << ',' << format_double(e.val_kappa) << '\n';
    }
    if (!os) throw IoError("write failed for history: " + path.string());
}

void write_predictions_csv(const std::filesystem::path& path, const std::vector<PredictionRow>& rows) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open predictions for writing: " + path.string());
    os << "slide_id,p0,p1,p2,p3,pred,label\n";
    for (const PredictionRow& r : rows) {
        os << r.slide_id;
        for (Index c = 0; c < r.probs.size(); ++c) os << ',' << format_double(r.probs[c]);
        os << ',' << r.pred << ',' << r.label << '\n';
    }
    if (!os) throw IoError("write failed for predictions: " + path.string());
}

std::vector<PredictionRow> read_predictions_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open predictions: " + path.string());
    std::string line;
    if (!std::getline(is, line) || trim(line) != "slide_id,p0,p1,p2,p3,pred,label")
        throw FormatError("predictions " + path.string() + ": bad header");
    std::vector<PredictionRow> rows;
    long line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string_view> fields = split(trim(line), ',');
        if (fields.size() != 7)
            throw FormatError("predictions " + path.string() + ": line " + std::to_string(line_no) +
                              " has " + std::to_string(fields.size()) + " fields, expected 7");
        PredictionRow r;
        r.slide_id = std::string(fields[0]);
        r.probs.resize(kNumClasses);
        for (int c = 0; c < kNumClasses; ++c)
            r.probs[c] = parse_double(fields[static_cast<std::size_t>(c) + 1],
                                      "probability at line " + std::to_string(line_no));
        r.pred = static_cast<int>(parse_int(fields[5], "pred at line " + std::to_string(line_no)));
        r.label = static_cast<int>(parse_int(fields[6], "label at line " + std::to_string(line_no)));
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

struct CliOptions {
    std::string config_path;
    std::string input;
    std::string output_dir;
    std::string checkpoint;
    std::string trace;
    std::string source = "irm";
    bool seed_set = false;
    std::uint64_t seed = 0;
    // select overrides
    int m = -1;
    int t = -1;
    std::string score_mode;
};

Settings settings_for(const CliOptions& opt) {
    Settings s = opt.config_path.empty() ? Settings{} : load_settings(opt.config_path);
    if (opt.seed_set) s.seed = opt.seed;
    if (opt.m > 0) s.m = opt.m;
    if (opt.t > 0) s.t = opt.t;
    if (!opt.score_mode.empty()) s.score_mode = opt.score_mode;
    return s;
}

std::filesystem::path require_output_dir(const CliOptions& opt) {
    if (opt.output_dir.empty()) throw ConfigError("--output-dir is required for this command");
    std::filesystem::create_directories(opt.output_dir);
    return opt.output_dir;
}

std::vector<PredictionRow> prediction_rows(const PreparedData& prepared, const ModelParams& params) {
    const Matrix probs = predict_probs(prepared.bags, prepared.bundles, params);
    std::vector<PredictionRow> rows;
    for (std::size_t i = 0; i < prepared.bags.size(); ++i) {
        PredictionRow r;
        r.slide_id = prepared.bags[i].slide_id;
        r.probs = probs.row(static_cast<Index>(i)).transpose();
        r.pred = argmax_class(r.probs);
        r.label = prepared.labels[i];
        rows.push_back(std::move(r));
    }
    return rows;
}

TrainConfig train_config_for(const Settings& s) {
    TrainConfig cfg;
    cfg.lr = s.lr;
    cfg.weight_decay = s.weight_decay;
    cfg.batch_size = s.batch_size;
    cfg.max_epochs = s.max_epochs;
    cfg.patience = s.patience;
    cfg.alpha = s.alpha;
    cfg.seed = s.seed;
    cfg.fd_check = s.fd_check;
    cfg.kappa_weighting = kappa_weighting_from_string(s.kappa_weighting);
    return cfg;
}

template <typename T>
std::vector<T> take(const std::vector<T>& items, const std::vector<std::size_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(items[i]);
    return out;
}

void cmd_synth(const CliOptions& opt, std::ostream& out) {
    const Settings s = settings_for(opt);
    SynthSpec spec;
    spec.grid_w = s.grid_w;
    spec.grid_h = s.grid_h;
    spec.d = s.d;
    spec.n_slides = s.n_slides;
    spec.lesion_count_min = s.lesion_count_min;
    spec.lesion_count_max = s.lesion_count_max;
    spec.lesion_radius_min = s.lesion_radius_min;
    spec.lesion_radius_max = s.lesion_radius_max;
    spec.class_signal_scale = s.class_signal_scale;
    spec.noise_scale = s.noise_scale;
    spec.seed = s.seed;
    const std::vector<SynthSlide> slides = synth_generate(spec);
    std::vector<EmbeddingTable> tables;
    std::vector<int> labels;
    for (const SynthSlide& slide : slides) {
        tables.push_back(slide.table);
        labels.push_back(slide.label.class_index);
    }
    save_dataset(require_output_dir(opt), tables, labels);
    out << "wrote " << slides.size() << " slides\n";
}

void cmd_select(const CliOptions& opt, std::ostream& out) {
    const Settings s = settings_for(opt);
    if (opt.input.empty()) throw ConfigError("--input is required for select");
    if (opt.trace.empty()) throw ConfigError("--trace is required for select");
    const EmbeddingTable raw = load_embedding_table(opt.input);
    const EmbeddingTable features = local_extract(provider_spec(s, raw.d), raw);
    const FrozenProjections proj = scorer_projections(s, features.d);
    const IrmResult irm = irm_run(features, proj, s.m, s.t,
                                  derive_seed(seeds::selection_root(s.seed), 0),
                                  score_mode_from_string(s.score_mode));
    std::ofstream os(opt.trace);
    if (!os) throw IoError("cannot open trace for writing: " + std::string(opt.trace));
    os << "t,pool_size,selected_ids\n";
    for (const IrmIteration& it : irm.trace) {
        os << it.t << ',' << it.pool_ids.size();
        for (const PatchId id : it.selected_ids) os << ',' << id;
        os << '\n';
    }
    if (!os) throw IoError("write failed for trace: " + std::string(opt.trace));
    out << "selected " << irm.final_state.selected_ids.size() << " of " << raw.size()
        << " patches over " << irm.final_state.total_iterations << " iterations\n";
}

void cmd_train(const CliOptions& opt, std::ostream& out) {
    const Settings s = settings_for(opt);
    if (opt.input.empty()) throw ConfigError("--input is required for train");
    const std::filesystem::path out_dir = require_output_dir(opt);
    const Dataset data = load_dataset(opt.input);
    const PreparedData prepared = prepare_bags(data, s);
    const SplitIndices split = stratified_split(prepared.labels, s.val_fraction, s.seed);

    const TrainResult result = train_loop(
        take(prepared.bags, split.train), take(prepared.bundles, split.train),
        take(prepared.bags, split.val), take(prepared.bundles, split.val),
        build_model(s, prepared.feature_dim), train_config_for(s));

    save_checkpoint(result.best_params, out_dir / "checkpoint.txt");
    write_history_csv(out_dir / "history.csv", result.history);
    const EpochStats& best = result.history[static_cast<std::size_t>(result.best_epoch - 1)];
    out << "best_epoch=" << best.epoch << " val_loss=" << format_double(best.val_loss)
        << " val_auc=" << format_double(best.val_auc) << " val_kappa=" << format_double(best.val_kappa)
        << '\n';
}

void cmd_infer(const CliOptions& opt, std::ostream& out) {
    const Settings s = settings_for(opt);
    if (opt.input.empty()) throw ConfigError("--input is required for infer");
    if (opt.checkpoint.empty()) throw ConfigError("--checkpoint is required for infer");
    const std::filesystem::path out_dir = require_output_dir(opt);
    const Dataset data = load_dataset(opt.input);
    const PreparedData prepared = prepare_bags(data, s);
    const ModelParams params =
        load_checkpoint(opt.checkpoint, build_model(s, prepared.feature_dim));
    write_predictions_csv(out_dir / "predictions.csv", prediction_rows(prepared, params));
    out << "wrote predictions for " << prepared.bags.size() << " slides\n";
}

void cmd_heatmap(const CliOptions& opt, std::ostream& out) {
    const Settings s = settings_for(opt);
    if (opt.input.empty()) throw ConfigError("--input is required for heatmap");
    const std::filesystem::path out_dir = require_output_dir(opt);
    const EmbeddingTable raw = load_embedding_table(opt.input);
    const EmbeddingTable features = local_extract(provider_spec(s, raw.d), raw);
    const std::string stem = std::filesystem::path(opt.input).stem().string();

    if (opt.source == "irm") {
        const FrozenProjections proj = scorer_projections(s, features.d);
        const AttentionMap att = attention_matrix(features, proj);
        const Vector scores = importance_scores(att, score_mode_from_string(s.score_mode));
        heatmap_export(features, scores, out_dir / (stem + "_irm.csv"), out_dir / (stem + "_irm.pgm"));
    } else if (opt.source == "gla") {
        if (opt.checkpoint.empty()) throw ConfigError("--checkpoint is required for heatmap --source gla");
        Dataset single;
        single.tables.push_back(raw);
        single.labels.push_back(0);
        single.d = raw.d;
        const PreparedData prepared = prepare_bags(single, s);
        const ModelParams params =
            load_checkpoint(opt.checkpoint, build_model(s, prepared.feature_dim));
        const SampleForward f = forward_sample(prepared.bags[0], prepared.bundles[0], params);
        const Vector scores = f.gla.attention.colwise().mean().transpose();
        heatmap_export(prepared.bags[0].patches, scores, out_dir / (stem + "_gla.csv"),
                       out_dir / (stem + "_gla.pgm"));
    } else {
        throw ConfigError("heatmap --source must be 'irm' or 'gla', got '" + opt.source + "'");
    }
    out << "wrote heatmap for " << stem << " (" << opt.source << ")\n";
}

void cmd_crossval(const CliOptions& opt, std::ostream& out) {
    const Settings s = settings_for(opt);
    if (opt.input.empty()) throw ConfigError("--input is required for crossval");
    const std::filesystem::path out_dir = require_output_dir(opt);
    const Dataset data = load_dataset(opt.input);
    const PreparedData prepared = prepare_bags(data, s);
    const std::vector<std::vector<std::size_t>> folds =
        stratified_folds(prepared.labels, s.folds, s.seed);

    std::vector<double> aucs, kappas, accs;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> train_idx;
        for (std::size_t g = 0; g < folds.size(); ++g)
            if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
        std::sort(train_idx.begin(), train_idx.end());

        const TrainResult result = train_loop(
            take(prepared.bags, train_idx), take(prepared.bundles, train_idx),
            take(prepared.bags, folds[f]), take(prepared.bundles, folds[f]),
            build_model(s, prepared.feature_dim), train_config_for(s));

        PreparedData fold_val;
        fold_val.bags = take(prepared.bags, folds[f]);
        fold_val.bundles = take(prepared.bundles, folds[f]);
        fold_val.labels = take(prepared.labels, folds[f]);
        fold_val.feature_dim = prepared.feature_dim;
        const std::vector<PredictionRow> rows = prediction_rows(fold_val, result.best_params);
        const std::string tag = "fold" + std::to_string(f);
        write_predictions_csv(out_dir / (tag + "_predictions.csv"), rows);
        write_history_csv(out_dir / (tag + "_history.csv"), result.history);

        const Matrix probs = predict_probs(fold_val.bags, fold_val.bundles, result.best_params);
        const MetricsReport metrics =
            compute_metrics(probs, fold_val.labels, kappa_weighting_from_string(s.kappa_weighting));
        aucs.push_back(metrics.auc);
        kappas.push_back(metrics.kappa);
        accs.push_back(metrics.acc);
    }

    auto mean = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    auto sample_std = [&](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        const double mu = mean(v);
        double acc = 0.0;
        for (double x : v) acc += (x - mu) * (x - mu);
        return std::sqrt(acc / static_cast<double>(v.size() - 1));
    };

    std::ofstream os(out_dir / "crossval.csv");
    if (!os) throw IoError("cannot open crossval summary for writing");
    os << "fold,auc,kappa,acc\n";
    for (std::size_t f = 0; f < aucs.size(); ++f)
        os << f << ',' << format_double(aucs[f]) << ',' << format_double(kappas[f]) << ','
           << format_double(accs[f]) << '\n';
    os << "mean," << format_double(mean(aucs)) << ',' << format_double(mean(kappas)) << ','
       << format_double(mean(accs)) << '\n';
    os << "std," << format_double(sample_std(aucs)) << ',' << format_double(sample_std(kappas)) << ','
       << format_double(sample_std(accs)) << '\n';
    if (!os) throw IoError("write failed for crossval summary");
    out << "crossval mean_auc=" << format_double(mean(aucs))
        << " mean_kappa=" << format_double(mean(kappas)) << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"bag-of-patches slide classifier"};
    app.require_subcommand(1);
    CliOptions opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "config file (key = value lines)");
        sub->add_option("--seed", opt.seed, "override the config seed")
            ->each([&](const std::string&) { opt.seed_set = true; });
    };

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset directory");
    add_common(synth);
    synth->add_option("--output-dir", opt.output_dir, "dataset directory to write")->required();

    CLI::App* select = app.add_subcommand("select", "run patch selection, write the trace");
    add_common(select);
    select->add_option("--input", opt.input, "embedding table file")->required();
    select->add_option("--trace", opt.trace, "trace file to write")->required();
    select->add_option("--m", opt.m, "patches to keep");
    select->add_option("--t", opt.t, "selection iterations");
    select->add_option("--score-mode", opt.score_mode, "received or row-mean");

    CLI::App* train = app.add_subcommand("train", "train on a dataset directory");
    add_common(train);
    train->add_option("--input", opt.input, "dataset directory")->required();
    train->add_option("--output-dir", opt.output_dir, "checkpoint/history directory")->required();

    CLI::App* infer = app.add_subcommand("infer", "write per-slide probabilities");
    add_common(infer);
    infer->add_option("--input", opt.input, "dataset directory")->required();
    infer->add_option("--checkpoint", opt.checkpoint, "checkpoint file")->required();
    infer->add_option("--output-dir", opt.output_dir, "predictions directory")->required();

    CLI::App* heatmap = app.add_subcommand("heatmap", "export per-patch score maps");
    add_common(heatmap);
    heatmap->add_option("--input", opt.input, "embedding table file")->required();
    heatmap->add_option("--source", opt.source, "irm or gla");
    heatmap->add_option("--checkpoint", opt.checkpoint, "checkpoint (gla source)");
    heatmap->add_option("--output-dir", opt.output_dir, "directory for csv/pgm")->required();

    CLI::App* crossval = app.add_subcommand("crossval", "k-fold cross-validation");
    add_common(crossval);
    crossval->add_option("--input", opt.input, "dataset directory")->required();
    crossval->add_option("--output-dir", opt.output_dir, "per-fold outputs directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (synth->parsed()) cmd_synth(opt, out);
        else if (select->parsed()) cmd_select(opt, out);
        else if (train->parsed()) cmd_train(opt, out);
        else if (infer->parsed()) cmd_infer(opt, out);
        else if (heatmap->parsed()) cmd_heatmap(opt, out);
        else if (crossval->parsed()) cmd_crossval(opt, out);
        return 0;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << '\n';
        return 4;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace glat
