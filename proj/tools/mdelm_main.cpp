// mdelm command-line pipeline: synth, encode, train, detect, report.
//
// Exit codes: 0 success, 1 runtime failure, 2 validation failure.
// Logs go to stderr; data goes to files (report prints its table to stdout).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <mdelm/mdelm.hpp>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw mdelm::ValidationError("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw mdelm::ValidationError("invalid JSON in " + path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& content) {
    if (const fs::path parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    mdelm::csv::write_file(path, content);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void reject_unknown_keys(const json& object, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : object.items()) {
        if (!known.count(key))
            throw mdelm::ValidationError("config: unknown key '" + where + "." + key + "'");
    }
}

// --- run configuration -------------------------------------------------------

struct ElmSection {
    int n_sigmoid = 200;
    int n_rbf = 200;
    bool passthrough = true;
    std::string activation = "tanh";
    double lambda = 1.0;
    std::uint64_t seed = 0;
};

struct ClassifierSection {
    std::vector<double> alpha_grid{1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2};
    double l1_ratio = 0.15;
    int k_folds = 5;
    int epochs = 20;
    double eta0 = 0.01;
    bool balanced = true;
    std::uint64_t seed = 0;
};

struct RunConfig {
    ElmSection elm;
    ClassifierSection classifier;
    mdelm::DetectorConfig detector;
    std::optional<std::string> io_data, io_out, io_model, io_features, io_schema;
};

RunConfig parse_run_config(const json& j) {
    if (!j.is_object()) throw mdelm::ValidationError("config: top level must be an object");
    reject_unknown_keys(j, {"encoding", "elm", "classifier", "detector", "io"}, "config");
    RunConfig cfg;
    try {
        if (j.contains("elm")) {
            const auto& e = j.at("elm");
            reject_unknown_keys(
                e, {"n_sigmoid", "n_rbf", "passthrough", "activation", "lambda", "seed"}, "elm");
            cfg.elm.n_sigmoid = e.value("n_sigmoid", cfg.elm.n_sigmoid);
            cfg.elm.n_rbf = e.value("n_rbf", cfg.elm.n_rbf);
            cfg.elm.passthrough = e.value("passthrough", cfg.elm.passthrough);
            cfg.elm.activation = e.value("activation", cfg.elm.activation);
            mdelm::activation_from_string(cfg.elm.activation);  // validates
            cfg.elm.lambda = e.value("lambda", cfg.elm.lambda);
            cfg.elm.seed = e.value("seed", cfg.elm.seed);
        }
        if (j.contains("classifier")) {
            const auto& c = j.at("classifier");
            reject_unknown_keys(
                c, {"alpha_grid", "l1_ratio", "k_folds", "epochs", "eta0", "balanced", "seed"},
                "classifier");
            if (c.contains("alpha_grid"))
                cfg.classifier.alpha_grid = c.at("alpha_grid").get<std::vector<double>>();
            cfg.classifier.l1_ratio = c.value("l1_ratio", cfg.classifier.l1_ratio);
            cfg.classifier.k_folds = c.value("k_folds", cfg.classifier.k_folds);
            cfg.classifier.epochs = c.value("epochs", cfg.classifier.epochs);
            cfg.classifier.eta0 = c.value("eta0", cfg.classifier.eta0);
            cfg.classifier.balanced = c.value("balanced", cfg.classifier.balanced);
            cfg.classifier.seed = c.value("seed", cfg.classifier.seed);
        }
        if (j.contains("detector")) {
            const auto& d = j.at("detector");
            reject_unknown_keys(d,
                                {"n_models", "feature_subset_size", "artificial_fraction",
                                 "flips_per_iteration", "focus_class", "focus_on_original",
                                 "target_artificial_score", "max_iterations", "quantiles",
                                 "lambda", "n_sigmoid", "n_rbf", "passthrough",
                                 "subsample_n_other", "subsample_stratified",
                                 "include_artificial_in_fit", "master_seed"},
                                "detector");
            cfg.detector = mdelm::DetectorConfig::from_json(d);
        }
        if (j.contains("io")) {
            const auto& io = j.at("io");
            reject_unknown_keys(io, {"data", "out", "model", "features", "schema"}, "io");
            if (io.contains("data")) cfg.io_data = io.at("data").get<std::string>();
            if (io.contains("out")) cfg.io_out = io.at("out").get<std::string>();
            if (io.contains("model")) cfg.io_model = io.at("model").get<std::string>();
            if (io.contains("features")) cfg.io_features = io.at("features").get<std::string>();
            if (io.contains("schema")) cfg.io_schema = io.at("schema").get<std::string>();
        }
        if (j.contains("encoding")) {
            reject_unknown_keys(j.at("encoding"), {"schema", "fit_spec"}, "encoding");
        }
    } catch (const json::exception& e) {
        throw mdelm::ValidationError(std::string("config: ") + e.what());
    }
    cfg.detector.validate();
    if (cfg.classifier.k_folds < 2)
        throw mdelm::ValidationError("config: classifier.k_folds must be at least 2");
    if (cfg.classifier.alpha_grid.empty())
        throw mdelm::ValidationError("config: classifier.alpha_grid must not be empty");
    if (cfg.elm.n_sigmoid == 0 && cfg.elm.n_rbf == 0 && !cfg.elm.passthrough)
        throw mdelm::ValidationError("config: elm layer would be empty");
    return cfg;
}

json elm_section_json(const ElmSection& e) {
    return {{"n_sigmoid", e.n_sigmoid},
            {"n_rbf", e.n_rbf},
            {"passthrough", e.passthrough},
            {"activation", e.activation},
            {"lambda", e.lambda},
            {"seed", e.seed}};
}

std::uint64_t feature_name_hash(const std::vector<std::string>& names) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& name : names) {
        for (unsigned char c : name) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= 0x1f;
        h *= 0x100000001b3ULL;
    }
    return h;
}

json classifier_section_json(const ClassifierSection& c) {
    return {{"alpha_grid", c.alpha_grid}, {"l1_ratio", c.l1_ratio}, {"k_folds", c.k_folds},
            {"epochs", c.epochs},         {"eta0", c.eta0},         {"balanced", c.balanced},
            {"seed", c.seed}};
}

// --- encoding fit-spec -------------------------------------------------------

std::vector<mdelm::VariableSpec> parse_fit_spec(const json& j) {
    if (!j.is_object() || !j.contains("variables"))
        throw mdelm::ValidationError("fit spec: expected an object with a 'variables' array");
    reject_unknown_keys(j, {"variables"}, "fit_spec");
    std::vector<mdelm::VariableSpec> specs;
    for (const auto& e : j.at("variables")) {
        reject_unknown_keys(e,
                            {"name", "kind", "max_categories", "include_other_slot",
                             "include_missing_slot", "reference_year", "projection"},
                            "fit_spec.variables");
        mdelm::VariableSpec v;
        try {
            v.name = e.at("name").get<std::string>();
            v.kind = mdelm::variable_kind_from_string(e.at("kind").get<std::string>());
            if (e.contains("max_categories") && !e.at("max_categories").is_null())
                v.max_categories = e.at("max_categories").get<int>();
            v.include_other_slot = e.value("include_other_slot", false);
            v.include_missing_slot = e.value("include_missing_slot", false);
            v.reference_year = e.value("reference_year", 0);
            if (e.contains("projection")) {
                const auto& p = e.at("projection");
                reject_unknown_keys(p, {"out_dim", "density", "seed"}, "fit_spec.projection");
                mdelm::ProjectionSpec proj;
                proj.out_dim = p.at("out_dim").get<int>();
                proj.density = p.value("density", 0.0);
                proj.seed = p.value("seed", std::uint64_t{0});
                v.projection = proj;
            }
        } catch (const json::exception& ex) {
            throw mdelm::ValidationError(std::string("fit spec: ") + ex.what());
        }
        specs.push_back(std::move(v));
    }
    return specs;
}

// --- shared pipeline pieces --------------------------------------------------

std::vector<std::string> hidden_feature_names(const std::vector<std::string>& input_names,
                                              const mdelm::HiddenLayer& layer) {
    std::vector<std::string> names;
    if (layer.passthrough) names = input_names;
    for (Eigen::Index k = 0; k < layer.sigmoid_weights.rows(); ++k)
        names.push_back("sig_" + std::to_string(k));
    for (Eigen::Index k = 0; k < layer.rbf_centers.rows(); ++k)
        names.push_back("rbf_" + std::to_string(k));
    return names;
}

std::vector<std::string> read_feature_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw mdelm::ValidationError("cannot open file: " + path);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) names.push_back(line);
    }
    if (names.empty()) throw mdelm::ValidationError("feature list '" + path + "' is empty");
    return names;
}

std::string confusion_to_csv(const Eigen::MatrixXi& m) {
    std::string out = "true\\pred";
    for (Eigen::Index c = 0; c < m.cols(); ++c) out += "," + std::to_string(c);
    out += '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out += std::to_string(r);
        for (Eigen::Index c = 0; c < m.cols(); ++c) out += "," + std::to_string(m(r, c));
        out += '\n';
    }
    return out;
}

std::string sibling_path(const std::string& path, const std::string& suffix) {
    fs::path p(path);
    fs::path stem = p.parent_path() / p.stem();
    return stem.string() + suffix;
}

// --- subcommands ---------------------------------------------------------

struct SynthArgs {
    int classes = 4, per_class = 300, dim = 20, noise = 30;
    double spread = 0.9, flip = 0.0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_synth(const SynthArgs& a) {
    mdelm::SynthSpec spec;
    spec.n_classes = a.classes;
    spec.per_class = a.per_class;
    spec.dim = a.dim;
    spec.n_noise = a.noise;
    spec.spread = a.spread;
    spec.flip_fraction = a.flip;
    spec.seed = a.seed;
    const auto result = mdelm::synth_blobs(spec);
    write_text(a.out, mdelm::dataset_to_csv(result.flipped));
    write_json(sibling_path(a.out, ".truth.json"), mdelm::synth_truth_json(spec, result));
    write_json(sibling_path(a.out, ".resolved.json"),
               {{"command", "synth"},
                {"spec",
                 {{"n_classes", spec.n_classes},
                  {"per_class", spec.per_class},
                  {"dim", spec.dim},
                  {"n_noise", spec.n_noise},
                  {"spread", spec.spread},
                  {"flip_fraction", spec.flip_fraction},
                  {"seed", spec.seed}}},
                {"out", a.out}});
    std::cerr << "synth: wrote " << result.flipped.n_samples() << " samples, "
              << result.hidden_flip_indices.size() << " hidden flips -> " << a.out << "\n";
    return 0;
}

struct EncodeArgs {
    std::string input, schema, fit_spec, out, label_column = "label";
};

int cmd_encode(const EncodeArgs& a) {
    if (a.schema.empty() == a.fit_spec.empty())
        throw mdelm::ValidationError("encode: exactly one of --schema/--fit-schema is required");
    std::vector<mdelm::RawRecord> records;
    if (a.input.size() > 6 && a.input.substr(a.input.size() - 6) == ".jsonl")
        records = mdelm::read_raw_jsonl(a.input);
    else
        records = mdelm::read_raw_csv(a.input);

    mdelm::EncodingSchema schema;
    if (!a.schema.empty()) {
        schema = mdelm::EncodingSchema::from_json(load_json_file(a.schema));
    } else {
        schema = mdelm::fit_schema(records, parse_fit_spec(load_json_file(a.fit_spec)));
        write_json(sibling_path(a.out, ".schema.json"), schema.to_json());
    }
    const auto matrix = schema.encode_dataset(records);

    std::optional<std::vector<int>> labels;
    if (!a.label_column.empty()) {
        std::vector<int> parsed;
        bool all_present = !records.empty();
        for (const auto& rec : records) {
            const auto v = rec.get(a.label_column);
            if (!v) {
                all_present = false;
                break;
            }
            const auto l = mdelm::csv::parse_int(*v);
            if (!l)
                throw mdelm::ValidationError("record '" + rec.id + "': label column '" +
                                             a.label_column + "' is not an integer");
            parsed.push_back(static_cast<int>(*l));
        }
        if (all_present) labels = std::move(parsed);
    }
    if (labels) {
        mdelm::Dataset ds;
        ds.features = matrix;
        ds.labels = *labels;
        int max_label = 0;
        for (int l : *labels) max_label = std::max(max_label, l);
        ds.n_classes = max_label + 1;
        write_text(a.out, mdelm::dataset_to_csv(ds));
    } else {
        write_text(a.out, mdelm::feature_matrix_to_csv(matrix));
    }
    write_json(sibling_path(a.out, ".resolved.json"),
               {{"command", "encode"},
                {"input", a.input},
                {"schema", a.schema.empty() ? json(nullptr) : json(a.schema)},
                {"fit_spec", a.fit_spec.empty() ? json(nullptr) : json(a.fit_spec)},
                {"label_column", a.label_column},
                {"schema_hash", schema.hash()},
                {"out", a.out}});
    std::cerr << "encode: " << records.size() << " records -> " << matrix.values.cols()
              << " features -> " << a.out << "\n";
    return 0;
}

struct TrainArgs {
    std::string data, config, out_dir;
    std::optional<std::uint64_t> seed;
    bool no_balance = false;
};

int cmd_train(const TrainArgs& a) {
    RunConfig cfg = a.config.empty() ? RunConfig{} : parse_run_config(load_json_file(a.config));
    if (a.seed) {
        cfg.elm.seed = *a.seed;
        cfg.classifier.seed = *a.seed;
    }
    if (a.no_balance) cfg.classifier.balanced = false;
    const std::string data_path = !a.data.empty() ? a.data
                                  : cfg.io_data   ? *cfg.io_data
                                                  : throw mdelm::ValidationError(
                                                        "train: --data or io.data required");

    const mdelm::Dataset ds = mdelm::load_dataset_csv(data_path);
    const auto standardizer = mdelm::Standardizer::fit(ds.features.values);
    const Eigen::MatrixXd x = standardizer.apply(ds.features.values);
    const auto layer = mdelm::make_hidden_layer(static_cast<int>(x.cols()), cfg.elm.n_sigmoid,
                                                cfg.elm.n_rbf, mdelm::derive_seed(cfg.elm.seed, 1),
                                                &x, cfg.elm.passthrough,
                                                mdelm::activation_from_string(cfg.elm.activation));
    const Eigen::MatrixXd h = mdelm::transform(layer, x);

    const Eigen::VectorXd weights =
        cfg.classifier.balanced
            ? mdelm::balanced_class_weights(ds.labels, ds.n_classes)
            : Eigen::VectorXd::Ones(static_cast<Eigen::Index>(ds.labels.size()));
    const auto plan = mdelm::stratified_kfold(ds.labels, cfg.classifier.k_folds,
                                              mdelm::derive_seed(cfg.classifier.seed, 2));
    for (const auto& w : plan.warnings) std::cerr << "train: warning: " << w << "\n";
    const mdelm::SgdConfig sgd{cfg.classifier.eta0, cfg.classifier.epochs};
    const auto fit = mdelm::fit_elasticnet_sgd(h, ds.labels, cfg.classifier.alpha_grid,
                                               cfg.classifier.l1_ratio, weights, plan, sgd,
                                               cfg.classifier.seed);

    const auto oof = mdelm::cross_val_predict(h, ds.labels, fit.model.alpha,
                                              cfg.classifier.l1_ratio, weights, plan, sgd,
                                              cfg.classifier.seed);
    const auto confusion = mdelm::confusion_matrix(ds.labels, oof, ds.n_classes);
    const double bal_acc = mdelm::balanced_accuracy(confusion);
    double total_acc = 0.0;
    for (std::size_t i = 0; i < oof.size(); ++i) total_acc += oof[i] == ds.labels[i] ? 1.0 : 0.0;
    total_acc /= static_cast<double>(oof.size());

    const auto selected = mdelm::selected_features(fit.model);
    const auto h_names = hidden_feature_names(ds.features.feature_names, layer);

    fs::create_directories(a.out_dir);
    const json model_doc{{"format", "mdelm.model/1"},
                         {"standardizer", standardizer.to_json()},
                         {"hidden_layer", layer.to_json()},
                         {"classifier", fit.model.to_json()},
                         {"n_classes", ds.n_classes},
                         {"feature_names", ds.features.feature_names},
                         {"feature_hash", feature_name_hash(ds.features.feature_names)},
                         {"elm", elm_section_json(cfg.elm)}};
    write_json(a.out_dir + "/model.json", model_doc);
    write_text(a.out_dir + "/confusion.csv", confusion_to_csv(confusion));
    std::string cv = "alpha,mean_weighted_accuracy\n";
    for (const auto& [alpha, score] : fit.cv_table)
        cv += mdelm::csv::format_double(alpha) + "," + mdelm::csv::format_double(score) + "\n";
    write_text(a.out_dir + "/cv_table.csv", cv);
    std::string features_txt;
    for (Eigen::Index idx : selected) features_txt += h_names[static_cast<std::size_t>(idx)] + "\n";
    write_text(a.out_dir + "/selected_features.txt", features_txt);
    write_json(a.out_dir + "/metrics.json",
               {{"balanced_accuracy", bal_acc},
                {"total_accuracy", total_acc},
                {"alpha", fit.model.alpha},
                {"n_selected", selected.size()},
                {"n_features", h.cols()},
                {"zero_fraction", fit.model.zero_fraction()}});
    write_json(a.out_dir + "/resolved_config.json",
               {{"command", "train"},
                {"data", data_path},
                {"elm", elm_section_json(cfg.elm)},
                {"classifier", classifier_section_json(cfg.classifier)},
                {"out_dir", a.out_dir}});
    std::cerr << "train: balanced accuracy " << bal_acc << ", selected " << selected.size()
              << "/" << h.cols() << " features (alpha " << fit.model.alpha << ")\n";
    return 0;
}

struct DetectArgs {
    std::string data, config, features, model, out;
    std::optional<int> models;
    std::optional<double> target_score;
    std::optional<long long> max_iterations;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
};

int cmd_detect(const DetectArgs& a) {
    RunConfig cfg = a.config.empty() ? RunConfig{} : parse_run_config(load_json_file(a.config));
    if (a.models) cfg.detector.n_models = *a.models;
    if (a.target_score) cfg.detector.target_artificial_score = *a.target_score;
    if (a.max_iterations) cfg.detector.max_iterations = *a.max_iterations;
    if (a.seed) cfg.detector.master_seed = *a.seed;
    cfg.detector.validate();
    const std::string data_path = !a.data.empty() ? a.data
                                  : cfg.io_data   ? *cfg.io_data
                                                  : throw mdelm::ValidationError(
                                                        "detect: --data or io.data required");
    const std::string model_path = !a.model.empty() ? a.model : cfg.io_model.value_or("");
    const std::string features_path = !a.features.empty() ? a.features
                                                          : cfg.io_features.value_or("");

    mdelm::Dataset ds = mdelm::load_dataset_csv(data_path);
    if (!model_path.empty()) {
        // Recompute the trained model's feature space so a selected-feature
        // list may reference nonlinear columns (sig_*/rbf_*) as well.
        const json doc = load_json_file(model_path);
        if (doc.value("format", "") != "mdelm.model/1")
            throw mdelm::ValidationError("model file '" + model_path +
                                         "': missing or unknown format tag");
        const auto standardizer = mdelm::Standardizer::from_json(doc.at("standardizer"));
        const auto layer = mdelm::HiddenLayer::from_json(doc.at("hidden_layer"));
        const auto stored_names = doc.at("feature_names").get<std::vector<std::string>>();
        if (stored_names != ds.features.feature_names)
            throw mdelm::ValidationError("model file '" + model_path +
                                         "': feature names do not match the dataset");
        const Eigen::MatrixXd h =
            mdelm::transform(layer, standardizer.apply(ds.features.values));
        ds.features.feature_names = hidden_feature_names(stored_names, layer);
        ds.features.values = h;
    }
    if (!features_path.empty()) {
        const auto wanted = read_feature_list(features_path);
        std::vector<Eigen::Index> cols;
        for (const auto& name : wanted) {
            const auto it = std::find(ds.features.feature_names.begin(),
                                      ds.features.feature_names.end(), name);
            if (it == ds.features.feature_names.end())
                throw mdelm::ValidationError("feature '" + name + "' not found in " + data_path);
            cols.push_back(it - ds.features.feature_names.begin());
        }
        Eigen::MatrixXd sub(ds.features.values.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c)
            sub.col(static_cast<Eigen::Index>(c)) = ds.features.values.col(cols[c]);
        ds.features.values = std::move(sub);
        ds.features.feature_names = wanted;
    }

    const auto report = mdelm::run_ensemble(ds, cfg.detector, a.jobs);
    write_json(a.out, mdelm::score_report_to_json(report));
    write_text(sibling_path(a.out, ".scores.csv"), mdelm::score_report_to_csv(report));
    write_json(sibling_path(a.out, ".resolved.json"),
               {{"command", "detect"},
                {"data", data_path},
                {"model", model_path.empty() ? json(nullptr) : json(model_path)},
                {"features", features_path.empty() ? json(nullptr) : json(features_path)},
                {"detector", cfg.detector.to_json()},
                {"out", a.out}});
    std::cerr << "detect: " << report.models.size() << " models";
    if (report.welch) std::cerr << ", welch p = " << report.welch->p;
    std::cerr << " -> " << a.out << "\n";
    return 0;
}

struct ReportArgs {
    std::string scores, out;
    double quantile = 0.99;
};

int cmd_report(const ReportArgs& a) {
    const auto report = mdelm::score_report_from_json(load_json_file(a.scores));
    const auto detected = mdelm::detect(report, a.quantile);  // validates the quantile

    double threshold = 0.0;
    for (const auto& [q, v] : report.thresholds)
        if (q == a.quantile) threshold = v;

    std::cout << "samples: " << report.sample_ids.size() << "\n";
    if (report.normal_fit)
        std::cout << "score normal fit: mean " << report.normal_fit->mean << ", std "
                  << report.normal_fit->stddev << "\n";
    if (report.welch)
        std::cout << "welch (artificial vs rest): t " << report.welch->t << ", p "
                  << report.welch->p << "\n";
    std::cout << "detected at quantile " << a.quantile << " (threshold " << threshold
              << "): " << detected.size() << "\n";
    std::cout << "id,mean_score\n";
    for (const auto& id : detected) {
        for (std::size_t i = 0; i < report.sample_ids.size(); ++i)
            if (report.sample_ids[i] == id)
                std::cout << id << "," << report.averaged_scores[i] << "\n";
    }

    if (!a.out.empty()) {
        // Plot data: per-sample scores plus one threshold row per quantile.
        std::string csv = "kind,index,id,score\n";
        for (std::size_t i = 0; i < report.sample_ids.size(); ++i) {
            csv += "sample," + std::to_string(i) + "," +
                   mdelm::csv::quote_cell(report.sample_ids[i]) + "," +
                   mdelm::csv::format_double(report.averaged_scores[i]) + "\n";
        }
        for (const auto& [q, v] : report.thresholds)
            csv += "threshold,,q" + mdelm::csv::format_double(q) + "," +
                   mdelm::csv::format_double(v) + "\n";
        write_text(a.out, csv);
        write_json(sibling_path(a.out, ".resolved.json"),
                   {{"command", "report"},
                    {"scores", a.scores},
                    {"quantile", a.quantile},
                    {"out", a.out}});
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MD-ELM mislabel detection pipeline"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic labeled dataset");
    synth_cmd->add_option("--classes", synth.classes, "number of classes");
    synth_cmd->add_option("--per-class", synth.per_class, "samples per class");
    synth_cmd->add_option("--dim", synth.dim, "informative feature count");
    synth_cmd->add_option("--noise", synth.noise, "pure-noise feature count");
    synth_cmd->add_option("--spread", synth.spread, "cluster standard deviation");
    synth_cmd->add_option("--flip", synth.flip, "hidden mislabel fraction");
    synth_cmd->add_option("--seed", synth.seed, "generator seed");
    synth_cmd->add_option("--out", synth.out, "output dataset CSV")->required();

    EncodeArgs encode;
    auto* encode_cmd = app.add_subcommand("encode", "encode raw records to features");
    encode_cmd->add_option("--input", encode.input, "raw records (.csv or .jsonl)")->required();
    encode_cmd->add_option("--schema", encode.schema, "fitted schema JSON");
    encode_cmd->add_option("--fit-schema", encode.fit_spec, "fit a schema from this spec JSON");
    encode_cmd->add_option("--label-column", encode.label_column,
                           "raw column holding integer labels (default: label)");
    encode_cmd->add_option("--out", encode.out, "output CSV")->required();

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "train the ELM + elastic-net classifier");
    train_cmd->add_option("--data", train.data, "encoded dataset CSV");
    train_cmd->add_option("--config", train.config, "run config JSON");
    train_cmd->add_option("--out-dir", train.out_dir, "output directory")->required();
    train_cmd->add_option("--seed", train.seed, "override elm and classifier seeds");
    train_cmd->add_flag("--no-balance", train.no_balance, "disable balanced class weights");

    DetectArgs detect;
    auto* detect_cmd = app.add_subcommand("detect", "run the MD-ELM mislabel detector");
    detect_cmd->add_option("--data", detect.data, "encoded dataset CSV");
    detect_cmd->add_option("--config", detect.config, "run config JSON");
    detect_cmd->add_option("--features", detect.features, "selected-feature list (one per line)");
    detect_cmd->add_option("--model", detect.model, "trained model.json (for sig_/rbf_ features)");
    detect_cmd->add_option("--out", detect.out, "output report JSON")->required();
    detect_cmd->add_option("--models", detect.models, "override detector.n_models");
    detect_cmd->add_option("--target-score", detect.target_score,
                           "override detector.target_artificial_score");
    detect_cmd->add_option("--max-iterations", detect.max_iterations,
                           "override detector.max_iterations");
    detect_cmd->add_option("--seed", detect.seed, "override detector.master_seed");
    detect_cmd->add_option("--jobs", detect.jobs, "parallel models (result is jobs-invariant)");

    ReportArgs report;
    auto* report_cmd = app.add_subcommand("report", "summarize a score report");
    report_cmd->add_option("--scores", report.scores, "score report JSON")->required();
    report_cmd->add_option("--quantile", report.quantile, "detection quantile")->required();
    report_cmd->add_option("--out", report.out, "plot-data CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth_cmd->parsed()) return cmd_synth(synth);
        if (encode_cmd->parsed()) return cmd_encode(encode);
        if (train_cmd->parsed()) return cmd_train(train);
        if (detect_cmd->parsed()) return cmd_detect(detect);
        if (report_cmd->parsed()) return cmd_report(report);
    } catch (const mdelm::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
