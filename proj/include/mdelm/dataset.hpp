#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mdelm/csv.hpp"
#include "mdelm/encoding.hpp"
#include "mdelm/errors.hpp"
#include "mdelm/rng.hpp"

namespace mdelm {

/// Labeled feature matrix. Labels are integers in [0, n_classes).
struct Dataset {
    FeatureMatrix features;
    std::vector<int> labels;
    int n_classes = 0;

    Eigen::Index n_samples() const { return features.values.rows(); }
    Eigen::Index n_features() const { return features.values.cols(); }

    void validate() const {
        if (static_cast<Eigen::Index>(labels.size()) != n_samples())
            throw ValidationError("dataset: label count does not match sample count");
        if (static_cast<Eigen::Index>(features.sample_ids.size()) != n_samples())
            throw ValidationError("dataset: id count does not match sample count");
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] < 0 || labels[i] >= n_classes)
                throw ValidationError("dataset: sample '" + features.sample_ids[i] +
                                      "' has label " + std::to_string(labels[i]) +
                                      " outside [0," + std::to_string(n_classes) + ")");
        }
    }
};

/// Columns: id,label,<feature names>. Declared class count is optional;
/// by default it is max(label)+1.
inline Dataset load_dataset_csv(const std::string& path,
                                std::optional<int> n_classes = std::nullopt) {
    const auto rows = csv::read_file(path);
    if (rows.empty()) throw ValidationError("dataset csv '" + path + "': empty file");
    const auto& header = rows.front();
    if (header.size() < 2 || header[0] != "id" || header[1] != "label")
        throw ValidationError("dataset csv '" + path + "': header must start with id,label");
    Dataset ds;
    ds.features.feature_names.assign(header.begin() + 2, header.end());
    const Eigen::Index dim = static_cast<Eigen::Index>(ds.features.feature_names.size());
    ds.features.values.resize(static_cast<Eigen::Index>(rows.size() - 1), dim);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size())
            throw ValidationError("dataset csv '" + path + "' row " + std::to_string(r + 1) +
                                  ": expected " + std::to_string(header.size()) +
                                  " cells, got " + std::to_string(row.size()));
        ds.features.sample_ids.push_back(row[0]);
        const auto label = csv::parse_int(row[1]);
        if (!label)
            throw ValidationError("dataset csv '" + path + "' row " + std::to_string(r + 1) +
                                  ", column label: malformed value '" + row[1] + "'");
        ds.labels.push_back(static_cast<int>(*label));
        for (std::size_t c = 2; c < row.size(); ++c) {
            const auto v = csv::parse_double(row[c]);
            if (!v)
                throw ValidationError("dataset csv '" + path + "' row " + std::to_string(r + 1) +
                                      ", column " + header[c] + ": malformed value '" + row[c] +
                                      "'");
            ds.features.values(static_cast<Eigen::Index>(r - 1),
                               static_cast<Eigen::Index>(c - 2)) = *v;
        }
    }
    int max_label = -1;
    for (int l : ds.labels) max_label = std::max(max_label, l);
    ds.n_classes = n_classes.value_or(max_label + 1);
    ds.validate();
    return ds;
}

inline std::string dataset_to_csv(const Dataset& ds) {
    std::string out = "id,label";
    for (const auto& name : ds.features.feature_names) out += "," + csv::quote_cell(name);
    out += '\n';
    for (Eigen::Index r = 0; r < ds.n_samples(); ++r) {
        out += csv::quote_cell(ds.features.sample_ids[static_cast<std::size_t>(r)]);
        out += "," + std::to_string(ds.labels[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < ds.n_features(); ++c)
            out += "," + csv::format_double(ds.features.values(r, c));
        out += '\n';
    }
    return out;
}

inline void save_dataset_csv(const Dataset& ds, const std::string& path) {
    csv::write_file(path, dataset_to_csv(ds));
}

/// Rows of `ds` selected by `keep`, in the order given.
inline Dataset select_rows(const Dataset& ds, const std::vector<std::size_t>& keep) {
    Dataset out;
    out.n_classes = ds.n_classes;
    out.features.feature_names = ds.features.feature_names;
    out.features.values.resize(static_cast<Eigen::Index>(keep.size()), ds.n_features());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.features.values.row(static_cast<Eigen::Index>(i)) =
            ds.features.values.row(static_cast<Eigen::Index>(keep[i]));
        out.features.sample_ids.push_back(ds.features.sample_ids[keep[i]]);
        out.labels.push_back(ds.labels[keep[i]]);
    }
    return out;
}

/// Row indices kept by subsample_focus: every sample of `focus_class` plus a
/// seeded uniform draw of `n_other` over the remaining classes, in source
/// order. With `stratified = true` the draw preserves per-class proportions
/// (largest-remainder allocation).
inline std::vector<std::size_t> subsample_focus_indices(const std::vector<int>& labels,
                                                        int n_classes, int focus_class,
                                                        std::size_t n_other, std::uint64_t seed,
                                                        bool stratified = false) {
    std::vector<std::size_t> focus, other;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == focus_class ? focus : other).push_back(i);
    }
    if (focus.empty())
        throw ValidationError("subsample_focus: class " + std::to_string(focus_class) +
                              " has no samples");
    if (n_other > other.size())
        throw ValidationError("subsample_focus: requested " + std::to_string(n_other) +
                              " non-focus samples, only " + std::to_string(other.size()) +
                              " available");
    Rng rng(seed);
    std::vector<std::size_t> chosen;
    if (!stratified) {
        for (std::size_t k : rng.sample_without_replacement(other.size(), n_other))
            chosen.push_back(other[k]);
    } else {
        std::vector<std::vector<std::size_t>> per_class(static_cast<std::size_t>(n_classes));
        for (std::size_t i : other) per_class[static_cast<std::size_t>(labels[i])].push_back(i);
        std::vector<std::size_t> take(per_class.size(), 0);
        std::vector<std::pair<double, std::size_t>> remainders;
        std::size_t assigned = 0;
        for (std::size_t c = 0; c < per_class.size(); ++c) {
            if (per_class[c].empty()) continue;
            const double exact = static_cast<double>(n_other) *
                                 static_cast<double>(per_class[c].size()) /
                                 static_cast<double>(other.size());
            take[c] = static_cast<std::size_t>(exact);
            assigned += take[c];
            remainders.emplace_back(exact - static_cast<double>(take[c]), c);
        }
        std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (std::size_t i = 0; assigned < n_other; ++i, ++assigned) {
            ++take[remainders[i % remainders.size()].second];
        }
        for (std::size_t c = 0; c < per_class.size(); ++c) {
            if (take[c] > per_class[c].size())
                throw ValidationError("subsample_focus: stratified draw exceeds class size");
            for (std::size_t k : rng.sample_without_replacement(per_class[c].size(), take[c]))
                chosen.push_back(per_class[c][k]);
        }
    }
    chosen.insert(chosen.end(), focus.begin(), focus.end());
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

inline Dataset subsample_focus(const Dataset& ds, int focus_class, std::size_t n_other,
                               std::uint64_t seed, bool stratified = false) {
    return select_rows(ds, subsample_focus_indices(ds.labels, ds.n_classes, focus_class, n_other,
                                                   seed, stratified));
}

/// Synthetic ground-truth generator: Gaussian clusters with appended
/// pure-noise columns, plus a hidden set of flipped labels.
struct SynthSpec {
    int n_classes = 4;
    int per_class = 300;
    int dim = 20;           // informative dimensions
    int n_noise = 30;       // N(0,1) noise columns
    double spread = 0.9;    // cluster standard deviation
    double flip_fraction = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_classes < 2) throw ValidationError("synth: need at least 2 classes");
        if (per_class < 1) throw ValidationError("synth: per_class must be positive");
        if (dim < 1) throw ValidationError("synth: dim must be positive");
        if (n_noise < 0) throw ValidationError("synth: n_noise must be non-negative");
        if (!(spread > 0.0)) throw ValidationError("synth: spread must be positive");
        if (flip_fraction < 0.0 || flip_fraction >= 0.5)
            throw ValidationError("synth: flip_fraction must be in [0, 0.5)");
    }
};

struct SynthResult {
    Dataset clean;
    Dataset flipped;
    std::vector<std::size_t> hidden_flip_indices;  // rows whose label was flipped
    std::vector<int> original_labels;              // clean labels of those rows
};

inline SynthResult synth_blobs(const SynthSpec& spec) {
    spec.validate();
    SynthResult out;
    const std::size_t n = static_cast<std::size_t>(spec.n_classes) *
                          static_cast<std::size_t>(spec.per_class);
    const Eigen::Index dim = spec.dim + spec.n_noise;
    Rng rng(derive_seed(spec.seed, 0));

    // Class centers on a scaled simplex-ish random layout; pairwise distances
    // stay comparable across seeds because each coordinate is N(0, 1).
    Eigen::MatrixXd centers(spec.n_classes, spec.dim);
    for (int c = 0; c < spec.n_classes; ++c)
        for (int d = 0; d < spec.dim; ++d) centers(c, d) = rng.normal();

    Dataset& ds = out.clean;
    ds.n_classes = spec.n_classes;
    ds.features.values.resize(static_cast<Eigen::Index>(n), dim);
    for (Eigen::Index d = 0; d < dim; ++d) {
        const std::string prefix = d < spec.dim ? "f" : "noise";
        const int idx = d < spec.dim ? static_cast<int>(d) : static_cast<int>(d) - spec.dim;
        ds.features.feature_names.push_back(prefix + std::to_string(idx));
    }
    std::size_t row = 0;
    for (int c = 0; c < spec.n_classes; ++c) {
        for (int i = 0; i < spec.per_class; ++i, ++row) {
            char id[16];
            std::snprintf(id, sizeof(id), "s%05zu", row);
            ds.features.sample_ids.emplace_back(id);
            ds.labels.push_back(c);
            for (int d = 0; d < spec.dim; ++d)
                ds.features.values(static_cast<Eigen::Index>(row), d) =
                    centers(c, d) + spec.spread * rng.normal();
            for (int d = spec.dim; d < dim; ++d)
                ds.features.values(static_cast<Eigen::Index>(row), d) = rng.normal();
        }
    }

    out.flipped = out.clean;
    const std::size_t n_flips =
        static_cast<std::size_t>(std::ceil(spec.flip_fraction * static_cast<double>(n)));
    if (n_flips > 0) {
        Rng flip_rng(derive_seed(spec.seed, 1));
        auto picked = flip_rng.sample_without_replacement(n, n_flips);
        std::sort(picked.begin(), picked.end());
        for (std::size_t i : picked) {
            const int original = out.clean.labels[i];
            const int offset = 1 + static_cast<int>(flip_rng.uniform_int(
                                       static_cast<std::uint64_t>(spec.n_classes - 1)));
            out.flipped.labels[i] = (original + offset) % spec.n_classes;
            out.hidden_flip_indices.push_back(i);
            out.original_labels.push_back(original);
        }
    }
    return out;
}

/// Sidecar describing the hidden flips of a synthetic dataset.
inline nlohmann::json synth_truth_json(const SynthSpec& spec, const SynthResult& result) {
    nlohmann::json flips = nlohmann::json::array();
    for (std::size_t k = 0; k < result.hidden_flip_indices.size(); ++k) {
        const std::size_t i = result.hidden_flip_indices[k];
        flips.push_back({{"id", result.flipped.features.sample_ids[i]},
                         {"index", i},
                         {"original_label", result.original_labels[k]},
                         {"flipped_label", result.flipped.labels[i]}});
    }
    return nlohmann::json{{"format", "mdelm.synth-truth/1"},
                          {"spec",
                           {{"n_classes", spec.n_classes},
                            {"per_class", spec.per_class},
                            {"dim", spec.dim},
                            {"n_noise", spec.n_noise},
                            {"spread", spec.spread},
                            {"flip_fraction", spec.flip_fraction},
                            {"seed", spec.seed}}},
                          {"hidden_flips", std::move(flips)}};
}

}  // namespace mdelm
