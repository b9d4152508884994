#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mdelm/csv.hpp"
#include "mdelm/errors.hpp"
#include "mdelm/rng.hpp"

namespace mdelm {

/// One raw tabular record. A key that is absent, or maps to an empty string,
/// is a missing value.
struct RawRecord {
    std::string id;
    std::map<std::string, std::string> values;

    std::optional<std::string> get(const std::string& name) const {
        auto it = values.find(name);
        if (it == values.end() || it->second.empty()) return std::nullopt;
        return it->second;
    }
};

enum class VariableKind {
    OneHot,
    Presence,
    BowProjected,
    LogAge,
    RealWithIndicator,
    Count,
    MultiHot,
};

inline std::string to_string(VariableKind k) {
    switch (k) {
        case VariableKind::OneHot: return "onehot";
        case VariableKind::Presence: return "presence";
        case VariableKind::BowProjected: return "bow_projected";
        case VariableKind::LogAge: return "log_age";
        case VariableKind::RealWithIndicator: return "real_with_indicator";
        case VariableKind::Count: return "count";
        case VariableKind::MultiHot: return "multihot";
    }
    throw Error("unknown VariableKind");
}

inline VariableKind variable_kind_from_string(const std::string& s) {
    if (s == "onehot") return VariableKind::OneHot;
    if (s == "presence") return VariableKind::Presence;
    if (s == "bow_projected") return VariableKind::BowProjected;
    if (s == "log_age") return VariableKind::LogAge;
    if (s == "real_with_indicator") return VariableKind::RealWithIndicator;
    if (s == "count") return VariableKind::Count;
    if (s == "multihot") return VariableKind::MultiHot;
    throw ValidationError("unknown variable kind: " + s);
}

/// Random sign-pattern projection. Entries are drawn from {-s, 0, +s} with
/// P(nonzero) = density and s = 1/sqrt(density * out_dim), which keeps
/// E[||Pv||^2] = ||v||^2.
struct ProjectionSpec {
    int in_dim = 0;
    int out_dim = 0;
    double density = 0.0;  // 0 before fitting; fit_schema fills 1/sqrt(in_dim)
    std::uint64_t seed = 0;
};

struct VariableSpec {
    std::string name;
    VariableKind kind = VariableKind::OneHot;
    std::vector<std::string> vocabulary;  // learned categories, special slots excluded
    bool include_other_slot = false;
    bool include_missing_slot = false;
    std::optional<int> max_categories;    // nullopt = unbounded
    std::optional<ProjectionSpec> projection;  // bow_projected only
    int reference_year = 0;               // log_age only

    /// Vocabulary as encoded, with the "<other>"/"<missing>" slots appended.
    std::vector<std::string> materialized_vocabulary() const {
        std::vector<std::string> out = vocabulary;
        if (include_other_slot) out.push_back("<other>");
        if (include_missing_slot) out.push_back("<missing>");
        return out;
    }
};

/// Title/subtitle tokenization: lowercase, split on non-alphanumeric,
/// drop single-character tokens.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        const unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            if (cur.size() > 1) tokens.push_back(cur);
            cur.clear();
        }
    }
    if (cur.size() > 1) tokens.push_back(cur);
    return tokens;
}

/// Set-valued cells (multihot, count lists) split on ';', trimmed.
inline std::vector<std::string> split_list(const std::string& cell) {
    std::vector<std::string> items;
    std::string cur;
    auto flush = [&] {
        const auto b = cur.find_first_not_of(" \t");
        if (b != std::string::npos) {
            const auto e = cur.find_last_not_of(" \t");
            items.push_back(cur.substr(b, e - b + 1));
        }
        cur.clear();
    };
    for (char c : cell) {
        if (c == ';') flush();
        else cur += c;
    }
    flush();
    return items;
}

// --- encoding primitives ---------------------------------------------------

/// One-hot over `vocab` with optional appended other/missing slots.
/// Unknown values route to <other> (falling back to <missing>); missing
/// values route to <missing> (falling back to <other>); all-zero otherwise.
inline Eigen::VectorXd encode_onehot(const std::optional<std::string>& value,
                                     const std::vector<std::string>& vocab,
                                     bool include_other, bool include_missing) {
    if (vocab.empty() && !include_other && !include_missing)
        throw ValidationError("encode_onehot: empty vocabulary");
    const Eigen::Index dim = static_cast<Eigen::Index>(vocab.size()) +
                             (include_other ? 1 : 0) + (include_missing ? 1 : 0);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
    const Eigen::Index other_slot = static_cast<Eigen::Index>(vocab.size());
    const Eigen::Index missing_slot = other_slot + (include_other ? 1 : 0);
    if (!value) {
        if (include_missing) out[missing_slot] = 1.0;
        else if (include_other) out[other_slot] = 1.0;
        return out;
    }
    const auto it = std::find(vocab.begin(), vocab.end(), *value);
    if (it != vocab.end()) {
        out[static_cast<Eigen::Index>(it - vocab.begin())] = 1.0;
    } else if (include_other) {
        out[other_slot] = 1.0;
    } else if (include_missing) {
        out[missing_slot] = 1.0;
    }
    return out;
}

inline Eigen::VectorXd encode_onehot(const std::optional<std::string>& value,
                                     const std::vector<std::string>& vocab,
                                     bool include_missing) {
    return encode_onehot(value, vocab, false, include_missing);
}

inline double encode_presence(const std::optional<std::string>& value) {
    return value ? 1.0 : 0.0;
}

/// (ln(reference - start + 1), 0) when the start year is known, (0, 1) when
/// missing. Errors when the publication starts after the reference year.
inline std::pair<double, double> encode_log_age(std::optional<int> start_year,
                                                int reference_year) {
    if (!start_year) return {0.0, 1.0};
    if (*start_year > reference_year)
        throw ValidationError("encode_log_age: start year " + std::to_string(*start_year) +
                              " is after reference year " + std::to_string(reference_year));
    return {std::log(static_cast<double>(reference_year - *start_year + 1)), 0.0};
}

/// Token counts over the fitted vocabulary; out-of-vocabulary tokens dropped.
inline Eigen::VectorXd encode_bow(const std::optional<std::string>& text,
                                  const std::vector<std::string>& vocabulary) {
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vocabulary.size()));
    if (!text) return counts;
    std::unordered_map<std::string, Eigen::Index> index;
    index.reserve(vocabulary.size());
    for (std::size_t i = 0; i < vocabulary.size(); ++i)
        index.emplace(vocabulary[i], static_cast<Eigen::Index>(i));
    for (const auto& tok : tokenize(*text)) {
        auto it = index.find(tok);
        if (it != index.end()) counts[it->second] += 1.0;
    }
    return counts;
}

inline Eigen::MatrixXd make_projection(const ProjectionSpec& spec) {
    if (spec.in_dim < 1 || spec.out_dim < 1)
        throw ValidationError("make_projection: dimensions must be positive");
    if (spec.out_dim > spec.in_dim)
        throw ValidationError("make_projection: out_dim exceeds in_dim");
    if (!(spec.density > 0.0 && spec.density <= 1.0))
        throw ValidationError("make_projection: density must be in (0,1]");
    const double s = 1.0 / std::sqrt(spec.density * static_cast<double>(spec.out_dim));
    Eigen::MatrixXd p(spec.out_dim, spec.in_dim);
    Rng rng(spec.seed);
    for (int r = 0; r < spec.out_dim; ++r) {
        for (int c = 0; c < spec.in_dim; ++c) {
            const double u = rng.uniform();
            p(r, c) = u < spec.density * 0.5 ? s : (u < spec.density ? -s : 0.0);
        }
    }
    return p;
}

inline Eigen::VectorXd project(const Eigen::VectorXd& v, const Eigen::MatrixXd& projection) {
    if (v.size() != projection.cols())
        throw ValidationError("project: vector length " + std::to_string(v.size()) +
                              " does not match projection input dim " +
                              std::to_string(projection.cols()));
    return projection * v;
}

// --- schema ----------------------------------------------------------------

/// Encoded output of a record set: dense values plus column/row labels.
struct FeatureMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> feature_names;
    std::vector<std::string> sample_ids;
};

class EncodingSchema {
public:
    EncodingSchema() = default;
    explicit EncodingSchema(std::vector<VariableSpec> variables)
        : variables_(std::move(variables)) {
        validate();
        build_feature_names();
    }

    const std::vector<VariableSpec>& variables() const { return variables_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    Eigen::Index dim() const { return static_cast<Eigen::Index>(feature_names_.size()); }

    Eigen::VectorXd encode_record(const RawRecord& record) const {
        Eigen::VectorXd row(dim());
        Eigen::Index at = 0;
        for (const auto& var : variables_) {
            const auto value = record.get(var.name);
            switch (var.kind) {
                case VariableKind::OneHot: {
                    row.segment(at, width(var)) = encode_onehot(
                        value, var.vocabulary, var.include_other_slot, var.include_missing_slot);
                    break;
                }
                case VariableKind::MultiHot: {
                    row.segment(at, width(var)) = encode_multihot(value, var);
                    break;
                }
                case VariableKind::Presence: {
                    row[at] = encode_presence(value);
                    break;
                }
                case VariableKind::LogAge: {
                    const auto [v, flag] = encode_log_age(parse_year(value, record.id, var.name),
                                                          var.reference_year);
                    row[at] = v;
                    row[at + 1] = flag;
                    break;
                }
                case VariableKind::RealWithIndicator: {
                    if (!value) {
                        row[at] = 0.0;
                        row[at + 1] = 1.0;
                    } else {
                        const auto parsed = csv::parse_double(*value);
                        if (!parsed)
                            throw ValidationError("record '" + record.id + "': variable '" +
                                                  var.name + "' expects a number, got '" +
                                                  *value + "'");
                        row[at] = *parsed;
                        row[at + 1] = 0.0;
                    }
                    break;
                }
                case VariableKind::Count: {
                    row[at] = encode_count(value, record.id, var.name);
                    break;
                }
                case VariableKind::BowProjected: {
                    const auto& proj = projection_for(var);
                    row.segment(at, proj.rows()) = proj * encode_bow(value, var.vocabulary);
                    if (var.include_missing_slot) row[at + proj.rows()] = value ? 0.0 : 1.0;
                    break;
                }
            }
            at += width(var);
        }
        return row;
    }

    FeatureMatrix encode_dataset(const std::vector<RawRecord>& records) const {
        FeatureMatrix out;
        out.feature_names = feature_names_;
        out.values.resize(static_cast<Eigen::Index>(records.size()), dim());
        out.sample_ids.reserve(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            out.values.row(static_cast<Eigen::Index>(i)) = encode_record(records[i]);
            out.sample_ids.push_back(records[i].id);
        }
        if (!out.values.allFinite()) throw Error("encode_dataset: non-finite output");
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json vars = nlohmann::json::array();
        for (const auto& v : variables_) {
            nlohmann::json j{{"name", v.name},
                             {"kind", to_string(v.kind)},
                             {"vocabulary", v.vocabulary},
                             {"include_other_slot", v.include_other_slot},
                             {"include_missing_slot", v.include_missing_slot}};
            j["max_categories"] = v.max_categories ? nlohmann::json(*v.max_categories)
                                                   : nlohmann::json(nullptr);
            if (v.kind == VariableKind::LogAge) j["reference_year"] = v.reference_year;
            if (v.projection) {
                j["projection"] = {{"in_dim", v.projection->in_dim},
                                   {"out_dim", v.projection->out_dim},
                                   {"density", v.projection->density},
                                   {"seed", v.projection->seed}};
            }
            vars.push_back(std::move(j));
        }
        return nlohmann::json{{"format", "mdelm.schema/1"}, {"variables", std::move(vars)}};
    }

    static EncodingSchema from_json(const nlohmann::json& j) {
        if (!j.is_object() || j.value("format", "") != "mdelm.schema/1")
            throw ValidationError("schema document: missing or unknown format tag");
        std::vector<VariableSpec> vars;
        for (const auto& e : j.at("variables")) {
            VariableSpec v;
            v.name = e.at("name").get<std::string>();
            v.kind = variable_kind_from_string(e.at("kind").get<std::string>());
            v.vocabulary = e.at("vocabulary").get<std::vector<std::string>>();
            v.include_other_slot = e.at("include_other_slot").get<bool>();
            v.include_missing_slot = e.at("include_missing_slot").get<bool>();
            if (e.contains("max_categories") && !e.at("max_categories").is_null())
                v.max_categories = e.at("max_categories").get<int>();
            v.reference_year = e.value("reference_year", 0);
            if (e.contains("projection")) {
                const auto& p = e.at("projection");
                v.projection = ProjectionSpec{p.at("in_dim").get<int>(),
                                              p.at("out_dim").get<int>(),
                                              p.at("density").get<double>(),
                                              p.at("seed").get<std::uint64_t>()};
            }
            vars.push_back(std::move(v));
        }
        return EncodingSchema(std::move(vars));
    }

    /// FNV-1a over the canonical JSON dump. Stored in model files so a model
    /// can refuse features produced by a different schema.
    std::uint64_t hash() const {
        const std::string dump = to_json().dump();
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : dump) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

private:
    static Eigen::Index width(const VariableSpec& v) {
        switch (v.kind) {
            case VariableKind::OneHot:
            case VariableKind::MultiHot:
                return static_cast<Eigen::Index>(v.vocabulary.size()) +
                       (v.include_other_slot ? 1 : 0) + (v.include_missing_slot ? 1 : 0);
            case VariableKind::Presence:
            case VariableKind::Count:
                return 1;
            case VariableKind::LogAge:
            case VariableKind::RealWithIndicator:
                return 2;
            case VariableKind::BowProjected:
                return v.projection->out_dim + (v.include_missing_slot ? 1 : 0);
        }
        throw Error("unknown VariableKind");
    }

    Eigen::VectorXd encode_multihot(const std::optional<std::string>& value,
                                    const VariableSpec& var) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(width(var));
        const Eigen::Index other_slot = static_cast<Eigen::Index>(var.vocabulary.size());
        const Eigen::Index missing_slot = other_slot + (var.include_other_slot ? 1 : 0);
        if (!value) {
            if (var.include_missing_slot) out[missing_slot] = 1.0;
            return out;
        }
        for (const auto& item : split_list(*value)) {
            const auto it = std::find(var.vocabulary.begin(), var.vocabulary.end(), item);
            if (it != var.vocabulary.end())
                out[static_cast<Eigen::Index>(it - var.vocabulary.begin())] = 1.0;
            else if (var.include_other_slot)
                out[other_slot] = 1.0;
        }
        return out;
    }

    static std::optional<int> parse_year(const std::optional<std::string>& value,
                                         const std::string& record_id,
                                         const std::string& var_name) {
        if (!value) return std::nullopt;
        const auto parsed = csv::parse_int(*value);
        if (!parsed)
            throw ValidationError("record '" + record_id + "': variable '" + var_name +
                                  "' expects a year, got '" + *value + "'");
        return static_cast<int>(*parsed);
    }

    /// Numeric cell = the count itself; otherwise the number of ';'-separated items.
    static double encode_count(const std::optional<std::string>& value,
                               const std::string& record_id, const std::string& var_name) {
        if (!value) return 0.0;
        if (const auto parsed = csv::parse_double(*value)) {
            if (*parsed < 0.0)
                throw ValidationError("record '" + record_id + "': variable '" + var_name +
                                      "' expects a non-negative count");
            return std::floor(*parsed);
        }
        return static_cast<double>(split_list(*value).size());
    }

    const Eigen::MatrixXd& projection_for(const VariableSpec& var) const {
        auto it = projections_.find(var.name);
        if (it == projections_.end())
            it = projections_.emplace(var.name, make_projection(*var.projection)).first;
        return it->second;
    }

    void validate() const {
        std::vector<std::string> names;
        for (const auto& v : variables_) {
            if (std::find(names.begin(), names.end(), v.name) != names.end())
                throw ValidationError("duplicate variable name: " + v.name);
            names.push_back(v.name);
            if (v.max_categories && *v.max_categories < 1)
                throw ValidationError("variable '" + v.name + "': max vocabulary size < 1");
            if (v.kind == VariableKind::BowProjected && !v.projection)
                throw ValidationError("variable '" + v.name + "': bow_projected needs a projection");
            auto vocab = v.vocabulary;
            std::sort(vocab.begin(), vocab.end());
            if (std::adjacent_find(vocab.begin(), vocab.end()) != vocab.end())
                throw ValidationError("variable '" + v.name + "': duplicate vocabulary entry");
        }
    }

    void build_feature_names() {
        feature_names_.clear();
        for (const auto& v : variables_) {
            switch (v.kind) {
                case VariableKind::OneHot:
                case VariableKind::MultiHot:
                    for (const auto& cat : v.materialized_vocabulary())
                        feature_names_.push_back(v.name + "=" + cat);
                    break;
                case VariableKind::Presence:
                    feature_names_.push_back(v.name + ":present");
                    break;
                case VariableKind::LogAge:
                    feature_names_.push_back(v.name + ":log_age");
                    feature_names_.push_back(v.name + ":missing");
                    break;
                case VariableKind::RealWithIndicator:
                    feature_names_.push_back(v.name);
                    feature_names_.push_back(v.name + ":missing");
                    break;
                case VariableKind::Count:
                    feature_names_.push_back(v.name + ":count");
                    break;
                case VariableKind::BowProjected:
                    for (int i = 0; i < v.projection->out_dim; ++i)
                        feature_names_.push_back(v.name + ":proj" + std::to_string(i));
                    if (v.include_missing_slot) feature_names_.push_back(v.name + ":missing");
                    break;
            }
        }
        auto sorted = feature_names_;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw ValidationError("schema produces duplicate feature names");
    }

    std::vector<VariableSpec> variables_;
    std::vector<std::string> feature_names_;
    // Projection matrices are pure functions of their spec; cached lazily.
    mutable std::map<std::string, Eigen::MatrixXd> projections_;
};

/// Learns vocabularies for the given specs: categories ranked by frequency
/// (ties broken lexicographically), truncated to max_categories. For
/// bow_projected the projection in_dim becomes the learned vocabulary size
/// and a zero density is replaced by 1/sqrt(in_dim); out_dim is clamped to
/// in_dim on degenerate data.
inline EncodingSchema fit_schema(const std::vector<RawRecord>& records,
                                 std::vector<VariableSpec> specs) {
    if (records.empty()) throw ValidationError("fit_schema: no records");
    for (auto& spec : specs) {
        const bool learns = spec.kind == VariableKind::OneHot ||
                            spec.kind == VariableKind::MultiHot ||
                            spec.kind == VariableKind::BowProjected;
        if (!learns) continue;
        std::map<std::string, std::size_t> freq;
        for (const auto& rec : records) {
            const auto value = rec.get(spec.name);
            if (!value) continue;
            if (spec.kind == VariableKind::OneHot) {
                ++freq[*value];
            } else if (spec.kind == VariableKind::MultiHot) {
                for (const auto& item : split_list(*value)) ++freq[item];
            } else {
                for (const auto& tok : tokenize(*value)) ++freq[tok];
            }
        }
        std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (spec.max_categories && ranked.size() > static_cast<std::size_t>(*spec.max_categories))
            ranked.resize(static_cast<std::size_t>(*spec.max_categories));
        spec.vocabulary.clear();
        for (auto& [token, count] : ranked) spec.vocabulary.push_back(std::move(token));

        if (spec.kind == VariableKind::BowProjected) {
            if (!spec.projection)
                throw ValidationError("variable '" + spec.name + "': bow_projected needs a projection");
            spec.projection->in_dim = static_cast<int>(spec.vocabulary.size());
            if (spec.projection->in_dim == 0)
                throw ValidationError("variable '" + spec.name + "': no tokens to project");
            if (spec.projection->density == 0.0)
                spec.projection->density =
                    1.0 / std::sqrt(static_cast<double>(spec.projection->in_dim));
            spec.projection->out_dim = std::min(spec.projection->out_dim, spec.projection->in_dim);
        }
    }
    return EncodingSchema(std::move(specs));
}

// --- raw record IO ----------------------------------------------------------

/// CSV with a header row naming the variables; an "id" column is required.
/// Empty cells are missing values.
inline std::vector<RawRecord> read_raw_csv(const std::string& path) {
    const auto rows = csv::read_file(path);
    if (rows.empty()) throw ValidationError("raw csv '" + path + "': empty file");
    const auto& header = rows.front();
    const auto id_it = std::find(header.begin(), header.end(), "id");
    if (id_it == header.end())
        throw ValidationError("raw csv '" + path + "': no 'id' column in header");
    const std::size_t id_col = static_cast<std::size_t>(id_it - header.begin());
    std::vector<RawRecord> records;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size())
            throw ValidationError("raw csv '" + path + "' row " + std::to_string(r + 1) +
                                  ": expected " + std::to_string(header.size()) + " cells, got " +
                                  std::to_string(row.size()));
        RawRecord rec;
        rec.id = row[id_col];
        if (rec.id.empty())
            throw ValidationError("raw csv '" + path + "' row " + std::to_string(r + 1) +
                                  ": empty id");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c == id_col || row[c].empty()) continue;
            rec.values[header[c]] = row[c];
        }
        records.push_back(std::move(rec));
    }
    return records;
}

/// JSON-lines: one object per line with an "id" member; null members are
/// missing values, numbers are kept in shortest round-trip form.
inline std::vector<RawRecord> read_raw_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::vector<RawRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("jsonl '" + path + "' line " + std::to_string(lineno) + ": " +
                                  e.what());
        }
        if (!j.is_object() || !j.contains("id"))
            throw ValidationError("jsonl '" + path + "' line " + std::to_string(lineno) +
                                  ": expected an object with an 'id' member");
        RawRecord rec;
        rec.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
        for (const auto& [key, val] : j.items()) {
            if (key == "id" || val.is_null()) continue;
            if (val.is_string()) {
                if (!val.get<std::string>().empty()) rec.values[key] = val.get<std::string>();
            } else if (val.is_number_float()) {
                rec.values[key] = csv::format_double(val.get<double>());
            } else {
                rec.values[key] = val.dump();
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

/// Encoded matrix as CSV: header of feature names, first column the sample id.
inline std::string feature_matrix_to_csv(const FeatureMatrix& m) {
    std::string out = "id";
    for (const auto& name : m.feature_names) out += "," + csv::quote_cell(name);
    out += '\n';
    for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
        out += csv::quote_cell(m.sample_ids[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < m.values.cols(); ++c)
            out += "," + csv::format_double(m.values(r, c));
        out += '\n';
    }
    return out;
}

}  // namespace mdelm
