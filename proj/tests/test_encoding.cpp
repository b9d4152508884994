#include <catch2/catch_amalgamated.hpp>

#include <mdelm/encoding.hpp>
#include <mdelm/rng.hpp>

#include <cmath>
#include <filesystem>
#include <optional>

using namespace mdelm;

namespace {
RawRecord record(std::string id, std::map<std::string, std::string> values) {
    RawRecord r;
    r.id = std::move(id);
    r.values = std::move(values);
    return r;
}
}  // namespace

TEST_CASE("tokenize lowercases, splits and drops single characters") {
    const auto tokens = tokenize("The Journal of X-ray Science, 2nd ed.");
    REQUIRE(tokens == std::vector<std::string>{"the", "journal", "of", "ray", "science", "2nd",
                                               "ed"});
    REQUIRE(tokenize("a b c").empty());
}

TEST_CASE("encode_onehot basics") {
    const std::vector<std::string> vocab{"journal", "conference", "book series"};
    SECTION("known value") {
        const auto v = encode_onehot(std::optional<std::string>{"journal"}, vocab, false);
        REQUIRE(v.size() == 3);
        REQUIRE(v[0] == 1.0);
        REQUIRE(v.sum() == 1.0);
    }
    SECTION("missing with missing slot appended last") {
        const auto v = encode_onehot(std::nullopt, vocab, true);
        REQUIRE(v.size() == 4);
        REQUIRE(v[3] == 1.0);
        REQUIRE(v.sum() == 1.0);
    }
    SECTION("single-category identity") {
        const auto v = encode_onehot(std::optional<std::string>{"journal"},
                                     std::vector<std::string>{"journal"}, false);
        REQUIRE(v.size() == 1);
        REQUIRE(v[0] == 1.0);
    }
    SECTION("unknown value routes to other slot") {
        const auto v = encode_onehot(std::optional<std::string>{"weird"}, vocab, true, true);
        REQUIRE(v.size() == 5);
        REQUIRE(v[3] == 1.0);  // <other> sits before <missing>
    }
    SECTION("unknown value with no slot at all is all-zero") {
        const auto v = encode_onehot(std::optional<std::string>{"weird"}, vocab, false, false);
        REQUIRE(v.sum() == 0.0);
    }
}

TEST_CASE("encode_presence") {
    REQUIRE(encode_presence(std::optional<std::string>{"0028-0836"}) == 1.0);
    REQUIRE(encode_presence(std::nullopt) == 0.0);
    // empty strings never reach the encoder: RawRecord::get treats them as missing
    REQUIRE(record("r", {{"issn", ""}}).get("issn") == std::nullopt);
}

TEST_CASE("encode_log_age") {
    const auto [age1, flag1] = encode_log_age(2014, 2015);
    REQUIRE(age1 == Catch::Approx(std::log(2.0)).margin(1e-12));
    REQUIRE(flag1 == 0.0);
    const auto [age2, flag2] = encode_log_age(2015, 2015);
    REQUIRE(age2 == 0.0);
    REQUIRE(flag2 == 0.0);
    const auto [age3, flag3] = encode_log_age(std::nullopt, 2015);
    REQUIRE(age3 == 0.0);
    REQUIRE(flag3 == 1.0);
    REQUIRE_THROWS_AS(encode_log_age(2016, 2015), ValidationError);
}

TEST_CASE("encode_bow counts in-vocabulary tokens") {
    const std::vector<std::string> vocab{"journal", "applied"};
    const auto counts =
        encode_bow(std::optional<std::string>{"Journal of Applied Journal Studies"}, vocab);
    REQUIRE(counts[0] == 2.0);
    REQUIRE(counts[1] == 1.0);
    REQUIRE(encode_bow(std::nullopt, vocab).sum() == 0.0);
    REQUIRE(encode_bow(std::optional<std::string>{"unrelated words"}, vocab).sum() == 0.0);
}

TEST_CASE("sparse projection is deterministic and norm-preserving on average") {
    ProjectionSpec spec;
    spec.in_dim = 3700;
    spec.out_dim = 30;
    spec.density = 1.0 / std::sqrt(3700.0);
    spec.seed = 11;
    const auto p = make_projection(spec);
    REQUIRE(p.rows() == 30);
    REQUIRE(p.cols() == 3700);
    REQUIRE((p - make_projection(spec)).cwiseAbs().maxCoeff() == 0.0);

    SECTION("entries come from {-s, 0, +s}") {
        const double s = 1.0 / std::sqrt(spec.density * 30.0);
        for (int r = 0; r < p.rows(); ++r)
            for (int c = 0; c < 200; ++c) {
                const double v = p(r, c);
                REQUIRE((v == 0.0 || v == s || v == -s));
            }
    }
    SECTION("zero vector maps to zero") {
        REQUIRE(project(Eigen::VectorXd::Zero(3700), p).norm() == 0.0);
    }
    SECTION("mean squared-norm ratio over 100 random unit vectors is near 1") {
        Rng rng(5);
        double ratio_sum = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::VectorXd v(3700);
            for (int i = 0; i < 3700; ++i) v[i] = rng.normal();
            v /= v.norm();
            ratio_sum += project(v, p).squaredNorm();
        }
        const double mean_ratio = ratio_sum / 100.0;
        REQUIRE(mean_ratio > 0.7);
        REQUIRE(mean_ratio < 1.3);
    }
    SECTION("dimension mismatch") {
        REQUIRE_THROWS_AS(project(Eigen::VectorXd::Zero(10), p), ValidationError);
    }
}

TEST_CASE("make_projection validates its spec") {
    REQUIRE_THROWS_AS(make_projection(ProjectionSpec{10, 20, 0.5, 0}), ValidationError);
    REQUIRE_THROWS_AS(make_projection(ProjectionSpec{10, 5, 0.0, 0}), ValidationError);
    REQUIRE_THROWS_AS(make_projection(ProjectionSpec{0, 0, 0.5, 0}), ValidationError);
}

TEST_CASE("fit_schema learns frequency-ranked vocabularies") {
    SECTION("top categories plus other slot") {
        std::vector<RawRecord> records;
        for (int i = 0; i < 5; ++i) records.push_back(record("a" + std::to_string(i), {{"publisher", "Springer"}}));
        for (int i = 0; i < 3; ++i) records.push_back(record("b" + std::to_string(i), {{"publisher", "Elsevier"}}));
        records.push_back(record("c0", {{"publisher", "Tiny Press"}}));
        VariableSpec spec;
        spec.name = "publisher";
        spec.kind = VariableKind::OneHot;
        spec.max_categories = 2;
        spec.include_other_slot = true;
        const auto schema = fit_schema(records, {spec});
        const auto& v = schema.variables()[0];
        REQUIRE(v.vocabulary == std::vector<std::string>{"Springer", "Elsevier"});
        REQUIRE(v.materialized_vocabulary() ==
                std::vector<std::string>{"Springer", "Elsevier", "<other>"});
    }
    SECTION("column that is always missing keeps only the missing slot") {
        std::vector<RawRecord> records{record("r1", {}), record("r2", {})};
        VariableSpec spec;
        spec.name = "erih";
        spec.kind = VariableKind::OneHot;
        spec.include_missing_slot = true;
        const auto schema = fit_schema(records, {spec});
        REQUIRE(schema.variables()[0].materialized_vocabulary() ==
                std::vector<std::string>{"<missing>"});
    }
    SECTION("frequency ties break lexicographically") {
        std::vector<RawRecord> records{record("r1", {{"type", "journal"}}),
                                       record("r2", {{"type", "conference"}})};
        VariableSpec spec;
        spec.name = "type";
        spec.kind = VariableKind::OneHot;
        const auto schema = fit_schema(records, {spec});
        REQUIRE(schema.variables()[0].vocabulary ==
                std::vector<std::string>{"conference", "journal"});
    }
    SECTION("duplicate variable names rejected") {
        VariableSpec spec;
        spec.name = "x";
        spec.kind = VariableKind::Presence;
        REQUIRE_THROWS_AS(fit_schema({record("r", {})}, {spec, spec}), ValidationError);
    }
    SECTION("max vocabulary size below 1 rejected") {
        VariableSpec spec;
        spec.name = "x";
        spec.kind = VariableKind::OneHot;
        spec.max_categories = 0;
        REQUIRE_THROWS_AS(fit_schema({record("r", {{"x", "a"}})}, {spec}), ValidationError);
    }
}

namespace {
std::vector<VariableSpec> demo_specs() {
    VariableSpec title;
    title.name = "title";
    title.kind = VariableKind::BowProjected;
    title.projection = ProjectionSpec{0, 4, 0.0, 21};
    title.include_missing_slot = true;

    VariableSpec type;
    type.name = "type";
    type.kind = VariableKind::OneHot;

    VariableSpec issn;
    issn.name = "issn";
    issn.kind = VariableKind::Presence;

    VariableSpec start;
    start.name = "start_year";
    start.kind = VariableKind::LogAge;
    start.reference_year = 2015;

    VariableSpec sjr;
    sjr.name = "sjr";
    sjr.kind = VariableKind::RealWithIndicator;

    VariableSpec fields;
    fields.name = "fields";
    fields.kind = VariableKind::MultiHot;

    VariableSpec isbn;
    isbn.name = "isbn";
    isbn.kind = VariableKind::Count;

    return {title, type, issn, start, sjr, fields, isbn};
}

std::vector<RawRecord> demo_records() {
    return {
        record("ch1", {{"title", "Journal of Neural Networks and Learning Machines"},
                       {"type", "journal"},
                       {"issn", "1111-2222"},
                       {"start_year", "1990"},
                       {"sjr", "2.5"},
                       {"fields", "cs; math"},
                       {"isbn", "3"}}),
        record("ch2", {{"title", "Conference on Random Projections"},
                       {"type", "conference"},
                       {"start_year", "2010"},
                       {"fields", "cs"}}),
        record("ch3", {{"type", "journal"}, {"sjr", "0.7"}, {"isbn", "i1; i2"}}),
    };
}
}  // namespace

TEST_CASE("encode_dataset composes the per-variable encoders") {
    const auto schema = fit_schema(demo_records(), demo_specs());
    const auto matrix = schema.encode_dataset(demo_records());
    REQUIRE(matrix.values.rows() == 3);
    REQUIRE(matrix.values.cols() == schema.dim());
    REQUIRE(matrix.feature_names.size() == static_cast<std::size_t>(schema.dim()));
    REQUIRE(matrix.values.allFinite());

    SECTION("deterministic re-encode is bit-identical") {
        const auto again = schema.encode_dataset(demo_records());
        REQUIRE((matrix.values - again.values).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("empty record list gives a 0 x D matrix") {
        const auto empty = schema.encode_dataset({});
        REQUIRE(empty.values.rows() == 0);
        REQUIRE(empty.values.cols() == schema.dim());
    }
    SECTION("an all-missing record activates missing slots and indicator flags") {
        const auto row = schema.encode_record(record("ghost", {}));
        auto at = [&](const std::string& name) {
            const auto& names = schema.feature_names();
            const auto it = std::find(names.begin(), names.end(), name);
            REQUIRE(it != names.end());
            return row[it - names.begin()];
        };
        REQUIRE(at("title:missing") == 1.0);
        REQUIRE(at("issn:present") == 0.0);
        REQUIRE(at("start_year:missing") == 1.0);
        REQUIRE(at("start_year:log_age") == 0.0);
        REQUIRE(at("sjr:missing") == 1.0);
        REQUIRE(at("sjr") == 0.0);
        REQUIRE(at("isbn:count") == 0.0);
    }
    SECTION("type contradiction is reported with the record id") {
        const auto bad = record("bad1", {{"sjr", "not-a-number"}});
        REQUIRE_THROWS_WITH(schema.encode_record(bad),
                            Catch::Matchers::ContainsSubstring("bad1") &&
                                Catch::Matchers::ContainsSubstring("sjr"));
    }
    SECTION("count column accepts numbers and lists") {
        const auto& names = schema.feature_names();
        const auto isbn_col =
            std::find(names.begin(), names.end(), "isbn:count") - names.begin();
        REQUIRE(matrix.values(0, isbn_col) == 3.0);
        REQUIRE(matrix.values(2, isbn_col) == 2.0);
    }
}

TEST_CASE("one-hot rows with a missing slot sum to exactly one") {
    VariableSpec type;
    type.name = "type";
    type.kind = VariableKind::OneHot;
    type.include_missing_slot = true;
    type.include_other_slot = true;
    const auto records = demo_records();
    const auto schema = fit_schema(records, {type});
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        RawRecord r;
        r.id = "t" + std::to_string(trial);
        switch (rng.uniform_int(3)) {
            case 0: break;
            case 1: r.values["type"] = "journal"; break;
            default: r.values["type"] = "something-" + std::to_string(trial); break;
        }
        REQUIRE(schema.encode_record(r).sum() == 1.0);
    }
}

TEST_CASE("real variables with missingness carry exactly one indicator column") {
    const auto schema = fit_schema(demo_records(), demo_specs());
    const auto& names = schema.feature_names();
    REQUIRE(std::count(names.begin(), names.end(), "sjr:missing") == 1);
    REQUIRE(std::count(names.begin(), names.end(), "start_year:missing") == 1);
}

TEST_CASE("schema JSON round-trips exactly") {
    const auto schema = fit_schema(demo_records(), demo_specs());
    const auto restored = EncodingSchema::from_json(schema.to_json());
    REQUIRE(restored.to_json().dump() == schema.to_json().dump());
    REQUIRE(restored.hash() == schema.hash());
    const auto a = schema.encode_dataset(demo_records());
    const auto b = restored.encode_dataset(demo_records());
    REQUIRE((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("raw record io") {
    SECTION("csv requires an id column") {
        const auto path = std::filesystem::temp_directory_path() / "mdelm_enc_noid.csv";
        csv::write_file(path.string(), "name,type\nx,journal\n");
        REQUIRE_THROWS_AS(read_raw_csv(path.string()), ValidationError);
    }
    SECTION("csv reads quoted cells and missing values") {
        const auto path = std::filesystem::temp_directory_path() / "mdelm_enc_ok.csv";
        csv::write_file(path.string(), "id,title,type\nr1,\"One, two\",journal\nr2,,conference\n");
        const auto records = read_raw_csv(path.string());
        REQUIRE(records.size() == 2);
        REQUIRE(records[0].get("title") == std::optional<std::string>{"One, two"});
        REQUIRE(records[1].get("title") == std::nullopt);
    }
    SECTION("jsonl") {
        const auto path = std::filesystem::temp_directory_path() / "mdelm_enc.jsonl";
        csv::write_file(path.string(),
                        "{\"id\":\"r1\",\"title\":\"Alpha\",\"sjr\":2.5}\n"
                        "{\"id\":\"r2\",\"title\":null}\n");
        const auto records = read_raw_jsonl(path.string());
        REQUIRE(records.size() == 2);
        REQUIRE(records[0].get("sjr") == std::optional<std::string>{"2.5"});
        REQUIRE(records[1].get("title") == std::nullopt);
    }
}
