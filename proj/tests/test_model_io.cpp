#include <catch2/catch.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "wavefis/model_io.hpp"
#include "wavefis/rng.hpp"

using namespace wavefis;

namespace {

ModelState awkward_model(uint64_t seed) {
    Rng rng(seed);
    ModelState model;
    model.config.task = Task::classification;
    model.config.window = 8;
    model.config.horizon = 1;
    model.config.depth = 1;
    model.config.basis = "db2";
    model.config.key_dim = 2;
    model.config.value_dim = 3;
    model.config.rule_count = 2;
    model.config.target_channel = "fraud_label";
    model.config.channel_names = {"a", "b"};
    model.attention = init_attention(4, 2, 3, rng);
    model.rules = FuzzyRuleBase{Matrix(2, 3), Matrix(2, 3), Matrix(2, 3),
                                std::vector<double>(2)};
    // values with no short decimal representation
    for (double& v : model.rules.centers.data()) v = rng.normal() / 3.0;
    for (double& v : model.rules.spreads.data()) v = 0.1 + rng.uniform01() / 7.0;
    for (double& v : model.rules.coeffs.data()) v = rng.normal() * 1e-7;
    model.rules.biases = {1.0 / 3.0, -2.0 / 7.0};
    model.seed = seed;
    model.config_hash = 0xdeadbeefcafef00dULL;
    return model;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("save/load round-trips bit-exactly", "[model_io]") {
    const ModelState model = awkward_model(111);
    const std::string path = temp_path("wavefis_roundtrip.model");
    save_model(model, path);
    const ModelState back = load_model(path);

    CHECK(back.schema_version == model.schema_version);
    CHECK(back.config.task == model.config.task);
    CHECK(back.config.window == model.config.window);
    CHECK(back.config.horizon == model.config.horizon);
    CHECK(back.config.depth == model.config.depth);
    CHECK(back.config.basis == model.config.basis);
    CHECK(back.config.channel_names == model.config.channel_names);
    CHECK(back.config.normalization == model.config.normalization);
    CHECK(back.seed == model.seed);
    CHECK(back.config_hash == model.config_hash);
    // bitwise parameter equality
    CHECK(back.attention.wq == model.attention.wq);
    CHECK(back.attention.wk == model.attention.wk);
    CHECK(back.attention.wv == model.attention.wv);
    CHECK(back.rules.centers == model.rules.centers);
    CHECK(back.rules.spreads == model.rules.spreads);
    CHECK(back.rules.coeffs == model.rules.coeffs);
    CHECK(back.rules.biases == model.rules.biases);
    std::remove(path.c_str());
}

TEST_CASE("schema version mismatches are rejected", "[model_io]") {
    const ModelState model = awkward_model(112);
    const std::string path = temp_path("wavefis_schema.model");
    save_model(model, path);
    // bump the version in place
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    const std::string needle = "\"schema_version\": 1";
    const size_t at = text.find(needle);
    REQUIRE(at != std::string::npos);
    text.replace(at, needle.size(), "\"schema_version\": 2");
    std::ofstream(path, std::ios::binary) << text;

    CHECK_THROWS_MATCHES(load_model(path), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::schema_version_mismatch;
                         }));
    std::remove(path.c_str());
}

TEST_CASE("corrupt files are reported as such", "[model_io]") {
    const ModelState model = awkward_model(113);
    const std::string path = temp_path("wavefis_corrupt.model");
    SECTION("truncated document") {
        save_model(model, path);
        std::ifstream in(path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        in.close();
        std::ofstream(path, std::ios::binary) << text.substr(0, text.size() / 2);
        CHECK_THROWS_MATCHES(load_model(path), Error,
                             Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.code() == Errc::corrupt_file;
                             }));
    }
    SECTION("missing field names the field") {
        save_model(model, path);
        std::ifstream in(path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        in.close();
        const std::string needle = "\"basis\"";
        const size_t at = text.find(needle);
        REQUIRE(at != std::string::npos);
        text.replace(at, needle.size(), "\"basis_x\"");
        std::ofstream(path, std::ios::binary) << text;
        try {
            load_model(path);
            FAIL("expected CorruptFile");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::corrupt_file);
            CHECK(std::string(e.what()).find("basis") != std::string::npos);
        }
    }
    SECTION("not json at all") {
        std::ofstream(path, std::ios::binary) << "definitely not a model";
        CHECK_THROWS_MATCHES(load_model(path), Error,
                             Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.code() == Errc::corrupt_file;
                             }));
    }
    std::remove(path.c_str());
}

TEST_CASE("missing files are load errors", "[model_io]") {
    CHECK_THROWS_MATCHES(load_model(temp_path("wavefis_no_such.model")), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::corrupt_file;
                         }));
}
