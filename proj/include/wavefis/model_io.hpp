#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "wavefis/errors.hpp"
#include "wavefis/model.hpp"

namespace wavefis {

namespace detail {

using json = nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        fail(Errc::corrupt_file, "field '" + field + "' is not a matrix");
    Matrix m(static_cast<int>(j.size()), static_cast<int>(j.front().size()));
    for (int r = 0; r < m.rows(); ++r) {
        const json& row = j.at(r);
        if (!row.is_array() || static_cast<int>(row.size()) != m.cols())
            fail(Errc::corrupt_file, "ragged matrix in field '" + field + "'");
        for (int c = 0; c < m.cols(); ++c) {
            if (!row.at(c).is_number())
                fail(Errc::corrupt_file, "non-numeric entry in field '" + field + "'");
            m(r, c) = row.at(c).get<double>();
        }
    }
    if (!m.all_finite()) fail(Errc::corrupt_file, "non-finite entry in field '" + field + "'");
    return m;
}

template <class T>
inline T require(const json& j, const std::string& field) {
    if (!j.contains(field)) fail(Errc::corrupt_file, "missing field '" + field + "'");
    try {
        return j.at(field).get<T>();
    } catch (const json::exception&) {
        fail(Errc::corrupt_file, "field '" + field + "' has the wrong type");
    }
}

}  // namespace detail

/// Versioned structured-text model document. Numeric parameters are written
/// with shortest-round-trip precision, so load(save(m)) is bit-exact.
inline void save_model(const ModelState& model, const std::string& path) {
    using detail::json;
    model.check_consistent();
    json doc;
    doc["schema_version"] = model.schema_version;
    doc["task"] = task_name(model.config.task);
    doc["window"] = model.config.window;
    doc["horizon"] = model.config.horizon;
    doc["depth"] = model.config.depth;
    doc["basis"] = model.config.basis;
    doc["key_dim"] = model.config.key_dim;
    doc["value_dim"] = model.config.value_dim;
    doc["rule_count"] = model.config.rule_count;
    doc["target_channel"] = model.config.target_channel;
    doc["channel_names"] = model.config.channel_names;
    doc["normalization"] = model.config.normalization;
    doc["seed"] = model.seed;
    doc["config_hash"] = model.config_hash;
    doc["attention"] = {{"wq", detail::matrix_to_json(model.attention.wq)},
                        {"wk", detail::matrix_to_json(model.attention.wk)},
                        {"wv", detail::matrix_to_json(model.attention.wv)}};
    doc["rules"] = {{"centers", detail::matrix_to_json(model.rules.centers)},
                    {"spreads", detail::matrix_to_json(model.rules.spreads)},
                    {"coeffs", detail::matrix_to_json(model.rules.coeffs)},
                    {"biases", model.rules.biases}};
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::invalid_config, "cannot open '" + path + "' for writing");
    out << doc.dump(1) << '\n';
}

inline ModelState load_model(const std::string& path) {
    using detail::json;
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::corrupt_file, "cannot open '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        fail(Errc::corrupt_file, std::string("not a valid model document: ") + e.what());
    }
    if (!doc.contains("schema_version"))
        fail(Errc::corrupt_file, "missing field 'schema_version'");
    const int version = detail::require<int>(doc, "schema_version");
    if (version != kModelSchemaVersion)
        fail(Errc::schema_version_mismatch,
             "file has schema version " + std::to_string(version) + ", expected " +
                 std::to_string(kModelSchemaVersion));

    ModelState model;
    model.schema_version = version;
    model.config.task = parse_task(detail::require<std::string>(doc, "task"));
    model.config.window = detail::require<int>(doc, "window");
    model.config.horizon = detail::require<int>(doc, "horizon");
    model.config.depth = detail::require<int>(doc, "depth");
    model.config.basis = detail::require<std::string>(doc, "basis");
    model.config.key_dim = detail::require<int>(doc, "key_dim");
    model.config.value_dim = detail::require<int>(doc, "value_dim");
    model.config.rule_count = detail::require<int>(doc, "rule_count");
    model.config.target_channel = detail::require<std::string>(doc, "target_channel");
    model.config.channel_names = detail::require<std::vector<std::string>>(doc, "channel_names");
    model.config.normalization = detail::require<std::string>(doc, "normalization");
    model.seed = detail::require<uint64_t>(doc, "seed");
    model.config_hash = detail::require<uint64_t>(doc, "config_hash");

    if (!doc.contains("attention") || !doc.contains("rules"))
        fail(Errc::corrupt_file, "missing parameter block");
    const json& att = doc.at("attention");
    const json& rules = doc.at("rules");
    auto block = [](const json& j, const char* field) -> const json& {
        if (!j.contains(field)) fail(Errc::corrupt_file, std::string("missing field '") + field + "'");
        return j.at(field);
    };
    model.attention.wq = detail::matrix_from_json(block(att, "wq"), "attention.wq");
    model.attention.wk = detail::matrix_from_json(block(att, "wk"), "attention.wk");
    model.attention.wv = detail::matrix_from_json(block(att, "wv"), "attention.wv");
    model.rules.centers = detail::matrix_from_json(block(rules, "centers"), "rules.centers");
    model.rules.spreads = detail::matrix_from_json(block(rules, "spreads"), "rules.spreads");
    model.rules.coeffs = detail::matrix_from_json(block(rules, "coeffs"), "rules.coeffs");
    try {
        model.rules.biases = block(rules, "biases").get<std::vector<double>>();
    } catch (const json::exception&) {
        fail(Errc::corrupt_file, "field 'rules.biases' has the wrong type");
    }

    try {
        model.check_consistent();
        wavelet_basis(model.config.basis);
    } catch (const Error& e) {
        fail(Errc::corrupt_file, std::string("inconsistent model: ") + e.what());
    }
    return model;
}

}  // namespace wavefis
