#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "povmkit/matrix.hpp"
#include "povmkit/observable.hpp"

namespace povm {

/// Observable file schema: complex entries are explicit [re, im] pairs, one
/// dim x dim array of pairs per effect, row-major.
///
/// {
///   "dim": 2,
///   "outcomes": ["up", "down"],
///   "effects": [ [[[1,0],[0,0]],[[0,0],[0,0]]], ... ]
/// }
inline nlohmann::json observable_to_json(const DiscreteObservable& obs) {
    nlohmann::json j;
    j["dim"] = obs.space_dim;
    j["outcomes"] = obs.outcomes;
    nlohmann::json effects = nlohmann::json::array();
    for (const Matrix& e : obs.effects) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < e.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t k = 0; k < e.cols(); ++k)
                row.push_back({e(i, k).real(), e(i, k).imag()});
            rows.push_back(std::move(row));
        }
        effects.push_back(std::move(rows));
    }
    j["effects"] = std::move(effects);
    return j;
}

inline DiscreteObservable observable_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("outcomes") ||
        !j.contains("effects"))
        throw ParseError("observable file needs the keys dim, outcomes, effects");
    DiscreteObservable obs;
    if (!j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() == 0)
        throw ParseError("dim must be a positive integer");
    obs.space_dim = j["dim"].get<std::size_t>();
    if (!j["outcomes"].is_array() || !j["effects"].is_array())
        throw ParseError("outcomes and effects must be arrays");
    for (const auto& label : j["outcomes"]) {
        if (!label.is_string()) throw ParseError("outcome labels must be strings");
        obs.outcomes.push_back(label.get<std::string>());
    }
    for (const auto& rows : j["effects"]) {
        if (!rows.is_array() || rows.size() != obs.space_dim)
            throw ParseError("each effect must have dim rows");
        Matrix e(obs.space_dim, obs.space_dim);
        for (std::size_t i = 0; i < obs.space_dim; ++i) {
            const auto& row = rows[i];
            if (!row.is_array() || row.size() != obs.space_dim)
                throw ParseError("each effect row must have dim entries");
            for (std::size_t k = 0; k < obs.space_dim; ++k) {
                const auto& pair = row[k];
                if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
                    !pair[1].is_number())
                    throw ParseError("matrix entries must be [re, im] pairs");
                e(i, k) = Complex(pair[0].get<double>(), pair[1].get<double>());
            }
        }
        obs.effects.push_back(std::move(e));
    }
    if (obs.outcomes.size() != obs.effects.size())
        throw ParseError("outcome and effect counts differ");
    return obs;
}

inline DiscreteObservable read_observable_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("cannot parse '" + path + "': " + ex.what());
    }
    return observable_from_json(j);
}

inline void write_observable_file(const std::string& path, const DiscreteObservable& obs) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << observable_to_json(obs).dump(2) << "\n";
}

} // namespace povm
