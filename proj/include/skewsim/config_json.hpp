#pragma once

/// @file config_json.hpp
/// @brief JSON encoding of SimConfig. Key names are fixed; unknown keys are
/// rejected.
///
/// {
///   "dimension": 2, "resolution_n": 1000, "horizon_t": 1.0, "paths_m": 100,
///   "start": [0.0, 0.0],
///   "field": {"family": "SigmoidAffine", "params": {"c": [0, 0.5], "A": [0.6, 0.5], "w": [1.0]}},
///   "drift": {"family": "Zero"},
///   "seed": 7,
///   "output": {"dir": "out", "emit_paths": false, "emit_summary": true},
///   "collision": {"k1": {...}, "k2": {...}, "zeta1": {...}, "zeta2": {...}, "eta1": {...}, "eta2": {...}}
/// }
///
/// Collision coefficients are scalar families on R^2: "c" and "A" are
/// numbers, "w" has two entries.

#include "skewsim/core.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace skewsim {

using json = nlohmann::ordered_json;

namespace detail {

inline void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (auto a : allowed) known = known || key == a;
        if (!known) throw Error(ErrorCode::UnknownKey, std::string(where) + ": unknown key '" + key + "'");
    }
}

inline const json& require(const json& obj, const char* key, std::string_view where) {
    if (!obj.contains(key)) throw Error(ErrorCode::BadValue, std::string(where) + ": missing key '" + key + "'");
    return obj.at(key);
}

template <typename T>
T get_as(const json& v, std::string_view what) {
    try {
        return v.get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadValue, std::string(what) + ": " + e.what());
    }
}

inline Family parse_family_key(const json& obj, std::string_view where) {
    const auto name = get_as<std::string>(require(obj, "family", where), where);
    const auto f = parse_family(name);
    if (!f) throw Error(ErrorCode::BadValue, std::string(where) + ": unknown family '" + name + "'");
    return *f;
}

struct VectorParams {
    std::vector<double> c, a, w;
};

inline VectorParams parse_vector_params(const json& obj, Family family, std::string_view where) {
    reject_unknown(obj, {"family", "params"}, where);
    VectorParams p;
    if (family == Family::Zero) {
        if (obj.contains("params")) reject_unknown(obj.at("params"), {}, where);
        return p;
    }
    const json& params = require(obj, "params", where);
    if (family == Family::Constant) {
        reject_unknown(params, {"c"}, where);
    } else {
        reject_unknown(params, {"c", "A", "w"}, where);
        p.a = get_as<std::vector<double>>(require(params, "A", where), where);
        p.w = get_as<std::vector<double>>(require(params, "w", where), where);
    }
    p.c = get_as<std::vector<double>>(require(params, "c", where), where);
    return p;
}

template <typename Spec>
Spec parse_vector_spec(const json& obj, std::size_t d, std::string_view where) {
    if (!obj.is_object()) throw Error(ErrorCode::BadValue, std::string(where) + " must be an object");
    const Family family = parse_family_key(obj, where);
    auto p = parse_vector_params(obj, family, where);
    switch (family) {
        case Family::Zero: return Spec::zero(d);
        case Family::Constant: return Spec::constant(std::move(p.c));
        case Family::SigmoidAffine: return Spec::sigmoid_affine(std::move(p.c), std::move(p.a), std::move(p.w));
    }
    return Spec::zero(d);
}

inline ScalarSpec parse_scalar_spec(const json& obj, std::string_view where) {
    if (!obj.is_object()) throw Error(ErrorCode::BadValue, std::string(where) + " must be an object");
    reject_unknown(obj, {"family", "params"}, where);
    const Family family = parse_family_key(obj, where);
    if (family == Family::Zero) return ScalarSpec::zero();
    const json& params = require(obj, "params", where);
    if (family == Family::Constant) {
        reject_unknown(params, {"c"}, where);
        return ScalarSpec::constant(get_as<double>(require(params, "c", where), where));
    }
    reject_unknown(params, {"c", "A", "w"}, where);
    return ScalarSpec::sigmoid_affine(get_as<double>(require(params, "c", where), where),
                                      get_as<double>(require(params, "A", where), where),
                                      get_as<std::vector<double>>(require(params, "w", where), where));
}

template <typename Spec>
json vector_spec_to_json(const Spec& s) {
    json j;
    j["family"] = std::string(to_string(s.family()));
    if (s.family() == Family::Constant) j["params"] = {{"c", s.offset()}};
    if (s.family() == Family::SigmoidAffine)
        j["params"] = {{"c", s.offset()}, {"A", s.amplitude()}, {"w", s.frequency()}};
    return j;
}

inline json scalar_spec_to_json(const ScalarSpec& s) {
    json j;
    j["family"] = std::string(to_string(s.family()));
    if (s.family() == Family::Constant) j["params"] = {{"c", s.offset()}};
    if (s.family() == Family::SigmoidAffine)
        j["params"] = {{"c", s.offset()}, {"A", s.amplitude()}, {"w", s.frequency()}};
    return j;
}

}  // namespace detail

/// Parses a config object. Structural problems (unknown keys, wrong types,
/// missing required keys) throw; value constraints are left to
/// validate_config. A missing seed is allowed here and reported there.
inline SimConfig parse_config(const json& j) {
    using namespace detail;
    if (!j.is_object()) throw Error(ErrorCode::BadValue, "config must be a JSON object");
    reject_unknown(j,
                   {"dimension", "resolution_n", "horizon_t", "paths_m", "start", "field", "drift", "seed", "output",
                    "collision"},
                   "config");
    SimConfig cfg;
    cfg.dimension = get_as<long long>(require(j, "dimension", "config"), "dimension");
    cfg.resolution_n = get_as<long long>(require(j, "resolution_n", "config"), "resolution_n");
    cfg.horizon_t = get_as<double>(require(j, "horizon_t", "config"), "horizon_t");
    cfg.paths_m = get_as<long long>(require(j, "paths_m", "config"), "paths_m");
    cfg.start = get_as<std::vector<double>>(require(j, "start", "config"), "start");
    const auto d = static_cast<std::size_t>(cfg.dimension < 1 ? 1 : cfg.dimension);
    cfg.field = parse_vector_spec<FieldSpec>(require(j, "field", "config"), d, "field");
    cfg.drift = j.contains("drift") ? parse_vector_spec<DriftSpec>(j.at("drift"), d, "drift") : DriftSpec::zero(d);
    if (j.contains("seed")) {
        const auto& s = j.at("seed");
        if (!s.is_number_integer()) throw Error(ErrorCode::BadValue, "seed must be an integer");
        cfg.seed = s.is_number_unsigned() ? s.get<std::uint64_t>() : static_cast<std::uint64_t>(s.get<std::int64_t>());
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        reject_unknown(o, {"dir", "emit_paths", "emit_summary"}, "output");
        if (o.contains("dir")) cfg.output.dir = get_as<std::string>(o.at("dir"), "output.dir");
        if (o.contains("emit_paths")) cfg.output.emit_paths = get_as<bool>(o.at("emit_paths"), "output.emit_paths");
        if (o.contains("emit_summary"))
            cfg.output.emit_summary = get_as<bool>(o.at("emit_summary"), "output.emit_summary");
    }
    if (j.contains("collision")) {
        const auto& c = j.at("collision");
        reject_unknown(c, {"k1", "k2", "zeta1", "zeta2", "eta1", "eta2"}, "collision");
        CollisionSpec spec;
        if (c.contains("k1")) spec.k1 = parse_scalar_spec(c.at("k1"), "collision.k1");
        if (c.contains("k2")) spec.k2 = parse_scalar_spec(c.at("k2"), "collision.k2");
        if (c.contains("zeta1")) spec.zeta1 = parse_scalar_spec(c.at("zeta1"), "collision.zeta1");
        if (c.contains("zeta2")) spec.zeta2 = parse_scalar_spec(c.at("zeta2"), "collision.zeta2");
        if (c.contains("eta1")) spec.eta1 = parse_scalar_spec(c.at("eta1"), "collision.eta1");
        if (c.contains("eta2")) spec.eta2 = parse_scalar_spec(c.at("eta2"), "collision.eta2");
        cfg.collision = spec;
    }
    return cfg;
}

inline SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::BadValue, std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline json to_json(const SimConfig& cfg) {
    using namespace detail;
    json j;
    j["dimension"] = cfg.dimension;
    j["resolution_n"] = cfg.resolution_n;
    j["horizon_t"] = cfg.horizon_t;
    j["paths_m"] = cfg.paths_m;
    j["start"] = cfg.start;
    j["field"] = vector_spec_to_json(cfg.field);
    j["drift"] = vector_spec_to_json(cfg.drift);
    if (cfg.seed) j["seed"] = *cfg.seed;
    j["output"] = {{"dir", cfg.output.dir},
                   {"emit_paths", cfg.output.emit_paths},
                   {"emit_summary", cfg.output.emit_summary}};
    if (cfg.collision) {
        const auto& c = *cfg.collision;
        j["collision"] = {{"k1", scalar_spec_to_json(c.k1)},       {"k2", scalar_spec_to_json(c.k2)},
                          {"zeta1", scalar_spec_to_json(c.zeta1)}, {"zeta2", scalar_spec_to_json(c.zeta2)},
                          {"eta1", scalar_spec_to_json(c.eta1)},   {"eta2", scalar_spec_to_json(c.eta2)}};
    }
    return j;
}

}  // namespace skewsim
