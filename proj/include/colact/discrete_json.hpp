#pragma once

#include "colact/common.hpp"
#include "colact/discrete.hpp"

#include <json.hpp>

#include <charconv>
#include <string>

namespace colact {

/// Masses travel as decimal strings so the double backend round-trips
/// bit-exactly; the exact backend uses "num/den" form.
inline std::string mass_to_string(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string mass_to_string(const Rational& v) {
    return std::to_string(v.numerator()) + "/" + std::to_string(v.denominator());
}

inline void mass_from_string(const std::string& s, double& out) {
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw DomainError("bad mass literal: " + s);
}

inline void mass_from_string(const std::string& s, Rational& out) {
    auto slash = s.find('/');
    if (slash == std::string::npos) {
        out = Rational(std::stoll(s));
    } else {
        out = Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    }
}

template <class R>
nlohmann::json to_json(const DiscreteJoint<R>& d) {
    nlohmann::json j;
    j["features"] = d.features;
    j["labels"] = d.labels;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t f = 0; f < d.feature_count(); ++f) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t l = 0; l < d.label_count(); ++l)
            row.push_back(mass_to_string(d.at(f, l)));
        rows.push_back(std::move(row));
    }
    j["mass"] = std::move(rows);
    return j;
}

template <class R>
DiscreteJoint<R> joint_from_json(const nlohmann::json& j) {
    DiscreteJoint<R> d;
    d.features = j.at("features").get<std::vector<std::string>>();
    d.labels = j.at("labels").get<std::vector<std::string>>();
    const auto& rows = j.at("mass");
    if (rows.size() != d.features.size())
        throw DomainError("mass row count does not match feature count");
    d.mass.resize(d.features.size() * d.labels.size());
    for (std::size_t f = 0; f < d.features.size(); ++f) {
        if (rows[f].size() != d.labels.size())
            throw DomainError("mass row width does not match label count");
        for (std::size_t l = 0; l < d.labels.size(); ++l)
            mass_from_string(rows[f][l].get<std::string>(), d.at(f, l));
    }
    d.validate();
    return d;
}

}  // namespace colact
