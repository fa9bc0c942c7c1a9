#pragma once

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "numbers.hpp"

namespace patharea {

/// Weighted finite step alphabet. Immutable once constructed; the only way
/// to obtain one is through `StepSet::from_weights` or `parse_step_set`,
/// both of which enforce c, d >= 1 and strictly positive weights.
class StepSet {
public:
    static StepSet from_weights(std::map<int, Rational> weights) {
        if (weights.empty())
            fail(ErrorCategory::validation, "steps.MalformedSpec", "empty step set");
        for (auto& [step, w] : weights) {
            w.canonicalize();
            if (w == 0)
                fail(ErrorCategory::validation, "steps.ZeroWeight",
                     "step " + std::to_string(step) + " has weight 0");
            if (w < 0)
                fail(ErrorCategory::validation, "steps.MalformedSpec",
                     "step " + std::to_string(step) + " has a negative weight");
        }
        if (weights.begin()->first >= 0)
            fail(ErrorCategory::validation, "steps.NoNegativeStep", "step set has no negative step");
        if (weights.rbegin()->first <= 0)
            fail(ErrorCategory::validation, "steps.NoPositiveStep", "step set has no positive step");
        return StepSet(std::move(weights));
    }

    const std::map<int, Rational>& weights() const noexcept { return weights_; }
    int c() const noexcept { return -weights_.begin()->first; }
    int d() const noexcept { return weights_.rbegin()->first; }
    std::size_t size() const noexcept { return weights_.size(); }

    /// Weight of `step`, zero if absent.
    Rational weight(int step) const {
        auto it = weights_.find(step);
        return it == weights_.end() ? Rational(0) : it->second;
    }

    bool integer_weights() const {
        for (const auto& [step, w] : weights_)
            if (!is_integral(w)) return false;
        return true;
    }

    /// Canonical compact form, e.g. "-1:1,0:1,1:1".
    std::string to_compact() const {
        std::string out;
        for (const auto& [step, w] : weights_) {
            if (!out.empty()) out += ',';
            out += std::to_string(step) + ':' + to_string(w);
        }
        return out;
    }

    bool symmetric() const {
        for (const auto& [step, w] : weights_)
            if (weight(-step) != w) return false;
        return true;
    }

    friend bool operator==(const StepSet& a, const StepSet& b) { return a.weights_ == b.weights_; }

private:
    explicit StepSet(std::map<int, Rational> weights) : weights_(std::move(weights)) {}
    std::map<int, Rational> weights_;
};

enum class StepFormat { compact, json };

namespace detail {

inline int parse_step_value(std::string_view text) {
    std::string s(text);
    if (s.empty())
        fail(ErrorCategory::validation, "steps.MalformedSpec", "empty step value");
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || v < -100000 || v > 100000)
        fail(ErrorCategory::validation, "steps.MalformedSpec", "bad step value '" + s + "'");
    return static_cast<int>(v);
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline Rational parse_weight(std::string_view text) {
    try {
        return parse_rational(text);
    } catch (const Error&) {
        fail(ErrorCategory::validation, "steps.MalformedSpec", "bad weight '" + std::string(text) + "'");
    }
}

inline void insert_step(std::map<int, Rational>& weights, int step, Rational w) {
    if (!weights.emplace(step, std::move(w)).second)
        fail(ErrorCategory::validation, "steps.MalformedSpec",
             "step " + std::to_string(step) + " listed twice");
}

}  // namespace detail

/// Parses "step:weight,step:weight" (compact) or a JSON object mapping
/// step strings to weights ("p/q" strings or integers).
inline StepSet parse_step_set(std::string_view spec, StepFormat format = StepFormat::compact) {
    spec = detail::trim(spec);
    if (spec.empty()) fail(ErrorCategory::validation, "steps.MalformedSpec", "empty step specification");
    std::map<int, Rational> weights;
    if (format == StepFormat::compact) {
        std::size_t pos = 0;
        while (pos <= spec.size()) {
            auto comma = spec.find(',', pos);
            if (comma == std::string_view::npos) comma = spec.size();
            const auto item = detail::trim(spec.substr(pos, comma - pos));
            const auto colon = item.find(':');
            if (colon == std::string_view::npos)
                fail(ErrorCategory::validation, "steps.MalformedSpec",
                     "expected step:weight, got '" + std::string(item) + "'");
            detail::insert_step(weights, detail::parse_step_value(detail::trim(item.substr(0, colon))),
                                detail::parse_weight(detail::trim(item.substr(colon + 1))));
            pos = comma + 1;
        }
    } else {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(spec);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCategory::validation, "steps.MalformedSpec", std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object())
            fail(ErrorCategory::validation, "steps.MalformedSpec", "JSON step set must be an object");
        for (const auto& [key, value] : j.items()) {
            Rational w;
            if (value.is_number_integer())
                w = Rational(Integer(std::to_string(value.get<long long>())));
            else if (value.is_string())
                w = detail::parse_weight(value.get<std::string>());
            else
                fail(ErrorCategory::validation, "steps.MalformedSpec",
                     "weight for step " + key + " must be an integer or \"p/q\" string");
            detail::insert_step(weights, detail::parse_step_value(key), std::move(w));
        }
    }
    return StepSet::from_weights(std::move(weights));
}

inline nlohmann::json to_json(const StepSet& s) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [step, w] : s.weights()) j[std::to_string(step)] = to_string(w);
    return j;
}

struct StepCharacteristics {
    Rational drift;         // S'(1)/S(1)
    Rational variance;      // [S''(1)+S'(1)]/S(1) - drift^2
    int period = 1;         // gcd of differences to the smallest step
    bool aperiodic = true;
    Rational total_weight;  // S(1)
};

/// S(u), S'(u) or S''(u) for u > 0, exactly.
inline Rational eval_step_polynomial(const StepSet& s, const Rational& u, int order) {
    if (u <= 0)
        fail(ErrorCategory::validation, "steps.NonpositiveArgument", "step polynomial needs u > 0");
    if (order < 0 || order > 2)
        fail(ErrorCategory::validation, "steps.BadOrder", "derivative order must be 0, 1 or 2");
    Rational sum(0);
    for (const auto& [k, w] : s.weights()) {
        long factor = 1;
        if (order >= 1) factor *= k;
        if (order == 2) factor *= (k - 1);
        if (factor == 0) continue;
        sum += w * factor * pow_rat(u, k - order);
    }
    return sum;
}

inline double eval_step_polynomial(const StepSet& s, double u, int order) {
    if (!(u > 0))
        fail(ErrorCategory::validation, "steps.NonpositiveArgument", "step polynomial needs u > 0");
    if (order < 0 || order > 2)
        fail(ErrorCategory::validation, "steps.BadOrder", "derivative order must be 0, 1 or 2");
    double sum = 0;
    for (const auto& [k, w] : s.weights()) {
        double factor = 1;
        if (order >= 1) factor *= k;
        if (order == 2) factor *= (k - 1);
        sum += to_double(w) * factor * std::pow(u, k - order);
    }
    return sum;
}

inline StepCharacteristics characteristics(const StepSet& s) {
    const Rational one(1);
    StepCharacteristics ch;
    ch.total_weight = eval_step_polynomial(s, one, 0);
    const Rational s1 = eval_step_polynomial(s, one, 1);
    const Rational s2 = eval_step_polynomial(s, one, 2);
    ch.drift = s1 / ch.total_weight;
    ch.variance = (s2 + s1) / ch.total_weight - ch.drift * ch.drift;
    int g = 0;
    const int lowest = -s.c();
    for (const auto& [k, w] : s.weights()) g = std::gcd(g, k - lowest);
    ch.period = g;
    ch.aperiodic = (g == 1);
    return ch;
}

}  // namespace patharea
