#pragma once

// Flat key/value documents shared by the report writers, and a JSON writer
// that keeps 17 significant digits for every floating-point number.

#include "json.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace thermoflux {

using Json = nlohmann::ordered_json;

using KvValue = std::variant<std::monostate, double, long long, bool, std::string>;

struct KvEntry {
    std::string key;
    KvValue value;
};

using KvDocument = std::vector<KvEntry>;

/// 17 significant digits, `nan`/`inf` spelled out.
std::string format_number(double v);

inline KvValue kv_optional(const std::optional<double>& v) {
    return v ? KvValue{*v} : KvValue{};
}

/// `key = value` per line; missing values are written as `none`.
std::string kv_to_text(const KvDocument& doc);
Json kv_to_object(const KvDocument& doc);
/// JSON object with the same keys; missing and non-finite values become null.
std::string kv_to_json(const KvDocument& doc, int indent = 2);

/// Like Json::dump, but floats use 17 significant digits and non-finite
/// floats are written as null.
std::string dump_json(const Json& j, int indent = 2);

} // namespace thermoflux
