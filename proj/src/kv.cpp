#include "thermoflux/kv.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace thermoflux {

namespace {

void dump_rec(const Json& j, int indent, int depth, std::string& out) {
    const bool pretty = indent >= 0;
    auto newline = [&](int d) {
        if (pretty) {
            out += '\n';
            out.append(static_cast<std::size_t>(d * indent), ' ');
        }
    };
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += '{';
        bool first = true;
        for (const auto& [k, v] : j.items()) {
            if (!first) {
                out += ',';
            }
            first = false;
            newline(depth + 1);
            out += Json(k).dump();
            out += pretty ? ": " : ":";
            dump_rec(v, indent, depth + 1, out);
        }
        newline(depth);
        out += '}';
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += '[';
        bool first = true;
        for (const auto& v : j) {
            if (!first) {
                out += ',';
            }
            first = false;
            newline(depth + 1);
            dump_rec(v, indent, depth + 1, out);
        }
        newline(depth);
        out += ']';
        return;
    }
    case Json::value_t::number_float: {
        const double v = j.get<double>();
        out += std::isfinite(v) ? format_number(v) : "null";
        return;
    }
    default:
        out += j.dump();
        return;
    }
}

} // namespace

std::string format_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string kv_to_text(const KvDocument& doc) {
    std::ostringstream os;
    for (const auto& e : doc) {
        os << e.key << " = ";
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, std::monostate>) {
                    os << "none";
                } else if constexpr (std::is_same_v<T, double>) {
                    os << format_number(v);
                } else if constexpr (std::is_same_v<T, bool>) {
                    os << (v ? "true" : "false");
                } else {
                    os << v;
                }
            },
            e.value);
        os << '\n';
    }
    return os.str();
}

Json kv_to_object(const KvDocument& doc) {
    Json j = Json::object();
    for (const auto& e : doc) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, std::monostate>) {
                    j[e.key] = nullptr;
                } else {
                    j[e.key] = v;
                }
            },
            e.value);
    }
    return j;
}

std::string kv_to_json(const KvDocument& doc, int indent) {
    return dump_json(kv_to_object(doc), indent);
}

std::string dump_json(const Json& j, int indent) {
    std::string out;
    dump_rec(j, indent, 0, out);
    out += '\n';
    return out;
}

} // namespace thermoflux
