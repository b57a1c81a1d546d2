#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flopdt/flop.hpp"
#include "flopdt/io.hpp"

namespace flopdt {

enum class RunCommand { expand, invariants, flop, blowup, check };

enum class OutputFormat { json, table, csv };

inline RunCommand parse_run_command(const std::string& name) {
    if (name == "expand") return RunCommand::expand;
    if (name == "invariants") return RunCommand::invariants;
    if (name == "flop") return RunCommand::flop;
    if (name == "blowup") return RunCommand::blowup;
    if (name == "check") return RunCommand::check;
    throw ParseError("unknown command '" + name +
                     "' (choose expand, invariants, flop, blowup, check)");
}

inline OutputFormat parse_output_format(const std::string& name) {
    if (name == "json") return OutputFormat::json;
    if (name == "table") return OutputFormat::table;
    if (name == "csv") return OutputFormat::csv;
    throw ParseError("unknown format '" + name +
                     "' (choose json, table, csv)");
}

inline FlopVariant parse_variant(const std::string& name) {
    if (name == "behrend") return FlopVariant::behrend;
    if (name == "euler") return FlopVariant::euler;
    if (name == "fixed-support") return FlopVariant::fixed_support;
    throw ParseError("unknown variant '" + name +
                     "' (choose behrend, euler, fixed-support)");
}

/// Everything one invocation needs; identical configs produce identical
/// output bytes.
struct RunConfig {
    RunCommand command = RunCommand::check;
    std::optional<GeometryConfig> geometry;
    std::string object;
    std::string input_path;
    std::string output_path;
    Grade order = Grade(Rational(4));
    OutputFormat format = OutputFormat::json;
    unsigned seed = 0;
    FlopVariant variant = FlopVariant::behrend;
    bool float_report = false;
    long long rank = 1;
};

namespace detail {

using ConfigMap = std::map<std::string, std::vector<std::string>>;

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string dequote(const std::string& s) {
    if (s.size() >= 2 &&
        ((s.front() == '"' && s.back() == '"') ||
         (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

inline void config_insert(ConfigMap& map, const std::string& key,
                          std::vector<std::string> values) {
    if (map.count(key))
        throw ParseError("duplicate key '" + key + "'");
    map[key] = std::move(values);
}

/// key = value lines with # comments; values are bare scalars, quoted
/// strings, or flat arrays [a, b, c].
inline ConfigMap parse_toml_subset(const std::string& text) {
    ConfigMap map;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string line = text.substr(
            pos, eol == std::string::npos ? std::string::npos : eol - pos);
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;

        bool in_quote = false;
        char quote = '"';
        for (std::size_t i = 0; i < line.size(); ++i) {
            char ch = line[i];
            if (in_quote) {
                if (ch == quote) in_quote = false;
            } else if (ch == '"' || ch == '\'') {
                in_quote = true;
                quote = ch;
            } else if (ch == '#') {
                line = line.substr(0, i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']')
            throw ParseError("tables are not supported; use flat keys");
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected key = value, got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("missing key before '='");
        if (value.empty())
            throw ParseError("missing value for key '" + key + "'");
        if (value.front() == '[') {
            if (value.back() != ']')
                throw ParseError("unterminated array for key '" + key + "'");
            std::string body = value.substr(1, value.size() - 2);
            std::vector<std::string> items;
            std::size_t start = 0;
            while (start <= body.size()) {
                std::size_t comma = body.find(',', start);
                std::string item = trim(body.substr(
                    start, comma == std::string::npos ? std::string::npos
                                                      : comma - start));
                if (!item.empty()) items.push_back(dequote(item));
                else if (comma != std::string::npos)
                    throw ParseError("empty array entry for key '" + key +
                                     "'");
                start = comma == std::string::npos ? body.size() + 1
                                                   : comma + 1;
            }
            config_insert(map, key, std::move(items));
        } else {
            config_insert(map, key, {dequote(value)});
        }
    }
    return map;
}

inline std::string json_scalar_to_string(const Json& j,
                                         const std::string& key) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
    throw ParseError("value of key '" + key +
                     "' must be a string, integer, boolean, or flat array");
}

inline ConfigMap parse_json_config(const std::string& text) {
    Json doc = Json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ParseError("malformed JSON config");
    if (!doc.is_object()) throw ParseError("config must be a JSON object");
    ConfigMap map;
    for (const auto& [key, value] : doc.items()) {
        if (value.is_array()) {
            std::vector<std::string> items;
            for (const auto& entry : value)
                items.push_back(json_scalar_to_string(entry, key));
            config_insert(map, key, std::move(items));
        } else {
            config_insert(map, key, {json_scalar_to_string(value, key)});
        }
    }
    return map;
}

inline long long config_integer(const std::string& text,
                                const std::string& key) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(text, &used);
        if (used != text.size()) throw ParseError("");
        return v;
    } catch (const std::exception&) {
        throw ParseError("value of key '" + key + "' must be an integer, got '" +
                         text + "'");
    }
}

inline Rational config_rational(const std::string& text,
                                const std::string& key) {
    std::size_t slash = text.find('/');
    if (slash == std::string::npos)
        return Rational(config_integer(text, key));
    long long num = config_integer(text.substr(0, slash), key);
    long long den = config_integer(text.substr(slash + 1), key);
    if (den == 0)
        throw ParseError("value of key '" + key + "' has a zero denominator");
    return Rational(num, den);
}

inline bool config_bool(const std::string& text, const std::string& key) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw ParseError("value of key '" + key + "' must be true or false");
}

inline const std::string& config_scalar(const ConfigMap& map,
                                        const std::string& key) {
    const auto& values = map.at(key);
    if (values.size() != 1)
        throw ParseError("key '" + key + "' needs a single value");
    return values.front();
}

} // namespace detail

/// Builds a validated RunConfig from a TOML-style or JSON document (JSON is
/// detected by a leading '{'). Geometry constraints — the fiber-length
/// range, the width/length coupling, and the sign of the expansion-chamber
/// grading — are enforced here so every later stage can assume an
/// admissible configuration.
inline RunConfig parse_config(const std::string& text) {
    std::size_t first = text.find_first_not_of(" \t\r\n");
    detail::ConfigMap map =
        (first != std::string::npos && text[first] == '{')
            ? detail::parse_json_config(text)
            : detail::parse_toml_subset(text);

    static const std::vector<std::string> geometry_keys = {
        "l",        "n",           "width",         "p_dot_c",
        "h_dot_c",  "d_q",         "q_denominator", "d_t",
        "t_denominator", "w",      "weight",        "grading",
        "lattice"};
    static const std::vector<std::string> general_keys = {
        "command", "object", "input", "output",      "order",
        "lambda",  "format", "seed",  "variant",     "float_report",
        "rank"};

    bool has_geometry = false;
    for (const auto& [key, values] : map) {
        (void)values;
        bool known = false;
        for (const auto& g : general_keys) known = known || key == g;
        bool geometric = false;
        for (const auto& g : geometry_keys) geometric = geometric || key == g;
        if (!known && !geometric)
            throw ParseError("unknown key '" + key + "'");
        has_geometry = has_geometry || geometric;
    }

    RunConfig cfg;
    if (map.count("command"))
        cfg.command = parse_run_command(detail::config_scalar(map, "command"));
    if (map.count("object")) cfg.object = detail::config_scalar(map, "object");
    if (map.count("input")) cfg.input_path = detail::config_scalar(map, "input");
    if (map.count("output"))
        cfg.output_path = detail::config_scalar(map, "output");
    if (map.count("order") && map.count("lambda"))
        throw ParseError("give either 'order' or 'lambda', not both");
    for (const char* key : {"order", "lambda"})
        if (map.count(key)) {
            const std::string& v = detail::config_scalar(map, key);
            cfg.order = v == "inf" ? Grade::infinity()
                                   : Grade(detail::config_rational(v, key));
        }
    if (map.count("format"))
        cfg.format = parse_output_format(detail::config_scalar(map, "format"));
    if (map.count("seed")) {
        long long s = detail::config_integer(
            detail::config_scalar(map, "seed"), "seed");
        if (s < 0) throw ParseError("seed must be nonnegative");
        cfg.seed = static_cast<unsigned>(s);
    }
    if (map.count("variant"))
        cfg.variant = parse_variant(detail::config_scalar(map, "variant"));
    if (map.count("float_report"))
        cfg.float_report = detail::config_bool(
            detail::config_scalar(map, "float_report"), "float_report");
    if (map.count("rank")) {
        cfg.rank = detail::config_integer(detail::config_scalar(map, "rank"),
                                          "rank");
        if (cfg.rank < 1) throw ParseError("rank must be a positive integer");
    }

    if (has_geometry) {
        long long l = 1;
        if (map.count("l"))
            l = detail::config_integer(detail::config_scalar(map, "l"), "l");
        if (l < 1 || l > 6) throw ParseError("l must lie in {1,...,6}");

        std::vector<long long> n;
        if (map.count("n"))
            for (const auto& item : map.at("n"))
                n.push_back(detail::config_integer(item, "n"));
        if (n.empty()) n.push_back(1);
        if (n.size() > static_cast<std::size_t>(l))
            throw ParseError("n lists more multiplicities than the length l");
        n.resize(static_cast<std::size_t>(l), 0);

        GeometryConfig geom;
        geom.curve.l = static_cast<int>(l);
        geom.curve.multiplicities = n;
        if (map.count("width"))
            geom.curve.width = detail::config_integer(
                detail::config_scalar(map, "width"), "width");
        else if (l == 1 && n[0] >= 1)
            geom.curve.width = n[0];
        if (map.count("p_dot_c"))
            geom.curve.p_dot_c = detail::config_integer(
                detail::config_scalar(map, "p_dot_c"), "p_dot_c");
        if (map.count("h_dot_c"))
            geom.curve.h_dot_c = detail::config_integer(
                detail::config_scalar(map, "h_dot_c"), "h_dot_c");

        long long d_q = 24;
        long long d_t = 2;
        if (map.count("lattice")) {
            const auto& pair = map.at("lattice");
            if (pair.size() != 2)
                throw ParseError("lattice must be the pair [D_q, D_t]");
            d_q = detail::config_integer(pair[0], "lattice");
            d_t = detail::config_integer(pair[1], "lattice");
        }
        for (const char* key : {"d_q", "q_denominator"})
            if (map.count(key))
                d_q = detail::config_integer(detail::config_scalar(map, key),
                                             key);
        for (const char* key : {"d_t", "t_denominator"})
            if (map.count(key))
                d_t = detail::config_integer(detail::config_scalar(map, key),
                                             key);
        Rational w(-1, 2 * l);
        for (const char* key : {"w", "weight", "grading"})
            if (map.count(key))
                w = detail::config_rational(detail::config_scalar(map, key),
                                            key);
        if (d_q < 1 || d_t < 1)
            throw ParseError("lattice denominators must be positive");

        try {
            geom.lattice = ExponentLattice(1, static_cast<std::int64_t>(d_q),
                                           static_cast<std::int64_t>(d_t),
                                           Rational(1), {w});
            geom.order = cfg.order;
            geom.curve.validate();
            geom.validate();
        } catch (const ChamberError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(e.what());
        }
        cfg.geometry = geom;
    }

    if (cfg.variant == FlopVariant::euler && cfg.geometry &&
        cfg.geometry->curve.l != 1)
        throw UsageError(
            "the unsigned-count variant is defined only for length one");
    return cfg;
}

/// Serializes a RunConfig back to the JSON config dialect accepted by
/// parse_config; parse_config(serialize_config(cfg)) reproduces cfg.
inline Json serialize_config(const RunConfig& cfg) {
    Json doc;
    switch (cfg.command) {
        case RunCommand::expand: doc["command"] = "expand"; break;
        case RunCommand::invariants: doc["command"] = "invariants"; break;
        case RunCommand::flop: doc["command"] = "flop"; break;
        case RunCommand::blowup: doc["command"] = "blowup"; break;
        case RunCommand::check: doc["command"] = "check"; break;
    }
    if (!cfg.object.empty()) doc["object"] = cfg.object;
    if (!cfg.input_path.empty()) doc["input"] = cfg.input_path;
    if (!cfg.output_path.empty()) doc["output"] = cfg.output_path;
    doc["order"] = cfg.order.str();
    doc["format"] = cfg.format == OutputFormat::json
                        ? "json"
                        : cfg.format == OutputFormat::table ? "table" : "csv";
    doc["seed"] = cfg.seed;
    doc["variant"] = flop_variant_name(cfg.variant);
    doc["float_report"] = cfg.float_report;
    doc["rank"] = cfg.rank;
    if (cfg.geometry) {
        const GeometryConfig& geom = *cfg.geometry;
        doc["l"] = geom.curve.l;
        doc["n"] = geom.curve.multiplicities;
        if (geom.curve.width) doc["width"] = *geom.curve.width;
        doc["p_dot_c"] = geom.curve.p_dot_c;
        doc["h_dot_c"] = geom.curve.h_dot_c;
        doc["lattice"] = Json::array(
            {geom.lattice.q_denominator(), geom.lattice.t_denominator()});
        doc["w"] = format_rational(geom.lattice.weight_t()[0]);
    }
    return doc;
}

} // namespace flopdt
