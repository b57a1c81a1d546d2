#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "flopdt/series.hpp"

namespace flopdt {

using Json = nlohmann::ordered_json;

/// A stored series together with its optional divisor label.
struct SeriesDocument {
    FormalSeries series = FormalSeries::one(ExponentLattice());
    std::string divisor_label;
};

namespace detail {

inline double approx_real(const CycNumber& c) {
    double acc = 0;
    const double tau = 6.283185307179586476925286766559;
    unsigned m = c.order();
    for (std::size_t j = 0; j < c.coords().size(); ++j)
        acc += c.coords()[j].convert_to<double>() *
               std::cos(tau * static_cast<double>(j) / m);
    return acc;
}

inline double approx_imag(const CycNumber& c) {
    double acc = 0;
    const double tau = 6.283185307179586476925286766559;
    unsigned m = c.order();
    for (std::size_t j = 0; j < c.coords().size(); ++j)
        acc += c.coords()[j].convert_to<double>() *
               std::sin(tau * static_cast<double>(j) / m);
    return acc;
}

inline long long json_integer(const Json& j, const std::string& field) {
    if (!j.is_number_integer())
        throw ParseError("field '" + field + "' must be an integer");
    return j.get<long long>();
}

inline std::string json_string(const Json& j, const std::string& field) {
    if (!j.is_string())
        throw ParseError("field '" + field + "' must be a string");
    return j.get<std::string>();
}

inline const Json& json_member(const Json& j, const std::string& field) {
    if (!j.is_object() || !j.contains(field))
        throw ParseError("missing field '" + field + "'");
    return j.at(field);
}

} // namespace detail

/// Serializes a series to the exchange schema: a header with the lattice
/// data (grading weights as exact "p/q" strings), the smallest cyclotomic
/// order containing every coefficient, and the validity bound; then one
/// [q_num, [t_num...], [coord...]] triple per term in grid order. All values
/// are exact strings or integers; with float_report each term gains an extra
/// [re, im] column of double approximations that never replaces the exact
/// data.
inline Json series_to_json(const FormalSeries& s,
                           const std::string& divisor_label = "",
                           bool float_report = false) {
    const ExponentLattice& lat = s.lattice();
    unsigned cyc_order = 1;
    for (const auto& [k, c] : s.terms()) {
        (void)k;
        cyc_order = std::lcm(cyc_order, c.order());
    }

    Json j;
    j["q_denominator"] = lat.q_denominator();
    j["t_denominator"] = lat.t_denominator();
    j["lattice_rank"] = lat.rank();
    j["cyclotomic_order"] = cyc_order;
    Json weights = Json::array();
    weights.push_back(format_rational(lat.weight_q()));
    for (const auto& w : lat.weight_t()) weights.push_back(format_rational(w));
    j["grading_weights"] = std::move(weights);
    j["valid_to"] =
        s.valid_to().is_finite() ? format_rational(s.valid_to().value())
                                 : std::string("inf");
    if (!divisor_label.empty()) j["divisor_label"] = divisor_label;

    Json terms = Json::array();
    for (const auto& [k, c] : s.terms()) {
        Json t_part = Json::array();
        for (auto v : k.t_num) t_part.push_back(v);
        Json coords = Json::array();
        CycNumber wide = c.embedded(cyc_order);
        for (const auto& coord : wide.coords())
            coords.push_back(format_rational(coord));
        Json row = Json::array({k.q_num, std::move(t_part), std::move(coords)});
        if (float_report)
            row.push_back(Json::array(
                {detail::approx_real(c), detail::approx_imag(c)}));
        terms.push_back(std::move(row));
    }
    j["terms"] = std::move(terms);
    return j;
}

/// Parses the exchange schema back into a series. Every header field is
/// required; terms must sit inside the declared validity ball and carry
/// coordinate vectors of length phi(cyclotomic_order) at most. Diagnostics
/// name the offending field.
inline SeriesDocument series_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("series document must be an object");
    long long q_den = detail::json_integer(
        detail::json_member(j, "q_denominator"), "q_denominator");
    long long t_den = detail::json_integer(
        detail::json_member(j, "t_denominator"), "t_denominator");
    long long rank =
        detail::json_integer(detail::json_member(j, "lattice_rank"),
                             "lattice_rank");
    long long cyc_order = detail::json_integer(
        detail::json_member(j, "cyclotomic_order"), "cyclotomic_order");
    if (rank < 1) throw ParseError("field 'lattice_rank' must be positive");
    if (cyc_order < 1)
        throw ParseError("field 'cyclotomic_order' must be positive");

    const Json& weights = detail::json_member(j, "grading_weights");
    if (!weights.is_array() ||
        weights.size() != static_cast<std::size_t>(rank) + 1)
        throw ParseError(
            "field 'grading_weights' must list the q weight then one t weight "
            "per lattice direction");
    Rational w_q = parse_rational(
        detail::json_string(weights.at(0), "grading_weights"));
    std::vector<Rational> w_t;
    for (std::size_t i = 1; i < weights.size(); ++i)
        w_t.push_back(parse_rational(
            detail::json_string(weights.at(i), "grading_weights")));

    std::string bound =
        detail::json_string(detail::json_member(j, "valid_to"), "valid_to");
    Grade valid_to =
        bound == "inf" ? Grade::infinity() : Grade(parse_rational(bound));

    FormalSeries out = [&] {
        try {
            ExponentLattice lat(static_cast<unsigned>(rank), q_den, t_den, w_q,
                                std::move(w_t));
            return FormalSeries::zero(lat, valid_to);
        } catch (const Error& e) {
            throw ParseError(std::string("invalid lattice header: ") +
                             e.what());
        }
    }();
    const ExponentLattice& lat = out.lattice();

    const Json& terms = detail::json_member(j, "terms");
    if (!terms.is_array()) throw ParseError("field 'terms' must be an array");
    for (const Json& row : terms) {
        if (!row.is_array() || row.size() < 3)
            throw ParseError(
                "each term must be [q_num, [t_num...], [coord...]]");
        long long q_num = detail::json_integer(row.at(0), "terms.q_num");
        const Json& t_part = row.at(1);
        if (!t_part.is_array() ||
            t_part.size() != static_cast<std::size_t>(rank))
            throw ParseError("terms.t_num must list one entry per direction");
        ExponentKey key;
        key.q_num = q_num;
        for (const Json& v : t_part)
            key.t_num.push_back(detail::json_integer(v, "terms.t_num"));
        const Json& coords = row.at(2);
        if (!coords.is_array() || coords.empty())
            throw ParseError("terms.coords must be a non-empty array");
        std::vector<Rational> coord_values;
        for (const Json& v : coords)
            coord_values.push_back(
                parse_rational(detail::json_string(v, "terms.coords")));
        CycNumber value = CycNumber::make(static_cast<unsigned>(cyc_order),
                                          std::move(coord_values));
        if (!(Grade(lat.grade(key)) <= valid_to))
            throw ParseError("term at " + key.str() +
                             " lies beyond the declared validity");
        out.set_term(key, out.coefficient(key) + value);
    }

    SeriesDocument doc;
    doc.series = std::move(out);
    if (j.contains("divisor_label"))
        doc.divisor_label =
            detail::json_string(j.at("divisor_label"), "divisor_label");
    return doc;
}

/// Renders a document with a trailing newline; byte-deterministic for equal
/// inputs (object keys keep insertion order, terms keep grid order).
inline std::string series_to_text(const FormalSeries& s,
                                  const std::string& divisor_label = "",
                                  bool float_report = false) {
    return series_to_json(s, divisor_label, float_report).dump(2) + "\n";
}

inline SeriesDocument series_from_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    return series_from_json(j);
}

inline void write_series_file(const std::string& path, const FormalSeries& s,
                              const std::string& divisor_label = "",
                              bool float_report = false) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot open '" + path + "' for writing");
    out << series_to_text(s, divisor_label, float_report);
    if (!out) throw UsageError("failed while writing '" + path + "'");
}

inline SeriesDocument read_series_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return series_from_text(buffer.str());
}

} // namespace flopdt
