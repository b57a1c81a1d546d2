#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "flopdt/checks.hpp"
#include "flopdt/harness_config.hpp"

namespace flopdt {

namespace detail {

inline std::string csv_cell(const std::string& value) {
    if (value.find(',') == std::string::npos &&
        value.find('"') == std::string::npos)
        return value;
    std::string quoted = "\"";
    for (char ch : value) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    return quoted + "\"";
}

inline std::string approx_cell(const CycNumber& c) {
    std::ostringstream s;
    s << approx_real(c) << (approx_imag(c) < 0 ? "" : "+") << approx_imag(c)
      << "i";
    return s.str();
}

inline void emit_series_rows(const FormalSeries& s, bool float_report,
                             OutputFormat format, std::ostream& out) {
    const ExponentLattice& lat = s.lattice();
    const char sep = format == OutputFormat::csv ? ',' : '\t';
    if (format == OutputFormat::csv) {
        out << "q_exp";
        for (unsigned i = 0; i < lat.rank(); ++i) out << ",t_exp" << i;
        out << ",coefficient";
        if (float_report) out << ",approx";
        out << "\n";
    } else {
        out << "# validity " << s.valid_to().str() << "\n";
    }
    for (const auto& [k, c] : s.terms()) {
        out << format_rational(lat.q_exponent(k));
        for (unsigned i = 0; i < lat.rank(); ++i)
            out << sep << format_rational(lat.t_exponent(k, i));
        out << sep
            << (format == OutputFormat::csv ? csv_cell(c.str()) : c.str());
        if (float_report) out << sep << approx_cell(c);
        out << "\n";
    }
}

inline void emit_series(const FormalSeries& s, const std::string& label,
                        const RunConfig& cfg, std::ostream& out) {
    if (cfg.format == OutputFormat::json) {
        out << series_to_text(s, label, cfg.float_report);
        return;
    }
    emit_series_rows(s, cfg.float_report, cfg.format, out);
}

/// Slopes mu in [0, bound] with denominator at most 3, ascending.
inline std::vector<Rational> slope_grid(const Grade& bound) {
    std::vector<Rational> slopes;
    for (long long den = 1; den <= 3; ++den) {
        for (long long num = 0; !(Rational(num, den) > bound.value()); ++num) {
            Rational mu(num, den);
            bool seen = false;
            for (const auto& s : slopes) seen = seen || s == mu;
            if (!seen) slopes.push_back(mu);
        }
    }
    std::sort(slopes.begin(), slopes.end());
    return slopes;
}

} // namespace detail

/// Named expansion subjects of the `expand` subcommand. The two-character
/// forms live on a one-dimensional t lattice with the elliptic variable t
/// itself; eta and the one-variable forms are pure q series.
inline FormalSeries expand_object(const std::string& object,
                                  const Grade& order) {
    ExponentLattice q_lat(1, 24, 2, Rational(1), {Rational(0)});
    ExponentLattice qt_lat(1, 24, 2, Rational(1), {Rational(1, 2)});
    ThetaArgument t_arg;
    t_arg.direction = {qt_lat.t_denominator()};
    if (object == "eta") return eta_series(q_lat, order);
    if (object == "eta-inverse") return eta_inverse_series(q_lat, order);
    if (object == "theta00") return theta_sum(qt_lat, 0, 0, t_arg, order);
    if (object == "theta01") return theta_sum(qt_lat, 0, 1, t_arg, order);
    if (object == "theta10") return theta_sum(qt_lat, 1, 0, t_arg, order);
    if (object == "theta11") return theta_sum(qt_lat, 1, 1, t_arg, order);
    if (object == "theta-a0") return theta_a_series(q_lat, 0, order);
    if (object == "theta-a1") return theta_a_series(q_lat, 1, order);
    throw UsageError(
        "unknown expansion object '" + object +
        "' (choose eta, eta-inverse, theta00, theta01, theta10, theta11, "
        "theta-a0, theta-a1)");
}

namespace detail {

inline int run_expand(const RunConfig& cfg, std::ostream& out) {
    if (cfg.object.empty())
        throw UsageError("expand needs an object name, e.g. `expand eta`");
    emit_series(expand_object(cfg.object, cfg.order), cfg.object, cfg, out);
    return 0;
}

inline int run_invariants(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.geometry)
        throw UsageError("invariants needs curve data (--config with l, n, "
                         "h_dot_c)");
    const FlopCurveData& curve = cfg.geometry->curve;
    const ExponentLattice lat = curve_counting_lattice();
    const Grade& bound = cfg.order;
    if (!bound.is_finite())
        throw UsageError("the tables need a finite truncation order");

    // sheaf-count table: rows (n, m, N) with the grade n + m/2 inside the
    // ball and zero entries skipped
    std::vector<std::tuple<long long, long long, Rational>> n_rows;
    for (long long n = 0; !(Rational(n) > bound.value()); ++n) {
        for (long long m = 1; !(Rational(n) + Rational(m, 2) > bound.value());
             ++m) {
            Rational value = n_invariant(n, m, curve);
            if (value == 0) continue;
            n_rows.emplace_back(n, m, value);
        }
    }
    std::vector<Rational> slopes = detail::slope_grid(bound);

    auto par_slice = [&](const Rational& mu) {
        if (cfg.variant == FlopVariant::euler) {
            if (!curve.width)
                throw UsageError(
                    "the unsigned pair table needs a declared width");
            return par_series_euler(*curve.width, mu, bound, lat);
        }
        return par_series_behrend(curve, mu, bound, lat);
    };

    if (cfg.format == OutputFormat::json) {
        Json doc;
        Json curve_doc;
        curve_doc["l"] = curve.l;
        curve_doc["n"] = curve.multiplicities;
        curve_doc["h_dot_c"] = curve.h_dot_c;
        doc["curve"] = std::move(curve_doc);
        doc["order"] = format_rational(bound.value());
        doc["variant"] = flop_variant_name(cfg.variant);
        Json n_table = Json::array();
        for (const auto& [n, m, value] : n_rows)
            n_table.push_back(Json::array({n, m, format_rational(value)}));
        doc["n_table"] = std::move(n_table);
        Json par_table = Json::array();
        for (const auto& mu : slopes) {
            Json row;
            row["slope"] = format_rational(mu);
            Json terms = Json::array();
            for (const auto& [k, c] : par_slice(mu).terms())
                terms.push_back(Json::array(
                    {k.q_num, Json(k.t_num), c.str()}));
            row["terms"] = std::move(terms);
            par_table.push_back(std::move(row));
        }
        doc["par_table"] = std::move(par_table);
        out << doc.dump(2) << "\n";
        return 0;
    }

    const char sep = cfg.format == OutputFormat::csv ? ',' : '\t';
    if (cfg.format == OutputFormat::csv) out << "table,a,b,c,value\n";
    for (const auto& [n, m, value] : n_rows)
        out << "N" << sep << n << sep << m << sep << sep
            << format_rational(value) << "\n";
    for (const auto& mu : slopes)
        for (const auto& [k, c] : par_slice(mu).terms())
            out << "Par" << sep << format_rational(mu) << sep << k.q_num << sep
                << k.t_num[0] << sep
                << (cfg.format == OutputFormat::csv
                        ? detail::csv_cell(c.str())
                        : c.str())
                << "\n";
    return 0;
}

inline int run_flop(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.geometry)
        throw UsageError("flop needs a geometry (--config with l, n, "
                         "p_dot_c)");
    GeometryConfig geom = *cfg.geometry;
    geom.order = cfg.order;
    DTSeries input{FormalSeries::one(geom.source_lattice()), "1"};
    if (!cfg.input_path.empty()) {
        SeriesDocument doc = read_series_file(cfg.input_path);
        input = DTSeries{std::move(doc.series), doc.divisor_label};
    }
    DTSeries result = flop_transform(input, geom, cfg.variant);
    emit_series(result.series, result.divisor_label, cfg, out);
    return 0;
}

inline int run_blowup(const RunConfig& cfg, std::ostream& out) {
    SurfaceDTSeries input;
    input.rank = cfg.rank;
    if (!cfg.input_path.empty()) {
        SeriesDocument doc = read_series_file(cfg.input_path);
        input.series = std::move(doc.series);
        input.divisor_label = doc.divisor_label;
    } else {
        input.series = FormalSeries::one(blowup_lattice());
    }
    FormalSeries transformed = blowup_transform(input, cfg.order);
    if (cfg.format == OutputFormat::json) {
        emit_series(transformed, input.divisor_label, cfg, out);
        return 0;
    }
    const char sep = cfg.format == OutputFormat::csv ? ',' : '\t';
    if (cfg.format == OutputFormat::csv) {
        out << "a,s,value";
        if (cfg.float_report) out << ",approx";
        out << "\n";
    }
    for (const auto& cell : blowup_cells(transformed, cfg.rank)) {
        out << cell.a << sep << format_rational(cell.s) << sep
            << (cfg.format == OutputFormat::csv
                    ? detail::csv_cell(cell.value.str())
                    : cell.value.str());
        if (cfg.float_report) out << sep << detail::approx_cell(cell.value);
        out << "\n";
    }
    return 0;
}

inline int run_check(const RunConfig& cfg, std::ostream& out) {
    Json report = identity_report(cfg.order, cfg.seed);
    if (cfg.format == OutputFormat::json) {
        out << report.dump(2) << "\n";
    } else {
        const char sep = cfg.format == OutputFormat::csv ? ',' : '\t';
        if (cfg.format == OutputFormat::csv) out << "check,ok,detail\n";
        for (const auto& row : report.at("checks"))
            out << row.at("name").get<std::string>() << sep
                << (row.at("ok").get<bool>() ? "pass" : "FAIL") << sep
                << (cfg.format == OutputFormat::csv
                        ? detail::csv_cell(row.at("detail").get<std::string>())
                        : row.at("detail").get<std::string>())
                << "\n";
        out << (cfg.format == OutputFormat::csv ? "suite," : "suite\t")
            << (report.at("ok").get<bool>() ? "pass" : "FAIL")
            << (cfg.format == OutputFormat::csv ? "," : "\t") << "version "
            << report.at("suite_version").get<std::string>() << "\n";
    }
    return report.at("ok").get<bool>() ? 0 : 1;
}

} // namespace detail

/// Executes the configured subcommand, writing its artifact to `out`.
/// Returns the process exit status: 0 on success, 1 when the check suite
/// reports a failing identity. Component errors propagate as exceptions.
inline int run(const RunConfig& cfg, std::ostream& out) {
    switch (cfg.command) {
        case RunCommand::expand: return detail::run_expand(cfg, out);
        case RunCommand::invariants: return detail::run_invariants(cfg, out);
        case RunCommand::flop: return detail::run_flop(cfg, out);
        case RunCommand::blowup: return detail::run_blowup(cfg, out);
        case RunCommand::check: return detail::run_check(cfg, out);
    }
    throw UsageError("unhandled command");
}

} // namespace flopdt
