// Command line front end: expansion of named series, invariant tables, the
// flop and blow-up transforms, and the identity check suite, with exact
// rational/cyclotomic output in JSON, table, or CSV form.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "flopdt/harness.hpp"

namespace {

struct CommonOptions {
    CLI::Option* config = nullptr;
    CLI::Option* input = nullptr;
    CLI::Option* output = nullptr;
    CLI::Option* order = nullptr;
    CLI::Option* variant = nullptr;
    CLI::Option* format = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* float_report = nullptr;
};

struct CliState {
    std::string config_path;
    std::string input_path;
    std::string output_path;
    std::string order_text;
    std::string variant_text = "behrend";
    std::string format_text = "json";
    unsigned seed = 0;
    bool float_report = false;
    std::string object;
    long long rank = 1;
};

CommonOptions add_common(CLI::App* cmd, CliState& state) {
    CommonOptions opts;
    opts.config = cmd->add_option("--config", state.config_path,
                                  "configuration file (TOML-style or JSON)");
    opts.input = cmd->add_option("--input", state.input_path,
                                 "input series file (JSON)");
    opts.output = cmd->add_option("--output", state.output_path,
                                  "output file (default: stdout)");
    opts.order = cmd->add_option("--order", state.order_text,
                                 "truncation order as P/Q (or inf)");
    opts.variant =
        cmd->add_option("--variant", state.variant_text,
                        "counting weight: behrend, euler, fixed-support");
    opts.format = cmd->add_option("--format", state.format_text,
                                  "output format: json, table, csv");
    opts.seed = cmd->add_option("--seed", state.seed,
                                "seed for randomized property checks");
    opts.float_report = cmd->add_flag(
        "--float-report", state.float_report,
        "append a floating-point approximation column (exact values stay)");
    return opts;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw flopdt::UsageError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int dispatch(flopdt::RunCommand command, const CliState& state,
             const CommonOptions& opts, bool rank_given) {
    using namespace flopdt;
    RunConfig cfg;
    if (opts.config->count() > 0)
        cfg = parse_config(read_text_file(state.config_path));
    cfg.command = command;
    if (opts.input->count() > 0) cfg.input_path = state.input_path;
    if (opts.output->count() > 0) cfg.output_path = state.output_path;
    if (opts.order->count() > 0) {
        cfg.order = state.order_text == "inf"
                        ? Grade::infinity()
                        : Grade(detail::config_rational(state.order_text,
                                                        "--order"));
        if (cfg.geometry) cfg.geometry->order = cfg.order;
    }
    if (opts.variant->count() > 0) cfg.variant = parse_variant(state.variant_text);
    if (opts.format->count() > 0)
        cfg.format = parse_output_format(state.format_text);
    if (opts.seed->count() > 0) cfg.seed = state.seed;
    if (opts.float_report->count() > 0) cfg.float_report = state.float_report;
    if (!state.object.empty()) cfg.object = state.object;
    if (rank_given) {
        if (state.rank < 1)
            throw UsageError("rank must be a positive integer");
        cfg.rank = state.rank;
    }
    if (cfg.variant == FlopVariant::euler && cfg.geometry &&
        cfg.geometry->curve.l != 1)
        throw UsageError(
            "the unsigned-count variant is defined only for length one");

    if (!cfg.output_path.empty()) {
        std::ofstream out(cfg.output_path, std::ios::binary);
        if (!out)
            throw UsageError("cannot open output file '" + cfg.output_path +
                             "'");
        return run(cfg, out);
    }
    return run(cfg, std::cout);
}

} // namespace

int main(int argc, char** argv) {
    if (const char* cap_text = std::getenv("FLOPDT_CYC_CAP")) {
        try {
            std::size_t used = 0;
            long long cap = std::stoll(cap_text, &used);
            if (used != std::string(cap_text).size() || cap < 1)
                throw std::invalid_argument("");
            flopdt::cyclotomic_order_cap() = static_cast<unsigned>(cap);
        } catch (const std::exception&) {
            std::cerr << "flopdt: FLOPDT_CYC_CAP must be a positive integer\n";
            return 2;
        }
    }

    CLI::App app{
        "Exact formal-series toolkit: wall-crossing error terms, curve "
        "invariant tables, surface blow-up multipliers, and a machine check "
        "suite for the identities relating them."};
    app.require_subcommand(1);

    CliState state;
    CLI::App* expand =
        app.add_subcommand("expand", "expand a named series (eta, theta...)");
    expand->add_option("object", state.object,
                       "series name: eta, eta-inverse, theta00, theta01, "
                       "theta10, theta11, theta-a0, theta-a1");
    CommonOptions expand_opts = add_common(expand, state);

    CLI::App* invariants = app.add_subcommand(
        "invariants", "tabulate sheaf-count and pair-count invariants");
    CommonOptions invariants_opts = add_common(invariants, state);

    CLI::App* flop = app.add_subcommand(
        "flop", "apply the wall-crossing transform to a series");
    CommonOptions flop_opts = add_common(flop, state);

    CLI::App* blowup = app.add_subcommand(
        "blowup", "apply the point blow-up multiplier to a surface series");
    CommonOptions blowup_opts = add_common(blowup, state);
    CLI::Option* rank_opt = blowup->add_option(
        "--rank", state.rank, "sheaf rank of the input series (default 1)");

    CLI::App* check =
        app.add_subcommand("check", "run the versioned identity suite");
    CommonOptions check_opts = add_common(check, state);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "flopdt: " << e.what() << "\n";
        return 2;
    }

    try {
        if (expand->parsed())
            return dispatch(flopdt::RunCommand::expand, state, expand_opts,
                            false);
        if (invariants->parsed())
            return dispatch(flopdt::RunCommand::invariants, state,
                            invariants_opts, false);
        if (flop->parsed())
            return dispatch(flopdt::RunCommand::flop, state, flop_opts, false);
        if (blowup->parsed())
            return dispatch(flopdt::RunCommand::blowup, state, blowup_opts,
                            rank_opt->count() > 0);
        if (check->parsed())
            return dispatch(flopdt::RunCommand::check, state, check_opts,
                            false);
        std::cerr << "flopdt: no subcommand given\n";
        return 2;
    } catch (const flopdt::ParseError& e) {
        std::cerr << "flopdt: " << e.what() << "\n";
        return 2;
    } catch (const flopdt::UsageError& e) {
        std::cerr << "flopdt: " << e.what() << "\n";
        return 2;
    } catch (const flopdt::DomainError& e) {
        std::cerr << "flopdt: " << e.what() << "\n";
        return 2;
    } catch (const flopdt::Error& e) {
        std::cerr << "flopdt: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "flopdt: " << e.what() << "\n";
        return 1;
    }
}
