// basisc: check, run, lower, and eval commands for .qw programs, plus the
// bundled algorithm drivers.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "basisc/cli.hpp"

namespace {

void split_kv(const std::string &s, std::string &k, std::string &v, const char *what) {
    auto eq = s.find('=');
    if (eq == std::string::npos)
        throw CLI::ValidationError(std::string(what) + " expects NAME=VALUE, got '" + s + "'");
    k = s.substr(0, eq);
    v = s.substr(eq + 1);
}

void add_common(CLI::App *cmd, basisc::CliConfig &cfg,
                std::vector<std::string> &sets, std::vector<std::string> &args) {
    cmd->add_option("--entry", cfg.entry, "Entry kernel name");
    cmd->add_option("--set", sets, "Bind a dimension variable, NAME=INT (repeatable)");
    cmd->add_option("--arg", args, "Bind an entry capture, NAME=VALUE (repeatable)");
    cmd->add_option("--shots", cfg.shots, "Number of shots");
    cmd->add_option("--seed", cfg.seed, "Random seed");
    cmd->add_option("--tol", cfg.tol, "Numeric tolerance");
    cmd->add_option("--max-qubits", cfg.max_qubits, "Qubit capacity cap");
    cmd->add_option("--phases", cfg.phases_file, "Phase schedule JSON file");
    cmd->add_option("--format", cfg.format, "Output format: json or text")
        ->check(CLI::IsMember({"json", "text"}));
}

void finish_config(basisc::CliConfig &cfg, const std::vector<std::string> &sets,
                   const std::vector<std::string> &args) {
    for (const auto &s : sets) {
        std::string k, v;
        split_kv(s, k, v, "--set");
        cfg.sets[k] = std::stoll(v);
    }
    for (const auto &s : args) {
        std::string k, v;
        split_kv(s, k, v, "--arg");
        cfg.args[k] = v;
    }
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"basisc: a toolchain for a basis-oriented quantum language"};
    app.require_subcommand(1);

    basisc::CliConfig cfg;
    std::vector<std::string> sets, args;
    std::string expr_text, fn_name, input_bits, driver_name;

    auto *check = app.add_subcommand("check", "Parse and type-check a program");
    check->add_option("source", cfg.source, "Path to a .qw file")->required();
    add_common(check, cfg, sets, args);

    auto *run = app.add_subcommand("run", "Run a kernel and print the histogram");
    run->add_option("source", cfg.source, "Path to a .qw file")->required();
    add_common(run, cfg, sets, args);

    auto *lower = app.add_subcommand("lower", "Lower a reversible expression to a matrix");
    lower->add_option("expr", expr_text, "Function expression, e.g. \"std >> pm\"")
        ->required();
    lower->add_option("--file", cfg.source, "Optional .qw file providing definitions");
    add_common(lower, cfg, sets, args);

    auto *eval = app.add_subcommand("eval", "Evaluate a classical function on bits");
    eval->add_option("source", cfg.source, "Path to a .qw file")->required();
    eval->add_option("fn", fn_name, "Classical function name")->required();
    eval->add_option("input", input_bits, "Input bit string")->required();
    add_common(eval, cfg, sets, args);

    auto *driver = app.add_subcommand("driver", "Run a bundled algorithm driver");
    std::string names;
    for (const auto &n : basisc::driver_names())
        names += (names.empty() ? "" : ", ") + n;
    driver->add_option("name", driver_name, "One of: " + names)->required();
    add_common(driver, cfg, sets, args);

    auto *post = app.add_subcommand("post", "Classical post-processing helpers");
    std::string post_op;
    std::vector<std::string> post_operands;
    post->add_option("op", post_op,
                     "binfrac | cfrac | below | gf2 | grover-iters | gcd | lcm | modinv")
        ->required();
    post->add_option("operands", post_operands, "Operation operands");

    try {
        app.parse(argc, argv);
        finish_config(cfg, sets, args);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    if (check->parsed())
        return basisc::cmd_check(cfg, std::cout, std::cerr);
    if (run->parsed())
        return basisc::cmd_run(cfg, std::cout, std::cerr);
    if (lower->parsed())
        return basisc::cmd_lower(cfg, expr_text, std::cout, std::cerr);
    if (eval->parsed())
        return basisc::cmd_eval(cfg, fn_name, input_bits, std::cout, std::cerr);
    if (driver->parsed())
        return basisc::cmd_driver(cfg, driver_name, std::cout, std::cerr);
    if (post->parsed())
        return basisc::cmd_post(post_op, post_operands, std::cout, std::cerr);
    return 1;
}
