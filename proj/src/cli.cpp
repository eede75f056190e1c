#include "basisc/cli.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "basisc/parser.hpp"
#include "basisc/post.hpp"
#include "basisc/printer.hpp"
#include "basisc/simulator.hpp"

namespace basisc {

namespace {

int report(std::ostream &err, const std::exception &e, int code,
           const std::string &code_str) {
    err << "error[" << code_str << "]: " << e.what() << "\n";
    return code;
}

template <typename Fn>
int guarded(std::ostream &err, Fn &&fn) {
    try {
        return fn();
    } catch (const TypeError &e) {
        err << "error[" << e.code << "]: " << e.what() << "\n";
        return 2;
    } catch (const RunError &e) {
        err << "error[" << e.code << "]: " << e.what() << "\n";
        return 3;
    } catch (const LexError &e) {
        return report(err, e, 1, "LexError");
    } catch (const ParseError &e) {
        return report(err, e, 1, "ParseError");
    } catch (const IoError &e) {
        return report(err, e, 1, "IoError");
    }
}

MonoConfig mono_config(const CliConfig &cfg) {
    MonoConfig m;
    m.sets = cfg.sets;
    m.args = cfg.args;
    if (!cfg.phases_file.empty())
        m.phases = load_phase_schedule(cfg.phases_file);
    return m;
}

RunOptions run_options(const CliConfig &cfg) {
    RunOptions o;
    o.shots = cfg.shots;
    o.seed = cfg.seed;
    o.tol = cfg.tol;
    o.max_qubits = cfg.max_qubits;
    return o;
}

} // namespace

std::vector<double> load_phase_schedule(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open phase schedule '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw IoError("bad phase schedule '" + path + "': " + e.what());
    }
    if (!j.is_array())
        throw IoError("phase schedule must be a JSON array of radians");
    std::vector<double> out;
    for (const auto &v : j)
        out.push_back(v.get<double>());
    return out;
}

std::string histogram_json(const Histogram &h, uint64_t seed) {
    nlohmann::ordered_json j;
    j["shots"] = h.shots;
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (const auto &[k, v] : h.counts)
        counts[k] = v;
    j["counts"] = std::move(counts);
    j["seed"] = seed;
    return j.dump();
}

std::string histogram_text(const Histogram &h, uint64_t seed) {
    std::ostringstream s;
    s << "shots " << h.shots << "  seed " << seed << "\n";
    size_t width = 7;
    for (const auto &[k, v] : h.counts)
        width = std::max(width, k.size());
    s << std::left << std::setw(static_cast<int>(width) + 2) << "outcome"
      << std::setw(10) << "count" << "freq" << "\n";
    for (const auto &[k, v] : h.counts) {
        s << std::left << std::setw(static_cast<int>(width) + 2) << k
          << std::setw(10) << v << std::fixed << std::setprecision(6)
          << static_cast<double>(v) / static_cast<double>(h.shots) << "\n";
    }
    return s.str();
}

int cmd_check(const CliConfig &cfg, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        ProgramAst ast = parse_file(cfg.source);
        SpecProgram prog = monomorphize(ast, cfg.entry, mono_config(cfg));
        auto sigs = check_program(prog, cfg.tol);
        out << "ok: " << prog.defs.size() << " definitions, entry '"
            << prog.entry << "' : " << sigs.at(prog.entry).str() << "\n";
        return 0;
    });
}

int cmd_run(const CliConfig &cfg, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        if (cfg.shots < 1)
            throw IoError("--shots must be at least 1");
        ProgramAst ast = parse_file(cfg.source);
        SpecProgram prog = monomorphize(ast, cfg.entry, mono_config(cfg));
        check_program(prog, cfg.tol);
        Histogram h = run_kernel(prog, run_options(cfg));
        if (cfg.format == "text")
            out << histogram_text(h, cfg.seed);
        else
            out << histogram_json(h, cfg.seed) << "\n";
        return 0;
    });
}

int cmd_lower(const CliConfig &cfg, const std::string &expr_text, std::ostream &out,
              std::ostream &err) {
    return guarded(err, [&] {
        ProgramAst ast;
        if (!cfg.source.empty())
            ast = parse_file(cfg.source);
        Expr expr = parse_expression(expr_text);
        auto [prog, resolved] = monomorphize_expression(ast, expr, mono_config(cfg));
        check_program(prog, cfg.tol);
        TypeExpr t = check_expression(prog, resolved, cfg.tol);
        if (!t.is_func() || !t.reversible)
            throw TypeError("NotReversible",
                            "lower expects a reversible function expression");
        Mat u = lower_expr_matrix(prog, resolved, cfg.tol);
        int m = 0;
        while ((size_t(1) << m) < u.n)
            m++;
        nlohmann::ordered_json j;
        j["qubits"] = m;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (size_t r = 0; r < u.n; r++)
            for (size_t c = 0; c < u.n; c++)
                rows.push_back({u.at(r, c).real(), u.at(r, c).imag()});
        j["matrix"] = std::move(rows);
        out << j.dump() << "\n";
        return 0;
    });
}

int cmd_eval(const CliConfig &cfg, const std::string &fn, const std::string &input,
             std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        ProgramAst ast = parse_file(cfg.source);
        BitWord bits;
        for (char c : input) {
            if (c != '0' && c != '1')
                throw IoError("input must be a bit string, got '" + input + "'");
            bits.push_back(c == '1');
        }
        SpecProgram scratch;
        const Definition &d = specialize_classical_for_eval(
            scratch, ast, fn, mono_config(cfg), static_cast<long long>(bits.size()));
        check_program(scratch, cfg.tol);
        out << word_str(eval_classical(d, bits)) << "\n";
        return 0;
    });
}

int cmd_post(const std::string &op, const std::vector<std::string> &operands,
             std::ostream &out, std::ostream &err) {
    return guarded(err, [&]() -> int {
        auto bits_of = [](const std::string &s) {
            BitWord w;
            for (char c : s) {
                if (c != '0' && c != '1')
                    throw IoError("expected a bit string, got '" + s + "'");
                w.push_back(c == '1');
            }
            return w;
        };
        auto rational_of = [](const std::string &s) {
            auto slash = s.find('/');
            if (slash == std::string::npos)
                return Rational(std::stoll(s), 1);
            return Rational(std::stoll(s.substr(0, slash)),
                            std::stoll(s.substr(slash + 1)));
        };
        auto need = [&](size_t n) {
            if (operands.size() != n)
                throw IoError("post " + op + " expects " + std::to_string(n) +
                              " operand(s)");
        };
        if (op == "binfrac") {
            need(1);
            Rational r = as_bin_frac(bits_of(operands[0]));
            out << r.num << "/" << r.den << "\n";
            return 0;
        }
        if (op == "cfrac") {
            need(1);
            for (const auto &c : cfrac_convergents(rational_of(operands[0])))
                out << c.num << "/" << c.den << "\n";
            return 0;
        }
        if (op == "below") {
            need(2);
            Rational c = last_convergent_with_denominator_below(
                cfrac_convergents(rational_of(operands[0])), std::stoll(operands[1]));
            out << c.num << "/" << c.den << "\n";
            return 0;
        }
        if (op == "gf2") {
            if (operands.empty())
                throw IoError("post gf2 expects rows");
            std::vector<BitWord> rows;
            for (const auto &r : operands)
                rows.push_back(bits_of(r));
            auto s = gf2_solve_nullspace(rows);
            if (!s) {
                err << "need more rows\n";
                return 3;
            }
            out << word_str(*s) << "\n";
            return 0;
        }
        if (op == "grover-iters") {
            need(2);
            out << grover_iterations(std::stoi(operands[0]), std::stoll(operands[1]))
                << "\n";
            return 0;
        }
        if (op == "gcd" || op == "lcm" || op == "modinv") {
            need(2);
            long long a = std::stoll(operands[0]), b = std::stoll(operands[1]);
            out << (op == "gcd" ? gcd_ll(a, b)
                    : op == "lcm" ? lcm_ll(a, b)
                                  : modinv(a, b))
                << "\n";
            return 0;
        }
        throw IoError("unknown post operation '" + op + "'");
    });
}

int cmd_driver(const CliConfig &cfg, const std::string &name, std::ostream &out,
               std::ostream &err) {
    return guarded(err, [&] {
        DriverConfig dc;
        dc.shots = cfg.shots;
        dc.seed = cfg.seed;
        dc.tol = cfg.tol;
        dc.max_qubits = cfg.max_qubits;
        dc.sets = cfg.sets;
        dc.args = cfg.args;
        if (!cfg.phases_file.empty())
            dc.phases = load_phase_schedule(cfg.phases_file);
        DriverResult r = run_driver(name, dc);
        out << r.answer << "\n";
        if (!r.success) {
            err << "driver '" << name << "' did not reach a confident answer\n";
            return 3;
        }
        return 0;
    });
}

} // namespace basisc
