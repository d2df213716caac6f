#include "punq/cli.hpp"

#include "punq/checker.hpp"
#include "punq/dlal.hpp"
#include "punq/eval.hpp"
#include "punq/parser.hpp"
#include "punq/unitary.hpp"
#include "punq/validate.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace punq {

SupRef church_numeral(long n) {
    SupRef body = sup_term(term_free("x"));
    for (long i = 0; i < n; ++i) body = mk_app(sup_term(term_free("f")), body);
    return lam("f", lam("x", body));
}

namespace {

OrthoMode parse_mode(const std::string &text, std::ostream &err, bool &ok) {
    ok = true;
    if (text == "empty") return OrthoMode::empty();
    if (text == "times") return OrthoMode::times();
    if (text.rfind("untyped:", 0) == 0) {
        int d = std::atoi(text.c_str() + 8);
        if (d >= 1) return OrthoMode::untyped(d);
    }
    if (text == "untyped") return OrthoMode::untyped(2);
    err << "unknown mode '" << text << "' (use empty, times or untyped:<depth>)\n";
    ok = false;
    return OrthoMode::times();
}

struct Common {
    std::string mode = "times";
    long budget = -1;
    bool trace = false;
    bool json = false;
};

int check_all_defs(const Program &prog, OrthoMode mode, long budget, bool json, std::ostream &out) {
    Checker checker(mode, &prog, budget);
    for (const auto &d : prog.defs) {
        CheckResult r = checker.check(d.body, d.declared);
        if (!r.ok) {
            if (json)
                out << "{\"def\": \"" << d.name << "\", " << r.to_json().substr(1) << "\n";
            else
                out << d.name << " : " << type_to_string(d.declared) << " -- REJECTED: " << r.reason
                    << " (at " << r.where << ")\n";
            return 1;
        }
        if (json) {
            out << "{\"def\": \"" << d.name << "\", \"ok\": true, \"type\": \""
                << type_to_string(d.declared) << "\"}\n";
        } else {
            out << d.name << " : " << type_to_string(d.declared) << " -- accepted\n";
        }
    }
    return 0;
}

int cmd_check(const std::string &file, const Common &c, std::ostream &out, std::ostream &err) {
    bool mode_ok = true;
    OrthoMode mode = parse_mode(c.mode, err, mode_ok);
    if (!mode_ok) return 3;
    if (mode.kind == OrthoMode::UntypedBounded)
        err << "warning: the untyped orthogonality fragment is a bounded approximation and is "
               "unsound relative to the full quantifier\n";
    Program prog;
    try {
        prog = parse_program_file(file);
    } catch (const ParseError &e) {
        err << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        err << e.what() << "\n";
        return 4;
    }
    return check_all_defs(prog, mode, c.budget, c.json, out);
}

int cmd_run(const std::string &file, const Common &c, std::ostream &out, std::ostream &err) {
    bool mode_ok = true;
    OrthoMode mode = parse_mode(c.mode, err, mode_ok);
    if (!mode_ok) return 3;
    Program prog;
    try {
        prog = parse_program_file(file);
    } catch (const ParseError &e) {
        err << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        err << e.what() << "\n";
        return 4;
    }
    std::ostringstream sink;
    int rc = check_all_defs(prog, mode, c.budget, false, sink);
    if (rc) {
        err << sink.str();
        return 1;
    }
    try {
        SupRef main_sup = inline_defs(prog, "main");
        auto [value, trace] = eval(main_sup, c.budget >= 0 ? c.budget : default_budget(main_sup));
        if (c.trace) out << trace.format();
        out << sup_to_string(canonicalize(value).to_sup()) << "\n";
        out << "steps: " << trace.count() << "\n";
        return 0;
    } catch (const EvalError &e) {
        err << "evaluation failed: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        err << e.what() << "\n";
        return 4;
    }
}

int cmd_matrix(const std::string &file, int n, int k, const Common &c, std::ostream &out,
               std::ostream &err) {
    bool mode_ok = true;
    OrthoMode mode = parse_mode(c.mode, err, mode_ok);
    if (!mode_ok) return 3;
    Program prog;
    try {
        prog = parse_program_file(file);
    } catch (const std::exception &e) {
        err << e.what() << "\n";
        return 4;
    }
    std::ostringstream sink;
    if (check_all_defs(prog, mode, c.budget, false, sink)) {
        err << sink.str();
        return 1;
    }
    try {
        SupRef gate = inline_defs(prog, "main");
        QMatrix m = extract_matrix(gate, n, k, c.budget);
        out << m.to_json() << "\n";
        out << "classification: " << matrix_class_name(classify(m)) << "\n";
        return 0;
    } catch (const EvalError &e) {
        err << "evaluation failed: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        err << e.what() << "\n";
        return 2;
    }
}

int cmd_synth(const std::string &matrix_file, const std::string &out_file, std::ostream &out,
              std::ostream &err) {
    try {
        std::ifstream in(matrix_file);
        if (!in) {
            err << "cannot open " << matrix_file << "\n";
            return 4;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        QMatrix m = QMatrix::from_json(buf.str());
        int n = 0, k = 0;
        while ((static_cast<size_t>(1) << n) < m.cols) ++n;
        while ((static_cast<size_t>(1) << k) < m.rows) ++k;
        if ((static_cast<size_t>(1) << n) != m.cols || (static_cast<size_t>(1) << k) != m.rows) {
            err << "matrix dimensions must be powers of two\n";
            return 2;
        }
        SupRef term = synthesize(m, n, k);
        std::ofstream of(out_file);
        if (!of) {
            err << "cannot write " << out_file << "\n";
            return 4;
        }
        of << "def main : #(" << type_to_string(t_bools(n)) << ") -o #("
           << type_to_string(t_bools(k)) << ") = " << sup_to_string(term) << ";\n";
        out << "wrote " << out_file << "\n";
        return 0;
    } catch (const std::exception &e) {
        err << e.what() << "\n";
        return 2;
    }
}

int cmd_translate(const std::string &file, const Common &c, std::ostream &out, std::ostream &err) {
    bool mode_ok = true;
    OrthoMode mode = parse_mode(c.mode, err, mode_ok);
    if (!mode_ok) return 3;
    Program prog;
    try {
        prog = parse_program_file(file);
    } catch (const std::exception &e) {
        err << e.what() << "\n";
        return 4;
    }
    std::ostringstream sink;
    if (check_all_defs(prog, mode, c.budget, false, sink)) {
        err << sink.str();
        return 1;
    }
    try {
        SupRef main_sup = inline_defs(prog, "main");
        DlalTermSet set = translate(main_sup, c.budget);
        out << set.to_string() << "\n";
        if (c.trace) {
            DominationReport rep = step_domination_check(main_sup, c.budget);
            out << rep.format();
            if (!rep.ok) return 2;
        }
        return 0;
    } catch (const UntranslatableError &e) {
        err << "translation failed: " << e.what() << "\n";
        return 2;
    } catch (const EvalError &e) {
        err << "evaluation failed: " << e.what() << "\n";
        return 2;
    }
}

int cmd_bench(const std::string &file, const std::string &range, const Common &c,
              std::ostream &out, std::ostream &err) {
    bool mode_ok = true;
    OrthoMode mode = parse_mode(c.mode, err, mode_ok);
    if (!mode_ok) return 3;
    long lo = 1, hi = 1;
    {
        auto dots = range.find("..");
        if (dots == std::string::npos) {
            err << "range must look like 1..8\n";
            return 3;
        }
        lo = std::atol(range.substr(0, dots).c_str());
        hi = std::atol(range.substr(dots + 2).c_str());
        if (lo < 0 || hi < lo) {
            err << "bad range\n";
            return 3;
        }
    }
    Program prog;
    try {
        prog = parse_program_file(file);
    } catch (const std::exception &e) {
        err << e.what() << "\n";
        return 4;
    }
    const Def *dmain = prog.find("main");
    const Def *dinput = prog.find("input");
    if (!dmain || !dinput) {
        err << "bench needs defs 'main' (numeral-taking function) and 'input' (start state)\n";
        return 3;
    }
    std::ostringstream sink;
    if (check_all_defs(prog, mode, c.budget, false, sink)) {
        err << sink.str();
        return 1;
    }
    // result type: main : N -o (T -o T') applied twice
    TypeRef result_type;
    if (dmain->declared->tag == TypeTag::LinArrow &&
        dmain->declared->b->tag == TypeTag::LinArrow)
        result_type = dmain->declared->b->b;
    out << "param,punq_steps,dlal_steps,value_size\n";
    Checker checker(mode, &prog, c.budget);
    for (long p = lo; p <= hi; ++p) {
        SupRef program = mk_app(mk_app(sup_term(term_free("main")), church_numeral(p)),
                                sup_term(term_free("input")));
        if (result_type) {
            CheckResult r = checker.check(program, result_type);
            if (!r.ok) {
                err << "parameter " << p << " rejected: " << r.reason << "\n";
                return 1;
            }
        }
        SupRef closed = inline_defs_into(prog, program);
        try {
            long budget = c.budget >= 0 ? c.budget : default_budget(closed);
            auto [value, trace] = eval(closed, budget);
            DominationReport rep = step_domination_check(closed, budget);
            out << p << "," << trace.count() << "," << rep.dlal_steps << ","
                << sup_size(value) << "\n";
            if (!rep.ok) {
                err << "domination failed at parameter " << p << ": " << rep.message << "\n";
                return 2;
            }
        } catch (const EvalError &e) {
            err << "evaluation failed at parameter " << p << ": " << e.what() << "\n";
            return 2;
        } catch (const UntranslatableError &e) {
            err << "translation failed at parameter " << p << ": " << e.what() << "\n";
            return 2;
        }
    }
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"punq: type checker, evaluator, unitarity tools and DLAL translation"};
    app.require_subcommand(1);

    Common c;
    app.add_option("--mode", c.mode, "orthogonality mode: empty, times, untyped:<depth>");
    app.add_option("--budget", c.budget, "evaluation step budget");
    app.add_flag("--trace", c.trace, "print traces / domination reports");
    app.add_flag("--json", c.json, "machine-readable output");

    std::string file, range = "1..4", matrix_file, out_file;
    int n = 1, k = 1;

    CLI::App *check = app.add_subcommand("check", "type-check every definition in a file");
    check->add_option("file", file)->required();

    CLI::App *run = app.add_subcommand("run", "evaluate the program's main definition");
    run->add_option("file", file)->required();

    CLI::App *matrix = app.add_subcommand("matrix", "extract and classify main's matrix");
    matrix->add_option("file", file)->required();
    matrix->add_option("--n", n, "input qubits")->required();
    matrix->add_option("--k", k, "output qubits")->required();

    CLI::App *synth = app.add_subcommand("synth", "synthesize a program from a matrix JSON file");
    synth->add_option("matrix", matrix_file)->required();
    synth->add_option("-o,--out", out_file, "output .punq path")->required();

    CLI::App *translate = app.add_subcommand("translate", "translate main into a DLAL* term set");
    translate->add_option("file", file)->required();

    CLI::App *bench = app.add_subcommand("bench", "sweep a Church-numeral parameter, CSV output");
    bench->add_option("file", file)->required();
    bench->add_option("--range", range, "parameter range lo..hi");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << e.what() << "\n";
        return 3;
    }

    if (check->parsed()) return cmd_check(file, c, out, err);
    if (run->parsed()) return cmd_run(file, c, out, err);
    if (matrix->parsed()) return cmd_matrix(file, n, k, c, out, err);
    if (synth->parsed()) return cmd_synth(matrix_file, out_file, out, err);
    if (translate->parsed()) return cmd_translate(file, c, out, err);
    if (bench->parsed()) return cmd_bench(file, range, c, out, err);
    err << "no command\n";
    return 3;
}

} // namespace punq
