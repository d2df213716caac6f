#include "punq/parser.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

namespace punq {

namespace {

enum class Tok {
    Ket0, Ket1, KetPlus, KetMinus,
    Lambda, Dot, Colon, Comma, Semi, LParen, RParen,
    Plus, Minus, Star, Slash, Eq,
    If, Then, Else, Let, In, Def, Forall,
    ZeroVec, Sqrt2, ISqrt2, Imag, BoolType,
    LinArrow, ImpArrow, Hash, Dollar,
    Ident, Int, End,
};

struct Token {
    Tok kind;
    std::string text;
    int line, col;
};

struct Lexer {
    const std::string &src;
    size_t pos = 0;
    int line = 1, col = 1;

    explicit Lexer(const std::string &s) : src(s) {}

    [[noreturn]] void fail(const std::string &msg) const { throw ParseError(msg, line, col); }

    void advance(size_t n) {
        for (size_t i = 0; i < n && pos < src.size(); ++i, ++pos) {
            if (src[pos] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    }

    void skip_ws() {
        while (pos < src.size()) {
            char c = src[pos];
            if (c == '-' && pos + 1 < src.size() && src[pos + 1] == '-') {
                while (pos < src.size() && src[pos] != '\n') advance(1);
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance(1);
            } else {
                break;
            }
        }
    }

    bool starts_with(const char *s) const {
        size_t n = std::strlen(s);
        return src.compare(pos, n, s) == 0;
    }

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_ws();
            if (pos >= src.size()) {
                out.push_back({Tok::End, "", line, col});
                return out;
            }
            int l = line, c = col;
            auto push = [&](Tok k, const std::string &t, size_t n) {
                out.push_back({k, t, l, c});
                advance(n);
            };
            char ch = src[pos];
            if (ch == '|') {
                if (starts_with("|0>")) { push(Tok::Ket0, "|0>", 3); continue; }
                if (starts_with("|1>")) { push(Tok::Ket1, "|1>", 3); continue; }
                if (starts_with("|+>")) { push(Tok::KetPlus, "|+>", 3); continue; }
                if (starts_with("|->")) { push(Tok::KetMinus, "|->", 3); continue; }
                fail("bad ket literal");
            }
            if (starts_with("-o") && (pos + 2 >= src.size() || !std::isalnum(static_cast<unsigned char>(src[pos + 2])))) {
                push(Tok::LinArrow, "-o", 2);
                continue;
            }
            if (starts_with("=>")) { push(Tok::ImpArrow, "=>", 2); continue; }
            switch (ch) {
            case '\\': push(Tok::Lambda, "\\", 1); continue;
            case '.': push(Tok::Dot, ".", 1); continue;
            case ':': push(Tok::Colon, ":", 1); continue;
            case ',': push(Tok::Comma, ",", 1); continue;
            case ';': push(Tok::Semi, ";", 1); continue;
            case '(': push(Tok::LParen, "(", 1); continue;
            case ')': push(Tok::RParen, ")", 1); continue;
            case '+': push(Tok::Plus, "+", 1); continue;
            case '-': push(Tok::Minus, "-", 1); continue;
            case '*': push(Tok::Star, "*", 1); continue;
            case '/': push(Tok::Slash, "/", 1); continue;
            case '=': push(Tok::Eq, "=", 1); continue;
            case '#': push(Tok::Hash, "#", 1); continue;
            case '$': push(Tok::Dollar, "$", 1); continue;
            default: break;
            }
            if (std::isdigit(static_cast<unsigned char>(ch))) {
                size_t j = pos;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
                std::string digits = src.substr(pos, j - pos);
                if (digits == "0" && src.compare(j, 3, "vec") == 0) {
                    push(Tok::ZeroVec, "0vec", 4);
                } else {
                    push(Tok::Int, digits, digits.size());
                }
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
                size_t j = pos;
                while (j < src.size() &&
                       (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
                    ++j;
                std::string word = src.substr(pos, j - pos);
                Tok k = Tok::Ident;
                if (word == "if") k = Tok::If;
                else if (word == "then") k = Tok::Then;
                else if (word == "else") k = Tok::Else;
                else if (word == "let") k = Tok::Let;
                else if (word == "in") k = Tok::In;
                else if (word == "def") k = Tok::Def;
                else if (word == "forall") k = Tok::Forall;
                else if (word == "sqrt2") k = Tok::Sqrt2;
                else if (word == "isqrt2") k = Tok::ISqrt2;
                else if (word == "i") k = Tok::Imag;
                else if (word == "B") k = Tok::BoolType;
                push(k, word, word.size());
                continue;
            }
            fail(std::string("unexpected character '") + ch + "'");
        }
    }
};

struct Parser {
    std::vector<Token> toks;
    size_t at = 0;
    std::set<std::string> allowed_free;
    std::vector<std::string> term_scope; // innermost last
    std::vector<std::string> type_scope;

    const Token &peek(size_t ahead = 0) const {
        size_t i = at + ahead;
        return i < toks.size() ? toks[i] : toks.back();
    }
    const Token &next() {
        const Token &t = peek();
        if (t.kind != Tok::End) ++at;
        return t;
    }
    bool accept(Tok k) {
        if (peek().kind == k) {
            ++at;
            return true;
        }
        return false;
    }
    const Token &expect(Tok k, const char *what) {
        if (peek().kind != k) fail(std::string("expected ") + what);
        return toks[at++];
    }
    [[noreturn]] void fail(const std::string &msg) const {
        const Token &t = peek();
        std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(msg + ", got " + got, t.line, t.col);
    }

    // --- amplitudes ---

    bool amp_starts(size_t ahead = 0) const {
        switch (peek(ahead).kind) {
        case Tok::Int:
        case Tok::Sqrt2:
        case Tok::ISqrt2:
        case Tok::Imag: return true;
        case Tok::Minus: return amp_starts(ahead + 1);
        default: return false;
        }
    }

    Amplitude parse_amp_atom() {
        if (accept(Tok::Minus)) return -parse_amp_atom();
        const Token &t = peek();
        switch (t.kind) {
        case Tok::Int: {
            next();
            Rational q = parse_rational(t.text);
            if (accept(Tok::Slash)) {
                const Token &d = expect(Tok::Int, "denominator");
                Rational den = parse_rational(d.text);
                if (den == 0) fail("zero denominator");
                q /= den;
            }
            return Amplitude::rational(q);
        }
        case Tok::Sqrt2: next(); return Amplitude::sqrt2();
        case Tok::ISqrt2: next(); return Amplitude::inv_sqrt2();
        case Tok::Imag: next(); return Amplitude::imag_unit();
        case Tok::LParen: {
            next();
            Amplitude a = parse_amp_sum();
            expect(Tok::RParen, "')'");
            return a;
        }
        default: fail("expected amplitude");
        }
    }

    Amplitude parse_amp_product() {
        Amplitude a = parse_amp_atom();
        while (peek().kind == Tok::Star && (amp_starts(1) || peek(1).kind == Tok::LParen)) {
            // only fold a parenthesized factor if it truly parses as a scalar
            size_t save = at;
            ++at; // '*'
            try {
                Amplitude b = parse_amp_atom();
                a = a * b;
            } catch (const ParseError &) {
                at = save;
                break;
            }
        }
        return a;
    }

    Amplitude parse_amp_sum() {
        Amplitude a = parse_amp_product();
        while (true) {
            if (accept(Tok::Plus))
                a = a + parse_amp_product();
            else if (accept(Tok::Minus))
                a = a - parse_amp_product();
            else
                return a;
        }
    }

    // --- superpositions ---

    SupRef parse_sup() {
        SupRef s = parse_scaled();
        while (true) {
            if (accept(Tok::Plus)) {
                s = sup_sum(s, parse_scaled());
            } else if (peek().kind == Tok::Minus && peek(1).kind != Tok::End) {
                next();
                s = sup_sum(s, sup_scaled(Amplitude::of(-1), parse_scaled()));
            } else {
                return s;
            }
        }
    }

    // Either "amp * scaled" or a low form. A '(' may open a scalar
    // expression; resolved by backtracking on the requirement that a
    // scalar factor is followed by '*'.
    SupRef parse_scaled() {
        if (amp_starts()) {
            Amplitude a = parse_amp_product();
            expect(Tok::Star, "'*' after scalar");
            return sup_scaled(a, parse_scaled());
        }
        if (peek().kind == Tok::LParen) {
            size_t save = at;
            bool scalar_ok = true;
            Amplitude a;
            try {
                next();
                a = parse_amp_sum();
                expect(Tok::RParen, "')'");
                expect(Tok::Star, "'*'");
            } catch (const ParseError &) {
                scalar_ok = false;
                at = save;
            }
            if (scalar_ok) return sup_scaled(a, parse_scaled());
        }
        return parse_low();
    }

    SupRef parse_low() {
        const Token &t = peek();
        switch (t.kind) {
        case Tok::If: {
            next();
            SupRef c = parse_sup();
            expect(Tok::Then, "'then'");
            SupRef a = parse_sup();
            expect(Tok::Else, "'else'");
            SupRef b = parse_sup();
            return mk_if(c, a, b);
        }
        case Tok::Lambda: {
            next();
            const Token &id = expect(Tok::Ident, "binder name");
            std::optional<TypeRef> annot;
            if (accept(Tok::Colon)) annot = parse_type();
            expect(Tok::Dot, "'.'");
            term_scope.push_back(id.text);
            SupRef body = parse_sup();
            term_scope.pop_back();
            // In-scope names parse as Free and are rebound here; shadowing
            // resolves to the innermost binder since closes happen
            // innermost-first.
            return sup_term(term_lam(id.text, annot, bind_free(body, id.text, 0)));
        }
        case Tok::Let: {
            next();
            expect(Tok::LParen, "'('");
            const Token &x = expect(Tok::Ident, "binder name");
            expect(Tok::Comma, "','");
            const Token &y = expect(Tok::Ident, "binder name");
            expect(Tok::RParen, "')'");
            if (x.text == y.text) fail("pair destructor binds the same name twice");
            expect(Tok::Eq, "'='");
            SupRef scrut = parse_sup();
            expect(Tok::In, "'in'");
            term_scope.push_back(x.text);
            term_scope.push_back(y.text);
            SupRef body = parse_sup();
            term_scope.pop_back();
            term_scope.pop_back();
            body = bind_free(body, y.text, 0);
            body = bind_free(body, x.text, 1);
            return mk_let(x.text, y.text, scrut, body);
        }
        default: return parse_app_chain();
        }
    }

    SupRef parse_app_chain() {
        SupRef s = parse_atom();
        while (true) {
            switch (peek().kind) {
            case Tok::Ket0:
            case Tok::Ket1:
            case Tok::KetPlus:
            case Tok::KetMinus:
            case Tok::ZeroVec:
            case Tok::Ident:
            case Tok::LParen: s = mk_app(s, parse_atom()); break;
            default: return s;
            }
        }
    }

    SupRef parse_atom() {
        const Token &t = peek();
        switch (t.kind) {
        case Tok::Ket0: next(); return sup_term(term_ket0());
        case Tok::Ket1: next(); return sup_term(term_ket1());
        case Tok::KetPlus:
            next();
            return sup_sum(sup_scaled(Amplitude::inv_sqrt2(), sup_term(term_ket0())),
                           sup_scaled(Amplitude::inv_sqrt2(), sup_term(term_ket1())));
        case Tok::KetMinus:
            next();
            return sup_sum(sup_scaled(Amplitude::inv_sqrt2(), sup_term(term_ket0())),
                           sup_scaled(-Amplitude::inv_sqrt2(), sup_term(term_ket1())));
        case Tok::ZeroVec: next(); return sup_zero();
        case Tok::Ident: {
            next();
            for (auto it = term_scope.rbegin(); it != term_scope.rend(); ++it)
                if (*it == t.text) return sup_term(term_free(t.text)); // rebound on binder close
            if (!allowed_free.count(t.text))
                throw ParseError("unbound variable '" + t.text + "'", t.line, t.col);
            return sup_term(term_free(t.text));
        }
        case Tok::LParen: {
            next();
            SupRef first = parse_sup();
            if (accept(Tok::Comma)) {
                SupRef second = parse_sup();
                expect(Tok::RParen, "')'");
                return mk_pair(first, second);
            }
            expect(Tok::RParen, "')'");
            return first;
        }
        default: fail("expected a term");
        }
    }

    // --- types ---

    TypeRef parse_type() {
        if (accept(Tok::Forall)) {
            const Token &id = expect(Tok::Ident, "type variable");
            expect(Tok::Dot, "'.'");
            type_scope.push_back(id.text);
            TypeRef body = parse_type();
            type_scope.pop_back();
            return close_forall(body, id.text, id.text);
        }
        TypeRef a = parse_type_prod();
        if (accept(Tok::LinArrow)) return t_lin(a, parse_type());
        if (accept(Tok::ImpArrow)) return t_int(a, parse_type());
        return a;
    }

    TypeRef parse_type_prod() {
        TypeRef a = parse_type_prefix();
        if (peek().kind == Tok::Star) {
            next();
            return t_prod(a, parse_type_prod()); // right associative, B^n style
        }
        return a;
    }

    TypeRef parse_type_prefix() {
        if (accept(Tok::Hash)) {
            TypeRef q = parse_type_prefix();
            if (!is_ground(q)) fail("# needs a ground type argument");
            return t_sharp(q);
        }
        if (accept(Tok::Dollar)) return t_para(parse_type_prefix());
        return parse_type_atom();
    }

    TypeRef parse_type_atom() {
        const Token &t = peek();
        switch (t.kind) {
        case Tok::BoolType: next(); return t_bool();
        case Tok::Ident: {
            next();
            // in-scope forall variables stay free here and are closed by
            // close_forall when the binder finishes
            return t_free(t.text);
        }
        case Tok::LParen: {
            next();
            TypeRef inner = parse_type();
            expect(Tok::RParen, "')'");
            return inner;
        }
        default: fail("expected a type");
        }
    }

    // --- programs ---

    Program parse_program() {
        Program prog;
        while (peek().kind != Tok::End) {
            expect(Tok::Def, "'def'");
            const Token &id = expect(Tok::Ident, "definition name");
            expect(Tok::Colon, "':'");
            TypeRef ty = parse_type();
            expect(Tok::Eq, "'='");
            SupRef body = parse_sup();
            expect(Tok::Semi, "';'");
            if (prog.find(id.text)) fail("duplicate definition '" + id.text + "'");
            prog.defs.push_back(Def{id.text, ty, body});
            allowed_free.insert(id.text);
        }
        return prog;
    }
};

} // namespace

const Def *Program::find(const std::string &name) const {
    for (const auto &d : defs)
        if (d.name == name) return &d;
    return nullptr;
}

SupRef parse_sup(const std::string &source, const std::set<std::string> &allowed_free) {
    Lexer lex(source);
    Parser p{lex.run()};
    p.allowed_free = allowed_free;
    SupRef s = p.parse_sup();
    if (p.peek().kind != Tok::End) p.fail("trailing input");
    return s;
}

TypeRef parse_type(const std::string &source) {
    Lexer lex(source);
    Parser p{lex.run()};
    TypeRef t = p.parse_type();
    if (p.peek().kind != Tok::End) p.fail("trailing input");
    return t;
}

Amplitude parse_amplitude(const std::string &source) {
    Lexer lex(source);
    Parser p{lex.run()};
    Amplitude a = p.parse_amp_sum();
    if (p.peek().kind != Tok::End) p.fail("trailing input");
    return a;
}

Program parse_program(const std::string &source) {
    Lexer lex(source);
    Parser p{lex.run()};
    return p.parse_program();
}

Program parse_program_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_program(buf.str());
}

SupRef inline_defs_into(const Program &prog, SupRef s) {
    // later defs may reference earlier ones: substitute back-to-front
    for (auto it = prog.defs.rbegin(); it != prog.defs.rend(); ++it)
        s = subst_free_sup(s, it->name, it->body);
    return s;
}

SupRef inline_defs(const Program &prog, const std::string &name) {
    const Def *d = prog.find(name);
    if (!d) throw std::runtime_error("no definition named '" + name + "'");
    return inline_defs_into(prog, d->body);
}

} // namespace punq
