#pragma once

#include "nonterm/bytecode/ir.hpp"

#include <cctype>
#include <set>
#include <sstream>

namespace nonterm::bc {

class ParseError : public std::runtime_error {
public:
    ParseError(int line, int col, const std::string& msg)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg), line(line), col(col) {}
    int line, col;
};

namespace detail {

struct Token {
    enum class Kind { Ident, Number, Punct, End } kind = Kind::End;
    std::string text;
    int line = 1, col = 1;
};

inline std::vector<Token> tokenize(const std::string& src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto adv = [&] {
        if (src[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++i;
    };
    auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            adv();
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') adv();
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            t.kind = Token::Kind::Number;
            t.text += c;
            adv();
            while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) {
                t.text += src[i];
                adv();
            }
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
            t.kind = Token::Kind::Ident;
            while (i < src.size() && ident_char(src[i])) {
                t.text += src[i];
                adv();
            }
        } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
            t.kind = Token::Kind::Punct;
            t.text = "->";
            adv();
            adv();
        } else if (std::string("{}():;,.").find(c) != std::string::npos) {
            t.kind = Token::Kind::Punct;
            t.text = c;
            adv();
        } else {
            throw ParseError(line, col, std::string("unexpected character '") + c + "'");
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.line = line;
    end.col = col;
    out.push_back(end);
    return out;
}

class Parser {
public:
    explicit Parser(const std::string& src) : toks_(tokenize(src)) {}

    Program program() {
        Program p;
        std::set<std::string> methods, blocks, classes;
        while (peek().kind != Token::Kind::End) {
            const Token& t = peek();
            if (t.text == "class") {
                ClassDecl c = class_decl();
                if (!classes.insert(c.name).second) throw ParseError(t.line, t.col, "duplicate class " + c.name);
                p.classes.push_back(std::move(c));
            } else if (t.text == "method") {
                Method m = method(blocks);
                if (!methods.insert(m.sig.qualified()).second)
                    throw ParseError(t.line, t.col, "duplicate method " + m.sig.qualified());
                p.methods.push_back(std::move(m));
            } else {
                throw ParseError(t.line, t.col, "expected 'class' or 'method', found '" + t.text + "'");
            }
        }
        return p;
    }

private:
    const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    const Token& next() {
        const Token& t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    [[noreturn]] void fail(const Token& t, const std::string& msg) const { throw ParseError(t.line, t.col, msg); }
    void expect(const std::string& p) {
        const Token& t = next();
        if (t.text != p || t.kind == Token::Kind::End) fail(t, "expected '" + p + "', found '" + t.text + "'");
    }
    std::string ident(const char* what) {
        const Token& t = next();
        if (t.kind != Token::Kind::Ident) fail(t, std::string("expected ") + what + ", found '" + t.text + "'");
        return t.text;
    }
    int small_index() {
        const Token& t = next();
        if (t.kind != Token::Kind::Number || t.text[0] == '-') fail(t, "expected a non-negative index");
        if (t.text.size() > 6) fail(t, "index too large");
        return std::stoi(t.text);
    }

    SlotType type() {
        std::string n = ident("type");
        return n == "int" ? SlotType::integer() : SlotType::ref(n);
    }

    ClassDecl class_decl() {
        expect("class");
        ClassDecl c;
        c.name = ident("class name");
        expect("{");
        std::set<std::string> seen;
        while (peek().text != "}") {
            const Token& at = peek();
            Field f;
            f.name = ident("field name");
            expect(":");
            f.type = type();
            if (!seen.insert(f.name).second) fail(at, "duplicate field " + f.name);
            c.fields.push_back(std::move(f));
        }
        expect("}");
        return c;
    }

    MethodSig signature() {
        MethodSig s;
        s.cls = ident("class name");
        expect(".");
        s.name = ident("method name");
        expect("(");
        if (peek().text != ")") {
            s.params.push_back(type());
            while (peek().text == ",") {
                next();
                s.params.push_back(type());
            }
        }
        expect(")");
        expect(":");
        std::string r = ident("return type");
        if (r != "void") s.ret = r == "int" ? SlotType::integer() : SlotType::ref(r);
        return s;
    }

    Method method(std::set<std::string>& blocks) {
        const Token& start = peek();
        expect("method");
        Method m;
        m.line = start.line;
        if (peek().text == "static") {
            next();
            m.is_static = true;
        }
        m.sig = signature();
        expect("entry");
        m.entry = ident("entry block name");
        expect("{");
        while (peek().text == "block") {
            const Token& at = peek();
            Block b = block();
            if (!blocks.insert(b.name).second) fail(at, "duplicate block " + b.name);
            m.blocks.push_back(std::move(b));
        }
        expect("}");
        return m;
    }

    Block block() {
        const Token& at = next();  // 'block'
        Block b;
        b.line = at.line;
        b.name = ident("block name");
        expect("{");
        for (;;) {
            const Token& it = peek();
            Instruction ins = instruction();
            if (ins.op == Op::Call && !b.instructions.empty()) fail(it, "call not at block start");
            b.instructions.push_back(std::move(ins));
            if (peek().text == ";") {
                next();
                continue;
            }
            break;
        }
        expect("}");
        expect("->");
        while (peek().kind == Token::Kind::Ident && peek().text != "block") b.successors.push_back(next().text);
        return b;
    }

    Instruction instruction() {
        const Token& t = next();
        if (t.kind != Token::Kind::Ident) fail(t, "expected instruction, found '" + t.text + "'");
        const std::string& m = t.text;
        if (m == "const") {
            const Token& v = next();
            if (v.kind == Token::Kind::Ident && v.text == "null") return Instruction::const_null();
            if (v.kind != Token::Kind::Number) fail(v, "expected integer or null after const");
            return Instruction::constant(parse_int(v.text));
        }
        if (m == "dup") return Instruction::simple(Op::Dup);
        if (m == "add") return Instruction::simple(Op::Add);
        if (m == "pop") return Instruction::simple(Op::Pop);
        if (m == "new") return Instruction::make_new(ident("class name"));
        if (m == "load") return Instruction::load(small_index());
        if (m == "store") return Instruction::store(small_index());
        if (m == "putfield") {
            std::string c = ident("class name");
            expect(".");
            std::string f = ident("field name");
            expect(":");
            const Token& ft = peek();
            if (type() != SlotType::integer()) fail(ft, "putfield of a class-typed field is not supported");
            return Instruction::putfield(c, f);
        }
        if (m == "ifeq" || m == "ifne") {
            SlotType ty = type();
            return Instruction::guard(m == "ifeq" ? Op::IfEq : Op::IfNe, ty);
        }
        static const std::map<std::string, Op> int_guards = {
            {"iflt", Op::IfLt}, {"ifle", Op::IfLe}, {"ifgt", Op::IfGt}, {"ifge", Op::IfGe}};
        if (auto g = int_guards.find(m); g != int_guards.end()) {
            if (peek().kind == Token::Kind::Ident && (peek(1).text == ";" || peek(1).text == "}")) {
                const Token& ty = next();
                if (ty.text != "int") fail(ty, m + " applies to int only");
            }
            return Instruction::guard(g->second);
        }
        if (m == "call") {
            bool st = false;
            if (peek().text == "static") {
                next();
                st = true;
            }
            return Instruction::call(signature(), st);
        }
        fail(t, "unknown instruction mnemonic '" + m + "'");
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
};

}  // namespace detail

inline Program parse_program(const std::string& text) { return detail::Parser(text).program(); }

/// Canonical source text; parse_program(emit_program(p)) == p.
inline std::string emit_program(const Program& p) {
    std::ostringstream os;
    for (const auto& c : p.classes) {
        os << "class " << c.name << " {";
        for (const auto& f : c.fields) os << " " << f.name << ":" << f.type.str();
        os << " }\n";
    }
    for (const auto& m : p.methods) {
        os << "method " << (m.is_static ? "static " : "") << m.sig.str() << " entry " << m.entry << " {\n";
        for (const auto& b : m.blocks) {
            os << "  block " << b.name << " { ";
            for (size_t i = 0; i < b.instructions.size(); ++i) {
                if (i) os << " ; ";
                os << b.instructions[i].str();
            }
            os << " } ->";
            for (const auto& s : b.successors) os << " " << s;
            os << "\n";
        }
        os << "}\n";
    }
    return os.str();
}

}  // namespace nonterm::bc
