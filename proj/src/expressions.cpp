#include "netflux/expressions.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "netflux/errors.hpp"

namespace netflux {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Token {
    enum class Type { Number, Ident, Op, LParen, RParen, End };
    Type type;
    double number = 0.0;
    std::string text;
    std::size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return cur_; }

    Token next() {
        Token t = cur_;
        advance();
        return t;
    }

private:
    void advance() {
        while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
        cur_.pos = i_;
        if (i_ >= text_.size()) {
            cur_.type = Token::Type::End;
            return;
        }
        const char c = text_[i_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            cur_.number = std::strtod(text_.c_str() + i_, &end);
            if (end == text_.c_str() + i_)
                throw ExpressionError("syntax error at position " + std::to_string(i_) + ": bad number");
            cur_.type = Token::Type::Number;
            i_ = static_cast<std::size_t>(end - text_.c_str());
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i_;
            while (j < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_'))
                ++j;
            cur_.type = Token::Type::Ident;
            cur_.text = text_.substr(i_, j - i_);
            i_ = j;
            return;
        }
        if (c == '(') {
            cur_.type = Token::Type::LParen;
        } else if (c == ')') {
            cur_.type = Token::Type::RParen;
        } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
            cur_.type = Token::Type::Op;
            cur_.text = std::string(1, c);
        } else {
            throw ExpressionError("syntax error at position " + std::to_string(i_) +
                                  ": unexpected character '" + std::string(1, c) + "'");
        }
        ++i_;
    }

    const std::string& text_;
    std::size_t i_ = 0;
    Token cur_;
};

bool is_known_call(const std::string& name) {
    return name == "sin" || name == "cos" || name == "exp" || name == "sqrt" || name == "abs";
}

ExprPtr make_number(double v) {
    auto e = std::make_shared<Expression>();
    e->kind = Expression::Kind::Number;
    e->number = v;
    return e;
}

class Parser {
public:
    explicit Parser(const std::string& text) : lex_(text) {}

    ExprPtr parse() {
        ExprPtr e = sum();
        if (lex_.peek().type != Token::Type::End)
            throw ExpressionError("syntax error at position " + std::to_string(lex_.peek().pos) +
                                  ": trailing input");
        return e;
    }

private:
    ExprPtr sum() {
        ExprPtr e = term();
        while (lex_.peek().type == Token::Type::Op &&
               (lex_.peek().text == "+" || lex_.peek().text == "-")) {
            const char op = lex_.next().text[0];
            auto n = std::make_shared<Expression>();
            n->kind = Expression::Kind::Binary;
            n->op = op;
            n->lhs = e;
            n->rhs = term();
            e = n;
        }
        return e;
    }

    ExprPtr term() {
        ExprPtr e = unary();
        while (lex_.peek().type == Token::Type::Op &&
               (lex_.peek().text == "*" || lex_.peek().text == "/")) {
            const char op = lex_.next().text[0];
            auto n = std::make_shared<Expression>();
            n->kind = Expression::Kind::Binary;
            n->op = op;
            n->lhs = e;
            n->rhs = unary();
            e = n;
        }
        return e;
    }

    ExprPtr unary() {
        if (lex_.peek().type == Token::Type::Op && lex_.peek().text == "-") {
            lex_.next();
            auto n = std::make_shared<Expression>();
            n->kind = Expression::Kind::Unary;
            n->op = '-';
            n->lhs = unary();
            return n;
        }
        return power();
    }

    ExprPtr power() {
        ExprPtr base = primary();
        if (lex_.peek().type == Token::Type::Op && lex_.peek().text == "^") {
            lex_.next();
            auto n = std::make_shared<Expression>();
            n->kind = Expression::Kind::Binary;
            n->op = '^';
            n->lhs = base;
            n->rhs = unary();  // right-associative, binds tighter than unary minus on the left
            return n;
        }
        return base;
    }

    ExprPtr primary() {
        Token t = lex_.next();
        switch (t.type) {
            case Token::Type::Number:
                return make_number(t.number);
            case Token::Type::Ident: {
                if (t.text == "s" || t.text == "t") {
                    auto e = std::make_shared<Expression>();
                    e->kind = Expression::Kind::Variable;
                    e->variable = t.text[0];
                    return e;
                }
                if (t.text == "pi") return make_number(kPi);
                if (is_known_call(t.text)) {
                    if (lex_.peek().type != Token::Type::LParen)
                        throw ExpressionError("syntax error at position " + std::to_string(t.pos) +
                                              ": '" + t.text + "' requires arguments");
                    lex_.next();
                    auto e = std::make_shared<Expression>();
                    e->kind = Expression::Kind::Call;
                    e->callee = t.text;
                    e->lhs = sum();
                    if (lex_.peek().type != Token::Type::RParen)
                        throw ExpressionError("syntax error at position " +
                                              std::to_string(lex_.peek().pos) + ": expected ')'");
                    lex_.next();
                    return e;
                }
                throw ExpressionError("unknown identifier '" + t.text + "' at position " +
                                      std::to_string(t.pos));
            }
            case Token::Type::LParen: {
                ExprPtr e = sum();
                if (lex_.peek().type != Token::Type::RParen)
                    throw ExpressionError("syntax error at position " + std::to_string(lex_.peek().pos) +
                                          ": expected ')'");
                lex_.next();
                return e;
            }
            default:
                throw ExpressionError("syntax error at position " + std::to_string(t.pos) +
                                      ": unexpected token");
        }
    }

    Lexer lex_;
};

}  // namespace

ExprPtr parse_expression(const std::string& text) {
    if (text.empty()) throw ExpressionError("empty expression");
    return Parser(text).parse();
}

double Expression::evaluate(double s, double t) const {
    switch (kind) {
        case Kind::Number:
            return number;
        case Kind::Variable:
            return variable == 's' ? s : t;
        case Kind::Unary:
            return -lhs->evaluate(s, t);
        case Kind::Binary: {
            const double a = lhs->evaluate(s, t);
            const double b = rhs->evaluate(s, t);
            switch (op) {
                case '+': return a + b;
                case '-': return a - b;
                case '*': return a * b;
                case '/':
                    if (b == 0.0) throw ExpressionError("domain error: division by zero");
                    return a / b;
                case '^': {
                    const double r = std::pow(a, b);
                    if (!std::isfinite(r))
                        throw ExpressionError("domain error: pow(" + std::to_string(a) + ", " +
                                              std::to_string(b) + ")");
                    return r;
                }
            }
            break;
        }
        case Kind::Call: {
            const double a = lhs->evaluate(s, t);
            if (callee == "sin") return std::sin(a);
            if (callee == "cos") return std::cos(a);
            if (callee == "exp") return std::exp(a);
            if (callee == "abs") return std::abs(a);
            if (callee == "sqrt") {
                if (a < 0.0) throw ExpressionError("domain error: sqrt of negative value");
                return std::sqrt(a);
            }
            break;
        }
    }
    throw ExpressionError("corrupt expression tree");
}

std::string Expression::to_string() const {
    std::ostringstream out;
    out.precision(17);
    switch (kind) {
        case Kind::Number:
            out << number;
            break;
        case Kind::Variable:
            out << variable;
            break;
        case Kind::Unary:
            out << "(-" << lhs->to_string() << ")";
            break;
        case Kind::Binary:
            out << "(" << lhs->to_string() << op << rhs->to_string() << ")";
            break;
        case Kind::Call:
            out << callee << "(" << lhs->to_string() << ")";
            break;
    }
    return out.str();
}

bool Expression::identical(const Expression& other) const {
    if (kind != other.kind) return false;
    switch (kind) {
        case Kind::Number:
            return number == other.number;
        case Kind::Variable:
            return variable == other.variable;
        case Kind::Unary:
            return lhs->identical(*other.lhs);
        case Kind::Binary:
            return op == other.op && lhs->identical(*other.lhs) && rhs->identical(*other.rhs);
        case Kind::Call:
            return callee == other.callee && lhs->identical(*other.lhs);
    }
    return false;
}

ResolvedFunction::ResolvedFunction(double constant)
    : kind_(Kind::Literal), constant_(constant) {}

ResolvedFunction::ResolvedFunction(ExprPtr expr) : kind_(Kind::Symbolic), expr_(std::move(expr)) {}

ResolvedFunction::ResolvedFunction(std::string name, std::function<double(double, double)> fn)
    : kind_(Kind::Builtin), name_(std::move(name)), builtin_(std::move(fn)) {}

double ResolvedFunction::operator()(double s, double t) const {
    switch (kind_) {
        case Kind::Literal: return constant_;
        case Kind::Symbolic: return expr_->evaluate(s, t);
        case Kind::Builtin: return builtin_(s, t);
    }
    return 0.0;
}

std::string ResolvedFunction::describe() const {
    switch (kind_) {
        case Kind::Literal: {
            std::ostringstream out;
            out.precision(17);
            out << constant_;
            return out.str();
        }
        case Kind::Symbolic: return expr_->to_string();
        case Kind::Builtin: return name_;
    }
    return {};
}

BuiltinRegistry::BuiltinRegistry() {
    fns_["zero"] = [](double, double) { return 0.0; };
    fns_["one"] = [](double, double) { return 1.0; };
}

BuiltinRegistry& BuiltinRegistry::instance() {
    static BuiltinRegistry reg;
    return reg;
}

void BuiltinRegistry::register_builtin(const std::string& name,
                                       std::function<double(double, double)> fn) {
    fns_[name] = std::move(fn);
}

const std::function<double(double, double)>* BuiltinRegistry::find(const std::string& name) const {
    auto it = fns_.find(name);
    return it == fns_.end() ? nullptr : &it->second;
}

namespace {

bool lexes_as_number(const std::string& text, double& value) {
    const char* begin = text.c_str();
    char* end = nullptr;
    value = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end && std::isspace(static_cast<unsigned char>(*end))) ++end;
    return *end == '\0';
}

}  // namespace

ResolvedFunction resolve(const std::variant<double, std::string>& config_value) {
    if (std::holds_alternative<double>(config_value))
        return ResolvedFunction(std::get<double>(config_value));

    const std::string& text = std::get<std::string>(config_value);
    double number;
    if (lexes_as_number(text, number)) return ResolvedFunction(number);

    std::string parse_error;
    try {
        return ResolvedFunction(parse_expression(text));
    } catch (const ExpressionError& e) {
        parse_error = e.what();
    }
    if (const auto* fn = BuiltinRegistry::instance().find(text)) return ResolvedFunction(text, *fn);
    throw ConfigError("unresolvable function '" + text + "' (" + parse_error +
                      "; not a registered builtin)");
}

}  // namespace netflux
