#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace netflux {

/// AST of the symbolic mini-language over variables s, t; binary + - * / ^;
/// unary -; calls sin, cos, exp, sqrt, abs; constant pi.
class Expression;
using ExprPtr = std::shared_ptr<const Expression>;

class Expression {
public:
    enum class Kind { Number, Variable, Unary, Binary, Call };

    Kind kind;
    double number = 0.0;     // Number
    char variable = 's';     // Variable: 's' or 't'
    char op = '+';           // Unary ('-') / Binary
    std::string callee;      // Call
    ExprPtr lhs, rhs;        // children (Unary/Call use lhs only)

    /// Evaluate at (s, t). Division by zero and sqrt of a negative raise
    /// ExpressionError instead of producing NaN/Inf.
    double evaluate(double s, double t) const;

    /// Parenthesised text form that re-parses to an identical tree.
    std::string to_string() const;

    bool identical(const Expression& other) const;
};

/// Parse with precedence ^ > unary - > * / > + -, left-associative except ^
/// (right-associative). Throws ExpressionError with a character position.
ExprPtr parse_expression(const std::string& text);

/// A config-level function value of (s, t), produced by the three-stage
/// resolution cascade: literal -> symbolic -> builtin library.
class ResolvedFunction {
public:
    enum class Kind { Literal, Symbolic, Builtin };

    ResolvedFunction() : ResolvedFunction(0.0) {}
    explicit ResolvedFunction(double constant);
    explicit ResolvedFunction(ExprPtr expr);
    ResolvedFunction(std::string name, std::function<double(double, double)> fn);

    double operator()(double s, double t) const;
    Kind kind() const { return kind_; }
    bool is_zero() const { return kind_ == Kind::Literal && constant_ == 0.0; }
    double constant() const { return constant_; }
    /// Textual form for config re-serialisation / diagnostics.
    std::string describe() const;

private:
    Kind kind_;
    double constant_ = 0.0;
    ExprPtr expr_;
    std::string name_;
    std::function<double(double, double)> builtin_;
};

/// Registry of named builtin profiles (stage 3 of the cascade).
/// Pre-populated with "zero" and "one"; problem modules may add more.
class BuiltinRegistry {
public:
    static BuiltinRegistry& instance();
    void register_builtin(const std::string& name, std::function<double(double, double)> fn);
    const std::function<double(double, double)>* find(const std::string& name) const;

private:
    BuiltinRegistry();
    std::map<std::string, std::function<double(double, double)>> fns_;
};

/// Three-stage resolution of a config value. Numbers (or strings that lex
/// entirely as one number) become literals; parsable expressions become
/// symbolic; exact builtin names come from the registry. Anything else
/// throws ConfigError carrying the stage-2 parse error.
ResolvedFunction resolve(const std::variant<double, std::string>& config_value);

}  // namespace netflux
