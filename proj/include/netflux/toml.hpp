#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace netflux::toml {

/// Minimal TOML reader covering the configuration schema: tables
/// ([a.b], [a."quoted"]), key = value pairs with basic strings, integers,
/// floats, booleans, arrays, and inline tables. No dates, multi-line
/// strings, or arrays of tables.
class Value;
using Table = std::map<std::string, Value>;
using Array = std::vector<Value>;

class Value {
public:
    using Storage = std::variant<bool, std::int64_t, double, std::string, Array, Table>;

    Value() : v_(Table{}) {}
    Value(Storage v) : v_(std::move(v)) {}

    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
    bool is_float() const { return std::holds_alternative<double>(v_); }
    bool is_number() const { return is_int() || is_float(); }
    bool is_string() const { return std::holds_alternative<std::string>(v_); }
    bool is_array() const { return std::holds_alternative<Array>(v_); }
    bool is_table() const { return std::holds_alternative<Table>(v_); }

    bool as_bool() const { return std::get<bool>(v_); }
    double as_number() const {
        return is_int() ? static_cast<double>(std::get<std::int64_t>(v_)) : std::get<double>(v_);
    }
    std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
    const std::string& as_string() const { return std::get<std::string>(v_); }
    const Array& as_array() const { return std::get<Array>(v_); }
    const Table& as_table() const { return std::get<Table>(v_); }
    Table& as_table() { return std::get<Table>(v_); }

    const Value* find(const std::string& key) const {
        if (!is_table()) return nullptr;
        auto it = as_table().find(key);
        return it == as_table().end() ? nullptr : &it->second;
    }

private:
    Storage v_;
};

/// Parse TOML text; throws ConfigError with a line number on malformed input.
Value parse(const std::string& text);

}  // namespace netflux::toml
