#include "netflux/toml.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "netflux/errors.hpp"

namespace netflux::toml {

namespace {

struct Cursor {
    const std::string& text;
    std::size_t i = 0;
    int line = 1;

    bool eof() const { return i >= text.size(); }
    char peek() const { return text[i]; }
    char get() {
        char c = text[i++];
        if (c == '\n') ++line;
        return c;
    }
    void skip_ws_inline() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++i;
    }
    void skip_ws_and_comments() {
        while (!eof()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                get();
            } else if (c == '#') {
                while (!eof() && peek() != '\n') ++i;
            } else {
                break;
            }
        }
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("toml: line " + std::to_string(line) + ": " + msg);
    }
};

std::string parse_basic_string(Cursor& c) {
    c.get();  // opening quote
    std::string out;
    while (true) {
        if (c.eof()) c.fail("unterminated string");
        char ch = c.get();
        if (ch == '"') return out;
        if (ch == '\\') {
            if (c.eof()) c.fail("unterminated escape");
            char e = c.get();
            switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: c.fail(std::string("unsupported escape '\\") + e + "'");
            }
        } else {
            out += ch;
        }
    }
}

std::string parse_key(Cursor& c) {
    c.skip_ws_inline();
    if (c.eof()) c.fail("expected key");
    if (c.peek() == '"') return parse_basic_string(c);
    std::string out;
    while (!c.eof() &&
           (std::isalnum(static_cast<unsigned char>(c.peek())) || c.peek() == '_' || c.peek() == '-'))
        out += c.get();
    if (out.empty()) c.fail("expected key");
    return out;
}

Value parse_value(Cursor& c);

Value parse_array(Cursor& c) {
    c.get();  // '['
    Array arr;
    while (true) {
        c.skip_ws_and_comments();
        if (c.eof()) c.fail("unterminated array");
        if (c.peek() == ']') {
            c.get();
            return Value(std::move(arr));
        }
        arr.push_back(parse_value(c));
        c.skip_ws_and_comments();
        if (!c.eof() && c.peek() == ',') c.get();
    }
}

Value parse_inline_table(Cursor& c) {
    c.get();  // '{'
    Table tbl;
    c.skip_ws_inline();
    if (!c.eof() && c.peek() == '}') {
        c.get();
        return Value(std::move(tbl));
    }
    while (true) {
        std::string key = parse_key(c);
        c.skip_ws_inline();
        if (c.eof() || c.get() != '=') c.fail("expected '=' in inline table");
        c.skip_ws_inline();
        tbl[key] = parse_value(c);
        c.skip_ws_inline();
        if (c.eof()) c.fail("unterminated inline table");
        char ch = c.get();
        if (ch == '}') return Value(std::move(tbl));
        if (ch != ',') c.fail("expected ',' or '}' in inline table");
        c.skip_ws_inline();
    }
}

Value parse_scalar(Cursor& c) {
    std::string tok;
    while (!c.eof()) {
        const char ch = c.peek();
        if (ch == '\n' || ch == '#' || ch == ',' || ch == ']' || ch == '}') break;
        tok += c.get();
    }
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
        tok.pop_back();
    if (tok == "true") return Value(true);
    if (tok == "false") return Value(false);
    if (tok.empty()) c.fail("expected value");

    // Integer if it lexes entirely as one; float otherwise.
    std::string plain = tok;
    plain.erase(std::remove(plain.begin(), plain.end(), '_'), plain.end());
    {
        char* end = nullptr;
        const long long iv = std::strtoll(plain.c_str(), &end, 10);
        if (end == plain.c_str() + plain.size())
            return Value(static_cast<std::int64_t>(iv));
    }
    {
        char* end = nullptr;
        const double dv = std::strtod(plain.c_str(), &end);
        if (end == plain.c_str() + plain.size()) return Value(dv);
    }
    c.fail("bad value '" + tok + "' (strings must be quoted)");
}

Value parse_value(Cursor& c) {
    c.skip_ws_inline();
    if (c.eof()) c.fail("expected value");
    const char ch = c.peek();
    if (ch == '"') return Value(parse_basic_string(c));
    if (ch == '[') return parse_array(c);
    if (ch == '{') return parse_inline_table(c);
    return parse_scalar(c);
}

Table* descend(Table& root, const std::vector<std::string>& path, Cursor& c) {
    Table* tbl = &root;
    for (const auto& key : path) {
        auto it = tbl->find(key);
        if (it == tbl->end()) it = tbl->emplace(key, Value(Table{})).first;
        if (!it->second.is_table()) c.fail("key '" + key + "' is not a table");
        tbl = &it->second.as_table();
    }
    return tbl;
}

}  // namespace

Value parse(const std::string& text) {
    Cursor c{text};
    Value root{Table{}};
    Table* current = &root.as_table();
    while (true) {
        c.skip_ws_and_comments();
        if (c.eof()) break;
        if (c.peek() == '[') {
            c.get();
            std::vector<std::string> path;
            while (true) {
                path.push_back(parse_key(c));
                c.skip_ws_inline();
                if (c.eof()) c.fail("unterminated table header");
                const char ch = c.get();
                if (ch == ']') break;
                if (ch != '.') c.fail("expected '.' or ']' in table header");
            }
            current = descend(root.as_table(), path, c);
        } else {
            std::vector<std::string> path{parse_key(c)};
            c.skip_ws_inline();
            while (!c.eof() && c.peek() == '.') {
                c.get();
                path.push_back(parse_key(c));
                c.skip_ws_inline();
            }
            if (c.eof() || c.get() != '=') c.fail("expected '=' after key");
            Table* tbl = current;
            if (path.size() > 1) {
                std::vector<std::string> prefix(path.begin(), path.end() - 1);
                tbl = descend(*current, prefix, c);
            }
            if (tbl->count(path.back())) c.fail("duplicate key '" + path.back() + "'");
            (*tbl)[path.back()] = parse_value(c);
        }
    }
    return root;
}

}  // namespace netflux::toml
