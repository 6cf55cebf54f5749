#include "grassdisagg/serial.hpp"

#include <charconv>
#include <sstream>

#include "grassdisagg/error.hpp"

namespace grassdisagg::serial {

std::string hex(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
    (void)ec;
    return std::string(buf, ptr);
}

double parse_hex(std::string_view token) {
    bool negative = false;
    if (!token.empty() && token.front() == '-') {
        negative = true;
        token.remove_prefix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v, std::chars_format::hex);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw Error(ErrorCode::ModelFormat, "bad hexfloat '" + std::string(token) + "'");
    return negative ? -v : v;
}

void Writer::line(std::string_view key, std::string_view value) { out_ << key << ' ' << value << '\n'; }

void Writer::number(std::string_view key, double v) { line(key, hex(v)); }

void Writer::integer(std::string_view key, std::uint64_t v) { out_ << key << ' ' << v << '\n'; }

void Writer::numbers(std::string_view key, std::span<const double> values) {
    out_ << key << ' ' << values.size();
    for (double v : values) out_ << ' ' << hex(v);
    out_ << '\n';
}

std::vector<std::string> Reader::expect(std::string_view key) {
    std::string raw;
    while (std::getline(in_, raw)) {
        ++line_;
        std::istringstream ss(raw);
        std::vector<std::string> tokens;
        for (std::string tok; ss >> tok;) tokens.push_back(tok);
        if (tokens.empty()) continue;
        if (tokens.front() != key)
            throw Error(ErrorCode::ModelFormat, "line " + std::to_string(line_) + ": expected '" + std::string(key) +
                                                    "', found '" + tokens.front() + "'");
        tokens.erase(tokens.begin());
        return tokens;
    }
    throw Error(ErrorCode::ModelFormat, "unexpected end of model file, expected '" + std::string(key) + "'");
}

std::string Reader::text(std::string_view key) {
    auto tokens = expect(key);
    if (tokens.size() != 1)
        throw Error(ErrorCode::ModelFormat, "line " + std::to_string(line_) + ": '" + std::string(key) +
                                                "' takes one value");
    return tokens.front();
}

double Reader::number(std::string_view key) { return parse_hex(text(key)); }

std::uint64_t Reader::integer(std::string_view key) {
    const std::string t = text(key);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw Error(ErrorCode::ModelFormat, "line " + std::to_string(line_) + ": bad integer '" + t + "'");
    return v;
}

std::vector<double> Reader::numbers(std::string_view key, std::size_t count) {
    auto tokens = expect(key);
    if (tokens.empty() || tokens.front() != std::to_string(count) || tokens.size() != count + 1)
        throw Error(ErrorCode::ModelFormat, "line " + std::to_string(line_) + ": '" + std::string(key) +
                                                "' must hold " + std::to_string(count) + " values");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = parse_hex(tokens[i + 1]);
    return out;
}

}  // namespace grassdisagg::serial
