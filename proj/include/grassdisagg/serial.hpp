#pragma once

// Line-oriented token format shared by the model files: each line is a key
// followed by whitespace-separated values. Doubles are written as hexfloats.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace grassdisagg::serial {

std::string hex(double v);
double parse_hex(std::string_view token);

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void line(std::string_view key, std::string_view value);
    void number(std::string_view key, double v);
    void integer(std::string_view key, std::uint64_t v);
    void numbers(std::string_view key, std::span<const double> values);

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Next non-empty line split into tokens; the first token must equal `key`.
    std::vector<std::string> expect(std::string_view key);
    std::string text(std::string_view key);
    double number(std::string_view key);
    std::uint64_t integer(std::string_view key);
    std::vector<double> numbers(std::string_view key, std::size_t count);

    std::size_t line_number() const { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

}  // namespace grassdisagg::serial
