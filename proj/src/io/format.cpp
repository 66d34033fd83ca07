#include "sgrl/io/format.hpp"

#include "sgrl/errors.hpp"

#include <charconv>
#include <system_error>

namespace sgrl::io {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                   std::chars_format::general, 17);
    if (res.ec != std::errc())
        throw ParseError("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw ParseError("parse_double: invalid number '" + s + "'");
    return v;
}

} // namespace sgrl::io
