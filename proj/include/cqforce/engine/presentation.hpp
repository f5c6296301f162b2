#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cqforce/boolean.hpp"
#include "cqforce/engine/format.hpp"
#include "cqforce/presentations.hpp"

namespace cqforce::engine {

/// Either a Boolean algebra (free on g generators, or generated by masks over
/// an ambient atom set) or a finite-dimensional algebra given by block sizes.
struct Presentation {
    std::string type;  // "free", "boolean" or "matrix"
    std::size_t generators = 0;
    std::size_t ambient = 0;
    std::vector<boolean::Mask> masks;
    std::vector<std::size_t> blocks;

    bool is_boolean() const { return type == "free" || type == "boolean"; }

    boolean::FiniteBooleanAlgebra boolean_algebra() const {
        if (type == "free") return boolean::free_boolean_algebra(generators).algebra;
        if (type == "boolean") return boolean::generate_subalgebra(ambient, masks);
        throw ValidationError("presentation is not a Boolean algebra");
    }

    pres::FinDimCStar algebra() const {
        if (type != "matrix") throw ValidationError("presentation is not a matrix algebra");
        return pres::FinDimCStar(blocks);
    }
};

inline json presentation_json(const Presentation& p) {
    json j{{"format_version", kFormatVersion}, {"type", p.type}};
    if (p.type == "free") j["generators"] = p.generators;
    if (p.type == "boolean") {
        j["ambient"] = p.ambient;
        j["masks"] = p.masks;
    }
    if (p.type == "matrix") j["blocks"] = p.blocks;
    return j;
}

inline Presentation read_presentation(const json& j) {
    Presentation p;
    p.type = detail::get<std::string>(j, "type");
    if (p.type == "free") {
        p.generators = detail::get<std::size_t>(j, "generators");
        boolean::free_boolean_algebra(p.generators);
    } else if (p.type == "boolean") {
        p.ambient = detail::get<std::size_t>(j, "ambient");
        p.masks = detail::get<std::vector<boolean::Mask>>(j, "masks");
        boolean::generate_subalgebra(p.ambient, p.masks);
    } else if (p.type == "matrix") {
        p.blocks = detail::get<std::vector<std::size_t>>(j, "blocks");
        (void)pres::FinDimCStar(p.blocks);
    } else {
        throw ValidationError("unknown presentation type '" + p.type + "'");
    }
    return p;
}

/// Whole-file JSON parse; syntax errors carry the byte offset.
inline json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// A JSON file, or one of the shorthands free:G, matrix:D1,D2,... and
/// boolean:M:MASK1,MASK2,... (masks in decimal or 0x hex).
inline Presentation load_presentation(const std::string& arg) {
    if (std::filesystem::exists(arg)) return read_presentation(parse_json(read_file(arg)));
    auto numbers = [&](const std::string& list) {
        std::vector<std::uint64_t> out;
        std::stringstream s(list);
        std::string item;
        while (std::getline(s, item, ',')) {
            try {
                out.push_back(std::stoull(item, nullptr, 0));
            } catch (const std::exception&) {
                throw ValidationError("bad number '" + item + "' in presentation '" + arg + "'");
            }
        }
        return out;
    };
    const auto colon = arg.find(':');
    if (colon == std::string::npos) throw ValidationError("presentation '" + arg + "' is neither a file nor a shorthand");
    const std::string kind = arg.substr(0, colon), rest = arg.substr(colon + 1);
    json j{{"type", kind}};
    if (kind == "free") {
        const auto v = numbers(rest);
        if (v.size() != 1) throw ValidationError("free:G takes one generator count");
        j["generators"] = v[0];
    } else if (kind == "matrix") {
        j["blocks"] = numbers(rest);
    } else if (kind == "boolean") {
        const auto c2 = rest.find(':');
        if (c2 == std::string::npos) throw ValidationError("boolean:M:MASKS expected");
        const auto m = numbers(rest.substr(0, c2));
        if (m.size() != 1) throw ValidationError("boolean:M:MASKS expected");
        j["ambient"] = m[0];
        j["masks"] = numbers(rest.substr(c2 + 1));
    }
    return read_presentation(j);
}

}  // namespace cqforce::engine
