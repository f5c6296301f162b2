#pragma once

#include <openssl/evp.h>

#include <iomanip>

#include "cqforce/engine/presentation.hpp"

namespace cqforce::engine {

inline constexpr const char* kGenericityNote =
    "generic for a finite prefix of an enumerated dense family; each listed request is met once, "
    "no claim is made about dense sets beyond the schedule";

/// Everything that determines a run. Identical descriptors give byte-identical certificates.
struct RunDescriptor {
    std::string poset;  // "pb", "qd" or "ea"
    Presentation presentation;
    json schedule = json{{"auto", 0}};  // {"auto": k} or {"requests": [...]}
    std::uint64_t seed = 0;
    std::size_t truncation = 512;
    int quantizer_bits = 40;
    int margin_exponent = 30;  // strict inequalities need slack 2^-margin_exponent
    std::size_t handle_count = 8;
    std::size_t horizon = 10000;
    double root_eps = 1.0;
    double alignment_angle = 0.0;

    Tolerances tolerances() const { return Tolerances{std::ldexp(1.0, -margin_exponent), 1e-9}; }
};

inline json descriptor_json(const RunDescriptor& d) {
    return json{{"format_version", kFormatVersion},
                {"poset", d.poset},
                {"presentation", presentation_json(d.presentation)},
                {"schedule", d.schedule},
                {"seed", d.seed},
                {"truncation", d.truncation},
                {"quantizer_bits", d.quantizer_bits},
                {"margin_exponent", d.margin_exponent},
                {"handle_count", d.handle_count},
                {"horizon", d.horizon},
                {"root_eps", dyadic(d.root_eps)},
                {"alignment_angle", dyadic(d.alignment_angle)}};
}

inline RunDescriptor read_descriptor(const json& j) {
    if (detail::get<int>(j, "format_version") != kFormatVersion) throw ValidationError("unsupported format_version");
    RunDescriptor d;
    d.poset = detail::get<std::string>(j, "poset");
    if (d.poset != "pb" && d.poset != "qd" && d.poset != "ea") throw ValidationError("unknown poset '" + d.poset + "'");
    d.presentation = read_presentation(detail::get<json>(j, "presentation"));
    d.schedule = detail::get<json>(j, "schedule");
    d.seed = detail::get<std::uint64_t>(j, "seed");
    d.truncation = detail::get<std::size_t>(j, "truncation");
    d.quantizer_bits = detail::get<int>(j, "quantizer_bits");
    d.margin_exponent = detail::get<int>(j, "margin_exponent");
    d.handle_count = detail::get<std::size_t>(j, "handle_count");
    d.horizon = detail::get<std::size_t>(j, "horizon");
    d.root_eps = read_dyadic(detail::get<json>(j, "root_eps"));
    d.alignment_angle = read_dyadic(detail::get<json>(j, "alignment_angle"));
    return d;
}

inline std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed");
    std::ostringstream s;
    for (unsigned int i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return s.str();
}

inline std::string run_hash(const RunDescriptor& d) { return sha256_hex(descriptor_json(d).dump()); }

/// "auto:k" or a schedule file holding {"format_version": 1, "requests": [...]}.
inline json load_schedule(const std::string& arg) {
    if (arg.rfind("auto:", 0) == 0) {
        try {
            const long k = std::stol(arg.substr(5));
            if (k < 0) throw ValidationError("auto:k needs k >= 0");
            return json{{"auto", k}};
        } catch (const std::logic_error&) {
            throw ValidationError("bad schedule '" + arg + "'");
        }
    }
    const json j = parse_json(read_file(arg));
    if (detail::get<int>(j, "format_version") != kFormatVersion) throw ValidationError("unsupported schedule format_version");
    return json{{"requests", detail::get<json>(j, "requests")}};
}

inline pres::HandleTable handle_table(const RunDescriptor& d) {
    return pres::enumerate_dense(d.presentation.algebra(), d.handle_count, d.seed);
}

}  // namespace cqforce::engine
