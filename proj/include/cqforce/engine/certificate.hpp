#pragma once

// Certificate verification. Only the descriptor, the serializers and the
// checkers are reachable from here; constructors are not.

#include "cqforce/engine/descriptor.hpp"
#include "cqforce/engine/verify.hpp"

namespace cqforce::engine {

/// Conditions of a stored certificate.
struct StoredChain {
    RunDescriptor run;
    std::vector<pb::PBCondition> pb;
    std::vector<qd::QDCondition> qd;
    std::vector<ea::EACondition> ea;
};

inline StoredChain read_chain(const json& cert) {
    StoredChain s;
    s.run = read_descriptor(detail::get<json>(cert, "run"));
    const auto chain = detail::get<json>(cert, "chain");
    if (!chain.is_array()) throw ValidationError("chain must be an array");
    for (const auto& c : chain) {
        if (s.run.poset == "pb") s.pb.push_back(read_pb_condition(c));
        if (s.run.poset == "qd") s.qd.push_back(read_qd_condition(c));
        if (s.run.poset == "ea") s.ea.push_back(read_ea_condition(c, s.run.presentation.algebra()));
    }
    return s;
}

/// Recomputes every check from the stored chain and compares against the stored records.
inline Verification verify_certificate(const std::string& text) {
    const json cert = parse_json(text);
    if (detail::get<int>(cert, "format_version") != kFormatVersion) throw ValidationError("unsupported format_version");
    const auto s = read_chain(cert);
    Verification v;
    if (s.run.poset == "pb") {
        v = verify_pb(s.run.presentation.boolean_algebra(), s.pb, s.run.horizon);
    } else {
        const auto t = handle_table(s.run);
        if (s.run.poset == "qd")
            v = verify_qd(t, s.qd, s.run.truncation, s.run.tolerances());
        else
            v = verify_ea(t, s.ea, s.run.truncation, s.run.tolerances());
    }
    const bool hash_ok = detail::get<std::string>(cert, "run_hash") == run_hash(s.run);
    v.add("certificate", "run_hash", hash_ok, hash_ok ? "" : "stored hash does not match the run descriptor");
    const bool records_ok = detail::get<json>(cert, "records") == v.records;
    v.add("certificate", "records", records_ok, records_ok ? "" : "stored records differ from recomputed values");
    const std::string stored = detail::get<std::string>(cert, "verdict");
    // The stored verdict must agree with the recomputed checks, excluding this line itself.
    const bool verdict_ok = stored == (v.pass() ? "PASS" : "FAIL");
    v.add("certificate", "verdict", verdict_ok, verdict_ok ? "" : "stored verdict " + stored + " disagrees");
    return v;
}

}  // namespace cqforce::engine
