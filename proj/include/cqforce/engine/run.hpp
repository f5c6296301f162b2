#pragma once

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "cqforce/ea/construct.hpp"
#include "cqforce/engine/descriptor.hpp"
#include "cqforce/engine/verify.hpp"
#include "cqforce/pb/construct.hpp"
#include "cqforce/qd/construct.hpp"

namespace cqforce::engine {

namespace detail {

/// Handles [1, size) split into k consecutive runs, adjoints kept together.
inline std::vector<std::vector<pres::Handle>> handle_chunks(const pres::HandleTable& t, std::size_t k) {
    std::vector<std::vector<pres::Handle>> out(k);
    if (k == 0) return out;
    std::vector<pres::Handle> reps;
    for (pres::Handle h = 1; h < t.size(); ++h)
        if (t.star(h) >= h) reps.push_back(h);
    for (std::size_t i = 0; i < reps.size(); ++i) out[std::min(k - 1, i * k / std::max<std::size_t>(reps.size(), 1))].push_back(reps[i]);
    for (std::size_t s = 0; s < k; ++s)
        if (out[s].empty()) out[s].push_back(reps.empty() ? 0 : reps[s % reps.size()]);
    return out;
}

}  // namespace detail

/// The requests of a run, generated for auto schedules.
inline std::vector<json> expand_schedule(const RunDescriptor& d) {
    if (d.schedule.contains("requests")) {
        const auto& r = d.schedule.at("requests");
        if (!r.is_array()) throw ValidationError("requests must be an array");
        return std::vector<json>(r.begin(), r.end());
    }
    const auto k = detail::get<std::size_t>(d.schedule, "auto");
    std::vector<json> out;
    if (d.poset == "pb") {
        // atom i of the target enters at stage i mod k; the last stage reaches the horizon
        const auto target = d.presentation.boolean_algebra();
        std::vector<std::vector<boolean::Mask>> parts(k);
        for (std::size_t i = 0; i < target.atom_count() && k > 0; ++i) parts[i % k].push_back(target.atoms()[i]);
        for (std::size_t s = 0; s < k; ++s)
            out.push_back(json{{"elements", parts[s]}, {"n_min", s + 1 == k ? d.horizon : 0}});
        return out;
    }
    const auto t = handle_table(d);
    const auto chunks = detail::handle_chunks(t, k);
    const std::size_t block = d.presentation.algebra().block_size();
    for (std::size_t s = 0; s < k; ++s) {
        json r{{"handles", chunks[s]}, {"eps", dyadic(std::ldexp(d.root_eps, -static_cast<int>(s + 1)))}};
        if (d.poset == "ea") {
            r["h"] = block * (s + 1) + 1;
            r["R"] = 0;
        }
        out.push_back(r);
    }
    return out;
}

/// A built chain with its certificate.
struct Built {
    json certificate;
    Verification verification;
};

namespace detail {

inline json certificate(const RunDescriptor& d, json chain, const Verification& v, const std::vector<std::string>& labels) {
    json lines = json::array();
    for (const auto& x : v.diagnostics)
        lines.push_back(x.scope + " " + x.check + " " + (x.pass ? "PASS" : "FAIL") + (x.detail.empty() ? "" : " " + x.detail));
    return json{{"format_version", kFormatVersion},
                {"note", kGenericityNote},
                {"run", descriptor_json(d)},
                {"run_hash", run_hash(d)},
                {"poset", d.poset},
                {"handles", labels},
                {"chain", std::move(chain)},
                {"records", v.records},
                {"diagnostics", lines},
                {"verdict", v.pass() ? "PASS" : "FAIL"}};
}

template <class F>
auto at_stage(std::size_t stage, F&& f) {
    try {
        return f();
    } catch (const SlackExhausted& e) {
        throw SlackExhausted(e.constraint(), "stage " + std::to_string(stage) + ": " + e.detail());
    } catch (const SizeError& e) {
        throw SizeError("stage " + std::to_string(stage) + ": " + e.what());
    } catch (const UnsupportedPresentation& e) {
        throw UnsupportedPresentation("stage " + std::to_string(stage) + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError("stage " + std::to_string(stage) + ": " + e.what());
    } catch (const DomainError& e) {
        throw DomainError("stage " + std::to_string(stage) + ": " + e.what());
    }
}

inline std::vector<pres::Handle> read_handles(const json& r, const pres::HandleTable& t) {
    auto hs = get<std::vector<pres::Handle>>(r, "handles");
    for (auto h : hs) t.check(h);
    return hs;
}

}  // namespace detail

inline std::vector<pb::PBCondition> build_pb_chain(const RunDescriptor& d) {
    const auto target = d.presentation.boolean_algebra();
    std::vector<pb::PBCondition> chain{pb::pb_root(target.ambient())};
    const auto requests = expand_schedule(d);
    for (std::size_t s = 0; s < requests.size(); ++s)
        chain.push_back(detail::at_stage(s + 1, [&] {
            return pb::pb_extend(chain.back(), detail::get<std::vector<boolean::Mask>>(requests[s], "elements"),
                                 detail::get<std::size_t>(requests[s], "n_min"));
        }));
    return chain;
}

inline std::vector<qd::QDCondition> build_qd_chain(const RunDescriptor& d, const pres::HandleTable& t) {
    std::vector<qd::QDCondition> chain{qd::qd_root(t, d.root_eps)};
    const auto requests = expand_schedule(d);
    for (std::size_t s = 0; s < requests.size(); ++s)
        chain.push_back(detail::at_stage(s + 1, [&] {
            auto p = qd::qd_extend(t, chain.back(), detail::read_handles(requests[s], t),
                                   read_dyadic(detail::get<json>(requests[s], "eps")), d.quantizer_bits);
            if (p.n > d.truncation) throw SizeError("n = " + std::to_string(p.n) + " exceeds truncation");
            return p;
        }));
    return chain;
}

inline std::vector<ea::EACondition> build_ea_chain(const RunDescriptor& d, const pres::HandleTable& t) {
    std::vector<ea::EACondition> chain{ea::ea_root(t, d.root_eps, d.alignment_angle)};
    ea::BuildParams params;
    params.bits = d.quantizer_bits;
    params.truncation = d.truncation;
    params.tol = d.tolerances();
    const auto requests = expand_schedule(d);
    for (std::size_t s = 0; s < requests.size(); ++s)
        chain.push_back(detail::at_stage(s + 1, [&] {
            const auto& r = requests[s];
            const auto hsize = detail::get<std::size_t>(r, "h");
            std::vector<std::size_t> coords(hsize);
            for (std::size_t i = 0; i < hsize; ++i) coords[i] = i;
            const auto h = linalg::SpectralContraction::coordinate(hsize, {{linalg::Rational{1, 1}, coords}});
            return ea::ea_extend(t, chain.back(), detail::read_handles(r, t), read_dyadic(detail::get<json>(r, "eps")), h,
                                 linalg::BasisProjection{detail::get<std::size_t>(r, "R")}, params);
        }));
    return chain;
}

/// Builds the chain of the run, re-validates it with the checkers, and assembles the certificate.
inline Built build_chain(const RunDescriptor& d) {
    Built b;
    if (d.poset == "pb") {
        if (!d.presentation.is_boolean()) throw ValidationError("pb runs need a Boolean presentation");
        const auto chain = build_pb_chain(d);
        json cj = json::array();
        for (const auto& c : chain) cj.push_back(condition_json(c));
        b.verification = verify_pb(d.presentation.boolean_algebra(), chain, d.horizon);
        b.certificate = detail::certificate(d, std::move(cj), b.verification, {});
        return b;
    }
    const auto t = handle_table(d);
    std::vector<std::string> labels;
    for (pres::Handle h = 0; h < t.size(); ++h) labels.push_back(t.label(h));
    json cj = json::array();
    if (d.poset == "qd") {
        const auto chain = build_qd_chain(d, t);
        for (const auto& c : chain) cj.push_back(condition_json(c));
        b.verification = verify_qd(t, chain, d.truncation, d.tolerances());
    } else {
        const auto chain = build_ea_chain(d, t);
        for (const auto& c : chain) cj.push_back(condition_json(c));
        b.verification = verify_ea(t, chain, d.truncation, d.tolerances());
    }
    b.certificate = detail::certificate(d, std::move(cj), b.verification, labels);
    return b;
}

/// Canonical certificate bytes.
inline std::string certificate_text(const json& cert) { return cert.dump(1) + "\n"; }

/// Write-then-rename, so readers never see a partial file.
inline void write_atomic(const std::string& path, const std::string& data) {
    const std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write '" + tmp + "'");
        out << data;
        if (!out.flush()) throw ValidationError("cannot write '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ValidationError("cannot rename onto '" + path + "': " + ec.message());
    }
}

/// Conditions below a common base whose F sets form a sunflower: the base F
/// is the kernel and each member adds one adjoint pair of its own.
inline std::vector<ea::EACondition> sunflower_family(const pres::HandleTable& t, std::size_t count, double eps,
                                                     const ea::BuildParams& params = {}) {
    const std::size_t d = t.algebra().block_size();
    auto prefix = [](std::size_t n) {
        std::vector<std::size_t> c(n);
        for (std::size_t i = 0; i < n; ++i) c[i] = i;
        return linalg::SpectralContraction::coordinate(n, {{linalg::Rational{1, 1}, c}});
    };
    const auto root = ea::ea_root(t, 1.0);
    const auto base = ea::ea_extend(t, root, {1}, 0.5, prefix(d), linalg::BasisProjection{0}, params);
    std::vector<ea::EACondition> out;
    for (pres::Handle h = 1; h < t.size() && out.size() < count; ++h) {
        if (t.star(h) < h || std::binary_search(base.F.begin(), base.F.end(), h)) continue;
        out.push_back(ea::ea_extend(t, base, {h}, eps, prefix(2 * d), linalg::BasisProjection{0}, params));
    }
    if (out.size() < count) throw SizeError("handle table too small for " + std::to_string(count) + " petals");
    return out;
}

}  // namespace cqforce::engine
