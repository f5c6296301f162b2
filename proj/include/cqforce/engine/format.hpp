#pragma once

#include <json.hpp>

#include "cqforce/ea/condition.hpp"
#include "cqforce/linalg/dyadic.hpp"
#include "cqforce/pb/condition.hpp"
#include "cqforce/qd/condition.hpp"

namespace cqforce::engine {

/// Keys come out sorted, so equal values serialize to equal bytes.
using json = nlohmann::json;

using linalg::Tail;
using linalg::TruncatedOperator;
using linalg::Matrix;

inline constexpr int kFormatVersion = 1;

namespace detail {

template <class T>
T get(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("field '") + key + "': " + e.what());
    }
}

}  // namespace detail

// ---- scalars and operators

/// [mantissa, exponent], exact for every finite double.
inline json dyadic(double x) {
    const auto d = linalg::to_dyadic(x);
    return json::array({d.mantissa, d.exponent});
}

/// Accepts a dyadic pair or, in hand-written input, a plain number.
inline double read_dyadic(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw ValidationError("expected a [mantissa, exponent] pair");
    return linalg::from_dyadic(j[0].get<std::int64_t>(), j[1].get<int>());
}

/// Sparse entries [i, j, re, im], column-major order.
inline json operator_json(const TruncatedOperator& t) {
    json entries = json::array();
    const auto& m = t.entries();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != linalg::Scalar(0.0, 0.0))
                entries.push_back(json::array({i, j, dyadic(m(i, j).real()), dyadic(m(i, j).imag())}));
    return json{{"dim", t.dim()}, {"tail", t.tail() == Tail::Zero ? "zero" : "identity"}, {"entries", entries}};
}

inline TruncatedOperator read_operator(const json& j) {
    const auto n = detail::get<std::size_t>(j, "dim");
    const auto tail = detail::get<std::string>(j, "tail");
    if (tail != "zero" && tail != "identity") throw ValidationError("tail must be 'zero' or 'identity'");
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (const auto& e : detail::get<json>(j, "entries")) {
        if (!e.is_array() || e.size() != 4) throw ValidationError("operator entry must be [i, j, re, im]");
        const auto r = e[0].get<std::size_t>(), c = e[1].get<std::size_t>();
        if (r >= n || c >= n) throw ValidationError("operator entry outside dimension");
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = linalg::Scalar(read_dyadic(e[2]), read_dyadic(e[3]));
    }
    return TruncatedOperator(std::move(m), tail == "zero" ? Tail::Zero : Tail::Identity);
}

inline json spectral_json(const linalg::SpectralContraction& h) {
    const auto form = h.coordinate_form();
    if (!form) throw UnsupportedPresentation("only coordinate-aligned spectral forms are serialized");
    json blocks = json::array();
    for (std::size_t i = 0; i < h.blocks().size(); ++i)
        blocks.push_back({{"value", json::array({h.blocks()[i].eigenvalue.num, h.blocks()[i].eigenvalue.den})},
                          {"coords", (*form)[i]}});
    return json{{"dim", h.dim()}, {"blocks", blocks}};
}

inline linalg::SpectralContraction read_spectral(const json& j) {
    std::vector<std::pair<linalg::Rational, std::vector<std::size_t>>> parts;
    for (const auto& b : detail::get<json>(j, "blocks")) {
        const auto v = detail::get<std::vector<std::int64_t>>(b, "value");
        if (v.size() != 2) throw ValidationError("eigenvalue must be [num, den]");
        parts.push_back({linalg::Rational{v[0], v[1]}, detail::get<std::vector<std::size_t>>(b, "coords")});
    }
    return linalg::SpectralContraction::coordinate(detail::get<std::size_t>(j, "dim"), parts);
}

// ---- conditions

inline json condition_json(const pb::PBCondition& p) {
    json psi = json::object();
    for (const auto& [e, v] : p.psi) psi[std::to_string(e)] = v.to_hex();
    return json{{"ambient", p.algebra.ambient()}, {"atoms", p.algebra.atoms()}, {"n", p.n}, {"psi", psi}};
}

inline pb::PBCondition read_pb_condition(const json& j) {
    pb::PBCondition p;
    p.algebra = boolean::FiniteBooleanAlgebra(detail::get<std::size_t>(j, "ambient"),
                                             detail::get<std::vector<boolean::Mask>>(j, "atoms"));
    p.n = detail::get<std::size_t>(j, "n");
    const auto psi = detail::get<json>(j, "psi");
    for (const auto& [k, v] : psi.items()) {
        boolean::Mask e = 0;
        try {
            e = std::stoull(k);
        } catch (const std::exception&) {
            throw ValidationError("psi key '" + k + "' is not an element");
        }
        p.psi.emplace(e, pb::Bits::from_hex(v.get<std::string>(), p.n));
    }
    p.validate();
    return p;
}

inline json psi_json(const std::map<pres::Handle, TruncatedOperator>& psi) {
    json out = json::object();
    for (const auto& [h, v] : psi) out[std::to_string(h)] = operator_json(v);
    return out;
}

inline std::map<pres::Handle, TruncatedOperator> read_psi(const json& j) {
    std::map<pres::Handle, TruncatedOperator> out;
    for (const auto& [k, v] : j.items()) {
        pres::Handle h = 0;
        try {
            h = static_cast<pres::Handle>(std::stoul(k));
        } catch (const std::exception&) {
            throw ValidationError("psi key '" + k + "' is not a handle");
        }
        out.emplace(h, read_operator(v));
    }
    return out;
}

inline json condition_json(const qd::QDCondition& p) {
    return json{{"F", p.F}, {"n", p.n}, {"eps", dyadic(p.eps)}, {"psi", psi_json(p.psi)}};
}

inline qd::QDCondition read_qd_condition(const json& j) {
    qd::QDCondition p;
    p.F = detail::get<std::vector<pres::Handle>>(j, "F");
    p.n = detail::get<std::size_t>(j, "n");
    p.eps = read_dyadic(detail::get<json>(j, "eps"));
    p.psi = read_psi(detail::get<json>(j, "psi"));
    return p;
}

inline json condition_json(const ea::EACondition& p) {
    json out{{"F", p.F}, {"eps", dyadic(p.eps)}, {"h", spectral_json(p.h)}, {"R", p.R.n}, {"psi", psi_json(p.psi)}};
    if (p.promise)
        out["promise"] = json{{"k", spectral_json(p.promise->k)}, {"alignment", operator_json(p.promise->phi.alignment())}};
    return out;
}

inline ea::EACondition read_ea_condition(const json& j, const pres::FinDimCStar& A) {
    ea::EACondition p;
    p.F = detail::get<std::vector<pres::Handle>>(j, "F");
    p.eps = read_dyadic(detail::get<json>(j, "eps"));
    p.h = read_spectral(detail::get<json>(j, "h"));
    p.R = linalg::BasisProjection{detail::get<std::size_t>(j, "R")};
    p.psi = read_psi(detail::get<json>(j, "psi"));
    if (j.contains("promise")) {
        const auto& pr = j.at("promise");
        p.promise = ea::Promise{read_spectral(detail::get<json>(pr, "k")),
                                ea::LazyRepresentation(A, read_operator(detail::get<json>(pr, "alignment")))};
    }
    return p;
}

/// Report lines of a checker, one per violation.
inline json report_json(const CheckReport& r) {
    json v = json::array();
    for (const auto& x : r.violations) v.push_back(json{{"clause", x.clause}, {"detail", x.detail}});
    return json{{"holds", r.holds()}, {"violations", v}};
}

}  // namespace cqforce::engine
