#pragma once

#include <cmath>

#include "cqforce/linalg/dyadic.hpp"
#include "cqforce/qd/condition.hpp"

namespace cqforce::qd {

inline constexpr int kDefaultBits = 40;

namespace detail {

/// Quantized faithful block of a, shrunk just enough that quantization cannot
/// push its norm above ||a||. The unit stays the exact identity.
inline linalg::Matrix quantized_block(const pres::HandleTable& t, Handle h, int bits) {
    const auto& A = t.algebra();
    const linalg::Matrix block = A.faithful_block(t[h]);
    if (h == 0) return block;
    const double na = A.norm(t[h]);
    if (na == 0.0) return linalg::Matrix::Zero(block.rows(), block.cols());
    const double d = static_cast<double>(block.rows());
    const double slack = 4.0 * d * std::ldexp(1.0, -bits);
    const double scale = 1.0 - slack / na;
    if (!(scale > 0.5)) throw SlackExhausted("quantizer", "element norm too small for the quantizer resolution");
    return linalg::quantize(linalg::Matrix(scale * block), bits);
}

inline TruncatedOperator direct_sum(const TruncatedOperator& top, std::size_t n_top, const linalg::Matrix& block) {
    const auto n = static_cast<Eigen::Index>(n_top);
    linalg::Matrix m = linalg::Matrix::Zero(n + block.rows(), n + block.cols());
    m.topLeftCorner(n, n) = top.padded(n_top);
    m.bottomRightCorner(block.rows(), block.cols()) = block;
    return TruncatedOperator(std::move(m));
}

inline std::vector<Handle> merged(std::vector<Handle> a, const std::vector<Handle>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

}  // namespace detail

/// Root condition: F = {1}, psi(1) the identity on a single faithful block.
inline QDCondition qd_root(const pres::HandleTable& t, double eps) {
    if (!(eps > 0.0)) throw ValidationError("root eps must be positive");
    QDCondition p;
    p.F = {0};
    p.n = t.algebra().block_size();
    p.eps = eps;
    p.psi.emplace(0, TruncatedOperator::identity(p.n, linalg::Tail::Zero));
    return p;
}

/// Adjoins one quantized faithful block below q.
inline QDCondition qd_extend(const pres::HandleTable& t, const QDCondition& q, const std::vector<Handle>& F_new,
                             double eps_new, int bits = kDefaultBits) {
    if (!(eps_new > 0.0) || !(eps_new < q.eps)) throw ValidationError("eps_new must lie in (0, eps_q)");
    for (Handle h : F_new) t.check(h);
    QDCondition p;
    p.F = detail::merged(q.F, F_new);
    p.n = q.n + t.algebra().block_size();
    p.eps = eps_new;
    for (Handle h : p.F) {
        const auto base = q.has(h) ? q.at(h) : TruncatedOperator::zero(q.n);
        p.psi.emplace(h, detail::direct_sum(base, q.n, detail::quantized_block(t, h, bits)));
    }
    return p;
}

/// Common extension of p and q with eps_s = eps_p / 8.
inline QDCondition qd_amalgamate(const pres::HandleTable& t, const QDCondition& p, const QDCondition& q,
                                 int bits = kDefaultBits) {
    if (p.n != q.n) throw IncompatiblePresentation("length", "n_p != n_q");
    if (p.eps != q.eps) throw IncompatiblePresentation("eps", "eps_p != eps_q");
    for (Handle h : p.F)
        if (q.has(h) && !identical(p.at(h), q.at(h)))
            throw IncompatiblePresentation("agreement", "psi_p and psi_q differ on handle " + std::to_string(h));
    QDCondition s;
    s.F = detail::merged(p.F, q.F);
    s.n = p.n + t.algebra().block_size();
    s.eps = p.eps / 8.0;
    for (Handle h : s.F) {
        const auto& base = p.has(h) ? p.at(h) : q.at(h);
        s.psi.emplace(h, detail::direct_sum(base, p.n, detail::quantized_block(t, h, bits)));
    }
    return s;
}

}  // namespace cqforce::qd
