#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <tuple>
#include <string>
#include <vector>

#include "cqforce/boolean.hpp"
#include "cqforce/linalg/operator.hpp"

namespace cqforce::pres {

using linalg::Matrix;
using linalg::Scalar;

/// Element of a finite-dimensional C*-algebra: one square matrix per block.
struct Element {
    std::vector<Matrix> blocks;
};

/// The algebra M_{n_1} + ... + M_{n_k}.
class FinDimCStar {
public:
    FinDimCStar() : dims_{1} {}
    explicit FinDimCStar(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
        if (dims_.empty()) throw ValidationError("algebra needs at least one block");
        for (auto d : dims_)
            if (d < 1) throw ValidationError("block sizes must be positive");
    }

    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    /// Size of the canonical faithful block (sum of block sizes).
    std::size_t block_size() const {
        std::size_t s = 0;
        for (auto d : dims_) s += d;
        return s;
    }
    /// Linear dimension of the algebra.
    std::size_t dimension() const {
        std::size_t s = 0;
        for (auto d : dims_) s += d * d;
        return s;
    }

    Element zero() const {
        Element e;
        for (auto d : dims_) e.blocks.push_back(Matrix::Zero(ix(d), ix(d)));
        return e;
    }
    Element unit() const {
        Element e;
        for (auto d : dims_) e.blocks.push_back(Matrix::Identity(ix(d), ix(d)));
        return e;
    }
    Element matrix_unit(std::size_t block, std::size_t i, std::size_t j) const {
        if (block >= dims_.size() || i >= dims_[block] || j >= dims_[block]) throw DomainError("matrix unit out of range");
        Element e = zero();
        e.blocks[block](ix(i), ix(j)) = 1.0;
        return e;
    }

    void validate(const Element& a) const {
        if (a.blocks.size() != dims_.size()) throw ValidationError("element has wrong block count");
        for (std::size_t i = 0; i < dims_.size(); ++i) {
            if (a.blocks[i].rows() != ix(dims_[i]) || a.blocks[i].cols() != ix(dims_[i]))
                throw ValidationError("element block has wrong size");
            if (!a.blocks[i].allFinite()) throw ValidationError("element has non-finite entries");
        }
    }

    Element add(Scalar lambda, const Element& a, Scalar mu, const Element& b) const {
        Element e;
        for (std::size_t i = 0; i < dims_.size(); ++i) e.blocks.push_back(lambda * a.blocks[i] + mu * b.blocks[i]);
        return e;
    }
    Element mul(const Element& a, const Element& b) const {
        Element e;
        for (std::size_t i = 0; i < dims_.size(); ++i) e.blocks.push_back(linalg::multiply(a.blocks[i], b.blocks[i]));
        return e;
    }
    Element star(const Element& a) const {
        Element e;
        for (const auto& b : a.blocks) e.blocks.push_back(b.adjoint());
        return e;
    }
    double norm(const Element& a) const {
        double n = 0.0;
        for (const auto& b : a.blocks) n = std::max(n, linalg::spectral_norm(b));
        return n;
    }
    /// Entries of all blocks, column-major, concatenated.
    linalg::Vector coordinates(const Element& a) const {
        linalg::Vector v(ix(dimension()));
        Eigen::Index k = 0;
        for (const auto& b : a.blocks)
            for (Eigen::Index j = 0; j < b.cols(); ++j)
                for (Eigen::Index i = 0; i < b.rows(); ++i) v(k++) = b(i, j);
        return v;
    }
    /// The block-diagonal faithful representation on C^{block_size()}.
    Matrix faithful_block(const Element& a) const {
        const auto d = ix(block_size());
        Matrix m = Matrix::Zero(d, d);
        Eigen::Index off = 0;
        for (const auto& b : a.blocks) {
            m.block(off, off, b.rows(), b.cols()) = b;
            off += b.rows();
        }
        return m;
    }
    bool approx_equal(const Element& a, const Element& b, double tol = 1e-12) const {
        const double scale = std::max({1.0, norm(a), norm(b)});
        for (std::size_t i = 0; i < dims_.size(); ++i)
            if ((a.blocks[i] - b.blocks[i]).cwiseAbs().maxCoeff() > tol * scale) return false;
        return true;
    }
    bool exactly_equal(const Element& a, const Element& b) const {
        for (std::size_t i = 0; i < dims_.size(); ++i)
            if (a.blocks[i] != b.blocks[i]) return false;
        return true;
    }

    friend bool operator==(const FinDimCStar& a, const FinDimCStar& b) { return a.dims_ == b.dims_; }

private:
    static Eigen::Index ix(std::size_t n) { return static_cast<Eigen::Index>(n); }
    std::vector<std::size_t> dims_;
};

using Handle = std::uint32_t;

/// Named elements of an algebra. Handle 0 is the unit; the table is closed
/// under adjoints and records the adjoint of every handle.
class HandleTable {
public:
    HandleTable() : HandleTable(FinDimCStar()) {}
    explicit HandleTable(FinDimCStar algebra) : algebra_(std::move(algebra)) {
        elements_.push_back(algebra_.unit());
        labels_.push_back("1");
        star_.push_back(0);
    }

    const FinDimCStar& algebra() const noexcept { return algebra_; }
    std::size_t size() const noexcept { return elements_.size(); }

    const Element& operator[](Handle h) const {
        check(h);
        return elements_[h];
    }
    const std::string& label(Handle h) const {
        check(h);
        return labels_[h];
    }
    Handle star(Handle h) const {
        check(h);
        return star_[h];
    }
    void check(Handle h) const {
        if (h >= elements_.size()) throw DomainError("invalid handle " + std::to_string(h));
    }

    /// Existing handle equal to x (up to 1e-12 relative), if any.
    std::optional<Handle> find(const Element& x) const {
        for (Handle h = 0; h < elements_.size(); ++h)
            if (algebra_.approx_equal(elements_[h], x)) return h;
        return std::nullopt;
    }

    /// Handle for x, adding x and then x* if they are new.
    Handle intern(const Element& x, const std::string& label) {
        algebra_.validate(x);
        if (auto h = find(x)) return *h;
        const Handle h = static_cast<Handle>(elements_.size());
        elements_.push_back(x);
        labels_.push_back(label);
        star_.push_back(h);
        const Element xs = algebra_.star(x);
        if (!algebra_.approx_equal(xs, x)) {
            const Handle hs = static_cast<Handle>(elements_.size());
            elements_.push_back(xs);
            labels_.push_back(label + "*");
            star_.push_back(h);
            star_[h] = hs;
        }
        return h;
    }

private:
    FinDimCStar algebra_;
    std::vector<Element> elements_;
    std::vector<std::string> labels_;
    std::vector<Handle> star_;
};

struct Expr {
    enum class Kind { Add, Mul, Star } kind;
    Handle a = 0;
    Handle b = 0;
    Scalar lambda{1.0, 0.0};
    Scalar mu{0.0, 0.0};

    static Expr add(Scalar l, Handle a, Scalar m, Handle b) { return {Kind::Add, a, b, l, m}; }
    static Expr mul(Handle a, Handle b) { return {Kind::Mul, a, b}; }
    static Expr star(Handle a) { return {Kind::Star, a, a}; }
};

inline Element algebra_eval(const HandleTable& t, const Expr& e) {
    const auto& A = t.algebra();
    switch (e.kind) {
        case Expr::Kind::Add: return A.add(e.lambda, t[e.a], e.mu, t[e.b]);
        case Expr::Kind::Mul: return A.mul(t[e.a], t[e.b]);
        case Expr::Kind::Star: return A.star(t[e.a]);
    }
    throw DomainError("unknown expression");
}

inline double algebra_norm(const FinDimCStar& A, const Element& a) { return A.norm(a); }

/// C^k with k the atom count of b; element x maps to the 0/1 diagonal of its atoms.
struct CommutativeModel {
    boolean::FiniteBooleanAlgebra source;
    FinDimCStar algebra;

    Element operator()(boolean::Mask x) const {
        const std::uint64_t code = source.encode(x);
        Element e = algebra.zero();
        for (std::size_t i = 0; i < source.atom_count(); ++i)
            if (code & (std::uint64_t{1} << i)) e.blocks[i](0, 0) = 1.0;
        return e;
    }
};

inline CommutativeModel commutative_from_boolean(const boolean::FiniteBooleanAlgebra& b) {
    return {b, FinDimCStar(std::vector<std::size_t>(b.atom_count(), 1))};
}

/// Deterministic star-closed enumeration: the unit, then matrix units block by
/// block in row-major order, then seeded (Q + iQ)-combinations of one to three
/// matrix units. Each new handle is followed by its adjoint.
inline HandleTable enumerate_dense(const FinDimCStar& A, std::size_t count, std::uint64_t seed) {
    if (count < 1) throw DomainError("count must be at least 1");
    HandleTable t(A);
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> units;
    for (std::size_t blk = 0; blk < A.dims().size(); ++blk)
        for (std::size_t i = 0; i < A.dims()[blk]; ++i)
            for (std::size_t j = 0; j < A.dims()[blk]; ++j) units.emplace_back(blk, i, j);
    for (const auto& [blk, i, j] : units) {
        if (t.size() >= count) return t;
        const std::string label = "e" + (A.dims().size() > 1 ? std::to_string(blk + 1) + ":" : std::string{}) +
                                  std::to_string(i + 1) + std::to_string(j + 1);
        t.intern(A.matrix_unit(blk, i, j), label);
    }
    std::mt19937_64 rng(seed);
    auto pick = [&](std::uint64_t n) { return static_cast<std::int64_t>(rng() % n); };
    std::size_t attempts = 0;
    while (t.size() < count && attempts < 100 * count) {
        ++attempts;
        Element x = A.zero();
        const std::size_t terms = 1 + static_cast<std::size_t>(pick(3));
        std::string label = "q";
        for (std::size_t k = 0; k < terms; ++k) {
            const auto& [blk, i, j] = units[static_cast<std::size_t>(pick(units.size()))];
            const double den = static_cast<double>(1 + pick(4));
            const Scalar c(static_cast<double>(pick(7) - 3) / den, static_cast<double>(pick(7) - 3) / den);
            x.blocks[blk](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += c;
        }
        if (A.norm(x) < 1e-9) continue;
        label += std::to_string(t.size());
        t.intern(x, label);
    }
    return t;
}

}  // namespace cqforce::pres
