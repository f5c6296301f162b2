// Acceptance run: one PASS/FAIL line per criterion with the measured quantities
// and runtime. The only argument is the path of the cqforce executable, used by
// the determinism criterion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>

#include "cqforce/combinatorics.hpp"
#include "cqforce/ea.hpp"
#include "cqforce/engine.hpp"
#include "cqforce/pb.hpp"
#include "cqforce/qd.hpp"

using namespace cqforce;
using linalg::Matrix;
using linalg::Scalar;
using linalg::TruncatedOperator;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = "first failure: " + what + "; " + detail;
        pass = pass && ok;
    }
};

int failures = 0;

void criterion(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_s > 0 && secs >= limit_s) {
        out.pass = false;
        out.detail += " runtime over limit";
    }
    char time[64];
    std::snprintf(time, sizeof time, "%.2fs", secs);
    std::cout << "[" << (out.pass ? "PASS" : "FAIL") << "] " << id << " " << name << " (" << time
              << (limit_s > 0 ? " < " + std::to_string(static_cast<int>(limit_s)) + "s" : std::string()) << ") "
              << out.detail << std::endl;
    if (!out.pass) ++failures;
}

std::string fmt(double x) { return qd::fmt(x); }

// ---- 1

Outcome pb_soundness() {
    Outcome o;
    engine::RunDescriptor d;
    d.poset = "pb";
    d.presentation = engine::load_presentation("free:3");
    d.schedule = engine::load_schedule("auto:6");
    d.horizon = 10000;
    const auto b = engine::build_chain(d);
    const auto& r = b.verification.records;
    o.require(b.verification.pass(), "verification");
    o.require(r.at("elements").get<std::size_t>() == 256, "256 elements");
    o.require(b.certificate.at("chain").size() == 7, "6 stages");
    o.require(r.at("defined").get<std::size_t>() == 10000, "defined up to horizon");
    for (const char* k : {"max_complement_excess", "max_meet_excess", "max_join_excess", "max_order_excess"})
        o.require(r.at(k).get<std::int64_t>() <= 0, k);
    o.require(r.at("min_disagreement").get<std::size_t>() >= 1, "disagreement in every segment");
    o.detail += "elements 256, defined " + std::to_string(r.at("defined").get<std::size_t>()) + ", min disagreement " +
                std::to_string(r.at("min_disagreement").get<std::size_t>()) + ", max excess " +
                std::to_string(std::max({r.at("max_complement_excess").get<std::int64_t>(), r.at("max_meet_excess").get<std::int64_t>(),
                                         r.at("max_join_excess").get<std::int64_t>(), r.at("max_order_excess").get<std::int64_t>()}));
    return o;
}

// ---- 2

Outcome pb_transitivity() {
    Outcome o;
    std::mt19937_64 rng(11);
    std::size_t checks = 0, failed = 0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t m = 1 + rng() % 16;
        const auto root = pb::pb_root(m);
        const auto q = pb::pb_extend(root, {rng() & boolean::full_mask(m)}, rng() % 20);
        const auto p = pb::pb_extend(q, {rng() & boolean::full_mask(m), rng() & boolean::full_mask(m)}, rng() % 40);
        for (const auto& [a, b] : {std::pair{&q, &root}, std::pair{&p, &q}, std::pair{&p, &root}}) {
            ++checks;
            if (!pb::pb_order_check(*a, *b).holds()) ++failed;
        }
    }
    o.require(failed == 0, "order checks");

    const auto base = pb::pb_extend(pb::pb_root(16), {0x00ff}, 4);
    std::vector<pb::PBCondition> conds;
    for (int i = 0; i < 1000; ++i) conds.push_back(pb::pb_extend(base, {rng() & 0xffff}, 30 + rng() % 2));
    // Delta-system on the element sets, then uniformize length and psi on the kernel
    std::vector<std::vector<boolean::Mask>> elements;
    for (const auto& c : conds) elements.push_back(c.algebra.elements());
    const auto ds = comb::delta_system_extract(elements, 40);
    std::vector<pb::PBCondition> members;
    for (auto i : ds.members) members.push_back(conds[i]);
    const auto bucket = comb::uniformize(members, [&](const pb::PBCondition& c) {
        std::vector<std::string> kernel{std::to_string(c.n)};
        for (auto e : ds.root) kernel.push_back(c.psi.at(e).to_hex());
        return kernel;
    });
    conds = members;
    std::size_t pairs = 0, amalgam_failures = 0;
    for (std::size_t i = 0; i < bucket.size() && pairs < 200; ++i)
        for (std::size_t j = i + 1; j < bucket.size() && pairs < 200; ++j) {
            ++pairs;
            const auto& a = conds[bucket[i]];
            const auto& b = conds[bucket[j]];
            try {
                const auto s = pb::pb_amalgamate(a, b);
                if (!pb::pb_order_check(s, a).holds() || !pb::pb_order_check(s, b).holds()) ++amalgam_failures;
            } catch (const Error&) {
                ++amalgam_failures;
            }
        }
    o.require(pairs == 200, "200 pairs");
    o.require(amalgam_failures == 0, "amalgamations");
    o.detail += "delta system " + std::to_string(ds.members.size()) + ", bucket " + std::to_string(bucket.size()) + "; ";
    o.detail += std::to_string(checks) + " order checks, " + std::to_string(failed) + " failures; " + std::to_string(pairs) +
                " amalgams, " + std::to_string(amalgam_failures) + " failures";
    return o;
}

// ---- 3

Matrix small_unitary(std::mt19937_64& rng, Eigen::Index n, Eigen::Index fixed, double size) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix x = Matrix::Zero(n, n);
    for (Eigen::Index i = fixed; i < n; ++i)
        for (Eigen::Index j = fixed; j <= i; ++j) {
            const Scalar z(g(rng), i == j ? 0.0 : g(rng));
            x(i, j) = z;
            x(j, i) = std::conj(z);
        }
    const double nx = linalg::spectral_norm(x);
    if (nx > 0) x *= size / nx;
    Eigen::SelfAdjointEigenSolver<Matrix> es(x);
    linalg::Vector phases(n);
    for (Eigen::Index i = 0; i < n; ++i) phases(i) = std::exp(Scalar(0.0, es.eigenvalues()(i)));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Outcome perturbation_lemma() {
    Outcome o;
    std::mt19937_64 rng(2025);
    double worst_unitary = 0, worst_range = 0, worst_fixed = 0, worst_ratio = 0;
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<Eigen::Index>(2 + rng() % 31);
        const auto r = static_cast<Eigen::Index>(1 + rng() % static_cast<std::uint64_t>(n - 1));
        const auto k = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(r));
        const double eps = 0.05 + 0.5 * static_cast<double>(rng() % 1000) / 1000.0;
        std::vector<std::size_t> coords(static_cast<std::size_t>(r));
        for (Eigen::Index i = 0; i < r; ++i) coords[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
        // T in general position for odd trials; S tilted from T by a unitary fixing k vectors of T
        const Matrix v = trial % 2 ? small_unitary(rng, n, 0, 3.0) : Matrix(Matrix::Identity(n, n));
        const Matrix t0 = TruncatedOperator::coordinate_projection(static_cast<std::size_t>(n), coords).entries();
        const double bound = linalg::admissibility_bound(eps, static_cast<std::size_t>(r));
        const Matrix w = small_unitary(rng, n, k, (0.05 + 0.9 * static_cast<double>(rng() % 1000) / 1000.0) * bound);
        Matrix t = v * t0 * v.adjoint();
        t = 0.5 * (t + t.adjoint());
        Matrix s = v * w * t0 * w.adjoint() * v.adjoint();
        s = 0.5 * (s + s.adjoint());
        if (linalg::spectral_norm(t - s) >= bound) continue;
        const auto u = linalg::perturb_projection(TruncatedOperator(t), TruncatedOperator(s), eps);
        const Matrix um = u.entries();
        const Matrix id = Matrix::Identity(n, n);
        const double unitary = (um.adjoint() * um - id).cwiseAbs().maxCoeff();
        const double range = linalg::spectral_norm((id - s) * um * t);
        const double moved = linalg::spectral_norm((um - id) * t);
        double fixed = 0;
        for (Eigen::Index i = 0; i < k; ++i) fixed = std::max(fixed, (um * v.col(i) - v.col(i)).norm());
        worst_unitary = std::max(worst_unitary, unitary);
        worst_range = std::max(worst_range, range);
        worst_fixed = std::max(worst_fixed, fixed);
        worst_ratio = std::max(worst_ratio, moved / eps);
        if (!(unitary < 1e-10) || !(range < 1e-10) || !(moved < eps) || !(fixed < 1e-12)) ++violations;
    }
    o.require(violations == 0, "clauses");
    double worst_rot = 0;
    for (double theta : {1e-4, 1e-3, 0.01, 0.05, 0.1}) {
        Matrix tt = Matrix::Zero(2, 2), ss(2, 2);
        tt(0, 0) = 1.0;
        const double c = std::cos(theta), sn = std::sin(theta);
        ss << c * c, c * sn, c * sn, sn * sn;
        const auto u = linalg::perturb_projection(TruncatedOperator(tt), TruncatedOperator(ss), 1.0);
        const double moved = linalg::spectral_norm((u.entries() - Matrix::Identity(2, 2)) * tt);
        worst_rot = std::max(worst_rot, std::abs(moved - 2.0 * std::sin(theta / 2.0)));
    }
    o.require(worst_rot < 1e-10, "rotation example");
    o.detail += "1000 instances, unitarity " + fmt(worst_unitary) + ", range " + fmt(worst_range) + ", fixed " +
                fmt(worst_fixed) + ", max ||(u-1)T||/eps " + fmt(worst_ratio) + ", rotation error " + fmt(worst_rot);
    return o;
}

// ---- 4

Outcome qd_chain() {
    Outcome o;
    const pres::FinDimCStar A({2});
    const auto t = pres::enumerate_dense(A, 12, 1);
    std::vector<qd::QDCondition> chain{qd::qd_root(t, 0.25)};
    for (std::size_t k = 1; k <= 5; ++k) {
        std::vector<pres::Handle> add;
        for (pres::Handle h = static_cast<pres::Handle>(2 * k - 1); h < std::min<std::size_t>(2 * k + 1, t.size()); ++h)
            add.push_back(h);
        chain.push_back(qd::qd_extend(t, chain.back(), add, 0.25 * std::ldexp(1.0, -static_cast<int>(k))));
    }
    o.require(chain.back().n <= 256, "truncation");
    std::size_t pairs = 0, order_fail = 0, identity_fail = 0;
    for (std::size_t q = 0; q < chain.size(); ++q)
        for (std::size_t p = q + 1; p < chain.size(); ++p) {
            ++pairs;
            if (!qd::qd_order_check(t, chain[p], chain[q]).holds()) ++order_fail;
            // cross term: the defects of p and q agree exactly on every older window below q
            for (std::size_t s = 0; s < q; ++s) {
                const auto rels = rel::relations_within(t, chain[s].F);
                const auto dp = qd::qd_delta(chain[p], chain[s].n, chain[q].n, rels);
                const auto dq = qd::qd_delta(chain[q], chain[s].n, chain[q].n, rels);
                for (std::size_t i = 0; i < dp.product.size(); ++i)
                    if (dp.product[i].norm != dq.product[i].norm) ++identity_fail;
                for (std::size_t i = 0; i < dp.additive.size(); ++i)
                    if (dp.additive[i].norm != dq.additive[i].norm) ++identity_fail;
                for (std::size_t i = 0; i < dp.adjoint.size(); ++i)
                    if (dp.adjoint[i].norm != dq.adjoint[i].norm) ++identity_fail;
            }
        }
    double min_slack = 1e300;
    for (const auto& w : qd::qd_window_records(t, chain)) min_slack = std::min(min_slack, w.min_norm_slack);
    o.require(pairs == 15, "15 pairs");
    o.require(order_fail == 0, "order checks");
    o.require(identity_fail == 0, "transitivity identity");
    o.require(min_slack > 0, "norm witness");
    o.detail += std::to_string(pairs) + " pairs, " + std::to_string(order_fail) + " order failures, " +
                std::to_string(identity_fail) + " identity mismatches, min norm slack " + fmt(min_slack) + ", n " +
                std::to_string(chain.back().n);
    return o;
}

// ---- 5

Outcome qd_amalgamation() {
    Outcome o;
    const pres::FinDimCStar A({2});
    const auto t = pres::enumerate_dense(A, 16, 5);
    const auto base = qd::qd_extend(t, qd::qd_root(t, 0.25), {1, 2}, 0.125);
    std::mt19937_64 rng(9);
    std::vector<qd::QDCondition> conds;
    for (int i = 0; i < 60; ++i) {
        std::vector<pres::Handle> add{static_cast<pres::Handle>(1 + rng() % (t.size() - 1)),
                                      static_cast<pres::Handle>(1 + rng() % (t.size() - 1))};
        conds.push_back(qd::qd_extend(t, base, add, 0.0625));
    }
    const auto bucket = comb::uniformize(conds, [](const qd::QDCondition& c) { return std::pair{c.n, c.eps}; });
    std::size_t pairs = 0, eps_fail = 0, order_fail = 0;
    for (std::size_t i = 0; i < bucket.size() && pairs < 100; ++i)
        for (std::size_t j = i + 1; j < bucket.size() && pairs < 100; ++j) {
            ++pairs;
            const auto& p = conds[bucket[i]];
            const auto& q = conds[bucket[j]];
            const auto s = qd::qd_amalgamate(t, p, q);
            if (s.eps != p.eps / 8) ++eps_fail;
            if (!qd::qd_order_check(t, s, p).holds() || !qd::qd_order_check(t, s, q).holds()) ++order_fail;
        }
    o.require(pairs == 100, "100 pairs");
    o.require(eps_fail == 0, "eps_s = eps_p/8");
    o.require(order_fail == 0, "order checks");
    o.detail += std::to_string(pairs) + " pairs, " + std::to_string(eps_fail) + " eps mismatches, " +
                std::to_string(order_fail) + " order failures";
    return o;
}

// ---- 6

Outcome ea_chain() {
    Outcome o;
    engine::RunDescriptor d;
    d.poset = "ea";
    d.presentation = engine::load_presentation("matrix:2");
    d.schedule = engine::load_schedule("auto:8");
    d.truncation = 512;
    d.root_eps = 1.0;
    d.alignment_angle = 2e-5;
    const auto t = engine::handle_table(d);
    const auto chain = engine::build_ea_chain(d, t);
    const auto requests = engine::expand_schedule(d);
    o.require(chain.size() == 9, "8 stages");
    std::size_t promise_fail = 0, link_fail = 0, met = 0;
    double worst_c = 0, worst_d = 0;
    for (std::size_t k = 0; k < chain.size(); ++k) {
        const auto& p = chain[k];
        if (!ea::promise_check(t, p).holds()) ++promise_fail;
        if (k == 0) continue;
        if (!ea::ea_order_check(t, p, chain[k - 1]).holds()) ++link_fail;
        // membership in the requested dense set
        const auto& r = requests[k - 1];
        bool in = p.eps <= engine::read_dyadic(r.at("eps")) && p.R.n >= r.at("R").get<std::size_t>();
        for (auto h : r.at("handles").get<std::vector<pres::Handle>>()) in = in && p.has(h);
        const std::size_t hs = r.at("h").get<std::size_t>();
        std::vector<std::size_t> c(hs);
        for (std::size_t i = 0; i < hs; ++i) c[i] = i;
        const auto target = linalg::SpectralContraction::coordinate(hs, {{linalg::Rational{1, 1}, c}});
        const std::size_t n = std::max(p.dim(), hs);
        in = in && linalg::way_above(p.h.op().resized(n), target.op().resized(n), 0.0);
        if (in) ++met;
        // slack in the two strict promise constants
        const auto cb = ea::ea_constants(t, p, p.F, *p.promise);
        worst_c = std::max(worst_c, cb.N / (p.eps / (3 * cb.M_p)));
        for (auto a : p.F) {
            const std::size_t m = p.promise->phi.closure(p.dim());
            const Matrix hp = linalg::range_projection(p.h).padded(m);
            const double v = std::max(linalg::spectral_norm(p.at(a).padded(m) +
                                                            linalg::multiply(p.promise->phi.matrix(t[a], m), Matrix::Identity(m, m) - hp)),
                                      t.algebra().norm(t[a]));
            worst_d = std::max(worst_d, v / (1.5 * t.algebra().norm(t[a])));
        }
    }
    const auto v = engine::verify_ea(t, chain, d.truncation, d.tolerances());
    const auto x = ea::ea_extraction_report(t, chain);
    double worst_window = 0;
    for (const auto& w : x.windows)
        worst_window = std::max(worst_window, std::max({w.max_additive, w.max_adjoint, w.max_product}) / w.eps);
    o.require(promise_fail == 0, "promise checks");
    o.require(link_fail == 0, "order checks against inputs");
    o.require(met == 8, "8 dense sets met");
    o.require(x.unital, "unitality");
    o.require(worst_window < 1.0, "windowed defects");
    o.require(v.pass(), "full verification");
    o.detail += "dense sets met " + std::to_string(met) + "/8, max N/(eps/3M) " + fmt(worst_c) + ", max norm ratio " +
                fmt(worst_d) + ", max window defect/eps " + fmt(worst_window) + ", final dim " +
                std::to_string(chain.back().dim());
    return o;
}

// ---- 7

Outcome ea_propk() {
    Outcome o;
    const pres::FinDimCStar A({2});
    const auto t = pres::enumerate_dense(A, 96, 3);
    const auto family = engine::sunflower_family(t, 40, 1.0 / 64);
    std::vector<std::vector<pres::Handle>> fs;
    for (const auto& c : family) fs.push_back(c.F);
    const auto ds = comb::delta_system_extract(fs, 40);
    o.require(ds.members.size() == 40, "F sets form a sunflower");
    const auto r = ea::ea_propk_pipeline(t, family, 40);
    std::size_t fail = 0;
    for (const auto& [key, s] : r.amalgams)
        if (!ea::ea_order_check(t, s, family[key.first]).holds() || !ea::ea_order_check(t, s, family[key.second]).holds())
            ++fail;
    const std::size_t want = std::min<std::size_t>(40, r.bucket.size());
    const std::size_t m = r.members.size();
    o.require(m >= want, "subfamily size");
    o.require(r.amalgams.size() == m * (m + 1) / 2, "amalgam for every pair");
    o.require(fail == 0, "order checks");
    o.detail += "bucket " + std::to_string(r.bucket.size()) + ", subfamily " + std::to_string(m) + ", amalgams " +
                std::to_string(r.amalgams.size()) + ", failures " + std::to_string(fail);
    return o;
}

// ---- 8

std::string run_capture(const std::string& cmd, int& status) {
    std::string out;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed");
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    status = ::pclose(pipe);
    return out;
}

Outcome determinism(const std::string& cli) {
    Outcome o;
    const auto dir = std::filesystem::temp_directory_path() / ("cqforce_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    std::size_t compared = 0;
    for (const std::string cmd : {"embed-boolean --presentation free:2 --schedule auto:4 --horizon 500",
                                  "embed-qd --schedule auto:4", "embed-ea --schedule auto:4 --seed 7"}) {
        int st = 0;
        const auto a = (dir / "a.json").string(), b = (dir / "b.json").string();
        run_capture(cli + " " + cmd + " --out " + a, st);
        o.require(st == 0, cmd + " exit status");
        run_capture(cli + " " + cmd + " --out " + b, st);
        o.require(engine::read_file(a) == engine::read_file(b), cmd + " certificates differ");
        for (const std::string report : {"text", "machine"}) {
            const auto v1 = run_capture(cli + " verify " + a + " --report " + report, st);
            o.require(st == 0, "verify exit status");
            const auto v2 = run_capture(cli + " verify " + a + " --report " + report, st);
            o.require(!v1.empty() && v1 == v2, cmd + " diagnostic streams differ");
        }
        ++compared;
    }
    std::filesystem::remove_all(dir);
    o.detail += std::to_string(compared) + " runs byte-identical, diagnostic streams identical";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <path to cqforce>\n";
        return 2;
    }
    const std::string cli = argv[1];
    criterion(1, "Boolean soundness: free algebra on 3 generators, 6 stages, horizon 10^4", 5, pb_soundness);
    criterion(2, "Boolean transitivity and amalgamation: 1000 chains, 200 pairs", 30, pb_transitivity);
    criterion(3, "projection perturbation: 1000 instances, dims <= 32, rotation example", 20, perturbation_lemma);
    criterion(4, "QD over M_2: 6 conditions, 15 pairs, N = 256", 60, qd_chain);
    criterion(5, "QD amalgamation: eps_s = eps_p/8 on 100 pairs", 0, qd_amalgamation);
    criterion(6, "promise poset over M_2: 8 stages, N = 512", 300, ea_chain);
    criterion(7, "property K pipeline: 40 sunflower conditions", 300, ea_propk);
    criterion(8, "determinism: certificates and diagnostic streams", 0, [&] { return determinism(cli); });
    std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
    return failures == 0 ? 0 : 1;
}
