// Command-line front end: builds generic chains, checks and amalgamates stored
// conditions, runs the property-K pipeline and verifies certificates.
//
// Exit codes: 0 PASS, 1 FAIL, 2 input error, 3 slack or size exhausted.

#include <CLI11.hpp>

#include <iostream>

#include "cqforce/ea.hpp"
#include "cqforce/engine.hpp"

using namespace cqforce;
using engine::json;

namespace {

enum Exit { kPass = 0, kFail = 1, kInput = 2, kSlack = 3 };

struct RunOptions {
    std::string presentation;
    std::string schedule;
    std::uint64_t seed = 0;
    std::size_t truncation = 512;
    int quantizer_bits = 40;
    int margin_exponent = 30;
    std::size_t handles = 8;
    std::size_t horizon = 10000;
    double root_eps = 1.0;
    double angle = 0.0;
    std::string out;
    std::string report = "text";
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
    cmd->add_option("--presentation", o.presentation, "presentation file or shorthand (free:G, boolean:M:MASKS, matrix:D,...)")
        ->capture_default_str();
    cmd->add_option("--schedule", o.schedule, "schedule file or auto:k")->capture_default_str();
    cmd->add_option("--seed", o.seed, "seed of the dense enumeration")->capture_default_str();
    cmd->add_option("--truncation", o.truncation, "global truncation N")->capture_default_str();
    cmd->add_option("--quantizer-bits", o.quantizer_bits, "quantizer resolution r (grid 2^-r)")->capture_default_str();
    cmd->add_option("--margin-exponent", o.margin_exponent, "strict inequalities need slack 2^-m")->capture_default_str();
    cmd->add_option("--handles", o.handles, "size of the enumerated dense family")->capture_default_str();
    cmd->add_option("--horizon", o.horizon, "bit horizon for Boolean runs")->capture_default_str();
    cmd->add_option("--root-eps", o.root_eps, "eps of the root condition")->capture_default_str();
    cmd->add_option("--alignment-angle", o.angle, "tilt of the root representation")->capture_default_str();
    cmd->add_option("--out", o.out, "certificate path");
    cmd->add_option("--report", o.report, "text or machine")->check(CLI::IsMember({"text", "machine"}))->capture_default_str();
}

engine::RunDescriptor descriptor(const std::string& poset, const RunOptions& o) {
    engine::RunDescriptor d;
    d.poset = poset;
    d.presentation = engine::load_presentation(o.presentation);
    d.schedule = engine::load_schedule(o.schedule);
    d.seed = o.seed;
    d.truncation = o.truncation;
    d.quantizer_bits = o.quantizer_bits;
    d.margin_exponent = o.margin_exponent;
    d.handle_count = o.handles;
    d.horizon = o.horizon;
    d.root_eps = o.root_eps;
    d.alignment_angle = o.angle;
    return d;
}

int embed(const std::string& poset, const RunOptions& o) {
    const auto d = descriptor(poset, o);
    const auto built = engine::build_chain(d);
    if (!o.out.empty()) engine::write_atomic(o.out, engine::certificate_text(built.certificate));
    std::cout << built.verification.stream(o.report == "machine");
    return built.verification.pass() ? kPass : kFail;
}

/// "file" or "file:index"; the index defaults to the last condition.
std::pair<std::string, long> condition_ref(const std::string& ref) {
    const auto colon = ref.rfind(':');
    if (colon != std::string::npos && colon + 1 < ref.size() &&
        ref.find_first_not_of("0123456789", colon + 1) == std::string::npos)
        return {ref.substr(0, colon), std::stol(ref.substr(colon + 1))};
    return {ref, -1};
}

template <class C>
const C& pick(const std::vector<C>& chain, long index) {
    if (chain.empty()) throw ValidationError("certificate holds no conditions");
    if (index < 0) return chain.back();
    if (static_cast<std::size_t>(index) >= chain.size()) throw ValidationError("condition index out of range");
    return chain[static_cast<std::size_t>(index)];
}

engine::StoredChain load_chain(const std::string& path, const std::string& poset) {
    auto s = engine::read_chain(engine::parse_json(engine::read_file(path)));
    if (s.run.poset != poset) throw ValidationError("'" + path + "' holds a " + s.run.poset + " chain, not " + poset);
    return s;
}

void print_report(const engine::Verification& v, const std::string& report) { std::cout << v.stream(report == "machine"); }

int check_order(const std::string& poset, const std::string& stronger, const std::string& weaker, const std::string& report) {
    const auto [sp, si] = condition_ref(stronger);
    const auto [wp, wi] = condition_ref(weaker);
    const auto a = load_chain(sp, poset), b = load_chain(wp, poset);
    engine::Verification v;
    if (poset == "pb") {
        v.add("order", "pb", pb::pb_order_check(pick(a.pb, si), pick(b.pb, wi)));
    } else {
        const auto t = engine::handle_table(a.run);
        if (poset == "qd")
            v.add("order", "qd", qd::qd_order_check(t, pick(a.qd, si), pick(b.qd, wi), a.run.tolerances()));
        else
            v.add("order", "ea", ea::ea_order_check(t, pick(a.ea, si), pick(b.ea, wi), a.run.tolerances()));
    }
    print_report(v, report);
    return v.pass() ? kPass : kFail;
}

int amalgamate(const std::string& poset, const std::string& left, const std::string& right, const std::string& out,
               const std::string& report) {
    const auto [lp, li] = condition_ref(left);
    const auto [rp, ri] = condition_ref(right);
    const auto a = load_chain(lp, poset), b = load_chain(rp, poset);
    if (engine::presentation_json(a.run.presentation) != engine::presentation_json(b.run.presentation) ||
        a.run.seed != b.run.seed || a.run.handle_count != b.run.handle_count)
        throw IncompatiblePresentation("presentation", "the two certificates use different presentations");
    engine::Verification v;
    json cond;
    if (poset == "pb") {
        const auto& p = pick(a.pb, li);
        const auto& q = pick(b.pb, ri);
        const auto s = pb::pb_amalgamate(p, q);
        v.add("amalgam<left", "order", pb::pb_order_check(s, p));
        v.add("amalgam<right", "order", pb::pb_order_check(s, q));
        cond = engine::condition_json(s);
    } else {
        const auto t = engine::handle_table(a.run);
        if (poset == "qd") {
            const auto& p = pick(a.qd, li);
            const auto& q = pick(b.qd, ri);
            const auto s = qd::qd_amalgamate(t, p, q, a.run.quantizer_bits);
            v.add("amalgam<left", "order", qd::qd_order_check(t, s, p, a.run.tolerances()));
            v.add("amalgam<right", "order", qd::qd_order_check(t, s, q, a.run.tolerances()));
            cond = engine::condition_json(s);
        } else {
            const auto& p = pick(a.ea, li);
            const auto& q = pick(b.ea, ri);
            ea::BuildParams params{a.run.quantizer_bits, a.run.truncation, a.run.tolerances()};
            const auto s = ea::ea_amalgamate(t, p, q, params);
            v.add("amalgam<left", "order", ea::ea_order_check(t, s, p, a.run.tolerances()));
            v.add("amalgam<right", "order", ea::ea_order_check(t, s, q, a.run.tolerances()));
            v.add("amalgam", "promise", ea::promise_check(t, s, a.run.tolerances()));
            cond = engine::condition_json(s);
        }
    }
    if (!out.empty()) {
        const json doc{{"format_version", engine::kFormatVersion},
                       {"poset", poset},
                       {"run", engine::descriptor_json(a.run)},
                       {"condition", cond},
                       {"verdict", v.pass() ? "PASS" : "FAIL"}};
        engine::write_atomic(out, doc.dump(1) + "\n");
    }
    print_report(v, report);
    return v.pass() ? kPass : kFail;
}

int propk(const RunOptions& o, std::size_t count, std::size_t target) {
    const auto A = engine::load_presentation(o.presentation).algebra();
    const auto t = pres::enumerate_dense(A, std::max(o.handles, 2 * count + 8), o.seed);
    ea::BuildParams params;
    params.bits = o.quantizer_bits;
    params.truncation = o.truncation;
    params.tol = Tolerances{std::ldexp(1.0, -o.margin_exponent), 1e-9};
    const auto family = engine::sunflower_family(t, count, 1.0 / 64, params);
    const auto r = ea::ea_propk_pipeline(t, family, target, params);
    engine::Verification v;
    v.add("pipeline", "bucket", !r.bucket.empty(), std::to_string(r.bucket.size()) + " of " + std::to_string(family.size()));
    const std::size_t want = std::min(target, r.bucket.size());
    v.add("pipeline", "subfamily", r.members.size() >= want,
          std::to_string(r.members.size()) + " members, " + std::to_string(r.dropped.size()) + " dropped");
    for (const auto& [key, s] : r.amalgams) {
        const std::string scope = "amalgam " + std::to_string(key.first) + "," + std::to_string(key.second);
        v.add(scope, "order_left", ea::ea_order_check(t, s, family[key.first], params.tol));
        v.add(scope, "order_right", ea::ea_order_check(t, s, family[key.second], params.tol));
    }
    print_report(v, o.report);
    return v.pass() ? kPass : kFail;
}

int perturb_demo(double theta, double eps, const std::string& report) {
    linalg::Matrix t(2, 2), s = linalg::Matrix::Zero(2, 2);
    const double c = std::cos(theta), sn = std::sin(theta);
    t << c * c, c * sn, c * sn, sn * sn;
    s(0, 0) = 1.0;
    const auto u = linalg::perturb_projection(linalg::TruncatedOperator(t), linalg::TruncatedOperator(s), eps);
    const double moved = linalg::spectral_norm(linalg::multiply(u.entries() - linalg::Matrix::Identity(2, 2), t));
    const double expected = 2.0 * std::sin(theta / 2.0);
    engine::Verification v;
    v.add("rotation", "distance", true,
          "||T - S|| = " + qd::fmt(linalg::spectral_norm(t - s)) + ", bound " + qd::fmt(linalg::admissibility_bound(eps, 1)));
    v.add("rotation", "moved", std::abs(moved - expected) < 1e-10,
          "||(u - 1)T|| = " + qd::fmt(moved) + ", 2 sin(theta/2) = " + qd::fmt(expected));
    const linalg::Matrix ut = linalg::multiply(linalg::multiply(u.entries(), t), u.entries().adjoint());
    v.add("rotation", "range", (ut - s).cwiseAbs().maxCoeff() < 1e-12, "uTu* = S");
    print_report(v, report);
    return v.pass() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cqforce: generic chains for Boolean, quasidiagonal and promise-carrying operator posets"};
    app.require_subcommand(1);

    RunOptions boolean_opts{"free:3", "auto:6"};
    RunOptions qd_opts{"matrix:2", "auto:5"};
    qd_opts.truncation = 256;
    qd_opts.root_eps = 0.25;
    RunOptions ea_opts{"matrix:2", "auto:8"};
    auto* eb = app.add_subcommand("embed-boolean", "generic chain in the Boolean poset");
    add_run_options(eb, boolean_opts);
    auto* eq = app.add_subcommand("embed-qd", "generic chain in the quasidiagonal poset");
    add_run_options(eq, qd_opts);
    auto* ee = app.add_subcommand("embed-ea", "generic chain in the promise poset");
    add_run_options(ee, ea_opts);

    std::string poset, stronger, weaker, left, right, out, report = "text";
    auto* co = app.add_subcommand("check-order", "order check between two stored conditions (FILE[:INDEX])");
    co->add_option("poset", poset, "pb, qd or ea")->required()->check(CLI::IsMember({"pb", "qd", "ea"}));
    co->add_option("--stronger", stronger, "candidate lower condition")->required();
    co->add_option("--weaker", weaker, "candidate upper condition")->required();
    co->add_option("--report", report)->check(CLI::IsMember({"text", "machine"}));

    auto* am = app.add_subcommand("amalgamate", "common extension of two stored conditions (FILE[:INDEX])");
    am->add_option("poset", poset, "pb, qd or ea")->required()->check(CLI::IsMember({"pb", "qd", "ea"}));
    am->add_option("--left", left)->required();
    am->add_option("--right", right)->required();
    am->add_option("--out", out, "where to write the amalgam");
    am->add_option("--report", report)->check(CLI::IsMember({"text", "machine"}));

    RunOptions propk_opts{"matrix:2", ""};
    std::size_t count = 40, target = 40;
    auto* pk = app.add_subcommand("propk", "property-K pipeline over a generated sunflower family");
    add_run_options(pk, propk_opts);
    pk->add_option("--count", count, "number of generated conditions")->capture_default_str();
    pk->add_option("--target", target, "requested subfamily size")->capture_default_str();

    std::string cert;
    auto* vf = app.add_subcommand("verify", "recompute every check stored in a certificate");
    vf->add_option("certificate", cert)->required();
    vf->add_option("--report", report)->check(CLI::IsMember({"text", "machine"}));

    double theta = 0.2, eps = 1.0;
    auto* pp = app.add_subcommand("perturb-projection", "unitary moving a tilted line onto a coordinate axis");
    pp->add_option("--theta", theta)->capture_default_str();
    pp->add_option("--eps", eps)->capture_default_str();
    pp->add_option("--report", report)->check(CLI::IsMember({"text", "machine"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kInput;
    }

    try {
        if (eb->parsed()) return embed("pb", boolean_opts);
        if (eq->parsed()) return embed("qd", qd_opts);
        if (ee->parsed()) return embed("ea", ea_opts);
        if (co->parsed()) return check_order(poset, stronger, weaker, report);
        if (am->parsed()) return amalgamate(poset, left, right, out, report);
        if (pk->parsed()) return propk(propk_opts, count, target);
        if (pp->parsed()) return perturb_demo(theta, eps, report);
        if (vf->parsed()) {
            const auto v = engine::verify_certificate(engine::read_file(cert));
            print_report(v, report);
            return v.pass() ? kPass : kFail;
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error at byte " << e.byte_offset() << ": " << e.what() << "\n";
        return kInput;
    } catch (const SlackExhausted& e) {
        std::cerr << e.what() << "\n";
        return kSlack;
    } catch (const SizeError& e) {
        std::cerr << "size: " << e.what() << "\n";
        return kSlack;
    } catch (const PerturbationTooLarge& e) {
        std::cerr << e.what() << "\n";
        return kSlack;
    } catch (const Error& e) {
        std::cerr << "input: " << e.what() << "\n";
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "input: " << e.what() << "\n";
        return kInput;
    }
    return kInput;
}
