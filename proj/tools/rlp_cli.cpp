#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "acceptance/criteria.hpp"
#include "rlp/baseline.hpp"
#include "rlp/lp_io.hpp"
#include "rlp/solver.hpp"

namespace {

constexpr int kExitInvariant = 2;
constexpr int kExitParse = 3;

int cmd_solve(const std::string& input, double delta, const std::string& mode, const std::string& profile,
              std::uint64_t seed, const std::string& trace_path) {
    rlp::LpProblem lp = rlp::read_lp_file(input);
    rlp::SolveConfig cfg;
    cfg.ipm.mode = rlp::parse_mode(mode);
    cfg.ipm.profile = rlp::parse_profile(profile);
    cfg.ipm.seed = seed;
    std::unique_ptr<std::ofstream> trace;
    if (!trace_path.empty()) {
        trace = std::make_unique<std::ofstream>(trace_path);
        if (!*trace) throw std::runtime_error("cannot open trace file " + trace_path);
        cfg.ipm.trace = [&trace](const rlp::TraceRecord& r) {
            nlohmann::json j = {{"iter", r.iter},
                                {"mu", r.mu},
                                {"phi", std::isfinite(r.phi) ? nlohmann::json(r.phi) : nlohmann::json(nullptr)},
                                {"phi_b", r.phi_b},
                                {"dxnorm", r.dxnorm},
                                {"dsnorm", r.dsnorm}};
            *trace << j.dump() << '\n';
        };
    }
    rlp::SolveReport rep = rlp::lp_solve(lp, delta, cfg);
    std::cout << rlp::report_json(rep) << std::endl;
    return 0;
}

int cmd_bench(const std::string& mode, std::uint64_t seed, bool quick) {
    struct Size {
        rlp::Index n, d;
    };
    std::vector<Size> sizes;
    if (mode == "exact") {
        for (rlp::Index d : {4, 8, 16}) sizes.push_back({8 * d, d});
        if (!quick) sizes.push_back({256, 32});
        for (rlp::Index n : {64, 128, 256}) sizes.push_back({n, 4});
    } else {
        sizes = {{16, 2}, {24, 3}};
        if (!quick) sizes.push_back({40, 4});
    }
    std::cout << std::left << std::setw(6) << "n" << std::setw(5) << "d" << std::setw(9) << "phase1" << std::setw(9)
              << "phase2" << std::setw(8) << "polish" << std::setw(12) << "iter/sqrtd" << std::setw(13) << "ops/iter"
              << std::setw(12) << "obj_err/tol" << "seconds\n";
    for (auto [n, d] : sizes) {
        rlp::LpProblem lp = rlp::generate_lp(n, d, seed + n * 31 + d);
        rlp::SolveConfig cfg;
        cfg.ipm.mode = rlp::parse_mode(mode);
        cfg.ipm.seed = seed;
        rlp::SolveReport r = rlp::lp_solve(lp, 1e-3, cfg);
        rlp::BaselineResult br = rlp::baseline_solve(lp.A, lp.b, lp.c);
        double it = double(r.iterations());
        std::cout << std::setw(6) << n << std::setw(5) << d << std::setw(9) << r.phase1.iterations << std::setw(9)
                  << r.phase2.iterations << std::setw(8) << r.polish_rounds << std::setw(12) << std::setprecision(4)
                  << it / std::sqrt(double(d)) << std::setw(13) << std::setprecision(3) << double(r.ops) / it
                  << std::setw(12) << std::abs(r.objective - br.objective) / r.objective_tol << std::setprecision(3)
                  << r.seconds << '\n';
    }
    return 0;
}

int cmd_selftest(bool quick, const std::vector<int>& only) {
    rlp::acceptance::Options opt;
    opt.quick = quick;
    opt.only.insert(only.begin(), only.end());
    auto res = rlp::acceptance::run(opt, std::cout);
    int failed = 0;
    for (const auto& o : res) failed += o.pass ? 0 : 1;
    std::cout << res.size() - failed << "/" << res.size() << " passed" << std::endl;
    return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust interior-point LP solver"};
    app.require_subcommand(1);

    std::string input, mode = "exact", profile = "practical", trace;
    double delta = 1e-3;
    std::uint64_t seed = 1;
    auto* solve = app.add_subcommand("solve", "solve min c^T x, A^T x = b, x >= 0 from a JSON file");
    solve->add_option("--input", input, "problem file")->required()->check(CLI::ExistingFile);
    solve->add_option("--delta", delta, "accuracy in (0, 1]")->check(CLI::Range(1e-12, 1.0));
    solve->add_option("--mode", mode)->check(CLI::IsMember({"exact", "sketched"}));
    solve->add_option("--profile", profile)->check(CLI::IsMember({"theory", "practical"}));
    solve->add_option("--seed", seed);
    solve->add_option("--trace", trace, "write one JSON record per iteration");

    rlp::Index gn = 32, gd = 4;
    std::uint64_t gseed = 1;
    std::string gout;
    auto* gen = app.add_subcommand("generate", "write a random feasible bounded LP");
    gen->add_option("-n", gn)->check(CLI::PositiveNumber);
    gen->add_option("-d", gd)->check(CLI::PositiveNumber);
    gen->add_option("--seed", gseed);
    gen->add_option("--output", gout)->required();

    std::string bmode = "exact";
    bool bquick = false;
    std::uint64_t bseed = 1;
    auto* bench = app.add_subcommand("bench", "iteration and work counts on generated LPs");
    bench->add_option("--mode", bmode)->check(CLI::IsMember({"exact", "sketched"}));
    bench->add_option("--seed", bseed);
    bench->add_flag("--quick", bquick);

    bool squick = false;
    std::vector<int> only;
    auto* self = app.add_subcommand("selftest", "run the acceptance criteria");
    self->add_flag("--quick", squick, "fewer seeds and smaller sizes, same thresholds");
    self->add_option("criteria", only, "criterion ids (default: all)")->check(CLI::Range(1, 13));

    CLI11_PARSE(app, argc, argv);
    try {
        if (*solve) return cmd_solve(input, delta, mode, profile, seed, trace);
        if (*gen) {
            rlp::write_lp_file(gout, rlp::generate_lp(gn, gd, gseed));
            return 0;
        }
        if (*bench) return cmd_bench(bmode, bseed, bquick);
        if (*self) return cmd_selftest(squick, only);
    } catch (const rlp::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitParse;
    } catch (const rlp::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
