// Batch experiment driver: code construction reports, expander checks,
// decoder trials, frame-engine memory experiments, gadget verification, and
// percolation validation. Progress goes to stderr, data to files under
// --out. Exit codes: 0 success, 1 verification failure, 2 usage error.

#include <CLI11.hpp>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "qldpc/badsets.hpp"
#include "qldpc/config.hpp"
#include "qldpc/verify.hpp"

using namespace qldpc;

namespace {

constexpr const char* kVersion = "qldpc-0.1.0";

struct CommonArgs {
    std::string config_path;
    uint64_t seed = 1;
    int64_t shots = 1000;
    std::string out_dir = ".";
    int jobs = 1;
};

Config load_config(const CommonArgs& args) {
    if (args.config_path.empty()) return Config();
    return Config::load(args.config_path);
}

std::ofstream open_out(const CommonArgs& args, const std::string& name) {
    std::filesystem::create_directories(args.out_dir);
    std::string path = args.out_dir + "/" + name;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file " + path);
    return os;
}

BipartiteGraph graph_from_config(const Config& cfg, const std::string& prefix,
                                 uint64_t seed) {
    std::string kind = cfg.get_string(prefix + ".kind", "biregular");
    if (kind == "pendant") {
        int pairs = int(cfg.get_int(prefix + ".pairs", 2));
        std::vector<std::pair<int, int>> e;
        for (int j = 0; j < pairs; ++j) {
            e.push_back({j, 2 * j});
            e.push_back({j, 2 * j + 1});
        }
        auto g = graph_from_edges(pairs, 2 * pairs, e);
        g.deg_left = 2;
        g.deg_right = 1;
        return g;
    }
    if (kind == "cycle") {
        int n = int(cfg.get_int(prefix + ".n", 4));
        std::vector<std::pair<int, int>> e;
        for (int i = 0; i < n; ++i) {
            e.push_back({i, i});
            e.push_back({i, (i + n - 1) % n});
        }
        auto g = graph_from_edges(n, n, e);
        g.deg_left = g.deg_right = 2;
        return g;
    }
    if (kind == "file") {
        std::ifstream is(cfg.get_string(prefix + ".path"));
        if (!is) throw std::runtime_error("cannot open graph file");
        return read_graph(is);
    }
    int nl = int(cfg.get_int(prefix + ".nl", 12));
    int nr = int(cfg.get_int(prefix + ".nr", 6));
    int dl = int(cfg.get_int(prefix + ".dl", 3));
    int dr = int(cfg.get_int(prefix + ".dr", 6));
    uint64_t gseed = uint64_t(cfg.get_int(prefix + ".seed", int64_t(seed)));
    for (int attempt = 0; attempt < 64; ++attempt) {
        try {
            return gen_biregular(nl, nr, dl, dr, gseed + uint64_t(attempt));
        } catch (const std::runtime_error&) {
            continue;  // resampling budget exhausted; try the next stream
        }
    }
    throw std::runtime_error("graph_from_config: no simple biregular graph found");
}

PCRef code_from_config(GadgetFactory& f, const Config& cfg, uint64_t seed) {
    int r = int(cfg.get_int("code.r", 2));
    int level = int(cfg.get_int("code.level", 1));
    std::string orient = cfg.get_string("code.orientations", r == 2 ? "c,d" : "c,c,d");
    std::vector<bool> cochain;
    std::stringstream ss(orient);
    std::string tok;
    while (std::getline(ss, tok, ',')) cochain.push_back(tok == "c");
    if (int(cochain.size()) != r)
        throw std::runtime_error("code.orientations length must equal code.r");
    std::vector<BipartiteGraph> graphs;
    for (int h = 0; h < r; ++h) {
        std::string prefix = "code.factor" + std::to_string(h);
        if (!cfg.has(prefix + ".kind") && cfg.has("code.factor.kind"))
            prefix = "code.factor";
        graphs.push_back(graph_from_config(cfg, prefix, seed + uint64_t(h)));
    }
    return f.product(graphs, cochain, level);
}

// Deterministic shot-parallel map: results land by shot index.
template <typename Fn>
std::vector<uint8_t> run_shots(int64_t shots, int jobs, Fn&& shot_fn) {
    std::vector<uint8_t> results(shots, 0);
    if (jobs <= 1) {
        for (int64_t s = 0; s < shots; ++s) results[s] = shot_fn(s);
        return results;
    }
    std::atomic<int64_t> next{0};
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w)
        workers.emplace_back([&] {
            for (;;) {
                int64_t s = next.fetch_add(1);
                if (s >= shots) return;
                results[s] = shot_fn(s);
            }
        });
    for (auto& th : workers) th.join();
    return results;
}

double wilson_low(double freq, double n, double z = 1.96) {
    double z2 = z * z;
    double denom = 1 + z2 / n;
    double center = (freq + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(freq * (1 - freq) / n + z2 / (4 * n * n)) / denom;
    return std::max(0.0, center - half);
}

double wilson_high(double freq, double n, double z = 1.96) {
    double z2 = z * z;
    double denom = 1 + z2 / n;
    double center = (freq + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(freq * (1 - freq) / n + z2 / (4 * n * n)) / denom;
    return std::min(1.0, center + half);
}

// --- subcommands ---

int cmd_build_code(const CommonArgs& args) {
    Config cfg = load_config(args);
    GadgetFactory f;
    PCRef pc = code_from_config(f, cfg, args.seed);
    int w = locality(pc->complex);
    int budget = int(cfg.get_int("distance.budget", 4));
    auto dz = min_nontrivial_weight(pc->complex, pc->level, true, budget);
    auto dx = min_nontrivial_weight(pc->complex, pc->level, false, budget);
    auto fmt = [&](const DistanceResult& d) {
        if (!d.exact) return std::string("> ") + std::to_string(d.searched_up_to);
        if (!d.distance) return std::string("inf");
        return std::to_string(*d.distance);
    };
    auto os = open_out(args, "code_report.txt");
    write_code_report(os, pc->code, pc->enc, w,
                      "cosystolic " + fmt(dz) + ", systolic " + fmt(dx));
    for (int h = 0; h < pc->r(); ++h) {
        auto gs = open_out(args, "factor" + std::to_string(h) + ".graph");
        write_graph(gs, pc->graphs[h]);
    }
    auto cs = open_out(args, "complex.txt");
    write_complex(cs, pc->complex);
    std::cerr << "build-code: n=" << pc->code.n << " k=" << pc->code.k << " w=" << w
              << "\n";
    if (!encoding_valid(pc->code, pc->enc)) {
        std::cerr << "build-code: encoding invariant failure\n";
        return 1;
    }
    return 0;
}

int cmd_check_expander(const CommonArgs& args) {
    Config cfg = load_config(args);
    auto g = graph_from_config(cfg, "expander", args.seed);
    double mu = cfg.get_double("expander.mu", 0.15);
    double eps = cfg.get_double("expander.eps", 1.0 / 3);
    bool exhaustive = cfg.get_string("expander.mode", "exhaustive") == "exhaustive";
    auto rep = check_lossless(g, mu, eps, exhaustive, args.seed,
                              cfg.get_int("expander.samples", 20000));
    auto [L, fam] = build_extendable_family(g);
    auto os = open_out(args, "expander_report.txt");
    os << "version " << kVersion << " seed " << args.seed << '\n';
    os << "nl " << g.left_count << " nr " << g.right_count << '\n';
    os << "mu " << mu << " eps " << eps << " mode "
       << (exhaustive ? "exhaustive" : "sampled") << '\n';
    os << "checked " << rep.checked_count << " violations " << rep.violations.size()
       << '\n';
    os << "certified " << (rep.certified_ok() ? 1 : 0) << '\n';
    os << "extendable_family size " << L.size() << " rate " << fam.achieved_rate
       << " target " << fam.target_rate << " scan_ok " << fam.scan_ok << '\n';
    auto gs = open_out(args, "expander.graph");
    write_graph(gs, g);
    std::cerr << "check-expander: violations=" << rep.violations.size() << "\n";
    return rep.violations.empty() || !exhaustive ? 0 : 1;
}

int cmd_decode_trials(const CommonArgs& args) {
    Config cfg = load_config(args);
    GadgetFactory f;
    PCRef pc = code_from_config(f, cfg, args.seed);
    FlipDecoder dec(pc->complex, pc->level);
    int exhaustive_w = int(cfg.get_int("trials.exhaustive_weight", 2));
    int max_w = int(cfg.get_int("trials.max_weight", 5));

    auto os = open_out(args, "decode_trials.csv");
    os << "version,seed,weight,trials,successes,success_rate\n";

    auto attempt = [&](const BitVector& e) {
        auto run = dec.ss_flip_syn(pc->code.hz.mul(e));
        if (!run.residual.is_zero()) return false;
        return logical_class_trivial(pc->code, run.correction ^ e, true);
    };

    for (int wgt = 0; wgt <= exhaustive_w; ++wgt) {
        int64_t trials = 0, successes = 0;
        std::vector<int> idx(wgt);
        std::function<void(int, int)> rec = [&](int start, int depth) {
            if (depth == wgt) {
                BitVector e(pc->code.n);
                for (int q : idx) e.set(q, true);
                ++trials;
                if (attempt(e)) ++successes;
                return;
            }
            for (int q = start; q < pc->code.n; ++q) {
                idx[depth] = q;
                rec(q + 1, depth + 1);
            }
        };
        rec(0, 0);
        os << kVersion << ',' << args.seed << ',' << wgt << ',' << trials << ','
           << successes << ',' << (trials ? double(successes) / trials : 1.0) << '\n';
        std::cerr << "decode-trials: exhaustive weight " << wgt << " " << successes << "/"
                  << trials << "\n";
    }

    for (int wgt = exhaustive_w + 1; wgt <= max_w; ++wgt) {
        auto results = run_shots(args.shots, args.jobs, [&](int64_t s) -> uint8_t {
            Rng rng(derive_seed(args.seed, uint64_t(s) * 131 + wgt));
            BitVector e(pc->code.n);
            while (e.weight() < wgt) e.set(int(rng.below(uint64_t(pc->code.n))), true);
            return attempt(e) ? 1 : 0;
        });
        int64_t successes = 0;
        for (uint8_t b : results) successes += b;
        os << kVersion << ',' << args.seed << ',' << wgt << ',' << args.shots << ','
           << successes << ',' << double(successes) / double(args.shots) << '\n';
        std::cerr << "decode-trials: weight " << wgt << " " << successes << "/"
                  << args.shots << "\n";
    }
    return 0;
}

// One memory shot: iid faults across the error-correction circuit, frame
// propagation, success iff both residual frames are logically trivial.
struct MemoryInstance {
    PCRef pc;
    Circuit circuit;
    RunResult reference;
    std::vector<int> data;
    int fault_layer_lo = 0, fault_layer_hi = 0;
    std::shared_ptr<FlipDecoder> dec, dec_dual;
    std::shared_ptr<CochainComplex> dual_c;
};

MemoryInstance build_memory_instance(GadgetFactory& f, PCRef pc, uint64_t seed) {
    MemoryInstance mi;
    mi.pc = pc;
    mi.circuit.num_qubits = pc->code.n;
    mi.data = iota_map(pc->code.n);
    int t = emit_nonft_prepare(mi.circuit, pc, false, mi.data, 0);
    mi.fault_layer_lo = t + 1;  // 1-indexed fault layers
    t = emit_err_corr(mi.circuit, f, pc, mi.data, t);
    mi.fault_layer_hi = t;
    mi.reference = exact_run(mi.circuit, {}, seed);
    if (mi.reference.herald_fail)
        throw std::runtime_error("memory instance: reference run heralded failure");
    mi.dec = std::make_shared<FlipDecoder>(pc->complex, pc->level);
    mi.dual_c = std::make_shared<CochainComplex>(dual(pc->complex));
    mi.dec_dual = std::make_shared<FlipDecoder>(*mi.dual_c, pc->r() - pc->level);
    return mi;
}

// iid faults across the correction rounds, frame propagation, then an ideal
// final decode of the residual before the logical verdict.
uint8_t memory_shot(const MemoryInstance& mi, double p, uint64_t shot_seed) {
    Rng rng(shot_seed);
    Fault fault;
    for (int t = mi.fault_layer_lo; t <= mi.fault_layer_hi; ++t)
        for (int q = 0; q < mi.circuit.num_qubits; ++q)
            if (rng.bernoulli(p)) {
                double u = rng.uniform() * 3;
                fault.at[{q, t}] = u < 1 ? Pauli::X : (u < 2 ? Pauli::Y : Pauli::Z);
            }
    auto fr = frame_run(mi.circuit, fault, mi.reference);
    BitVector rx(mi.pc->code.n), rz(mi.pc->code.n);
    for (int q = 0; q < mi.pc->code.n; ++q) {
        if (fr.x_frame.get(mi.data[q])) rx.set(q, true);
        if (fr.z_frame.get(mi.data[q])) rz.set(q, true);
    }
    auto runx = mi.dec->ss_flip_syn(mi.pc->code.hz.mul(rx));
    auto runz = mi.dec_dual->ss_flip_syn(mi.pc->code.hx.mul(rz));
    if (!runx.residual.is_zero() || !runz.residual.is_zero()) return 0;
    bool ok = logical_class_trivial(mi.pc->code, rx ^ runx.correction, true) &&
              logical_class_trivial(mi.pc->code, rz ^ runz.correction, false);
    return ok ? 1 : 0;
}

int cmd_memory_experiment(const CommonArgs& args, bool sweep_sizes) {
    Config cfg = load_config(args);
    GadgetFactory f;
    auto grid = cfg.get_doubles("noise.grid");
    if (grid.empty()) grid = {0.0005, 0.001, 0.002, 0.004, 0.008};

    std::vector<std::pair<std::string, PCRef>> sizes;
    if (sweep_sizes || cfg.has("code.sizes")) {
        auto dims = cfg.get_ints("code.sizes");
        if (dims.empty()) dims = {8, 12};
        for (int nl : dims) {
            Config sub = cfg;
            sub.set("code.factor.kind", "biregular");
            sub.set("code.factor.nl", std::to_string(nl));
            sub.set("code.factor.nr", std::to_string(2 * nl));
            sub.set("code.factor.dl", std::to_string(cfg.get_int("code.dl", 6)));
            sub.set("code.factor.dr", std::to_string(cfg.get_int("code.dr", 3)));
            sizes.push_back({"nl" + std::to_string(nl), code_from_config(f, sub, args.seed)});
        }
    } else {
        sizes.push_back({"config", code_from_config(f, cfg, args.seed)});
    }

    auto os = open_out(args, sweep_sizes ? "threshold_sweep.csv" : "memory_experiment.csv");
    os << "version,seed,size,p,shots,failures,failure_rate,wilson_low,wilson_high\n";
    for (auto& [label, pc] : sizes) {
        auto mi = build_memory_instance(f, pc, args.seed);
        for (double p : grid) {
            auto results = run_shots(args.shots, args.jobs, [&](int64_t s) {
                return memory_shot(mi, p,
                                   derive_seed(args.seed ^ uint64_t(p * 1e9), uint64_t(s)));
            });
            int64_t fails = 0;
            for (uint8_t b : results) fails += (b == 0);
            double rate = double(fails) / double(args.shots);
            os << kVersion << ',' << args.seed << ',' << label << ',' << p << ','
               << args.shots << ',' << fails << ',' << rate << ','
               << wilson_low(rate, double(args.shots)) << ','
               << wilson_high(rate, double(args.shots)) << '\n';
            std::cerr << "memory: size=" << label << " p=" << p << " failures=" << fails
                      << "/" << args.shots << "\n";
        }
    }
    return 0;
}

int cmd_gadget_verify(const CommonArgs& args) {
    Config cfg = load_config(args);
    GadgetFactory f;
    GadgetCheckOptions opt;
    opt.pendant_pairs = int(cfg.get_int("verify.pendant_pairs", 2));
    opt.basis_sweep = int(cfg.get_int("verify.basis_sweep", 6));
    opt.include_crt_order30 = cfg.get_int("verify.crt_order30", 0) != 0;
    opt.seed = args.seed;
    opt.log = &std::cerr;

    auto os = open_out(args, "gadget_manifest.txt");
    bool all = true;
    for (const auto& r : run_depth_checks(f)) {
        os << (r.pass ? "PASS " : "FAIL ") << r.name << '\n';
        all = all && r.pass;
    }
    for (const auto& r : run_gadget_channel_checks(f, opt)) {
        os << (r.pass ? "PASS " : "FAIL ") << r.name << '\n';
        all = all && r.pass;
    }
    std::cerr << (all ? "gadget-verify: all checks passed\n"
                      : "gadget-verify: FAILURES\n");
    return all ? 0 : 1;
}

int cmd_percolation(const CommonArgs& args) {
    Config cfg = load_config(args);
    std::string kind = cfg.get_string("percolation.graph", "path:16");
    SimpleGraph g;
    auto colon = kind.find(':');
    std::string name = kind.substr(0, colon);
    std::string dims = kind.substr(colon + 1);
    if (name == "path") g = SimpleGraph::path(std::stoi(dims));
    else if (name == "cycle") g = SimpleGraph::cycle(std::stoi(dims));
    else if (name == "grid") {
        auto x = dims.find('x');
        g = SimpleGraph::grid(std::stoi(dims.substr(0, x)),
                              std::stoi(dims.substr(x + 1)));
    } else {
        std::cerr << "unknown percolation.graph\n";
        return 2;
    }
    int eta = int(cfg.get_int("percolation.eta", 6));
    double gamma = cfg.get_double("percolation.gamma", 0.9);
    double eps = cfg.get_double("percolation.eps", 0.03);
    double bound = percolation_bound(g.n, g.max_degree(), eta, gamma, eps);
    auto mc = mc_percolation(g, eps, eta, gamma, args.shots, args.seed);
    auto os = open_out(args, "percolation.csv");
    os << "version,seed,graph,eta,gamma,eps,trials,violations,frequency,wilson_low,bound\n";
    os << kVersion << ',' << args.seed << ',' << kind << ',' << eta << ',' << gamma << ','
       << eps << ',' << mc.trials << ',' << mc.violations << ',' << mc.frequency << ','
       << mc.wilson_low << ',' << bound << '\n';
    std::cerr << "percolation: freq=" << mc.frequency << " bound=" << bound << "\n";
    return mc.wilson_low <= bound ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"product qLDPC code experiments"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "config file path");
        sub->add_option("--seed", args.seed, "root seed");
        sub->add_option("--shots", args.shots, "shot count");
        sub->add_option("--out", args.out_dir, "output directory");
        sub->add_option("--jobs", args.jobs, "worker threads");
    };

    auto* build = app.add_subcommand("build-code", "construct a code and write reports");
    auto* expander = app.add_subcommand("check-expander", "expansion certification");
    auto* decode = app.add_subcommand("decode-trials", "decoder correction sweep");
    auto* memory = app.add_subcommand("memory-experiment", "frame-engine memory run");
    auto* verify = app.add_subcommand("gadget-verify", "noiseless gadget channel checks");
    auto* percolation = app.add_subcommand("percolation", "bad-set percolation validation");
    auto* sweep = app.add_subcommand("threshold-sweep", "memory experiment over sizes");
    for (auto* sub : {build, expander, decode, memory, verify, percolation, sweep})
        add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 2;
    }

    try {
        if (build->parsed()) return cmd_build_code(args);
        if (expander->parsed()) return cmd_check_expander(args);
        if (decode->parsed()) return cmd_decode_trials(args);
        if (memory->parsed()) return cmd_memory_experiment(args, false);
        if (verify->parsed()) return cmd_gadget_verify(args);
        if (percolation->parsed()) return cmd_percolation(args);
        if (sweep->parsed()) return cmd_memory_experiment(args, true);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage/config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
