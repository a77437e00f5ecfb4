#include "licon/commands.hpp"

#include "licon/csv.hpp"
#include "licon/error_harness.hpp"
#include "licon/errors.hpp"
#include "licon/experiments.hpp"
#include "licon/qmri/reconstruct.hpp"
#include "licon/semilinear.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

namespace licon {

namespace fs = std::filesystem;

Config experiment_config() {
    return Config({
        {"problem", "cubic", "cubic | allen_cahn | qmri"},
        {"out", "out", "output directory"},
        {"h", "0.015625", "mesh width of the PDE and control solves"},
        {"data_h", "0.02", "mesh width of the cubic training solves"},
        {"data_sizes", "medium", "list of small | medium | large"},
        {"archs", "3-L-M", "network tags, e.g. 1-L-S, 3-L-M, 5-L-L"},
        {"seeds", "1,2,3,4,5", "training seeds"},
        {"train_max_iter", "1000", "Levenberg-Marquardt iteration cap"},
        {"eta", "0.004", "Allen-Cahn interface parameter"},
        {"ac_stride", "2", "node stride of the Allen-Cahn training data"},
        {"alphas", "0.001", "control costs"},
        {"sigmas", "0", "nodal noise levels of the tracking target"},
        {"noise_seed", "7", "seed of the target noise"},
        {"box_lower", "-50", "lower control bound"},
        {"box_upper", "50", "upper control bound"},
        {"method", "ssn", "ssn | sqp | hybrid"},
        {"switch_threshold", "5", "hybrid SSN-to-SQP switch residual"},
        {"ocp_tol", "1e-10", "summed KKT residual tolerance"},
        {"ocp_max_iter", "30", "control solver iteration cap"},
        {"qmri_n", "64", "image side length in pixels"},
        {"qmri_model", "drnn", "drnn | exact"},
        {"qmri_arch", "1-L-S", "DRNN sub-network tag"},
        {"qmri_dictionary", "medium", "DRNN training dictionary: small | medium | large"},
        {"qmri_init_dictionary", "small", "dictionary of the matched-filter initialization"},
        {"seq_L", "20", "readouts"},
        {"seq_TR", "8", "repetition time in ms"},
        {"seq_flips", "0.7853981633974483", "flip angles in rad, one value for a constant schedule"},
        {"seq_phase", "2.356194490192345", "precession per TR in rad"},
        {"mask_density", "0.25", "fraction of sampled phase-encode rows"},
        {"mask_shared", "false", "one mask for all frames"},
        {"mask_seed", "11", "mask seed (frame l uses seed + l)"},
        {"kspace_sigma", "30", "k-space noise standard deviation"},
        {"kspace_noise_seed", "3", "k-space noise seed"},
        {"qmri_tol", "1e-3", "SQP KKT tolerance"},
        {"qmri_max_iter", "40", "SQP iteration cap"},
        {"verify_mode", "perfect", "perfect | general"},
        {"verify_n", "15", "unknowns of the linear-quadratic family"},
        {"verify_alpha", "0.01", "control cost of the family"},
        {"verify_family_seed", "13", "family seed"},
        {"verify_eps", "1e-4,3e-4,1e-3,3e-3,1e-2", "surrogate perturbation sizes"},
        {"verify_residual", "0.1", "target offset norm in general mode"},
        {"verify_margin", "0", "relative slack on the bound"},
    });
}

void apply_scale(Config& cfg, const std::string& scale) {
    if (scale == "desk") return;
    if (scale == "paper") {
        cfg.set_defaults({{"h", "0.0078125"}, {"qmri_n", "181"}});
        return;
    }
    throw ConfigError("unknown scale '" + scale + "' (paper, desk)");
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"gen-data",  "train",     "solve-pde",
                                                   "solve-ocp", "solve-qmri", "verify-errors"};
    return names;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const TrainingError*>(&e)) return 4;
    if (dynamic_cast<const SolverError*>(&e)) return 3;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ContractViolation*>(&e) ||
        dynamic_cast<const ParseError*>(&e) || dynamic_cast<const MissingInput*>(&e))
        return 2;
    return 1;
}

namespace {

struct Context {
    const Config& cfg;
    std::ostream& log;
    fs::path out;

    std::string path(const std::string& name) const { return (out / name).string(); }
};

void require_file(const std::string& p, const std::string& producer) {
    if (!fs::exists(p)) throw MissingInput("missing input " + p + " (run '" + producer + "' with the same config first)");
}

std::string problem_of(const Config& cfg) {
    const std::string p = cfg.str("problem");
    if (p != "cubic" && p != "allen_cahn" && p != "qmri")
        throw ConfigError("config key 'problem': '" + p + "' is not one of cubic, allen_cahn, qmri");
    return p;
}

std::vector<std::uint64_t> seeds_of(const Config& cfg) {
    std::vector<std::uint64_t> s;
    for (const auto& item : cfg.list("seeds")) {
        char* end = nullptr;
        const long long v = std::strtoll(item.c_str(), &end, 10);
        if (*end != '\0' || v < 0) throw ConfigError("config key 'seeds': '" + item + "' is not a nonnegative integer");
        s.push_back(static_cast<std::uint64_t>(v));
    }
    if (s.empty()) throw ConfigError("config key 'seeds': at least one seed is required");
    return s;
}

std::vector<std::string> nonempty_list(const Config& cfg, const std::string& key) {
    auto l = cfg.list(key);
    if (l.empty()) throw ConfigError("config key '" + key + "': at least one entry is required");
    return l;
}

std::vector<double> nonempty_nums(const Config& cfg, const std::string& key) {
    auto l = cfg.num_list(key);
    if (l.empty()) throw ConfigError("config key '" + key + "': at least one entry is required");
    return l;
}

Grid2D solve_grid(const Config& cfg) {
    try {
        return Grid2D::square(0.0, 2.0, cfg.num("h"));
    } catch (const ContractViolation& e) {
        throw ConfigError(std::string("config key 'h': ") + e.what());
    }
}

// Allen-Cahn data have a single size; the tag keeps file names uniform.
std::vector<std::string> data_sizes_of(const Config& cfg) {
    if (problem_of(cfg) == "allen_cahn") return {"ac"};
    auto sizes = nonempty_list(cfg, "data_sizes");
    for (const auto& s : sizes) coarse_step_for(s);
    return sizes;
}

std::string data_file(const Context& c, const std::string& size) {
    return c.path(problem_of(c.cfg) == "allen_cahn" ? "data_allen_cahn.csv" : "data_cubic_" + size + ".csv");
}

std::string net_file(const Context& c, const std::string& arch, const std::string& size, std::uint64_t seed) {
    return c.path("net_" + problem_of(c.cfg) + "_" + arch + "_" + size + "_s" + std::to_string(seed) + ".txt");
}

int input_dim(const Config& cfg) { return problem_of(cfg) == "allen_cahn" ? 1 : 3; }

NonlinearityPtr exact_nonlinearity(const Config& cfg) {
    if (problem_of(cfg) == "allen_cahn") return std::make_shared<AllenCahn>(cfg.num("eta"));
    return cubic_example();
}

NonlinearityPtr load_surrogate(const Context& c, const std::string& arch, const std::string& size, std::uint64_t seed) {
    const std::string p = net_file(c, arch, size, seed);
    require_file(p, "train");
    const auto inputs = problem_of(c.cfg) == "allen_cahn" ? MlpNonlinearity::Inputs::state_only
                                                          : MlpNonlinearity::Inputs::space_and_state;
    return std::make_shared<MlpNonlinearity>(ScaledNet::load(p), inputs);
}

TrainOptions train_options(const Config& cfg) {
    TrainOptions o;
    o.max_iter = static_cast<int>(cfg.integer("train_max_iter"));
    if (o.max_iter < 0 || o.max_iter > 1000) throw ConfigError("config key 'train_max_iter' must lie in [0, 1000]");
    return o;
}

struct Stats {
    double min = 0.0, max = 0.0, mean = 0.0, std = 0.0;
};

// Sample standard deviation (n - 1); zero for a single value.
Stats stats_of(const std::vector<double>& v) {
    Stats s;
    if (v.empty()) {
        s.min = s.max = s.mean = s.std = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    s.min = *std::min_element(v.begin(), v.end());
    s.max = *std::max_element(v.begin(), v.end());
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double q = 0.0;
    for (double x : v) q += (x - s.mean) * (x - s.mean);
    s.std = v.size() > 1 ? std::sqrt(q / static_cast<double>(v.size() - 1)) : 0.0;
    return s;
}

void history_rows(CsvWriter& w, const std::vector<std::string>& key, const std::vector<IterationRecord>& hist) {
    for (const auto& r : hist) {
        for (const auto& k : key) w.cell(k);
        w.cell(r.iteration).cell(r.method).cell(r.objective).cell(r.merit).cell(r.residual).cell(r.step)
            .cell(r.active).cell(r.beta).cell(r.note);
        w.end_row();
    }
}

const std::vector<std::string> kHistoryColumns = {"iteration", "method", "objective", "merit", "residual",
                                                  "step",      "active", "beta",      "note"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// Shortest round-trip form, used in column names and history keys.
std::string tag_of(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

// ---------------------------------------------------------------- qMRI pieces

qmri::SequenceSpec sequence_of(const Config& cfg) {
    qmri::SequenceSpec s;
    s.L = static_cast<int>(cfg.integer("seq_L"));
    s.TR = cfg.num("seq_TR");
    s.phase = cfg.num("seq_phase");
    const auto flips = nonempty_nums(cfg, "seq_flips");
    if (flips.size() == 1)
        s.flips.assign(static_cast<std::size_t>(std::max(s.L, 0)), flips.front());
    else
        s.flips = flips;
    try {
        s.check();
    } catch (const ContractViolation& e) {
        throw ConfigError(std::string("sequence settings: ") + e.what());
    }
    return s;
}

std::string drnn_file(const Context& c) {
    return c.path("drnn_" + c.cfg.str("qmri_arch") + "_" + c.cfg.str("qmri_dictionary") + "_s" +
                  std::to_string(seeds_of(c.cfg).front()) + ".txt");
}

// ---------------------------------------------------------------- commands

void gen_data(const Context& c) {
    const std::string problem = problem_of(c.cfg);
    if (problem == "qmri") {
        const auto seq = sequence_of(c.cfg);
        const int n = static_cast<int>(c.cfg.integer("qmri_n"));
        const qmri::QmriImage truth = qmri::synth_phantom(n);
        qmri::save_phantom(c.path("phantom.csv"), truth);
        const auto masks = qmri::cartesian_row_masks(n, n, c.cfg.num("mask_density"), c.cfg.seed("mask_seed"), seq.L,
                                                     c.cfg.flag("mask_shared"));
        qmri::KSpaceData d = qmri::simulate_kspace(truth, qmri::ExactBlochModel(seq), masks);
        qmri::add_noise(d, c.cfg.num("kspace_sigma"), c.cfg.seed("kspace_noise_seed"));
        qmri::save_kspace(c.path("kspace"), d);
        c.log << "phantom " << n << "x" << n << ", " << d.samples() << " k-space samples -> " << c.path("kspace.bin")
              << '\n';
        return;
    }
    if (problem == "allen_cahn") {
        const Dataset d = allen_cahn_training_data(solve_grid(c.cfg), c.cfg.num("eta"),
                                                   static_cast<int>(c.cfg.integer("ac_stride")));
        write_dataset_csv(data_file(c, "ac"), d);
        c.log << d.size() << " samples -> " << data_file(c, "ac") << '\n';
        return;
    }
    DataGenOptions opts;
    opts.h = c.cfg.num("data_h");
    for (const auto& size : data_sizes_of(c.cfg)) {
        const Dataset d = cubic_training_data(coarse_step_for(size), opts);
        write_dataset_csv(data_file(c, size), d);
        c.log << size << ": " << d.size() << " samples -> " << data_file(c, size) << '\n';
    }
}

void train(const Context& c) {
    const TrainOptions opts = train_options(c.cfg);
    if (problem_of(c.cfg) == "qmri") {
        const auto seq = sequence_of(c.cfg);
        const qmri::Dictionary dict = qmri::standard_dictionary(c.cfg.str("qmri_dictionary"), seq);
        qmri::DrnnReport rep;
        const qmri::Drnn net = qmri::train_drnn(dict, seq.M0, qmri::drnn_hidden_widths(c.cfg.str("qmri_arch")),
                                                seeds_of(c.cfg).front(), opts, &rep);
        net.save(drnn_file(c));
        CsvWriter w(c.path("train_drnn.csv"),
                    {"frame", "iterations", "reason", "train_mse", "val_mse", "test_mse", "gamma"});
        for (std::size_t l = 0; l < rep.subnets.size(); ++l) {
            const auto& r = rep.subnets[l];
            w.cell(static_cast<int>(l + 1)).cell(r.iterations).cell(r.reason).cell(r.train_mse).cell(r.val_mse)
                .cell(r.test_mse).cell(r.gamma);
            w.end_row();
        }
        c.log << "DRNN " << c.cfg.str("qmri_arch") << " on " << dict.size() << " atoms, worst train mse "
              << rep.worst_train_mse << " -> " << drnn_file(c) << '\n';
        return;
    }
    CsvWriter w(c.path("train.csv"), {"arch", "data_size", "seed", "samples", "iterations", "reason", "train_mse",
                                      "val_mse", "test_mse", "gamma"});
    const int in = input_dim(c.cfg);
    for (const auto& size : data_sizes_of(c.cfg)) {
        const std::string df = data_file(c, size);
        require_file(df, "gen-data");
        const Dataset data = read_dataset_csv(df, in);
        for (const auto& arch : nonempty_list(c.cfg, "archs")) {
            const auto sizes = layer_sizes(arch, in, 1);
            const auto act = logsig_layers(static_cast<int>(sizes.size()) - 2);
            for (std::uint64_t seed : seeds_of(c.cfg)) {
                const SurrogateFit fit = fit_surrogate(data, sizes, act, seed, opts);
                fit.model.save(net_file(c, arch, size, seed));
                const auto& r = fit.report;
                w.cell(arch).cell(size).cell(static_cast<long long>(seed)).cell(data.size()).cell(r.iterations)
                    .cell(r.reason).cell(r.train_mse).cell(r.val_mse).cell(r.test_mse).cell(r.gamma);
                w.end_row();
                c.log << arch << " " << size << " seed " << seed << ": " << r.iterations << " iterations, train mse "
                      << r.train_mse << " (" << r.reason << ")\n";
            }
        }
    }
}

void solve_pde(const Context& c) {
    if (problem_of(c.cfg) != "cubic") throw ConfigError("solve-pde reproduces the cubic example; set problem = cubic");
    const Grid2D grid = solve_grid(c.cfg);
    const auto exact = exact_nonlinearity(c.cfg);
    const auto seeds = seeds_of(c.cfg);
    const std::vector<std::string> metrics = {"h1_discrete", "h1_exact", "l2_discrete", "l2_exact"};

    std::vector<std::string> table_header = {"arch", "data_size", "seeds", "failed"};
    for (const auto& m : metrics)
        for (const char* s : {"min", "max", "mean", "std"}) table_header.push_back(m + "_" + s);
    CsvWriter table(c.path("pde_table.csv"), table_header);
    CsvWriter runs(c.path("pde_runs.csv"), concat({"arch", "data_size", "seed", "status"}, metrics));
    CsvWriter hist(c.path("pde_history.csv"), {"arch", "data_size", "seed", "iteration", "residual"});
    int failures = 0;
    const Vector u = reference_control(grid);
    for (const auto& size : data_sizes_of(c.cfg)) {
        for (const auto& arch : nonempty_list(c.cfg, "archs")) {
            std::vector<std::vector<double>> values(metrics.size());
            int failed = 0;
            for (std::uint64_t seed : seeds) {
                const auto fn = load_surrogate(c, arch, size, seed);
                const PdeSolveReport rep = solve_state(grid, *fn, u, Vector::Zero(grid.size()), 1e-12, 30).report;
                for (std::size_t k = 0; k < rep.residual_history.size(); ++k) {
                    hist.cell(arch).cell(size).cell(static_cast<long long>(seed)).cell(static_cast<int>(k))
                        .cell(rep.residual_history[k]);
                    hist.end_row();
                }
                runs.cell(arch).cell(size).cell(static_cast<long long>(seed));
                try {
                    const StateErrors e = state_errors(grid, *fn, *exact);
                    const double v[] = {e.h1_discrete, e.h1_exact, e.l2_discrete, e.l2_exact};
                    runs.cell("converged");
                    for (std::size_t m = 0; m < metrics.size(); ++m) {
                        values[m].push_back(v[m]);
                        runs.cell(v[m]);
                    }
                    c.log << arch << " " << size << " seed " << seed << ": ||y_N - y*_h||_0 = " << e.l2_discrete << '\n';
                } catch (const SolverError& e) {
                    ++failed;
                    runs.cell("failed");
                    for (std::size_t m = 0; m < metrics.size(); ++m) runs.cell(std::numeric_limits<double>::quiet_NaN());
                    c.log << arch << " " << size << " seed " << seed << ": " << e.what() << '\n';
                }
                runs.end_row();
            }
            failures += failed;
            table.cell(arch).cell(size).cell(static_cast<int>(seeds.size())).cell(failed);
            for (const auto& v : values) {
                const Stats s = stats_of(v);
                table.cell(s.min).cell(s.max).cell(s.mean).cell(s.std);
            }
            table.end_row();
        }
    }
    if (failures > 0)
        throw SolverError("solve-pde: " + std::to_string(failures) + " state solve(s) did not converge; see " +
                          c.path("pde_runs.csv"));
}

Vector ocp_target(const Config& cfg, const Grid2D& grid, double sigma) {
    if (problem_of(cfg) == "cubic") return noisy_target(grid, sigma, cfg.seed("noise_seed"));
    Vector g = polarized_target(grid, cfg.num("eta"));
    std::mt19937_64 rng(cfg.seed("noise_seed"));
    std::normal_distribution<double> nd(0.0, 1.0);
    for (Eigen::Index k = 0; k < g.size(); ++k) g[k] += sigma * nd(rng);
    return g;
}

void solve_ocp(const Context& c) {
    if (problem_of(c.cfg) == "qmri") throw ConfigError("solve-ocp needs problem = cubic or allen_cahn");
    const Grid2D grid = solve_grid(c.cfg);
    const auto exact = exact_nonlinearity(c.cfg);
    const auto sigmas = nonempty_nums(c.cfg, "sigmas");
    const auto alphas = nonempty_nums(c.cfg, "alphas");
    const OcpMethod method = ocp_method_from_string(c.cfg.str("method"));
    OcpParams params;
    params.sqp.tol = c.cfg.num("ocp_tol");
    params.sqp.max_iter = static_cast<int>(c.cfg.integer("ocp_max_iter"));
    params.switch_threshold = c.cfg.num("switch_threshold");
    const double lo = c.cfg.num("box_lower"), hi = c.cfg.num("box_upper");

    std::vector<std::string> header = {"alpha", "arch", "data_size", "seed"};
    for (double s : sigmas)
        for (const char* m : {"u_l2", "y_l2", "y_h1"}) header.push_back(std::string(m) + "_sigma_" + tag_of(s));
    CsvWriter table(c.path("ocp_table.csv"), header);
    CsvWriter runs(c.path("ocp_runs.csv"),
                   {"alpha", "arch", "data_size", "seed", "sigma", "u_l2", "y_l2", "y_h1", "exact_status",
                    "exact_iterations", "exact_residual", "surrogate_status", "surrogate_iterations",
                    "surrogate_residual"});
    CsvWriter hist(c.path("ocp_history.csv"),
                   concat({"alpha", "arch", "data_size", "seed", "sigma", "model"}, kHistoryColumns));
    int failures = 0;
    for (double alpha : alphas) {
        for (const auto& size : data_sizes_of(c.cfg)) {
            for (const auto& arch : nonempty_list(c.cfg, "archs")) {
                for (std::uint64_t seed : seeds_of(c.cfg)) {
                    const auto fn = load_surrogate(c, arch, size, seed);
                    table.cell(alpha).cell(arch).cell(size).cell(static_cast<long long>(seed));
                    for (double sigma : sigmas) {
                        const ControlErrors e = control_errors(grid, exact, fn, ocp_target(c.cfg, grid, sigma), alpha,
                                                               lo, hi, params, method);
                        table.cell(e.u_l2).cell(e.y_l2).cell(e.y_h1);
                        runs.cell(alpha).cell(arch).cell(size).cell(static_cast<long long>(seed)).cell(sigma)
                            .cell(e.u_l2).cell(e.y_l2).cell(e.y_h1).cell(e.exact.status).cell(e.exact.iterations)
                            .cell(e.exact.point.total()).cell(e.surrogate.status).cell(e.surrogate.iterations)
                            .cell(e.surrogate.point.total());
                        runs.end_row();
                        const std::vector<std::string> key = {tag_of(alpha), arch, size, std::to_string(seed),
                                                              tag_of(sigma)};
                        history_rows(hist, concat(key, {"exact"}), e.exact.history);
                        history_rows(hist, concat(key, {"surrogate"}), e.surrogate.history);
                        if (!e.exact.converged()) ++failures;
                        if (!e.surrogate.converged()) ++failures;
                        c.log << "alpha " << alpha << " " << arch << " " << size << " seed " << seed << " sigma "
                              << sigma << ": ||u_N - ubar||_0 = " << e.u_l2 << " [" << e.exact.status << ", "
                              << e.surrogate.status << "]\n";
                    }
                    table.end_row();
                }
            }
        }
    }
    if (failures > 0)
        throw SolverError("solve-ocp: " + std::to_string(failures) + " control solve(s) did not converge; see " +
                          c.path("ocp_runs.csv"));
}

void solve_qmri(const Context& c) {
    if (problem_of(c.cfg) != "qmri") throw ConfigError("solve-qmri needs problem = qmri");
    const auto seq = sequence_of(c.cfg);
    require_file(c.path("phantom.csv"), "gen-data");
    require_file(c.path("kspace.json"), "gen-data");
    const qmri::QmriImage truth = qmri::load_phantom(c.path("phantom.csv"));
    const qmri::KSpaceData data = qmri::load_kspace(c.path("kspace"));
    if (data.nx != truth.grid.nx() || data.ny != truth.grid.ny())
        throw ConfigError("k-space and phantom sizes differ; rerun gen-data");
    const qmri::ExactBlochModel exact(seq);
    if (data.frames.cols() != exact.frames())
        throw ConfigError("k-space has " + std::to_string(data.frames.cols()) + " frames, the sequence " +
                          std::to_string(exact.frames()) + "; rerun gen-data");

    const std::string kind = c.cfg.str("qmri_model");
    std::unique_ptr<qmri::Drnn> drnn;
    if (kind == "drnn") {
        require_file(drnn_file(c), "train");
        drnn = std::make_unique<qmri::Drnn>(qmri::Drnn::load(drnn_file(c)));
        if (drnn->frames() != exact.frames()) throw ConfigError("DRNN frame count differs from the sequence; retrain");
    } else if (kind != "exact") {
        throw ConfigError("config key 'qmri_model': '" + kind + "' is not one of drnn, exact");
    }
    const qmri::SignalModel& model = drnn ? static_cast<const qmri::SignalModel&>(*drnn) : exact;

    const qmri::QmriImage init =
        qmri::dictionary_match_init(data, qmri::standard_dictionary(c.cfg.str("qmri_init_dictionary"), seq));
    qmri::QmriSolveParams params;
    params.sqp.tol = c.cfg.num("qmri_tol");
    params.sqp.max_iter = static_cast<int>(c.cfg.integer("qmri_max_iter"));
    const qmri::QmriResult res = qmri::solve_qmri_sqp(data, model, init, qmri::RegWeights{}, params);

    const std::string arch = drnn ? c.cfg.str("qmri_arch") : "exact";
    const std::string dict = drnn ? c.cfg.str("qmri_dictionary") : "-";
    CsvWriter table(c.path("qmri_table.csv"),
                    {"method", "arch", "dictionary", "T1", "T2", "rho", "M", "status", "iterations"});
    auto row = [&](const std::string& method, const qmri::QmriImage& img, double m, const std::string& status,
                   int iterations) {
        table.cell(method).cell(arch).cell(dict).cell(qmri::relative_error(img.T1, truth.T1))
            .cell(qmri::relative_error(img.T2, truth.T2)).cell(qmri::relative_error(img.rho, truth.rho));
        if (std::isnan(m))
            table.cell("-");
        else
            table.cell(m);
        table.cell(status).cell(iterations);
        table.end_row();
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double m_err = drnn ? qmri::series_relative_error(*drnn, exact, truth.T1, truth.T2) : nan;
    row("dictionary_match", init, nan, "-", 0);
    row("sqp", res.image, m_err, res.sqp.status, res.sqp.iterations);
    {
        CsvWriter hist(c.path("qmri_history.csv"), kHistoryColumns);
        history_rows(hist, {}, res.sqp.history);
    }
    CsvWriter maps(c.path("qmri_maps.csv"), {"i", "j", "T1_true", "T2_true", "rho_true", "T1", "T2", "rho"});
    for (int k = 0; k < truth.pixels(); ++k) {
        maps.cell(k % truth.grid.nx()).cell(k / truth.grid.nx()).cell(truth.T1[k]).cell(truth.T2[k])
            .cell(truth.rho[k]).cell(res.image.T1[k]).cell(res.image.T2[k]).cell(res.image.rho[k]);
        maps.end_row();
    }
    c.log << "qMRI " << arch << ": relative errors T1 " << qmri::relative_error(res.image.T1, truth.T1) << ", T2 "
          << qmri::relative_error(res.image.T2, truth.T2) << ", rho "
          << qmri::relative_error(res.image.rho, truth.rho) << " [" << res.sqp.status << ", "
          << res.sqp.iterations << " iterations]\n";
    if (!res.sqp.converged()) throw SolverError("solve-qmri: SQP stopped with status " + res.sqp.status);
}

void verify_errors(const Context& c) {
    const std::string mode = c.cfg.str("verify_mode");
    if (mode != "perfect" && mode != "general")
        throw ConfigError("config key 'verify_mode': '" + mode + "' is not one of perfect, general");
    const double alpha = c.cfg.num("verify_alpha");
    LinearQuadraticFamily fam = LinearQuadraticFamily::make(static_cast<int>(c.cfg.integer("verify_n")), alpha,
                                                            c.cfg.seed("verify_family_seed"));
    double residual = 0.0;
    double L1 = 0.0;
    if (mode == "general") {
        // Offset the target so the exact problem has a nonzero residual, then
        // take its minimizer as the reference.
        std::mt19937_64 rng(c.cfg.seed("verify_family_seed") + 1);
        std::normal_distribution<double> nd;
        Vector d(fam.g.size());
        for (Eigen::Index k = 0; k < d.size(); ++k) d[k] = nd(rng);
        fam.g += c.cfg.num("verify_residual") * d.normalized();
        fam.ubar = fam.solve_surrogate(0.0);
        residual = (fam.exact().value(fam.ubar) - fam.g).norm();
        std::vector<Vector> controls, probes;
        for (int q = 0; q < 6; ++q) {
            Vector u(fam.g.size());
            for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = nd(rng);
            (q < 4 ? controls : probes).push_back(fam.box.project(u));
        }
        const Vector ones = Vector::Ones(fam.g.size());
        L1 = estimate_budget(fam.exact(), fam.exact(), controls, probes, {ones, ones}).L1;
    }
    std::vector<std::pair<double, double>> pairs;
    for (double eps : nonempty_nums(c.cfg, "verify_eps"))
        pairs.emplace_back(eps, (fam.solve_surrogate(eps) - fam.ubar).norm());
    const RateReport r = verify_rate(pairs, alpha,
                                     mode == "perfect" ? RateMode::perfect_matching : RateMode::general,
                                     c.cfg.num("verify_margin"), L1, residual);
    write_rate_csv(c.path("rate.csv"), r);
    {
        std::ofstream s(c.path("rate_summary.csv"));
        s << "mode,alpha,residual,slope,intercept,bound\n"
          << mode << ',' << format_double(alpha) << ',' << format_double(residual) << ',' << format_double(r.slope)
          << ',' << format_double(r.intercept) << ',' << (r.bound_holds ? "pass" : "fail") << '\n';
    }
    c.log << "verify-errors (" << mode << "): slope " << r.slope << ", bound " << (r.bound_holds ? "pass" : "FAIL")
          << '\n';
    if (!r.bound_holds) throw SolverError("verify-errors: the error bound fails at some sweep point; see " +
                                          c.path("rate.csv"));
}

}  // namespace

void run_command(const std::string& name, const Config& cfg, std::ostream& log) {
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw ConfigError("unknown command '" + name + "'");
    Context c{cfg, log, fs::path(cfg.str("out"))};
    if (c.out.empty()) throw ConfigError("config key 'out' must not be empty");
    fs::create_directories(c.out);
    cfg.write_resolved(c.path(name + "_config.txt"));
    if (name == "gen-data") gen_data(c);
    else if (name == "train") train(c);
    else if (name == "solve-pde") solve_pde(c);
    else if (name == "solve-ocp") solve_ocp(c);
    else if (name == "solve-qmri") solve_qmri(c);
    else verify_errors(c);
}

}  // namespace licon
