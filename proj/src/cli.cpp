#include "cpinn/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <malloc.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpinn/checkpoint.hpp"
#include "cpinn/errors.hpp"

namespace cpinn::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_for_write(const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    return f;
}

void finish(std::ofstream& f, const fs::path& path) {
    f.flush();
    if (!f) throw IoError("failed writing " + path.string());
}

template <typename T>
void require_positive(const std::optional<T>& v, const char* flag) {
    if (v && !(*v > T(0))) throw UsageError(std::string(flag) + " must be positive");
}

json config_json(const TrainingConfig& c, const ProblemSpec& spec, const RunConfig& run) {
    json j;
    j["problem"] = std::string(problem_name(c.problem));
    j["model"] = std::string(variant_name(c.variant));
    j["epsilon"] = spec.epsilon;
    j["mu"] = spec.mu ? json(*spec.mu) : json(nullptr);
    j["epochs"] = c.epochs;
    j["lr"] = c.lr;
    j["lr_schedule"] = {{"kind", c.schedule.kind == ScheduleKind::constant ? "constant" : "step_decay"},
                        {"decay_factor", c.schedule.decay_factor},
                        {"decay_every", c.schedule.decay_every}};
    j["seed"] = c.seed;
    j["points"] = c.n_collocation;
    j["boundary_points"] = c.n_boundary_per_face;
    j["log_every"] = c.log_every;
    j["resample_every_epoch"] = c.resample_every_epoch;
    j["batch_size"] = c.batch_size ? json(*c.batch_size) : json(nullptr);
    j["weights"] = {{"lambda_D", c.weights.lambda_D},
                    {"lambda_B", c.weights.lambda_B},
                    {"lambda_I", c.weights.lambda_I},
                    {"lambda_bc_right", c.weights.lambda_bc_right},
                    {"lambda_soft", c.weights.lambda_soft}};
    j["architecture"] = {{"hidden_layers", c.arch.hidden_layers},
                         {"outer_width", c.arch.outer_width},
                         {"inner_width", c.arch.inner_width}};
    j["emit_solution_grid"] = run.emit_solution_grid;
    return j;
}

struct Overrides {
    std::optional<double> epsilon, mu, lr, lr_decay;
    std::optional<long> epochs, seed, log_every, lr_decay_every;
    std::optional<int> points, boundary_points, hidden_layers, outer_width, inner_width;
    bool resample = false;
};

TrainingConfig resolve(ProblemId problem, Variant variant, const Overrides& o) {
    TrainingConfig c = default_config(problem, variant);
    c.epsilon = o.epsilon;
    c.mu = o.mu;
    if (o.epochs) c.epochs = *o.epochs;
    if (o.lr) c.lr = *o.lr;
    if (o.seed) c.seed = static_cast<std::uint64_t>(*o.seed);
    if (o.points) c.n_collocation = *o.points;
    if (o.boundary_points) c.n_boundary_per_face = *o.boundary_points;
    if (o.log_every) c.log_every = *o.log_every;
    c.log_every = std::min(c.log_every, c.epochs);
    c.resample_every_epoch = o.resample;
    if (o.lr_decay || o.lr_decay_every) c.schedule.kind = ScheduleKind::step_decay;
    if (o.lr_decay) c.schedule.decay_factor = *o.lr_decay;
    if (o.lr_decay_every) c.schedule.decay_every = *o.lr_decay_every;
    if (o.hidden_layers) c.arch.hidden_layers = *o.hidden_layers;
    if (o.outer_width) c.arch.outer_width = *o.outer_width;
    if (o.inner_width) c.arch.inner_width = *o.inner_width;
    return c;
}

} // namespace

std::string version_string() {
#ifdef CPINN_VERSION_STRING
    return CPINN_VERSION_STRING;
#else
    return "v0.1.0";
#endif
}

void tune_allocator() {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
}

std::optional<RunConfig> parse_args(const std::vector<std::string>& args, std::ostream& out) {
    CLI::App app{"Composite physics-informed networks for singularly perturbed boundary-value problems", "cpinn"};

    std::string problem_s, model_s = "cpinn", compare_s;
    Overrides o;
    RunConfig run;
    bool no_solution = false;

    app.add_option("--problem", problem_s, "cd1d | rd1d | cd-coupled | rd-coupled | cd2d-ex2 | cd2d-ex3")->required();
    app.add_option("--model", model_s, "pinn | pipinn | cpinn");
    app.add_option("--epsilon", o.epsilon, "perturbation parameter");
    app.add_option("--mu", o.mu, "second perturbation parameter (coupled systems)");
    app.add_option("--epochs", o.epochs);
    app.add_option("--lr", o.lr, "base learning rate");
    app.add_option("--seed", o.seed, "seed for initialization and sampling");
    app.add_option("--points", o.points, "interior collocation points");
    app.add_option("--boundary-points", o.boundary_points, "boundary points per face (2D)");
    app.add_option("--log-every", o.log_every);
    app.add_option("--out-dir", run.out_dir);
    app.add_option("--compare", compare_s, "train a second variant and write comparison.csv");
    app.add_flag("--resample-every-epoch", o.resample);
    app.add_option("--lr-decay", o.lr_decay, "step-decay factor");
    app.add_option("--lr-decay-every", o.lr_decay_every, "epochs between decays");
    app.add_option("--hidden-layers", o.hidden_layers);
    app.add_option("--outer-width", o.outer_width);
    app.add_option("--inner-width", o.inner_width);
    app.add_flag("--no-solution-grid", no_solution, "skip solution.csv");
    app.add_flag("--quiet", run.quiet);

    std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(rev.begin(), rev.end());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    const auto problem = parse_problem_id(problem_s);
    if (!problem) throw UsageError("unknown problem '" + problem_s + "'");
    const auto variant = parse_variant(model_s);
    if (!variant) throw UsageError("unknown model '" + model_s + "'");

    require_positive(o.epsilon, "--epsilon");
    require_positive(o.mu, "--mu");
    require_positive(o.epochs, "--epochs");
    require_positive(o.lr, "--lr");
    require_positive(o.points, "--points");
    require_positive(o.boundary_points, "--boundary-points");
    require_positive(o.log_every, "--log-every");
    require_positive(o.lr_decay, "--lr-decay");
    require_positive(o.lr_decay_every, "--lr-decay-every");
    require_positive(o.hidden_layers, "--hidden-layers");
    require_positive(o.outer_width, "--outer-width");
    require_positive(o.inner_width, "--inner-width");
    if (o.seed && *o.seed < 0) throw UsageError("--seed must be non-negative");

    if (!o.seed) {
        if (const char* env = std::getenv("SPLAYER_SEED"); env && *env) {
            char* end = nullptr;
            const long long s = std::strtoll(env, &end, 10);
            if (*end != '\0' || s < 0) throw UsageError("SPLAYER_SEED must be a non-negative integer");
            o.seed = static_cast<long>(s);
        }
    }

    run.emit_solution_grid = !no_solution;
    try {
        run.training = resolve(*problem, *variant, o);
        validate(run.training);
        make_problem(*problem, o.epsilon, o.mu);
        if (!compare_s.empty()) {
            const auto other = parse_variant(compare_s);
            if (!other) throw UsageError("unknown model '" + compare_s + "' for --compare");
            if (*other == *variant) throw UsageError("--compare needs a different model");
            run.compare = *other;
            run.compare_training = resolve(*problem, *other, o);
            validate(*run.compare_training);
        }
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    return run;
}

void write_loss_history(const std::vector<LossRecord>& records, const fs::path& path) {
    auto f = open_for_write(path);
    f << "epoch,total,residual,boundary,lr\n";
    for (const auto& r : records) {
        f << r.epoch << ',' << fmt_real(r.total) << ',' << fmt_real(r.residual_term) << ','
          << fmt_real(r.boundary_term) << ',' << fmt_real(r.lr_used) << '\n';
    }
    finish(f, path);
}

std::vector<LossRecord> read_loss_history(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(f, line);
    if (line != "epoch,total,residual,boundary,lr") throw IoError("unexpected loss history header");
    std::vector<LossRecord> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        LossRecord r;
        if (std::sscanf(line.c_str(), "%ld,%lf,%lf,%lf,%lf", &r.epoch, &r.total, &r.residual_term,
                        &r.boundary_term, &r.lr_used) != 5) {
            throw IoError("malformed loss history row: " + line);
        }
        out.push_back(r);
    }
    return out;
}

void write_solution(const SolutionTable& table, const fs::path& path) {
    auto f = open_for_write(path);
    f << (table.dim == 2 ? "x,y," : "x,") << "component,predicted,exact,abs_error\n";
    for (const auto& r : table.rows) {
        f << fmt_real(r.x[0]) << ',';
        if (table.dim == 2) f << fmt_real(r.x[1]) << ',';
        f << r.component << ',' << fmt_real(r.predicted) << ',' << fmt_real(r.exact) << ','
          << fmt_real(r.abs_error) << '\n';
    }
    finish(f, path);
}

void write_comparison(Variant a, const std::vector<LossRecord>& ra, Variant b, const std::vector<LossRecord>& rb,
                      const fs::path& path) {
    std::map<long, std::pair<std::string, std::string>> rows;
    for (const auto& r : ra) rows[r.epoch].first = fmt_real(r.total);
    for (const auto& r : rb) rows[r.epoch].second = fmt_real(r.total);
    auto f = open_for_write(path);
    f << "epoch," << variant_name(a) << ',' << variant_name(b) << '\n';
    for (const auto& [epoch, vals] : rows) f << epoch << ',' << vals.first << ',' << vals.second << '\n';
    finish(f, path);
}

void write_outputs(const TrainingConfig& config, const RunConfig& run, const TrainingResult& result,
                   const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());

    write_loss_history(result.records, dir / "loss_history.csv");
    if (run.emit_solution_grid) write_solution(result.solution, dir / "solution.csv");
    save_checkpoint(result.model, dir / "model.ckpt");

    json summary;
    summary["version"] = version_string();
    summary["config"] = config_json(config, result.spec, run);
    summary["config"]["out_dir"] = dir.string();
    summary["final_loss"] = result.metrics.final_loss;
    summary["l2_rel_error"] = result.metrics.l2_rel_error;
    summary["max_abs_error"] = result.metrics.max_abs_error;
    summary["wall_time_seconds"] = result.metrics.wall_time_seconds;
    auto f = open_for_write(dir / "summary.json");
    f << summary.dump(2) << '\n';
    finish(f, dir / "summary.json");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::optional<RunConfig> parsed;
    try {
        parsed = parse_args(args, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\nrun with --help for the list of options\n";
        return kUsage;
    }
    if (!parsed) return kOk;
    const RunConfig& cfg = *parsed;

    auto train_one = [&](const TrainingConfig& tc) {
        if (!cfg.quiet) {
            out << problem_name(tc.problem) << " / " << variant_name(tc.variant) << ": " << tc.epochs
                << " epochs, lr " << tc.lr << ", seed " << tc.seed << '\n';
        }
        return train(tc, [&](const LossRecord& r) {
            if (!cfg.quiet) out << "epoch " << r.epoch << "  loss " << fmt_real(r.total) << '\n';
        });
    };

    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec || !fs::is_directory(cfg.out_dir)) {
        err << "I/O error: cannot create output directory " << cfg.out_dir.string() << '\n';
        return kIo;
    }

    try {
        TrainingResult first = train_one(cfg.training);
        if (!cfg.compare) {
            write_outputs(cfg.training, cfg, first, cfg.out_dir);
        } else {
            TrainingResult second = train_one(*cfg.compare_training);
            write_outputs(cfg.training, cfg, first, cfg.out_dir / std::string(variant_name(cfg.training.variant)));
            write_outputs(*cfg.compare_training, cfg, second,
                          cfg.out_dir / std::string(variant_name(cfg.compare_training->variant)));
            write_comparison(cfg.training.variant, first.records, cfg.compare_training->variant, second.records,
                             cfg.out_dir / "comparison.csv");
        }
        if (!cfg.quiet) out << "outputs written to " << cfg.out_dir.string() << '\n';
    } catch (const DivergenceError& e) {
        err << "training diverged: " << e.what() << '\n';
        return kDivergence;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    }
    return kOk;
}

} // namespace cpinn::cli
