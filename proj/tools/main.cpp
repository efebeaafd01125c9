#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "inphys/checkpoint.hpp"
#include "inphys/dataset.hpp"
#include "inphys/rollout.hpp"
#include "inphys/rng.hpp"
#include "inphys/svg.hpp"
#include "inphys/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace inphys;

namespace {

// Files created by the current command; removed again if it fails so a
// crashed invocation never leaves partial artifacts behind.
struct OutputGuard {
    std::vector<fs::path> files;
    bool armed = true;

    void track(const fs::path& p) { files.push_back(p); }
    void disarm() { armed = false; }
    ~OutputGuard() {
        if (!armed) return;
        std::error_code ec;
        for (const fs::path& p : files) fs::remove(p, ec);
    }
};

void write_text_file(OutputGuard& guard, const fs::path& path, const std::string& text) {
    guard.track(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path.string());
    out << text;
    out.flush();
    if (!out) throw io_error("write failed for " + path.string());
}

Domain parse_domain(const std::string& s) {
    if (s == "nbody") return Domain::nbody;
    if (s == "balls") return Domain::balls;
    if (s == "string") return Domain::string;
    throw config_error("unknown domain: " + s);
}

const char* domain_name(Domain d) {
    switch (d) {
        case Domain::nbody: return "nbody";
        case Domain::balls: return "balls";
        case Domain::string: return "string";
    }
    return "?";
}

Dataset load_dataset_checked(const std::string& path) {
    if (!fs::exists(path)) throw io_error("dataset not found: " + path);
    return load_dataset(path);
}

TrainedModel load_checkpoint_checked(const std::string& path) {
    if (!fs::exists(path)) throw io_error("checkpoint not found: " + path);
    return load_checkpoint(path);
}

// ---------------------------------------------------------------- gen ----

struct GenArgs {
    std::string domain = "nbody";
    int n = 3;
    int scenes = 100;
    int steps = 500;
    int samples = 100000;
    int val_samples = -1;
    int test_samples = -1;
    std::uint64_t seed = 0;
    std::string out;
    std::string orbit_mix = "half";
    int pinned = 1;
    double dt = 1e-3;
    std::string target = "velocity";
    bool no_contact_boost = false;
};

OrbitMix parse_orbit_mix(const std::string& s) {
    if (s == "random") return OrbitMix::random;
    if (s == "half") return OrbitMix::half;
    if (s == "orbit") return OrbitMix::orbit;
    throw config_error("unknown orbit mix: " + s);
}

int cmd_gen(const GenArgs& a) {
    DataGenConfig base;
    base.domain = parse_domain(a.domain);
    base.n_bodies = a.n;
    base.orbit_mix = parse_orbit_mix(a.orbit_mix);
    base.pinned = a.pinned;
    base.n_scenes = a.scenes;
    base.n_steps = a.steps;
    base.n_samples = a.samples;
    base.dt = a.dt;
    base.contact_boost = !a.no_contact_boost;
    if (a.target == "velocity")
        base.target = TargetKind::velocity;
    else if (a.target == "energy")
        base.target = TargetKind::energy;
    else
        throw config_error("unknown target kind: " + a.target);
    base.validate();

    fs::create_directories(a.out);
    OutputGuard guard;

    struct Split {
        const char* name;
        std::uint64_t stream;
        int samples;
    };
    int val_n = a.val_samples > 0 ? a.val_samples : std::max(1, a.samples / 5);
    int test_n = a.test_samples > 0 ? a.test_samples : std::max(1, a.samples / 5);
    const Split splits[3] = {{"train", 1, a.samples}, {"val", 2, val_n}, {"test", 3, test_n}};

    json manifest;
    manifest["command"] = "gen";
    manifest["domain"] = a.domain;
    manifest["n"] = a.n;
    manifest["orbit_mix"] = base.domain == Domain::nbody ? json(a.orbit_mix) : json(nullptr);
    manifest["pinned"] = base.domain == Domain::string ? json(a.pinned) : json(nullptr);
    manifest["scenes"] = a.scenes;
    manifest["steps"] = a.steps;
    manifest["dt"] = a.dt;
    manifest["seed"] = a.seed;
    manifest["target"] = a.target;
    manifest["contact_boost"] = base.contact_boost;
    manifest["format"] = {{"magic", "INDS"}, {"version", 1}};

    for (const Split& split : splits) {
        DataGenConfig cfg = base;
        cfg.seed = derive_seed(a.seed, split.stream);
        cfg.n_samples = split.samples;
        cfg.validate();
        Dataset ds = generate_dataset(cfg);
        fs::path file = fs::path(a.out) / (std::string(split.name) + ".ds");
        guard.track(file);
        save_dataset(ds, file.string());
        manifest["splits"][split.name] = {{"file", file.filename().string()},
                                          {"seed", cfg.seed},
                                          {"samples", ds.size()},
                                          {"n_objects", ds.n_objects},
                                          {"n_relations", ds.n_relations},
                                          {"raw_contact_rate", ds.raw_contact_rate}};
        std::cout << split.name << ": " << ds.size() << " samples, " << ds.n_objects
                  << " objects, " << ds.n_relations << " relations -> " << file.string()
                  << "\n";
    }
    write_text_file(guard, fs::path(a.out) / "manifest.json", manifest.dump(2) + "\n");
    guard.disarm();
    return 0;
}

// -------------------------------------------------------------- train ----

void apply_config_json(const json& j, TrainConfig& cfg, std::string& train_path,
                       std::string& val_path, std::string& out_dir) {
    static const std::vector<std::string> known = {
        "train_dataset", "val_dataset", "out_dir", "model", "marshal", "aggregate",
        "d_e", "fr_hidden", "fo_hidden", "d_p", "abstract_head", "fa_hidden",
        "mlp_hidden", "epochs", "batch_size", "l2_effects", "l2_params", "noise",
        "balance_bins", "seed", "checkpoint_every"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw config_error("train config: unknown key '" + it.key() + "'");
    }
    auto need = [&](const char* key) {
        if (!j.contains(key))
            throw config_error(std::string("train config: missing key '") + key + "'");
        return j.at(key);
    };
    train_path = need("train_dataset").get<std::string>();
    val_path = need("val_dataset").get<std::string>();
    out_dir = need("out_dir").get<std::string>();

    if (j.contains("model")) {
        std::string m = j["model"].get<std::string>();
        if (m == "in_full") cfg.model = ModelKind::in_full;
        else if (m == "in_dynamics_only") cfg.model = ModelKind::in_dynamics_only;
        else if (m == "mlp_flat") cfg.model = ModelKind::mlp_flat;
        else throw config_error("train config: unknown model '" + m + "'");
    }
    if (j.contains("marshal")) {
        std::string m = j["marshal"].get<std::string>();
        if (m == "basic") cfg.marshal = MarshalMode::basic;
        else if (m == "position_invariant") cfg.marshal = MarshalMode::position_invariant;
        else throw config_error("train config: unknown marshal mode '" + m + "'");
    }
    if (j.contains("aggregate")) {
        std::string m = j["aggregate"].get<std::string>();
        if (m == "full_state") cfg.aggregate = AggregateMode::full_state;
        else if (m == "velocity_only") cfg.aggregate = AggregateMode::velocity_only;
        else throw config_error("train config: unknown aggregate mode '" + m + "'");
    }
    if (j.contains("d_e")) cfg.d_e = j["d_e"].get<int>();
    if (j.contains("fr_hidden")) cfg.fr_hidden = j["fr_hidden"].get<std::vector<int>>();
    if (j.contains("fo_hidden")) cfg.fo_hidden = j["fo_hidden"].get<std::vector<int>>();
    if (j.contains("d_p")) cfg.d_p = j["d_p"].get<int>();
    if (j.contains("abstract_head")) cfg.abstract_head = j["abstract_head"].get<bool>();
    if (j.contains("fa_hidden")) cfg.fa_hidden = j["fa_hidden"].get<std::vector<int>>();
    if (j.contains("mlp_hidden")) cfg.mlp_hidden = j["mlp_hidden"].get<std::vector<int>>();
    if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
    if (j.contains("l2_effects")) cfg.l2_effects = j["l2_effects"].get<double>();
    if (j.contains("l2_params")) cfg.l2_params = j["l2_params"].get<double>();
    if (j.contains("noise")) {
        const json& n = j["noise"];
        for (auto it = n.begin(); it != n.end(); ++it) {
            std::string k = it.key();
            if (k == "fraction") cfg.noise.fraction = it.value().get<double>();
            else if (k == "std_scale") cfg.noise.std_scale = it.value().get<double>();
            else if (k == "anneal_start") cfg.noise.anneal_start = it.value().get<int>();
            else if (k == "anneal_end") cfg.noise.anneal_end = it.value().get<int>();
            else throw config_error("train config: unknown noise key '" + k + "'");
        }
    }
    if (j.contains("balance_bins")) cfg.balance_bins = j["balance_bins"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("checkpoint_every")) cfg.checkpoint_every = j["checkpoint_every"].get<int>();
}

struct TrainArgs {
    std::string config;
    bool resume = false;
    std::string baseline;
    bool quiet = false;
    int stop_after = -1;
};

int cmd_train(const TrainArgs& a) {
    if (!fs::exists(a.config)) throw io_error("config not found: " + a.config);
    std::ifstream cfg_in(a.config);
    json j;
    try {
        j = json::parse(cfg_in);
    } catch (const json::exception& e) {
        throw config_error(std::string("train config: ") + e.what());
    }
    TrainConfig cfg;
    std::string train_path, val_path, out_dir;
    try {
        apply_config_json(j, cfg, train_path, val_path, out_dir);
    } catch (const json::exception& e) {
        throw config_error(std::string("train config: ") + e.what());
    }

    Dataset train_ds = load_dataset_checked(train_path);

    if (a.baseline == "constant_velocity") {
        Dataset val_ds = load_dataset_checked(val_path);
        double train_mse = evaluate_constant_velocity(train_ds);
        double val_mse = evaluate_constant_velocity(val_ds);
        std::cout << "constant_velocity train_mse " << train_mse << "\n";
        std::cout << "constant_velocity val_mse " << val_mse << "\n";
        return 0;
    }
    if (!a.baseline.empty())
        throw config_error("unknown baseline: " + a.baseline);

    Dataset val_ds = load_dataset_checked(val_path);
    fs::create_directories(out_dir);
    fs::path ckpt_path = fs::path(out_dir) / "checkpoint.ckpt";

    TrainedModel state;
    if (a.resume) {
        state = load_checkpoint_checked(ckpt_path.string());
    } else {
        state = init_trained_model(cfg, train_ds);
    }

    OutputGuard guard;
    auto persist = [&](const TrainedModel& tm) {
        fs::path tmp = ckpt_path;
        tmp += ".tmp";
        save_checkpoint(tm, tmp.string());
        fs::rename(tmp, ckpt_path);
        std::ostringstream metrics;
        write_metrics_csv(tm.metrics, metrics);
        std::ofstream mout(fs::path(out_dir) / "metrics.csv", std::ios::binary);
        mout << metrics.str();
        std::ofstream card(fs::path(out_dir) / "model_card.json", std::ios::binary);
        card << model_card_json(tm);
    };

    auto on_epoch = [&](const TrainedModel& tm) {
        const EpochRecord& r = tm.metrics.back();
        if (!a.quiet)
            std::cout << "epoch " << r.epoch << " train_mse " << r.train_mse << " val_mse "
                      << r.val_mse << " lr " << r.lr << "\n";
        if (tm.epochs_done % tm.config.checkpoint_every == 0 ||
            tm.epochs_done == tm.config.epochs)
            persist(tm);
    };

    TrainResult result = train(state, train_ds, val_ds, on_epoch, a.stop_after);
    if (result.diverged) {
        std::cerr << "training diverged at epoch " << result.diverged_epoch
                  << "; last periodic checkpoint kept\n";
        guard.disarm();
        throw numeric_error("training diverged");
    }
    persist(state);
    guard.disarm();
    std::cout << "done: best val_mse " << state.best_val << " after " << state.epochs_done
              << " epochs -> " << ckpt_path.string() << "\n";
    return 0;
}

// ---------------------------------------------------------- eval/sweep ----

void eval_row(std::ostream& table, std::ostream* csv, const TrainedModel& model,
              const std::string& dataset_path) {
    Dataset ds = load_dataset_checked(dataset_path);
    EvalResult res = evaluate(model, ds);
    double baseline = 0.0;
    const char* baseline_name = "";
    if (ds.provenance.target == TargetKind::velocity) {
        baseline = evaluate_constant_velocity(ds);
        baseline_name = "constant_velocity";
    } else {
        baseline = mean_predictor_mse(ds, ds);
        baseline_name = "mean_predictor";
    }
    double ratio = baseline > 0.0 ? res.mse / baseline : 0.0;
    table << dataset_path << ": n_objects " << ds.n_objects << " samples " << ds.size()
          << " mse " << res.mse << " " << baseline_name << " " << baseline << " ratio "
          << ratio << "\n";
    if (csv) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", res.mse, baseline, ratio);
        *csv << dataset_path << "," << ds.n_objects << "," << ds.size() << "," << buf
             << "\n";
    }
}

struct EvalArgs {
    std::string checkpoint;
    std::vector<std::string> datasets;
    std::string csv;
};

int cmd_eval(const EvalArgs& a) {
    TrainedModel model = load_checkpoint_checked(a.checkpoint);
    OutputGuard guard;
    std::ostringstream csv;
    csv << "dataset,n_objects,samples,mse_model,mse_baseline,ratio\n";
    for (const std::string& path : a.datasets)
        eval_row(std::cout, a.csv.empty() ? nullptr : &csv, model, path);
    if (!a.csv.empty()) write_text_file(guard, a.csv, csv.str());
    guard.disarm();
    return 0;
}

// ------------------------------------------------------------ rollout ----

struct RolloutArgs {
    std::string checkpoint;
    bool oracle = false;
    std::string domain = "nbody";
    int n = 3;
    std::uint64_t seed = 0;
    bool orbit = false;
    int pinned = 1;
    int steps = 1000;
    double dt = 1e-3;
    int frame_stride = 100;
    bool use_input_velocity = false;
    std::string out;
};

int cmd_rollout(const RolloutArgs& a) {
    if (!a.oracle && a.checkpoint.empty())
        throw config_error("rollout: need --checkpoint or --oracle");

    DataGenConfig scene_cfg;
    scene_cfg.domain = parse_domain(a.domain);
    scene_cfg.n_bodies = a.n;
    scene_cfg.orbit_mix = a.orbit ? OrbitMix::orbit : OrbitMix::random;
    scene_cfg.pinned = a.pinned;
    scene_cfg.seed = a.seed;
    Scene scene = sample_scene_for(scene_cfg, 0);

    Predictor predictor;
    if (a.oracle) {
        predictor = oracle_predictor(a.dt);
    } else {
        TrainedModel model = load_checkpoint_checked(a.checkpoint);
        if (model.domain != scene_cfg.domain)
            throw artifact_error("rollout: checkpoint domain does not match the scene");
        predictor = model_predictor(model);
    }

    fs::create_directories(fs::path(a.out) / "frames");
    OutputGuard guard;

    Trajectory truth = simulate(scene, a.steps, a.dt);
    RolloutResult model_run = rollout(scene, predictor, a.steps, a.dt, a.use_input_velocity);

    fs::path truth_path = fs::path(a.out) / "truth.traj";
    fs::path model_path = fs::path(a.out) / "model.traj";
    guard.track(truth_path);
    save_trajectory(truth, truth_path.string());
    guard.track(model_path);
    save_trajectory(model_run.traj, model_path.string());

    std::vector<double> divergence = positional_divergence(truth, model_run.traj);
    std::ostringstream div_csv;
    export_divergence_csv(divergence, div_csv);
    write_text_file(guard, fs::path(a.out) / "divergence.csv", div_csv.str());

    if (a.frame_stride > 0) {
        std::vector<const Trajectory*> both = {&truth, &model_run.traj};
        std::array<double, 4> bounds = trajectory_bounds(both);
        for (std::size_t t = 0; t < model_run.traj.snapshots.size();
             t += static_cast<std::size_t>(a.frame_stride)) {
            char name[32];
            std::snprintf(name, sizeof name, "frame_%06zu.svg", t);
            std::string svg = render_frame(scene, truth.snapshots[t],
                                           &model_run.traj.snapshots[t], bounds);
            write_text_file(guard, fs::path(a.out) / "frames" / name, svg);
        }
    }

    std::cout << "rollout: " << model_run.traj.snapshots.size() << " snapshots";
    if (model_run.truncated_at >= 0)
        std::cout << " (truncated at step " << model_run.truncated_at << ")";
    std::cout << ", final divergence " << divergence.back() << "\n";
    guard.disarm();
    return 0;
}

// ------------------------------------------------------------- export ----

struct ExportArgs {
    std::string dataset;
    std::string csv;
};

int cmd_export(const ExportArgs& a) {
    Dataset ds = load_dataset_checked(a.dataset);
    OutputGuard guard;
    guard.track(a.csv);
    std::ofstream out(a.csv, std::ios::binary);
    if (!out) throw io_error("cannot open " + a.csv);
    export_dataset_csv(ds, out);
    guard.disarm();
    std::cout << "exported " << ds.size() << " samples to " << a.csv << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D physics simulator and interaction-network workbench"};
    app.require_subcommand(1);

    GenArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate train/val/test datasets");
    gen_cmd->add_option("--domain", gen.domain, "nbody | balls | string");
    gen_cmd->add_option("--n", gen.n, "bodies / balls / string masses")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--scenes", gen.scenes)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--steps", gen.steps)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--samples", gen.samples, "training pairs")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--val-samples", gen.val_samples, "default samples/5");
    gen_cmd->add_option("--test-samples", gen.test_samples, "default samples/5");
    gen_cmd->add_option("--seed", gen.seed);
    gen_cmd->add_option("--out", gen.out, "output directory")->required();
    gen_cmd->add_option("--orbit-mix", gen.orbit_mix,
                        "n-body scene starts: half (default; even scenes orbit a heavy "
                        "star, odd scenes get random velocities), orbit, or random")
        ->check(CLI::IsMember({"random", "half", "orbit"}));
    gen_cmd->add_option("--pinned", gen.pinned, "string: pinned ends (0, 1, 2)");
    gen_cmd->add_option("--dt", gen.dt);
    gen_cmd->add_option("--target", gen.target, "velocity | energy");
    gen_cmd->add_flag("--no-contact-boost", gen.no_contact_boost,
                      "balls: sample (scene, step) pairs strictly uniformly");

    TrainArgs train_args;
    CLI::App* train_cmd = app.add_subcommand("train", "train a model from a JSON config");
    train_cmd->add_option("--config", train_args.config, "JSON config path")->required();
    train_cmd->add_flag("--resume", train_args.resume, "continue from out_dir/checkpoint.ckpt");
    train_cmd->add_option("--baseline", train_args.baseline,
                          "evaluation-only baseline (constant_velocity)");
    train_cmd->add_flag("--quiet", train_args.quiet, "suppress per-epoch lines");
    train_cmd->add_option("--stop-after", train_args.stop_after,
                          "pause after this many total epochs (resume with --resume)");

    EvalArgs eval_args;
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on datasets");
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint)->required();
    eval_cmd->add_option("--dataset", eval_args.datasets, "dataset file(s)")
        ->required()
        ->expected(-1);
    eval_cmd->add_option("--csv", eval_args.csv, "also write rows to this CSV");

    EvalArgs sweep_args;
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "generalization sweep over several datasets");
    sweep_cmd->add_option("--checkpoint", sweep_args.checkpoint)->required();
    sweep_cmd->add_option("--dataset", sweep_args.datasets, "dataset files")
        ->required()
        ->expected(-1);
    sweep_cmd->add_option("--csv", sweep_args.csv);

    RolloutArgs roll;
    CLI::App* roll_cmd = app.add_subcommand("rollout", "closed-loop rollout vs ground truth");
    roll_cmd->add_option("--checkpoint", roll.checkpoint);
    roll_cmd->add_flag("--oracle", roll.oracle, "use the simulator itself as the predictor");
    roll_cmd->add_option("--domain", roll.domain);
    roll_cmd->add_option("--n", roll.n)->check(CLI::PositiveNumber);
    roll_cmd->add_option("--seed", roll.seed);
    roll_cmd->add_flag("--orbit", roll.orbit, "n-body: orbit start instead of random velocities");
    roll_cmd->add_option("--pinned", roll.pinned);
    roll_cmd->add_option("--steps", roll.steps)->check(CLI::PositiveNumber);
    roll_cmd->add_option("--dt", roll.dt);
    roll_cmd->add_option("--frame-stride", roll.frame_stride, "0 disables SVG frames");
    roll_cmd->add_flag("--use-input-velocity", roll.use_input_velocity,
                       "update positions with the pre-prediction velocity");
    roll_cmd->add_option("--out", roll.out, "output directory")->required();

    ExportArgs export_args;
    CLI::App* export_cmd = app.add_subcommand("export", "dataset to CSV");
    export_cmd->add_option("--dataset", export_args.dataset)->required();
    export_cmd->add_option("--csv", export_args.csv)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen(gen);
        if (train_cmd->parsed()) return cmd_train(train_args);
        if (eval_cmd->parsed()) return cmd_eval(eval_args);
        if (sweep_cmd->parsed()) return cmd_eval(sweep_args);
        if (roll_cmd->parsed()) return cmd_rollout(roll);
        if (export_cmd->parsed()) return cmd_export(export_args);
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const shape_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const artifact_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const sampler_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const geometry_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
