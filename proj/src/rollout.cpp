#include "inphys/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "inphys/serialize.hpp"

namespace inphys {

Predictor model_predictor(const TrainedModel& model, bool use_best) {
    if (model.target != TargetKind::velocity)
        throw config_error("model_predictor: checkpoint does not predict velocities");
    if (model.config.model == ModelKind::mlp_flat) {
        MlpBaseline net = use_best && model.has_best ? model.best_flat : model.flat;
        Normalizer norm = model.norm;
        return [net = std::move(net), norm = std::move(norm)](const Scene& scene) {
            GraphInput g = normalize_graph(norm, scene_to_graph(scene));
            if (g.n_objects() != net.n_objects || g.n_relations() != net.n_relations)
                throw artifact_error("model_predictor: scene does not match the mlp baseline size");
            Matrix y = mlp_forward(net.net, flatten_graph(g));
            return norm.target.invert(unflatten_output(y, net.out_rows, net.out_cols));
        };
    }
    InModel net = use_best && model.has_best ? model.best_in : model.in;
    Normalizer norm = model.norm;
    return [net = std::move(net), norm = std::move(norm)](const Scene& scene) {
        GraphInput g = normalize_graph(norm, scene_to_graph(scene));
        return norm.target.invert(predict(net, g));
    };
}

Predictor oracle_predictor(double dt) {
    if (!(dt > 0.0)) throw config_error("oracle_predictor: dt must be positive");
    return [dt](const Scene& scene) {
        Scene scratch = scene;
        euler_step(scratch, dt);
        Matrix v(2, scratch.n());
        for (int j = 0; j < scratch.n(); ++j) {
            v(0, j) = scratch.entities[static_cast<std::size_t>(j)].vel.x;
            v(1, j) = scratch.entities[static_cast<std::size_t>(j)].vel.y;
        }
        return v;
    };
}

RolloutResult rollout(const Scene& initial, const Predictor& predictor, int steps,
                      double dt, bool use_input_velocity) {
    if (steps < 1) throw config_error("rollout: steps must be positive");
    if (!(dt > 0.0)) throw config_error("rollout: dt must be positive");
    Scene scene = initial;
    RolloutResult result;
    result.traj.dt = dt;

    auto snapshot = [&]() {
        std::vector<Trajectory::State> snap;
        snap.reserve(scene.entities.size());
        for (const Entity& e : scene.entities) snap.push_back({e.pos, e.vel});
        result.traj.snapshots.push_back(std::move(snap));
    };
    snapshot();

    for (int t = 0; t < steps; ++t) {
        Matrix v = predictor(scene);
        if (v.rows != 2 || v.cols != scene.n())
            throw shape_error("rollout: predictor returned wrong shape");
        if (!all_finite(v)) {
            result.truncated_at = t;
            break;
        }
        for (int j = 0; j < scene.n(); ++j) {
            Entity& e = scene.entities[static_cast<std::size_t>(j)];
            if (e.is_static()) continue;
            Vec2 before = e.vel;
            e.vel = {v(0, j), v(1, j)};
            e.pos += (use_input_velocity ? before : e.vel) * dt;
        }
        snapshot();
    }
    result.traj.steps = static_cast<int>(result.traj.snapshots.size()) - 1;
    return result;
}

std::vector<double> positional_divergence(const Trajectory& a, const Trajectory& b) {
    std::size_t n_snapshots = std::min(a.snapshots.size(), b.snapshots.size());
    if (n_snapshots == 0) throw data_error("positional_divergence: empty trajectory");
    if (a.snapshots[0].size() != b.snapshots[0].size())
        throw data_error("positional_divergence: entity count mismatch");
    std::vector<double> out;
    out.reserve(n_snapshots);
    for (std::size_t t = 0; t < n_snapshots; ++t) {
        double worst = 0.0;
        for (std::size_t j = 0; j < a.snapshots[t].size(); ++j)
            worst = std::max(worst, norm(a.snapshots[t][j].pos - b.snapshots[t][j].pos));
        out.push_back(worst);
    }
    return out;
}

namespace {

constexpr char kTrajectoryMagic[] = "INTJ";
constexpr std::uint32_t kTrajectoryVersion = 1;

} // namespace

void save_trajectory(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("save_trajectory: cannot open " + path);
    write_magic(out, kTrajectoryMagic, kTrajectoryVersion);
    write_f64(out, traj.dt);
    int n = traj.snapshots.empty() ? 0 : static_cast<int>(traj.snapshots[0].size());
    write_i32(out, n);
    write_i32(out, static_cast<int>(traj.snapshots.size()));
    for (const auto& snap : traj.snapshots) {
        if (static_cast<int>(snap.size()) != n)
            throw data_error("save_trajectory: ragged snapshots");
        for (const Trajectory::State& s : snap) {
            write_f64(out, s.pos.x);
            write_f64(out, s.pos.y);
            write_f64(out, s.vel.x);
            write_f64(out, s.vel.y);
        }
    }
    out.flush();
    if (!out) throw io_error("save_trajectory: write failed for " + path);
}

Trajectory load_trajectory(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("load_trajectory: cannot open " + path);
    read_magic(in, kTrajectoryMagic, kTrajectoryVersion);
    Trajectory traj;
    traj.dt = read_f64(in);
    int n = read_i32(in);
    int snapshots = read_i32(in);
    if (n < 0 || snapshots < 1) throw io_error("load_trajectory: bad header");
    traj.snapshots.reserve(static_cast<std::size_t>(snapshots));
    for (int t = 0; t < snapshots; ++t) {
        std::vector<Trajectory::State> snap(static_cast<std::size_t>(n));
        for (Trajectory::State& s : snap) {
            s.pos.x = read_f64(in);
            s.pos.y = read_f64(in);
            s.vel.x = read_f64(in);
            s.vel.y = read_f64(in);
        }
        traj.snapshots.push_back(std::move(snap));
    }
    traj.steps = snapshots - 1;
    return traj;
}

void export_divergence_csv(const std::vector<double>& divergence, std::ostream& out) {
    char buf[32];
    out << "step,divergence\n";
    for (std::size_t t = 0; t < divergence.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%.17g", divergence[t]);
        out << t << "," << buf << "\n";
    }
    if (!out) throw io_error("export_divergence_csv: write failed");
}

} // namespace inphys
