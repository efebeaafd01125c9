#include "inphys/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "inphys/rng.hpp"
#include "inphys/samplers.hpp"
#include "inphys/serialize.hpp"

namespace inphys {

namespace {

constexpr std::uint64_t kSelectionStream = 0x53454c4543540000ull;

void append_unique_draw(std::vector<int>& pool, int want, Rng& rng, std::vector<int>& out) {
    // Partial Fisher-Yates: the first `want` slots become the draw.
    int n = static_cast<int>(pool.size());
    for (int k = 0; k < want; ++k) {
        int j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - k)));
        std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(j)]);
        out.push_back(pool[static_cast<std::size_t>(k)]);
    }
}

} // namespace

void DataGenConfig::validate() const {
    if (n_scenes < 1 || n_steps < 1 || n_samples < 1)
        throw config_error("DataGenConfig: scenes, steps, and samples must be positive");
    if (static_cast<long long>(n_samples) > static_cast<long long>(n_scenes) * n_steps)
        throw config_error("DataGenConfig: more samples than (scene, step) pairs");
    if (!(dt > 0.0)) throw config_error("DataGenConfig: dt must be positive");
    if (target == TargetKind::energy && domain == Domain::balls)
        throw config_error("DataGenConfig: balls potential energy is identically zero");
    if (domain == Domain::string && (pinned < 0 || pinned > 2))
        throw config_error("DataGenConfig: pinned must be 0, 1 or 2");
}

GraphInput Dataset::graph_for(int sample) const {
    if (sample < 0 || sample >= size()) throw config_error("Dataset::graph_for: index out of range");
    const DatasetSample& s = samples[static_cast<std::size_t>(sample)];
    GraphInput g;
    g.o = s.o;
    g.x = scene_x[static_cast<std::size_t>(s.scene)];
    g.r_a = scene_r_a[static_cast<std::size_t>(s.scene)];
    g.r_r = r_r;
    g.r_s = r_s;
    return g;
}

void Dataset::validate() const {
    provenance.validate();
    if (static_cast<int>(scene_r_a.size()) != provenance.n_scenes ||
        static_cast<int>(scene_x.size()) != provenance.n_scenes)
        throw data_error("Dataset: per-scene attribute count mismatch");
    r_r.validate();
    r_s.validate();
    if (r_r.n_rows != n_objects || r_s.n_rows != n_objects ||
        static_cast<int>(r_r.index.size()) != n_relations ||
        static_cast<int>(r_s.index.size()) != n_relations)
        throw data_error("Dataset: incidence shape mismatch");
    for (const Matrix& ra : scene_r_a)
        if (ra.rows != kRelationRows || ra.cols != n_relations)
            throw data_error("Dataset: relation attribute shape mismatch");
    for (const Matrix& x : scene_x)
        if (x.rows != kExternalRows || x.cols != n_objects)
            throw data_error("Dataset: external effect shape mismatch");
    int t_rows = target_rows();
    int t_cols = provenance.target == TargetKind::velocity ? n_objects : 1;
    for (const DatasetSample& s : samples) {
        if (s.o.rows != kStateRows || s.o.cols != n_objects)
            throw data_error("Dataset: sample state shape mismatch");
        if (s.target.rows != t_rows || s.target.cols != t_cols)
            throw data_error("Dataset: sample target shape mismatch");
        if (s.scene < 0 || s.scene >= provenance.n_scenes || s.step < 0 ||
            s.step >= provenance.n_steps)
            throw data_error("Dataset: sample provenance out of range");
    }
}

Scene sample_scene_for(const DataGenConfig& cfg, int scene_index) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(scene_index)));
    bool orbit = cfg.orbit_mix == OrbitMix::orbit ||
                 (cfg.orbit_mix == OrbitMix::half && scene_index % 2 == 0);
    switch (cfg.domain) {
        case Domain::nbody: return sample_nbody_scene(rng, cfg.n_bodies, orbit);
        case Domain::balls: return sample_balls_scene(rng, cfg.n_bodies);
        case Domain::string: return sample_string_scene(rng, cfg.n_bodies, cfg.pinned);
    }
    throw config_error("sample_scene_for: unknown domain");
}

Dataset generate_dataset(const DataGenConfig& cfg) {
    cfg.validate();
    Dataset ds;
    ds.provenance = cfg;

    std::vector<Scene> scenes;
    std::vector<Trajectory> trajectories;
    std::vector<std::vector<char>> contact_flags;
    scenes.reserve(static_cast<std::size_t>(cfg.n_scenes));
    long long contact_steps = 0;

    for (int i = 0; i < cfg.n_scenes; ++i) {
        Scene scene;
        try {
            scene = sample_scene_for(cfg, i);
        } catch (const std::exception& e) {
            throw sampler_error("generate_dataset: scene " + std::to_string(i) + ": " + e.what());
        }
        GraphInput g = scene_to_graph(scene);
        if (i == 0) {
            ds.n_objects = g.n_objects();
            ds.n_relations = g.n_relations();
            ds.r_r = g.r_r;
            ds.r_s = g.r_s;
        } else if (g.r_r.index != ds.r_r.index || g.r_s.index != ds.r_s.index) {
            throw data_error("generate_dataset: scene topology varies within one config");
        }
        ds.scene_r_a.push_back(g.r_a);
        ds.scene_x.push_back(g.x);

        std::vector<std::vector<std::pair<int, int>>> contacts;
        Trajectory traj;
        try {
            traj = simulate(scene, cfg.n_steps, cfg.dt, &contacts);
        } catch (const std::exception& e) {
            throw numeric_error("generate_dataset: scene " + std::to_string(i) + ": " + e.what());
        }
        std::vector<char> flags(static_cast<std::size_t>(cfg.n_steps), 0);
        for (int t = 0; t < cfg.n_steps; ++t) {
            if (!contacts[static_cast<std::size_t>(t)].empty()) {
                flags[static_cast<std::size_t>(t)] = 1;
                ++contact_steps;
            }
        }
        scenes.push_back(std::move(scene));
        trajectories.push_back(std::move(traj));
        contact_flags.push_back(std::move(flags));
    }

    long long total_pairs = static_cast<long long>(cfg.n_scenes) * cfg.n_steps;
    ds.raw_contact_rate = static_cast<double>(contact_steps) / static_cast<double>(total_pairs);

    // Select (scene, step) pairs without replacement. With contact_boost,
    // contact steps are drawn as their own stratum at a target share of
    // roughly eight times their raw per-step rate (capped by availability
    // and at 30% of the dataset); each stratum stays uniform internally.
    Rng pick(derive_seed(cfg.seed, kSelectionStream));
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(cfg.n_samples));
    bool boost = cfg.contact_boost && cfg.domain == Domain::balls &&
                 cfg.target == TargetKind::velocity && contact_steps > 0;
    if (boost) {
        std::vector<int> contact_pool, quiet_pool;
        for (int i = 0; i < cfg.n_scenes; ++i)
            for (int t = 0; t < cfg.n_steps; ++t)
                (contact_flags[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)]
                     ? contact_pool
                     : quiet_pool)
                    .push_back(i * cfg.n_steps + t);
        double desired = std::min(8.0 * ds.raw_contact_rate, 0.3);
        int want_contact = static_cast<int>(std::llround(desired * cfg.n_samples));
        want_contact = std::min(want_contact, static_cast<int>(contact_pool.size()));
        want_contact = std::max(want_contact,
                                cfg.n_samples - static_cast<int>(quiet_pool.size()));
        append_unique_draw(contact_pool, want_contact, pick, chosen);
        append_unique_draw(quiet_pool, cfg.n_samples - want_contact, pick, chosen);
    } else {
        std::vector<int> pool(static_cast<std::size_t>(total_pairs));
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<int>(i);
        append_unique_draw(pool, cfg.n_samples, pick, chosen);
    }
    std::sort(chosen.begin(), chosen.end());

    ds.samples.reserve(chosen.size());
    for (int pair : chosen) {
        int scene_idx = pair / cfg.n_steps;
        int step = pair % cfg.n_steps;
        const Scene& scene = scenes[static_cast<std::size_t>(scene_idx)];
        const Trajectory& traj = trajectories[static_cast<std::size_t>(scene_idx)];
        const auto& now = traj.snapshots[static_cast<std::size_t>(step)];
        const auto& next = traj.snapshots[static_cast<std::size_t>(step + 1)];

        DatasetSample s;
        s.scene = scene_idx;
        s.step = step;
        s.contact =
            contact_flags[static_cast<std::size_t>(scene_idx)][static_cast<std::size_t>(step)] != 0;
        s.o = Matrix(kStateRows, ds.n_objects);
        for (int j = 0; j < ds.n_objects; ++j) {
            const Entity& e = scene.entities[static_cast<std::size_t>(j)];
            s.o(kRowX, j) = now[static_cast<std::size_t>(j)].pos.x;
            s.o(kRowY, j) = now[static_cast<std::size_t>(j)].pos.y;
            s.o(kRowVx, j) = now[static_cast<std::size_t>(j)].vel.x;
            s.o(kRowVy, j) = now[static_cast<std::size_t>(j)].vel.y;
            s.o(kRowInvMass, j) = e.inverse_mass;
            s.o(kRowShape, j) = static_cast<double>(e.shape.kind);
            s.o(kRowSizeA, j) = e.shape.a;
            s.o(kRowSizeB, j) = e.shape.b;
        }
        if (cfg.target == TargetKind::velocity) {
            s.target = Matrix(2, ds.n_objects);
            for (int j = 0; j < ds.n_objects; ++j) {
                s.target(0, j) = next[static_cast<std::size_t>(j)].vel.x;
                s.target(1, j) = next[static_cast<std::size_t>(j)].vel.y;
            }
        } else {
            Scene at = scene;
            for (int j = 0; j < ds.n_objects; ++j) {
                at.entities[static_cast<std::size_t>(j)].pos = now[static_cast<std::size_t>(j)].pos;
                at.entities[static_cast<std::size_t>(j)].vel = now[static_cast<std::size_t>(j)].vel;
            }
            s.target = Matrix(1, 1);
            s.target(0, 0) = potential_energy(at);
        }
        ds.samples.push_back(std::move(s));
    }

    ds.validate();
    return ds;
}

namespace {

constexpr char kDatasetMagic[] = "INDS";
constexpr std::uint32_t kDatasetVersion = 1;

} // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("save_dataset: cannot open " + path);
    write_magic(out, kDatasetMagic, kDatasetVersion);
    const DataGenConfig& c = ds.provenance;
    write_u32(out, static_cast<std::uint32_t>(c.domain));
    write_u32(out, static_cast<std::uint32_t>(c.target));
    write_u64(out, c.seed);
    write_i32(out, c.n_bodies);
    write_u8(out, static_cast<std::uint8_t>(c.orbit_mix));
    write_i32(out, c.pinned);
    write_i32(out, c.n_scenes);
    write_i32(out, c.n_steps);
    write_i32(out, c.n_samples);
    write_f64(out, c.dt);
    write_u8(out, c.contact_boost ? 1 : 0);
    write_f64(out, ds.raw_contact_rate);
    write_i32(out, ds.n_objects);
    write_i32(out, ds.n_relations);
    write_i32_vector(out, ds.r_r.index);
    write_i32_vector(out, ds.r_s.index);
    for (const Matrix& m : ds.scene_r_a) write_matrix(out, m);
    for (const Matrix& m : ds.scene_x) write_matrix(out, m);
    write_u64(out, static_cast<std::uint64_t>(ds.samples.size()));
    for (const DatasetSample& s : ds.samples) {
        write_i32(out, s.scene);
        write_i32(out, s.step);
        write_u8(out, s.contact ? 1 : 0);
        write_matrix(out, s.o);
        write_matrix(out, s.target);
    }
    out.flush();
    if (!out) throw io_error("save_dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("load_dataset: cannot open " + path);
    read_magic(in, kDatasetMagic, kDatasetVersion);
    Dataset ds;
    DataGenConfig& c = ds.provenance;
    c.domain = static_cast<Domain>(read_u32(in));
    c.target = static_cast<TargetKind>(read_u32(in));
    c.seed = read_u64(in);
    c.n_bodies = read_i32(in);
    {
        std::uint8_t mix = read_u8(in);
        if (mix > 2) throw io_error("load_dataset: bad orbit mix byte");
        c.orbit_mix = static_cast<OrbitMix>(mix);
    }
    c.pinned = read_i32(in);
    c.n_scenes = read_i32(in);
    c.n_steps = read_i32(in);
    c.n_samples = read_i32(in);
    c.dt = read_f64(in);
    c.contact_boost = read_u8(in) != 0;
    ds.raw_contact_rate = read_f64(in);
    ds.n_objects = read_i32(in);
    ds.n_relations = read_i32(in);
    ds.r_r.n_rows = ds.n_objects;
    ds.r_r.index = read_i32_vector(in);
    ds.r_s.n_rows = ds.n_objects;
    ds.r_s.index = read_i32_vector(in);
    ds.scene_r_a.reserve(static_cast<std::size_t>(c.n_scenes));
    for (int i = 0; i < c.n_scenes; ++i) ds.scene_r_a.push_back(read_matrix(in));
    ds.scene_x.reserve(static_cast<std::size_t>(c.n_scenes));
    for (int i = 0; i < c.n_scenes; ++i) ds.scene_x.push_back(read_matrix(in));
    std::uint64_t n = read_u64(in);
    if (n > (1ull << 32)) throw io_error("load_dataset: unreasonable sample count");
    ds.samples.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        DatasetSample s;
        s.scene = read_i32(in);
        s.step = read_i32(in);
        s.contact = read_u8(in) != 0;
        s.o = read_matrix(in);
        s.target = read_matrix(in);
        ds.samples.push_back(std::move(s));
    }
    try {
        ds.validate();
    } catch (const std::exception& e) {
        throw io_error("load_dataset: " + path + ": " + e.what());
    }
    return ds;
}

void export_dataset_csv(const Dataset& ds, std::ostream& out) {
    char buf[32];
    out << "scene,step,contact";
    for (int i = 0; i < kStateRows; ++i)
        for (int j = 0; j < ds.n_objects; ++j) out << ",o_" << i << "_" << j;
    int t_rows = ds.target_rows();
    int t_cols = ds.provenance.target == TargetKind::velocity ? ds.n_objects : 1;
    for (int i = 0; i < t_rows; ++i)
        for (int j = 0; j < t_cols; ++j) out << ",target_" << i << "_" << j;
    out << "\n";
    for (const DatasetSample& s : ds.samples) {
        out << s.scene << "," << s.step << "," << (s.contact ? 1 : 0);
        for (double v : s.o.data) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << "," << buf;
        }
        for (double v : s.target.data) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << "," << buf;
        }
        out << "\n";
    }
    if (!out) throw io_error("export_dataset_csv: write failed");
}

} // namespace inphys
