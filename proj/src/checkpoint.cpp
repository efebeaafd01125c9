#include "inphys/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "inphys/serialize.hpp"

namespace inphys {

namespace {

constexpr char kCheckpointMagic[] = "INCK";
constexpr std::uint32_t kCheckpointVersion = 1;

void write_mlp(std::ostream& out, const MlpParams& p) {
    write_u32(out, static_cast<std::uint32_t>(p.layers.size()));
    for (const MlpLayer& l : p.layers) {
        write_matrix(out, l.w);
        write_matrix(out, l.b);
    }
}

MlpParams read_mlp(std::istream& in) {
    MlpParams p;
    std::uint32_t n = read_u32(in);
    if (n > 1024) throw io_error("checkpoint: unreasonable layer count");
    p.layers.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        MlpLayer l;
        l.w = read_matrix(in);
        l.b = read_matrix(in);
        p.layers.push_back(std::move(l));
    }
    return p;
}

void write_in_model(std::ostream& out, const InModel& m) {
    write_u32(out, static_cast<std::uint32_t>(m.marshal_mode));
    write_u32(out, static_cast<std::uint32_t>(m.aggregate_mode));
    write_u8(out, m.effects_zeroed ? 1 : 0);
    write_mlp(out, m.f_r);
    write_mlp(out, m.f_o);
    write_u8(out, m.f_a ? 1 : 0);
    if (m.f_a) write_mlp(out, *m.f_a);
}

InModel read_in_model(std::istream& in) {
    InModel m;
    m.marshal_mode = static_cast<MarshalMode>(read_u32(in));
    m.aggregate_mode = static_cast<AggregateMode>(read_u32(in));
    m.effects_zeroed = read_u8(in) != 0;
    m.f_r = read_mlp(in);
    m.f_o = read_mlp(in);
    if (read_u8(in) != 0) m.f_a = read_mlp(in);
    return m;
}

void write_flat(std::ostream& out, const MlpBaseline& f) {
    write_i32(out, f.n_objects);
    write_i32(out, f.n_relations);
    write_i32(out, f.out_rows);
    write_i32(out, f.out_cols);
    write_mlp(out, f.net);
}

MlpBaseline read_flat(std::istream& in) {
    MlpBaseline f;
    f.n_objects = read_i32(in);
    f.n_relations = read_i32(in);
    f.out_rows = read_i32(in);
    f.out_cols = read_i32(in);
    f.net = read_mlp(in);
    return f;
}

void write_config(std::ostream& out, const TrainConfig& c) {
    write_u32(out, static_cast<std::uint32_t>(c.model));
    write_u32(out, static_cast<std::uint32_t>(c.marshal));
    write_u32(out, static_cast<std::uint32_t>(c.aggregate));
    write_i32(out, c.d_e);
    write_i32_vector(out, c.fr_hidden);
    write_i32_vector(out, c.fo_hidden);
    write_i32(out, c.d_p);
    write_u8(out, c.abstract_head ? 1 : 0);
    write_i32_vector(out, c.fa_hidden);
    write_i32_vector(out, c.mlp_hidden);
    write_i32(out, c.epochs);
    write_i32(out, c.batch_size);
    write_f64(out, c.l2_effects);
    write_f64(out, c.l2_params);
    write_f64(out, c.noise.fraction);
    write_f64(out, c.noise.std_scale);
    write_i32(out, c.noise.anneal_start);
    write_i32(out, c.noise.anneal_end);
    write_i32(out, c.balance_bins);
    write_u64(out, c.seed);
    write_i32(out, c.checkpoint_every);
}

TrainConfig read_config(std::istream& in) {
    TrainConfig c;
    c.model = static_cast<ModelKind>(read_u32(in));
    c.marshal = static_cast<MarshalMode>(read_u32(in));
    c.aggregate = static_cast<AggregateMode>(read_u32(in));
    c.d_e = read_i32(in);
    c.fr_hidden = read_i32_vector(in);
    c.fo_hidden = read_i32_vector(in);
    c.d_p = read_i32(in);
    c.abstract_head = read_u8(in) != 0;
    c.fa_hidden = read_i32_vector(in);
    c.mlp_hidden = read_i32_vector(in);
    c.epochs = read_i32(in);
    c.batch_size = read_i32(in);
    c.l2_effects = read_f64(in);
    c.l2_params = read_f64(in);
    c.noise.fraction = read_f64(in);
    c.noise.std_scale = read_f64(in);
    c.noise.anneal_start = read_i32(in);
    c.noise.anneal_end = read_i32(in);
    c.balance_bins = read_i32(in);
    c.seed = read_u64(in);
    c.checkpoint_every = read_i32(in);
    return c;
}

} // namespace

void save_checkpoint(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("save_checkpoint: cannot open " + path);
    write_magic(out, kCheckpointMagic, kCheckpointVersion);
    write_config(out, model.config);
    write_u32(out, static_cast<std::uint32_t>(model.domain));
    write_u32(out, static_cast<std::uint32_t>(model.target));
    write_i32(out, model.n_objects);
    write_i32(out, model.n_relations);
    write_in_model(out, model.in);
    write_flat(out, model.flat);
    write_u8(out, model.has_best ? 1 : 0);
    if (model.has_best) {
        write_in_model(out, model.best_in);
        write_flat(out, model.best_flat);
    }
    write_normalizer(out, model.norm);

    write_f64(out, model.adam.beta1);
    write_f64(out, model.adam.beta2);
    write_f64(out, model.adam.eps);
    write_u64(out, model.adam.step);
    write_u32(out, static_cast<std::uint32_t>(model.adam.slots.size()));
    for (const AdamState::Slot& s : model.adam.slots) {
        write_matrix(out, s.m);
        write_matrix(out, s.v);
    }

    write_f64(out, model.schedule.lr);
    write_f64(out, model.schedule.decay);
    write_f64(out, model.schedule.floor);
    write_i32(out, model.schedule.window);
    write_f64(out, model.schedule.min_rel_improvement);
    std::vector<double> recent(model.schedule.recent.begin(), model.schedule.recent.end());
    write_f64_vector(out, recent);
    write_f64(out, model.schedule.best);
    write_i32(out, model.schedule.decays);

    write_i32(out, model.epochs_done);
    write_f64(out, model.best_val);
    write_u32(out, static_cast<std::uint32_t>(model.metrics.size()));
    for (const EpochRecord& r : model.metrics) {
        write_i32(out, r.epoch);
        write_f64(out, r.train_mse);
        write_f64(out, r.val_mse);
        write_f64(out, r.lr);
    }
    out.flush();
    if (!out) throw io_error("save_checkpoint: write failed for " + path);
}

TrainedModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("load_checkpoint: cannot open " + path);
    read_magic(in, kCheckpointMagic, kCheckpointVersion);
    TrainedModel m;
    m.config = read_config(in);
    m.domain = static_cast<Domain>(read_u32(in));
    m.target = static_cast<TargetKind>(read_u32(in));
    m.n_objects = read_i32(in);
    m.n_relations = read_i32(in);
    m.in = read_in_model(in);
    m.flat = read_flat(in);
    m.has_best = read_u8(in) != 0;
    if (m.has_best) {
        m.best_in = read_in_model(in);
        m.best_flat = read_flat(in);
    }
    m.norm = read_normalizer(in);

    m.adam.beta1 = read_f64(in);
    m.adam.beta2 = read_f64(in);
    m.adam.eps = read_f64(in);
    m.adam.step = read_u64(in);
    std::uint32_t slots = read_u32(in);
    if (slots > 4096) throw io_error("checkpoint: unreasonable slot count");
    m.adam.slots.resize(slots);
    for (AdamState::Slot& s : m.adam.slots) {
        s.m = read_matrix(in);
        s.v = read_matrix(in);
    }

    m.schedule.lr = read_f64(in);
    m.schedule.decay = read_f64(in);
    m.schedule.floor = read_f64(in);
    m.schedule.window = read_i32(in);
    m.schedule.min_rel_improvement = read_f64(in);
    std::vector<double> recent = read_f64_vector(in);
    m.schedule.recent.assign(recent.begin(), recent.end());
    m.schedule.best = read_f64(in);
    m.schedule.decays = read_i32(in);

    m.epochs_done = read_i32(in);
    m.best_val = read_f64(in);
    std::uint32_t rows = read_u32(in);
    if (rows > (1u << 24)) throw io_error("checkpoint: unreasonable metrics length");
    m.metrics.resize(rows);
    for (EpochRecord& r : m.metrics) {
        r.epoch = read_i32(in);
        r.train_mse = read_f64(in);
        r.val_mse = read_f64(in);
        r.lr = read_f64(in);
    }

    std::size_t expected = std::as_const(m).trainable_params().size();
    if (m.adam.slots.size() != expected)
        throw io_error("checkpoint: optimizer slots do not match the parameter list");
    return m;
}

std::string model_card_json(const TrainedModel& model) {
    nlohmann::ordered_json card;
    card["format"] = {{"magic", "INCK"}, {"version", 1}};
    switch (model.config.model) {
        case ModelKind::in_full: card["model"] = "in_full"; break;
        case ModelKind::in_dynamics_only: card["model"] = "in_dynamics_only"; break;
        case ModelKind::mlp_flat: card["model"] = "mlp_flat"; break;
    }
    card["marshal"] =
        model.config.marshal == MarshalMode::basic ? "basic" : "position_invariant";
    card["aggregate"] =
        model.config.aggregate == AggregateMode::full_state ? "full_state" : "velocity_only";
    switch (model.domain) {
        case Domain::nbody: card["domain"] = "nbody"; break;
        case Domain::balls: card["domain"] = "balls"; break;
        case Domain::string: card["domain"] = "string"; break;
    }
    card["target"] = model.target == TargetKind::velocity ? "velocity" : "energy";
    card["dimensions"] = {{"d_e", model.config.d_e},
                          {"d_p", model.config.d_p},
                          {"fr_hidden", model.config.fr_hidden},
                          {"fo_hidden", model.config.fo_hidden},
                          {"fa_hidden", model.config.abstract_head
                                            ? nlohmann::ordered_json(model.config.fa_hidden)
                                            : nlohmann::ordered_json(nullptr)},
                          {"mlp_hidden", model.config.mlp_hidden}};
    card["layout"] = {{"state_rows", kStateRows},
                      {"dynamic_rows", kDynamicRows},
                      {"relation_rows", kRelationRows},
                      {"external_rows", kExternalRows}};
    card["binding"] = {{"n_objects", model.n_objects}, {"n_relations", model.n_relations}};
    card["training"] = {{"seed", model.config.seed},
                        {"epochs_planned", model.config.epochs},
                        {"epochs_done", model.epochs_done},
                        {"batch_size", model.config.batch_size},
                        {"l2_effects", model.config.l2_effects},
                        {"l2_params", model.config.l2_params},
                        {"best_val_mse", model.has_best ? nlohmann::ordered_json(model.best_val)
                                                        : nlohmann::ordered_json(nullptr)},
                        {"lr_decays", model.schedule.decays}};
    return card.dump(2) + "\n";
}

void write_metrics_csv(const std::vector<EpochRecord>& metrics, std::ostream& out) {
    char buf[32];
    out << "epoch,train_mse,val_mse,lr,wall_time\n";
    for (const EpochRecord& r : metrics) {
        out << r.epoch;
        std::snprintf(buf, sizeof buf, "%.17g", r.train_mse);
        out << "," << buf;
        std::snprintf(buf, sizeof buf, "%.17g", r.val_mse);
        out << "," << buf;
        std::snprintf(buf, sizeof buf, "%.17g", r.lr);
        out << "," << buf << ",0\n";
    }
    if (!out) throw io_error("write_metrics_csv: write failed");
}

} // namespace inphys
