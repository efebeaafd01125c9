// Acceptance gates: one line per criterion, exit 0 only when every gate
// passes. Usage: acceptance <path-to-inphys-cli>. The CLI binary is what
// the reproducibility gate shells out to; everything else drives the
// library directly. Artifacts land in <system temp>/inphys_acceptance.
//
// The learning gates run real desk-scale trainings, so a full pass takes
// on the order of hours on one core. Tolerances are pinned below.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "inphys/dataset.hpp"
#include "inphys/engine.hpp"
#include "inphys/grad_check.hpp"
#include "inphys/graph.hpp"
#include "inphys/model.hpp"
#include "inphys/rng.hpp"
#include "inphys/rollout.hpp"
#include "inphys/samplers.hpp"
#include "inphys/training.hpp"

using namespace inphys;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------- pinned tolerances --
constexpr double kGradTol = 1e-4;       // max relative error vs central differences
constexpr double kStructTol = 1e-9;     // entrywise structural-property tolerance
constexpr double kMomentumTol = 1e-9;   // relative momentum drift per step
constexpr double kBounceTol = 0.01;     // speed change allowance per elastic bounce
constexpr double kOrbitDriftTol = 0.05; // two-body radius drift over 1000 steps
constexpr double kNbodyRatio = 0.1;     // test MSE(IN) / MSE(constant velocity)
constexpr double kAblationFloor = 0.5;  // dynamics-only must stay near the baseline
constexpr double kStringRatio = 0.2;
constexpr double kEnergyRatio = 0.25;   // test MSE(IN) / MSE(mean predictor)
constexpr double kRolloutTol = 1e-9;    // oracle-predictor positional divergence
constexpr int kEpochCap = 300;          // training budget per learning gate

// Early-stop margin: leave a learning run once its validation ratio is
// comfortably under the bar, so the slow gates only pay for the epochs
// they need. The final verdict always comes from the test split.
constexpr double kEarlyStopMargin = 0.7;

constexpr std::uint64_t kSeed = 2026;

std::string g_cli;
fs::path g_work;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) return HUGE_VAL;
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
    return worst;
}

bool same_bits(double a, double b) {
    std::uint64_t ua, ub;
    static_assert(sizeof ua == sizeof a);
    std::memcpy(&ua, &a, sizeof ua);
    std::memcpy(&ub, &b, sizeof ub);
    return ua == ub;
}

GraphInput sample_graph(Rng& rng, Domain domain, bool orbit) {
    switch (domain) {
        case Domain::nbody: return scene_to_graph(sample_nbody_scene(rng, 4, orbit));
        case Domain::balls: return scene_to_graph(sample_balls_scene(rng, 3));
        case Domain::string: return scene_to_graph(sample_string_scene(rng, 4, 1));
    }
    throw config_error("sample_graph: bad domain");
}

InModel make_model(Rng& rng, MarshalMode mm, AggregateMode am, int d_e, int d_p,
                   const std::vector<int>& fr_hidden, const std::vector<int>& fo_hidden) {
    InModel m;
    m.marshal_mode = mm;
    m.aggregate_mode = am;
    m.f_r = MlpParams::create(InModel::marshal_width(mm), fr_hidden, d_e, rng);
    m.f_o = MlpParams::create(InModel::aggregate_width(am, d_e), fo_hidden, d_p, rng);
    return m;
}

// new-object-index-of-old and relation order (new k -> old k)
GraphInput permute_graph(const GraphInput& g, const std::vector<int>& obj_new_of_old,
                         const std::vector<int>& rel_new_to_old) {
    GraphInput out;
    int n = g.n_objects(), r = g.n_relations();
    out.o = Matrix(g.o.rows, n);
    out.x = Matrix(g.x.rows, n);
    for (int j = 0; j < n; ++j) {
        int nj = obj_new_of_old[(std::size_t)j];
        for (int i = 0; i < g.o.rows; ++i) out.o(i, nj) = g.o(i, j);
        for (int i = 0; i < g.x.rows; ++i) out.x(i, nj) = g.x(i, j);
    }
    out.r_a = Matrix(g.r_a.rows, r);
    out.r_r.n_rows = out.r_s.n_rows = n;
    out.r_r.index.resize((std::size_t)r);
    out.r_s.index.resize((std::size_t)r);
    for (int k = 0; k < r; ++k) {
        int old = rel_new_to_old[(std::size_t)k];
        for (int i = 0; i < g.r_a.rows; ++i) out.r_a(i, k) = g.r_a(i, old);
        out.r_r.index[(std::size_t)k] =
            obj_new_of_old[(std::size_t)g.r_r.index[(std::size_t)old]];
        out.r_s.index[(std::size_t)k] =
            obj_new_of_old[(std::size_t)g.r_s.index[(std::size_t)old]];
    }
    return out;
}

std::vector<int> random_permutation(Rng& rng, int n) {
    std::vector<int> p((std::size_t)n);
    for (int i = 0; i < n; ++i) p[(std::size_t)i] = i;
    rng.shuffle(p);
    return p;
}

// ------------------------------------------------------- shared datasets --

struct SplitSet {
    Dataset train, val, test;
};

// Mirrors the CLI's split layout: three disjoint seed streams.
SplitSet make_splits(DataGenConfig base, std::uint64_t seed, int n_train, int n_val,
                     int n_test) {
    SplitSet s;
    base.seed = derive_seed(seed, 1);
    base.n_samples = n_train;
    s.train = generate_dataset(base);
    base.seed = derive_seed(seed, 2);
    base.n_samples = n_val;
    s.val = generate_dataset(base);
    base.seed = derive_seed(seed, 3);
    base.n_samples = n_test;
    s.test = generate_dataset(base);
    return s;
}

DataGenConfig nbody3_config() {
    DataGenConfig cfg;
    cfg.domain = Domain::nbody;
    cfg.n_bodies = 3;
    cfg.n_scenes = 100;
    cfg.n_steps = 500;
    return cfg;
}

DataGenConfig string8_config(int pinned) {
    DataGenConfig cfg;
    cfg.domain = Domain::string;
    cfg.n_bodies = 8;
    cfg.pinned = pinned;
    cfg.n_scenes = 100;
    cfg.n_steps = 500;
    return cfg;
}

struct Shared {
    SplitSet nb;                     // gate 4 -> 6
    SplitSet st;                     // gate 5 -> 6, 8
    std::optional<TrainedModel> nb_model;
    std::optional<TrainedModel> st_model;
};

// ------------------------------------------------------ training helper --

struct LearnRun {
    TrainedModel model;
    double test_mse = 0.0;
    double test_baseline = 0.0;
    double ratio = 0.0;
    bool diverged = false;
};

// Trains in chunks, leaving early once the validation ratio clears the
// early-stop margin; the returned ratio is measured on the test split.
LearnRun run_learning(const TrainConfig& cfg, const SplitSet& data, double bar,
                      const std::function<double(const Dataset&)>& baseline,
                      int epoch_cap) {
    LearnRun out{init_trained_model(cfg, data.train), 0, 0, 0, false};
    double val_base = baseline(data.val);
    while (out.model.epochs_done < epoch_cap) {
        int at = std::min(epoch_cap, out.model.epochs_done + 25);
        TrainResult r = train(out.model, data.train, data.val, {}, at);
        if (r.diverged) {
            out.diverged = true;
            break;
        }
        if (evaluate(out.model, data.val).mse <= kEarlyStopMargin * bar * val_base) break;
    }
    out.test_mse = evaluate(out.model, data.test).mse;
    out.test_baseline = baseline(data.test);
    out.ratio = out.test_mse / out.test_baseline;
    return out;
}

// ------------------------------------------------------------- gate 1 ----

// Analytic gradients of the full training loss (MSE + effect and weight
// penalties) against central finite differences, for prediction and
// energy heads across every domain.
Outcome gate_gradients() {
    Rng rng(derive_seed(kSeed, 101));
    const double l2_e = 1e-3, l2_p = 1e-5;
    double worst = 0.0;
    long long entries = 0, kinks = 0;
    const char* names[] = {"nbody", "balls", "string"};

    for (Domain domain : {Domain::nbody, Domain::balls, Domain::string}) {
        for (bool energy : {false, true}) {
            for (int rep = 0; rep < 20; ++rep) {
                MarshalMode mm = rep % 2 == 0 ? MarshalMode::position_invariant
                                              : MarshalMode::basic;
                AggregateMode am = rep % 2 == 0 ? AggregateMode::velocity_only
                                                : AggregateMode::full_state;
                InModel m = make_model(rng, mm, am, 6, energy ? 4 : 2, {8}, {8});
                if (energy) m.f_a = MlpParams::create(4, {6}, 1, rng);
                GraphInput g = sample_graph(rng, domain, rep % 2 == 0);
                Matrix target = energy ? Matrix(1, 1) : Matrix(2, g.n_objects());
                for (double& v : target.data) v = rng.uniform(-1, 1);

                auto params_of = [&](InModel& model) {
                    std::vector<Matrix*> ps = model.f_r.param_list();
                    for (Matrix* p : model.f_o.param_list()) ps.push_back(p);
                    if (model.f_a)
                        for (Matrix* p : model.f_a->param_list()) ps.push_back(p);
                    return ps;
                };

                auto loss_at = [&]() {
                    InForward fwd = in_forward(m, g, energy);
                    auto [mse, grad] = mse_loss(energy ? fwd.q : fwd.p, target);
                    (void)grad;
                    double loss = mse + l2_penalty(fwd.e, l2_e);
                    for (const Matrix* p : params_of(m)) loss += l2_penalty(*p, l2_p);
                    return LossProbe{loss, fwd.pattern()};
                };

                InForward fwd = in_forward(m, g, energy);
                auto [mse, dout] = mse_loss(energy ? fwd.q : fwd.p, target);
                (void)mse;
                InGradients grads = in_backward(m, g, fwd, dout, l2_e);
                auto add_l2 = [&](const MlpParams& p, MlpParams& gp) {
                    for (std::size_t i = 0; i < p.layers.size(); ++i) {
                        l2_penalty_grad(p.layers[i].w, l2_p, gp.layers[i].w);
                        l2_penalty_grad(p.layers[i].b, l2_p, gp.layers[i].b);
                    }
                };
                add_l2(m.f_r, grads.f_r);
                add_l2(m.f_o, grads.f_o);
                if (m.f_a) add_l2(*m.f_a, grads.f_a);

                std::vector<Matrix*> params = params_of(m);
                std::vector<const Matrix*> analytic =
                    std::as_const(grads.f_r).param_list();
                for (const Matrix* p : std::as_const(grads.f_o).param_list())
                    analytic.push_back(p);
                if (m.f_a)
                    for (const Matrix* p : std::as_const(grads.f_a).param_list())
                        analytic.push_back(p);

                GradCheckReport report = grad_check(loss_at, params, analytic);
                worst = std::max(worst, report.max_rel_error);
                entries += report.entries_checked;
                kinks += report.kinks_skipped;
                if (!report.passed)
                    return {false,
                            std::string("failed on ") + names[static_cast<int>(domain)] +
                                (energy ? " energy" : " prediction") +
                                ", max rel error " + fmt(report.max_rel_error)};
            }
        }
    }
    return {worst <= kGradTol, "max rel error " + fmt(worst) + " over " +
                                   std::to_string(entries) + " entries (" +
                                   std::to_string(kinks) + " kinks skipped)"};
}

// ------------------------------------------------------------- gate 2 ----

Outcome gate_structure() {
    Rng rng(derive_seed(kSeed, 102));
    const int cases = 100;
    double worst_perm = 0.0, worst_shift = 0.0, worst_agg = 0.0, worst_abl = 0.0;

    for (int c = 0; c < cases; ++c) {
        Domain domain = static_cast<Domain>(c % 3);
        GraphInput g = sample_graph(rng, domain, c % 2 == 0);
        InModel m = make_model(rng, MarshalMode::position_invariant,
                               AggregateMode::velocity_only, 6, 2, {9}, {9});

        // Permutation equivariance.
        std::vector<int> obj = random_permutation(rng, g.n_objects());
        std::vector<int> rel = random_permutation(rng, g.n_relations());
        Matrix p = predict(m, g);
        Matrix pp = predict(m, permute_graph(g, obj, rel));
        for (int j = 0; j < g.n_objects(); ++j)
            for (int i = 0; i < p.rows; ++i)
                worst_perm = std::max(
                    worst_perm, std::abs(pp(i, obj[(std::size_t)j]) - p(i, j)));

        // Translation invariance of the invariant marshalling.
        GraphInput shifted = g;
        double dx = rng.uniform(-1000, 1000), dy = rng.uniform(-1000, 1000);
        for (int j = 0; j < g.n_objects(); ++j) {
            shifted.o(kRowX, j) += dx;
            shifted.o(kRowY, j) += dy;
        }
        worst_shift = std::max(worst_shift, max_abs_diff(predict(m, shifted), p));

        // Dynamics-only ablation: identical to a pinned zero effect matrix,
        // and blind to every other object's state.
        InModel mz = m;
        mz.effects_zeroed = true;
        Matrix pz = predict(mz, g);
        Matrix c0 = aggregate(m, g, Matrix(m.d_e(), g.n_relations()));
        worst_abl = std::max(worst_abl, max_abs_diff(pz, object_pass(m, c0)));
        if (g.n_objects() > 1) {
            int keep = (int)rng.below((std::uint64_t)g.n_objects());
            GraphInput mixed = g;
            for (int j = 0; j < g.n_objects(); ++j) {
                if (j == keep) continue;
                for (int i = 0; i < kDynamicRows; ++i)
                    mixed.o(i, j) += rng.uniform(-5, 5);
            }
            Matrix pmix = predict(mz, mixed);
            for (int i = 0; i < pz.rows; ++i)
                worst_abl = std::max(worst_abl,
                                     std::abs(pmix(i, keep) - pz(i, keep)));
        }

        // Aggregation equals the dense incidence product.
        Matrix e = relational_pass(m, marshal(m, g));
        Matrix cagg = aggregate(m, g, e);
        Matrix ebar = matmul(e, transpose(g.r_r.to_matrix()));
        int base = cagg.rows - m.d_e();
        for (int i = 0; i < m.d_e(); ++i)
            for (int j = 0; j < g.n_objects(); ++j)
                worst_agg = std::max(worst_agg,
                                     std::abs(cagg(base + i, j) - ebar(i, j)));
    }

    double worst = std::max({worst_perm, worst_shift, worst_agg, worst_abl});
    return {worst <= kStructTol,
            "perm " + fmt(worst_perm) + ", shift " + fmt(worst_shift) + ", ablation " +
                fmt(worst_abl) + ", scatter " + fmt(worst_agg) + " over " +
                std::to_string(cases) + " cases"};
}

// ------------------------------------------------------------- gate 3 ----

Outcome gate_physics() {
    Rng rng(derive_seed(kSeed, 103));

    // The gravitational constant and distance clip are implementation
    // choices, so every n-body check here sweeps both across half to
    // double their defaults.
    const double kG[3] = {1000.0, 2000.0, 4000.0};
    const double kClip[3] = {0.5, 1.0, 2.0};

    // Momentum drift, n-body, 1000 steps, relative to the running sum of
    // per-entity momentum magnitudes.
    double worst_drift = 0.0;
    for (int s = 0; s < 18; ++s) {
        Scene scene = sample_nbody_scene(rng, 3 + s % 3, s % 2 == 0, kG[s % 3],
                                         kClip[(s / 3) % 3]);
        Vec2 p0 = total_momentum(scene);
        auto magnitude = [&](const Scene& sc) {
            double m = 1.0;
            for (const Entity& e : sc.entities)
                if (!e.is_static())
                    m += e.mass() * (std::abs(e.vel.x) + std::abs(e.vel.y));
            return m;
        };
        double scale = magnitude(scene);
        for (int t = 1; t <= 1000; ++t) {
            euler_step(scene, 1e-3);
            scale = std::max(scale, magnitude(scene));
            Vec2 p = total_momentum(scene);
            double drift = std::max(std::abs(p.x - p0.x), std::abs(p.y - p0.y));
            worst_drift = std::max(worst_drift, drift / (scale * t));
        }
    }
    if (worst_drift > kMomentumTol)
        return {false, "momentum drift " + fmt(worst_drift) + " per step"};

    // Pairwise force antisymmetry, bit-exact, gravity and springs.
    for (int c = 0; c < 100; ++c) {
        std::vector<Entity> ents(2);
        for (Entity& e : ents) {
            e.inverse_mass = 1.0 / rng.uniform(0.02, 9.0);
            e.pos = {rng.uniform(-50, 50), rng.uniform(-50, 50)};
            e.vel = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
        }
        std::vector<std::pair<int, int>> pairs = {{0, 1}, {1, 0}};
        std::vector<Vec2> fg =
            gravity_forces(ents, pairs, kG[c % 3], kClip[(c / 3) % 3]);
        if (!same_bits(fg[0].x, -fg[1].x) || !same_bits(fg[0].y, -fg[1].y))
            return {false, "gravity antisymmetry broken at case " + std::to_string(c)};

        RelationSpec fwd;
        fwd.sender = 0;
        fwd.receiver = 1;
        fwd.kind = RelationKind::spring;
        fwd.spring_constant = rng.uniform(50, 150);
        fwd.rest_length = rng.uniform(0.1, 0.5);
        fwd.damping = 0.001;
        RelationSpec back = fwd;
        back.sender = 1;
        back.receiver = 0;
        std::vector<Vec2> fs = spring_forces(ents, {fwd, back});
        if (!same_bits(fs[0].x, -fs[1].x) || !same_bits(fs[0].y, -fs[1].y))
            return {false, "spring antisymmetry broken at case " + std::to_string(c)};
    }

    // Static entities bit-identical across 1000 steps.
    for (int s = 0; s < 4; ++s) {
        Scene scene = s < 2 ? sample_string_scene(rng, 6, s == 0 ? 1 : 2)
                            : sample_balls_scene(rng, 3);
        std::vector<Entity> before = scene.entities;
        for (int t = 0; t < 1000; ++t) euler_step(scene, 1e-3);
        for (std::size_t i = 0; i < scene.entities.size(); ++i) {
            if (!before[i].is_static()) continue;
            const Entity& a = scene.entities[i];
            const Entity& b = before[i];
            if (!same_bits(a.pos.x, b.pos.x) || !same_bits(a.pos.y, b.pos.y) ||
                !same_bits(a.vel.x, b.vel.x) || !same_bits(a.vel.y, b.vel.y))
                return {false, "static entity moved in scene " + std::to_string(s)};
        }
    }

    // Elastic bounces in a box conserve speed within 1% per bounce.
    Scene box;
    box.domain = Domain::balls;
    Entity ball;
    ball.inverse_mass = 1.0;
    ball.shape = {ShapeKind::circle, 0.2, 0.0};
    ball.pos = {0.0, 0.0};
    ball.vel = {3.1, 2.3};
    box.entities.push_back(ball);
    const double half = 1.5, thick = 0.25;
    auto wall = [&](Vec2 at, double hx, double hy) {
        Entity w;
        w.shape = {ShapeKind::rectangle, hx, hy};
        w.pos = at;
        box.entities.push_back(w);
    };
    wall({0, half + thick}, half + 2 * thick, thick);
    wall({0, -half - thick}, half + 2 * thick, thick);
    wall({half + thick, 0}, thick, half);
    wall({-half - thick, 0}, thick, half);
    for (int i = 1; i <= 4; ++i)
        for (int dir = 0; dir < 2; ++dir) {
            RelationSpec rel;
            rel.sender = dir == 0 ? 0 : i;
            rel.receiver = dir == 0 ? i : 0;
            rel.kind = RelationKind::collision;
            rel.restitution = 1.0;
            box.relations.push_back(rel);
        }
    double v0 = norm(box.entities[0].vel);
    std::vector<std::vector<std::pair<int, int>>> contacts;
    Trajectory boxtraj = simulate(box, 2000, 1e-3, &contacts);
    int bounces = 0;
    for (const auto& step : contacts) bounces += step.empty() ? 0 : 1;
    const Trajectory::State& end = boxtraj.snapshots.back()[0];
    double v1 = norm(end.vel);
    if (bounces < 1) return {false, "elastic box produced no bounces"};
    double per_bounce = std::abs(std::log(v1 / v0)) / bounces;
    if (per_bounce > std::log1p(kBounceTol))
        return {false, "bounce speed drift " + fmt(per_bounce) + " per bounce"};

    // Two-body circular orbit: radius drift < 5% over 1000 steps, at each
    // gravitational constant (the launch speed scales with it).
    double worst_radius = 0.0;
    for (double g_grav : kG) {
        Scene orbit;
        orbit.domain = Domain::nbody;
        orbit.g_grav = g_grav;
        const double r = 50.0;
        Entity star, planet;
        star.inverse_mass = 1.0 / 100.0;
        planet.inverse_mass = 1.0;
        planet.pos = {r, 0};
        planet.vel = {0, std::sqrt(g_grav * 100.0 / r)};
        orbit.entities = {star, planet};
        for (int i : {0, 1}) {
            RelationSpec rel;
            rel.sender = i;
            rel.receiver = 1 - i;
            rel.kind = RelationKind::gravity;
            orbit.relations.push_back(rel);
        }
        for (int t = 0; t < 1000; ++t) {
            euler_step(orbit, 1e-3);
            double radius = norm(orbit.entities[1].pos - orbit.entities[0].pos);
            worst_radius = std::max(worst_radius, std::abs(radius - r) / r);
        }
    }
    if (worst_radius >= kOrbitDriftTol)
        return {false, "orbit radius drift " + fmt(worst_radius)};

    return {true, "momentum " + fmt(worst_drift) + "/step, " + std::to_string(bounces) +
                      " elastic bounces, orbit drift " + fmt(worst_radius)};
}

// ------------------------------------------------------------- gate 4 ----

Outcome gate_nbody_learning(Shared& shared) {
    shared.nb = make_splits(nbody3_config(), derive_seed(kSeed, 104), 50000, 10000,
                            10000);

    TrainConfig cfg;
    cfg.seed = derive_seed(kSeed, 204);
    cfg.epochs = kEpochCap;
    LearnRun run = run_learning(cfg, shared.nb, kNbodyRatio, evaluate_constant_velocity,
                                kEpochCap);
    if (run.diverged) return {false, "training diverged"};
    shared.nb_model = run.model;

    // Dynamics-only ablation: must stay near the constant-velocity
    // baseline; its plateau arrives long before the full budget.
    TrainConfig abl = cfg;
    abl.model = ModelKind::in_dynamics_only;
    TrainedModel am = init_trained_model(abl, shared.nb.train);
    train(am, shared.nb.train, shared.nb.val, {}, 100);
    double abl_ratio = evaluate(am, shared.nb.test).mse /
                       evaluate_constant_velocity(shared.nb.test);

    bool pass = run.ratio <= kNbodyRatio && abl_ratio >= kAblationFloor;
    return {pass, "IN ratio " + fmt(run.ratio) + " (bar " + fmt(kNbodyRatio) + ", " +
                      std::to_string(run.model.epochs_done) + " epochs), ablation " +
                      fmt(abl_ratio) + " (floor " + fmt(kAblationFloor) + ")"};
}

// ------------------------------------------------------------- gate 5 ----

Outcome gate_string_learning(Shared& shared) {
    shared.st = make_splits(string8_config(1), derive_seed(kSeed, 105), 50000, 10000,
                            10000);

    TrainConfig cfg;
    cfg.seed = derive_seed(kSeed, 205);
    cfg.epochs = kEpochCap;
    LearnRun run = run_learning(cfg, shared.st, kStringRatio, evaluate_constant_velocity,
                                kEpochCap);
    if (run.diverged) return {false, "training diverged"};
    shared.st_model = run.model;

    return {run.ratio <= kStringRatio,
            "IN ratio " + fmt(run.ratio) + " (bar " + fmt(kStringRatio) + ", " +
                std::to_string(run.model.epochs_done) + " epochs)"};
}

// ------------------------------------------------------------- gate 6 ----

Outcome gate_generalization(Shared& shared) {
    if (!shared.nb_model || !shared.st_model)
        return {false, "missing trained models from the learning gates"};

    auto eval_ratio = [&](const TrainedModel& m, const DataGenConfig& cfg,
                          std::uint64_t stream) {
        DataGenConfig c = cfg;
        c.seed = derive_seed(kSeed, stream);
        c.n_samples = 6000;
        Dataset ds = generate_dataset(c);
        return evaluate(m, ds).mse / evaluate_constant_velocity(ds);
    };

    DataGenConfig nb6 = nbody3_config();
    nb6.n_bodies = 6;
    nb6.n_scenes = 20;
    double r_nb6 = eval_ratio(*shared.nb_model, nb6, 106);

    DataGenConfig st0 = string8_config(0);
    st0.n_scenes = 20;
    DataGenConfig st2 = string8_config(2);
    st2.n_scenes = 20;
    double r_st0 = eval_ratio(*shared.st_model, st0, 107);
    double r_st2 = eval_ratio(*shared.st_model, st2, 108);

    bool pass = r_nb6 < 1.0 && r_st0 < 1.0 && r_st2 < 1.0;
    return {pass, "6-body " + fmt(r_nb6) + ", string 0-pinned " + fmt(r_st0) +
                      ", 2-pinned " + fmt(r_st2) + " (all must be < 1)"};
}

// ------------------------------------------------------------- gate 7 ----

Outcome gate_energy(Shared&) {
    DataGenConfig cfg = nbody3_config();
    cfg.target = TargetKind::energy;
    SplitSet data = make_splits(cfg, derive_seed(kSeed, 109), 25000, 6000, 6000);

    TrainConfig tc;
    tc.seed = derive_seed(kSeed, 209);
    tc.epochs = kEpochCap;
    tc.abstract_head = true;
    tc.d_p = 10;  // energy experiments widen the per-object output
    auto baseline = [&](const Dataset& ds) {
        return mean_predictor_mse(data.train, ds);
    };
    LearnRun run = run_learning(tc, data, kEnergyRatio, baseline, kEpochCap);
    if (run.diverged) return {false, "training diverged"};

    return {run.ratio <= kEnergyRatio,
            "energy ratio " + fmt(run.ratio) + " (bar " + fmt(kEnergyRatio) + ", " +
                std::to_string(run.model.epochs_done) + " epochs)"};
}

// ------------------------------------------------------------- gate 8 ----

Outcome gate_rollout(Shared& shared) {
    Rng rng(derive_seed(kSeed, 110));
    double worst = 0.0;
    for (int s = 0; s < 3; ++s) {
        Scene scene = s == 0   ? sample_nbody_scene(rng, 3, true)
                      : s == 1 ? sample_balls_scene(rng, 3)
                               : sample_string_scene(rng, 6, 1);
        Trajectory truth = simulate(scene, 1000, 1e-3);
        RolloutResult oracle = rollout(scene, oracle_predictor(1e-3), 1000, 1e-3);
        if (oracle.truncated_at >= 0)
            return {false, "oracle rollout truncated at " +
                               std::to_string(oracle.truncated_at)};
        for (double d : positional_divergence(truth, oracle.traj))
            worst = std::max(worst, d);
    }
    if (worst > kRolloutTol)
        return {false, "oracle rollout divergence " + fmt(worst)};

    if (!shared.st_model)
        return {false, "missing trained string model for the statics check"};
    Scene pinned = sample_string_scene(rng, 8, 1);
    RolloutResult run = rollout(pinned, model_predictor(*shared.st_model), 1000, 1e-3);
    if (run.truncated_at >= 0)
        return {false, "model rollout truncated at " + std::to_string(run.truncated_at)};
    const auto& first = run.traj.snapshots.front();
    const auto& last = run.traj.snapshots.back();
    for (std::size_t i = 0; i < pinned.entities.size(); ++i) {
        if (!pinned.entities[i].is_static()) continue;
        if (!same_bits(first[i].pos.x, last[i].pos.x) ||
            !same_bits(first[i].pos.y, last[i].pos.y))
            return {false, "static entity " + std::to_string(i) + " drifted"};
    }
    return {true, "oracle divergence " + fmt(worst) +
                      ", statics displaced exactly 0 over 1000 model steps"};
}

// ------------------------------------------------------------- gate 9 ----

int run_cli(const std::string& args) {
    std::string cmd = "\"" + g_cli + "\" " + args + " > " +
                      (g_work / "cli.log").string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    return rc < 0 ? rc : (rc & 0x7f) == 0 ? (rc >> 8) & 0xff : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome gate_reproducibility() {
    fs::path dir = g_work / "repro";
    fs::create_directories(dir);

    // Datasets: identical seeds, byte-identical files.
    std::string gen = "gen --domain nbody --n 3 --scenes 5 --steps 60 --samples 200 "
                      "--seed 17 --out ";
    for (const char* sub : {"a", "b"})
        if (run_cli(gen + (dir / sub).string()) != 0)
            return {false, std::string("gen failed, see ") + (g_work / "cli.log").string()};
    for (const char* f : {"train.ds", "val.ds", "test.ds", "manifest.json"})
        if (slurp(dir / "a" / f) != slurp(dir / "b" / f))
            return {false, std::string("dataset files differ: ") + f};

    // Training: identical seeds, byte-identical metrics and checkpoints.
    for (const char* sub : {"ra", "rb"}) {
        std::ostringstream cfg;
        cfg << "{\n"
            << "  \"train_dataset\": \"" << (dir / "a" / "train.ds").string() << "\",\n"
            << "  \"val_dataset\": \"" << (dir / "a" / "val.ds").string() << "\",\n"
            << "  \"out_dir\": \"" << (dir / sub).string() << "\",\n"
            << "  \"d_e\": 8, \"fr_hidden\": [16], \"fo_hidden\": [16],\n"
            << "  \"epochs\": 4, \"batch_size\": 40, \"seed\": 9,\n"
            << "  \"noise\": {\"fraction\": 0.2, \"anneal_start\": 1, \"anneal_end\": 3},\n"
            << "  \"checkpoint_every\": 2\n"
            << "}\n";
        std::ofstream(dir / (std::string(sub) + ".json")) << cfg.str();
        if (run_cli("train --quiet --config " +
                    (dir / (std::string(sub) + ".json")).string()) != 0)
            return {false, "train failed, see " + (g_work / "cli.log").string()};
    }
    for (const char* f : {"checkpoint.ckpt", "metrics.csv", "model_card.json"})
        if (slurp(dir / "ra" / f) != slurp(dir / "rb" / f))
            return {false, std::string("training artifacts differ: ") + f};

    // Evaluation CSVs.
    for (const char* sub : {"ea.csv", "eb.csv"})
        if (run_cli("eval --checkpoint " + (dir / "ra" / "checkpoint.ckpt").string() +
                    " --dataset " + (dir / "a" / "test.ds").string() + " --csv " +
                    (dir / sub).string()) != 0)
            return {false, "eval failed, see " + (g_work / "cli.log").string()};
    if (slurp(dir / "ea.csv") != slurp(dir / "eb.csv"))
        return {false, "evaluation CSVs differ"};

    return {true, "datasets, checkpoints, metrics and eval CSVs byte-identical"};
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr,
                     "usage: acceptance <path-to-inphys-cli> [gates]\n"
                     "  gates: comma-separated 1-based subset, e.g. 1,2,3,9\n"
                     "  (6 and 8 reuse the models trained by 4 and 5)\n");
        return 2;
    }
    g_cli = fs::absolute(argv[1]).string();
    std::array<bool, 9> enabled;
    enabled.fill(true);
    if (argc > 2) {
        enabled.fill(false);
        std::stringstream list(argv[2]);
        std::string tok;
        while (std::getline(list, tok, ',')) {
            int idx = std::atoi(tok.c_str());
            if (idx < 1 || idx > 9) {
                std::fprintf(stderr, "acceptance: bad gate number '%s'\n", tok.c_str());
                return 2;
            }
            enabled[(std::size_t)idx - 1] = true;
        }
    }
    g_work = fs::temp_directory_path() / "inphys_acceptance";
    fs::remove_all(g_work);
    fs::create_directories(g_work);

    Shared shared;
    struct Gate {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Gate> gates = {
        {"gradient correctness", [] { return gate_gradients(); }},
        {"structural properties", [] { return gate_structure(); }},
        {"simulator physics", [] { return gate_physics(); }},
        {"desk-scale n-body learning", [&] { return gate_nbody_learning(shared); }},
        {"desk-scale string learning", [&] { return gate_string_learning(shared); }},
        {"generalization without retraining", [&] { return gate_generalization(shared); }},
        {"potential-energy estimation", [&] { return gate_energy(shared); }},
        {"rollout harness soundness", [&] { return gate_rollout(shared); }},
        {"seeded reproducibility", [] { return gate_reproducibility(); }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < gates.size(); ++i) {
        if (!enabled[i]) {
            std::printf("[%zu/9] %s ... SKIP\n", i + 1, gates[i].name);
            continue;
        }
        auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = gates[i].run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                        .count();
        std::printf("[%zu/9] %s ... %s (%s; %.0fs)\n", i + 1, gates[i].name,
                    out.pass ? "PASS" : "FAIL", out.detail.c_str(), secs);
        std::fflush(stdout);
        if (!out.pass) ++failed;
    }
    std::printf("acceptance: %d/9 criteria passed\n", 9 - failed);
    return failed == 0 ? 0 : 1;
}
