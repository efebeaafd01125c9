#include "inphys/training.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "inphys/rng.hpp"

namespace inphys {

namespace {

constexpr std::uint64_t kInitStream = 0x494e495400000000ull;
constexpr std::uint64_t kEpochStream = 0x45504f4300000000ull;

Matrix segment_col_sums(const Matrix& p, const std::vector<int>& offsets) {
    int segments = static_cast<int>(offsets.size()) - 1;
    Matrix out(p.rows, segments);
    for (int s = 0; s < segments; ++s)
        for (int j = offsets[static_cast<std::size_t>(s)];
             j < offsets[static_cast<std::size_t>(s) + 1]; ++j)
            for (int i = 0; i < p.rows; ++i) out(i, s) += p(i, j);
    return out;
}

Matrix expand_segments(const Matrix& per_segment, const std::vector<int>& offsets) {
    Matrix out(per_segment.rows, offsets.back());
    for (int s = 0; s < per_segment.cols; ++s)
        for (int j = offsets[static_cast<std::size_t>(s)];
             j < offsets[static_cast<std::size_t>(s) + 1]; ++j)
            for (int i = 0; i < per_segment.rows; ++i) out(i, j) = per_segment(i, s);
    return out;
}

// Column-major flattening that matches unflatten_output.
Matrix flatten_targets(const Dataset& ds, const std::vector<int>& idx,
                       const RowNormalizer& tnorm) {
    int per = ds.target_rows() * (ds.provenance.target == TargetKind::velocity
                                      ? ds.n_objects
                                      : 1);
    Matrix out(per, static_cast<int>(idx.size()));
    for (std::size_t s = 0; s < idx.size(); ++s) {
        Matrix t = tnorm.apply(ds.samples[static_cast<std::size_t>(idx[s])].target);
        for (int j = 0; j < t.cols; ++j)
            for (int i = 0; i < t.rows; ++i)
                out(j * t.rows + i, static_cast<int>(s)) = t(i, j);
    }
    return out;
}

struct BatchForward {
    double mse = 0.0;
    long long entries = 0;
    double effects_sq = 0.0;  // sum of squared effects, for the L2 report
};

// Per-dataset immutable context shared by training and evaluation.
struct NormalizedScenes {
    std::vector<Matrix> x;
    std::vector<Matrix> r_a;
};

NormalizedScenes normalize_scenes(const Normalizer& norm, const Dataset& ds) {
    NormalizedScenes ns;
    ns.x.reserve(ds.scene_x.size());
    ns.r_a.reserve(ds.scene_r_a.size());
    for (const Matrix& m : ds.scene_x) ns.x.push_back(norm.x.apply(m));
    for (const Matrix& m : ds.scene_r_a) ns.r_a.push_back(norm.r_a.apply(m));
    return ns;
}

// Normalized input graphs for the chosen samples. When `corrupt` is given,
// flagged items get Gaussian noise on the dynamic rows before normalization.
std::vector<GraphInput> build_graphs(const Dataset& ds, const std::vector<int>& idx,
                                     const Normalizer& norm, const NormalizedScenes& ns,
                                     const std::vector<char>* corrupt,
                                     const double* noise_std, Rng* rng) {
    std::vector<GraphInput> graphs;
    graphs.reserve(idx.size());
    for (std::size_t s = 0; s < idx.size(); ++s) {
        const DatasetSample& sample = ds.samples[static_cast<std::size_t>(idx[s])];
        Matrix o = sample.o;
        if (corrupt && (*corrupt)[s]) {
            for (int r = 0; r < kDynamicRows; ++r)
                for (int j = 0; j < o.cols; ++j) o(r, j) += rng->normal() * noise_std[r];
        }
        GraphInput g;
        g.o = norm.o.apply(o);
        g.x = ns.x[static_cast<std::size_t>(sample.scene)];
        g.r_a = ns.r_a[static_cast<std::size_t>(sample.scene)];
        g.r_r = ds.r_r;
        g.r_s = ds.r_s;
        graphs.push_back(std::move(g));
    }
    return graphs;
}

GraphInput concat_all(const std::vector<GraphInput>& graphs) {
    std::vector<const GraphInput*> parts;
    parts.reserve(graphs.size());
    for (const GraphInput& g : graphs) parts.push_back(&g);
    return concat_graphs(parts);
}

std::vector<int> object_offsets(std::size_t samples, int n_objects) {
    std::vector<int> offsets(samples + 1, 0);
    for (std::size_t s = 0; s < samples; ++s)
        offsets[s + 1] = offsets[s] + n_objects;
    return offsets;
}

Matrix normalized_targets(const Dataset& ds, const std::vector<int>& idx,
                          const RowNormalizer& tnorm) {
    std::vector<Matrix> cols;
    cols.reserve(idx.size());
    for (int i : idx)
        cols.push_back(tnorm.apply(ds.samples[static_cast<std::size_t>(i)].target));
    std::vector<const Matrix*> parts;
    for (const Matrix& m : cols) parts.push_back(&m);
    return hconcat(parts);
}

Matrix flatten_inputs(const MlpBaseline& flat, const std::vector<GraphInput>& graphs) {
    std::vector<Matrix> cols;
    cols.reserve(graphs.size());
    for (const GraphInput& g : graphs) {
        if (g.n_objects() != flat.n_objects || g.n_relations() != flat.n_relations)
            throw artifact_error("mlp baseline: dataset topology does not match the model");
        cols.push_back(flatten_graph(g));
    }
    std::vector<const Matrix*> parts;
    for (const Matrix& m : cols) parts.push_back(&m);
    return hconcat(parts);
}

double l2_params_total(const std::vector<const Matrix*>& params, double factor) {
    double total = 0.0;
    for (const Matrix* p : params) total += l2_penalty(*p, factor);
    return total;
}

// Population standard deviation of each dynamic row over the dataset.
std::array<double, kDynamicRows> dynamic_row_std(const Dataset& ds) {
    std::array<double, kDynamicRows> out{};
    long long count = static_cast<long long>(ds.size()) * ds.n_objects;
    for (int r = 0; r < kDynamicRows; ++r) {
        double mean = 0.0;
        for (const DatasetSample& s : ds.samples)
            for (int j = 0; j < s.o.cols; ++j) mean += s.o(r, j);
        mean /= static_cast<double>(count);
        double var = 0.0;
        for (const DatasetSample& s : ds.samples)
            for (int j = 0; j < s.o.cols; ++j) {
                double d = s.o(r, j) - mean;
                var += d * d;
            }
        out[static_cast<std::size_t>(r)] = std::sqrt(var / static_cast<double>(count));
    }
    return out;
}

void check_dataset_binding(const TrainedModel& tm, const Dataset& ds, bool exact_size) {
    if (tm.target != ds.provenance.target)
        throw artifact_error("model and dataset disagree on target kind");
    if (tm.domain != ds.provenance.domain)
        throw artifact_error("model and dataset disagree on domain");
    if (tm.config.model == ModelKind::mlp_flat || exact_size) {
        if (ds.n_objects != tm.n_objects || ds.n_relations != tm.n_relations)
            throw artifact_error("model and dataset disagree on system size");
    }
}

} // namespace

double noise_fraction_at(int epoch, const NoiseConfig& cfg) {
    if (epoch < 0) throw config_error("noise_fraction_at: negative epoch");
    if (cfg.fraction <= 0.0) return 0.0;
    if (epoch < cfg.anneal_start) return cfg.fraction;
    if (epoch >= cfg.anneal_end) return 0.0;
    double span = static_cast<double>(cfg.anneal_end - cfg.anneal_start);
    return cfg.fraction * static_cast<double>(cfg.anneal_end - epoch) / span;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw config_error("TrainConfig: epochs must be positive");
    if (batch_size < 1) throw config_error("TrainConfig: batch size must be positive");
    if (d_e < 1 || d_p < 1) throw config_error("TrainConfig: layer widths must be positive");
    if (l2_effects < 0.0 || l2_params < 0.0)
        throw config_error("TrainConfig: L2 factors must be non-negative");
    if (noise.fraction < 0.0 || noise.fraction > 1.0)
        throw config_error("TrainConfig: noise fraction outside [0, 1]");
    if (noise.std_scale < 0.0) throw config_error("TrainConfig: noise scale negative");
    if (noise.anneal_start < 0 || noise.anneal_end < noise.anneal_start)
        throw config_error("TrainConfig: malformed noise anneal window");
    if (noise.fraction > 0.0 && noise.anneal_end > epochs)
        throw config_error("TrainConfig: noise anneal window extends past the last epoch");
    if (balance_bins < 1) throw config_error("TrainConfig: need at least one balance bin");
    if (checkpoint_every < 1) throw config_error("TrainConfig: checkpoint interval must be positive");
}

std::vector<Matrix*> TrainedModel::trainable_params() {
    std::vector<Matrix*> out;
    if (config.model == ModelKind::mlp_flat) return flat.net.param_list();
    if (config.model == ModelKind::in_full) out = in.f_r.param_list();
    for (Matrix* p : in.f_o.param_list()) out.push_back(p);
    if (in.f_a)
        for (Matrix* p : in.f_a->param_list()) out.push_back(p);
    return out;
}

std::vector<const Matrix*> TrainedModel::trainable_params() const {
    std::vector<const Matrix*> out;
    if (config.model == ModelKind::mlp_flat) return std::as_const(flat.net).param_list();
    if (config.model == ModelKind::in_full) out = std::as_const(in.f_r).param_list();
    for (const Matrix* p : std::as_const(in.f_o).param_list()) out.push_back(p);
    if (in.f_a)
        for (const Matrix* p : std::as_const(*in.f_a).param_list()) out.push_back(p);
    return out;
}

Normalizer fit_normalizer(const Dataset& ds) {
    if (ds.size() == 0) throw data_error("fit_normalizer: empty dataset");
    auto fit_rows = [](int rows, auto&& fill) {
        RowNormalizer n;
        n.median = Matrix(rows, 1);
        n.half_range = Matrix(rows, 1);
        std::vector<double> vals;
        for (int i = 0; i < rows; ++i) {
            vals.clear();
            fill(i, vals);
            if (vals.empty()) throw data_error("fit_normalizer: empty row");
            std::sort(vals.begin(), vals.end());
            double p5 = sorted_percentile(vals, 5.0);
            double p50 = sorted_percentile(vals, 50.0);
            double p95 = sorted_percentile(vals, 95.0);
            if (!std::isfinite(p5) || !std::isfinite(p95))
                throw numeric_error("fit_normalizer: non-finite percentile");
            n.median(i, 0) = p50;
            n.half_range(i, 0) = (p95 - p5) / 2.0;
        }
        return n;
    };

    Normalizer norm;
    norm.o = fit_rows(kStateRows, [&](int r, std::vector<double>& v) {
        v.reserve(static_cast<std::size_t>(ds.size()) * ds.n_objects);
        for (const DatasetSample& s : ds.samples)
            for (int j = 0; j < s.o.cols; ++j) v.push_back(s.o(r, j));
    });
    norm.x = fit_rows(kExternalRows, [&](int r, std::vector<double>& v) {
        v.reserve(static_cast<std::size_t>(ds.size()) * ds.n_objects);
        for (const DatasetSample& s : ds.samples) {
            const Matrix& x = ds.scene_x[static_cast<std::size_t>(s.scene)];
            for (int j = 0; j < x.cols; ++j) v.push_back(x(r, j));
        }
    });
    norm.r_a = fit_rows(kRelationRows, [&](int r, std::vector<double>& v) {
        v.reserve(static_cast<std::size_t>(ds.size()) * ds.n_relations);
        for (const DatasetSample& s : ds.samples) {
            const Matrix& ra = ds.scene_r_a[static_cast<std::size_t>(s.scene)];
            for (int j = 0; j < ra.cols; ++j) v.push_back(ra(r, j));
        }
    });
    int t_cols = ds.provenance.target == TargetKind::velocity ? ds.n_objects : 1;
    norm.target = fit_rows(ds.target_rows(), [&](int r, std::vector<double>& v) {
        v.reserve(static_cast<std::size_t>(ds.size()) * t_cols);
        for (const DatasetSample& s : ds.samples)
            for (int j = 0; j < s.target.cols; ++j) v.push_back(s.target(r, j));
    });
    return norm;
}

GraphInput normalize_graph(const Normalizer& norm, const GraphInput& g) {
    GraphInput out;
    out.o = norm.o.apply(g.o);
    out.x = norm.x.apply(g.x);
    out.r_a = norm.r_a.apply(g.r_a);
    out.r_r = g.r_r;
    out.r_s = g.r_s;
    return out;
}

std::vector<std::vector<int>> balance_batches(const Dataset& ds, int batch_size,
                                              int bins, bool stratify_contact,
                                              Rng& rng) {
    int n = ds.size();
    if (batch_size < 1) throw config_error("balance_batches: batch size must be positive");
    if (batch_size > n) throw config_error("balance_batches: batch larger than dataset");
    if (bins < 1) throw config_error("balance_batches: need at least one bin");

    int n_batches = (n + batch_size - 1) / batch_size;
    std::vector<int> cap(static_cast<std::size_t>(n_batches), batch_size);
    cap.back() = n - (n_batches - 1) * batch_size;

    std::vector<double> key(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Matrix& t = ds.samples[static_cast<std::size_t>(i)].target;
        key[static_cast<std::size_t>(i)] =
            std::sqrt(sum_squares(t) / static_cast<double>(t.data.size()));
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double ka = key[static_cast<std::size_t>(a)], kb = key[static_cast<std::size_t>(b)];
        return ka != kb ? ka < kb : a < b;
    });

    int strata_count = stratify_contact ? 2 * bins : bins;
    std::vector<std::vector<int>> strata(static_cast<std::size_t>(strata_count));
    for (int rank = 0; rank < n; ++rank) {
        int idx = order[static_cast<std::size_t>(rank)];
        int bin = static_cast<int>(static_cast<long long>(rank) * bins / n);
        int stratum = bin;
        if (stratify_contact && ds.samples[static_cast<std::size_t>(idx)].contact)
            stratum += bins;
        strata[static_cast<std::size_t>(stratum)].push_back(idx);
    }
    for (std::vector<int>& s : strata) rng.shuffle(s);

    std::vector<std::vector<int>> batches(static_cast<std::size_t>(n_batches));
    int cursor = 0;
    for (const std::vector<int>& s : strata) {
        for (int idx : s) {
            while (static_cast<int>(batches[static_cast<std::size_t>(cursor)].size()) >=
                   cap[static_cast<std::size_t>(cursor)])
                cursor = (cursor + 1) % n_batches;
            batches[static_cast<std::size_t>(cursor)].push_back(idx);
            cursor = (cursor + 1) % n_batches;
        }
    }
    return batches;
}

TrainedModel init_trained_model(const TrainConfig& cfg, const Dataset& train) {
    cfg.validate();
    train.validate();
    if (cfg.abstract_head != (train.provenance.target == TargetKind::energy))
        throw config_error("init_trained_model: abstract head and target kind disagree");

    TrainedModel tm;
    tm.config = cfg;
    tm.domain = train.provenance.domain;
    tm.target = train.provenance.target;
    tm.n_objects = train.n_objects;
    tm.n_relations = train.n_relations;
    tm.best_val = std::numeric_limits<double>::infinity();

    Rng init(derive_seed(cfg.seed, kInitStream));
    if (cfg.model == ModelKind::mlp_flat) {
        int out_rows = train.target_rows();
        int out_cols = tm.target == TargetKind::velocity ? tm.n_objects : 1;
        tm.flat = MlpBaseline::create(tm.n_objects, tm.n_relations, out_rows, out_cols,
                                      cfg.mlp_hidden, init);
    } else {
        if (!cfg.abstract_head && cfg.d_p != train.target_rows())
            throw config_error("init_trained_model: d_p must match the target rows");
        tm.in.marshal_mode = cfg.marshal;
        tm.in.aggregate_mode = cfg.aggregate;
        tm.in.effects_zeroed = cfg.model == ModelKind::in_dynamics_only;
        tm.in.f_r = MlpParams::create(InModel::marshal_width(cfg.marshal), cfg.fr_hidden,
                                      cfg.d_e, init);
        tm.in.f_o = MlpParams::create(InModel::aggregate_width(cfg.aggregate, cfg.d_e),
                                      cfg.fo_hidden, cfg.d_p, init);
        if (cfg.abstract_head)
            tm.in.f_a = MlpParams::create(cfg.d_p, cfg.fa_hidden, 1, init);
        tm.in.validate();
    }
    tm.norm = fit_normalizer(train);
    auto params = std::as_const(tm).trainable_params();
    tm.adam = AdamState::create(params);
    return tm;
}

namespace {

struct ForwardOutcome {
    double mse = 0.0;
    double loss = 0.0;
    long long entries = 0;  // prediction entries behind `mse`
    bool finite = true;
};

// Forward + backward + Adam step for one batch; `apply` false runs
// forward only (validation).
ForwardOutcome run_batch(TrainedModel& tm, const Dataset& ds,
                         const NormalizedScenes& ns, const std::vector<int>& idx,
                         const std::vector<char>* corrupt, const double* noise_std,
                         Rng* rng, bool apply) {
    const TrainConfig& cfg = tm.config;
    ForwardOutcome out;
    std::vector<GraphInput> graphs =
        build_graphs(ds, idx, tm.norm, ns, corrupt, noise_std, rng);

    std::vector<Matrix*> params = tm.trainable_params();
    std::vector<const Matrix*> cparams(params.begin(), params.end());
    std::vector<Matrix*> grad_ptrs;
    InGradients in_grads;
    MlpGradients flat_grads;
    double effects_l2 = 0.0;

    if (cfg.model == ModelKind::mlp_flat) {
        Matrix inputs = flatten_inputs(tm.flat, graphs);
        Matrix targets = flatten_targets(ds, idx, tm.norm.target);
        MlpCache cache;
        Matrix y = mlp_forward(tm.flat.net, inputs, apply ? &cache : nullptr);
        auto [mse, dy] = mse_loss(y, targets);
        out.mse = mse;
        out.entries = static_cast<long long>(y.data.size());
        if (apply) {
            flat_grads = mlp_backward(tm.flat.net, cache, dy);
            grad_ptrs = flat_grads.layers.param_list();
        }
    } else {
        GraphInput bg = concat_all(graphs);
        Matrix targets = normalized_targets(ds, idx, tm.norm.target);
        InForward fwd = in_forward(tm.in, bg);
        effects_l2 = l2_penalty(fwd.e, cfg.l2_effects);
        if (cfg.abstract_head) {
            std::vector<int> offsets = object_offsets(graphs.size(), ds.n_objects);
            Matrix pbar = segment_col_sums(fwd.p, offsets);
            MlpCache fa_cache;
            Matrix q = mlp_forward(*tm.in.f_a, pbar, &fa_cache);
            auto [mse, dq] = mse_loss(q, targets);
            out.mse = mse;
            out.entries = static_cast<long long>(q.data.size());
            if (apply) {
                MlpGradients ga = mlp_backward(*tm.in.f_a, fa_cache, dq);
                Matrix dp = expand_segments(ga.d_input, offsets);
                in_grads = in_backward(tm.in, bg, fwd, dp, cfg.l2_effects);
                in_grads.f_a = std::move(ga.layers);
            }
        } else {
            auto [mse, dout] = mse_loss(fwd.p, targets);
            out.mse = mse;
            out.entries = static_cast<long long>(fwd.p.data.size());
            if (apply) in_grads = in_backward(tm.in, bg, fwd, dout, cfg.l2_effects);
        }
        if (apply) {
            if (cfg.model == ModelKind::in_full) grad_ptrs = in_grads.f_r.param_list();
            for (Matrix* p : in_grads.f_o.param_list()) grad_ptrs.push_back(p);
            if (tm.in.f_a)
                for (Matrix* p : in_grads.f_a.param_list()) grad_ptrs.push_back(p);
        }
    }

    out.loss = out.mse + effects_l2 + l2_params_total(cparams, cfg.l2_params);
    out.finite = std::isfinite(out.loss);
    if (!out.finite || !apply) return out;

    for (std::size_t i = 0; i < params.size(); ++i)
        l2_penalty_grad(*params[i], cfg.l2_params, *grad_ptrs[i]);
    std::vector<const Matrix*> cgrads(grad_ptrs.begin(), grad_ptrs.end());
    adam_step(params, cgrads, tm.adam, tm.schedule.lr);
    return out;
}

double normalized_mse(TrainedModel& tm, const Dataset& ds, const NormalizedScenes& ns) {
    constexpr int kChunk = 512;
    double sq_sum = 0.0;
    long long entries = 0;
    for (int start = 0; start < ds.size(); start += kChunk) {
        std::vector<int> idx;
        for (int i = start; i < std::min(ds.size(), start + kChunk); ++i) idx.push_back(i);
        ForwardOutcome o = run_batch(tm, ds, ns, idx, nullptr, nullptr, nullptr, false);
        sq_sum += o.mse * static_cast<double>(o.entries);
        entries += o.entries;
    }
    return sq_sum / static_cast<double>(entries);
}

void snapshot_best(TrainedModel& tm) {
    if (tm.config.model == ModelKind::mlp_flat)
        tm.best_flat = tm.flat;
    else
        tm.best_in = tm.in;
    tm.has_best = true;
}

} // namespace

TrainResult train(TrainedModel& state, const Dataset& train_ds, const Dataset& val_ds,
                  const std::function<void(const TrainedModel&)>& on_epoch,
                  int stop_after) {
    const TrainConfig& cfg = state.config;
    cfg.validate();
    check_dataset_binding(state, train_ds, true);
    check_dataset_binding(state, val_ds, true);

    NormalizedScenes train_ns = normalize_scenes(state.norm, train_ds);
    NormalizedScenes val_ns = normalize_scenes(state.norm, val_ds);
    std::array<double, kDynamicRows> row_std = dynamic_row_std(train_ds);
    std::array<double, kDynamicRows> noise_std{};
    for (int r = 0; r < kDynamicRows; ++r)
        noise_std[static_cast<std::size_t>(r)] =
            cfg.noise.std_scale * row_std[static_cast<std::size_t>(r)];

    TrainResult result;
    bool stratify = train_ds.provenance.domain == Domain::balls;

    int until = stop_after >= 0 ? std::min(cfg.epochs, stop_after) : cfg.epochs;
    for (int epoch = state.epochs_done; epoch < until; ++epoch) {
        Rng erng(derive_seed(cfg.seed, kEpochStream + static_cast<std::uint64_t>(epoch)));
        std::vector<std::vector<int>> batches =
            balance_batches(train_ds, cfg.batch_size, cfg.balance_bins, stratify, erng);
        double fraction = noise_fraction_at(epoch, cfg.noise);
        double lr_used = state.schedule.lr;

        double mse_sum = 0.0;
        int n_batches = 0;
        bool finite = true;
        double val_mse = std::numeric_limits<double>::quiet_NaN();
        try {
            for (const std::vector<int>& batch : batches) {
                int nb = static_cast<int>(batch.size());
                int k = static_cast<int>(fraction * nb);
                std::vector<char> corrupt(static_cast<std::size_t>(nb), 0);
                if (k > 0) {
                    std::vector<int> pos(static_cast<std::size_t>(nb));
                    std::iota(pos.begin(), pos.end(), 0);
                    for (int i = 0; i < k; ++i) {
                        int j = i + static_cast<int>(
                                        erng.below(static_cast<std::uint64_t>(nb - i)));
                        std::swap(pos[static_cast<std::size_t>(i)],
                                  pos[static_cast<std::size_t>(j)]);
                        corrupt[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])] =
                            1;
                    }
                }
                ForwardOutcome o = run_batch(state, train_ds, train_ns, batch,
                                             k > 0 ? &corrupt : nullptr, noise_std.data(),
                                             &erng, true);
                if (!o.finite) {
                    finite = false;
                    break;
                }
                mse_sum += o.mse;
                ++n_batches;
            }
            if (finite) val_mse = normalized_mse(state, val_ds, val_ns);
        } catch (const numeric_error&) {
            finite = false;  // overflow mid-batch counts as divergence
        }
        if (!finite || !std::isfinite(val_mse)) {
            result.diverged = true;
            result.diverged_epoch = epoch;
            return result;
        }

        state.metrics.push_back(
            {epoch, mse_sum / static_cast<double>(n_batches), val_mse, lr_used});
        if (val_mse < state.best_val) {
            state.best_val = val_mse;
            snapshot_best(state);
        }
        state.schedule.update(val_mse);
        state.epochs_done = epoch + 1;
        if (on_epoch) on_epoch(state);
    }
    return result;
}

Matrix predict_samples(const TrainedModel& model, const Dataset& ds,
                       const std::vector<int>& indices, bool use_best) {
    check_dataset_binding(model, ds, false);
    const bool best = use_best && model.has_best;
    NormalizedScenes ns = normalize_scenes(model.norm, ds);
    std::vector<GraphInput> graphs =
        build_graphs(ds, indices, model.norm, ns, nullptr, nullptr, nullptr);

    if (model.config.model == ModelKind::mlp_flat) {
        const MlpBaseline& net = best ? model.best_flat : model.flat;
        Matrix inputs = flatten_inputs(net, graphs);
        Matrix y = mlp_forward(net.net, inputs);
        std::vector<Matrix> outs;
        outs.reserve(indices.size());
        for (int s = 0; s < y.cols; ++s) {
            Matrix col(y.rows, 1);
            for (int i = 0; i < y.rows; ++i) col(i, 0) = y(i, s);
            outs.push_back(model.norm.target.invert(
                unflatten_output(col, net.out_rows, net.out_cols)));
        }
        std::vector<const Matrix*> parts;
        for (const Matrix& m : outs) parts.push_back(&m);
        return hconcat(parts);
    }

    const InModel& net = best ? model.best_in : model.in;
    GraphInput bg = concat_all(graphs);
    if (model.target == TargetKind::energy) {
        InForward fwd = in_forward(net, bg);
        std::vector<int> offsets = object_offsets(graphs.size(), ds.n_objects);
        Matrix pbar = segment_col_sums(fwd.p, offsets);
        Matrix q = mlp_forward(*net.f_a, pbar);
        return model.norm.target.invert(q);
    }
    return model.norm.target.invert(predict(net, bg));
}

EvalResult evaluate(const TrainedModel& model, const Dataset& ds) {
    check_dataset_binding(model, ds, false);
    constexpr int kChunk = 512;
    int t_rows = ds.target_rows();
    EvalResult res;
    res.per_row = Matrix(t_rows, 1);
    long long per_row_count = 0;

    for (int start = 0; start < ds.size(); start += kChunk) {
        std::vector<int> idx;
        for (int i = start; i < std::min(ds.size(), start + kChunk); ++i) idx.push_back(i);
        Matrix pred = predict_samples(model, ds, idx);
        int col = 0;
        for (int s : idx) {
            const Matrix& t = ds.samples[static_cast<std::size_t>(s)].target;
            for (int j = 0; j < t.cols; ++j, ++col)
                for (int i = 0; i < t_rows; ++i) {
                    double d = pred(i, col) - t(i, j);
                    res.per_row(i, 0) += d * d;
                }
            per_row_count += t.cols;
        }
    }
    double total = 0.0;
    for (int i = 0; i < t_rows; ++i) {
        total += res.per_row(i, 0);
        res.per_row(i, 0) /= static_cast<double>(per_row_count);
    }
    res.mse = total / static_cast<double>(per_row_count * t_rows);
    return res;
}

double evaluate_constant_velocity(const Dataset& ds) {
    if (ds.provenance.target != TargetKind::velocity)
        throw config_error("evaluate_constant_velocity: needs velocity targets");
    double sq = 0.0;
    long long count = 0;
    for (const DatasetSample& s : ds.samples) {
        for (int j = 0; j < s.o.cols; ++j) {
            double dx = s.o(kRowVx, j) - s.target(0, j);
            double dy = s.o(kRowVy, j) - s.target(1, j);
            sq += dx * dx + dy * dy;
        }
        count += 2ll * s.o.cols;
    }
    return sq / static_cast<double>(count);
}

double mean_predictor_mse(const Dataset& train, const Dataset& test) {
    if (train.provenance.target != TargetKind::energy ||
        test.provenance.target != TargetKind::energy)
        throw config_error("mean_predictor_mse: needs energy targets");
    double mean = 0.0;
    for (const DatasetSample& s : train.samples) mean += s.target(0, 0);
    mean /= static_cast<double>(train.size());
    double sq = 0.0;
    for (const DatasetSample& s : test.samples) {
        double d = s.target(0, 0) - mean;
        sq += d * d;
    }
    return sq / static_cast<double>(test.size());
}

} // namespace inphys
