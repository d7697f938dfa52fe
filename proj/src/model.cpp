#include "asmp/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "asmp/errors.hpp"
#include "asmp/log.hpp"
#include "asmp/solver.hpp"

namespace asmp {

namespace {

Matrix uniform_init(int rows, int cols, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    Matrix w(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) w(i, j) = rng.uniform(-bound, bound);
    return w;
}

Matrix dropout_mask(int rows, int cols, double rate, Rng& rng) {
    const double keep_scale = 1.0 / (1.0 - rate);
    Matrix mask(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) mask(i, j) = rng.uniform01() >= rate ? keep_scale : 0.0;
    return mask;
}

struct MlpCache {
    Matrix z0;            // input after dropout
    Matrix a1, z1;        // pre-activation; post-relu post-dropout
    Matrix mask0, mask1;  // scaled masks; empty when dropout is off
};

Matrix mlp_forward(const Mlp& mlp, const Matrix& z, double dropout, Rng* rng, MlpCache* cache) {
    const bool drop = dropout > 0.0 && rng != nullptr;
    switch (mlp.kind) {
        case FeatureMapKind::identity:
            return z;
        case FeatureMapKind::linear: {
            Matrix z0 = z;
            Matrix mask0;
            if (drop) {
                mask0 = dropout_mask(static_cast<int>(z.rows()), static_cast<int>(z.cols()),
                                     dropout, *rng);
                z0 = z.cwiseProduct(mask0);
            }
            Matrix out = z0 * mlp.w1;
            out.rowwise() += mlp.b1.row(0);
            if (cache) {
                cache->z0 = std::move(z0);
                cache->mask0 = std::move(mask0);
            }
            return out;
        }
        case FeatureMapKind::two_layer:
            break;
    }
    Matrix z0 = z;
    Matrix mask0;
    if (drop) {
        mask0 = dropout_mask(static_cast<int>(z.rows()), static_cast<int>(z.cols()), dropout,
                             *rng);
        z0 = z.cwiseProduct(mask0);
    }
    Matrix a1 = z0 * mlp.w1;
    a1.rowwise() += mlp.b1.row(0);
    Matrix z1 = a1.cwiseMax(0.0);
    Matrix mask1;
    if (drop) {
        mask1 = dropout_mask(static_cast<int>(z1.rows()), static_cast<int>(z1.cols()), dropout,
                             *rng);
        z1 = z1.cwiseProduct(mask1);
    }
    Matrix out = z1 * mlp.w2;
    out.rowwise() += mlp.b2.row(0);
    if (cache) {
        cache->z0 = std::move(z0);
        cache->a1 = std::move(a1);
        cache->z1 = std::move(z1);
        cache->mask0 = std::move(mask0);
        cache->mask1 = std::move(mask1);
    }
    return out;
}

ThetaGrads mlp_backward(const Mlp& mlp, const MlpCache& cache, const Matrix& d_out) {
    ThetaGrads grads;
    if (mlp.kind == FeatureMapKind::identity) return grads;
    if (mlp.kind == FeatureMapKind::linear) {
        grads.w1 = cache.z0.transpose() * d_out;
        grads.b1 = d_out.colwise().sum();
        return grads;
    }
    grads.w2 = cache.z1.transpose() * d_out;
    grads.b2 = d_out.colwise().sum();
    Matrix dz1 = d_out * mlp.w2.transpose();
    if (cache.mask1.size() > 0) dz1 = dz1.cwiseProduct(cache.mask1);
    const Matrix da1 = dz1.cwiseProduct((cache.a1.array() > 0.0).cast<double>().matrix());
    grads.w1 = cache.z0.transpose() * da1;
    grads.b1 = da1.colwise().sum();
    return grads;
}

/// Backprop of d_scores through the H-update recursion with the structure
/// sequence frozen; returns dL/dX.
Matrix recursion_backward(const AsmpParams& p, const std::vector<Matrix>& frozen_p,
                          const Matrix& d_scores) {
    const double c0 = 1.0 - 2.0 * p.eta1 - 2.0 * p.eta1 * p.lambda;
    const double c1 = 2.0 * p.eta1 * p.lambda;
    const double c2 = 2.0 * p.eta1;
    Matrix g = d_scores;
    Matrix dx = Matrix::Zero(d_scores.rows(), d_scores.cols());
    for (auto it = frozen_p.rbegin(); it != frozen_p.rend(); ++it) {
        for (int i = 0; i < p.h_steps_per_iter; ++i) {
            dx.noalias() += c2 * g;
            Matrix g_prev = c0 * g;
            if (p.lambda != 0.0) g_prev.noalias() += c1 * (it->transpose() * g);
            g = std::move(g_prev);
        }
    }
    dx += g;  // H^0 = X
    return dx;
}

void check_model(const ClassifierModel& model, const Graph& g, const Matrix& z) {
    if (z.rows() != g.n_nodes) throw ValidationError("model: feature row count != n_nodes");
    if (model.mlp.kind != FeatureMapKind::identity && model.mlp.w1.rows() != z.cols())
        throw ValidationError("model: weight shapes inconsistent with input dim");
    if (model.normalization == NormMode::sym && model.structure_updates)
        throw ValidationError("model: sym normalization requires structure updates off");
}

}  // namespace

ClassifierModel init_model(int in_dim, int n_classes, const TrainConfig& cfg,
                           const AsmpParams& asmp, std::uint64_t seed, FeatureMapKind kind) {
    ClassifierModel model;
    model.asmp = asmp;
    model.seed = seed;
    model.mlp.kind = kind;
    Rng rng(mix_seed(seed, 0x11));
    if (kind == FeatureMapKind::linear) {
        model.mlp.w1 = uniform_init(in_dim, n_classes, rng);
        model.mlp.b1 = Matrix::Zero(1, n_classes);
    } else if (kind == FeatureMapKind::two_layer) {
        if (cfg.hidden <= 0) throw ValidationError("init_model: hidden width must be positive");
        model.mlp.w1 = uniform_init(in_dim, cfg.hidden, rng);
        model.mlp.b1 = Matrix::Zero(1, cfg.hidden);
        model.mlp.w2 = uniform_init(cfg.hidden, n_classes, rng);
        model.mlp.b2 = Matrix::Zero(1, n_classes);
    }
    return model;
}

void seed_step_sizes_from_theorem(ClassifierModel& model, const Graph& g, double safety) {
    const Matrix x = feature_map(model.mlp, g.features);
    const double b = std::max(max_row_norm(x), 1e-6);
    const double c = degree_view(g.adjacency, model.degree_floor).min_effective();
    const auto [e1, e2] = theorem_step_bounds(model.asmp, g.n_nodes, b, c);
    model.asmp.eta1 = safety * e1;
    model.asmp.eta2 = safety * e2;
}

Matrix feature_map(const Mlp& mlp, const Matrix& z) {
    return mlp_forward(mlp, z, 0.0, nullptr, nullptr);
}

Matrix propagate(const ClassifierModel& model, const Graph& g, const Matrix& x,
                 std::vector<Matrix>* frozen_p) {
    if (x.rows() != g.n_nodes) throw ValidationError("propagate: row count != n_nodes");
    if (model.normalization == NormMode::sym && model.structure_updates)
        throw ValidationError("propagate: sym normalization requires structure updates off");
    const AsmpParams& p = model.asmp;
    Matrix h = x;
    const Matrix a_dense = Matrix(g.adjacency);
    StructureMatrix s{a_dense};

    // With the structure frozen the propagator never changes.
    Matrix p_static;
    if (!model.structure_updates && p.lambda != 0.0)
        p_static = sym_propagator(a_dense, model.normalization, model.degree_floor);

    for (int k = 1; k <= p.k_layers; ++k) {
        Matrix p_norm;
        if (p.lambda != 0.0)
            p_norm = model.structure_updates
                         ? sym_propagator(s.values, model.normalization, model.degree_floor)
                         : p_static;
        for (int i = 0; i < p.h_steps_per_iter; ++i)
            h = h_step_with(h, p_norm, x, p.lambda, p.eta1);
        if (frozen_p) frozen_p->push_back(p_norm);
        if (model.structure_updates)
            for (int i = 0; i < p.s_steps_per_iter; ++i)
                s = s_step(h, s, a_dense, p, p.eta2, model.degree_floor);
        if (!h.allFinite())
            throw NumericalError("propagate: non-finite activations at layer " +
                                 std::to_string(k));
    }
    return h;
}

Matrix forward(const ClassifierModel& model, const Graph& g, const Matrix& z) {
    check_model(model, g, z);
    return propagate(model, g, feature_map(model.mlp, z));
}

double ce_loss(const Matrix& scores, const std::vector<int>& labels,
               const std::vector<int>& split) {
    if (split.empty()) throw ValidationError("ce_loss: empty split");
    double total = 0.0;
    for (int idx : split) {
        if (idx < 0 || idx >= scores.rows() || labels[idx] < 0 ||
            labels[idx] >= scores.cols())
            throw ValidationError("ce_loss: bad split index or label");
        const auto row = scores.row(idx);
        const double m = row.maxCoeff();
        double sum = 0.0;
        for (int c = 0; c < scores.cols(); ++c) sum += std::exp(row[c] - m);
        total += std::log(sum) + m - row[labels[idx]];
    }
    return total / static_cast<double>(split.size());
}

Matrix ce_loss_grad(const Matrix& scores, const std::vector<int>& labels,
                    const std::vector<int>& split) {
    if (split.empty()) throw ValidationError("ce_loss_grad: empty split");
    Matrix grad = Matrix::Zero(scores.rows(), scores.cols());
    const double inv = 1.0 / static_cast<double>(split.size());
    for (int idx : split) {
        const auto row = scores.row(idx);
        const double m = row.maxCoeff();
        double sum = 0.0;
        for (int c = 0; c < scores.cols(); ++c) sum += std::exp(row[c] - m);
        for (int c = 0; c < scores.cols(); ++c)
            grad(idx, c) = inv * std::exp(row[c] - m) / sum;
        grad(idx, labels[idx]) -= inv;
    }
    return grad;
}

namespace {

struct BackpropOut {
    ThetaGrads grads;
    double loss = 0.0;
};

BackpropOut backprop(const ClassifierModel& model, const Graph& g, const Matrix& z,
                     const std::vector<int>& split, double dropout, Rng* rng,
                     std::vector<Matrix>* frozen_p_out) {
    check_model(model, g, z);
    MlpCache cache;
    const Matrix x = mlp_forward(model.mlp, z, dropout, rng, &cache);
    std::vector<Matrix> frozen_p;
    const Matrix scores = propagate(model, g, x, &frozen_p);

    BackpropOut out;
    out.loss = ce_loss(scores, g.labels, split);
    const Matrix d_scores = ce_loss_grad(scores, g.labels, split);
    const Matrix dx = recursion_backward(model.asmp, frozen_p, d_scores);
    out.grads = mlp_backward(model.mlp, cache, dx);
    if (frozen_p_out) *frozen_p_out = std::move(frozen_p);
    return out;
}

}  // namespace

ThetaGrads theta_gradients(const ClassifierModel& model, const Graph& g, const Matrix& z,
                           const std::vector<int>& split, std::vector<Matrix>* frozen_p_out,
                           double* loss_out) {
    BackpropOut out = backprop(model, g, z, split, 0.0, nullptr, frozen_p_out);
    if (loss_out) *loss_out = out.loss;
    return out.grads;
}

double replay_loss(const ClassifierModel& model, const Matrix& z,
                   const std::vector<Matrix>& frozen_p, const std::vector<int>& labels,
                   const std::vector<int>& split) {
    const AsmpParams& p = model.asmp;
    Matrix x = feature_map(model.mlp, z);
    Matrix h = x;
    for (const Matrix& p_norm : frozen_p)
        for (int i = 0; i < p.h_steps_per_iter; ++i)
            h = h_step_with(h, p_norm, x, p.lambda, p.eta1);
    return ce_loss(h, labels, split);
}

namespace {

/// Adam over a flat list of parameter matrices.
class Adam {
public:
    Adam(double lr, std::vector<Matrix*> params) : lr_(lr), params_(std::move(params)) {
        for (Matrix* p : params_) {
            m_.push_back(Matrix::Zero(p->rows(), p->cols()));
            v_.push_back(Matrix::Zero(p->rows(), p->cols()));
        }
    }

    void step(const std::vector<Matrix>& grads) {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < params_.size(); ++i) {
            if (params_[i]->size() == 0) continue;
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseProduct(grads[i]);
            params_[i]->array() -=
                lr_ * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + eps_);
        }
    }

private:
    double lr_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    int t_ = 0;
    std::vector<Matrix*> params_;
    std::vector<Matrix> m_, v_;
};

constexpr double kLogFloor = 1e-12;

/// (log gamma, lambda, log mu1, log mu2, log eta1, log eta2)
Matrix pack_hyper(const AsmpParams& p) {
    Matrix u(1, 6);
    u << std::log(std::max(p.gamma, kLogFloor)), p.lambda,
        std::log(std::max(p.mu1, kLogFloor)), std::log(std::max(p.mu2, kLogFloor)),
        std::log(p.eta1), std::log(p.eta2);
    return u;
}

void unpack_hyper(const Matrix& u, AsmpParams& p) {
    p.gamma = std::exp(u(0, 0));
    p.lambda = u(0, 1);
    p.mu1 = std::exp(u(0, 2));
    p.mu2 = std::exp(u(0, 3));
    p.eta1 = std::exp(u(0, 4));
    p.eta2 = std::exp(u(0, 5));
}

double full_train_loss(const ClassifierModel& model, const Graph& g,
                       const std::vector<int>& split) {
    return ce_loss(forward(model, g, g.features), g.labels, split);
}

}  // namespace

TrainResult train(ClassifierModel& model, const Graph& g, const Splits& splits,
                  const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw ValidationError("train: epochs must be >= 1");
    if (splits.train.empty() || splits.val.empty())
        throw ValidationError("train: train/val splits required");
    if (cfg.hyperparam_mode == HyperMode::learned_fd && cfg.fd_step <= 0.0)
        throw ValidationError("train: fd step must be positive");
    check_model(model, g, g.features);

    Rng rng(mix_seed(model.seed, 0x22));
    std::vector<Matrix*> params{&model.mlp.w1, &model.mlp.b1, &model.mlp.w2, &model.mlp.b2};
    Adam theta_opt(cfg.learning_rate, params);

    Matrix u = pack_hyper(model.asmp);
    Adam hyper_opt(cfg.learning_rate, {&u});

    TrainResult result;
    Mlp best_mlp = model.mlp;
    AsmpParams best_asmp = model.asmp;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        BackpropOut bp = backprop(model, g, g.features, splits.train, cfg.dropout, &rng, nullptr);
        if (!std::isfinite(bp.loss))
            throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch));

        if (bp.grads.w1.size() > 0) bp.grads.w1 += cfg.weight_decay * model.mlp.w1;
        if (bp.grads.w2.size() > 0) bp.grads.w2 += cfg.weight_decay * model.mlp.w2;
        theta_opt.step({bp.grads.w1, bp.grads.b1, bp.grads.w2, bp.grads.b2});

        if (cfg.hyperparam_mode == HyperMode::learned_fd) {
            Matrix hyper_grad = Matrix::Zero(1, 6);
            ClassifierModel probe = model;
            for (int i = 0; i < 6; ++i) {
                Matrix up = u, dn = u;
                up(0, i) += cfg.fd_step;
                dn(0, i) -= cfg.fd_step;
                unpack_hyper(up, probe.asmp);
                const double loss_up = full_train_loss(probe, g, splits.train);
                unpack_hyper(dn, probe.asmp);
                const double loss_dn = full_train_loss(probe, g, splits.train);
                hyper_grad(0, i) = (loss_up - loss_dn) / (2.0 * cfg.fd_step);
            }
            hyper_opt.step({hyper_grad});
            unpack_hyper(u, model.asmp);
        }

        const EvalResult val = evaluate(model, g, splits.val);
        if (!std::isfinite(val.loss))
            throw NumericalError("train: non-finite validation loss at epoch " +
                                 std::to_string(epoch));
        result.history.push_back({bp.loss, val.loss, val.accuracy});

        if (val.loss < best_val) {
            best_val = val.loss;
            best_mlp = model.mlp;
            best_asmp = model.asmp;
            result.best_epoch = epoch;
            since_best = 0;
        } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
            log::info("train: early stop at epoch %d (best %d)", epoch, result.best_epoch);
            break;
        }
    }

    model.mlp = std::move(best_mlp);
    model.asmp = best_asmp;
    return result;
}

EvalResult evaluate(const ClassifierModel& model, const Graph& g,
                    const std::vector<int>& split) {
    if (split.empty()) throw ValidationError("evaluate: empty split");
    const Matrix scores = forward(model, g, g.features);
    int correct = 0;
    for (int idx : split) {
        int arg = 0;
        for (int c = 1; c < scores.cols(); ++c)
            if (scores(idx, c) > scores(idx, arg)) arg = c;  // ties keep the lowest index
        if (arg == g.labels[idx]) ++correct;
    }
    EvalResult out;
    out.accuracy = static_cast<double>(correct) / static_cast<double>(split.size());
    out.loss = ce_loss(scores, g.labels, split);
    return out;
}

double clean_graph_loss_probe(const ClassifierModel& model, const Graph& clean_g,
                              const std::vector<int>& test_split) {
    const Matrix scores = forward(model, clean_g, clean_g.features);
    return ce_loss(scores, clean_g.labels, test_split);
}

namespace {

const char* kind_name(FeatureMapKind kind) {
    switch (kind) {
        case FeatureMapKind::identity: return "identity";
        case FeatureMapKind::linear: return "linear";
        case FeatureMapKind::two_layer: return "two_layer";
    }
    return "two_layer";
}

FeatureMapKind kind_from(const std::string& name) {
    if (name == "identity") return FeatureMapKind::identity;
    if (name == "linear") return FeatureMapKind::linear;
    if (name == "two_layer") return FeatureMapKind::two_layer;
    throw ValidationError("checkpoint: unknown feature map kind '" + name + "'");
}

void write_matrix(std::ostream& out, const char* name, const Matrix& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    char buf[64];
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << (j ? " " : "") << buf;
        }
        out << '\n';
    }
}

Matrix read_matrix(std::istream& in, const char* name) {
    std::string tag;
    long rows = 0, cols = 0;
    if (!(in >> tag >> rows >> cols) || tag != name)
        throw ValidationError(std::string("checkpoint: expected matrix '") + name + "'");
    Matrix m(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j)
            if (!(in >> m(i, j)))
                throw ValidationError(std::string("checkpoint: truncated matrix '") + name + "'");
    return m;
}

template <typename T>
T read_field(std::istream& in, const char* name) {
    std::string tag;
    T value{};
    if (!(in >> tag >> value) || tag != name)
        throw ValidationError(std::string("checkpoint: expected field '") + name + "'");
    return value;
}

}  // namespace

void save_checkpoint(const ClassifierModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << "asmp-checkpoint v1\n";
    out << "kind " << kind_name(model.mlp.kind) << '\n';
    out << "normalization " << (model.normalization == NormMode::rw ? "rw" : "sym") << '\n';
    out << "structure_updates " << (model.structure_updates ? 1 : 0) << '\n';
    char buf[64];
    const auto field = [&](const char* name, double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << name << ' ' << buf << '\n';
    };
    field("degree_floor", model.degree_floor);
    out << "seed " << model.seed << '\n';
    field("gamma", model.asmp.gamma);
    field("lambda", model.asmp.lambda);
    field("mu1", model.asmp.mu1);
    field("mu2", model.asmp.mu2);
    field("eta1", model.asmp.eta1);
    field("eta2", model.asmp.eta2);
    out << "k_layers " << model.asmp.k_layers << '\n';
    out << "h_steps " << model.asmp.h_steps_per_iter << '\n';
    out << "s_steps " << model.asmp.s_steps_per_iter << '\n';
    write_matrix(out, "w1", model.mlp.w1);
    write_matrix(out, "b1", model.mlp.b1);
    write_matrix(out, "w2", model.mlp.w2);
    write_matrix(out, "b2", model.mlp.b2);
    out << "end\n";
}

ClassifierModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("missing checkpoint: " + path.string());
    std::string magic, version;
    if (!(in >> magic >> version) || magic != "asmp-checkpoint" || version != "v1")
        throw ValidationError("checkpoint: bad header in " + path.string());

    ClassifierModel model;
    model.mlp.kind = kind_from(read_field<std::string>(in, "kind"));
    const auto norm = read_field<std::string>(in, "normalization");
    if (norm != "rw" && norm != "sym")
        throw ValidationError("checkpoint: unknown normalization '" + norm + "'");
    model.normalization = norm == "rw" ? NormMode::rw : NormMode::sym;
    model.structure_updates = read_field<int>(in, "structure_updates") != 0;
    model.degree_floor = read_field<double>(in, "degree_floor");
    model.seed = read_field<std::uint64_t>(in, "seed");
    model.asmp.gamma = read_field<double>(in, "gamma");
    model.asmp.lambda = read_field<double>(in, "lambda");
    model.asmp.mu1 = read_field<double>(in, "mu1");
    model.asmp.mu2 = read_field<double>(in, "mu2");
    model.asmp.eta1 = read_field<double>(in, "eta1");
    model.asmp.eta2 = read_field<double>(in, "eta2");
    model.asmp.k_layers = read_field<int>(in, "k_layers");
    model.asmp.h_steps_per_iter = read_field<int>(in, "h_steps");
    model.asmp.s_steps_per_iter = read_field<int>(in, "s_steps");
    model.mlp.w1 = read_matrix(in, "w1");
    model.mlp.b1 = read_matrix(in, "b1");
    model.mlp.w2 = read_matrix(in, "w2");
    model.mlp.b2 = read_matrix(in, "b2");
    std::string tail;
    if (!(in >> tail) || tail != "end") throw ValidationError("checkpoint: missing trailer");
    return model;
}

}  // namespace asmp
