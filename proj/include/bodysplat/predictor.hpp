// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Toy feed-forward predictor: patch tokens -> encoder -> decoder with 5K+1 learned queries ->
// body pose/shape plus grouped Gaussian attributes, trained through the differentiable
// renderer.
//
#pragma once

#include "adam.hpp"
#include "autograd.hpp"
#include "binary_io.hpp"
#include "fitting.hpp"

#include <map>

namespace bodysplat {

struct PredictorConfig {
    int image_size     = 64;
    int patch_size     = 8;
    int embed_dim      = 128;
    int encoder_layers = 4;
    int decoder_layers = 2;
    int heads          = 4;
    int mlp_ratio      = 4;
    int groups         = 26;  // K
    int group_size     = 265; // Gaussians per group; K * group_size = V
    int num_joints     = 24;
    int num_betas      = 10;
    double lr          = 1e-4;
    std::uint64_t seed = 0;

    void
    validate() const {
        require(image_size > 0 && patch_size > 0 && image_size % patch_size == 0,
                "predictor: image_size must be a positive multiple of patch_size");
        require(embed_dim > 0 && heads > 0 && embed_dim % heads == 0,
                "predictor: embed_dim must be divisible by heads");
        require(encoder_layers >= 0 && decoder_layers >= 1, "predictor: bad layer counts");
        require(mlp_ratio >= 1, "predictor: mlp_ratio must be at least 1");
        require(groups >= 1 && group_size >= 1, "predictor: groups and group_size must be positive");
        require(num_joints >= 1 && num_betas >= 0, "predictor: bad body dimensions");
        require(lr > 0.0 && std::isfinite(lr), "predictor: lr must be positive");
    }

    int num_patches() const { return (image_size / patch_size) * (image_size / patch_size); }
    int num_queries() const { return 5 * groups + 1; }
    int num_gaussians() const { return groups * group_size; }
    int pose_size() const { return 6 * num_joints + 3 + num_betas; }

    /// The full-scale grouping for a body model: K groups, V / K Gaussians each.
    static PredictorConfig
    for_model(const BodyModel &model, int groups = 26) {
        PredictorConfig c;
        require(groups >= 1 && model.num_vertices() % groups == 0,
                "predictor: vertex count " + std::to_string(model.num_vertices()) +
                    " is not divisible by K = " + std::to_string(groups));
        c.groups     = groups;
        c.group_size = model.num_vertices() / groups;
        c.num_joints = model.num_joints();
        c.num_betas  = model.num_betas();
        return c;
    }
};

/// Per-type attribute widths in query order: rotation, offset, scale, color, opacity.
inline constexpr std::array<int, 5> kAttributeTypeWidth = {4, 3, 3, 3, 1};
inline constexpr std::array<const char *, 5> kAttributeTypeName = {"rotation", "offset", "scale", "color", "opacity"};

/// Decoded raw outputs before assembly into body/Gaussian parameters.
struct PredictorOutput {
    VecX pose_block;         // rot6 per joint, root translation, betas (FitObjective layout)
    GaussianAttributes attrs;
    MatX queries;            // final decoder query states, (5K + 1) x d
};

/// One training example: the network input plus the views that supervise its render.
struct TrainSample {
    Image input;
    SceneDataset supervision;
};

inline TrainSample
make_train_sample(const SceneDataset &ds, int input_view, const std::vector<int> &supervise = {}) {
    require(input_view >= 0 && input_view < ds.num_views(), "train sample: input view out of range");
    TrainSample s;
    s.input                    = ds.views[input_view].image;
    s.supervision.background   = ds.background;
    s.supervision.body_model_ref = ds.body_model_ref;
    if (supervise.empty()) {
        s.supervision.views = ds.views;
    } else {
        for (int v : supervise) {
            require(v >= 0 && v < ds.num_views(), "train sample: supervision view out of range");
            s.supervision.views.push_back(ds.views[v]);
        }
    }
    return s;
}

class Predictor {
  public:
    struct Parameter {
        std::string name;
        MatX value;
    };

    Predictor(const PredictorConfig &cfg, const BodyModel &model) : cfg_(cfg), model_(&model) {
        cfg_.validate();
        require(cfg_.num_gaussians() == model.num_vertices(),
                "predictor: K * group_size = " + std::to_string(cfg_.num_gaussians()) +
                    " but the body model has " + std::to_string(model.num_vertices()) + " vertices");
        require(cfg_.num_joints == model.num_joints() && cfg_.num_betas == model.num_betas(),
                "predictor: joint/beta counts do not match the body model");
        build_bases();
        init_parameters();
    }

    const PredictorConfig &config() const { return cfg_; }
    std::vector<Parameter> &parameters() { return params_; }
    const std::vector<Parameter> &parameters() const { return params_; }

    std::size_t
    parameter_count() const {
        std::size_t n = 0;
        for (const auto &p : params_) n += static_cast<std::size_t>(p.value.size());
        return n;
    }

    /// Patch matrix (num_patches x p*p*3): patches in row-major grid order, each flattened
    /// as (y, x, channel).
    MatX
    patchify(const Image &img) const {
        require(img.width == cfg_.image_size && img.height == cfg_.image_size && img.channels == 3,
                "predictor: input must be " + std::to_string(cfg_.image_size) + "x" +
                    std::to_string(cfg_.image_size) + " RGB, got " + std::to_string(img.width) + "x" +
                    std::to_string(img.height) + "x" + std::to_string(img.channels));
        const int p = cfg_.patch_size, g = cfg_.image_size / p;
        MatX out(cfg_.num_patches(), p * p * 3);
        for (int py = 0; py < g; ++py) {
            for (int px = 0; px < g; ++px) {
                const int row = py * g + px;
                int col       = 0;
                for (int y = 0; y < p; ++y) {
                    for (int x = 0; x < p; ++x) {
                        for (int c = 0; c < 3; ++c) out(row, col++) = img.at(px * p + x, py * p + y, c);
                    }
                }
            }
        }
        return out;
    }

    /// Token states after the encoder, (num_patches x d).
    MatX
    encode(const Image &img) const {
        ag::Tape t;
        const auto vars = bind(t);
        return t.value(encode(t, vars, img));
    }

    PredictorOutput
    predict(const Image &img) const {
        ag::Tape t;
        const auto vars = bind(t);
        const auto heads = decode(t, vars, encode(t, vars, img));
        return assemble(t, heads);
    }

    SceneParams
    predict_params(const Image &img) const {
        const auto out = predict(img);
        return unpack_blocks(*model_, out.pose_block, pack_attr_block(out.attrs), ScaffoldConfig{});
    }

    /// Loss of one sample at the current parameters (no gradient).
    LossReport
    loss(const TrainSample &s, const LossWeights &w) const {
        const auto out = predict(s.input);
        FitObjective objective(*model_, s.supervision, w, ScaffoldConfig{});
        return objective.evaluate(out.pose_block, pack_attr_block(out.attrs), false).report;
    }

    struct Gradient {
        LossReport report;
        std::vector<MatX> grads; // aligned with parameters()
    };

    /// Full-pipeline gradient of the total loss for one sample.
    Gradient
    gradient(const TrainSample &s, const LossWeights &w) const {
        ag::Tape t;
        const auto vars  = bind(t);
        const auto heads = decode(t, vars, encode(t, vars, s.input));
        const auto out   = assemble(t, heads);
        FitObjective objective(*model_, s.supervision, w, ScaffoldConfig{});
        const auto e = objective.evaluate(out.pose_block, pack_attr_block(out.attrs), true);

        // Pose block: base + raw, betas squashed as 10 tanh(raw / 10).
        const int B  = cfg_.num_betas;
        const int nb = cfg_.pose_size() - B;
        const MatX &raw = t.value(heads.smpl);
        MatX d_smpl(1, cfg_.pose_size());
        for (int i = 0; i < nb; ++i) d_smpl(0, i) = e.grad_pose[i];
        for (int b = 0; b < B; ++b) {
            const double th    = std::tanh(raw(0, nb + b) / kBetaRange);
            d_smpl(0, nb + b)  = e.grad_pose[nb + b] * (1.0 - th * th);
        }
        t.seed(heads.smpl, d_smpl);

        constexpr int K14 = GaussianAttributes::kParamsPerGaussian;
        for (int type = 0; type < 5; ++type) {
            const int width = kAttributeTypeWidth[type];
            MatX d(cfg_.groups, cfg_.group_size * width);
            for (int k = 0; k < cfg_.groups; ++k) {
                for (int j = 0; j < cfg_.group_size; ++j) {
                    const std::size_t i = static_cast<std::size_t>(k) * cfg_.group_size + j;
                    for (int c = 0; c < width; ++c) {
                        d(k, j * width + c) = e.grad_attrs[static_cast<Eigen::Index>(i * K14 + attr_slot(type, c))];
                    }
                }
            }
            t.seed(heads.attrs[type], d);
        }
        t.backward();

        Gradient g;
        g.report = e.report;
        for (std::size_t i = 0; i < params_.size(); ++i) {
            const MatX &gi = t.grad(vars[i]);
            g.grads.push_back(gi.size() == 0 ? MatX::Zero(params_[i].value.rows(), params_[i].value.cols()) : gi);
        }
        return g;
    }

    /// One Adam update on the mean gradient of the batch; returns the mean pre-update loss.
    /// Elements are processed in parallel and reduced in batch order.
    LossReport
    train_step(const std::vector<TrainSample> &batch, const LossWeights &w, int threads = 1) {
        require(!batch.empty(), "train_step: empty batch");
        std::vector<Gradient> per(batch.size());
        parallel_for(batch.size(), threads, [&](std::size_t i) { per[i] = gradient(batch[i], w); });
        ensure_optimizers();
        const double inv = 1.0 / static_cast<double>(batch.size());
        LossReport mean;
        for (std::size_t b = 0; b < batch.size(); ++b) {
            mean.mse        += inv * per[b].report.mse;
            mean.perceptual += inv * per[b].report.perceptual;
            mean.alpha_mask += inv * per[b].report.alpha_mask;
            mean.tight      += inv * per[b].report.tight;
            mean.beta_reg   += inv * per[b].report.beta_reg;
        }
        mean.recompute_total(w);
        for (std::size_t i = 0; i < params_.size(); ++i) {
            MatX g = per[0].grads[i];
            for (std::size_t b = 1; b < batch.size(); ++b) g += per[b].grads[i];
            g *= inv;
            Eigen::Map<VecX> x(params_[i].value.data(), params_[i].value.size());
            Eigen::Map<const VecX> gv(g.data(), g.size());
            optimizers_[i].step(x, gv);
        }
        return mean;
    }

    // -- checkpoint --------------------------------------------------------------------------

    static constexpr std::uint32_t kCheckpointVersion = 1;

    /// "GSTP", u32 version, u32 config length + config JSON, u32 blob count, then per blob:
    /// u32 name length, name, u32 rows, u32 cols, rows*cols row-major f32.
    void
    save(const std::filesystem::path &path) const {
        std::ofstream out(path, std::ios::binary);
        require(out.good(), "save checkpoint: cannot open " + path.string());
        binio::write_magic(out, "GSTP");
        binio::write_u32(out, kCheckpointVersion);
        const std::string cfg = config_to_json(cfg_).dump();
        binio::write_u32(out, static_cast<std::uint32_t>(cfg.size()));
        out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
        binio::write_u32(out, static_cast<std::uint32_t>(params_.size()));
        for (const auto &p : params_) {
            binio::write_u32(out, static_cast<std::uint32_t>(p.name.size()));
            out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
            binio::write_u32(out, static_cast<std::uint32_t>(p.value.rows()));
            binio::write_u32(out, static_cast<std::uint32_t>(p.value.cols()));
            binio::write_matrix_f32(out, p.value);
        }
        require(out.good(), "save checkpoint: write failed for " + path.string());
    }

    static Predictor
    load(const std::filesystem::path &path, const BodyModel &model) {
        std::ifstream in(path, std::ios::binary);
        const std::string where = "checkpoint " + path.string();
        require(in.good(), where + ": cannot open");
        binio::expect_magic(in, "GSTP", where);
        const auto version = binio::read_u32(in, where);
        require(version == kCheckpointVersion, where + ": unsupported version " + std::to_string(version));
        const auto cfg_len = binio::read_u32(in, where);
        require(cfg_len < (1u << 20), where + ": config block too large");
        std::string text(cfg_len, '\0');
        in.read(text.data(), cfg_len);
        require(static_cast<std::uint32_t>(in.gcount()) == cfg_len, where + ": truncated file");
        nlohmann::json cj;
        try {
            cj = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception &e) {
            throw ValidationError(where + ": bad config block: " + e.what());
        }
        Predictor pred(config_from_json(cj), model);
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < pred.params_.size(); ++i) index[pred.params_[i].name] = i;
        const auto count = binio::read_u32(in, where);
        require(count == pred.params_.size(), where + ": expected " + std::to_string(pred.params_.size()) +
                                                  " parameter blobs, found " + std::to_string(count));
        for (std::uint32_t b = 0; b < count; ++b) {
            const auto len = binio::read_u32(in, where);
            require(len < 4096, where + ": blob name too long");
            std::string name(len, '\0');
            in.read(name.data(), len);
            require(static_cast<std::uint32_t>(in.gcount()) == len, where + ": truncated file");
            const auto it = index.find(name);
            require(it != index.end(), where + ": unknown parameter '" + name + "'");
            auto &dst        = pred.params_[it->second].value;
            const auto rows  = binio::read_u32(in, where);
            const auto cols  = binio::read_u32(in, where);
            require(rows == dst.rows() && cols == dst.cols(), where + ": shape mismatch for '" + name + "'");
            dst = binio::read_matrix_f32(in, rows, cols, where + " (" + name + ")");
        }
        return pred;
    }

    static nlohmann::json
    config_to_json(const PredictorConfig &c) {
        return {{"image_size", c.image_size}, {"patch_size", c.patch_size}, {"embed_dim", c.embed_dim},
                {"encoder_layers", c.encoder_layers}, {"decoder_layers", c.decoder_layers},
                {"heads", c.heads}, {"mlp_ratio", c.mlp_ratio}, {"groups", c.groups},
                {"group_size", c.group_size}, {"num_joints", c.num_joints}, {"num_betas", c.num_betas},
                {"lr", c.lr}, {"seed", c.seed}};
    }

    static PredictorConfig
    config_from_json(const nlohmann::json &j) {
        PredictorConfig c;
        try {
            c.image_size     = j.at("image_size").get<int>();
            c.patch_size     = j.at("patch_size").get<int>();
            c.embed_dim      = j.at("embed_dim").get<int>();
            c.encoder_layers = j.at("encoder_layers").get<int>();
            c.decoder_layers = j.at("decoder_layers").get<int>();
            c.heads          = j.at("heads").get<int>();
            c.mlp_ratio      = j.at("mlp_ratio").get<int>();
            c.groups         = j.at("groups").get<int>();
            c.group_size     = j.at("group_size").get<int>();
            c.num_joints     = j.at("num_joints").get<int>();
            c.num_betas      = j.at("num_betas").get<int>();
            c.lr             = j.at("lr").get<double>();
            c.seed           = j.at("seed").get<std::uint64_t>();
        } catch (const nlohmann::json::exception &e) {
            throw ValidationError(std::string("predictor config: ") + e.what());
        }
        c.validate();
        return c;
    }

  private:
    static constexpr double kBetaRange = 10.0;

    struct Heads {
        ag::Var smpl;                 // 1 x pose_size raw
        std::array<ag::Var, 5> attrs; // per type: K x (group_size * width)
        ag::Var queries;
    };

    // Offsets of the five attribute types inside the 14-value per-Gaussian layout.
    static int
    attr_slot(int type, int c) {
        switch (type) {
        case 0: return 3 + c;  // rotation
        case 1: return c;      // offset
        case 2: return 7 + c;  // log scale
        case 3: return 11 + c; // colour
        default: return 10;    // opacity
        }
    }

    void
    build_bases() {
        const int J = cfg_.num_joints;
        pose_base_ = VecX::Zero(cfg_.pose_size());
        for (int j = 0; j < J; ++j) pose_base_.segment<6>(6 * j) = rot6_from_matrix(Mat3::Identity());
        const auto rest = forward_lbs(*model_, PoseParams::identity(J), ShapeParams::zeros(cfg_.num_betas));
        pose_base_.segment<3>(6 * J) = -rest.joints[0];
        const auto init = initial_attributes(model_->template_vertices, ScaffoldConfig{}, 0);
        attr_base_      = {1.0, 0.0, init.log_scales.empty() ? 0.0 : init.log_scales[0][0], 0.0, logit(0.9)};
    }

    std::size_t
    add(const std::string &name, MatX value) {
        params_.push_back({name, std::move(value)});
        return params_.size() - 1;
    }

    MatX
    normal(std::mt19937_64 &rng, Eigen::Index rows, Eigen::Index cols, double std) const {
        std::normal_distribution<double> n(0.0, std);
        MatX m(rows, cols);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
        return m;
    }

    void
    add_linear(std::mt19937_64 &rng, const std::string &name, int in, int out, double std) {
        add(name + ".w", normal(rng, in, out, std));
        add(name + ".b", MatX::Zero(1, out));
    }

    void
    add_norm(const std::string &name, int d) {
        add(name + ".g", MatX::Ones(1, d));
        add(name + ".b", MatX::Zero(1, d));
    }

    void
    add_attention(std::mt19937_64 &rng, const std::string &name, int d) {
        for (const char *m : {"q", "k", "v", "o"}) add_linear(rng, name + "." + m, d, d, 0.02);
    }

    void
    add_mlp(std::mt19937_64 &rng, const std::string &name, int d) {
        add_linear(rng, name + ".fc1", d, cfg_.mlp_ratio * d, 0.02);
        add_linear(rng, name + ".fc2", cfg_.mlp_ratio * d, d, 0.02);
    }

    void
    init_parameters() {
        std::mt19937_64 rng(mix_seed(cfg_.seed, 404));
        const int d = cfg_.embed_dim, p = cfg_.patch_size;
        add_linear(rng, "embed", p * p * 3, d, 0.02);
        add("pos", normal(rng, cfg_.num_patches(), d, 0.02));
        for (int l = 0; l < cfg_.encoder_layers; ++l) {
            const std::string n = "enc" + std::to_string(l);
            add_norm(n + ".ln1", d);
            add_attention(rng, n + ".attn", d);
            add_norm(n + ".ln2", d);
            add_mlp(rng, n + ".mlp", d);
        }
        add_norm("enc.ln", d);
        add("query.smpl", normal(rng, 1, d, 1.0));
        add("query.groups", normal(rng, 5 * cfg_.groups, d, 1.0));
        for (int l = 0; l < cfg_.decoder_layers; ++l) {
            const std::string n = "dec" + std::to_string(l);
            add_norm(n + ".ln1", d);
            add_attention(rng, n + ".self", d);
            add_norm(n + ".ln2", d);
            add_attention(rng, n + ".cross", d);
            add_norm(n + ".ln3", d);
            add_mlp(rng, n + ".mlp", d);
        }
        add_norm("dec.ln", d);
        add_linear(rng, "head.smpl.fc1", d, d, 0.02);
        add_linear(rng, "head.smpl.fc2", d, cfg_.pose_size(), 1e-3);
        for (int type = 0; type < 5; ++type) {
            // Offset head starts at zero so initial means sit exactly on the vertices.
            const double std = type == 1 ? 0.0 : 0.01;
            add_linear(rng, std::string("head.") + kAttributeTypeName[type], d,
                       cfg_.group_size * kAttributeTypeWidth[type], std);
        }
        for (std::size_t i = 0; i < params_.size(); ++i) index_[params_[i].name] = i;
    }

    void
    ensure_optimizers() {
        if (optimizers_.size() == params_.size()) return;
        optimizers_.clear();
        for (const auto &p : params_) {
            optimizers_.emplace_back(static_cast<std::size_t>(p.value.size()), AdamConfig{cfg_.lr});
        }
    }

    std::vector<ag::Var>
    bind(ag::Tape &t) const {
        std::vector<ag::Var> v;
        v.reserve(params_.size());
        for (const auto &p : params_) v.push_back(t.leaf(p.value));
        return v;
    }

    ag::Var
    P(const std::vector<ag::Var> &vars, const std::string &name) const {
        const auto it = index_.find(name);
        require(it != index_.end(), "predictor: missing parameter " + name);
        return vars[it->second];
    }

    ag::Var
    linear(ag::Tape &t, const std::vector<ag::Var> &vars, const std::string &name, ag::Var x) const {
        return t.add_row(t.matmul(x, P(vars, name + ".w")), P(vars, name + ".b"));
    }

    ag::Var
    norm(ag::Tape &t, const std::vector<ag::Var> &vars, const std::string &name, ag::Var x) const {
        return t.layer_norm(x, P(vars, name + ".g"), P(vars, name + ".b"));
    }

    ag::Var
    attend(ag::Tape &t, const std::vector<ag::Var> &vars, const std::string &name, ag::Var q, ag::Var kv) const {
        const ag::Var a = t.attention(linear(t, vars, name + ".q", q), linear(t, vars, name + ".k", kv),
                                      linear(t, vars, name + ".v", kv), cfg_.heads);
        return linear(t, vars, name + ".o", a);
    }

    ag::Var
    mlp(ag::Tape &t, const std::vector<ag::Var> &vars, const std::string &name, ag::Var x) const {
        return linear(t, vars, name + ".fc2", t.gelu(linear(t, vars, name + ".fc1", x)));
    }

    ag::Var
    encode(ag::Tape &t, const std::vector<ag::Var> &vars, const Image &img) const {
        ag::Var x = t.add(linear(t, vars, "embed", t.leaf(patchify(img))), P(vars, "pos"));
        for (int l = 0; l < cfg_.encoder_layers; ++l) {
            const std::string n = "enc" + std::to_string(l);
            const ag::Var h     = norm(t, vars, n + ".ln1", x);
            x = t.add(x, attend(t, vars, n + ".attn", h, h));
            x = t.add(x, mlp(t, vars, n + ".mlp", norm(t, vars, n + ".ln2", x)));
        }
        return norm(t, vars, "enc.ln", x);
    }

    Heads
    decode(ag::Tape &t, const std::vector<ag::Var> &vars, ag::Var tokens) const {
        require(t.value(tokens).cols() == cfg_.embed_dim, "predictor: token width mismatch");
        // Query order: SMPL token, then K tokens per attribute type (type-major).
        ag::Var q = t.concat_rows({P(vars, "query.smpl"), P(vars, "query.groups")});
        for (int l = 0; l < cfg_.decoder_layers; ++l) {
            const std::string n = "dec" + std::to_string(l);
            const ag::Var h     = norm(t, vars, n + ".ln1", q);
            q = t.add(q, attend(t, vars, n + ".self", h, h));
            q = t.add(q, attend(t, vars, n + ".cross", norm(t, vars, n + ".ln2", q), tokens));
            q = t.add(q, mlp(t, vars, n + ".mlp", norm(t, vars, n + ".ln3", q)));
        }
        q = norm(t, vars, "dec.ln", q);
        Heads h;
        h.queries = q;
        h.smpl    = mlp(t, vars, "head.smpl", t.slice_rows(q, 0, 1));
        for (int type = 0; type < 5; ++type) {
            h.attrs[type] = linear(t, vars, std::string("head.") + kAttributeTypeName[type],
                                   t.slice_rows(q, 1 + type * cfg_.groups, cfg_.groups));
        }
        return h;
    }

    PredictorOutput
    assemble(const ag::Tape &t, const Heads &h) const {
        PredictorOutput out;
        out.queries     = t.value(h.queries);
        const MatX &raw = t.value(h.smpl);
        const int B = cfg_.num_betas, nb = cfg_.pose_size() - B;
        out.pose_block = pose_base_;
        for (int i = 0; i < nb; ++i) out.pose_block[i] += raw(0, i);
        for (int b = 0; b < B; ++b) out.pose_block[nb + b] = kBetaRange * std::tanh(raw(0, nb + b) / kBetaRange);

        out.attrs = GaussianAttributes::zeros(static_cast<std::size_t>(cfg_.num_gaussians()));
        for (int type = 0; type < 5; ++type) {
            const MatX &y   = t.value(h.attrs[type]);
            const int width = kAttributeTypeWidth[type];
            for (int k = 0; k < cfg_.groups; ++k) {
                for (int j = 0; j < cfg_.group_size; ++j) {
                    const std::size_t i = static_cast<std::size_t>(k) * cfg_.group_size + j;
                    for (int c = 0; c < width; ++c) {
                        const double base = type == 0 ? (c == 0 ? attr_base_[0] : 0.0) : attr_base_[type];
                        out.attrs.param(i, attr_slot(type, c)) = base + y(k, j * width + c);
                    }
                }
            }
        }
        return out;
    }

    PredictorConfig cfg_;
    const BodyModel *model_;
    std::vector<Parameter> params_;
    std::map<std::string, std::size_t> index_;
    std::vector<Adam> optimizers_;
    VecX pose_base_;
    std::array<double, 5> attr_base_{};
};

} // namespace bodysplat
