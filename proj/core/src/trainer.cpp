// trainer.cpp
#include "cogs/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <utility>

#include "cogs/adam.hpp"
#include "cogs/ops.hpp"

namespace cogs {

void TrainingConfig::validate() const {
    if (weights.huber < 0 || weights.style < 0 || weights.kld < 0 || weights.gan < 0) {
        throw value_error("training config: loss weights must be non-negative");
    }
    if (lr <= 0) throw value_error("training config: lr must be positive");
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1) {
        throw value_error("training config: betas must lie in [0, 1)");
    }
    if (epochs < 1) throw value_error("training config: epochs must be >= 1");
    if (batch_size < 1) throw value_error("training config: batch size must be >= 1");
    if (window < 2) throw value_error("training config: window must be >= 2 frames");
    if (stride < 1) throw value_error("training config: stride must be >= 1");
    if (fps <= 0) throw value_error("training config: fps must be positive");
    if (style_margin <= 0) throw value_error("training config: style margin must be positive");
    if (huber_delta <= 0) throw value_error("training config: huber delta must be positive");
}

std::vector<ClipRecord> ingest_clips(const std::vector<ClipRecord>& records, std::int64_t frames,
                                     std::int64_t stride) {
    std::vector<ClipRecord> out;
    for (const auto& rec : records) {
        if (rec.poses.frames == frames) {
            out.push_back(rec);
        } else if (rec.poses.frames > frames) {
            auto windows = window_records(rec.audio, rec.poses, rec.transcript, rec.speaker,
                                          frames, stride, rec.id);
            out.insert(out.end(), windows.begin(), windows.end());
        } else {
            throw value_error("clip " + rec.id + ": shorter than the training window");
        }
    }
    return out;
}

void write_loss_csv(const std::string& path, const std::vector<StepRecord>& rows) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw io_error("cannot write loss history: " + path);
    f << "step,epoch,huber,style,kld,gan_g,gan_d,total\n";
    char line[256];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%lld,%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      static_cast<long long>(r.step), static_cast<long long>(r.epoch), r.huber,
                      r.style, r.kld, r.gan_g, r.gan_d, r.total);
        f << line;
    }
}

std::vector<StepRecord> read_loss_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw io_error("cannot read loss history: " + path);
    std::string line;
    if (!std::getline(f, line) || line != "step,epoch,huber,style,kld,gan_g,gan_d,total") {
        throw parse_error("loss history " + path + ": unexpected header");
    }
    std::vector<StepRecord> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        StepRecord r;
        long long step = 0, epoch = 0;
        if (std::sscanf(line.c_str(), "%lld,%lld,%lf,%lf,%lf,%lf,%lf,%lf", &step, &epoch,
                        &r.huber, &r.style, &r.kld, &r.gan_g, &r.gan_d, &r.total) != 8) {
            throw parse_error("loss history " + path + ": malformed row: " + line);
        }
        r.step = step;
        r.epoch = epoch;
        rows.push_back(r);
    }
    return rows;
}

namespace {

std::string epoch_path(const std::string& dir, std::int64_t epoch) {
    char name[32];
    std::snprintf(name, sizeof name, "epoch_%04lld.json", static_cast<long long>(epoch));
    return (std::filesystem::path(dir) / name).string();
}

void append_adam_state(std::vector<NamedTensor>& out, Adam& opt, const std::string& prefix) {
    const auto& params = opt.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        out.push_back({prefix + ".m" + std::to_string(i),
                       Tensor::from_vector(params[i].shape(), opt.first_moments()[i])});
        out.push_back({prefix + ".v" + std::to_string(i),
                       Tensor::from_vector(params[i].shape(), opt.second_moments()[i])});
    }
}

void restore_adam_state(Adam& opt, const LoadedCheckpoint& ckpt, const std::string& prefix) {
    std::vector<std::vector<double>> m, v;
    for (std::size_t i = 0; i < opt.params().size(); ++i) {
        m.push_back(ckpt.values(prefix + ".m" + std::to_string(i)));
        v.push_back(ckpt.values(prefix + ".v" + std::to_string(i)));
    }
    opt.restore(std::stoll(ckpt.meta_at(prefix + "_t")), std::move(m), std::move(v));
}

}  // namespace

TrainResult train_model(Model& model, const TrainingConfig& cfg,
                        const std::vector<ClipRecord>& corpus, const std::string& checkpoint_dir,
                        const std::string& resume_from,
                        const std::map<std::string, std::string>& extra_meta) {
    cfg.validate();
    if (corpus.empty()) throw value_error("train: corpus is empty");
    if (cfg.window != model.config().gen.frames) {
        throw value_error("train: window (" + std::to_string(cfg.window) +
                          ") disagrees with the generator frame count (" +
                          std::to_string(model.config().gen.frames) + ")");
    }
    const auto clips = ingest_clips(corpus, cfg.window, cfg.stride);
    const auto corpus_h = hex64(corpus_hash(clips));
    std::filesystem::create_directories(checkpoint_dir);

    AdamConfig opt_cfg{cfg.lr, cfg.beta1, cfg.beta2, 1e-8};
    Adam opt_g(model.generator_params(), opt_cfg);
    Adam opt_d(model.discriminator_params(), opt_cfg);
    // Offset keeps the training stream distinct from the weight-init streams
    // (the model constructor seeds its own generators from the model seed).
    Rng rng(cfg.seed ^ fnv1a64("training-stream"));
    std::int64_t step = 0;
    std::int64_t start_epoch = 1;

    if (!resume_from.empty()) {
        auto ckpt = load_checkpoint(resume_from);
        if (ckpt.meta_at("corpus_hash") != corpus_h) {
            throw value_error("resume: corpus differs from the checkpointed run");
        }
        assign_from_checkpoint(ckpt, model.named_params());
        restore_adam_state(opt_g, ckpt, "opt_g");
        restore_adam_state(opt_d, ckpt, "opt_d");
        rng.set_state(std::stoull(ckpt.meta_at("rng")));
        step = std::stoll(ckpt.meta_at("step"));
        start_epoch = std::stoll(ckpt.meta_at("epoch")) + 1;
        if (start_epoch > cfg.epochs) {
            throw value_error("resume: checkpoint is already at epoch " +
                              ckpt.meta_at("epoch") + " of " + std::to_string(cfg.epochs));
        }
    }

    const auto n = static_cast<std::int64_t>(clips.size());
    const auto joints = model.config().gen.joints;
    const auto style_dim = model.config().style_dim;
    TrainResult result;
    result.loss_csv = (std::filesystem::path(checkpoint_dir) / "loss_history.csv").string();

    for (std::int64_t epoch = start_epoch; epoch <= cfg.epochs; ++epoch) {
        std::vector<std::int64_t> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        for (std::int64_t i = n - 1; i > 0; --i) {
            std::swap(order[static_cast<std::size_t>(i)],
                      order[static_cast<std::size_t>(rng.uniform_int(i + 1))]);
        }

        for (std::int64_t b0 = 0; b0 < n; b0 += cfg.batch_size) {
            const auto b1 = std::min(n, b0 + cfg.batch_size);
            const double count = static_cast<double>(b1 - b0);
            FiniteCheckGuard guard;
            ++step;

            struct Item {
                Model::Forward primary;
                Model::Forward restyled;
                Tensor real;
            };
            std::vector<Item> items;
            for (std::int64_t i = b0; i < b1; ++i) {
                const auto& clip = clips[static_cast<std::size_t>(order[i])];
                auto noise_a = Tensor::randn({1, style_dim}, rng);
                auto noise_b = Tensor::randn({1, style_dim}, rng);
                Item item;
                item.primary = model.forward(clip, noise_a, cfg.teacher_forcing);
                item.restyled = model.forward(clip, noise_b, cfg.teacher_forcing);
                item.real = Tensor::from_vector({cfg.window, joints, 3}, clip.poses.data);
                items.push_back(std::move(item));
            }

            // Discriminator step on detached generations.
            Tensor d_acc;
            for (auto& it : items) {
                auto fake = Tensor::from_vector(it.primary.poses.shape(),
                                                it.primary.poses.values());
                auto pair = gan_losses(model.discriminate(it.real), model.discriminate(fake));
                d_acc = d_acc.defined() ? add(d_acc, pair.d_loss) : pair.d_loss;
            }
            auto d_loss = scale(d_acc, 1.0 / count);
            d_loss.backward();
            opt_d.step();

            // Generator step against the just-updated discriminator.
            Tensor h_acc, s_acc, g_acc;
            for (auto& it : items) {
                auto h = huber_mean(it.primary.poses, it.real, cfg.huber_delta);
                auto s = style_diversity_loss(it.primary.poses, it.restyled.poses,
                                              it.primary.style, it.restyled.style,
                                              cfg.style_margin, cfg.huber_delta);
                // The d_real argument only shapes the discriminator half of the
                // pair; a constant keeps the generator graph free of it.
                auto pair = gan_losses(Tensor::scalar(0.5),
                                       model.discriminate(it.primary.poses));
                h_acc = h_acc.defined() ? add(h_acc, h) : h;
                s_acc = s_acc.defined() ? add(s_acc, s) : s;
                g_acc = g_acc.defined() ? add(g_acc, pair.g_loss) : pair.g_loss;
            }
            auto huber = scale(h_acc, 1.0 / count);
            auto style = scale(s_acc, 1.0 / count);
            auto gan_g = scale(g_acc, 1.0 / count);
            auto kld = kld_loss(model.style_table().mu, model.style_table().logvar);
            auto total = total_loss(huber, style, kld, gan_g, cfg.weights);
            total.backward();
            opt_g.step();
            // The generator objective back-propagated through the live
            // discriminator; drop those stray accumulations.
            for (auto& t : model.discriminator_params()) t.node()->grad.clear();

            result.history.push_back({step, epoch, huber.values()[0], style.values()[0],
                                      kld.values()[0], gan_g.values()[0], d_loss.values()[0],
                                      total.values()[0]});
        }

        auto tensors = model.named_params();
        append_adam_state(tensors, opt_g, "opt_g");
        append_adam_state(tensors, opt_d, "opt_d");
        std::map<std::string, std::string> meta = extra_meta;
        meta["kind"] = "train";
        meta["epoch"] = std::to_string(epoch);
        meta["step"] = std::to_string(step);
        meta["rng"] = std::to_string(rng.state());
        meta["opt_g_t"] = std::to_string(opt_g.steps_taken());
        meta["opt_d_t"] = std::to_string(opt_d.steps_taken());
        meta["corpus_hash"] = corpus_h;
        meta["vocab_hash"] = hex64(model.vocab_hash());
        const auto path = epoch_path(checkpoint_dir, epoch);
        save_checkpoint(path, tensors, meta);
        result.checkpoints.push_back(path);
        write_loss_csv(result.loss_csv, result.history);
    }

    result.final_checkpoint = result.checkpoints.back();
    return result;
}

}  // namespace cogs
