// seuda: phantom generation, segmenter/adaptation training, transformation,
// evaluation, benchmarking and the repeated-initialization stability study.
// File in, file out; every source of randomness hangs off --seed.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>

#include "seuda/pipeline/bench.hpp"
#include "seuda/pipeline/stability.hpp"
#include "seuda/seuda.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace seuda;

namespace {

using Scalar = float;

std::string dirname_of(const std::string& path) {
    const auto p = fs::path(path).parent_path();
    return p.empty() ? std::string(".") : p.string();
}

// Manifest paths resolve relative to the manifest's own directory.
data::Dataset load_manifest(const std::string& manifest, data::Domain domain) {
    return data::load_dataset(dirname_of(manifest), manifest, domain);
}

data::Dataset preprocess_dataset(data::Dataset ds, int working_size, double spacing_mm) {
    for (auto& item : ds.items) {
        item.image = data::preprocess(item.image, working_size);
        item.image.spacing_mm = static_cast<float>(spacing_mm);
        if (item.mask) *item.mask = data::resize_nearest(*item.mask, working_size, working_size);
    }
    return ds;
}

void write_split_manifests(const data::SplitResult& parts, const std::string& dir) {
    for (const auto* part : {&parts.train, &parts.val, &parts.test}) {
        std::ofstream out(fs::path(dir) / (data::to_string(part->split) + ".tsv"));
        for (const auto& item : part->items) {
            out << item.case_id << '\t' << "images/" << item.case_id << ".png";
            if (item.mask) out << '\t' << "masks/" << item.case_id << ".png";
            out << '\n';
        }
    }
}

std::map<std::string, std::string> config_echo(const KeyValueConfig& cfg) {
    return cfg.items();
}

// Flat key/value config with flag overrides: flags the user passed win;
// otherwise config-file values; otherwise the built-in default already
// stored in the bound variable.
struct ConfiguredApp {
    CLI::App* cmd;
    KeyValueConfig cfg;
    std::string config_path;

    void add_config_flag() {
        cmd->add_option("--config", config_path, "flat key = value config file");
    }

    void load() {
        if (!config_path.empty()) cfg = KeyValueConfig::from_file(config_path);
    }

    template <typename T>
    void apply(const std::string& key, const CLI::Option* opt, T& value) {
        if (opt->count() > 0) {
            cfg.set(key, [&] {
                std::ostringstream os;
                os << value;
                return os.str();
            }());
            return;
        }
        if (cfg.has(key)) {
            std::istringstream is(cfg.get_string(key));
            is >> value;
        } else {
            std::ostringstream os;
            os << value;
            cfg.set(key, os.str());
        }
    }
};

uda::AdaptationConfig uda_config_from(const KeyValueConfig& cfg) {
    uda::AdaptationConfig c;
    c.gen.encoder_downsamples = cfg.get_int("gen_downsamples", c.gen.encoder_downsamples);
    c.gen.residual_blocks = cfg.get_int("gen_resblocks", c.gen.residual_blocks);
    c.gen.base_channels = cfg.get_int("gen_base", c.gen.base_channels);
    c.disc.layers = cfg.get_int("disc_layers", c.disc.layers);
    c.disc.base_channels = cfg.get_int("disc_base", c.disc.base_channels);
    c.disc.patch_mode = cfg.get_bool("disc_patch_mode", c.disc.patch_mode);
    c.weights.alpha = cfg.get_double("alpha", c.weights.alpha);
    c.weights.beta = cfg.get_double("beta", c.weights.beta);
    c.weights.lambda_sem = cfg.get_double("lambda_sem", c.weights.lambda_sem);
    c.working_size = cfg.get_int("working_size", c.working_size);
    c.base_lr = cfg.get_double("lr", c.base_lr);
    c.lr_hold = cfg.get_int64("lr_hold", c.lr_hold);
    c.lr_decay = cfg.get_int64("lr_decay", c.lr_decay);
    c.pool_capacity = static_cast<std::size_t>(cfg.get_int64("pool_size", 50));
    c.use_mask_pool = cfg.get_bool("use_mask_pool", c.use_mask_pool);
    c.label_smooth = cfg.get_double("label_smooth", c.label_smooth);
    c.adam_beta1 = cfg.get_double("adam_beta1", c.adam_beta1);
    c.adam_beta2 = cfg.get_double("adam_beta2", c.adam_beta2);
    c.seed = static_cast<std::uint64_t>(cfg.get_int64("seed", 0));
    c.with_mask_discriminator = c.weights.lambda_sem > 0;
    return c;
}

// ---------- subcommand bodies ----------

int cmd_make_phantoms(const KeyValueConfig& cfg, const std::string& out_dir) {
    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int64("seed", 0));
    const int n_source = cfg.get_int("n_source", 60);
    const int n_target = cfg.get_int("n_target", 60);
    const std::array<double, 3> ratios = {cfg.get_double("ratio_train", 7),
                                          cfg.get_double("ratio_val", 1),
                                          cfg.get_double("ratio_test", 2)};

    auto sp = data::phantom_params_from_config(cfg, "source", data::Domain::source, seed);
    auto tp = data::phantom_params_from_config(cfg, "target", data::Domain::target, seed);

    for (auto [params, n, name] : {std::tuple{sp, n_source, "source"}, {tp, n_target, "target"}}) {
        auto ds = data::generate_phantoms(params, n);
        const std::string dir = (fs::path(out_dir) / name).string();
        data::save_dataset(ds, dir);
        const auto parts = data::split(ds, ratios, seed);
        write_split_manifests(parts, dir);
        std::cout << name << ": " << n << " cases -> " << dir << " (split " << parts.train.size()
                  << "/" << parts.val.size() << "/" << parts.test.size() << ")\n";
    }
    return 0;
}

void write_seg_log(const std::string& path, const KeyValueConfig& cfg,
                   const std::vector<seg::SegEpochStats>& hist) {
    std::ofstream out(path);
    out << json{{"type", "header"}, {"cmd", "train-seg"}, {"config", config_echo(cfg)}}.dump()
        << "\n";
    for (const auto& e : hist)
        out << json{{"type", "epoch"},
                    {"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"val_dice", e.val_dice},
                    {"lr", e.lr}}
                   .dump()
            << "\n";
}

void write_uda_log(const std::string& path, const KeyValueConfig& cfg, double lambda_sem,
                   const std::vector<uda::EpochReport>& hist) {
    std::ofstream out(path);
    out << json{{"type", "header"},
                {"cmd", "train-uda"},
                {"mode", lambda_sem > 0 ? "SeUDA" : "CyUDA"},
                {"config", config_echo(cfg)}}
               .dump()
        << "\n";
    for (const auto& e : hist) {
        const auto& m = e.mean;
        out << json{{"type", "epoch"}, {"epoch", e.epoch},   {"lr", e.lr},
                    {"gan_st", m.gan_st}, {"gan_ts", m.gan_ts}, {"cyc", m.cyc},
                    {"sem", m.sem},       {"total", m.total},   {"d_s", m.d_s},
                    {"d_t", m.d_t},       {"d_m", m.d_m}}
                   .dump()
            << "\n";
    }
}

data::Dataset load_masks_as_dataset(const std::string& path) {
    data::Dataset ds;
    if (fs::is_directory(path)) {
        std::vector<std::string> files;
        for (const auto& e : fs::directory_iterator(path)) {
            const auto ext = e.path().extension().string();
            if (ext == ".png" || ext == ".pgm") files.push_back(e.path().string());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            data::DatasetItem item;
            item.case_id = fs::path(f).stem().string();
            item.mask = data::raster_to_mask(data::load_raster(f), f);
            item.image = data::Image(item.mask->height(), item.mask->width());
            ds.items.push_back(std::move(item));
        }
    } else {
        ds = load_manifest(path, data::Domain::source);
        for (auto& item : ds.items) {
            if (!item.mask) {
                // manifest without mask column: the image column holds labels
                data::Raster r;
                r.height = item.image.height();
                r.width = item.image.width();
                r.px.resize(static_cast<std::size_t>(r.height) * r.width);
                for (std::size_t i = 0; i < r.px.size(); ++i)
                    r.px[i] = static_cast<std::uint16_t>(item.image.pixels[i]);
                item.mask = data::raster_to_mask(r, item.case_id);
            }
        }
    }
    if (ds.empty()) throw std::runtime_error("no mask rasters found at " + path);
    return ds;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SeUDA: semantic-aware unsupervised domain adaptation for 2-D segmentation"};
    app.require_subcommand(1);
    int exit_code = 0;
    std::function<int()> run;

    // ---- make-phantoms ----
    {
        auto* c = app.add_subcommand("make-phantoms", "generate two-domain phantom datasets");
        auto state = std::make_shared<ConfiguredApp>();
        state->cmd = c;
        state->add_config_flag();
        auto out_dir = std::make_shared<std::string>();
        auto seed = std::make_shared<long long>(0);
        auto size = std::make_shared<int>(64);
        c->add_option("--out", *out_dir, "output directory")->required();
        auto* seed_opt = c->add_option("--seed", *seed, "rng seed");
        auto* size_opt = c->add_option("--working-size", *size, "phantom size in pixels");
        c->callback([=, &run] {
            run = [=]() {
                state->load();
                state->apply("seed", seed_opt, *seed);
                state->apply("working_size", size_opt, *size);
                return cmd_make_phantoms(state->cfg, *out_dir);
            };
        });
    }

    // ---- train-seg ----
    {
        auto* c = app.add_subcommand("train-seg", "train the source segmenter");
        auto state = std::make_shared<ConfiguredApp>();
        state->cmd = c;
        state->add_config_flag();
        auto train_m = std::make_shared<std::string>(), val_m = std::make_shared<std::string>(),
             out = std::make_shared<std::string>(), log = std::make_shared<std::string>();
        auto epochs = std::make_shared<int>(40), size = std::make_shared<int>(64),
             base = std::make_shared<int>(8);
        auto lr = std::make_shared<double>(0.01), spacing = std::make_shared<double>(1.0);
        auto seed = std::make_shared<long long>(0);
        c->add_option("--train", *train_m, "training manifest")->required();
        c->add_option("--val", *val_m, "validation manifest")->required();
        c->add_option("--out", *out, "checkpoint output path")->required();
        c->add_option("--log", *log, "training log (jsonl)");
        auto* o_epochs = c->add_option("--epochs", *epochs);
        auto* o_size = c->add_option("--working-size", *size);
        auto* o_base = c->add_option("--base-channels", *base);
        auto* o_lr = c->add_option("--lr", *lr);
        auto* o_seed = c->add_option("--seed", *seed);
        auto* o_spacing = c->add_option("--spacing-mm", *spacing);
        c->callback([=, &run] {
            run = [=]() {
                state->load();
                state->apply("epochs", o_epochs, *epochs);
                state->apply("working_size", o_size, *size);
                state->apply("base_channels", o_base, *base);
                state->apply("lr", o_lr, *lr);
                state->apply("seed", o_seed, *seed);
                state->apply("spacing_mm", o_spacing, *spacing);

                auto train = preprocess_dataset(load_manifest(*train_m, data::Domain::source),
                                                *size, *spacing);
                auto val = preprocess_dataset(load_manifest(*val_m, data::Domain::source), *size,
                                              *spacing);
                seg::SegmenterConfig cfg;
                cfg.base_channels = *base;
                cfg.working_size = *size;
                cfg.stage_blocks = {1, 1, 1};
                cfg.dilated_stage_rates = {2};
                auto model = seg::build_segmenter<Scalar>(cfg, static_cast<std::uint64_t>(*seed));
                seg::SegTrainOptions opts;
                opts.epochs = *epochs;
                opts.lr = *lr;
                opts.seed = static_cast<std::uint64_t>(*seed);
                auto hist = seg::train_segmenter(model, train, val, opts);
                seg::save_segmenter(model, *out);
                if (!log->empty()) write_seg_log(*log, state->cfg, hist);
                std::cout << "train-seg: " << hist.size() << " epochs, best val dice "
                          << (hist.empty() ? 0.0 : seg::mean_foreground_dice(model, val)) << " -> "
                          << *out << "\n";
                return 0;
            };
        });
    }

    // ---- train-uda ----
    {
        auto* c = app.add_subcommand("train-uda", "train the SeUDA/CyUDA transformer");
        auto state = std::make_shared<ConfiguredApp>();
        state->cmd = c;
        state->add_config_flag();
        auto src_m = std::make_shared<std::string>(), tgt_m = std::make_shared<std::string>(),
             seg_ckpt = std::make_shared<std::string>(), out = std::make_shared<std::string>(),
             log = std::make_shared<std::string>();
        auto epochs = std::make_shared<int>(200);
        auto alpha = std::make_shared<double>(0.5), beta = std::make_shared<double>(10.0),
             lambda = std::make_shared<double>(0.5), lr = std::make_shared<double>(0.002),
             spacing = std::make_shared<double>(1.0);
        auto pool = std::make_shared<long long>(50), seed = std::make_shared<long long>(0);
        auto size = std::make_shared<int>(64);
        c->add_option("--source-train", *src_m, "labeled source training manifest")->required();
        c->add_option("--target-train", *tgt_m, "unlabeled target training manifest")->required();
        c->add_option("--seg", *seg_ckpt, "frozen segmenter checkpoint")->required();
        c->add_option("--out", *out, "adaptation checkpoint output")->required();
        c->add_option("--log", *log, "training log (jsonl)");
        auto* o_epochs = c->add_option("--epochs", *epochs);
        auto* o_alpha = c->add_option("--alpha", *alpha);
        auto* o_beta = c->add_option("--beta", *beta);
        auto* o_lambda = c->add_option("--lambda-sem", *lambda);
        auto* o_pool = c->add_option("--pool-size", *pool);
        auto* o_lr = c->add_option("--lr", *lr);
        auto* o_seed = c->add_option("--seed", *seed);
        auto* o_size = c->add_option("--working-size", *size);
        auto* o_spacing = c->add_option("--spacing-mm", *spacing);
        c->callback([=, &run] {
            run = [=]() {
                state->load();
                state->apply("epochs", o_epochs, *epochs);
                state->apply("alpha", o_alpha, *alpha);
                state->apply("beta", o_beta, *beta);
                state->apply("lambda_sem", o_lambda, *lambda);
                state->apply("pool_size", o_pool, *pool);
                state->apply("lr", o_lr, *lr);
                state->apply("seed", o_seed, *seed);
                state->apply("working_size", o_size, *size);
                state->apply("spacing_mm", o_spacing, *spacing);

                if (!fs::exists(*seg_ckpt))
                    throw std::runtime_error("missing segmenter checkpoint: " + *seg_ckpt);
                auto segm = seg::load_segmenter<Scalar>(*seg_ckpt);
                segm.frozen = true;
                auto source = preprocess_dataset(load_manifest(*src_m, data::Domain::source),
                                                 *size, *spacing);
                auto target = preprocess_dataset(load_manifest(*tgt_m, data::Domain::target),
                                                 *size, *spacing);

                auto cfg = uda_config_from(state->cfg);
                auto st = uda::build_adaptation<Scalar>(cfg);
                auto hist = uda::train_adaptation(st, segm, source, target, *epochs);
                uda::save_adaptation(st, *out);
                if (!log->empty()) write_uda_log(*log, state->cfg, cfg.weights.lambda_sem, hist);
                std::cout << "train-uda (" << (cfg.weights.lambda_sem > 0 ? "SeUDA" : "CyUDA")
                          << "): " << hist.size() << " epochs -> " << *out << "\n";
                return 0;
            };
        });
    }

    // ---- finetune-stl ----
    {
        auto* c = app.add_subcommand("finetune-stl",
                                     "supervised fine-tuning on labeled target data");
        auto seg_ckpt = std::make_shared<std::string>(), train_m = std::make_shared<std::string>(),
             val_m = std::make_shared<std::string>(), out = std::make_shared<std::string>();
        auto epochs = std::make_shared<int>(30);
        auto lr_scale = std::make_shared<double>(0.1), lr = std::make_shared<double>(0.01),
             spacing = std::make_shared<double>(1.0);
        auto seed = std::make_shared<long long>(0);
        c->add_option("--seg", *seg_ckpt)->required();
        c->add_option("--target-train", *train_m)->required();
        c->add_option("--target-val", *val_m)->required();
        c->add_option("--out", *out)->required();
        c->add_option("--epochs", *epochs);
        c->add_option("--lr-scale", *lr_scale);
        c->add_option("--lr", *lr);
        c->add_option("--seed", *seed);
        c->add_option("--spacing-mm", *spacing);
        c->callback([=, &run] {
            run = [=]() {
                if (!fs::exists(*seg_ckpt))
                    throw std::runtime_error("missing segmenter checkpoint: " + *seg_ckpt);
                auto model = seg::load_segmenter<Scalar>(*seg_ckpt);
                model.frozen = false;
                const int size = model.config.working_size;
                auto train = preprocess_dataset(load_manifest(*train_m, data::Domain::target),
                                                size, *spacing);
                auto val = preprocess_dataset(load_manifest(*val_m, data::Domain::target), size,
                                              *spacing);
                baselines::StlOptions opts;
                opts.epochs = *epochs;
                opts.lr_scale = *lr_scale;
                opts.base_lr = *lr;
                opts.seed = static_cast<std::uint64_t>(*seed);
                baselines::fine_tune_stl(model, train, val, opts);
                seg::save_segmenter(model, *out);
                std::cout << "finetune-stl: target val dice "
                          << seg::mean_foreground_dice(model, val) << " -> " << *out << "\n";
                return 0;
            };
        });
    }

    // ---- transform ----
    {
        auto* c = app.add_subcommand("transform", "apply G_ts to target images");
        auto uda_ckpt = std::make_shared<std::string>(), in_m = std::make_shared<std::string>(),
             out_dir = std::make_shared<std::string>();
        auto spacing = std::make_shared<double>(1.0);
        c->add_option("--uda", *uda_ckpt)->required();
        c->add_option("--input", *in_m, "target manifest")->required();
        c->add_option("--out", *out_dir)->required();
        c->add_option("--spacing-mm", *spacing);
        c->callback([=, &run] {
            run = [=]() {
                if (!fs::exists(*uda_ckpt))
                    throw std::runtime_error("missing adaptation checkpoint: " + *uda_ckpt);
                auto st = uda::load_adaptation<Scalar>(*uda_ckpt);
                auto ds = preprocess_dataset(load_manifest(*in_m, data::Domain::target),
                                             st.config.working_size, *spacing);
                data::Dataset out_ds;
                out_ds.domain = data::Domain::transformed;
                for (const auto& item : ds.items) {
                    data::DatasetItem o;
                    o.case_id = item.case_id;
                    o.image = uda::transform(st, item.image);
                    out_ds.items.push_back(std::move(o));
                }
                data::save_dataset(out_ds, *out_dir);
                std::cout << "transform: " << out_ds.size() << " images -> " << *out_dir << "\n";
                return 0;
            };
        });
    }

    // ---- eval ----
    {
        auto* c = app.add_subcommand("eval", "evaluate predicted masks against ground truth");
        auto pred = std::make_shared<std::string>(), gt = std::make_shared<std::string>(),
             out = std::make_shared<std::string>(), table = std::make_shared<std::string>(),
             setting = std::make_shared<std::string>("S-test");
        auto spacing = std::make_shared<double>(1.0);
        c->add_option("--pred", *pred, "directory or manifest of predicted masks")->required();
        c->add_option("--gt", *gt, "directory or manifest of ground-truth masks")->required();
        c->add_option("--out", *out, "report path (jsonl)")->required();
        c->add_option("--table", *table, "human-readable table path");
        c->add_option("--setting", *setting);
        c->add_option("--spacing-mm", *spacing);
        c->callback([=, &run] {
            run = [=]() {
                auto pred_ds = load_masks_as_dataset(*pred);
                auto gt_ds = load_masks_as_dataset(*gt);
                if (pred_ds.size() != gt_ds.size())
                    throw std::runtime_error("eval: case count mismatch between --pred and --gt");
                std::vector<data::LabelMap> preds, gts;
                std::vector<std::string> ids;
                for (std::size_t i = 0; i < pred_ds.size(); ++i) {
                    if (pred_ds[i].case_id != gt_ds[i].case_id)
                        throw std::runtime_error("eval: case id mismatch: " + pred_ds[i].case_id +
                                                 " vs " + gt_ds[i].case_id);
                    preds.push_back(*pred_ds[i].mask);
                    gts.push_back(*gt_ds[i].mask);
                    ids.push_back(pred_ds[i].case_id);
                }
                auto rep = metrics::evaluate(preds, gts, ids, *spacing, *setting);
                rep.config = {{"pred", *pred}, {"gt", *gt},
                              {"spacing_mm", std::to_string(*spacing)}};
                metrics::write_report(rep, *out);
                if (!table->empty()) {
                    std::ofstream t(*table);
                    t << metrics::format_table({rep});
                }
                std::cout << "eval(" << *setting << "): mean dice " << rep.mean_dice() << " -> "
                          << *out << "\n";
                return 0;
            };
        });
    }

    // ---- segment (utility) ----
    {
        auto* c = app.add_subcommand("segment", "run a segmenter checkpoint over a manifest");
        auto seg_ckpt = std::make_shared<std::string>(), in_m = std::make_shared<std::string>(),
             out_dir = std::make_shared<std::string>();
        auto spacing = std::make_shared<double>(1.0);
        c->add_option("--seg", *seg_ckpt)->required();
        c->add_option("--input", *in_m)->required();
        c->add_option("--out", *out_dir)->required();
        c->add_option("--spacing-mm", *spacing);
        c->callback([=, &run] {
            run = [=]() {
                if (!fs::exists(*seg_ckpt))
                    throw std::runtime_error("missing segmenter checkpoint: " + *seg_ckpt);
                auto model = seg::load_segmenter<Scalar>(*seg_ckpt);
                auto ds = preprocess_dataset(load_manifest(*in_m, data::Domain::target),
                                             model.config.working_size, *spacing);
                data::Dataset out_ds;
                for (const auto& item : ds.items) {
                    data::DatasetItem o;
                    o.case_id = item.case_id;
                    o.image = item.image;
                    o.mask = seg::probs_to_labels(seg::segment(model, item.image));
                    out_ds.items.push_back(std::move(o));
                }
                data::save_dataset(out_ds, *out_dir);
                std::cout << "segment: " << out_ds.size() << " masks -> " << *out_dir << "\n";
                return 0;
            };
        });
    }

    // ---- bench ----
    {
        auto* c = app.add_subcommand("bench", "evaluate a list of settings side by side");
        auto state = std::make_shared<ConfiguredApp>();
        state->cmd = c;
        state->add_config_flag();
        auto settings_csv = std::make_shared<std::string>(), out_dir = std::make_shared<std::string>();
        auto spacing = std::make_shared<double>(1.0);
        c->add_option("--settings", *settings_csv,
                      "comma-separated: S-test,T-noDA,T-HistM,T-STL,CyUDA,SeUDA")
            ->required();
        c->add_option("--out", *out_dir)->required();
        auto* o_spacing = c->add_option("--spacing-mm", *spacing);
        c->callback([=, &run] {
            run = [=]() {
                state->load();
                state->apply("spacing_mm", o_spacing, *spacing);
                std::vector<baselines::Setting> settings;
                std::stringstream ss(*settings_csv);
                std::string tok;
                while (std::getline(ss, tok, ','))
                    if (!tok.empty()) settings.push_back(baselines::setting_from_string(tok));
                if (settings.empty()) throw std::runtime_error("bench: empty settings list");

                const auto& cfg = state->cfg;
                auto need_path = [&](const std::string& key) {
                    const std::string p = cfg.get_string(key);
                    if (!fs::exists(p))
                        throw std::runtime_error("bench: missing artifact " + key + ": " + p);
                    return p;
                };

                auto model = seg::load_segmenter<Scalar>(need_path("seg"));
                model.frozen = true;
                const int size = model.config.working_size;
                auto load_set = [&](const std::string& key, data::Domain d) {
                    return preprocess_dataset(load_manifest(need_path(key), d), size, *spacing);
                };

                baselines::SettingInputs<Scalar> in;
                in.segmenter = &model;
                in.spacing_mm = *spacing;
                data::Dataset source_test, target_test, source_train;
                std::optional<seg::SegmenterModel<Scalar>> stl_model;
                std::optional<uda::AdaptationState<Scalar>> seuda, cyuda;
                auto wants = [&](baselines::Setting s) {
                    return std::find(settings.begin(), settings.end(), s) != settings.end();
                };
                if (wants(baselines::Setting::s_test)) {
                    source_test = load_set("source_test", data::Domain::source);
                    in.source_test = &source_test;
                }
                if (wants(baselines::Setting::t_no_da) || wants(baselines::Setting::t_hist_m) ||
                    wants(baselines::Setting::t_stl) || wants(baselines::Setting::se_uda) ||
                    wants(baselines::Setting::cy_uda)) {
                    target_test = load_set("target_test", data::Domain::target);
                    in.target_test = &target_test;
                }
                if (wants(baselines::Setting::t_hist_m)) {
                    source_train = load_set("source_train", data::Domain::source);
                    in.source_train = &source_train;
                }
                if (wants(baselines::Setting::t_stl)) {
                    stl_model.emplace(seg::load_segmenter<Scalar>(need_path("stl")));
                    in.stl_model = &*stl_model;
                }
                if (wants(baselines::Setting::se_uda)) {
                    seuda.emplace(uda::load_adaptation<Scalar>(need_path("seuda")));
                    in.seuda = &*seuda;
                }
                if (wants(baselines::Setting::cy_uda)) {
                    cyuda.emplace(uda::load_adaptation<Scalar>(need_path("cyuda")));
                    in.cyuda = &*cyuda;
                }

                fs::create_directories(fs::path(*out_dir) / "reports");
                std::vector<metrics::MetricsReport> reports;
                for (auto s : settings) {
                    auto rep = baselines::run_setting(s, in);
                    rep.config = config_echo(cfg);
                    metrics::write_report(rep, (fs::path(*out_dir) / "reports" /
                                                (baselines::to_string(s) + ".jsonl"))
                                                   .string());
                    reports.push_back(std::move(rep));
                }
                if (in.source_train) {
                    baselines::save_histogram(
                        baselines::build_reference_histogram(*in.source_train),
                        (fs::path(*out_dir) / "reports" / "reference_histogram.txt").string());
                }
                const std::string table = metrics::format_table(reports);
                std::ofstream(fs::path(*out_dir) / "reports" / "table.txt") << table;
                std::cout << table;
                return 0;
            };
        });
    }

    // ---- stability ----
    {
        auto* c = app.add_subcommand("stability",
                                     "repeated-initialization stability study per lambda");
        auto state = std::make_shared<ConfiguredApp>();
        state->cmd = c;
        state->add_config_flag();
        auto out_path = std::make_shared<std::string>(), lambdas_csv = std::make_shared<std::string>("0,0.5");
        auto n_runs = std::make_shared<int>(5), workers = std::make_shared<int>(1),
             epochs = std::make_shared<int>(25);
        auto seed = std::make_shared<long long>(0);
        auto spacing = std::make_shared<double>(1.0);
        c->add_option("--out", *out_path, "report path (jsonl)")->required();
        c->add_option("--n-runs", *n_runs);
        c->add_option("--lambda-values", *lambdas_csv);
        c->add_option("--workers", *workers);
        auto* o_seed = c->add_option("--seed", *seed);
        auto* o_epochs = c->add_option("--epochs", *epochs);
        auto* o_spacing = c->add_option("--spacing-mm", *spacing);
        c->callback([=, &run] {
            run = [=]() {
                state->load();
                state->apply("seed", o_seed, *seed);
                state->apply("epochs", o_epochs, *epochs);
                state->apply("spacing_mm", o_spacing, *spacing);
                if (*n_runs < 2) throw std::runtime_error("stability: --n-runs must be >= 2");

                const auto& cfg = state->cfg;
                auto need_path = [&](const std::string& key) {
                    const std::string p = cfg.get_string(key);
                    if (!fs::exists(p))
                        throw std::runtime_error("stability: missing artifact " + key + ": " + p);
                    return p;
                };
                auto model = seg::load_segmenter<Scalar>(need_path("seg"));
                model.frozen = true;
                const int size = model.config.working_size;

                pipeline::ExperimentProfile profile;
                profile.working_size = size;
                profile.spacing_mm = *spacing;
                profile.uda_config = uda_config_from(cfg);
                profile.uda_config.working_size = size;
                profile.uda_epochs = *epochs;

                pipeline::DomainData dd;
                dd.source.train = preprocess_dataset(
                    load_manifest(need_path("source_train"), data::Domain::source), size, *spacing);
                dd.target.train = preprocess_dataset(
                    load_manifest(need_path("target_train"), data::Domain::target), size, *spacing);
                dd.target.test = preprocess_dataset(
                    load_manifest(need_path("target_test"), data::Domain::target), size, *spacing);

                std::vector<double> lambdas;
                std::stringstream ss(*lambdas_csv);
                std::string tok;
                while (std::getline(ss, tok, ',')) lambdas.push_back(std::stod(tok));

                std::vector<std::uint64_t> run_seeds;
                Rng seed_rng = Rng::stream(static_cast<std::uint64_t>(*seed), "stability-seeds");
                for (int i = 0; i < *n_runs; ++i) run_seeds.push_back(seed_rng.next_u64());

                auto rep = pipeline::run_stability(profile, model, dd, lambdas, run_seeds,
                                                   *workers);
                std::ofstream out(*out_path);
                out << json{{"type", "header"},
                            {"cmd", "stability"},
                            {"n_runs", *n_runs},
                            {"config", config_echo(cfg)}}
                           .dump()
                    << "\n";
                for (const auto& ls : rep.per_lambda) {
                    for (const auto& r : ls.runs)
                        out << json{{"type", "run"},    {"lambda", ls.lambda},
                                    {"seed", r.seed},   {"dice", r.dice},
                                    {"asd", r.asd}}
                                   .dump()
                            << "\n";
                    out << json{{"type", "lambda_summary"}, {"lambda", ls.lambda},
                                {"dice_mean", ls.dice_mean}, {"dice_std", ls.dice_std},
                                {"asd_mean", ls.asd_mean},   {"asd_std", ls.asd_std}}
                               .dump()
                        << "\n";
                    std::cout << "lambda " << ls.lambda << ": dice " << ls.dice_mean << " +- "
                              << ls.dice_std << ", asd " << ls.asd_mean << " +- " << ls.asd_std
                              << "\n";
                }
                return 0;
            };
        });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        exit_code = run ? run() : 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
