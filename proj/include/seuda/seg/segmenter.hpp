#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "seuda/core/errors.hpp"
#include "seuda/core/rng.hpp"
#include "seuda/core/serialize.hpp"
#include "seuda/data/image.hpp"
#include "seuda/nn/blocks.hpp"
#include "seuda/nn/losses.hpp"
#include "seuda/nn/optim.hpp"

namespace seuda::seg {

// Per-pixel class probability simplex, channels = classes.
template <typename T>
using ProbMap = Tensor<T>;

// Scalable dilated-residual segmentation network. Early stages halve
// the spatial size by stride; the last |dilated_stage_rates| stages keep
// resolution and dilate instead. Channels double at every stage
// transition. The head is four parallel 3x3 dilated branches summed,
// then bilinear upsampling back to the working size and a softmax.
struct SegmenterConfig {
    int base_channels = 32;
    std::vector<int> stage_blocks = {1, 1, 1};
    std::vector<int> dilated_stage_rates = {2};
    std::vector<int> head_rates = {6, 12, 18, 24};
    int num_classes = data::kNumClasses;
    int working_size = 64;

    void validate() const {
        if (base_channels < 4) throw std::invalid_argument("segmenter: base_channels must be >= 4");
        if (head_rates.size() != 4)
            throw std::invalid_argument("segmenter: head_rates must have length 4");
        for (int r : head_rates)
            if (r < 1) throw std::invalid_argument("segmenter: head rates must be >= 1");
        for (int r : dilated_stage_rates)
            if (r < 1) throw std::invalid_argument("segmenter: stage dilation must be >= 1");
        if (stage_blocks.empty()) throw std::invalid_argument("segmenter: no stages");
        for (int b : stage_blocks)
            if (b < 1) throw std::invalid_argument("segmenter: stage must have >= 1 block");
        if (dilated_stage_rates.size() > stage_blocks.size())
            throw std::invalid_argument("segmenter: more dilated stages than stages");
        const int down = static_cast<int>(stage_blocks.size() - dilated_stage_rates.size());
        if (working_size < (1 << down) * 2)
            throw std::invalid_argument("segmenter: downsampling exceeds input size");
    }
};

namespace detail {

template <typename T>
std::unique_ptr<nn::Layer<T>> conv_in_relu(int in_ch, int out_ch, int k, int stride, int pad,
                                           int dil, Rng& rng, const std::string& name) {
    auto seq = std::make_unique<nn::Sequential<T>>();
    seq->add(std::make_unique<nn::Conv2d<T>>(in_ch, out_ch, k, stride, pad, dil, nn::Init::he, rng,
                                             name));
    seq->add(std::make_unique<nn::InstanceNorm<T>>(out_ch, name + ".norm"));
    seq->add(std::make_unique<nn::ReLU<T>>());
    return seq;
}

// conv-norm-relu-conv-norm main path, optional 1x1 projection, post-ReLU.
template <typename T>
std::unique_ptr<nn::Layer<T>> seg_res_block(int in_ch, int out_ch, int stride, int dil, Rng& rng,
                                            const std::string& name) {
    auto main = std::make_unique<nn::Sequential<T>>();
    main->add(std::make_unique<nn::Conv2d<T>>(in_ch, out_ch, 3, stride, dil, dil, nn::Init::he, rng,
                                              name + ".conv1"));
    main->add(std::make_unique<nn::InstanceNorm<T>>(out_ch, name + ".norm1"));
    main->add(std::make_unique<nn::ReLU<T>>());
    main->add(std::make_unique<nn::Conv2d<T>>(out_ch, out_ch, 3, 1, dil, dil, nn::Init::he, rng,
                                              name + ".conv2"));
    main->add(std::make_unique<nn::InstanceNorm<T>>(out_ch, name + ".norm2"));

    std::unique_ptr<nn::Layer<T>> proj;
    if (in_ch != out_ch || stride != 1)
        proj = std::make_unique<nn::Conv2d<T>>(in_ch, out_ch, 1, stride, 0, 1, nn::Init::he, rng,
                                               name + ".proj");
    return std::make_unique<nn::ResidualBlock<T>>(std::move(main), std::move(proj), true);
}

}  // namespace detail

template <typename T>
struct SegmenterModel {
    SegmenterConfig config;
    nn::Sequential<T> net;
    bool frozen = false;

    // Forward on an already [-1,1]-normalized 1xHxW tensor.
    ProbMap<T> forward_normalized(const Tensor<T>& x) {
        if (x.height() != config.working_size || x.width() != config.working_size)
            throw std::invalid_argument("segmenter: input size mismatch");
        return net.forward(x);
    }
};

template <typename T>
SegmenterModel<T> build_segmenter(const SegmenterConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng = Rng::stream(seed, "segmenter-init");

    SegmenterModel<T> model;
    model.config = config;
    auto& net = model.net;

    net.add(detail::conv_in_relu<T>(1, config.base_channels, 3, 1, 1, 1, rng, "stem"));

    const int S = static_cast<int>(config.stage_blocks.size());
    const int D = static_cast<int>(config.dilated_stage_rates.size());
    int ch = config.base_channels;
    for (int s = 0; s < S; ++s) {
        const bool dilated = s >= S - D;
        const int dil = dilated ? config.dilated_stage_rates[s - (S - D)] : 1;
        const int stride = dilated ? 1 : 2;
        const int out_ch = ch * 2;
        for (int b = 0; b < config.stage_blocks[s]; ++b) {
            const std::string name = "stage" + std::to_string(s) + ".block" + std::to_string(b);
            net.add(detail::seg_res_block<T>(b == 0 ? ch : out_ch, out_ch, b == 0 ? stride : 1, dil,
                                             rng, name));
        }
        ch = out_ch;
    }

    auto head = std::make_unique<nn::MultiBranchSum<T>>();
    for (int i = 0; i < 4; ++i) {
        const int r = config.head_rates[i];
        head->add_branch(std::make_unique<nn::Conv2d<T>>(ch, config.num_classes, 3, 1, r, r,
                                                         nn::Init::he, rng,
                                                         "head.branch" + std::to_string(i)));
    }
    net.add(std::move(head));
    net.add(std::make_unique<nn::BilinearResize<T>>(config.working_size, config.working_size));
    net.add(std::make_unique<nn::SoftmaxChannels<T>>());
    return model;
}

// Independent copy with identical parameters (the network graph is
// rebuilt from the config, then parameters are restored).
template <typename T>
SegmenterModel<T> clone_segmenter(SegmenterModel<T>& model) {
    SegmenterModel<T> out = build_segmenter<T>(model.config, 0);
    out.net.restore(model.net.snapshot());
    out.frozen = model.frozen;
    return out;
}

// [0,255] image intensities to the network's [-1,1] input range.
template <typename T>
Tensor<T> to_normalized(const data::Image& img) {
    Tensor<T> t(1, img.height(), img.width());
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = static_cast<T>(img.pixels[i] / 127.5 - 1.0);
    return t;
}

template <typename T>
ProbMap<T> segment(SegmenterModel<T>& model, const data::Image& image) {
    return model.forward_normalized(to_normalized<T>(image));
}

template <typename T>
data::LabelMap probs_to_labels(const ProbMap<T>& probs) {
    data::LabelMap out(probs.height(), probs.width());
    const std::size_t n = probs.plane();
    for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        for (int c = 1; c < probs.channels(); ++c)
            if (probs[c * n + i] > probs[best * n + i]) best = c;
        out.labels[i] = static_cast<std::uint8_t>(best);
    }
    return out;
}

// Mean pixel-wise multi-class cross-entropy (see nn::cross_entropy_prob).
template <typename T>
double cross_entropy(const ProbMap<T>& probs, const data::LabelMap& gt) {
    return nn::cross_entropy_prob(probs, gt, static_cast<Tensor<T>*>(nullptr));
}

struct SegTrainOptions {
    int epochs = 150;
    double lr = 0.01;
    double momentum = 0.9;
    std::uint64_t seed = 0;
};

struct SegEpochStats {
    int epoch = 0;
    double train_loss = 0;
    double val_dice = 0;  // mean foreground Dice, percent
    double lr = 0;
};

// Mean Dice over the two lung classes of argmax predictions, percent.
template <typename T>
double mean_foreground_dice(SegmenterModel<T>& model, const data::Dataset& ds) {
    double total = 0;
    std::size_t count = 0;
    for (const auto& item : ds.items) {
        if (!item.mask) continue;
        const auto pred = probs_to_labels(segment(model, item.image));
        for (int cls : {data::kClassRightLung, data::kClassLeftLung}) {
            std::size_t p = 0, g = 0, both = 0;
            for (std::size_t i = 0; i < pred.labels.size(); ++i) {
                const bool ip = pred.labels[i] == cls, ig = item.mask->labels[i] == cls;
                p += ip;
                g += ig;
                both += ip && ig;
            }
            total += (p + g) == 0 ? 100.0 : 200.0 * static_cast<double>(both) / (p + g);
            ++count;
        }
    }
    return count ? total / static_cast<double>(count) : 0.0;
}

// Cross-entropy training with SGD+momentum, one image per step.
// Returns best-on-val parameters (by mean foreground Dice) in the model
// and the per-epoch history.
template <typename T>
std::vector<SegEpochStats> train_segmenter(SegmenterModel<T>& model, const data::Dataset& train,
                                           const data::Dataset& val, const SegTrainOptions& opts) {
    if (model.frozen) throw std::logic_error("train_segmenter: model is frozen");
    for (const auto& d : {&train, &val})
        for (const auto& item : d->items)
            if (!item.mask)
                throw std::invalid_argument("train_segmenter: unlabeled item " + item.case_id);

    std::vector<SegEpochStats> history;
    if (opts.epochs <= 0) return history;

    nn::Sgd<T> sgd(model.net.params(), opts.lr, opts.momentum);
    Rng rng = Rng::stream(opts.seed, "seg-train-shuffle");

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    double best_dice = -1;
    std::vector<std::vector<T>> best_params;

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0;
        for (std::size_t idx : order) {
            const auto& item = train.items[idx];
            const auto probs = segment(model, item.image);
            Tensor<T> dprob;
            const double loss = nn::cross_entropy_prob(probs, *item.mask, &dprob);
            if (!std::isfinite(loss))
                throw NumericalError("train_segmenter: non-finite cross-entropy at epoch " +
                                     std::to_string(epoch) + ", case " + item.case_id);
            loss_sum += loss;
            model.net.zero_grad();
            model.net.backward(dprob);
            sgd.step();
        }

        SegEpochStats st;
        st.epoch = epoch;
        st.train_loss = loss_sum / static_cast<double>(train.size());
        st.val_dice = mean_foreground_dice(model, val);
        st.lr = opts.lr;
        history.push_back(st);

        if (st.val_dice > best_dice) {
            best_dice = st.val_dice;
            best_params = model.net.snapshot();
        }
    }

    if (!best_params.empty()) model.net.restore(best_params);
    return history;
}

// --- checkpoint: versioned container, bit-stable round trip ---

inline constexpr std::uint32_t kSegCheckpointMagic = 0x43474553;  // "SEGC"
inline constexpr std::uint32_t kSegCheckpointVersion = 1;

template <typename T>
void save_segmenter(SegmenterModel<T>& model, const std::string& path) {
    BinaryWriter w(path);
    w.u32(kSegCheckpointMagic);
    w.u32(kSegCheckpointVersion);
    w.u32(sizeof(T));
    const auto& c = model.config;
    w.u32(static_cast<std::uint32_t>(c.base_channels));
    w.u32(static_cast<std::uint32_t>(c.num_classes));
    w.u32(static_cast<std::uint32_t>(c.working_size));
    auto write_ivec = [&](const std::vector<int>& v) {
        w.u32(static_cast<std::uint32_t>(v.size()));
        for (int x : v) w.u32(static_cast<std::uint32_t>(x));
    };
    write_ivec(c.stage_blocks);
    write_ivec(c.dilated_stage_rates);
    write_ivec(c.head_rates);
    w.u32(model.frozen ? 1 : 0);

    auto params = model.net.params();
    w.u32(static_cast<std::uint32_t>(params.size()));
    for (auto* p : params) {
        w.str(p->name);
        w.vec(p->value);
    }
}

template <typename T>
SegmenterModel<T> load_segmenter(const std::string& path) {
    BinaryReader r(path);
    if (r.u32() != kSegCheckpointMagic)
        throw std::runtime_error(path + ": not a segmenter checkpoint");
    if (r.u32() != kSegCheckpointVersion)
        throw std::runtime_error(path + ": unsupported checkpoint version");
    if (r.u32() != sizeof(T))
        throw std::runtime_error(path + ": checkpoint scalar width mismatch");

    SegmenterConfig c;
    c.base_channels = static_cast<int>(r.u32());
    c.num_classes = static_cast<int>(r.u32());
    c.working_size = static_cast<int>(r.u32());
    auto read_ivec = [&]() {
        std::vector<int> v(r.u32());
        for (auto& x : v) x = static_cast<int>(r.u32());
        return v;
    };
    c.stage_blocks = read_ivec();
    c.dilated_stage_rates = read_ivec();
    c.head_rates = read_ivec();
    const bool frozen = r.u32() != 0;

    SegmenterModel<T> model = build_segmenter<T>(c, 0);
    auto params = model.net.params();
    const std::uint32_t n = r.u32();
    if (n != params.size()) throw std::runtime_error(path + ": parameter count mismatch");
    for (auto* p : params) {
        const std::string name = r.str();
        if (name != p->name) throw std::runtime_error(path + ": parameter order mismatch");
        auto v = r.template vec<T>();
        if (v.size() != p->value.size())
            throw std::runtime_error(path + ": parameter size mismatch for " + name);
        p->value = std::move(v);
    }
    model.frozen = frozen;
    return model;
}

}  // namespace seuda::seg
