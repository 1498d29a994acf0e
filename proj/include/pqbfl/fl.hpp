#pragma once

// Desk-scale federated learning: synthetic Gaussian data, label-skewed
// sharding, a softmax linear classifier, FedAvg, and the learning factors
// (loss, shape, cosine distance, Wasserstein distance) role selection uses.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pqbfl::fl {

struct LabeledDataset {
    std::size_t dim = 0;
    std::size_t classes = 0;
    std::vector<double> features;  // row-major, size() * dim
    std::vector<std::uint32_t> labels;

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }
    std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
    void append(std::span<const double> x, std::uint32_t label);
    // Normalized C-bin label histogram; all zeros for an empty set.
    std::vector<double> label_hist() const;
};

// Gaussian cluster per class. Class means ~ N(0, spread^2) per coordinate,
// samples add N(0, 1) noise. Rows are interleaved by class.
LabeledDataset make_global_dataset(std::size_t classes, std::size_t dim, std::size_t per_class, std::uint64_t seed,
                                   double spread = 1.0);

// Stratified split: `holdout_fraction` of each class goes to the second set.
std::pair<LabeledDataset, LabeledDataset> split_holdout(const LabeledDataset& data, double holdout_fraction,
                                                        std::uint64_t seed);

// IID partition into `parts` slices of near-equal size.
std::vector<LabeledDataset> slice_iid(const LabeledDataset& data, std::size_t parts, std::uint64_t seed);

// Label-skew partition: each device draws its label proportions from
// Dirichlet(skew). Shards partition `global` exactly and differ in size by at
// most one; a device whose favoured classes run out takes what remains.
std::vector<LabeledDataset> shard(const LabeledDataset& global, std::size_t n_devices, double skew,
                                  std::uint64_t seed);

// One row per sample, features then the integer label in the last column.
LabeledDataset load_csv(const std::filesystem::path& path);

struct Model {
    std::size_t classes = 0;
    std::size_t dim = 0;
    // classes x dim weight matrix (row-major) followed by classes biases.
    std::vector<double> weights;

    static Model zeros(std::size_t classes, std::size_t dim);
    static Model random(std::size_t classes, std::size_t dim, std::uint64_t seed, double scale = 0.01);

    std::size_t parameter_count() const { return classes * dim + classes; }
    bool finite() const;
    std::uint32_t predict(std::span<const double> x) const;
};

struct LossGradient {
    double loss = 0.0;
    std::vector<double> gradient;
};

// Mean multinomial cross-entropy over `data` and its gradient.
LossGradient loss_and_gradient(const Model& model, const LabeledDataset& data);

struct TrainResult {
    Model model;
    // min(1, loss / ln C) after the last epoch.
    double normalized_loss = 0.0;
    // Mean loss over the shard after each epoch.
    std::vector<double> loss_history;
};

// Mini-batch SGD in shard order. Throws TrainingError on a non-finite loss.
TrainResult train_local(const Model& model, const LabeledDataset& shard, int epochs, double lr,
                        std::size_t batch_size = 16);

double evaluate(const Model& model, const LabeledDataset& testset);

// Sample-count-weighted mean of the weight vectors.
Model fedavg(std::span<const Model> models, std::span<const std::size_t> sample_counts);

// 1-D earth-mover distance over label ids, divided by (C - 1).
double wasserstein(std::span<const double> local_hist, std::span<const double> global_hist);

struct CosineDistance {
    double value = 0.5;
    // A zero vector was involved; value is the orthogonal convention 0.5.
    bool degenerate = false;
};

// (1 - cos) / 2.
CosineDistance cosine_distance(std::span<const double> a, std::span<const double> b);

// a_k - mean(a).
std::vector<double> shape_values(std::span<const double> accuracies);

}  // namespace pqbfl::fl
