#include "pqbfl/fl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "pqbfl/errors.hpp"

namespace pqbfl::fl {

void LabeledDataset::append(std::span<const double> x, std::uint32_t label) {
    if (x.size() != dim) throw ParameterError("feature dimension mismatch");
    if (label >= classes) throw ParameterError("label out of range");
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(label);
}

std::vector<double> LabeledDataset::label_hist() const {
    std::vector<double> hist(classes, 0.0);
    if (labels.empty()) return hist;
    for (std::uint32_t l : labels) hist[l] += 1.0;
    for (double& h : hist) h /= static_cast<double>(labels.size());
    return hist;
}

namespace {

LabeledDataset empty_like(const LabeledDataset& d) {
    LabeledDataset out;
    out.dim = d.dim;
    out.classes = d.classes;
    return out;
}

std::vector<std::vector<std::size_t>> indices_by_class(const LabeledDataset& d) {
    std::vector<std::vector<std::size_t>> by_class(d.classes);
    for (std::size_t i = 0; i < d.size(); ++i) by_class[d.labels[i]].push_back(i);
    return by_class;
}

LabeledDataset gather(const LabeledDataset& d, std::span<const std::size_t> idx) {
    LabeledDataset out = empty_like(d);
    out.features.reserve(idx.size() * d.dim);
    out.labels.reserve(idx.size());
    for (std::size_t i : idx) out.append(d.row(i), d.labels[i]);
    return out;
}

void softmax_scores(const Model& m, std::span<const double> x, std::vector<double>& p) {
    p.resize(m.classes);
    double max_score = -INFINITY;
    for (std::size_t c = 0; c < m.classes; ++c) {
        double s = m.weights[m.classes * m.dim + c];
        const double* w = m.weights.data() + c * m.dim;
        for (std::size_t j = 0; j < m.dim; ++j) s += w[j] * x[j];
        p[c] = s;
        max_score = std::max(max_score, s);
    }
    double sum = 0.0;
    for (double& v : p) {
        v = std::exp(v - max_score);
        sum += v;
    }
    for (double& v : p) v /= sum;
}

// Accumulates the summed loss and gradient of rows [begin, end).
double accumulate_gradient(const Model& m, const LabeledDataset& d, std::size_t begin, std::size_t end,
                           std::vector<double>& grad) {
    std::vector<double> p;
    double loss = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const auto x = d.row(i);
        softmax_scores(m, x, p);
        const std::uint32_t y = d.labels[i];
        loss -= std::log(std::max(p[y], 1e-300));
        for (std::size_t c = 0; c < m.classes; ++c) {
            const double err = p[c] - (c == y ? 1.0 : 0.0);
            double* g = grad.data() + c * m.dim;
            for (std::size_t j = 0; j < m.dim; ++j) g[j] += err * x[j];
            grad[m.classes * m.dim + c] += err;
        }
    }
    return loss;
}

void check_compatible(const Model& m, const LabeledDataset& d) {
    if (m.classes != d.classes || m.dim != d.dim) throw ParameterError("model and dataset shapes differ");
}

}  // namespace

LabeledDataset make_global_dataset(std::size_t classes, std::size_t dim, std::size_t per_class, std::uint64_t seed,
                                   double spread) {
    if (classes < 2) throw ParameterError("need at least 2 classes");
    if (dim == 0) throw ParameterError("feature dimension must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> mean_dist(0.0, spread);
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<double> means(classes * dim);
    for (double& m : means) m = mean_dist(rng);

    LabeledDataset d;
    d.dim = dim;
    d.classes = classes;
    d.features.reserve(classes * per_class * dim);
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < per_class; ++i) {
        for (std::size_t c = 0; c < classes; ++c) {
            for (std::size_t j = 0; j < dim; ++j) x[j] = means[c * dim + j] + noise(rng);
            d.append(x, static_cast<std::uint32_t>(c));
        }
    }
    return d;
}

std::pair<LabeledDataset, LabeledDataset> split_holdout(const LabeledDataset& data, double holdout_fraction,
                                                        std::uint64_t seed) {
    if (holdout_fraction < 0.0 || holdout_fraction > 1.0) throw ParameterError("holdout fraction outside [0, 1]");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> keep, held;
    for (auto& idx : indices_by_class(data)) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n_held = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(idx.size())));
        held.insert(held.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_held));
        keep.insert(keep.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_held), idx.end());
    }
    std::sort(keep.begin(), keep.end());
    std::sort(held.begin(), held.end());
    return {gather(data, keep), gather(data, held)};
}

std::vector<LabeledDataset> slice_iid(const LabeledDataset& data, std::size_t parts, std::uint64_t seed) {
    if (parts == 0) throw ParameterError("need at least one slice");
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::vector<std::size_t>> buckets(parts);
    for (std::size_t i = 0; i < idx.size(); ++i) buckets[i % parts].push_back(idx[i]);
    std::vector<LabeledDataset> out;
    for (const auto& b : buckets) out.push_back(gather(data, b));
    return out;
}

std::vector<LabeledDataset> shard(const LabeledDataset& global, std::size_t n_devices, double skew,
                                  std::uint64_t seed) {
    if (n_devices == 0) throw ParameterError("need at least one device");
    if (!(skew > 0.0)) throw ParameterError("Dirichlet concentration must be positive");
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> gamma(skew, 1.0);

    std::vector<std::vector<double>> proportions(n_devices, std::vector<double>(global.classes));
    for (auto& p : proportions) {
        double sum = 0.0;
        for (double& v : p) {
            v = gamma(rng);
            sum += v;
        }
        for (double& v : p) v = sum > 0.0 ? v / sum : 1.0 / static_cast<double>(p.size());
    }

    auto pools = indices_by_class(global);
    for (auto& pool : pools) std::shuffle(pool.begin(), pool.end(), rng);

    // Devices take turns drawing one item each; a device draws a class from
    // its own proportions restricted to classes that still have items, so
    // the shards partition `global` with sizes differing by at most one.
    std::vector<std::vector<std::size_t>> assigned(n_devices);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t left = global.size();
    for (std::size_t turn = 0; left > 0; ++turn, --left) {
        const auto& p = proportions[turn % n_devices];
        double mass = 0.0;
        for (std::size_t c = 0; c < p.size(); ++c) {
            if (!pools[c].empty()) mass += p[c];
        }
        std::size_t pick = pools.size();
        if (mass > 0.0) {
            double u = unit(rng) * mass;
            for (std::size_t c = 0; c < p.size(); ++c) {
                if (pools[c].empty()) continue;
                pick = c;
                u -= p[c];
                if (u < 0.0) break;
            }
        } else {
            // Every class this device favours is used up; take the largest pool.
            pick = static_cast<std::size_t>(std::max_element(pools.begin(), pools.end(),
                                                             [](const auto& a, const auto& b) { return a.size() < b.size(); }) -
                                            pools.begin());
        }
        assigned[turn % n_devices].push_back(pools[pick].back());
        pools[pick].pop_back();
    }

    std::vector<LabeledDataset> shards;
    shards.reserve(n_devices);
    for (auto& a : assigned) {
        std::shuffle(a.begin(), a.end(), rng);
        shards.push_back(gather(global, a));
    }
    return shards;
}

LabeledDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open dataset " + path.string());
    std::vector<std::vector<double>> rows;
    std::vector<long> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> values;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                // A non-numeric first line is a header.
                if (line_no == 1) {
                    values.clear();
                    break;
                }
                throw ParameterError("non-numeric cell on line " + std::to_string(line_no));
            }
        }
        if (values.empty()) continue;
        if (values.size() < 2) throw ParameterError("row needs features and a label (line " + std::to_string(line_no) + ")");
        const double label = values.back();
        if (label < 0 || label != std::floor(label)) throw ParameterError("label must be a non-negative integer");
        values.pop_back();
        if (!rows.empty() && values.size() != rows.front().size()) {
            throw ParameterError("inconsistent feature count on line " + std::to_string(line_no));
        }
        rows.push_back(std::move(values));
        labels.push_back(static_cast<long>(label));
    }
    if (rows.empty()) throw ParameterError("dataset " + path.string() + " has no rows");
    LabeledDataset d;
    d.dim = rows.front().size();
    d.classes = static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
    if (d.classes < 2) d.classes = 2;
    for (std::size_t i = 0; i < rows.size(); ++i) d.append(rows[i], static_cast<std::uint32_t>(labels[i]));
    return d;
}

// ---------------------------------------------------------------------------

Model Model::zeros(std::size_t classes, std::size_t dim) {
    Model m;
    m.classes = classes;
    m.dim = dim;
    m.weights.assign(classes * dim + classes, 0.0);
    return m;
}

Model Model::random(std::size_t classes, std::size_t dim, std::uint64_t seed, double scale) {
    Model m = zeros(classes, dim);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, scale);
    for (double& w : m.weights) w = dist(rng);
    return m;
}

bool Model::finite() const {
    return std::all_of(weights.begin(), weights.end(), [](double w) { return std::isfinite(w); });
}

std::uint32_t Model::predict(std::span<const double> x) const {
    std::uint32_t best = 0;
    double best_score = -INFINITY;
    for (std::size_t c = 0; c < classes; ++c) {
        double s = weights[classes * dim + c];
        const double* w = weights.data() + c * dim;
        for (std::size_t j = 0; j < dim; ++j) s += w[j] * x[j];
        if (s > best_score) {
            best_score = s;
            best = static_cast<std::uint32_t>(c);
        }
    }
    return best;
}

LossGradient loss_and_gradient(const Model& model, const LabeledDataset& data) {
    check_compatible(model, data);
    if (data.empty()) throw ParameterError("empty dataset");
    LossGradient out;
    out.gradient.assign(model.parameter_count(), 0.0);
    out.loss = accumulate_gradient(model, data, 0, data.size(), out.gradient);
    const double inv = 1.0 / static_cast<double>(data.size());
    out.loss *= inv;
    for (double& g : out.gradient) g *= inv;
    return out;
}

TrainResult train_local(const Model& model, const LabeledDataset& shard, int epochs, double lr,
                        std::size_t batch_size) {
    if (epochs < 1) throw ParameterError("epochs must be >= 1");
    if (batch_size == 0) throw ParameterError("batch size must be positive");
    if (shard.empty()) throw ParameterError("cannot train on an empty shard");
    check_compatible(model, shard);

    TrainResult result{model, 0.0, {}};
    Model& m = result.model;
    std::vector<double> grad(m.parameter_count());
    for (int e = 0; e < epochs; ++e) {
        for (std::size_t begin = 0; begin < shard.size(); begin += batch_size) {
            const std::size_t end = std::min(shard.size(), begin + batch_size);
            std::fill(grad.begin(), grad.end(), 0.0);
            accumulate_gradient(m, shard, begin, end, grad);
            const double step = lr / static_cast<double>(end - begin);
            for (std::size_t k = 0; k < grad.size(); ++k) m.weights[k] -= step * grad[k];
        }
        const double loss = loss_and_gradient(m, shard).loss;
        if (!std::isfinite(loss) || !m.finite()) throw TrainingError("non-finite loss during local training");
        result.loss_history.push_back(loss);
    }
    result.normalized_loss = std::min(1.0, result.loss_history.back() / std::log(static_cast<double>(m.classes)));
    return result;
}

double evaluate(const Model& model, const LabeledDataset& testset) {
    if (testset.empty()) throw ParameterError("empty test set");
    check_compatible(model, testset);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < testset.size(); ++i) {
        if (model.predict(testset.row(i)) == testset.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(testset.size());
}

Model fedavg(std::span<const Model> models, std::span<const std::size_t> sample_counts) {
    if (models.empty()) throw ParameterError("fedavg needs at least one model");
    if (models.size() != sample_counts.size()) throw ParameterError("one sample count per model required");
    const Model& first = models.front();
    double total = 0.0;
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (models[i].weights.size() != first.weights.size() || models[i].classes != first.classes) {
            throw ParameterError("fedavg dimension mismatch");
        }
        total += static_cast<double>(sample_counts[i]);
    }
    if (total <= 0.0) throw ParameterError("fedavg needs a positive total sample count");
    Model out = Model::zeros(first.classes, first.dim);
    for (std::size_t i = 0; i < models.size(); ++i) {
        const double weight = static_cast<double>(sample_counts[i]) / total;
        for (std::size_t k = 0; k < out.weights.size(); ++k) out.weights[k] += weight * models[i].weights[k];
    }
    return out;
}

double wasserstein(std::span<const double> local_hist, std::span<const double> global_hist) {
    if (local_hist.size() != global_hist.size()) throw ParameterError("histograms differ in bin count");
    if (local_hist.size() < 2) throw ParameterError("need at least two bins");
    auto check = [](std::span<const double> h) {
        double sum = 0.0;
        for (double v : h) {
            if (!(v >= 0.0)) throw ParameterError("histogram has a negative or NaN bin");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ParameterError("histogram is not normalized");
    };
    check(local_hist);
    check(global_hist);
    double cum = 0.0;
    double emd = 0.0;
    for (std::size_t i = 0; i + 1 < local_hist.size(); ++i) {
        cum += local_hist[i] - global_hist[i];
        emd += std::abs(cum);
    }
    return std::clamp(emd / static_cast<double>(local_hist.size() - 1), 0.0, 1.0);
}

CosineDistance cosine_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ParameterError("cosine distance needs equal lengths");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return {0.5, true};
    const double cos = std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
    return {(1.0 - cos) / 2.0, false};
}

std::vector<double> shape_values(std::span<const double> accuracies) {
    if (accuracies.empty()) throw ParameterError("shape values need at least one accuracy");
    // Offsets from the first value keep equal inputs exactly centered.
    const double base = accuracies.front();
    double offset = 0.0;
    for (double a : accuracies) offset += a - base;
    const double mean = base + offset / static_cast<double>(accuracies.size());
    std::vector<double> out;
    out.reserve(accuracies.size());
    for (double a : accuracies) out.push_back(a - mean);
    return out;
}

}  // namespace pqbfl::fl
