#include "probes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "error.hpp"
#include "rng.hpp"

namespace emblens {
namespace {

void check_probe_inputs(const EmbeddingSet& embeddings, const Partition& ground_truth,
                        const ProbeConfig& config) {
    if (embeddings.n() != ground_truth.n())
        fail(ErrorCode::invalid, "probe requires matching embedding and label lengths");
    if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0))
        fail(ErrorCode::invalid, "probe train_fraction must lie in (0, 1)");
}

std::vector<double> normalized_rows(const EmbeddingSet& embeddings) {
    const std::size_t n = embeddings.n();
    const std::size_t d = embeddings.d();
    std::vector<double> rows(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = embeddings.values.row(i);
        const double len = norm(row);
        if (len <= 1e-12)
            fail(ErrorCode::invalid,
                 "knn probe requires nonzero rows under cosine similarity; row " +
                     std::to_string(i) + " has norm " + std::to_string(len));
        for (std::size_t j = 0; j < d; ++j) rows[i * d + j] = row[j] / len;
    }
    return rows;
}

} // namespace

ProbeSplit make_split(std::size_t n, double train_fraction, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "probe.split"));
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng.uniform_index(i);
        std::swap(order[i - 1], order[j]);
    }
    const auto n_train = static_cast<std::size_t>(
        std::ceil(train_fraction * static_cast<double>(n)));
    ProbeSplit split;
    split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.eval.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    if (split.train.empty() || split.eval.empty())
        fail(ErrorCode::invalid, "probe split left an empty train or eval set");
    return split;
}

double knn_probe(const EmbeddingSet& embeddings, const Partition& ground_truth,
                 const ProbeConfig& config) {
    check_probe_inputs(embeddings, ground_truth, config);
    if (config.knn_k < 1) fail(ErrorCode::invalid, "knn probe requires knn_k >= 1");

    const std::size_t n = embeddings.n();
    const std::size_t d = embeddings.d();
    const auto rows = normalized_rows(embeddings);
    const ProbeSplit split = make_split(n, config.train_fraction, config.seed);

    std::vector<bool> class_in_train(static_cast<std::size_t>(ground_truth.k), false);
    for (auto idx : split.train)
        class_in_train[static_cast<std::size_t>(ground_truth.assignments[idx])] = true;
    const auto counts = ground_truth.label_counts();
    for (std::size_t c = 0; c < class_in_train.size(); ++c)
        if (counts[c] > 0 && !class_in_train[c])
            fail(ErrorCode::invalid,
                 "knn probe: class " + std::to_string(c) + " is absent from the train split");

    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(config.knn_k),
                                                split.train.size());
    std::vector<std::pair<double, std::size_t>> sims(split.train.size());
    std::vector<std::int64_t> votes(static_cast<std::size_t>(ground_truth.k));
    std::size_t correct = 0;
    for (auto eval_idx : split.eval) {
        const double* query = rows.data() + eval_idx * d;
        for (std::size_t t = 0; t < split.train.size(); ++t) {
            const double* train_row = rows.data() + split.train[t] * d;
            double sim = 0.0;
            for (std::size_t j = 0; j < d; ++j) sim += query[j] * train_row[j];
            sims[t] = {sim, split.train[t]};
        }
        std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k),
                          sims.end(), [](const auto& a, const auto& b) {
                              return a.first != b.first ? a.first > b.first
                                                        : a.second < b.second;
                          });
        std::fill(votes.begin(), votes.end(), 0);
        for (std::size_t t = 0; t < k; ++t)
            ++votes[static_cast<std::size_t>(ground_truth.assignments[sims[t].second])];
        std::size_t winner = 0;
        for (std::size_t c = 1; c < votes.size(); ++c)
            if (votes[c] > votes[winner]) winner = c; // ties keep the smallest index
        if (static_cast<std::int32_t>(winner) == ground_truth.assignments[eval_idx])
            ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(split.eval.size());
}

double softmax_loss_and_gradient(const Matrix& features,
                                 const std::vector<std::int32_t>& labels,
                                 std::int32_t n_classes, double l2,
                                 const std::vector<double>& params,
                                 std::vector<double>* gradient) {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    const auto k = static_cast<std::size_t>(n_classes);
    const std::size_t stride = d + 1; // weights then bias
    if (params.size() != k * stride)
        fail(ErrorCode::invalid, "softmax parameter vector has the wrong size");

    if (gradient) gradient->assign(k * stride, 0.0);
    std::vector<double> logits(k), probs(k);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = features.row(i);
        double max_logit = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            const double* wc = params.data() + c * stride;
            double z = wc[d]; // bias
            for (std::size_t j = 0; j < d; ++j) z += wc[j] * row[j];
            logits[c] = z;
            max_logit = std::max(max_logit, z);
        }
        double total = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            probs[c] = std::exp(logits[c] - max_logit);
            total += probs[c];
        }
        const auto y = static_cast<std::size_t>(labels[i]);
        loss += -(logits[y] - max_logit - std::log(total));
        if (gradient) {
            for (std::size_t c = 0; c < k; ++c) {
                const double delta =
                    (probs[c] / total - (c == y ? 1.0 : 0.0)) / static_cast<double>(n);
                double* gc = gradient->data() + c * stride;
                for (std::size_t j = 0; j < d; ++j) gc[j] += delta * row[j];
                gc[d] += delta;
            }
        }
    }
    loss /= static_cast<double>(n);

    // L2 on weights only; the bias column is unpenalized.
    for (std::size_t c = 0; c < k; ++c) {
        const double* wc = params.data() + c * stride;
        for (std::size_t j = 0; j < d; ++j) {
            loss += 0.5 * l2 * wc[j] * wc[j];
            if (gradient) (*gradient)[c * stride + j] += l2 * wc[j];
        }
    }
    return loss;
}

double linear_probe(const EmbeddingSet& embeddings, const Partition& ground_truth,
                    const ProbeConfig& config) {
    check_probe_inputs(embeddings, ground_truth, config);
    if (config.epochs < 1) fail(ErrorCode::invalid, "linear probe requires epochs >= 1");
    if (config.learning_rate <= 0.0)
        fail(ErrorCode::invalid, "linear probe requires a positive learning rate");
    if (config.l2 < 0.0) fail(ErrorCode::invalid, "linear probe requires l2 >= 0");

    const std::size_t d = embeddings.d();
    const auto k = static_cast<std::size_t>(ground_truth.k);
    const ProbeSplit split = make_split(embeddings.n(), config.train_fraction, config.seed);

    Matrix train_features(split.train.size(), d);
    std::vector<std::int32_t> train_labels(split.train.size());
    for (std::size_t t = 0; t < split.train.size(); ++t) {
        const auto src = embeddings.values.row(split.train[t]);
        std::copy(src.begin(), src.end(), train_features.row(t).begin());
        train_labels[t] = ground_truth.assignments[split.train[t]];
    }

    const std::size_t stride = d + 1;
    std::vector<double> params(k * stride, 0.0), gradient;
    const auto total_epochs = static_cast<double>(config.epochs);
    for (std::int32_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double loss = softmax_loss_and_gradient(train_features, train_labels,
                                                      ground_truth.k, config.l2, params,
                                                      &gradient);
        if (!std::isfinite(loss))
            fail(ErrorCode::eval,
                 "linear probe diverged (non-finite loss at epoch " + std::to_string(epoch) + ")");
        const double lr = config.learning_rate * 0.5 *
                          (1.0 + std::cos(3.14159265358979323846 *
                                          static_cast<double>(epoch) / total_epochs));
        for (std::size_t p = 0; p < params.size(); ++p) params[p] -= lr * gradient[p];
    }

    std::size_t correct = 0;
    std::vector<double> logits(k);
    for (auto eval_idx : split.eval) {
        const auto row = embeddings.values.row(eval_idx);
        std::size_t winner = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            const double* wc = params.data() + c * stride;
            double z = wc[d];
            for (std::size_t j = 0; j < d; ++j) z += wc[j] * row[j];
            if (z > best) {
                best = z;
                winner = c;
            }
        }
        if (static_cast<std::int32_t>(winner) == ground_truth.assignments[eval_idx])
            ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(split.eval.size());
}

} // namespace emblens
