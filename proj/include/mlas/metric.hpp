#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mlas/data_model.hpp"
#include "mlas/fusion.hpp"

namespace mlas {

struct TrainingConfig {
    double margin = 1.0;              // g
    double learning_rate = 0.05;      // gamma
    std::size_t max_iterations = 100; // theta; 0 makes train a no-op
    double convergence_eps = 1e-8;    // epsilon
    double l2_lambda = 0.0;
    double validation_fraction = 0.2;
    std::uint64_t seed = 42;
    double pretrain_omega_a = 0.5;    // omega_S is derived as 1 - omega_A
    std::size_t pretrain_epochs = 10;
    std::size_t patience = 5;         // early-stopping epochs without improvement
    bool per_pair_convergence = false;

    void validate() const;
};

enum class StopReason { Converged, EarlyStopped, MaxIterations };

std::string to_string(StopReason r);

struct TrainReport {
    std::vector<double> train_loss;  // one entry per executed epoch
    std::vector<double> val_loss;    // NaN entries when no validation set
    StopReason stop_reason = StopReason::MaxIterations;
    std::size_t iterations = 0;
};

// -- distances and loss -----------------------------------------------------

double euclidean_distance(const Embedding& a, const Embedding& b);

/// sqrt((a-b)^T Lambda (a-b)). Lambda must be symmetric positive
/// semi-definite within 1e-8; with Lambda = I this equals
/// euclidean_distance.
double mahalanobis_distance(const Embedding& a, const Embedding& b, const Mat& lambda);

/// 0.5 (1-l) d^2 + 0.5 l max(0, g-d)^2. Dissimilar pairs contribute only
/// while their distance is below the margin.
double contrastive_loss(double distance, int label, double margin);

// -- training ----------------------------------------------------------------

/// Contrastive loss of one feedback pair through the shared-parameter
/// siamese encoder; gradients from both branches accumulate into *grads
/// when it is non-null.
double pair_loss(const FusionParams& model, const AttributedSequence& left,
                 const AttributedSequence& right, int label, double margin,
                 FusionParams* grads = nullptr);

/// Per-pair SGD over the feedback set. Splits off a validation set,
/// shuffles each epoch, and stops on epoch-mean convergence, validation
/// early stopping, or the iteration cap.
std::pair<FusionParams, TrainReport> train(FusionParams model,
                                           const std::vector<FeedbackTriplet>& feedback,
                                           const Dataset& dataset,
                                           const TrainingConfig& config);

/// Reconstruction pre-training: temporary decoders map the embedding back
/// to the attribute vector (mean squared error) and the one-hot sequence
/// (per-step cross-entropy), weighted omega_A / 1 - omega_A. Decoders are
/// discarded; the tuned encoder is returned.
FusionParams pretrain(FusionParams model, const Dataset& dataset,
                      const TrainingConfig& config);

std::vector<std::pair<std::string, Embedding>> embed_all(const FusionParams& model,
                                                         const Dataset& dataset);

} // namespace mlas
