#pragma once

#include <cstdint>

#include "ylr/intention_bn.hpp"
#include "ylr/rng.hpp"

namespace ylr {

// Brute-force reference computations for the small-instance checks. These
// deliberately avoid the factorized inference path: the posterior is read off
// a fully enumerated joint table instead.

// Joint-table posterior for the given evidence: enumerate
// P(CE)*P(INT|CE)*prod P(DE|INT) over every bin combination and intention,
// then normalize the observed slice over the intention.
IntentionPosterior bn_joint_table_posterior(const BnModel& model, const IntentionEvidence& e);

// Random fitted model with at most max_bins bins per variable and random
// (normalized) tables.
BnModel random_bn_model(Rng& rng, int max_bins);

struct OracleCheck {
    bool passed{false};
    double max_error{0.0};
    int trials{0};
};

// infer_intention vs the joint-table posterior on random models and evidence.
OracleCheck check_bn_inference(std::uint64_t seed, int trials, double tol = 1e-12);

// Softmin probabilities on random cost sets spanning three orders of
// magnitude must stay finite and sum to one.
OracleCheck check_softmin_normalization(std::uint64_t seed, int trials, double tol = 1e-12);

// On a fully enumerated toy instance, the analytic likelihood gradient must
// match central finite differences of the likelihood itself.
OracleCheck check_maxent_gradient(std::uint64_t seed, double rel_tol = 1e-4);

}  // namespace ylr
