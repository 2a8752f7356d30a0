#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fqkit/core/quant.hpp"
#include "fqkit/core/tensor.hpp"
#include "fqkit/dulut/builder.hpp"
#include "fqkit/lut/kernel.hpp"

namespace fqkit::qans {

enum class ErrorNorm { l1, l2 };

ErrorNorm parse_error_norm(std::string_view name);
std::string_view norm_name(ErrorNorm n);

// Candidate i (1-based) truncates stabilized logits at -i using the scale
// i / 2^(k-1). With frozen_index set the selection is skipped and that
// candidate is used directly (the index comes from calibrate_index).
struct QansConfig {
    int k = 8;
    int n = 20;
    ErrorNorm norm = ErrorNorm::l1;
    std::optional<int> frozen_index;
};

void validate(const QansConfig& cfg);

double candidate_scale(int i, int k);

struct QansResult {
    int selected_i = 1;
    double selected_scale = 0.0;
    std::vector<double> per_candidate_error;  // entry i-1 belongs to candidate i
    Tensor p_q;
    Tensor p_f;
};

// Subtracts the lane maximum along `axis`.
Tensor stabilize(const Tensor& logits, std::size_t axis);

// Plain float softmax along `axis` (stabilized internally).
Tensor softmax(const Tensor& x, std::size_t axis);

// Codes of stabilized logits for candidate i, in [-2^(k-1), 0].
IntTensor stabilized_codes(const Tensor& x_s, int i, const QansConfig& cfg);
Tensor quantize_stabilized(const Tensor& x_s, int i, const QansConfig& cfg);

// Per-tensor distance: the chosen norm of every lane difference, averaged
// over lanes.
double distribution_error(const Tensor& p, const Tensor& q, std::size_t axis, ErrorNorm norm);

QansResult qans_softmax(const Tensor& logits, std::size_t axis, const QansConfig& cfg);

// Offline selection over calibration batches: the candidate with the lowest
// summed error (first index on ties).
int calibrate_index(std::span<const Tensor> batches, std::size_t axis, const QansConfig& cfg);

// Quantize-dequantize the raw logits with one per-tensor scale, then softmax.
Tensor naive_quant_softmax(const Tensor& logits, std::size_t axis, const QuantParams& p);

// exp pair whose input codes are QANS codes shifted by 2^(k-1) - 1, so code
// 0 (the row maximum) lands on the top input code and reads exp(0) = 1.
struct ExpPairBudget {
    int m1 = 32;
    int m2 = 32;
};
dulut::BuiltPair build_exp_pair(int selected_i, const QansConfig& cfg, ExpPairBudget budget = {});

struct IntegerSoftmaxConfig {
    int acc_bits = 32;  // declared accumulator width checked against the row length
};

// Row-wise integer softmax of QANS codes: exp through the pair, int64 row
// sum, one reciprocal per row, 24 fractional bits per probability.
Tensor integer_softmax_via_dulut(const IntTensor& logits_q, std::size_t axis, const lut::DulutPair& pair,
                                 const IntegerSoftmaxConfig& cfg = {});

}  // namespace fqkit::qans
