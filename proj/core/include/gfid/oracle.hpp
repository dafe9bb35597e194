#pragma once

#include <span>
#include <vector>

#include "gfid/fixed_point.hpp"
#include "gfid/model.hpp"

// Naive reference evaluation of convolutional and fully-connected layers.
// Nothing here is shared with the engine beyond the mac() primitive; loops
// are written in the canonical accumulation order so the fixed-point results
// are the ground truth the engine must reproduce bit for bit.
namespace gfid::oracle {

/// Y(z,t,q) = ReLU(B(q) + sum_k sum_j sum_i X(zS+j, tS+i, k) * W(j,i,k,q)),
/// grouped convolutions indexing k inside q's group. Throws ShapeError on
/// inconsistent extents.
RealTensor conv_forward(const RealTensor& x, const RealFilterBank& w, const ConvLayerConfig& cfg);

/// Same sum without the ReLU; useful for linearity checks.
RealTensor conv_forward_linear(const RealTensor& x, const RealFilterBank& w, const ConvLayerConfig& cfg);

/// Fixed-point version: the accumulator starts at the bias, MACs run over
/// input channel k, then filter row j, then filter column i, and the result
/// is ReLU'd and narrowed to an activation.
FixedTensor conv_forward(const FixedTensor& x, const FixedFilterBank& w, const ConvLayerConfig& cfg,
                         SaturationCounter* sat = nullptr);

/// y_q = ReLU(sum_j w(q, j) x_j + b_q).
std::vector<double> fc_forward(std::span<const double> x, const RealFcParams& p);

/// Fixed point, accumulating j = 0 .. n-1 from the bias.
std::vector<Activation> fc_forward(std::span<const Activation> x, const FixedFcParams& p,
                                   SaturationCounter* sat = nullptr);

}  // namespace gfid::oracle
