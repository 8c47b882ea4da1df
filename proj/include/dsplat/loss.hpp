#pragma once

#include <cmath>

#include "dsplat/camera.hpp"
#include "dsplat/error.hpp"
#include "dsplat/image.hpp"
#include "dsplat/ssim.hpp"

namespace dsplat {

// One camera's training target: ground truth plus the foreground mask that
// keeps stray splats from being trained against the backdrop.
struct TrainView {
    Camera cam;
    Image ground_truth;  // RGB
    Image mask;          // 1 channel, values in {0, 1}

    void validate() const {
        if (ground_truth.width != cam.width || ground_truth.height != cam.height ||
            ground_truth.channels != 3)
            throw Error(ErrorCode::DimensionMismatch, "ground truth does not match camera");
        if (mask.width != cam.width || mask.height != cam.height || mask.channels != 1)
            throw Error(ErrorCode::DimensionMismatch, "mask does not match camera");
    }
};

struct LossResult {
    double loss = 0.0;
    Image dL_dpixels;  // RGB, exactly zero on masked-out pixels
};

// (1 - lambda) * masked L1 + lambda * masked D-SSIM.
//
// Masking: L1 averages over masked-in pixels only. SSIM windows are included
// iff their center pixel is masked in, and window contents are read
// zero-filled outside the mask, so ground-truth values outside the mask are
// provably inert and the pixel gradient is exactly zero there.
inline LossResult masked_loss(const Image& rendered, const TrainView& view, double loss_lambda) {
    view.validate();
    rendered.require_same_shape(view.ground_truth);

    LossResult result;
    result.dL_dpixels = Image(rendered.width, rendered.height, 3, 0.0);

    size_t n_masked = 0;
    for (int y = 0; y < rendered.height; ++y)
        for (int x = 0; x < rendered.width; ++x)
            if (view.mask.at(x, y) >= 0.5) ++n_masked;
    if (n_masked == 0) return result;  // vacuous: loss 0, zero gradient

    const double l1_weight = (1.0 - loss_lambda) / (static_cast<double>(n_masked) * 3.0);
    double l1_sum = 0.0;
    for (int y = 0; y < rendered.height; ++y)
        for (int x = 0; x < rendered.width; ++x) {
            if (view.mask.at(x, y) < 0.5) continue;
            for (int c = 0; c < 3; ++c) {
                double diff = rendered.at(x, y, c) - view.ground_truth.at(x, y, c);
                l1_sum += std::abs(diff);
                result.dL_dpixels.at(x, y, c) =
                    l1_weight * (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0));
            }
        }
    result.loss = (1.0 - loss_lambda) * l1_sum / (static_cast<double>(n_masked) * 3.0);

    if (loss_lambda > 0.0) {
        // D-SSIM term: lambda * (1 - mean ssim); gradient is -lambda * d(mean)/dx.
        SsimStats stats =
            ssim_core(rendered, view.ground_truth, &view.mask, &result.dL_dpixels, -loss_lambda);
        if (stats.n_samples > 0) result.loss += loss_lambda * (1.0 - stats.mean);
    }
    return result;
}

} // namespace dsplat
