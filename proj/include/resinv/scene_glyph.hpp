// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "resinv/tensor.hpp"

namespace resinv {

// Fixed geometry: 16x16 images with an 8x8 anchor box where identity
// glyphs live. The box position is known a priori, so "alignment" is
// trivial by construction.
namespace geom {
inline constexpr int kImageSize = 16;
inline constexpr int kBoxLo = 4;   // inclusive
inline constexpr int kBoxHi = 12;  // exclusive
inline constexpr float kBoxHalf = 4.0f;
inline constexpr float kBoxCenter = 8.0f;
inline bool in_box(int r, int c) { return r >= kBoxLo && r < kBoxHi && c >= kBoxLo && c < kBoxHi; }
}  // namespace geom

enum class BackgroundFamily { gradient = 0, stripes = 1, blobs = 2 };

/// Background parameters. Documented ranges:
///   orientation in [0, pi); intensity (base level) in [-0.45, 0.15];
///   frequency: stripe period in pixels in [3, 12] (stripes only);
///   blob variant index 0..3 carried in `frequency` (blobs only).
/// Backgrounds stay within [-0.65, 0.35] so any glyph intensity in the
/// documented set clears the contrast margin.
struct SceneParams {
    BackgroundFamily family = BackgroundFamily::gradient;
    float orientation = 0.0f;
    float frequency = 0.0f;
    float intensity = 0.0f;

    nlohmann::json to_json() const;
    static SceneParams from_json(const nlohmann::json& j);
};

enum class GlyphKind { disk = 0, cross = 1, triangle = 2, ring = 3 };

/// Foreground glyph parameters. The glyph (including its 1-px soft edge)
/// must fit inside the anchor box, and its intensity must differ from
/// every background value under it by at least kContrastMargin.
struct IdentityParams {
    GlyphKind kind = GlyphKind::disk;
    float intensity = 0.6f;
    float radius = 1.3f;
    float dx = 0.0f;  // sub-pixel offset of the glyph center from the box center
    float dy = 0.0f;

    nlohmann::json to_json() const;
    static IdentityParams from_json(const nlohmann::json& j);
};

inline constexpr float kContrastMargin = 0.25f;

// Discretized identity space: 4 kinds x 8 intensities x 4 radii x 9 offsets.
inline constexpr int kGlyphKinds = 4;
inline constexpr int kGlyphIntensities = 8;
inline constexpr int kGlyphRadii = 4;
inline constexpr int kGlyphOffsets = 9;
inline constexpr int kIdentityCount = kGlyphKinds * kGlyphIntensities * kGlyphRadii * kGlyphOffsets;

float glyph_intensity_level(int idx);  // idx in [0,8): 0.6 .. 1.0
float glyph_radius_level(int idx);     // idx in [0,4): 1.3 .. 2.65
void glyph_offset_level(int idx, float* dx, float* dy);  // idx in [0,9): {-0.5,0,0.5}^2

IdentityParams identity_from_index(int index);
int identity_index(const IdentityParams& p);  // exact grid points only
struct IdentityFactors {
    int kind, intensity, radius, offset;
};
IdentityFactors identity_factors(int index);

// Discretized scene bank used for conditioning codes and for background
// fitting: 32 gradients + 96 stripes + 16 blob layouts.
inline constexpr int kSceneCount = 144;
SceneParams scene_from_code(int code);

enum class ImageTag { base = 0, swapped = 1, enhanced = 2, reference = 3 };
const char* image_tag_name(ImageTag t);

struct RenderedImage {
    Tensor pixels;  // [16,16], values in [-1,1]
    ImageTag tag = ImageTag::reference;
};

RenderedImage render_background(const SceneParams& scene);
RenderedImage render(const SceneParams& scene, const IdentityParams& identity);

/// Re-renders the anchor box with `target` composited over the image's
/// estimated local background. With blur_edges, the 1-px boundary band of
/// the box is 3x3 box-blurred, emulating seam artifacts of a real swap.
/// Pixels outside the anchor box are never written.
RenderedImage glyph_swap(const RenderedImage& image, const IdentityParams& target, bool blur_edges);

/// Best-matching scene code by exterior-region MSE over the scene bank.
int fit_scene_code(const RenderedImage& image);

/// Full-image background reconstruction from the fitted scene code.
RenderedImage estimate_background(const RenderedImage& image);

struct IdentityFit {
    IdentityParams params;
    int index = 0;
    float residual = 0.0f;  // anchor-box MSE of the best candidate
};

/// Exhaustive search over the discretized identity space, minimizing
/// anchor-box MSE against candidate composites over the estimated
/// background. Ties break lexicographically on (kind, intensity, radius,
/// offset) indices, so the result does not depend on evaluation order.
IdentityFit fit_identity(const RenderedImage& image);

/// Residual that fit_identity reports for glyph-free images stays above
/// this value (verified empirically over the scene bank).
inline constexpr float kNoGlyphResidualFloor = 2e-3f;

/// Anchor-box MSE between the image and the target glyph composited over
/// the image's estimated background; the identity-similarity analog.
float identity_render_error(const RenderedImage& image, const IdentityParams& target);

/// Mean pairwise per-pixel MSE outside the anchor box.
double background_diversity(const std::vector<RenderedImage>& images);

double exterior_mse(const Tensor& a, const Tensor& b);
double box_mse(const Tensor& a, const Tensor& b);

// Binary PGM (P5, maxval 255); [-1,1] maps linearly to [0,255].
void write_pgm(const RenderedImage& image, const std::string& path);
RenderedImage read_pgm(const std::string& path);

}  // namespace resinv
