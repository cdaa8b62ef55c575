#pragma once

#include "glat/embedding.hpp"

#include <vector>

namespace glat {

struct SynthSpec {
    int grid_w = 16;
    int grid_h = 16;
    int d = 32;
    int n_slides = 200;
    int lesion_count_min = 0;
    int lesion_count_max = 2;
    int lesion_radius_min = 2;
    int lesion_radius_max = 4;
    double class_signal_scale = 3.0;
    double noise_scale = 0.5;
    std::uint64_t seed = 42;
};

struct SynthSlide {
    EmbeddingTable table;
    GradeLabel label;
};

/// Class direction added to lesion patches, fixed by (cls, d) alone: a
/// shared unit direction plus a class-specific alternating-sign pattern at
/// equal weight, so all lesion classes stay mutually attractive under the
/// frozen scorer while remaining separable. Classes 1..3 only.
Vector class_signature(int cls, int d);

/// Grid slides with seeded Gaussian background noise and 0+ circular
/// lesions whose patches are shifted by class_signal_scale * signature.
/// Label 0 when no lesion, else the class of the largest-area lesion (ties
/// to the earliest drawn). Each slide draws from its own seed, derived from
/// (seed, slide index), so slides are order-independent.
std::vector<SynthSlide> synth_generate(const SynthSpec& spec);

/// Patch ids covered by at least one lesion of the slide generated for this
/// spec/index; recomputes the slide's lesion draws without the noise.
std::vector<PatchId> synth_lesion_ids(const SynthSpec& spec, int slide_index);

}  // namespace glat
