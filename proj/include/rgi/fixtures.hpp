#pragma once

#include <cstdint>

#include "rgi/corruption.hpp"
#include "rgi/generator.hpp"
#include "rgi/oracle.hpp"
#include "rgi/solver.hpp"

namespace rgi {

// The frozen desk-scale fixtures behind the verification harness and the
// simulation/experiment presets. Seeds are pinned so the theorem checks run
// inside the regime where exact mask recovery is attainable at the bottom of
// the default lambda sweep.

struct StandardFixture {
    GeneratorModel model;
    CorruptedSample sample;
};

// d = 2 affine generator, 16x16 image, central 8x8 block, fill N(1, 1).
StandardFixture standard_affine_fixture();

// Same generator, no corruption (empty mask fixture for the harness).
StandardFixture standard_clean_fixture();

// Defect fixture: mean-filled irregular region on the affine manifold.
StandardFixture standard_defect_fixture();

LatticeSpec standard_lattice();
TheoremConfig standard_theorem_config();

// Under-capacity decoder trained on rank-8 affine data, plus the true
// manifold it approximates (the approximation-gap experiment).
struct CapacityGapFixture {
    GeneratorModel true_manifold;   // d = 8 affine
    GeneratorModel decoder;         // trained mlp with a narrow bottleneck
};

CapacityGapFixture capacity_gap_fixture();

}  // namespace rgi
