#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rgi/corruption.hpp"
#include "rgi/generator.hpp"
#include "rgi/solver.hpp"
#include "rgi/tensor.hpp"

namespace rgi {

// Lattice over [-radius, radius]^dims for brute-force enumeration; at most
// three latent dimensions and 1e7 points.
struct LatticeSpec {
    double radius = 3.0;
    std::size_t points_per_axis = 61;
    std::size_t dims = 2;

    std::size_t total_points() const;
    void validate() const;
};

struct L0OracleResult {
    std::vector<Tensor> minimizers;  // ties kept
    std::size_t n_tilde = 0;         // min ||x - G(z)||_0 over the lattice
    std::vector<Tensor> masks;       // nonzero-residual indicator per minimizer
};

// Enumerates the lattice and counts residual entries with |r| > tau.
// n0 is the declared corruption budget, recorded for sanity only.
L0OracleResult solve_l0_oracle(const GeneratorModel& model, const Tensor& x, std::size_t n0,
                               const LatticeSpec& lattice, double tau = 1e-6);

// min over b in B of ||a - b||_inf
double hausdorff_inf(const Tensor& a, const std::vector<Tensor>& b_set);

struct TheoremLambdaRecord {
    double lambda = 0.0;
    double z_distance = 0.0;          // d_inf(z_hat, candidates)
    double mask_inf_distance = 0.0;   // ||M_hat - M*||_inf
    std::size_t mask_hamming = 0;     // binarized mask vs M*
    bool exact_mask = false;
    double objective = 0.0;           // best objective over restarts
};

struct TheoremReport {
    std::vector<TheoremLambdaRecord> records;
    std::optional<bool> monotone;       // absent for single-lambda lists
    bool final_ok = false;              // last z-distance below epsilon
    std::optional<double> lambda_tilde; // largest lambda whose whole suffix recovers exactly
    bool pass = false;
    std::string notes;

    std::string to_text() const;
    void write_csv(std::ostream& out) const;
};

struct TheoremConfig {
    std::vector<double> lambdas = {0.8, 0.4, 0.2, 0.1, 0.05};
    double slack = 1e-6;          // monotonicity tolerance
    double final_epsilon = 1e-2;  // Theorem 1 terminal distance bound
    std::size_t restarts = 5;     // seeded inits per lambda, best objective kept
    double tau = 1e-6;            // zero tolerance for || . ||_0 counting
    SolverConfig solver;
};

// Candidate latents achieving the minimal residual support over the lattice
// pooled with z* (the set the asymptotic z-statement converges to).
std::vector<Tensor> candidate_latents(const GeneratorModel& model, const CorruptedSample& sample,
                                      const LatticeSpec& lattice, double tau);

TheoremReport verify_theorem1(const GeneratorModel& model, const CorruptedSample& sample,
                              const TheoremConfig& config, const LatticeSpec& lattice);

TheoremReport verify_theorem2(const GeneratorModel& model, const CorruptedSample& sample,
                              const TheoremConfig& config);

// The best-of-restarts inversion used by both theorem checks.
InversionResult solve_multi_restart(const GeneratorModel& model, const Tensor& x,
                                    const SolverConfig& config, std::size_t restarts);

}  // namespace rgi
