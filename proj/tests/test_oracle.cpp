#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rgi/fixtures.hpp"
#include "rgi/oracle.hpp"
#include "rgi/rng.hpp"

using namespace rgi;

namespace {

// generator whose output depends only on the first latent coordinate, so
// lattice minimizers come in ties
GeneratorModel degenerate_model() {
    ManifoldSpec spec;
    spec.latent_dim = 2;
    spec.image_shape = {2, 2};
    spec.seed = 1;
    GeneratorModel m = make_affine_generator(spec, 1);
    Tensor& a = m.theta[0];
    for (std::size_t i = 0; i < 4; ++i) a[i * 2 + 1] = 0.0;  // zero second column
    return m;
}

LatticeSpec tiny_lattice(std::size_t points = 5, double radius = 1.0) {
    LatticeSpec lattice;
    lattice.dims = 2;
    lattice.points_per_axis = points;
    lattice.radius = radius;
    return lattice;
}

}  // namespace

TEST_CASE("lattice spec enforces its bounds") {
    LatticeSpec lattice;
    lattice.dims = 4;
    CHECK_THROWS_AS(lattice.validate(), std::invalid_argument);
    lattice.dims = 3;
    lattice.points_per_axis = 500;  // 1.25e8 > 1e7
    CHECK_THROWS_WITH_AS(lattice.validate(), doctest::Contains("too large"), std::invalid_argument);
    lattice.points_per_axis = 61;
    CHECK_NOTHROW(lattice.validate());
}

TEST_CASE("l0 oracle finds exact lattice generators") {
    ManifoldSpec spec;
    spec.latent_dim = 2;
    spec.image_shape = {4, 4};
    spec.seed = 3;
    GeneratorModel model = make_affine_generator(spec, 3);

    // x generated from a lattice point: support 0, minimizer set contains it
    Tensor z_g({2}, {0.5, -0.5});
    Tensor x = generator_eval(model, z_g);
    L0OracleResult clean = solve_l0_oracle(model, x, 0, tiny_lattice());
    CHECK(clean.n_tilde == 0);
    bool found = false;
    for (const Tensor& z : clean.minimizers) found = found || z == z_g;
    CHECK(found);

    // one corrupted pixel: support 1 with the matching mask
    Tensor x_corrupt = x;
    x_corrupt[5] += 2.0;
    L0OracleResult one = solve_l0_oracle(model, x_corrupt, 1, tiny_lattice());
    CHECK(one.n_tilde == 1);
    REQUIRE(!one.masks.empty());
    for (std::size_t m = 0; m < one.masks.size(); ++m) {
        CHECK(one.masks[m][5] == 1.0);
        std::size_t count = 0;
        for (std::size_t i = 0; i < one.masks[m].numel(); ++i) count += one.masks[m][i] == 1.0;
        CHECK(count == 1);
    }
}

TEST_CASE("l0 oracle keeps ties") {
    GeneratorModel model = degenerate_model();
    Tensor z_g({2}, {0.5, 0.0});
    Tensor x = generator_eval(model, z_g);
    L0OracleResult result = solve_l0_oracle(model, x, 0, tiny_lattice());
    CHECK(result.n_tilde == 0);
    // the second coordinate is free: every lattice value of it ties
    CHECK(result.minimizers.size() == 5);
}

TEST_CASE("hausdorff_inf hand cases") {
    Tensor a({2}, {0.0, 0.0});
    std::vector<Tensor> set;
    set.push_back(Tensor({2}, {1.0, 2.0}));
    set.push_back(Tensor({2}, {3.0, 0.0}));
    CHECK(hausdorff_inf(a, set) == doctest::Approx(2.0));  // min(max(1,2), max(3,0))

    set.push_back(a);
    CHECK(hausdorff_inf(a, set) == 0.0);

    std::vector<Tensor> singleton = {Tensor({2}, {1.5, -0.5})};
    CHECK(hausdorff_inf(a, singleton) == doctest::Approx(1.5));

    CHECK_THROWS_WITH_AS(hausdorff_inf(a, {}), doctest::Contains("empty"), std::invalid_argument);
}

TEST_CASE("hausdorff_inf of a point against a set containing it is zero") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor a = rng.normal_tensor({3});
        std::vector<Tensor> set;
        for (int i = 0; i < 4; ++i) set.push_back(rng.normal_tensor({3}));
        set.push_back(a);
        CHECK(hausdorff_inf(a, set) == 0.0);
    }
}

TEST_CASE("theorem 1 passes on the standard fixture") {
    StandardFixture fx = standard_affine_fixture();
    TheoremConfig config = standard_theorem_config();
    TheoremReport report = verify_theorem1(fx.model, fx.sample, config, standard_lattice());

    CHECK(report.pass);
    REQUIRE(report.monotone.has_value());
    CHECK(*report.monotone);
    CHECK(report.final_ok);
    CHECK(report.records.back().z_distance < 1e-2);
    for (std::size_t i = 1; i < report.records.size(); ++i) {
        CHECK(report.records[i].z_distance <= report.records[i - 1].z_distance + 1e-6);
    }
}

TEST_CASE("theorem 1 with a single lambda reports no monotonicity verdict") {
    StandardFixture fx = standard_affine_fixture();
    TheoremConfig config = standard_theorem_config();
    config.lambdas = {0.1};
    TheoremReport report = verify_theorem1(fx.model, fx.sample, config, standard_lattice());
    CHECK(!report.monotone.has_value());
    CHECK(report.records.size() == 1);
    CHECK(report.pass);  // final-distance criterion alone
}

TEST_CASE("theorem harness aborts when the declared budget is violated") {
    StandardFixture fx = standard_affine_fixture();
    fx.sample.corruption_budget = 10;  // actual corruption is 64 pixels
    TheoremConfig config = standard_theorem_config();
    CHECK_THROWS_WITH_AS(verify_theorem1(fx.model, fx.sample, config, standard_lattice()),
                         doctest::Contains("exceeds"), std::invalid_argument);
    CHECK_THROWS_AS(verify_theorem2(fx.model, fx.sample, config), std::invalid_argument);
}

TEST_CASE("theorem harness rejects unsorted lambda lists") {
    StandardFixture fx = standard_affine_fixture();
    TheoremConfig config = standard_theorem_config();
    config.lambdas = {0.1, 0.2};
    CHECK_THROWS_AS(verify_theorem1(fx.model, fx.sample, config, standard_lattice()),
                    std::invalid_argument);
}

TEST_CASE("theorem 2 passes with an empirical recovery threshold") {
    StandardFixture fx = standard_affine_fixture();
    TheoremConfig config = standard_theorem_config();
    TheoremReport report = verify_theorem2(fx.model, fx.sample, config);

    CHECK(report.pass);
    REQUIRE(report.lambda_tilde.has_value());
    // every tested lambda at or below the threshold recovers exactly
    for (const auto& rec : report.records) {
        if (rec.lambda <= *report.lambda_tilde) {
            CHECK(rec.exact_mask);
            CHECK(rec.mask_hamming == 0);
        }
    }
    // mask distance is nonincreasing down the sweep
    for (std::size_t i = 1; i < report.records.size(); ++i) {
        CHECK(report.records[i].mask_inf_distance <=
              report.records[i - 1].mask_inf_distance + 1e-6);
    }
}

TEST_CASE("oversized lambdas may fail recovery; flags record it") {
    StandardFixture fx = standard_affine_fixture();
    TheoremConfig config = standard_theorem_config();
    config.lambdas = {50.0};  // far above 2 * min residual^2 at the optimum
    TheoremReport report = verify_theorem2(fx.model, fx.sample, config);
    CHECK(!report.records[0].exact_mask);
    CHECK(!report.lambda_tilde.has_value());
    CHECK(!report.pass);
}

TEST_CASE("clean sample recovers the empty mask at every lambda") {
    StandardFixture fx = standard_clean_fixture();
    TheoremConfig config = standard_theorem_config();
    TheoremReport report = verify_theorem2(fx.model, fx.sample, config);
    CHECK(report.pass);
    REQUIRE(report.lambda_tilde.has_value());
    CHECK(*report.lambda_tilde == config.lambdas.front());
    for (const auto& rec : report.records) CHECK(rec.exact_mask);
}

TEST_CASE("lambda_tilde covers the sweep bottom whenever theorem 1 passes") {
    StandardFixture fx = standard_affine_fixture();
    TheoremConfig config = standard_theorem_config();
    TheoremReport t1 = verify_theorem1(fx.model, fx.sample, config, standard_lattice());
    TheoremReport t2 = verify_theorem2(fx.model, fx.sample, config);
    REQUIRE(t1.pass);
    REQUIRE(t2.lambda_tilde.has_value());
    CHECK(*t2.lambda_tilde >= config.lambdas.back());
}

TEST_CASE("rgi reaches the l0-oracle objective on lattice instances") {
    StandardFixture fx = standard_affine_fixture();
    TheoremConfig config = standard_theorem_config();
    SolverConfig solver = config.solver;
    solver.lambda = config.lambdas.back();
    InversionResult result = solve_multi_restart(fx.model, fx.sample.x, solver, config.restarts);

    // the constrained problem's optimum is zero: masked reconstruction loss
    // at the recovered pair must sit on it
    double masked_loss = 0.0;
    for (std::size_t i = 0; i < fx.sample.x.numel(); ++i) {
        if (result.binary_mask[i] == 0.0) {
            double d = fx.sample.x[i] - result.restored[i];
            masked_loss += d * d;
        }
    }
    CHECK(masked_loss < 1e-4);
}

TEST_CASE("reports serialize to text and csv") {
    StandardFixture fx = standard_affine_fixture();
    TheoremConfig config = standard_theorem_config();
    config.lambdas = {0.1, 0.05};
    config.solver.iterations = 500;
    TheoremReport report = verify_theorem2(fx.model, fx.sample, config);

    std::string text = report.to_text();
    CHECK(text.find("verdict:") != std::string::npos);
    CHECK(text.find("lambda_tilde") != std::string::npos);

    std::ostringstream csv;
    report.write_csv(csv);
    CHECK(csv.str().find("lambda,z_distance,mask_inf_distance,mask_hamming,exact_mask,objective\n") == 0);
}
