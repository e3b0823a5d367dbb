#include "mirrorqed/robustness.hpp"

#include "mirrorqed/errors.hpp"
#include "mirrorqed/rng.hpp"

#include <doctest.h>

using namespace mirrorqed;

TEST_CASE("counter RNG is deterministic and order-independent") {
    const CounterRng a(42, 3, 1);
    const CounterRng b(42, 3, 1);
    CHECK(a.uniform(7) == b.uniform(7));
    CHECK(a.gaussian(5) == b.gaussian(5));
    const CounterRng c(42, 4, 1);
    CHECK(a.uniform(7) != c.uniform(7));

    // Loose moments of the Gaussian stream.
    double mean = 0.0, var = 0.0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) mean += a.gaussian(k);
    mean /= n;
    for (int k = 0; k < n; ++k) {
        const double d = a.gaussian(k) - mean;
        var += d * d;
    }
    var /= n;
    CHECK(std::abs(mean) < 0.03);
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("perturbed arrays") {
    const EmitterArray base = EmitterArray::mirror_configuration();

    SUBCASE("epsilon = 0 reproduces the base array") {
        for (auto mode :
             {PerturbationMode::GammaPrime, PerturbationMode::Spacing, PerturbationMode::Disorder}) {
            Perturbation p{mode, 0.0, 11, 1};
            const EmitterArray out = perturbed_array(base, p, 0);
            CHECK(out.positions == base.positions);
            CHECK(out.gamma_prime == base.gamma_prime);
        }
    }
    SUBCASE("gamma-prime mode sets the loss rate") {
        Perturbation p{PerturbationMode::GammaPrime, 2e-3, 0, 1};
        CHECK(perturbed_array(base, p, 0).gamma_prime == doctest::Approx(2e-3));
    }
    SUBCASE("spacing mode scales gaps and keeps the first emitter fixed") {
        Perturbation p{PerturbationMode::Spacing, 0.01, 0, 1};
        const EmitterArray out = perturbed_array(base, p, 0);
        CHECK(out.positions[0] == doctest::Approx(1.25).epsilon(1e-15));
        CHECK(out.positions[1] == doctest::Approx(1.25 + 1.01).epsilon(1e-12));
        CHECK(out.positions[2] == doctest::Approx(1.25 + 2.02).epsilon(1e-12));
    }
    SUBCASE("disorder is reproducible per (seed, realization)") {
        Perturbation p{PerturbationMode::Disorder, 1e-2, 7, 1};
        const EmitterArray a = perturbed_array(base, p, 3);
        const EmitterArray b = perturbed_array(base, p, 3);
        CHECK(a.positions == b.positions);
        const EmitterArray c = perturbed_array(base, p, 4);
        CHECK(a.positions != c.positions);
        Perturbation q = p;
        q.seed = 8;
        CHECK(perturbed_array(base, q, 3).positions != a.positions);
    }
    SUBCASE("positions at x <= 0 are resampled deterministically") {
        EmitterArray near_wall;
        near_wall.positions = {0.05, 1.25};
        Perturbation p{PerturbationMode::Disorder, 0.5, 2, 1};
        int resampled_1 = -1, resampled_2 = -1;
        const EmitterArray a = perturbed_array(near_wall, p, 0, &resampled_1);
        const EmitterArray b = perturbed_array(near_wall, p, 0, &resampled_2);
        CHECK(a.positions == b.positions);
        CHECK(resampled_1 == resampled_2);
        for (double x : a.positions) CHECK(x > 0.0);
        // With sigma = 0.5 around x = 0.05 some realization resamples.
        int total = 0;
        for (int r = 0; r < 20; ++r) {
            int n = 0;
            perturbed_array(near_wall, p, r, &n);
            total += n;
        }
        CHECK(total > 0);
    }
    SUBCASE("validation") {
        Perturbation p{PerturbationMode::Disorder, -1.0, 0, 1};
        CHECK_THROWS_AS(p.validate(), ConfigError);
        p.epsilon = 0.1;
        p.realizations = 0;
        CHECK_THROWS_AS(p.validate(), ConfigError);
    }
}

TEST_CASE("gate infidelity under perturbations") {
    const EmitterArray base = EmitterArray::mirror_configuration();
    const GateSpec gate = GateSpec::y_half(0.2, 10.0);

    Perturbation none{PerturbationMode::Spacing, 0.0, 0, 1};
    const SweepStats baseline = gate_infidelity_under(none, gate, base, {});

    SUBCASE("baseline continuity at epsilon = 1e-6") {
        for (auto mode :
             {PerturbationMode::GammaPrime, PerturbationMode::Spacing, PerturbationMode::Disorder}) {
            Perturbation p{mode, 1e-6, 5, 3};
            const SweepStats s = gate_infidelity_under(p, gate, base, {});
            CHECK(s.mean == doctest::Approx(baseline.mean).epsilon(0.05));
        }
    }
    SUBCASE("spacing plateau below 1e-3 and growth at 1e-1") {
        Perturbation small{PerturbationMode::Spacing, 1e-3, 0, 1};
        const SweepStats s_small = gate_infidelity_under(small, gate, base, {});
        CHECK(std::abs(s_small.mean - baseline.mean) < 0.10 * baseline.mean);
        Perturbation big{PerturbationMode::Spacing, 1e-1, 0, 1};
        const SweepStats s_big = gate_infidelity_under(big, gate, base, {});
        CHECK(s_big.mean > 10.0 * baseline.mean);
    }
    SUBCASE("disorder statistics are seeded and reproducible") {
        Perturbation p{PerturbationMode::Disorder, 1e-2, 21, 10};
        const SweepStats a = gate_infidelity_under(p, gate, base, {});
        const SweepStats b = gate_infidelity_under(p, gate, base, {});
        CHECK(a.mean == b.mean);
        CHECK(a.stderr_mean == b.stderr_mean);
        CHECK(a.realizations == 10);
        CHECK(a.mean > baseline.mean);
    }
}

TEST_CASE("emission infidelity under perturbations") {
    const EmitterArray base = EmitterArray::mirror_configuration();
    const Wavepacket target = gaussian_packet(1.75, 8.75, 17.5, 1e-3);

    Perturbation none{PerturbationMode::Spacing, 0.0, 0, 1};
    const SweepStats baseline = emission_infidelity_under(none, target, base);
    CHECK(baseline.mean < 1e-3); // control-limited

    SUBCASE("infidelity grows with epsilon for every mode") {
        for (auto mode :
             {PerturbationMode::GammaPrime, PerturbationMode::Spacing, PerturbationMode::Disorder}) {
            Perturbation small{mode, 1e-3, 13, 5};
            Perturbation large{mode, 1e-1, 13, 5};
            const SweepStats s = emission_infidelity_under(small, target, base);
            const SweepStats l = emission_infidelity_under(large, target, base);
            CHECK(l.mean > 3.0 * s.mean);
        }
    }
    SUBCASE("gamma-prime emission loss matches the captured norm") {
        Perturbation p{PerturbationMode::GammaPrime, 1e-2, 0, 1};
        const SweepStats s = emission_infidelity_under(p, target, base);
        CHECK(s.mean > baseline.mean);
        CHECK(s.mean < 0.2);
    }
}
