#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "divkit/scoring.hpp"

#include "support/oracles.hpp"

using namespace divkit;
using oracles::make_paired;
using oracles::make_trace;

namespace {

const double kLnHalf = std::log(0.5);

std::vector<double> random_logprobs(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> lps(n);
    for (double& lp : lps) {
        lp = -6.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1e-6;
    }
    return lps;
}

}  // namespace

TEST_CASE("mean_token_entropy: constant-probability closed forms") {
    CHECK(mean_token_entropy(make_trace({kLnHalf, kLnHalf, kLnHalf})) ==
          doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
    CHECK(mean_token_entropy(make_trace(std::vector<double>(7, kLnHalf))) ==
          doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
    CHECK(mean_token_entropy(make_trace({0.0, 0.0, 0.0, 0.0})) == 0.0);
    CHECK_THROWS_AS(mean_token_entropy(make_trace({})), EmptyTrace);
}

TEST_CASE("mean_token_entropy: bounded by 1/e and permutation/duplication stable") {
    std::mt19937_64 rng(1234);
    for (int iter = 0; iter < 200; ++iter) {
        auto lps = random_logprobs(rng, 1 + static_cast<std::size_t>(rng() % 64));
        const TokenTrace trace = make_trace(lps);
        const double h = mean_token_entropy(trace);
        CHECK(h >= 0.0);
        CHECK(h <= 0.3679);

        auto shuffled = lps;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(mean_token_entropy(make_trace(shuffled)) == doctest::Approx(h).epsilon(1e-12));

        auto doubled = lps;
        doubled.insert(doubled.end(), lps.begin(), lps.end());
        CHECK(mean_token_entropy(make_trace(doubled)) == doctest::Approx(h).epsilon(1e-12));
    }
}

TEST_CASE("mean_token_entropy: pairwise accumulation agrees with sequential oracle") {
    std::mt19937_64 rng(99);
    auto lps = random_logprobs(rng, 5000);
    const TokenTrace trace = make_trace(lps);
    CHECK(mean_token_entropy(trace) ==
          doctest::Approx(oracles::mean_entropy_seq(trace)).epsilon(1e-12));
}

TEST_CASE("mean_token_cross_entropy: collapses to entropy when models coincide") {
    std::mt19937_64 rng(7);
    const auto lps = random_logprobs(rng, 33);
    const PairedTrace pair = make_paired(lps, lps);
    CHECK(mean_token_cross_entropy(pair) == mean_token_entropy(pair.adapted));
}

TEST_CASE("mean_token_cross_entropy: closed form and oracle") {
    // general p = 1 everywhere, adapted p = 1/2: each term is -1 * ln(1/2).
    const PairedTrace pair = make_paired({0.0, 0.0, 0.0}, {kLnHalf, kLnHalf, kLnHalf});
    CHECK(mean_token_cross_entropy(pair) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));

    std::mt19937_64 rng(21);
    const PairedTrace random_pair =
        make_paired(random_logprobs(rng, 40), random_logprobs(rng, 40));
    CHECK(mean_token_cross_entropy(random_pair) ==
          doctest::Approx(oracles::mean_cross_entropy_seq(random_pair)).epsilon(1e-12));
    CHECK(mean_token_cross_entropy(random_pair) >= 0.0);
}

TEST_CASE("mean_token_cross_entropy: alignment and emptiness errors") {
    CHECK_THROWS_AS(mean_token_cross_entropy(make_paired({-1.0, -1.0}, {-1.0})),
                    AlignmentError);
    PairedTrace renamed = make_paired({-1.0, -1.0}, {-1.0, -1.0});
    renamed.adapted.steps[1].token_text = "different";
    CHECK_THROWS_AS(mean_token_cross_entropy(renamed), AlignmentError);
    CHECK_THROWS_AS(mean_token_cross_entropy(make_paired({}, {})), EmptyTrace);
}

TEST_CASE("divscore: golden case-study ratios within 5e-5") {
    for (const auto& cs : oracles::load_case_studies()) {
        const DetectorScore score =
            divscore_from_components(cs.entropy, cs.cross_entropy);
        CHECK(score.method == Method::divscore);
        CHECK(score.orientation == Orientation::lower_is_machine);
        CHECK(std::abs(score.value - cs.divscore) < 5e-5);
        REQUIRE(score.components.has_value());
        CHECK(score.components->entropy == cs.entropy);
        CHECK(score.components->cross_entropy == cs.cross_entropy);
    }
}

TEST_CASE("divscore: identity when the two traces coincide") {
    std::mt19937_64 rng(31);
    for (int iter = 0; iter < 50; ++iter) {
        const auto lps = random_logprobs(rng, 16);
        const DetectorScore score = divscore(make_paired(lps, lps));
        CHECK(std::abs(score.value - 1.0) <= 1e-12);
    }
}

TEST_CASE("divscore: component consistency and oracle recomputation") {
    std::mt19937_64 rng(77);
    for (int iter = 0; iter < 50; ++iter) {
        const PairedTrace pair =
            make_paired(random_logprobs(rng, 24), random_logprobs(rng, 24));
        const DetectorScore score = divscore(pair);
        REQUIRE(score.components.has_value());
        CHECK(score.value * score.components->cross_entropy ==
              doctest::Approx(score.components->entropy).epsilon(1e-9));
        CHECK(score.value == doctest::Approx(oracles::mean_entropy_seq(pair.adapted) /
                                             oracles::mean_cross_entropy_seq(pair))
                                 .epsilon(1e-12));
    }
}

TEST_CASE("divscore: degenerate cross-entropy raises instead of exploding") {
    // adapted logprobs of zero make every cross-entropy term vanish.
    CHECK_THROWS_AS(divscore(make_paired({-1.0, -1.0}, {0.0, 0.0})),
                    DegenerateCrossEntropy);
    CHECK_THROWS_AS(divscore_from_components(0.5, 1e-10), DegenerateCrossEntropy);
    CHECK_THROWS_AS(divscore_from_components(0.5, 0.0), DegenerateCrossEntropy);
    CHECK_NOTHROW(divscore_from_components(0.5, 1.1e-9));
}

TEST_CASE("baseline_log_likelihood: closed forms and exact oracle") {
    CHECK(baseline_log_likelihood(make_trace({kLnHalf, kLnHalf})).value ==
          doctest::Approx(-std::log(2.0)).epsilon(1e-12));
    CHECK(baseline_log_likelihood(make_trace({0.0, 0.0})).value == 0.0);
    CHECK(baseline_log_likelihood(make_trace({-1.0})).orientation ==
          Orientation::higher_is_machine);

    std::mt19937_64 rng(15);
    const TokenTrace trace = make_trace(random_logprobs(rng, 10));
    CHECK(baseline_log_likelihood(trace).value == oracles::mean_logprob_seq(trace));
}

TEST_CASE("baseline_rank and baseline_log_rank") {
    const TokenTrace argmax = make_trace({-1.0, -1.0, -1.0}, "m", {1, 1, 1});
    CHECK(baseline_rank(argmax).value == 1.0);
    CHECK(baseline_log_rank(argmax).value == 0.0);

    const TokenTrace mixed = make_trace({-1.0, -1.0, -1.0, -1.0}, "m", {1, 3, 5, 7});
    CHECK(baseline_rank(mixed).value == 4.0);

    const TokenTrace powers = make_trace({-1.0, -1.0, -1.0}, "m", {1, 2, 4});
    CHECK(baseline_log_rank(powers).value ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));

    TokenTrace partial = make_trace({-1.0, -1.0, -1.0}, "m", {1, 2, 4});
    partial.steps[1].rank.reset();
    CHECK_THROWS_AS(baseline_rank(partial), RankUnavailable);
    CHECK_THROWS_AS(baseline_log_rank(partial), RankUnavailable);

    // Brute-force mean over recorded ranks.
    std::mt19937_64 rng(5);
    std::vector<std::int64_t> ranks;
    double rank_sum = 0.0;
    double log_rank_sum = 0.0;
    for (int i = 0; i < 23; ++i) {
        ranks.push_back(1 + static_cast<std::int64_t>(rng() % 40));
        rank_sum += static_cast<double>(ranks.back());
        log_rank_sum += std::log(static_cast<double>(ranks.back()));
    }
    const TokenTrace fixture =
        make_trace(std::vector<double>(ranks.size(), -0.5), "m", ranks);
    CHECK(baseline_rank(fixture).value ==
          doctest::Approx(rank_sum / 23.0).epsilon(1e-12));
    CHECK(baseline_log_rank(fixture).value ==
          doctest::Approx(log_rank_sum / 23.0).epsilon(1e-12));
    CHECK(baseline_rank(fixture).orientation == Orientation::higher_is_machine);
}

TEST_CASE("baseline_ppl_ratio: closed forms, errors, oracle") {
    // Identical constant-probability traces: numerator ln 2, denominator
    // (1/2) ln 2, ratio exactly 2.
    const PairedTrace constant = make_paired({kLnHalf, kLnHalf}, {kLnHalf, kLnHalf});
    CHECK(baseline_ppl_ratio(constant).value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(baseline_ppl_ratio(constant).orientation == Orientation::lower_is_machine);

    // Deterministic general model: numerator zero.
    const PairedTrace zero_top = make_paired({0.0, 0.0}, {kLnHalf, kLnHalf});
    CHECK(baseline_ppl_ratio(zero_top).value == 0.0);

    CHECK_THROWS_AS(baseline_ppl_ratio(make_paired({-1.0}, {-1.0, -1.0})), AlignmentError);
    CHECK_THROWS_AS(baseline_ppl_ratio(make_paired({-1.0, -1.0}, {0.0, 0.0})),
                    DegenerateCrossEntropy);

    std::mt19937_64 rng(44);
    const PairedTrace pair = make_paired(random_logprobs(rng, 17), random_logprobs(rng, 17));
    CHECK(baseline_ppl_ratio(pair).value ==
          doctest::Approx(-oracles::mean_logprob_seq(pair.general) /
                          oracles::mean_cross_entropy_seq(pair))
              .epsilon(1e-12));
}

TEST_CASE("baseline_entropy wraps mean_token_entropy with its orientation") {
    const TokenTrace trace = make_trace({kLnHalf, -1.5, -0.25});
    const DetectorScore score = baseline_entropy(trace);
    CHECK(score.method == Method::entropy);
    CHECK(score.value == mean_token_entropy(trace));
    CHECK(score.orientation == Orientation::lower_is_machine);
}

TEST_CASE("trace validation rejects contract violations") {
    TokenTrace bad = make_trace({-1.0, 0.5});
    CHECK_THROWS_AS(validate(bad), InvariantViolation);

    TokenTrace bad_rank = make_trace({-1.0}, "m", {0});
    CHECK_THROWS_AS(validate(bad_rank), InvariantViolation);

    TokenTrace empty;
    empty.model_id = "m";
    CHECK_THROWS_AS(validate(empty), InvariantViolation);

    CHECK_NOTHROW(validate(make_trace({-1.0, 0.0}, "m", {2, 1})));
}
