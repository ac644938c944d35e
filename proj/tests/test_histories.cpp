#include "doctest.h"

#include <cmath>
#include <complex>

#include "qtc/histories.hpp"
#include "qtc/linalg.hpp"

using namespace qtc;

namespace {

const double kSqrt2 = std::sqrt(2.0);

Matrix zp() { return projector(ket_z_plus()); }
Matrix zm() { return projector(ket_z_minus()); }
Matrix xp() { return projector(ket_x_plus()); }
Matrix xm() { return projector(ket_x_minus()); }

HistoryVector elementary(const TimeGrid& grid, const BridgingSet& bridging,
                         std::vector<Matrix> ops) {
  return HistoryVector(grid, bridging, {HistoryVector::Term{1.0, std::move(ops)}});
}

/// The Example-1 family of four entangled histories over three times with
/// trivial dynamics; operators listed earliest time first.
struct ExampleOne {
  TimeGrid grid = TimeGrid::uniform(3, 2);
  BridgingSet bridging = BridgingSet::trivial(2, 2);
  HistoryVector h1{grid, bridging, {{kSqrt2, {zp(), xp(), zp()}}, {kSqrt2, {zp(), xm(), zm()}}}};
  HistoryVector h2{grid, bridging, {{kSqrt2, {zp(), xp(), zm()}}, {kSqrt2, {zp(), xm(), zp()}}}};
  HistoryVector h3{grid, bridging, {{kSqrt2, {zm(), xp(), zp()}}, {kSqrt2, {zm(), xm(), zm()}}}};
  HistoryVector h4{grid, bridging, {{kSqrt2, {zm(), xp(), zm()}}, {kSqrt2, {zm(), xm(), zp()}}}};
  HistoryVector phi{grid, bridging, {{1.0, {zp(), zp(), zp()}}}};
};

HistoryVector random_history(const TimeGrid& grid, const BridgingSet& bridging, int terms,
                             Rng& rng) {
  std::vector<HistoryVector::Term> list;
  for (int t = 0; t < terms; ++t) {
    std::vector<Matrix> ops;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      ops.push_back(projector(random_state(grid.dim, rng)));
    }
    list.push_back({Complex(rng.gaussian(), rng.gaussian()), std::move(ops)});
  }
  return HistoryVector(grid, bridging, std::move(list));
}

}  // namespace

TEST_CASE("TimeGrid validation") {
  CHECK_THROWS_AS(TimeGrid({}, 2), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid({"t0", "t0"}, 2), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid({"t0", "t1"}, 0), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid({"t0", "t1"}, kMaxDim + 1), std::invalid_argument);
  const TimeGrid g = TimeGrid::uniform(3, 2);
  CHECK(g.index_of("t1") == 1);
  CHECK_THROWS_AS(g.index_of("nope"), std::invalid_argument);
}

TEST_CASE("BridgingSet rejects non-unitary steps and composes transfers") {
  Matrix bad(2, 2);
  bad << 1, 1, 0, 1;
  CHECK_THROWS_AS(BridgingSet({bad}), std::invalid_argument);

  Rng rng(311);
  const Matrix u0 = random_unitary(2, rng);
  const Matrix u1 = random_unitary(2, rng);
  const BridgingSet b({u0, u1});
  CHECK(max_abs_diff(b.transfer(0, 2), u1 * u0) <= 1e-10);
  CHECK(max_abs_diff(b.transfer(0, 2), b.transfer(1, 2) * b.transfer(0, 1)) <= 1e-10);
  CHECK(max_abs_diff(b.transfer(2, 0), b.transfer(0, 2).adjoint()) <= 1e-10);
  CHECK(max_abs_diff(b.transfer(1, 1), identity(2)) <= 1e-12);
}

TEST_CASE("chain operator of a persistent projector chain") {
  const TimeGrid grid = TimeGrid::uniform(2, 2);
  const BridgingSet bridging = BridgingSet::trivial(1, 2);
  const HistoryVector h = elementary(grid, bridging, {zp(), zp()});
  CHECK(max_abs_diff(chain_operator(h), zp()) <= 1e-12);
  CHECK(weight(h) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("chain operator of Example 1's H1 is |x-><z+|") {
  ExampleOne ex;
  const Matrix expected = ket_x_minus() * ket_z_plus().adjoint();
  CHECK(max_abs_diff(chain_operator(ex.h1), expected) <= 1e-12);
  CHECK(weight(ex.h1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("chain operator of the single z+ x+ z+ chain") {
  const TimeGrid grid = TimeGrid::uniform(3, 2);
  const BridgingSet bridging = BridgingSet::trivial(2, 2);
  const HistoryVector h = elementary(grid, bridging, {zp(), xp(), zp()});
  CHECK(max_abs_diff(chain_operator(h), 0.5 * zp()) <= 1e-12);
  CHECK(weight(h) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("Example 1 probabilities and orthogonality") {
  ExampleOne ex;
  const Complex overlap = inner_product(ex.phi, ex.h1);
  CHECK(std::abs(overlap - Complex(1.0 / kSqrt2, 0.0)) <= 1e-12);
  CHECK(std::norm(overlap) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(inner_product(ex.h1, ex.h2)) <= 1e-12);
}

TEST_CASE("inner product rejects mismatched frames") {
  const TimeGrid g2 = TimeGrid::uniform(2, 2);
  const TimeGrid g3 = TimeGrid::uniform(3, 2);
  const HistoryVector a = elementary(g2, BridgingSet::trivial(1, 2), {zp(), zp()});
  const HistoryVector b = elementary(g3, BridgingSet::trivial(2, 2), {zp(), zp(), zp()});
  CHECK_THROWS_AS(inner_product(a, b), std::invalid_argument);

  Rng rng(5);
  const BridgingSet other({random_unitary(2, rng)});
  const HistoryVector c = elementary(g2, other, {zp(), zp()});
  CHECK_THROWS_AS(inner_product(a, c), std::invalid_argument);
}

TEST_CASE("Example 1 equivalence identity") {
  ExampleOne ex;
  const HistoryVector superposition =
      (Complex(1.0 / kSqrt2) * ex.h1).plus(Complex(1.0 / kSqrt2) * ex.h2);
  CHECK(equivalent(superposition, ex.phi));
}

TEST_CASE("orthogonal chains are not equivalent") {
  const TimeGrid grid = TimeGrid::uniform(2, 2);
  const BridgingSet bridging = BridgingSet::trivial(1, 2);
  const HistoryVector a = elementary(grid, bridging, {zp(), zp()});
  const HistoryVector b = elementary(grid, bridging, {zm(), zm()});
  CHECK_FALSE(equivalent(a, b));
}

TEST_CASE("tau-GHZ identity holds for several amplitude pairs") {
  ExampleOne ex;
  const HistoryVector plus_chain = elementary(ex.grid, ex.bridging, {zp(), zp(), zp()});
  const HistoryVector minus_chain = elementary(ex.grid, ex.bridging, {zm(), zm(), zm()});

  for (const auto& [alpha, beta] :
       {std::pair<Complex, Complex>{1.0, 0.0},
        std::pair<Complex, Complex>{0.0, 1.0},
        std::pair<Complex, Complex>{1.0 / kSqrt2, 1.0 / kSqrt2},
        std::pair<Complex, Complex>{Complex(0.6, 0.0), Complex(0.0, 0.8)}}) {
    const Complex a = alpha / kSqrt2;
    const Complex b = beta / kSqrt2;
    const HistoryVector ghz = (a * ex.h1).plus(a * ex.h2).plus(b * ex.h3).plus(b * ex.h4);
    const HistoryVector target = (alpha * plus_chain).plus(beta * minus_chain);
    CHECK(equivalent(ghz, target));
  }
}

TEST_CASE("normalize rescales by the inverse root weight") {
  const TimeGrid grid = TimeGrid::uniform(3, 2);
  const BridgingSet bridging = BridgingSet::trivial(2, 2);
  const HistoryVector h = elementary(grid, bridging, {zp(), xp(), zp()});
  const HistoryVector n = normalize(h);
  CHECK(weight(n) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(n.terms().front().coeff - Complex(2.0, 0.0)) <= 1e-12);

  ExampleOne ex;
  const HistoryVector same = normalize(ex.h1);
  CHECK(equivalent(same, ex.h1));
}

TEST_CASE("normalize rejects a null chain") {
  const TimeGrid grid = TimeGrid::uniform(2, 2);
  const BridgingSet bridging = BridgingSet::trivial(1, 2);
  const HistoryVector h = elementary(grid, bridging, {zm(), zp()});  // z- then z+
  CHECK(weight(h) <= 1e-12);
  CHECK_THROWS_WITH_AS(normalize(h), "null history: inconsistent chain", std::domain_error);
}

TEST_CASE("odot joins elementary segments") {
  const TimeGrid g1({"a"}, 2);
  const BridgingSet b0 = BridgingSet::trivial(0, 2);
  const HistoryVector late = elementary(g1, b0, {zp()});
  const HistoryVector early = elementary(TimeGrid({"b"}, 2), b0, {zp()});
  const HistoryVector joined = odot(late, early, identity(2));
  REQUIRE(joined.grid().size() == 2);
  CHECK(joined.grid().labels[0] == "b");
  CHECK(joined.grid().labels[1] == "a");
  CHECK(weight(joined) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("odot is bilinear over term lists") {
  const TimeGrid g1({"a"}, 2);
  const BridgingSet b0 = BridgingSet::trivial(0, 2);
  const HistoryVector late(g1, b0, {{1.0, {zp()}}, {1.0, {zm()}}});
  const HistoryVector early = elementary(TimeGrid({"b"}, 2), b0, {xp()});
  const HistoryVector joined = odot(late, early, identity(2));
  CHECK(joined.terms().size() == 2);
}

TEST_CASE("odot relabels on collision") {
  const TimeGrid g({"t0"}, 2);
  const BridgingSet b0 = BridgingSet::trivial(0, 2);
  const HistoryVector late = elementary(g, b0, {zp()});
  const HistoryVector early = elementary(g, b0, {zp()});
  const HistoryVector joined = odot(late, early, identity(2));
  CHECK(joined.grid().labels == std::vector<std::string>{"t0", "t1"});
}

TEST_CASE("odot builds the temporally entangled two-segment history") {
  // A detector-state segment appended after an entangled two-time segment.
  const BridgingSet b0 = BridgingSet::trivial(0, 2);
  const BridgingSet b1 = BridgingSet::trivial(1, 2);
  const HistoryVector late = elementary(TimeGrid({"t3"}, 2), b0, {xm()});
  const HistoryVector entangled(
      TimeGrid({"t1", "t2"}, 2), b1,
      {{1.0 / kSqrt2, {zp(), zp()}}, {1.0 / kSqrt2, {zm(), zm()}}});
  const HistoryVector joined = odot(late, entangled, identity(2));
  CHECK(joined.grid().size() == 3);
  CHECK(joined.terms().size() == 2);
  for (const auto& term : joined.terms()) {
    CHECK(max_abs_diff(term.ops.back(), xm()) <= 1e-12);
  }
}

TEST_CASE("odot rejects dimension mismatches") {
  const BridgingSet b0_2 = BridgingSet::trivial(0, 2);
  const BridgingSet b0_3 = BridgingSet::trivial(0, 3);
  const HistoryVector a = elementary(TimeGrid({"a"}, 2), b0_2, {zp()});
  const HistoryVector b = elementary(TimeGrid({"b"}, 3), b0_3, {identity(3)});
  CHECK_THROWS_AS(odot(a, b, identity(2)), std::invalid_argument);
  CHECK_THROWS_AS(odot(a, a, identity(3)), std::invalid_argument);
}

TEST_CASE("measurement injection conjugates per-time operators") {
  Rng rng(99);
  const Vector psi1 = random_state(2, rng);
  const Vector psi2 = random_state(2, rng);
  const TimeGrid grid = TimeGrid::uniform(2, 2);
  const BridgingSet bridging = BridgingSet::trivial(1, 2);
  const HistoryVector h = elementary(grid, bridging, {projector(psi1), projector(psi2)});

  const auto injected = inject_measurement(h, {pauli_x(), pauli_y()});
  const Matrix expected_t0 = pauli_x() * projector(psi1) * pauli_x().adjoint();
  const Matrix expected_t1 = pauli_y() * projector(psi2) * pauli_y().adjoint();
  const auto& ops = injected.history.terms().front().ops;
  CHECK(max_abs_diff(ops[0], expected_t0) <= 1e-12);
  CHECK(max_abs_diff(ops[1], expected_t1) <= 1e-12);
  CHECK(weight(injected.history) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(injected.normalization > 0.0);
}

TEST_CASE("identity injection leaves a history unchanged") {
  ExampleOne ex;
  const auto injected = inject_measurement(ex.h1, {identity(2), identity(2), identity(2)});
  CHECK(equivalent(injected.history, ex.h1));
  CHECK(injected.normalization == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("projector injection keeps only the matching branch") {
  const TimeGrid grid = TimeGrid::uniform(2, 2);
  const BridgingSet bridging = BridgingSet::trivial(1, 2);
  const HistoryVector bell(grid, bridging,
                           {{1.0 / kSqrt2, {zp(), zp()}}, {1.0 / kSqrt2, {zm(), zm()}}});
  const auto injected = inject_measurement(bell, {zp(), identity(2)});
  const HistoryVector survivor = elementary(grid, bridging, {zp(), zp()});
  CHECK(equivalent(injected.history, survivor));
}

TEST_CASE("annihilating injection is rejected") {
  const TimeGrid grid = TimeGrid::uniform(2, 2);
  const BridgingSet bridging = BridgingSet::trivial(1, 2);
  const HistoryVector h = elementary(grid, bridging, {zp(), zp()});
  CHECK_THROWS_WITH_AS(inject_measurement(h, {zm(), identity(2)}),
                       "measurement annihilates history", std::domain_error);
}

TEST_CASE("history expectation on the Example 1 superposition") {
  ExampleOne ex;
  const std::vector<std::pair<double, HistoryVector>> observable = {{1.0, ex.h1}, {-1.0, ex.h2}};
  CHECK(history_expectation(observable, ex.phi) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(history_expectation({{1.0, ex.h1}}, ex.h1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(history_expectation(observable, ex.h2) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("history expectation validates its inputs") {
  ExampleOne ex;
  const HistoryVector tilted = normalize((Complex(1.0) * ex.h1).plus(Complex(0.5) * ex.h2));
  CHECK_THROWS_AS(history_expectation({{1.0, ex.h1}, {1.0, tilted}}, ex.phi),
                  std::invalid_argument);
  CHECK_THROWS_AS(history_expectation({{1.0, ex.h1}}, Complex(2.0) * ex.phi),
                  std::invalid_argument);
}

TEST_CASE("Example 1 family is consistent") {
  ExampleOne ex;
  const auto report = consistency_check({ex.h1, ex.h2, ex.h3, ex.h4});
  CHECK(report.consistent);
  CHECK(report.max_off_diagonal <= 1e-12);
  CHECK(report.additivity_deviation <= 1e-9);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(report.gram(i, i) - Complex(1.0, 0.0)) <= 1e-12);
  }
}

TEST_CASE("overlapping chains are inconsistent") {
  const TimeGrid grid = TimeGrid::uniform(2, 2);
  const BridgingSet bridging = BridgingSet::trivial(1, 2);
  const HistoryVector a = elementary(grid, bridging, {zp(), zp()});
  const HistoryVector b = elementary(grid, bridging, {xp(), zp()});
  const auto report = consistency_check({a, b});
  CHECK_FALSE(report.consistent);
  CHECK(std::abs(report.gram(0, 1) - Complex(0.5, 0.0)) <= 1e-12);
}

TEST_CASE("a single normalized history is consistent") {
  ExampleOne ex;
  CHECK(consistency_check({ex.h1}).consistent);
}

TEST_CASE("completeness of the z-basis projector family") {
  const TimeGrid grid = TimeGrid::uniform(2, 2);
  const BridgingSet bridging = BridgingSet::trivial(1, 2);
  std::vector<HistoryVector> family;
  for (const Matrix& late : {zp(), zm()}) {
    for (const Matrix& early : {zp(), zm()}) {
      family.push_back(elementary(grid, bridging, {early, late}));
    }
  }
  const auto report = completeness_check(family, {1.0, 1.0, 1.0, 1.0});
  CHECK(report.identity_chain);
  CHECK(report.identity_deviation <= 1e-12);
  CHECK_FALSE(report.coefficients_normalized);  // sum |c|^2 = 4
}

TEST_CASE("completeness conditions for the Example 1 family split") {
  // With coefficients (1/2,...) the coefficient normalization holds but the
  // chain sum is I/sqrt2, not I; with (1/sqrt2,...) the chain sum is I but
  // the normalization fails. The two conditions are reported separately.
  ExampleOne ex;
  const std::vector<HistoryVector> family = {ex.h1, ex.h2, ex.h3, ex.h4};

  const auto half = completeness_check(family, {0.5, 0.5, 0.5, 0.5});
  CHECK(half.coefficients_normalized);
  CHECK_FALSE(half.identity_chain);
  CHECK(half.identity_deviation == doctest::Approx(1.0 - 1.0 / kSqrt2).epsilon(1e-9));

  const Complex c = 1.0 / kSqrt2;
  const auto root = completeness_check(family, {c, c, c, c});
  CHECK(root.identity_chain);
  CHECK_FALSE(root.coefficients_normalized);
  CHECK(root.norm_deviation == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("a single chain is not complete") {
  const TimeGrid grid = TimeGrid::uniform(2, 2);
  const BridgingSet bridging = BridgingSet::trivial(1, 2);
  const HistoryVector h = elementary(grid, bridging, {zp(), zp()});
  const auto report = completeness_check({h}, {1.0});
  CHECK_FALSE(report.identity_chain);
  CHECK(report.coefficients_normalized);
  CHECK_FALSE(report.complete());
}

TEST_CASE("weight equals the self inner product along the same path") {
  Rng rng(2024);
  const TimeGrid grid = TimeGrid::uniform(3, 2);
  std::vector<Matrix> steps = {random_unitary(2, rng), random_unitary(2, rng)};
  const BridgingSet bridging(steps);
  for (int trial = 0; trial < 20; ++trial) {
    const HistoryVector h = random_history(grid, bridging, 1 + trial % 3, rng);
    CHECK(weight(h) == inner_product(h, h).real());
    CHECK(weight(h) >= 0.0);
  }
}

TEST_CASE("inner product is sesquilinear") {
  Rng rng(31337);
  const TimeGrid grid = TimeGrid::uniform(3, 2);
  const BridgingSet bridging = BridgingSet::trivial(2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const HistoryVector h1 = random_history(grid, bridging, 2, rng);
    const HistoryVector h2 = random_history(grid, bridging, 2, rng);
    const HistoryVector h3 = random_history(grid, bridging, 2, rng);
    const Complex a(rng.gaussian(), rng.gaussian());
    const Complex b(rng.gaussian(), rng.gaussian());
    const Complex lhs = inner_product(h1, (a * h2).plus(b * h3));
    const Complex rhs = a * inner_product(h1, h2) + b * inner_product(h1, h3);
    CHECK(std::abs(lhs - rhs) <= 1e-10);
  }
}

TEST_CASE("chain operator is linear in the coefficients") {
  Rng rng(404);
  const TimeGrid grid = TimeGrid::uniform(4, 2);
  std::vector<Matrix> steps = {random_unitary(2, rng), random_unitary(2, rng),
                               random_unitary(2, rng)};
  const BridgingSet bridging(steps);
  for (int trial = 0; trial < 10; ++trial) {
    const HistoryVector h1 = random_history(grid, bridging, 2, rng);
    const HistoryVector h2 = random_history(grid, bridging, 3, rng);
    const Complex a(rng.gaussian(), rng.gaussian());
    const Complex b(rng.gaussian(), rng.gaussian());
    const Matrix lhs = chain_operator((a * h1).plus(b * h2));
    const Matrix rhs = a * chain_operator(h1) + b * chain_operator(h2);
    CHECK(max_abs_diff(lhs, rhs) <= 1e-12);
  }
}

TEST_CASE("repeated projector chains persist under their own measurement") {
  Rng rng(777);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t k = 2 + static_cast<std::size_t>(trial % 4);
    const Vector b = random_state(2, rng);
    const Matrix p = projector(b);
    const TimeGrid grid = TimeGrid::uniform(k, 2);
    const BridgingSet bridging = BridgingSet::trivial(k - 1, 2);
    const HistoryVector h(grid, bridging,
                          {HistoryVector::Term{1.0, std::vector<Matrix>(k, p)}});
    CHECK(weight(h) == doctest::Approx(1.0).epsilon(1e-10));

    // The dichotomic observable with b as its +1 eigenstate.
    const Matrix m = 2.0 * p - identity(2);
    const auto injected = inject_measurement(h, std::vector<Matrix>(k, m));
    CHECK(equivalent(injected.history, h));
    const auto projected = inject_measurement(h, std::vector<Matrix>(k, p));
    CHECK(equivalent(projected.history, h));
  }
}

TEST_CASE("equivalence is an equivalence relation within tolerance") {
  ExampleOne ex;
  const HistoryVector a = ex.phi;
  // The same physical history written as a two-term superposition.
  const HistoryVector b =
      (Complex(1.0 / kSqrt2) * ex.h1).plus(Complex(1.0 / kSqrt2) * ex.h2);
  // And rotated by a global phase.
  const HistoryVector c = Complex(std::polar(1.0, 0.7)) * b;

  CHECK(equivalent(a, a));
  CHECK(equivalent(a, b));
  CHECK(equivalent(b, a));
  CHECK(equivalent(b, c));
  CHECK(equivalent(a, c, 3e-9));
}

TEST_CASE("json round trip preserves a history") {
  Rng rng(321);
  const TimeGrid grid({"early", "mid", "late"}, 2);
  std::vector<Matrix> steps = {random_unitary(2, rng), random_unitary(2, rng)};
  const BridgingSet bridging(steps);
  const HistoryVector h = random_history(grid, bridging, 3, rng);

  const nlohmann::json j = to_json(h);
  const HistoryVector back = history_from_json(j);
  CHECK(back.grid() == h.grid());
  CHECK(back.terms().size() == h.terms().size());
  CHECK(equivalent(back, h, 1e-10));
  CHECK(std::abs(inner_product(back, h) - inner_product(h, h)) <= 1e-10);
}

TEST_CASE("superpose enforces a shared frame") {
  const TimeGrid grid = TimeGrid::uniform(2, 2);
  const BridgingSet trivial = BridgingSet::trivial(1, 2);
  Rng rng(8);
  const BridgingSet rotated({random_unitary(2, rng)});
  const ElementaryHistory a(grid, trivial, {zp(), zp()});
  const ElementaryHistory b(grid, rotated, {zm(), zm()});
  CHECK_THROWS_AS(HistoryVector::superpose({{1.0, a}, {1.0, b}}), std::invalid_argument);
  CHECK_NOTHROW(HistoryVector::superpose({{1.0, a}, {-1.0, a}}));
}
