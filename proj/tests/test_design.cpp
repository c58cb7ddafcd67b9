#include <doctest.h>

#include <random>

#include "sdarray/design.hpp"

using namespace sdarray;

namespace {

const CarrierSpec kCarrier(10e9);
const double kLambda = kCarrier.wavelength();
const DipoleSpec kHalfWave{0.5 * kLambda, kLambda / 2000, 5.7e7};
const Direction kEndfire{kPi / 2, 0.0};

ImpedanceSet coupled_set(std::size_t n, double d_over_lambda, DipoleSpec el = kHalfWave) {
  return input_impedance_matrix(ArrayGeometry::uniform_linear(n, d_over_lambda * kLambda, el), kCarrier);
}

double eta_gain(const ImpedanceSet& set, const ComplexVector& zm, const ComplexVector& i) {
  const PowerBreakdown p = power_breakdown(set, zm, i);
  return p.matching_efficiency() * array_gain(set, kEndfire, i);
}

}  // namespace

TEST_CASE("single element under conjugate matching") {
  const ImpedanceSet set = coupled_set(1, 0.25);
  const ComplexVector i = optimal_currents(set, {}, kEndfire, 0.2);
  CHECK(std::abs(i[0]) == doctest::Approx(std::sqrt(0.2 / set.z_in()(0, 0).real())).epsilon(1e-14));
  const auto za = active_impedances(set, i);
  CHECK(std::abs(za[0] - set.z_in()(0, 0)) < 1e-12);
}

TEST_CASE("uncoupled optimum follows the closed form") {
  for (std::size_t n : {1, 3, 7}) {
    const ImpedanceSet set = uncoupled(ArrayGeometry::uniform_linear(n, kLambda / 4, kHalfWave), kCarrier);
    const double ri = set.z_real(0, 0);
    const ComplexVector a = steering_vector(set.geometry, kEndfire, kCarrier.wavenumber());
    const ComplexVector want = std::sqrt(0.2 / (n * (set.r_loss + ri))) * a;
    const ComplexVector got = optimal_currents(set, {}, kEndfire, 0.2);
    CHECK((got - want).norm() <= 1e-13 * want.norm());

    const ExcitationSolution s = solve_excitation(set, {}, kEndfire, 0.2);
    CHECK(s.powers.radiated == doctest::Approx(0.5 * ri / (set.r_loss + ri) * 0.2).epsilon(1e-12));
    CHECK(s.powers.loss == doctest::Approx(0.5 * set.r_loss / (set.r_loss + ri) * 0.2).epsilon(1e-12));
    CHECK(s.gain == doctest::Approx(kZ0 / (kPi * (set.r_loss + ri)) * n).epsilon(1e-12));
    for (std::size_t p = 0; p < n; ++p) {
      CHECK(std::abs(*s.z_active[p] - set.z_in()(0, 0)) < 1e-12);
    }
  }
}

TEST_CASE("active-conjugate matching is reflectionless and halves the power") {
  for (double d : {0.1, 0.25, 0.4}) {
    const ImpedanceSet set = coupled_set(6, d);
    const ExcitationSolution s = solve_excitation(set, {}, kEndfire, 0.2);
    CHECK(s.reflection.cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(s.powers.total == doctest::Approx(2.0 * s.powers.input).epsilon(1e-12));
    CHECK(s.powers.total == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(s.efficiency == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.gain == doctest::Approx(g_max(set, kEndfire)).epsilon(1e-10));
    CHECK(s.voltages.isApprox(set.z_in() * s.currents));
  }
}

TEST_CASE("active impedance of a symmetric pair") {
  const ImpedanceSet set = coupled_set(2, 0.3);
  const ComplexVector i = ComplexVector::Constant(2, cd(0.3, -0.1));
  const ComplexVector za = active_impedances(set, i);
  CHECK(std::abs(za[0] - (set.r_loss + set.z(0, 0) + set.z(0, 1))) < 1e-12);

  ComplexVector dead = i;
  dead[1] = 0.0;
  CHECK_THROWS_AS(active_impedances(set, dead), DomainError);
  const auto entries = active_impedance_entries(set, dead);
  CHECK(entries[0].has_value());
  CHECK_FALSE(entries[1].has_value());
}

TEST_CASE("reflection coefficient") {
  CHECK(std::abs(reflection_coefficient(cd(73, 42), cd(73, -42))) == 0.0);
  CHECK(reflection_coefficient(73.0, 50.0).real() == doctest::Approx(23.0 / 123.0));
  CHECK(std::abs(reflection_coefficient(73.0, 73.0)) == 0.0);
  CHECK_THROWS_AS(reflection_coefficient(cd(1, 1), cd(-1, -1)), DomainError);
}

TEST_CASE("power bookkeeping") {
  const ImpedanceSet set = coupled_set(3, 0.25);
  const ComplexVector zm = set.z_in().diagonal().conjugate();
  const PowerBreakdown zero = power_breakdown(set, zm, ComplexVector::Zero(3));
  CHECK(zero.total == 0.0);
  CHECK(zero.matching_efficiency() == 0.0);

  DipoleSpec pec = kHalfWave;
  pec.conductivity = std::numeric_limits<double>::infinity();
  const ImpedanceSet lossless = coupled_set(3, 0.25, pec);
  const ComplexVector i = ComplexVector::Constant(3, cd(0.1, 0.05));
  const PowerBreakdown p = power_breakdown(lossless, zm, i);
  CHECK(p.loss == 0.0);
  CHECK(p.input == p.radiated);
}

TEST_CASE("gain") {
  DipoleSpec pec = kHalfWave;
  pec.conductivity = std::numeric_limits<double>::infinity();
  const ImpedanceSet one = coupled_set(1, 0.25, pec);
  const double g1 = array_gain(one, kEndfire, ComplexVector::Ones(1));
  CHECK(g1 == doctest::Approx(kZ0 / (kPi * 73.08)).epsilon(1e-3));
  CHECK(to_db(g1) == doctest::Approx(2.15).epsilon(2e-3));

  const ImpedanceSet set = coupled_set(5, 0.3);
  const ComplexVector i = optimal_currents(set, {}, kEndfire, 0.2);
  CHECK(array_gain(set, kEndfire, cd(3.0, -2.0) * i) == doctest::Approx(array_gain(set, kEndfire, i)).epsilon(1e-12));
  CHECK_THROWS_AS(array_gain(set, kEndfire, ComplexVector::Zero(5)), DomainError);
}

TEST_CASE("headline endfire gain") {
  const DipoleSpec el{0.9 * kLambda, kLambda / 200, 5.7e7};
  const ImpedanceSet set = coupled_set(10, 1 / 2.5, el);
  CHECK(std::abs(to_db(g_max(set, kEndfire)) - 16.98) <= 0.3);
}

TEST_CASE("optimal excitation maximises eta * G under the budget") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> g;
  for (MatchMode mode : {MatchMode::active_conjugate, MatchMode::input_conjugate}) {
    const ImpedanceSet set = coupled_set(5, 0.25);
    const MatchSpec match{mode, {}};
    const ExcitationSolution best = solve_excitation(set, match, kEndfire, 0.2);
    const double optimum = best.efficiency * best.gain;
    // each perturbed excitation gets the loads its matching mode prescribes and
    // is rescaled to the same budget
    int beaten = 0;
    for (int t = 0; t < 1000; ++t) {
      ComplexVector delta(5);
      for (Eigen::Index k = 0; k < 5; ++k) delta[k] = {g(rng), g(rng)};
      ComplexVector i = best.currents + 1e-3 * best.currents.norm() / delta.norm() * delta;
      const ComplexVector zm = matching_impedances(set, match, i);
      i *= std::sqrt(0.2 / power_breakdown(set, zm, i).total);
      if (eta_gain(set, zm, i) > optimum * (1.0 + 1e-9)) ++beaten;
    }
    CHECK(beaten == 0);
  }
}

TEST_CASE("input-conjugate excitation meets the budget") {
  const ImpedanceSet set = coupled_set(6, 0.25);
  const ExcitationSolution s = solve_excitation(set, {MatchMode::input_conjugate, {}}, kEndfire, 0.2);
  CHECK(s.powers.total == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(s.efficiency < 0.5);
  CHECK(s.gain < g_max(set, kEndfire));
  for (Eigen::Index n = 0; n < 6; ++n) CHECK(std::abs(s.z_match[n] - std::conj(set.z_in()(n, n))) == 0.0);
}

TEST_CASE("custom matching") {
  const ImpedanceSet set = coupled_set(3, 0.25);
  MatchSpec m{MatchMode::custom, ComplexVector::Constant(3, cd(50.0, 0.0))};
  const ExcitationSolution s = solve_excitation(set, m, kEndfire, 0.2);
  CHECK(s.powers.total == doctest::Approx(0.2).epsilon(1e-12));
  m.z_match[1] = cd(-1.0, 0.0);
  CHECK_THROWS_AS(optimal_currents(set, m, kEndfire, 0.2), DomainError);
  m.z_match.resize(2);
  CHECK_THROWS_AS(optimal_currents(set, m, kEndfire, 0.2), DomainError);
  CHECK_THROWS_AS(optimal_currents(set, {}, kEndfire, 0.0), DomainError);
}

TEST_CASE("link budget") {
  const LinkSpec link{1e9, dbm_to_watts(-174.0), 0.2, 500.0, kEndfire};
  const LinkResult none = received_power_and_rate(link, kLambda, 0.0, 0.0);
  CHECK(none.received_power == 0.0);
  CHECK(none.rate == 0.0);

  LinkSpec twice = link;
  twice.range = 1000.0;
  const LinkResult r1 = received_power_and_rate(link, kLambda, 0.5, 25.0);
  const LinkResult r2 = received_power_and_rate(twice, kLambda, 0.5, 25.0);
  CHECK(r2.received_power == doctest::Approx(0.25 * r1.received_power).epsilon(1e-14));

  // the same arithmetic carried out in dB
  const double pr_dbm = 10 * std::log10(0.5 * 25.0) + 10 * std::log10(200.0) +
                        20 * std::log10(kLambda / (4 * kPi * 500.0));
  const double snr_db = pr_dbm - (-174.0 + 10 * std::log10(1e9));
  CHECK(watts_to_dbm(r1.received_power) == doctest::Approx(pr_dbm).epsilon(1e-12));
  CHECK(r1.rate == doctest::Approx(1e9 * std::log2(1.0 + std::pow(10.0, snr_db / 10.0))).epsilon(1e-12));

  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
  LinkSpec bad = link;
  bad.bandwidth = 0.0;
  CHECK_THROWS_AS(received_power_and_rate(bad, kLambda, 0.5, 1.0), DomainError);
}

TEST_CASE("no random budget-feasible excitation beats the optimum") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  for (MatchMode mode : {MatchMode::active_conjugate, MatchMode::input_conjugate}) {
    const ImpedanceSet set = coupled_set(4, 0.2);
    const MatchSpec match{mode, {}};
    const ExcitationSolution best = solve_excitation(set, match, kEndfire, 0.2);
    const double optimum = best.efficiency * best.gain;
    double top = 0.0;
    for (int t = 0; t < 1000; ++t) {
      ComplexVector i(4);
      for (Eigen::Index k = 0; k < 4; ++k) i[k] = {g(rng), g(rng)};
      const ComplexVector zm = matching_impedances(set, match, i);
      i *= std::sqrt(0.2 / power_breakdown(set, zm, i).total);
      top = std::max(top, eta_gain(set, zm, i));
    }
    CHECK(top <= optimum * (1.0 + 1e-9));
  }
}
