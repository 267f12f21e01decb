import itertools

import numpy as np
import pytest

from polair.air import (
    AirEstimate,
    air_corollary1,
    air_corollary2_mc,
    air_corollary4,
    air_discrete_mc,
    air_discrete_paired_mc,
    air_gaussian_paired_mc,
    air_synthetic_mc,
    air_theorem1,
    capacity_perfect,
    mi_discrete_mc,
    mi_gaussian_given_H,
    synthetic_estimates,
)
from polair.channel import ChannelParams, Constellation, make_constellation
from polair.estimators import EstimatorSpec
from polair.linalg import dagger, fro_norm, haar_unitary, sample_cgauss

LN2 = np.log(2.0)


def random_complex(shape, rng, scale=1.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


class TestCapacityPerfect:
    def test_unit_snr(self):
        assert capacity_perfect(2, 1.0).value == pytest.approx(2.0, abs=1e-12)

    def test_ten_snr(self):
        # high-precision evaluation of 2*log2(11)
        assert capacity_perfect(2, 10.0).value == pytest.approx(6.91886323727459, abs=1e-4)

    def test_vanishing_snr(self):
        value = capacity_perfect(2, 1e-12).value
        assert 0 < value < 1e-11

    def test_invalid(self):
        with pytest.raises(ValueError):
            capacity_perfect(2, 0.0)


class TestMiGaussian:
    def test_unitary_channel_equals_capacity(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            U = haar_unitary(2, rng)
            mi = mi_gaussian_given_H(U, 10.0 * np.eye(2)).value
            assert mi == pytest.approx(capacity_perfect(2, 10.0).value, abs=1e-10)

    def test_zero_channel(self):
        assert mi_gaussian_given_H(np.zeros((2, 2)), np.eye(2)).value == pytest.approx(0.0, abs=1e-12)

    def test_rank_one_channel(self):
        # |I + H^dag H Q| = |diag(2, 1)| = 2 for H = diag(1, 0), Q = I
        assert mi_gaussian_given_H(np.diag([1.0, 0.0]), np.eye(2)).value == pytest.approx(1.0, abs=1e-12)

    def test_non_psd_rejected(self):
        with pytest.raises(ValueError):
            mi_gaussian_given_H(np.eye(2), -np.eye(2))


class TestTheorem1:
    def test_perfect_estimate_reduces_to_mi(self):
        rng = np.random.default_rng(1)
        U = haar_unitary(2, rng)
        got = air_theorem1(U, U, 5.0 * np.eye(2), 1.0).value
        assert got == pytest.approx(capacity_perfect(2, 5.0).value, abs=1e-10)

    def test_unitary_pair_matches_trace_form(self):
        # for unitary H and H_hat with Q = eta I the bound collapses to
        # n log2(1+eta) - (eta/ln 2) tr(E^dag E)
        rng = np.random.default_rng(2)
        eta = 7.0
        for _ in range(20):
            H = haar_unitary(2, rng)
            H_hat = haar_unitary(2, rng)
            E = H - H_hat
            expected = 2 * np.log2(1 + eta) - (eta / LN2) * np.trace(dagger(E) @ E).real
            got = air_theorem1(H, H_hat, eta * np.eye(2), 1.0).value
            assert got == pytest.approx(expected, abs=1e-9)

    def test_never_exceeds_matched_mi(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            H = random_complex((2, 2), rng)
            H_hat = H + random_complex((2, 2), rng, scale=0.3)
            Q = 3.0 * np.eye(2)
            assert air_theorem1(H, H_hat, Q, 1.0).value <= mi_gaussian_given_H(H, Q).value + 1e-9


class TestCorollary1:
    def test_perfect_estimate(self):
        U = haar_unitary(2, np.random.default_rng(4))
        assert air_corollary1(U, U, 10.0).value == pytest.approx(capacity_perfect(2, 10.0).value, abs=1e-10)

    def test_zero_estimate_gives_zero(self):
        # symbolic evaluation: log|I| - (eta/ln2) n + (eta/ln2) n = 0
        U = haar_unitary(2, np.random.default_rng(5))
        assert air_corollary1(U, np.zeros((2, 2)), 10.0).value == pytest.approx(0.0, abs=1e-10)

    def test_specializes_theorem1(self):
        rng = np.random.default_rng(6)
        eta = 4.0
        for _ in range(1000):
            U = haar_unitary(2, rng)
            H_hat = U + random_complex((2, 2), rng, scale=0.2)
            a = air_corollary1(U, H_hat, eta).value
            b = air_theorem1(U, H_hat, eta * np.eye(2), 1.0).value
            assert abs(a - b) <= 1e-10 * max(1.0, abs(b))

    def test_nonunitary_channel_rejected(self):
        with pytest.raises(ValueError):
            air_corollary1(2 * np.eye(2), np.eye(2), 1.0)


class TestCorollary4:
    def test_zero_error(self):
        assert air_corollary4(2, 10.0, np.zeros((2, 2))).value == pytest.approx(
            capacity_perfect(2, 10.0).value, abs=1e-12
        )

    def test_reference_value(self):
        # 2 log2(11) - (10/ln2) * 0.05 = 6.197515...
        got = air_corollary4(2, 10.0, 0.025 * np.eye(2)).value
        assert got == pytest.approx(6.1976, abs=1e-3)

    def test_monotone_in_trace(self):
        values = [air_corollary4(2, 10.0, t * np.eye(2)).value for t in (0.0, 0.01, 0.05, 0.2)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_matches_corollary1_for_unitary_estimate(self):
        rng = np.random.default_rng(7)
        eta = 6.0
        for _ in range(200):
            U = haar_unitary(2, rng)
            H_hat = haar_unitary(2, rng)
            E = U - H_hat
            single_sample = air_corollary4(2, eta, dagger(E) @ E).value
            assert air_corollary1(U, H_hat, eta).value == pytest.approx(single_sample, abs=1e-10)

    def test_non_psd_rejected(self):
        with pytest.raises(ValueError):
            air_corollary4(2, 1.0, -np.eye(2))


class TestCorollary2MonteCarlo:
    def test_perfect_stub(self):
        params = ChannelParams.from_eta_db(2, 10.0)
        U = haar_unitary(2, np.random.default_rng(8))
        est = air_corollary2_mc(U, "perfect", params, 8, 1000, np.random.default_rng(9))
        assert est.value == pytest.approx(capacity_perfect(2, params.eta).value, abs=1e-12)
        assert est.std_error == 0.0

    def test_ls_below_capacity(self):
        params = ChannelParams.from_eta_db(2, 10.0)
        U = haar_unitary(2, np.random.default_rng(10))
        est = air_corollary2_mc(U, EstimatorSpec("ls"), params, 8, 4000, np.random.default_rng(11))
        cap = capacity_perfect(2, params.eta).value
        assert est.value < cap
        # the dominant penalty is (eta/ln2) tr(R_E) with tr(R_E) = n^2/(eta L)
        rough_gap = (params.eta / LN2) * (4 / (params.eta * 8))
        assert cap - est.value == pytest.approx(rough_gap, rel=0.35)

    def test_rotation_invariance_with_spherical_error(self):
        # spherically symmetric synthetic error: identical average AIR for
        # the identity channel and random Haar channels
        eta, e2, trials = 10.0, 1e-2, 20_000
        baseline = air_synthetic_mc(np.eye(2), e2, "general", eta, trials, np.random.default_rng(100))
        rng = np.random.default_rng(12)
        for i in range(3):
            U = haar_unitary(2, rng)
            other = air_synthetic_mc(U, e2, "general", eta, trials, np.random.default_rng(200 + i))
            margin = 3 * np.hypot(baseline.std_error, other.std_error)
            assert abs(baseline.value - other.value) <= margin


class TestSyntheticModels:
    def test_unitary_model_outputs_unitary(self):
        U = haar_unitary(2, np.random.default_rng(13))
        H_hat = synthetic_estimates(U, 1e-2, "unitary", 50, np.random.default_rng(14))
        gram_err = np.abs(H_hat @ dagger(H_hat) - np.eye(2)).max()
        assert gram_err < 1e-12

    def test_general_model_error_scale(self):
        # tr E[E^dag E] should equal n * (2 n^2) * e2
        n, e2 = 2, 1e-2
        U = np.eye(n)
        H_hat = synthetic_estimates(U, e2, "general", 100_000, np.random.default_rng(15))
        E = U - H_hat
        tr = np.mean(np.sum(np.abs(E) ** 2, axis=(1, 2)))
        assert tr == pytest.approx(n * 2 * n**2 * e2, rel=0.02)

    def test_zero_error_returns_channel(self):
        U = haar_unitary(2, np.random.default_rng(16))
        H_hat = synthetic_estimates(U, 0.0, "general", 3, np.random.default_rng(17))
        assert np.array_equal(H_hat[0], U)


def scalar_awgn_mi_quadrature(points, sigma2):
    """Independent 1-D oracle for the discrete-input complex AWGN MI.

    For a real constellation the imaginary noise dimension cancels in the
    information density, leaving a real integral with per-dimension noise
    variance sigma2/2, evaluated here by trapezoid quadrature.
    """
    points = np.asarray(points, dtype=float)
    var = sigma2 / 2.0
    span = np.abs(points).max() + 8 * np.sqrt(var)
    u = np.linspace(-span, span, 20_001)
    pdf = lambda c: np.exp(-((u - c) ** 2) / (2 * var)) / np.sqrt(2 * np.pi * var)
    cond = np.array([pdf(c) for c in points])
    mix = cond.mean(axis=0)
    M = len(points)
    integrand = cond / M * np.log2(np.where(cond > 0, cond, 1.0) / mix)
    return float(np.trapezoid(integrand.sum(axis=0), u))


class TestDiscreteMi:
    def test_saturates_at_high_snr(self):
        params = ChannelParams.from_eta_db(2, 30.0)
        c = make_constellation("dp_qpsk", 2, params.power)
        H = haar_unitary(2, np.random.default_rng(18))
        est = mi_discrete_mc(H, c, params.sigma2, 20_000, np.random.default_rng(19))
        assert est.value == pytest.approx(4.0, abs=0.02)

    def test_vanishes_at_low_snr(self):
        params = ChannelParams.from_eta_db(2, -30.0)
        c = make_constellation("dp_qpsk", 2, params.power)
        H = haar_unitary(2, np.random.default_rng(20))
        est = mi_discrete_mc(H, c, params.sigma2, 20_000, np.random.default_rng(21))
        assert est.value == pytest.approx(0.0, abs=0.02)

    def test_matches_quadrature_oracle_for_binary_input(self):
        # 1-D channel, 2-point real constellation at eta = 1
        points = np.array([[1.0 + 0j], [-1.0 + 0j]])
        c = Constellation(kind="custom", n=1, power=1.0, points=points)
        oracle = scalar_awgn_mi_quadrature([1.0, -1.0], sigma2=1.0)
        est = mi_discrete_mc(np.eye(1), c, 1.0, 200_000, np.random.default_rng(22))
        assert est.value == pytest.approx(oracle, abs=0.01)

    def test_bounded(self):
        params = ChannelParams.from_eta_db(2, 5.0)
        c = make_constellation("dp_16qam", 2, params.power)
        H = haar_unitary(2, np.random.default_rng(23))
        est = mi_discrete_mc(H, c, params.sigma2, 5000, np.random.default_rng(24))
        assert -3 * est.std_error <= est.value <= np.log2(256) + 3 * est.std_error

    def test_requires_discrete(self):
        with pytest.raises(ValueError):
            mi_discrete_mc(np.eye(2), make_constellation("gaussian", 2, 2.0), 1.0, 2000, np.random.default_rng(0))


class TestDiscreteAir:
    def test_perfect_stub_matches_mi(self):
        params = ChannelParams.from_eta_db(2, 8.0)
        c = make_constellation("dp_qpsk", 2, params.power)
        air = air_discrete_mc("perfect", c, params, 8, 30_000, np.random.default_rng(25))
        H = haar_unitary(2, np.random.default_rng(26))
        mi = mi_discrete_mc(H, c, params.sigma2, 30_000, np.random.default_rng(27))
        margin = 3 * np.hypot(air.std_error, mi.std_error)
        assert abs(air.value - mi.value) <= margin

    def test_estimators_bounded_by_perfect_and_ordered(self):
        params = ChannelParams.from_eta_db(2, 10.0)
        c = make_constellation("dp_16qam", 2, params.power)
        out = air_discrete_paired_mc(c, params, 8, 20_000, np.random.default_rng(28), kinds=("ls", "kabsch", "perfect"))
        assert out["ls"].value <= out["perfect"].value
        assert out["kabsch"].value <= out["perfect"].value
        diff = out["kabsch-perfect"]
        assert diff.value <= 3 * diff.std_error
        ls_vs_kabsch = out["ls-kabsch"]
        assert -ls_vs_kabsch.value >= -3 * ls_vs_kabsch.std_error  # kabsch >= ls


class TestGaussianPaired:
    def test_kabsch_beats_ls(self):
        for eta_db in (0.0, 10.0, 20.0):
            params = ChannelParams.from_eta_db(2, eta_db)
            out = air_gaussian_paired_mc(params, 8, 5000, np.random.default_rng(29))
            diff = out["ls-kabsch"]
            assert -diff.value > 0

    def test_all_below_capacity(self):
        params = ChannelParams.from_eta_db(2, 12.0)
        out = air_gaussian_paired_mc(params, 8, 5000, np.random.default_rng(30), kinds=("ls", "kabsch", "perfect"))
        cap = capacity_perfect(2, params.eta).value
        for kind in ("ls", "kabsch"):
            assert out[kind].value <= cap + 3 * out[kind].std_error
        assert out["perfect"].value == pytest.approx(cap, abs=1e-12)


class TestAirEstimate:
    def test_serialization(self):
        est = AirEstimate(value=1.5, std_error=0.01, trials=1000, kind="monte_carlo")
        d = est.to_dict()
        assert d == {"value_bits": 1.5, "std_error": 0.01, "trials": 1000, "kind": "monte_carlo"}

    def test_mc_requires_trials(self):
        with pytest.raises(ValueError):
            AirEstimate(value=1.0, std_error=0.1, trials=10, kind="monte_carlo")

    def test_finite_value_required(self):
        with pytest.raises(ValueError):
            AirEstimate(value=float("nan"))


class TestFig2Shape:
    def test_interior_maximum_at_mid_error(self):
        # for e2 = 1e-2 the closed unitary-model curve peaks at
        # eta = 1/(n^2 e2) - 1 = 24 (13.8 dB), inside a 0-20 dB grid
        e2, n = 1e-2, 2
        grid_db = np.arange(0.0, 21.0)
        values = [
            air_corollary4(n, 10 ** (db / 10.0), (n * n * e2) * np.eye(n)).value for db in grid_db
        ]
        am = int(np.argmax(values))
        assert 0 < am < len(values) - 1

    def test_unimodal_over_wide_grid(self):
        # rises then falls: a single sign change of the discrete slope when
        # the grid brackets the analytic peak
        n = 2
        for e2 in (1e-3, 1e-2, 1e-1):
            grid_db = np.arange(-10.0, 40.0, 0.5)
            values = np.array(
                [air_corollary4(n, 10 ** (db / 10.0), (n * n * e2) * np.eye(n)).value for db in grid_db]
            )
            slopes_positive = np.diff(values) > 0
            switches = np.sum(np.abs(np.diff(slopes_positive.astype(int))))
            assert switches == 1

    def test_unitary_model_dominates_general(self):
        rng_seed = itertools.count(500)
        for e2 in (1e-3, 1e-2, 1e-1):
            for eta_db in (0.0, 10.0, 20.0):
                eta = 10 ** (eta_db / 10.0)
                unitary = air_corollary4(2, eta, (4 * e2) * np.eye(2)).value
                general = air_synthetic_mc(
                    np.eye(2), e2, "general", eta, 5000, np.random.default_rng(next(rng_seed))
                )
                assert unitary >= general.value - 3 * general.std_error
