import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from swaphom import fock_sim as fs
from swaphom.exceptions import DimensionMismatchError, ValidationError
from swaphom.fock_sim import LOWER, UPPER, Mode, OccupationVector

S = 1 / math.sqrt(2)
GAUSSIAN_COINCIDENCE = 0.21510858763453855  # sigma = 1, centers 1.5 apart; quadrature oracle below


def occ(**counts):
    """occ(U0=1, D1=2) -> OccupationVector with (0,U):1 and (1,D):2."""
    return OccupationVector.of({Mode(int(k[1:]), k[0]): n for k, n in counts.items()})


def two_photons(a, b, d):
    return fs.product(fs.single_photon(a, UPPER, d), fs.single_photon(b, LOWER, d))


def random_fock_state(rng, d, max_photons=3, terms=5, paths=(UPPER, LOWER, "X")):
    """Normalized superposition of random Fock states with up to ``max_photons``."""
    acc = {}
    for _ in range(terms):
        state = fs.FockSuperposition.vacuum(d)
        for _ in range(rng.integers(1, max_photons + 1)):
            state = fs.apply_creation(state, Mode(int(rng.integers(d)), str(rng.choice(paths))))
        for o, a in state.terms.items():
            acc[o] = acc.get(o, 0) + a * complex(*rng.normal(size=2))
    norm = math.sqrt(sum(abs(a) ** 2 for a in acc.values()))
    return fs.FockSuperposition({o: a / norm for o, a in acc.items()}, d)


class TestOccupationVector:
    def test_canonical_order(self):
        a = OccupationVector.of({Mode(1, "D"): 1, Mode(0, "U"): 2})
        b = OccupationVector.of([(Mode(0, "U"), 2), (Mode(1, "D"), 1)])
        assert a == b and hash(a) == hash(b)
        assert a.total == 3
        assert a.on_path("U") == 2 and a.count(Mode(1, "D")) == 1 and a.count(Mode(0, "D")) == 0

    def test_from_modes_counts_repeats(self):
        assert OccupationVector.from_modes([Mode(0, "U")] * 2) == occ(U0=2)

    def test_zero_counts_are_vacuum(self):
        assert OccupationVector.of({Mode(0, "U"): 0, Mode(1, "D"): 1}) == occ(D1=1)
        with pytest.raises(ValidationError):
            OccupationVector.of({Mode(0, "U"): -1})


class TestSinglePhotonAndProduct:
    def test_trivial_photon(self):
        s = fs.single_photon([1], UPPER)
        assert s.terms == {occ(U0=1): 1}

    def test_superposition(self):
        s = fs.single_photon([S, S], LOWER)
        assert s.amplitude(occ(D0=1)) == pytest.approx(S)
        assert s.amplitude(occ(D1=1)) == pytest.approx(S)

    def test_renormalizes(self):
        assert fs.single_photon([2, 0], UPPER).terms == {occ(U0=1): 1}

    def test_zero_vector(self):
        with pytest.raises(ValidationError):
            fs.single_photon([0, 0], UPPER)

    def test_dimension_checked(self):
        with pytest.raises(DimensionMismatchError):
            fs.single_photon([1, 0], UPPER, internal_dim=3)

    def test_products(self):
        assert two_photons([1], [1], 1).terms == {occ(U0=1, D0=1): 1}
        assert two_photons([1, 0], [0, 1], 2).terms == {occ(U0=1, D1=1): 1}

    def test_product_on_shared_path(self):
        with pytest.raises(ValidationError):
            fs.product(fs.single_photon([1], UPPER), fs.single_photon([1], UPPER))

    def test_product_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            fs.product(fs.single_photon([1], UPPER), fs.single_photon([1, 0], LOWER))


class TestCreation:
    def test_from_vacuum(self):
        assert fs.apply_creation(fs.FockSuperposition.vacuum(), Mode(0, UPPER)).terms == {occ(U0=1): 1}

    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_sqrt_n_plus_one(self, n):
        state = fs.FockSuperposition({occ(U0=n): 1}, 1)
        out = fs.apply_creation(state, Mode(0, UPPER))
        assert out.terms == {occ(U0=n + 1): pytest.approx(math.sqrt(n + 1))}

    def test_distinct_modes_commute(self, rng):
        state = random_fock_state(rng, 2)
        a, b = Mode(0, UPPER), Mode(1, LOWER)
        ab = fs.apply_creation(fs.apply_creation(state, a), b)
        ba = fs.apply_creation(fs.apply_creation(state, b), a)
        assert ab.terms == ba.terms


class TestBeamSplitter:
    def test_single_photon_splits(self):
        out = fs.beam_splitter(fs.single_photon([0, 1], UPPER))
        assert out.amplitude(occ(U1=1)) == pytest.approx(S)
        assert out.amplitude(occ(D1=1)) == pytest.approx(S)
        out = fs.beam_splitter(fs.single_photon([1], LOWER))
        assert out.amplitude(occ(U0=1)) == pytest.approx(S)
        assert out.amplitude(occ(D0=1)) == pytest.approx(-S)

    @pytest.mark.parametrize("s", [0, 1, 2])
    def test_identical_photons_bunch(self, s):
        e = np.eye(3)[s]
        out = fs.beam_splitter(two_photons(e, e, 3))
        expected = fs.FockSuperposition({
            OccupationVector.of({Mode(s, UPPER): 2}): S,
            OccupationVector.of({Mode(s, LOWER): 2}): -S,
        }, 3)
        assert out.distance(expected) < 1e-12
        assert len(out.terms) == 2

    def test_distinguishable_photons(self):
        out = fs.beam_splitter(two_photons([1, 0], [0, 1], 2))
        stats = fs.detector_stats(out)
        assert stats.p_coincidence == pytest.approx(0.5, abs=1e-12)
        assert stats.p_upper_only == pytest.approx(0.25, abs=1e-12)

    def test_bypasses_other_paths(self):
        state = fs.product(fs.single_photon([1], UPPER), fs.single_photon([1], "X"))
        out = fs.beam_splitter(state)
        assert out.amplitude(occ(U0=1, X0=1)) == pytest.approx(S)
        assert out.amplitude(occ(D0=1, X0=1)) == pytest.approx(S)

    def test_same_path_rejected(self):
        with pytest.raises(ValidationError):
            fs.beam_splitter(fs.single_photon([1], UPPER), UPPER, UPPER)

    @pytest.mark.parametrize("reflect", [(1, 1, 0), (1, 2, 0), (0, 1)])
    def test_reflect_must_be_involution(self, reflect):
        with pytest.raises(ValidationError):
            fs.beam_splitter(fs.single_photon([1, 0, 0], UPPER), reflect=reflect)

    def test_reflect_on_upper_reflection_only(self):
        d = 5
        r = fs.oam_reflection(d)
        out = fs.beam_splitter(fs.single_photon(np.eye(d)[fs.oam_index(2, d)], UPPER), reflect=r)
        assert out.amplitude({Mode(fs.oam_index(-2, d), UPPER): 1}) == pytest.approx(S)
        assert out.amplitude({Mode(fs.oam_index(2, d), LOWER): 1}) == pytest.approx(S)
        out = fs.beam_splitter(fs.single_photon(np.eye(d)[fs.oam_index(2, d)], LOWER), reflect=r)
        assert out.amplitude({Mode(fs.oam_index(2, d), UPPER): 1}) == pytest.approx(S)
        assert out.amplitude({Mode(fs.oam_index(-2, d), LOWER): 1}) == pytest.approx(-S)

    @pytest.mark.parametrize("ell", [1, 2])
    def test_oam_photons_bunch_after_mirror(self, ell):
        d = 5
        up, down = fs.oam_index(ell, d), fs.oam_index(-ell, d)
        out = fs.beam_splitter(two_photons(np.eye(d)[up], np.eye(d)[down], d),
                               reflect=fs.oam_reflection(d))
        expected = fs.FockSuperposition({
            OccupationVector.of({Mode(down, UPPER): 2}): S,
            OccupationVector.of({Mode(up, LOWER): 2}): -S,
        }, d)
        assert out.distance(expected) < 1e-12
        assert fs.detector_stats(out).p_coincidence < 1e-12

    def test_reflect_callable(self):
        state = two_photons([0, 1, 0], [0, 0, 1], 3)
        a = fs.beam_splitter(state, reflect=lambda i: (0, 2, 1)[i])
        b = fs.beam_splitter(state, reflect=(0, 2, 1))
        assert a.distance(b) == 0


class TestPhases:
    def test_phase_shift(self):
        for n, sign in [(0, 1), (1, -1), (2, 1)]:
            state = fs.FockSuperposition({occ(U0=n, D0=1) if n else occ(D0=1): 1}, 1)
            out = fs.phase_shift(state, UPPER, math.pi)
            (amp,) = out.terms.values()
            assert amp == pytest.approx(sign, abs=1e-15)

    @pytest.mark.parametrize("na,nb,sign", [(1, 1, -1), (2, 1, 1), (0, 1, 1), (1, 3, -1)])
    def test_cross_phase(self, na, nb, sign):
        counts = {Mode(0, "A"): na, Mode(0, "B"): nb}
        state = fs.FockSuperposition({OccupationVector.of({m: n for m, n in counts.items() if n}): 1}, 1)
        (amp,) = fs.cross_phase(state, "A", "B").terms.values()
        assert amp == sign


class TestDetectors:
    def test_bunched_state(self):
        state = fs.FockSuperposition({occ(U0=2): S, occ(D0=2): -S}, 1)
        stats = fs.detector_stats(state)
        assert stats.p_upper_only == pytest.approx(0.5) and stats.p_lower_only == pytest.approx(0.5)
        assert stats.p_coincidence == 0 and stats.p_none == 0

    def test_coincidence_and_vacuum(self):
        assert fs.detector_stats(two_photons([1], [1], 1)).p_coincidence == 1
        assert fs.detector_stats(fs.FockSuperposition.vacuum()).p_none == 1

    def test_photon_counts(self):
        state = fs.FockSuperposition({occ(U0=2): S, occ(D0=2): -S}, 1)
        dist = fs.photon_count_distribution(state, [UPPER, LOWER])
        assert dist == {(0, 2): pytest.approx(0.5), (2, 0): pytest.approx(0.5)}


class TestSerialization:
    def test_round_trip(self, rng):
        state = random_fock_state(rng, 3)
        data = json.loads(json.dumps(state.to_json()))
        back = fs.FockSuperposition.from_json(data, 3)
        assert back.distance(state) == 0

    def test_format(self):
        data = fs.single_photon([1], UPPER).to_json()
        assert data == [{"occupations": [[0, "U", 1]], "amp": [1.0, 0.0]}]

    def test_label_outside_dimension(self):
        with pytest.raises(ValidationError):
            fs.FockSuperposition.from_json([{"occupations": [[2, "U", 1]], "amp": [1, 0]}], 2)

    def test_prunes_tiny_amplitudes(self):
        state = fs.FockSuperposition({occ(U0=1): 1, occ(D0=1): 1e-16}, 1)
        assert list(state.terms) == [occ(U0=1)]


class TestWavepackets:
    t = np.linspace(-40, 40, 100_001)
    dt = t[1] - t[0]

    @staticmethod
    def gaussian(t, center, sigma=1.0):
        # |xi|^2 is a normal density with standard deviation sigma
        return (2 * np.pi * sigma**2) ** -0.25 * np.exp(-((t - center) ** 2) / (4 * sigma**2))

    def test_identical(self):
        xi = self.gaussian(self.t, 0) * np.exp(0.3j * self.t)
        assert fs.wavepacket_coincidence(xi, xi, self.dt) < 1e-9

    def test_disjoint(self):
        xi1 = np.where(self.t < 0, 1.0, 0.0) / np.sqrt(40)
        xi2 = np.where(self.t > 0, 1.0, 0.0) / np.sqrt(40)
        xi1[self.t == -40] *= np.sqrt(2)
        xi2[self.t == 40] *= np.sqrt(2)
        assert abs(fs.wavepacket_coincidence(xi1, xi2, self.dt) - 0.5) < 1e-12

    def test_quadrature_oracle(self):
        # independent check of the frozen constant with adaptive quadrature
        overlap, _ = integrate.quad(lambda t: self.gaussian(t, 0) * self.gaussian(t, 1.5), -40, 40,
                                    epsabs=1e-14, epsrel=1e-14, points=[0, 1.5])
        assert abs((1 - overlap**2) / 2 - GAUSSIAN_COINCIDENCE) < 1e-12
        assert abs(GAUSSIAN_COINCIDENCE - (1 - math.exp(-1.5**2 / 4)) / 2) < 1e-12

    def test_offset_gaussians(self):
        p = fs.wavepacket_coincidence(self.gaussian(self.t, 0), self.gaussian(self.t, 1.5), self.dt)
        assert abs(p - GAUSSIAN_COINCIDENCE) < 1e-6

    def test_rejects_drift(self):
        xi = self.gaussian(self.t, 0)
        with pytest.raises(ValidationError):
            fs.wavepacket_coincidence(1.01 * xi, xi, self.dt)
        # drift inside tolerance is renormalized away
        assert fs.wavepacket_coincidence((1 + 1e-7) * xi, xi, self.dt) < 1e-12

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            fs.wavepacket_coincidence(np.ones(3), np.ones(4), 0.5)

    def test_csv(self, tmp_path):
        t = np.linspace(-10, 10, 2001)
        xi = self.gaussian(t, 0) * np.exp(0.5j * t)
        path = tmp_path / "xi.csv"
        rows = ["t,re,im"] + [f"{a:.17g},{b.real:.17g},{b.imag:.17g}" for a, b in zip(t, xi)]
        path.write_text("\n".join(rows) + "\n")
        samples, dt = fs.load_wavepacket_csv(path)
        assert dt == pytest.approx(0.01)
        np.testing.assert_allclose(samples, xi)

    def test_csv_nonuniform(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0,1\n1,1\n3,1\n")
        with pytest.raises(ValidationError):
            fs.load_wavepacket_csv(path)


class TestOam:
    def test_index_and_reflection(self):
        assert [fs.oam_index(ell, 5) for ell in range(-2, 3)] == [0, 1, 2, 3, 4]
        r = fs.oam_reflection(5)
        assert all(r[fs.oam_index(ell, 5)] == fs.oam_index(-ell, 5) for ell in range(-2, 3))

    def test_even_dimension(self):
        with pytest.raises(ValidationError):
            fs.oam_reflection(4)


# -- properties ----------------------------------------------------------------

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, d=st.integers(1, 3))
def test_elements_conserve_norm_and_photon_number(seed, d):
    rng = np.random.default_rng(seed)
    state = random_fock_state(rng, d)
    for out in (fs.beam_splitter(state), fs.phase_shift(state, UPPER, rng.uniform(0, 7)),
                fs.cross_phase(state, UPPER, LOWER), fs.beam_splitter(state, UPPER, "X")):
        assert abs(out.norm_sq() - 1) < 1e-12
        assert out.photon_numbers() == state.photon_numbers()


@settings(max_examples=40, deadline=None)
@given(seed=seeds, d=st.integers(1, 3))
def test_beam_splitter_is_an_involution(seed, d):
    state = random_fock_state(np.random.default_rng(seed), d)
    assert fs.beam_splitter(fs.beam_splitter(state)).distance(state) < 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=seeds, d=st.integers(1, 4))
def test_identical_photons_never_coincide(seed, d):
    rng = np.random.default_rng(seed)
    s = rng.normal(size=d) + 1j * rng.normal(size=d)
    out = fs.beam_splitter(two_photons(s, s, d))
    assert fs.detector_stats(out).p_coincidence < 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_detector_stats_sum_to_one(seed):
    stats = fs.detector_stats(random_fock_state(np.random.default_rng(seed), 2))
    values = list(stats.to_dict().values())
    assert abs(sum(values) - 1) < 1e-12
    assert all(0 <= v <= 1 for v in values)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, d=st.integers(1, 4))
def test_two_photon_coincidence_law(seed, d):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=d) + 1j * rng.normal(size=d)
    b = rng.normal(size=d) + 1j * rng.normal(size=d)
    ov = abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real)
    stats = fs.detector_stats(fs.beam_splitter(two_photons(a, b, d)))
    assert abs(stats.p_coincidence - (1 - ov) / 2) < 1e-12
