import math
from itertools import product

import numpy as np
import pytest
from scipy.integrate import quad

from hpnfft.errors import BandwidthError, InvalidCutoffError, InvalidSizeError
from hpnfft.ewald import (
    ChargedSystem,
    EwaldParams,
    build_fluorite,
    build_rocksalt,
    default_params,
    erfc,
    ewald_energy,
    ewald_nfft_config,
    madelung_constant,
    real_space_energy,
    reciprocal_energy,
    structure_factor,
    structure_factor_cube,
    to_samples,
)

from conftest import rel


# -- erfc -------------------------------------------------------------------------

def test_erfc_values():
    assert erfc(0.0) == 1.0
    oracle = 2 / math.sqrt(math.pi) * quad(lambda t: math.exp(-t * t), 1.0, np.inf, epsabs=1e-15)[0]
    assert erfc(1.0) == pytest.approx(oracle, abs=1e-12)
    assert erfc(1.0) == pytest.approx(0.15729920705, abs=1e-11)
    assert erfc(6.0) < 1e-15
    xs = np.linspace(0, 8, 200)
    assert np.all(np.diff(erfc(xs)) < 0) or np.all(np.diff(erfc(xs))[erfc(xs)[1:] > 0] < 0)


# -- crystals -------------------------------------------------------------------------

def test_fluorite_unit_cell():
    sys = build_fluorite(1)
    assert sys.n_ions == 12
    assert sys.charges.sum() == 0
    assert (sys.charges == 2).sum() == 4 and (sys.charges == -1).sum() == 8
    assert sys.ions_per_molecule == 3 and sys.valencies == (2, 1)


@pytest.mark.parametrize("c", [1, 2, 3, 5])
def test_fluorite_is_neutral(c):
    sys = build_fluorite(c)
    assert sys.n_ions == 12 * c ** 3
    assert abs(sys.charges.sum()) < 1e-12
    assert np.all((sys.positions >= 0) & (sys.positions < sys.box_length))


def test_fluorite_full_scale_box():
    sys = build_fluorite(32)
    assert sys.n_ions == 393216
    assert sys.box_length == pytest.approx(73.90, abs=5e-3)


def test_fluorite_nearest_pair_distance():
    sys = build_fluorite(2)
    L = sys.box_length
    cat = sys.positions[sys.charges > 0]
    an = sys.positions[sys.charges < 0]
    d = cat[:, None] - an[None]
    d -= L * np.rint(d / L)
    assert np.sqrt((d ** 2).sum(-1)).min() == pytest.approx(1.0, rel=1e-14)


def test_bad_cell_count():
    with pytest.raises(InvalidSizeError):
        build_fluorite(0)


def test_net_charge_rejected_by_default():
    with pytest.raises(ValueError):
        ChargedSystem([[0, 0, 0]], [1.0], 2.0)


# -- real space -------------------------------------------------------------------------

def brute_force_real(sys, alpha, rc, shells=3):
    """Pair loop over explicit image shells -shells..shells in each axis."""
    L = sys.box_length
    total = 0.0
    for n in product(range(-shells, shells + 1), repeat=3):
        shift = np.array(n) * L
        for i in range(sys.n_ions):
            for j in range(sys.n_ions):
                if i == j and n == (0, 0, 0):
                    continue
                r = np.linalg.norm(sys.positions[j] - sys.positions[i] + shift)
                if r < rc:
                    total += sys.charges[i] * sys.charges[j] * math.erfc(alpha * r) / r
    return 0.5 * total


def test_real_space_matches_brute_force_shells():
    sys = build_fluorite(1)
    p = EwaldParams(1.5, 5.0, 4)  # rc well beyond L/2, needs image shells
    assert rel(real_space_energy(sys, p), brute_force_real(sys, 1.5, 5.0)) < 1e-10


def test_real_space_pair_at_large_alpha():
    L, r, alpha = 20.0, 1.3, 4.0
    sys = ChargedSystem([[1, 1, 1], [1 + r, 1, 1]], [1.0, -1.0], L)
    p = EwaldParams(alpha, L / 2, 1, image_shells=False)
    assert real_space_energy(sys, p) == pytest.approx(-math.erfc(alpha * r) / r, rel=1e-12)


def test_real_space_zero_charges():
    sys = ChargedSystem(np.random.default_rng(0).uniform(0, 3, (5, 3)), np.zeros(5), 3.0)
    assert real_space_energy(sys, EwaldParams(1.0, 1.5, 2)) == 0.0
    assert reciprocal_energy(sys, EwaldParams(1.0, 1.5, 2)) == 0.0


def test_cutoff_beyond_half_box_needs_images():
    sys = build_fluorite(1)
    with pytest.raises(InvalidCutoffError):
        real_space_energy(sys, EwaldParams(1.5, sys.box_length, 3, image_shells=False))


def test_real_space_worker_count():
    sys = build_fluorite(3)
    p = default_params(sys, 1.5)
    assert real_space_energy(sys, p, workers=3) == pytest.approx(real_space_energy(sys, p), rel=1e-13)


# -- structure factor -----------------------------------------------------------------

def test_structure_factor_at_zero_is_net_charge():
    sys = build_fluorite(2)
    assert abs(structure_factor(sys, [[0, 0, 0]])[0]) < 1e-12


def test_single_charge_structure_factor():
    sys = ChargedSystem([[0, 0, 0]], [2.5], 3.0, allow_net_charge=True)
    k = np.array([[1, 2, 3], [-4, 0, 1], [0, 0, 0]])
    assert np.allclose(structure_factor(sys, k, "direct"), 2.5, atol=1e-14)
    assert np.allclose(structure_factor(sys, k, "nfft"), 2.5, rtol=1e-10)


def test_structure_factor_nfft_matches_direct():
    sys = build_fluorite(2)
    cube = structure_factor_cube(sys, 6, "direct")
    fast = structure_factor_cube(sys, 6, "nfft", ewald_nfft_config(6, "kaiser_bessel", 2.0, 8))
    assert rel(fast, cube) < 1e-6
    kvecs = np.array(list(product(range(-6, 7), repeat=3)))
    assert rel(structure_factor(sys, kvecs, "direct"), cube.ravel()) < 1e-13


def test_structure_factor_outside_bandwidth():
    sys = build_fluorite(1)
    with pytest.raises(BandwidthError):
        structure_factor(sys, [[9, 0, 0]], "nfft", ewald_nfft_config(4))
    with pytest.raises(BandwidthError):
        structure_factor_cube(sys, 6, "nfft", ewald_nfft_config(4))


def test_samples_in_unit_box():
    x, q = to_samples(build_fluorite(2))
    assert np.all((x >= -0.5) & (x < 0.5))
    assert q.dtype == np.complex128


# -- reciprocal space and totals ------------------------------------------------------------

def test_reciprocal_nfft_matches_direct():
    sys = build_fluorite(2)
    p = EwaldParams(1.5, 4.0, 6)
    direct = reciprocal_energy(sys, p, "direct")
    fast = reciprocal_energy(sys, p, "nfft", ewald_nfft_config(6, m=8))
    assert rel(fast, direct) < 1e-6


def test_single_charge_reciprocal_tail_is_monotone():
    # every reciprocal term is nonnegative, so growing kmax approaches the
    # limit from below and the increments shrink
    sys = ChargedSystem([[0.3, 0.2, 0.1]], [1.0], 3.0, allow_net_charge=True)
    vals = [reciprocal_energy(sys, EwaldParams(1.5, 1.5, k)) for k in range(1, 12)]
    steps = np.diff(vals)
    assert np.all(steps >= -1e-15)  # converged tail is at roundoff level
    big = steps[steps > 1e-13]
    assert len(big) >= 4 and np.all(big[1:] < big[:-1])
    assert abs(steps[-1]) < 1e-14


def test_single_charge_with_background_is_alpha_independent():
    # lattice of one charge plus neutralising background: the Ewald split
    # must not depend on alpha once the background term is added
    L = 3.0
    sys = ChargedSystem([[0.3, 0.2, 0.1]], [1.0], L, allow_net_charge=True)
    totals = []
    for alpha in (1.0, 1.5, 2.5):
        e = ewald_energy(sys, default_params(sys, alpha))
        totals.append(e.total - math.pi / (2 * alpha ** 2 * L ** 3))
    assert max(totals) - min(totals) < 1e-12
    # simple-cubic Wigner constant, 2.837297479...
    assert -2 * L * totals[0] == pytest.approx(2.837297479, abs=1e-9)


def test_translation_invariance():
    sys = build_fluorite(2)
    p = default_params(sys, 1.5)
    base = ewald_energy(sys, p).total
    cell = 4 / math.sqrt(3)
    for shift in ([cell, 0, 0], [0, cell, 2 * cell], [0.37, -0.81, 1.23]):
        assert ewald_energy(sys.translated(shift), p).total == pytest.approx(base, rel=1e-10)


def test_alpha_invariance_of_total_energy():
    sys = build_fluorite(2)
    totals = [ewald_energy(sys, default_params(sys, a), "nfft").total for a in (1.2, 1.4, 1.6, 1.8)]
    assert (max(totals) - min(totals)) / abs(np.mean(totals)) < 1e-3


def test_default_params_are_converged():
    sys = build_fluorite(2)
    p = default_params(sys, 1.5)
    L = sys.box_length
    assert erfc(p.alpha * p.real_cutoff) < 1e-12
    assert math.exp(-(math.pi * p.kmax / (p.alpha * L)) ** 2) < 1e-12
    assert math.exp(-(math.pi * (p.kmax - 1) / (p.alpha * L)) ** 2) >= 1e-12


def evjen_rocksalt(R):
    """Madelung sum of rock salt over a charge-neutral cube with Evjen weights."""
    a = np.arange(-R, R + 1)
    i, j, k = np.meshgrid(a, a, a, indexing="ij")
    w = np.ones_like(i, dtype=float)
    for c in (i, j, k):
        w = w * np.where(np.abs(c) == R, 0.5, 1.0)
    r = np.sqrt(i ** 2 + j ** 2 + k ** 2, dtype=float)
    q = np.where((i + j + k) % 2 == 0, 1.0, -1.0)
    mask = r > 0
    return -np.sum((w * q)[mask] / r[mask])


def test_rocksalt_matches_evjen_sum():
    oracle = evjen_rocksalt(24)
    assert oracle == pytest.approx(1.7476, abs=1e-4)
    sys = build_rocksalt(2)
    assert madelung_constant(sys, default_params(sys, 1.5), "nfft") == pytest.approx(oracle, abs=1e-5)


def test_fluorite_direct_mode_unit_cell():
    sys = build_fluorite(1)
    assert madelung_constant(sys, default_params(sys, 1.5), "direct") == pytest.approx(2.5194, abs=2e-3)
