"""Compiled and pure-Python kernels must agree bit-for-bit."""

import numpy as np
import pytest

from cellflood import _kernels_py, kernels

from oracles import brute_regional_minima_count

compiled = pytest.importorskip("cellflood._kernels", reason="extension not built")


def surfaces(seed, shape=(24, 31)):
    rng = np.random.default_rng(seed)
    kind = seed % 3
    if kind == 0:
        return rng.uniform(0, 1, shape)
    if kind == 1:
        # quantized: many exact plateaus and ties
        return np.round(rng.uniform(0, 1, shape) * 6) / 6.0
    base = rng.uniform(0, 1, shape)
    base[rng.uniform(size=shape) < 0.3] = 0.0  # large zero plateau
    return base


@pytest.mark.parametrize("seed", range(20))
def test_backends_agree(seed):
    elev = surfaces(seed)
    seeds_py, n_py = _kernels_py.regional_minima(elev)
    seeds_cy, n_cy = compiled.regional_minima(elev)
    assert n_py == n_cy
    np.testing.assert_array_equal(seeds_py, seeds_cy)

    out_py = _kernels_py.flood(elev, seeds_py)
    out_cy = compiled.flood(elev, seeds_cy.astype(np.int32))
    np.testing.assert_array_equal(out_py, out_cy)


@pytest.mark.parametrize("seed", range(8))
def test_minima_count_matches_brute_force(seed):
    elev = surfaces(seed, shape=(15, 17))
    _, n = kernels.regional_minima(elev)
    assert n == brute_regional_minima_count(elev)


def test_minima_label_order_is_raster():
    elev = np.array([
        [0.5, 0.5, 0.9, 0.1],
        [0.9, 0.9, 0.9, 0.9],
        [0.2, 0.9, 0.3, 0.3],
    ])
    labels, n = kernels.regional_minima(elev)
    assert n == 4
    # first pixels encountered in raster order: (0,0) plateau, (0,3), (2,0), (2,2)
    assert labels[0, 0] == labels[0, 1] == 1
    assert labels[0, 3] == 2
    assert labels[2, 0] == 3
    assert labels[2, 2] == labels[2, 3] == 4


def test_flood_covers_plateau_image():
    elev = np.full((5, 8), 0.4)
    seeds, n = kernels.regional_minima(elev)
    assert n == 1
    labels = kernels.flood(elev, seeds)
    assert (labels == 1).all()


def test_single_basin_monotone_ramp():
    elev = np.tile(np.linspace(0, 1, 12), (6, 1))
    seeds, n = kernels.regional_minima(elev)
    assert n == 1
    labels = kernels.flood(elev, seeds)
    assert (labels == 1).all()


def test_env_var_forces_python_backend():
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "import cellflood; print(cellflood.KERNEL_BACKEND)"],
        env={"PATH": "/usr/bin:/bin", "CELLFLOOD_PURE_PYTHON": "1"},
        capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
