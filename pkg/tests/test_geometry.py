import numpy as np
import pytest

from blockadesim import geometry
from blockadesim.geometry import (
    GeometryError,
    analytic_splitting_pdf,
    coupling_matrix,
    kappa_bar,
    min_pair_splitting,
    sample_positions,
    splitting_distribution,
    splitting_ks,
)


def test_positions_inside_box():
    geom = sample_positions(2, (10.0, 10.0, 10.0), seed=1)
    assert geom.positions.shape == (2, 3)
    assert (geom.positions >= 0).all() and (geom.positions <= 10).all()


def test_positions_deterministic():
    a = sample_positions(7, (5.0, 3.0, 2.0), seed=42)
    b = sample_positions(7, (5.0, 3.0, 2.0), seed=42)
    assert np.array_equal(a.positions, b.positions)
    c = sample_positions(7, (5.0, 3.0, 2.0), seed=43)
    assert not np.array_equal(a.positions, c.positions)


def test_positions_validation():
    with pytest.raises(ValueError):
        sample_positions(1, (1, 1, 1), seed=0)
    with pytest.raises(ValueError):
        sample_positions(2, (0, 1, 1), seed=0)


def test_exclusion_radius_enforced():
    geom = sample_positions(30, (10, 10, 10), seed=3, exclusion_radius=1.5)
    d = np.sqrt(
        ((geom.positions[:, None] - geom.positions[None, :]) ** 2).sum(-1)
    )
    np.fill_diagonal(d, np.inf)
    assert d.min() >= 1.5


def test_exclusion_radius_infeasible():
    with pytest.raises(GeometryError):
        sample_positions(50, (2, 2, 2), seed=0, exclusion_radius=1.9,
                         max_tries=200)


def test_two_atom_coupling():
    geom = geometry.EnsembleGeometry(
        positions=np.array([[0.0, 0, 0], [1.0, 0, 0]]), box=(2, 1, 1), seed=0
    )
    cm = coupling_matrix(geom, c3=50.0)
    assert cm.kappa[0, 1] == pytest.approx(50.0)
    geom2 = geometry.EnsembleGeometry(
        positions=np.array([[0.0, 0, 0], [2.0, 0, 0]]), box=(3, 1, 1), seed=0
    )
    cm2 = coupling_matrix(geom2, c3=50.0)
    assert cm2.kappa[0, 1] == pytest.approx(50.0 / 8.0)


def test_coupling_matrix_against_pair_loop():
    geom = sample_positions(10, (8, 6, 4), seed=11)
    cm = coupling_matrix(geom, c3=1234.5)
    for i in range(10):
        for j in range(10):
            if i == j:
                assert cm.kappa[i, j] == 0.0
            else:
                r = np.linalg.norm(geom.positions[i] - geom.positions[j])
                assert cm.kappa[i, j] == pytest.approx(1234.5 / r**3, rel=1e-12)


def test_coupling_invariant_kappa_r3():
    geom = sample_positions(8, (5, 5, 5), seed=2)
    cm = coupling_matrix(geom, c3=77.0)
    d = np.sqrt(((geom.positions[:, None] - geom.positions[None, :]) ** 2).sum(-1))
    iu, ju = np.triu_indices(8, 1)
    np.testing.assert_allclose(cm.kappa[iu, ju] * d[iu, ju] ** 3, 77.0, rtol=1e-12)


def test_coupling_scaling_with_box_shrink():
    geom = sample_positions(6, (4, 4, 4), seed=5)
    cm = coupling_matrix(geom, c3=10.0)
    shrunk = geometry.EnsembleGeometry(
        positions=geom.positions * 0.5, box=(2, 2, 2), seed=5
    )
    cm2 = coupling_matrix(shrunk, c3=10.0)
    iu, ju = np.triu_indices(6, 1)
    np.testing.assert_allclose(
        cm2.kappa[iu, ju], cm.kappa[iu, ju] * 8.0, rtol=1e-12
    )


def test_coincident_atoms_rejected():
    geom = geometry.EnsembleGeometry(
        positions=np.zeros((2, 3)), box=(1, 1, 1), seed=0
    )
    with pytest.raises(GeometryError):
        coupling_matrix(geom, c3=1.0)


def test_kappa_bar():
    assert kappa_bar(1000.0, 1000.0) == pytest.approx(1.0)
    assert kappa_bar(500.0, 1000.0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        kappa_bar(0.0, 1.0)


def test_min_pair_splitting_explicit():
    kappa = np.array([[0, 3, 7], [3, 0, 5], [7, 5, 0]], dtype=float)
    cm = geometry.CouplingMatrix(kappa=kappa, c3=1.0)
    assert min_pair_splitting(cm) == 3.0


def test_min_pair_splitting_two_atoms():
    geom = sample_positions(2, (4, 4, 4), seed=9)
    cm = coupling_matrix(geom, c3=3.0)
    assert min_pair_splitting(cm) == pytest.approx(cm.kappa[0, 1])


def test_min_pair_splitting_brute_force():
    geom = sample_positions(50, (9, 9, 9), seed=13)
    cm = coupling_matrix(geom, c3=2.5)
    best = min(
        cm.kappa[i, j] for i in range(50) for j in range(i + 1, 50)
    )
    assert min_pair_splitting(cm) == pytest.approx(best, rel=1e-14)


def test_min_splitting_lower_bound():
    # worst case is the box diagonal
    geom = sample_positions(20, (6, 5, 4), seed=17)
    cm = coupling_matrix(geom, c3=11.0)
    diag = np.sqrt(6.0**2 + 5.0**2 + 4.0**2)
    assert min_pair_splitting(cm) >= 11.0 / diag**3


def test_analytic_pdf_values():
    assert analytic_splitting_pdf(10.0) == pytest.approx(7.28e-3, rel=2e-3)
    # ratio at two points equals the formula ratio
    def direct(x):
        return np.sqrt(2) * np.pi * np.exp(-np.pi**3 / (18 * x * x)) / (6 * x * x)
    assert analytic_splitting_pdf(1.0) / analytic_splitting_pdf(2.0) == \
        pytest.approx(direct(1.0) / direct(2.0), rel=1e-12)
    # vanishes toward zero, positive elsewhere
    assert analytic_splitting_pdf(1e-3) < 1e-300
    xs = np.geomspace(0.05, 50, 300)
    vals = analytic_splitting_pdf(xs)
    assert (vals > 0).all()
    # single interior maximum
    d = np.diff(vals)
    sign_changes = np.sum(np.diff(np.sign(d)) != 0)
    assert sign_changes == 1
    # large-x tail reaches the 1/x^2 form
    tail = np.sqrt(2) * np.pi / (6 * 100.0**2)
    assert analytic_splitting_pdf(100.0) == pytest.approx(tail, rel=1e-3)
    with pytest.raises(ValueError):
        analytic_splitting_pdf(-1.0)


def test_histogram_reproducible():
    h1 = splitting_distribution(200, 2, (10, 10, 10), c3=1000.0, seed=7)
    h2 = splitting_distribution(200, 2, (10, 10, 10), c3=1000.0, seed=7)
    assert np.array_equal(h1.counts, h2.counts)
    assert np.array_equal(h1.samples, h2.samples)
    assert h1.counts.sum() == h1.n_samples
    assert (np.diff(h1.bin_edges) > 0).all()


def test_config_samples_are_pure_in_seed_and_index():
    # configuration k is a pure function of (seed, k): evaluating a chunk
    # or a single spawned child reproduces the serial batch
    batch = geometry._config_positions(10, 3, (4, 4, 4), seed=77)
    child7 = np.random.SeedSequence(77).spawn(10)[7]
    alone = np.random.default_rng(child7).uniform(0, 1, size=(3, 3)) * 4.0
    np.testing.assert_array_equal(batch[7], alone)


def test_single_config_histogram():
    h = splitting_distribution(1, 2, (10, 10, 10), c3=1000.0, seed=1)
    assert h.n_samples == 1
    assert h.counts.sum() == 1


def test_all_pairs_statistic_counts():
    h = splitting_distribution(50, 4, (10, 10, 10), c3=1000.0, seed=3,
                               statistic="all-pairs")
    assert h.n_samples == 50 * 6


def test_c3_cancels_in_x():
    h1 = splitting_distribution(100, 2, (10, 10, 10), c3=1.0, seed=5)
    h2 = splitting_distribution(100, 2, (10, 10, 10), c3=1e6, seed=5)
    np.testing.assert_allclose(h1.samples, h2.samples, rtol=1e-12)


def test_ks_machinery_against_inverse_cdf_samples():
    # sampling from the analytic pdf itself must give a tiny KS distance
    window = (0.2, 20.0)
    grid = np.geomspace(*window, 20001)
    pdf = analytic_splitting_pdf(grid)
    cdf = np.concatenate([[0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    u = (np.arange(20000) + 0.5) / 20000
    x = np.interp(u, cdf, grid)
    assert splitting_ks(x, window) < 0.01


def test_ks_detects_wrong_distribution():
    rng = np.random.default_rng(0)
    assert splitting_ks(rng.uniform(0.2, 20.0, 5000)) > 0.2
