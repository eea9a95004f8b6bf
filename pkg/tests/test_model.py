import json

import numpy as np
import pytest

from spindeph import model


def test_ring_coupling_n4():
    mat = model.build_coupling(model.NearestNeighborRing1D(j=2.5), 4)
    expected = np.zeros((4, 4))
    for a, b in ((0, 1), (1, 2), (2, 3), (3, 0)):
        expected[a, b] = expected[b, a] = 2.5
    assert np.array_equal(mat, expected)


def test_infinite_range_n4():
    mat = model.build_coupling(model.InfiniteRange(j=1.0), 4)
    off = ~np.eye(4, dtype=bool)
    assert np.all(mat[off] == 0.25)
    assert np.all(np.diag(mat) == 0.0)


def test_power_law_distance():
    # N=5, alpha=2: sites 0 and 2 sit at chord distance 2
    mat = model.build_coupling(model.PowerLawRing1D(j=1.0, alpha=2.0), 5)
    assert mat[0, 2] == pytest.approx(0.25, abs=0)


def test_torus_adjacency():
    mat = model.build_coupling(model.NearestNeighborTorus2D(side=3, j=1.0), 9)
    assert np.array_equal(mat, mat.T)
    # every site has exactly four neighbors
    assert np.all(mat.sum(axis=1) == 4.0)
    with pytest.raises(ValueError):
        model.build_coupling(model.NearestNeighborTorus2D(side=3, j=1.0), 8)


def test_builders_bitwise_symmetric():
    rng = np.random.default_rng(0)
    for m in (
        model.NearestNeighborRing1D(j=rng.uniform()),
        model.InfiniteRange(j=rng.uniform()),
        model.PowerLawRing1D(j=rng.uniform(), alpha=1.7),
        model.PowerLawRing1D(j=rng.uniform(), alpha=2.2, kac_normalization=True),
    ):
        mat = model.build_coupling(m, 7)
        assert np.array_equal(mat, mat.T)


def test_ring_too_small():
    with pytest.raises(ValueError):
        model.build_coupling(model.NearestNeighborRing1D(), 2)


def test_enumeration_order_spin_half():
    cfgs = list(model.enumerate_configs(2, 1))
    assert [c.twice_values for c in cfgs] == [(1, 1), (1, -1), (-1, 1), (-1, -1)]


def test_enumeration_order_spin_one():
    cfgs = list(model.enumerate_configs(1, 2))
    assert [c.twice_values for c in cfgs] == [(2,), (0,), (-2,)]


def test_enumeration_matches_matrix_and_index():
    for sites, tw in ((3, 1), (2, 2)):
        cfgs = list(model.enumerate_configs(sites, tw))
        mat = model.config_matrix(sites, tw)
        assert mat.shape == (len(cfgs), sites)
        for k, cfg in enumerate(cfgs):
            assert tuple(mat[k]) == cfg.twice_values
            assert model.config_index(cfg, tw) == k


def test_enumeration_cap():
    with pytest.raises(model.ResourceCapError, match="1024"):
        list(model.enumerate_configs(10, 1, cap=1000))


def _random_spec(rng, n_total, n_system, twice_spin=1):
    j = rng.uniform(-1, 1, size=(n_total, n_total))
    j = 0.5 * (j + j.T)
    np.fill_diagonal(j, 0.0)
    return model.EnsembleSpec(
        n_total=n_total,
        n_system=n_system,
        twice_spin=twice_spin,
        couplings=j,
        fields=rng.uniform(-1, 1, size=n_total),
    )


def test_hamiltonian_single_site_field():
    spec = model.EnsembleSpec(
        n_total=2, n_system=1, twice_spin=1,
        couplings=np.zeros((2, 2)), fields=[0.7, 0.0],
    )
    assert model.hamiltonian_system(spec, model.SpinConfig((1,))) == pytest.approx(0.35)


def test_hamiltonian_double_sum_convention():
    # both ordered pairs count, so one bond at matrix entry J gives -J/2
    j = np.zeros((3, 3))
    j[0, 1] = j[1, 0] = 1.0
    spec = model.EnsembleSpec(
        n_total=3, n_system=2, twice_spin=1, couplings=j, fields=np.zeros(3)
    )
    e = model.hamiltonian_system(spec, model.SpinConfig((1, 1)))
    assert e == pytest.approx(-0.5)


def test_hamiltonian_env_open_subchain():
    # 10-site ring with physical bond energy J between neighbors, i.e.
    # matrix entries J/2 under the double-sum convention; the 8-site
    # environment subchain has 7 bonds and field h=J on every site
    j = model.build_coupling(model.NearestNeighborRing1D(j=0.5), 10)
    spec = model.EnsembleSpec(
        n_total=10, n_system=2, twice_spin=1, couplings=j, fields=np.full(10, 1.0)
    )
    sigma = model.SpinConfig((1,) * 8)
    assert model.hamiltonian_env(spec, sigma) == pytest.approx(9.0 / 4.0, abs=1e-14)


def test_hamiltonian_env_single_site():
    # a one-site environment has no internal bond, only its field term
    j = np.zeros((3, 3))
    j[0, 1] = j[1, 0] = 0.4
    spec = model.EnsembleSpec(
        n_total=3, n_system=2, twice_spin=1, couplings=j, fields=[0.0, 0.0, 1.2]
    )
    assert model.hamiltonian_env(spec, model.SpinConfig((1,))) == pytest.approx(0.6)
    assert model.hamiltonian_env(spec, model.SpinConfig((-1,))) == pytest.approx(-0.6)


def test_hamiltonian_interaction_examples():
    j = np.zeros((2, 2))
    j[0, 1] = j[1, 0] = 1.3
    spec = model.EnsembleSpec(
        n_total=2, n_system=1, twice_spin=1, couplings=j, fields=np.zeros(2)
    )
    v = model.hamiltonian_interaction(spec, model.SpinConfig((1,)), model.SpinConfig((1,)))
    assert v == pytest.approx(-1.3 / 2.0)

    # spin-1 environment with all zero projections kills the coupling
    spec1 = model.EnsembleSpec(
        n_total=3, n_system=1, twice_spin=2,
        couplings=model.build_coupling(model.NearestNeighborRing1D(j=1.0), 3),
        fields=np.zeros(3),
    )
    v = model.hamiltonian_interaction(spec1, model.SpinConfig((2,)), model.SpinConfig((0, 0)))
    assert v == 0.0


def test_hamiltonians_match_diagonal_oracle():
    # the scalar functions are the diagonal elements of the operator forms;
    # check against a directly assembled diagonal for random ensembles
    rng = np.random.default_rng(42)
    for _ in range(5):
        spec = _random_spec(rng, 5, 2)
        es = model.system_energies(spec)
        for k, cfg in enumerate(model.enumerate_configs(spec.n_system, 1)):
            assert model.hamiltonian_system(spec, cfg) == pytest.approx(es[k], abs=1e-13)
        ee = model.env_energies(spec)
        for k, cfg in enumerate(model.enumerate_configs(spec.n_env, 1)):
            assert model.hamiltonian_env(spec, cfg) == pytest.approx(ee[k], abs=1e-13)


def test_total_energy_decomposition_exhaustive():
    rng = np.random.default_rng(11)
    for n_total in (3, 4, 5, 6):
        spec = _random_spec(rng, n_total, rng.integers(1, n_total))
        p = spec.n_system
        for full in model.enumerate_configs(n_total, 1):
            s = model.SpinConfig(full.twice_values[:p])
            sigma = model.SpinConfig(full.twice_values[p:])
            parts = (
                model.hamiltonian_system(spec, s)
                + model.hamiltonian_env(spec, sigma)
                + model.hamiltonian_interaction(spec, s, sigma)
            )
            assert parts == pytest.approx(model.hamiltonian_total(spec, full), abs=1e-12)


def test_total_energies_table_matches_scalars():
    rng = np.random.default_rng(5)
    spec = _random_spec(rng, 5, 2)
    table = model.total_energies(spec)
    for g, full in enumerate(model.enumerate_configs(5, 1)):
        assert table[g] == pytest.approx(model.hamiltonian_total(spec, full), abs=1e-12)


def test_spec_validation():
    with pytest.raises(ValueError):
        model.EnsembleSpec(n_total=2, n_system=2, twice_spin=1,
                           couplings=np.zeros((2, 2)), fields=np.zeros(2))
    j = np.zeros((3, 3))
    j[0, 1] = 1.0  # not symmetric
    with pytest.raises(ValueError):
        model.EnsembleSpec(n_total=3, n_system=1, twice_spin=1,
                           couplings=j, fields=np.zeros(3))
    with pytest.raises(ValueError):
        model.SpinConfig((3,)).validate(1)


def test_torus_block_relabeling():
    spec = model.torus_block_ensemble(side=4, block_side=2, j=1.0)
    assert spec.n_system == 4 and spec.n_total == 16
    # each block site keeps exactly two couplings into the environment
    assert np.all(spec.cross_couplings.sum(axis=1) == 2.0)
    # and two inside the block
    assert np.all(spec.couplings[:4, :4].sum(axis=1) == 2.0)


def test_json_round_trip(tmp_path):
    doc = {
        "n_total": 6,
        "n_system": 2,
        "twice_spin": 1,
        "model": {"type": "nn_ring_1d", "J": 0.8},
        "fields": 0.25,
    }
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(doc))
    spec = model.load_ensemble(path)
    assert spec.couplings[0, 1] == 0.8
    assert np.all(spec.fields == 0.25)

    explicit = {
        "n_total": 3,
        "n_system": 1,
        "couplings": model.build_coupling(model.InfiniteRange(j=1.0), 3).tolist(),
        "fields": [0.0, 0.1, 0.2],
    }
    spec2 = model.ensemble_from_dict(explicit)
    assert spec2.couplings[0, 2] == pytest.approx(1 / 3)

    torus = {
        "n_total": 9,
        "n_system": 1,
        "model": {"type": "nn_torus_2d", "side": 3, "system_block_side": 1},
        "fields": 0.0,
    }
    spec3 = model.ensemble_from_dict(torus)
    assert spec3.cross_couplings.sum() == 4.0

    with pytest.raises(ValueError):
        model.ensemble_from_dict({"n_total": 3, "n_system": 1, "model": {"type": "nope"}})
