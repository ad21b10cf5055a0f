import numpy as np
import pytest

from weavebasis.plan import Partition, choose_partition, gates_for_diagonal
from weavebasis.u1 import (
    LatticeGeometry, ModelParams, bilinear_terms, build_curl_incidence, build_model,
    electric_form, magnetic_terms, model_report, rotate_model,
)

LATTICES = [(nx, ny) for nx in range(2, 5) for ny in range(2, 5)]


def test_geometry_counts():
    geo = LatticeGeometry(3, 3)
    assert geo.n_links == 18
    assert geo.n_plaquettes == 8
    with pytest.raises(ValueError):
        LatticeGeometry(1, 3)


@pytest.mark.parametrize("nx,ny", [(n, n) for n in range(2, 7)])
def test_plaquette_count(nx, ny):
    assert LatticeGeometry(nx, ny).n_plaquettes == nx * ny - 1


def test_curl_shape_2x2():
    assert build_curl_incidence(LatticeGeometry(2, 2)).shape == (8, 3)


@pytest.mark.parametrize("nx,ny", LATTICES)
def test_curl_columns_have_four_links(nx, ny):
    c = build_curl_incidence(LatticeGeometry(nx, ny))
    assert all(np.count_nonzero(c[:, p]) == 4 for p in range(c.shape[1]))
    assert set(np.unique(c)) <= {-1.0, 0.0, 1.0}


@pytest.mark.parametrize("nx,ny", LATTICES)
def test_curl_row_sums_telescope(nx, ny):
    # the full curl sums to zero on each link; dropping the last plaquette
    # leaves +-1 exactly on its four links
    geo = LatticeGeometry(nx, ny)
    rows = build_curl_incidence(geo).sum(axis=1)
    x, y = nx - 1, ny - 1
    last = {geo.xlink(x, y), geo.ylink(x, y), geo.xlink(x, y + 1), geo.ylink(x + 1, y)}
    for link, v in enumerate(rows):
        assert abs(v) == (1.0 if link in last else 0.0)


def test_electric_form_2x2():
    ef = electric_form(LatticeGeometry(2, 2), ModelParams())
    a = ef.matrix
    assert a.shape == (3, 3)
    np.testing.assert_array_equal(a, a.T)
    assert np.linalg.eigvalsh(a).min() >= -1e-12
    np.testing.assert_array_equal(np.diag(a), 4.0)
    assert ef.prefactor == 0.5


@pytest.mark.parametrize("nx,ny", LATTICES)
def test_electric_form_structure(nx, ny):
    a = electric_form(LatticeGeometry(nx, ny), ModelParams()).matrix
    np.testing.assert_array_equal(np.diag(a), 4.0)
    assert np.linalg.eigvalsh(a).min() > 0  # eliminating one plaquette removes the zero mode
    if nx >= 3 and ny >= 3:
        assert max(np.count_nonzero(row) for row in a) <= 5


def test_coupling_scaling():
    geo = LatticeGeometry(3, 2)
    r = np.arange(1.0, 6.0)
    e1 = electric_form(geo, ModelParams(g=1.0)).energy(r)
    e2 = electric_form(geo, ModelParams(g=2.0)).energy(r)
    assert e2 == pytest.approx(4 * e1)
    assert magnetic_terms(geo, ModelParams(g=2.0)).prefactor == pytest.approx(-1 / 8)


@pytest.mark.parametrize("nx,ny,n", [(3, 3, 8), (2, 2, 3)])
def test_magnetic_terms(nx, ny, n):
    mt = magnetic_terms(LatticeGeometry(nx, ny), ModelParams())
    assert mt.n_ops == n
    assert all(len(arg) == 1 for arg in mt.local_args)
    assert len(mt.global_arg) == n


def test_params_validation():
    for bad in ({"g": 0}, {"a": -1}, {"n_q": 0}):
        with pytest.raises(ValueError):
            ModelParams(**bad)


def test_rotate_identity_partition():
    m = build_model(LatticeGeometry(3, 3), ModelParams())
    rot = rotate_model(m.electric, m.magnetic, Partition((1,) * 8))
    np.testing.assert_array_equal(rot.electric_matrix, m.electric.matrix)
    assert rot.local_args == m.magnetic.local_args
    assert rot.global_arg == m.magnetic.global_arg


@pytest.mark.parametrize("nx,ny", LATTICES)
def test_rotate_preserves_spectrum(nx, ny):
    geo = LatticeGeometry(nx, ny)
    m = build_model(geo, ModelParams())
    n = geo.n_plaquettes
    for p in {choose_partition(n), Partition((n,)), choose_partition(n, 2)}:
        rot = rotate_model(m.electric, m.magnetic, p)
        np.testing.assert_allclose(np.linalg.eigvalsh(rot.electric_matrix),
                                   np.linalg.eigvalsh(m.electric.matrix), atol=1e-10)
        assert rot.electric_nnz <= n ** 2


def test_rotate_mismatch():
    m = build_model(LatticeGeometry(2, 2), ModelParams())
    with pytest.raises(ValueError):
        rotate_model(m.electric, m.magnetic, Partition((2, 2)))


def test_bilinear_terms():
    assert bilinear_terms(np.array([[4.0, -1.0], [-1.0, 4.0]])) == 3
    assert bilinear_terms(np.eye(3) * 1e-14) == 0


def test_model_report_3x3():
    rep = model_report(LatticeGeometry(3, 3), ModelParams(n_q=2))
    assert rep["lattice"]["n_p"] == 8
    assert rep["partition"] == [3, 3, 2]
    assert rep["doc"]["original"] == 8
    orig = rep["gates"]["original"]
    assert orig["magnetic_global"] == gates_for_diagonal(16)
    assert orig["magnetic_local"] == 8 * gates_for_diagonal(2)
    assert orig["magnetic_global_magnitude_class"] == 5
    assert rep["gates"]["weaved"]["magnitude_class"] == 2
    assert rep["gates"]["weaved"]["extrapolated"] is False
    assert rep["electric_terms"]["weaved"] <= rep["electric_terms"]["bound"]
    coefs = [c for _, c in rep["rotated_global_argument"]]
    assert sum(c * c for c in coefs) == pytest.approx(8)


def test_model_report_is_deterministic():
    geo, params = LatticeGeometry(4, 3), ModelParams(g=0.7, n_q=3)
    assert model_report(geo, params) == model_report(geo, params)


def test_electric_energy_matches_link_sum():
    # R^T C^T C R equals the sum over links of the squared curl
    c = build_curl_incidence(LatticeGeometry(3, 2))
    r = np.array([0.3, -1.2, 2.0, 0.0, 0.7])
    assert r @ (c.T @ c) @ r == pytest.approx(np.sum((c @ r) ** 2))


@pytest.mark.parametrize("n_q", [1, 2, 3])
def test_global_cost_scaling(n_q):
    # the global cosine costs a diagonal on n_q * N_p qubits before, n_q * N_S after
    for nx, ny in [(2, 2), (3, 3), (4, 4)]:
        geo = LatticeGeometry(nx, ny)
        rep = model_report(geo, ModelParams(n_q=n_q))
        n_s = len(rep["partition"])
        assert rep["gates"]["original"]["magnetic_global"] == gates_for_diagonal(n_q * geo.n_plaquettes)
        assert rep["gates"]["weaved"]["magnetic_global"] == gates_for_diagonal(n_q * n_s)
        assert rep["gates"]["weaved"]["electric"] <= geo.n_plaquettes ** 2 * n_q ** 2
